use serde::{Deserialize, Serialize};

use super::{GeometryError, PlaneChart};
use crate::numeric::{ring_points, C64};

/// Which chart parameters a sampled quantity depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSpace {
    /// Vertical planes `x = b`: the parameters are the base point `b ∈ ℂⁿ`.
    Base,
    /// The full affine chart `(a, b) ∈ ℂ^{n(p+1)}`, slot-ordered as in
    /// [`PlaneChart::params`].
    Chart,
}

impl ParamSpace {
    pub fn dim(self, n: usize, p: usize) -> usize {
        match self {
            ParamSpace::Base => n,
            ParamSpace::Chart => PlaneChart::param_count(n, p),
        }
    }

    pub fn chart(self, n: usize, p: usize, params: &[C64]) -> Result<PlaneChart, GeometryError> {
        match self {
            ParamSpace::Base => {
                if params.len() != n {
                    return Err(GeometryError::DimensionMismatch(format!(
                        "base space has dimension {n}, got {} parameters",
                        params.len()
                    )));
                }
                Ok(PlaneChart::vertical(p, params.to_vec()))
            }
            ParamSpace::Chart => PlaneChart::from_params(n, p, params),
        }
    }

    /// Human-readable axis names (`b1`, or `a1_1`, `b1`, …).
    pub fn axis_names(self, n: usize, p: usize) -> Vec<String> {
        match self {
            ParamSpace::Base => (1..=n).map(|i| format!("b{i}")).collect(),
            ParamSpace::Chart => (1..=n)
                .flat_map(|i| {
                    (1..=p)
                        .map(move |j| format!("a{i}_{j}"))
                        .chain(std::iter::once(format!("b{i}")))
                })
                .collect(),
        }
    }
}

/// A closed polydisc in parameter space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct DomainSpec {
    center: Vec<C64>,
    radii: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    center: Vec<C64>,
    radii: Vec<f64>,
}

impl TryFrom<DomainRepr> for DomainSpec {
    type Error = GeometryError;
    fn try_from(r: DomainRepr) -> Result<Self, Self::Error> {
        DomainSpec::new(r.center, r.radii)
    }
}

impl From<DomainSpec> for DomainRepr {
    fn from(d: DomainSpec) -> Self {
        DomainRepr {
            center: d.center,
            radii: d.radii,
        }
    }
}

impl DomainSpec {
    pub fn new(center: Vec<C64>, radii: Vec<f64>) -> Result<Self, GeometryError> {
        if center.len() != radii.len() || center.is_empty() {
            return Err(GeometryError::DimensionMismatch(format!(
                "center has {} coordinates, radii has {}",
                center.len(),
                radii.len()
            )));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(GeometryError::DimensionMismatch(
                "radii must be positive and finite".into(),
            ));
        }
        Ok(DomainSpec { center, radii })
    }

    pub fn center(&self) -> &[C64] {
        &self.center
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Closed polydisc membership, with a relative slack for rounding.
    pub fn contains(&self, point: &[C64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.center)
                .zip(&self.radii)
                .all(|((z, c), r)| (z - c).norm() <= r * (1.0 + 1e-12))
    }

    /// Node coordinates for a layout, in a deterministic order.
    pub fn nodes(&self, layout: &SampleLayout) -> Result<Vec<Vec<C64>>, GeometryError> {
        match layout {
            SampleLayout::Lattice { per_axis } => {
                if per_axis.len() != self.dim() || per_axis.contains(&0) {
                    return Err(GeometryError::DimensionMismatch(format!(
                        "lattice needs one positive count per axis ({} axes)",
                        self.dim()
                    )));
                }
                let axes: Vec<Vec<C64>> = per_axis
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| {
                        (0..m)
                            .map(|j| {
                                let t = if m == 1 {
                                    0.0
                                } else {
                                    -1.0 + 2.0 * j as f64 / (m - 1) as f64
                                };
                                self.center[k] + C64::new(self.radii[k] * t, 0.0)
                            })
                            .collect()
                    })
                    .collect();
                let mut out = vec![Vec::new()];
                for axis in &axes {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            axis.iter().map(move |&z| {
                                let mut v = prefix.clone();
                                v.push(z);
                                v
                            })
                        })
                        .collect();
                }
                Ok(out)
            }
            SampleLayout::Circle { axis, nodes } => {
                if *axis >= self.dim() || *nodes == 0 {
                    return Err(GeometryError::DimensionMismatch(format!(
                        "circle layout on axis {axis} of a {}-dimensional domain",
                        self.dim()
                    )));
                }
                Ok(ring_points(self.center[*axis], self.radii[*axis], *nodes)
                    .into_iter()
                    .map(|z| {
                        let mut v = self.center.clone();
                        v[*axis] = z;
                        v
                    })
                    .collect())
            }
        }
    }
}

/// Where samples are taken inside a [`DomainSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleLayout {
    /// Tensor lattice along the real diameter of each axis.
    Lattice { per_axis: Vec<usize> },
    /// Equispaced points on the boundary circle of one axis, the other
    /// coordinates held at the center.
    Circle { axis: usize, nodes: usize },
}

/// A layout plus optional probe rings used for Cauchy differentiation and
/// pole diagnostics: around each node, one ring per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub layout: SampleLayout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Probe>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub radius: f64,
    pub nodes: usize,
}

impl SamplingPlan {
    pub fn lattice(per_axis: Vec<usize>) -> Self {
        SamplingPlan {
            layout: SampleLayout::Lattice { per_axis },
            probe: None,
        }
    }

    pub fn circle(axis: usize, nodes: usize) -> Self {
        SamplingPlan {
            layout: SampleLayout::Circle { axis, nodes },
            probe: None,
        }
    }

    pub fn with_probe(mut self, radius: f64, nodes: usize) -> Self {
        self.probe = Some(Probe { radius, nodes });
        self
    }
}
