use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::solve::{solve_section, SolveOptions};
use super::{GeometryError, PlaneChart};
use crate::numeric::{MultiPoly, C64};

const PROBE_SEED: u64 = 0x5eed_ab31;

/// Generic fiber degrees of a variety: over vertical planes `x = b` and over
/// planes in general position. They differ when sheets go to infinity in the
/// vertical direction (e.g. `y² = x³ + 1` has 2 and 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberDegree {
    pub vertical: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<usize>,
}

impl FiberDegree {
    /// Expected degree of a fiber over `chart`, if known.
    pub fn for_chart(&self, chart: &PlaneChart) -> Option<usize> {
        if chart.is_vertical() {
            Some(self.vertical)
        } else {
            self.general
        }
    }
}

/// A complete intersection `{f_1 = … = f_p = 0}` in `ℂ^{n+p}` with the
/// variables split into base `x` and fiber `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VarietyRepr", into = "VarietyRepr")]
pub struct VarietySpec {
    x_vars: Vec<String>,
    y_vars: Vec<String>,
    defs: Vec<MultiPoly>,
    degree: FiberDegree,
    /// `∂f_k/∂v` for every def and every variable.
    jacobian: Vec<Vec<MultiPoly>>,
}

#[derive(Serialize, Deserialize)]
struct VarietyRepr {
    x_vars: Vec<String>,
    y_vars: Vec<String>,
    defs: Vec<MultiPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<FiberDegree>,
}

impl TryFrom<VarietyRepr> for VarietySpec {
    type Error = GeometryError;
    fn try_from(r: VarietyRepr) -> Result<Self, Self::Error> {
        match r.degree {
            Some(d) => VarietySpec::with_degree(&r.x_vars, &r.y_vars, r.defs, d),
            None => VarietySpec::new(&r.x_vars, &r.y_vars, r.defs),
        }
    }
}

impl From<VarietySpec> for VarietyRepr {
    fn from(v: VarietySpec) -> Self {
        VarietyRepr {
            x_vars: v.x_vars,
            y_vars: v.y_vars,
            defs: v.defs,
            degree: Some(v.degree),
        }
    }
}

impl VarietySpec {
    /// Builds the variety and probes its generic fiber degrees at
    /// pseudo-random charts (fixed seed).
    pub fn new<S: AsRef<str>>(x_vars: &[S], y_vars: &[S], defs: Vec<MultiPoly>) -> Result<Self, GeometryError> {
        let mut v = Self::unprobed(x_vars, y_vars, defs)?;
        v.degree = v.probe_degree()?;
        Ok(v)
    }

    /// Builds the variety with a caller-declared generic degree.
    pub fn with_degree<S: AsRef<str>>(
        x_vars: &[S],
        y_vars: &[S],
        defs: Vec<MultiPoly>,
        degree: FiberDegree,
    ) -> Result<Self, GeometryError> {
        if degree.vertical == 0 || degree.general == Some(0) {
            return Err(GeometryError::InvalidVariety(
                "declared fiber degree must be positive".into(),
            ));
        }
        let mut v = Self::unprobed(x_vars, y_vars, defs)?;
        v.degree = degree;
        Ok(v)
    }

    fn unprobed<S: AsRef<str>>(x_vars: &[S], y_vars: &[S], defs: Vec<MultiPoly>) -> Result<Self, GeometryError> {
        let x_vars: Vec<String> = x_vars.iter().map(|s| s.as_ref().to_string()).collect();
        let y_vars: Vec<String> = y_vars.iter().map(|s| s.as_ref().to_string()).collect();
        if x_vars.is_empty() || y_vars.is_empty() {
            return Err(GeometryError::InvalidVariety(
                "need n >= 1 base and p >= 1 fiber variables".into(),
            ));
        }
        if defs.len() != y_vars.len() {
            return Err(GeometryError::InvalidVariety(format!(
                "{} defining polynomials for {} fiber variables",
                defs.len(),
                y_vars.len()
            )));
        }
        let all: Vec<String> = x_vars.iter().chain(&y_vars).cloned().collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(GeometryError::InvalidVariety("variable names must be distinct".into()));
        }
        let defs = defs
            .iter()
            .map(|f| {
                if f.is_zero() {
                    return Err(GeometryError::InvalidVariety("zero defining polynomial".into()));
                }
                f.with_vars(&all)
                    .ok_or_else(|| GeometryError::InvalidVariety(format!("{f} uses an undeclared variable")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let jacobian = defs
            .iter()
            .map(|f| (0..all.len()).map(|k| f.derivative(k)).collect())
            .collect();
        Ok(VarietySpec {
            x_vars,
            y_vars,
            defs,
            degree: FiberDegree {
                vertical: 0,
                general: None,
            },
            jacobian,
        })
    }

    fn probe_degree(&self) -> Result<FiberDegree, GeometryError> {
        let (n, p) = (self.n(), self.p());
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let sample = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let opts = SolveOptions::unchecked();
        let mut vertical = 0;
        for _ in 0..2 {
            let b: Vec<C64> = (0..n).map(|_| sample(&mut rng)).collect();
            let chart = PlaneChart::vertical(p, b);
            let fiber = solve_section(self, &chart.plane_equations(&self.vars()), opts)?;
            vertical = vertical.max(fiber.degree());
        }
        if vertical == 0 {
            return Err(GeometryError::InvalidVariety("empty fibers over the base".into()));
        }
        let params: Vec<C64> = (0..PlaneChart::param_count(n, p)).map(|_| sample(&mut rng)).collect();
        let chart = PlaneChart::from_params(n, p, &params)?;
        let general = solve_section(self, &chart.plane_equations(&self.vars()), opts)
            .ok()
            .map(|f| f.degree())
            .filter(|&d| d > 0);
        Ok(FiberDegree { vertical, general })
    }

    pub fn n(&self) -> usize {
        self.x_vars.len()
    }

    pub fn p(&self) -> usize {
        self.y_vars.len()
    }

    pub fn x_vars(&self) -> &[String] {
        &self.x_vars
    }

    pub fn y_vars(&self) -> &[String] {
        &self.y_vars
    }

    /// `(x_1, …, x_n, y_1, …, y_p)`.
    pub fn vars(&self) -> Vec<String> {
        self.x_vars.iter().chain(&self.y_vars).cloned().collect()
    }

    /// Defining polynomials, expressed over [`VarietySpec::vars`].
    pub fn defs(&self) -> &[MultiPoly] {
        &self.defs
    }

    pub fn degree(&self) -> FiberDegree {
        self.degree
    }

    pub(crate) fn jacobian_polys(&self) -> &[Vec<MultiPoly>] {
        &self.jacobian
    }

    fn check_chart(&self, chart: &PlaneChart) -> Result<(), GeometryError> {
        if chart.n() != self.n() || chart.p() != self.p() {
            return Err(GeometryError::DimensionMismatch(format!(
                "chart is for (n, p) = ({}, {}), variety has ({}, {})",
                chart.n(),
                chart.p(),
                self.n(),
                self.p()
            )));
        }
        Ok(())
    }
}

/// Rational residue data `Res[Ψ dx∧dy / (f_1 ⋯ f_p)]`, optionally divided
/// by a polar factor `h` that does not vanish identically on the variety
/// (making the represented form meromorphic).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResidueRepr", into = "ResidueRepr")]
pub struct ResidueData {
    variety: VarietySpec,
    numerator: MultiPoly,
    polar: Option<MultiPoly>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct ResidueRepr {
    variety: VarietySpec,
    numerator: MultiPoly,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polar: Option<MultiPoly>,
    #[serde(default)]
    label: String,
}

impl TryFrom<ResidueRepr> for ResidueData {
    type Error = GeometryError;
    fn try_from(r: ResidueRepr) -> Result<Self, Self::Error> {
        let data = ResidueData::new(r.variety, r.numerator, r.label)?;
        match r.polar {
            Some(h) => data.with_polar(h),
            None => Ok(data),
        }
    }
}

impl From<ResidueData> for ResidueRepr {
    fn from(d: ResidueData) -> Self {
        ResidueRepr {
            variety: d.variety,
            numerator: d.numerator,
            polar: d.polar,
            label: d.label,
        }
    }
}

impl ResidueData {
    pub fn new(variety: VarietySpec, numerator: MultiPoly, label: impl Into<String>) -> Result<Self, GeometryError> {
        let numerator = express(&variety, &numerator, "numerator")?;
        Ok(ResidueData {
            variety,
            numerator,
            polar: None,
            label: label.into(),
        })
    }

    pub fn with_polar(mut self, polar: MultiPoly) -> Result<Self, GeometryError> {
        if polar.is_zero() {
            return Err(GeometryError::InvalidVariety("polar factor must be nonzero".into()));
        }
        self.polar = Some(express(&self.variety, &polar, "polar factor")?);
        Ok(self)
    }

    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    /// `Ψ`, expressed over the variety's variables.
    pub fn numerator(&self) -> &MultiPoly {
        &self.numerator
    }

    pub fn polar(&self) -> Option<&MultiPoly> {
        self.polar.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same variety, numerator multiplied by `s`.
    pub fn scaled(&self, s: C64) -> ResidueData {
        ResidueData {
            numerator: self.numerator.scale(s),
            ..self.clone()
        }
    }

    /// Pointwise weight `Ψ / h` at a point of the ambient space.
    pub fn weight(&self, point: &[C64]) -> C64 {
        let psi = self.numerator.eval(point);
        match &self.polar {
            Some(h) => psi / h.eval(point),
            None => psi,
        }
    }
}

fn express(v: &VarietySpec, poly: &MultiPoly, what: &str) -> Result<MultiPoly, GeometryError> {
    poly.with_vars(&v.vars())
        .ok_or_else(|| GeometryError::InvalidVariety(format!("{what} {poly} uses an undeclared variable")))
}

/// The defining polynomials restricted to the plane of `chart`, as
/// polynomials in the fiber variables only.
pub fn plane_substitute(v: &VarietySpec, chart: &PlaneChart) -> Result<Vec<MultiPoly>, GeometryError> {
    v.check_chart(chart)?;
    let vars = v.vars();
    Ok(v.defs
        .iter()
        .map(|f| {
            let mut g = f.clone();
            for i in 0..v.n() {
                g = g.substitute(i, &chart.base_coordinate(&vars, i));
            }
            g.with_vars(&v.y_vars).expect("base variables eliminated")
        })
        .collect())
}

pub(crate) fn check_chart(v: &VarietySpec, chart: &PlaneChart) -> Result<(), GeometryError> {
    v.check_chart(chart)
}
