use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{basis_labels, label_monomial, RadonError, RadonTransform};
use crate::geometry::{solve_fiber_with, DomainSpec, ParamSpace, PlaneChart, ResidueData, SamplingPlan};
use crate::numeric::{ring_derivative, ring_laurent, C64};
use crate::par_map;
use crate::residue::{punctual_residue, trace_at, MonomialIndex, TraceOptions, TraceTable};

/// Outcome of [`verify_shock_relations`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockReport {
    /// Largest `|∂_{b_i} u_{I+e_1} − ∂_{a_i^1} u_I|` over checked triples.
    pub max_residual: f64,
    pub checked: usize,
    pub worst: Option<ShockWorst>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockWorst {
    pub sample: usize,
    pub slot: usize,
    pub index: MonomialIndex,
    pub residual: f64,
}

/// Checks `∂_{b_i} u_{I+e_1} = ∂_{a_i^1} u_I` at every clean sample of a
/// chart table, with derivatives taken from the probe rings.
pub fn verify_shock_relations(t: &TraceTable, tol: f64) -> Result<ShockReport, RadonError> {
    if t.space != ParamSpace::Chart {
        return Err(RadonError::InsufficientMargin(
            "shock relations need a table over the full chart".into(),
        ));
    }
    let p = t.p;
    let pairs: Vec<(usize, usize, &MonomialIndex)> = t
        .indices
        .iter()
        .enumerate()
        .filter_map(|(k, idx)| t.index_of(&idx.shifted(0, 1)).map(|up| (k, up, idx)))
        .collect();
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut worst = None;
    for (s, sample) in t.samples.iter().enumerate() {
        if !sample.is_clean() {
            continue;
        }
        for slot in 0..t.n {
            let axis_a = PlaneChart::param_index(p, slot, 0);
            let axis_b = PlaneChart::param_index(p, slot, p);
            let (Some(ra), Some(rb)) = (
                sample.probes.iter().find(|r| r.axis == axis_a && r.is_complete()),
                sample.probes.iter().find(|r| r.axis == axis_b && r.is_complete()),
            ) else {
                continue;
            };
            for &(k, up, idx) in &pairs {
                let da = ring_derivative(&ra.column(k), ra.radius, 1);
                let db = ring_derivative(&rb.column(up), rb.radius, 1);
                let residual = (db - da).norm();
                checked += 1;
                if residual > max_residual || worst.is_none() {
                    max_residual = max_residual.max(residual);
                    worst = Some(ShockWorst {
                        sample: s,
                        slot,
                        index: idx.clone(),
                        residual,
                    });
                }
            }
        }
    }
    if checked == 0 {
        return Err(RadonError::InsufficientMargin(
            "no clean sample has probe rings in both a and b, or no index pair I, I+e1".into(),
        ));
    }
    Ok(ShockReport {
        max_residual,
        checked,
        worst,
        tol,
        pass: max_residual <= tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Holomorphic,
    Pole,
    /// Some rings around the sample see a principal part and others do not,
    /// or a ring could not be evaluated.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Holomorphic,
    Meromorphic,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyOptions {
    /// A ring sees a pole when its principal part exceeds this fraction of
    /// the ring's value scale.
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub classification: Classification,
    pub statuses: Vec<SampleStatus>,
    /// Parameters of the samples classified as poles.
    pub poles: Vec<Vec<C64>>,
    /// Largest principal-part ratio among rings that saw no pole.
    pub max_regular_ratio: f64,
    /// Smallest principal-part ratio among rings that saw a pole.
    pub min_pole_ratio: Option<f64>,
    pub tol: f64,
}

/// Classifies every sample of the transform by the principal parts
/// `c_{-1}, c_{-2}` of its coefficients on each probe ring. A sample is a
/// pole when some coefficient shows a principal part on every axis.
pub fn verify_holomorphy(rt: &RadonTransform, opts: HolomorphyOptions) -> Result<HolomorphyReport, RadonError> {
    let t = &rt.table;
    let coeffs: Vec<usize> = {
        let mut k = rt.label_index.clone();
        k.sort_unstable();
        k.dedup();
        k
    };
    let mut statuses = Vec::with_capacity(t.samples.len());
    let mut poles = Vec::new();
    let mut max_regular_ratio: f64 = 0.0;
    let mut min_pole_ratio: Option<f64> = None;
    for sample in &t.samples {
        if sample.probes.is_empty() {
            return Err(RadonError::InsufficientMargin(
                "holomorphy check needs probe rings".into(),
            ));
        }
        if sample.probes.iter().any(|r| !r.is_complete()) {
            statuses.push(SampleStatus::Inconclusive);
            continue;
        }
        let mut status = SampleStatus::Holomorphic;
        for &k in &coeffs {
            let mut seen = 0;
            for ring in &sample.probes {
                let col = ring.column(k);
                let r = ring.radius;
                let principal = ring_laurent(&col, r, -1).norm() / r + ring_laurent(&col, r, -2).norm() / (r * r);
                let size = col.iter().map(|z| z.norm()).fold(ring.scale, f64::max);
                let ratio = if size > 0.0 { principal / size } else { 0.0 };
                if ratio > opts.tol {
                    seen += 1;
                    min_pole_ratio = Some(min_pole_ratio.map_or(ratio, |m| m.min(ratio)));
                } else {
                    max_regular_ratio = max_regular_ratio.max(ratio);
                }
            }
            if seen == sample.probes.len() {
                status = SampleStatus::Pole;
            } else if seen > 0 && status == SampleStatus::Holomorphic {
                status = SampleStatus::Inconclusive;
            }
        }
        if status == SampleStatus::Pole {
            poles.push(sample.params.clone());
        }
        statuses.push(status);
    }
    let classification = if statuses.contains(&SampleStatus::Inconclusive) {
        Classification::Inconclusive
    } else if poles.is_empty() {
        Classification::Holomorphic
    } else {
        Classification::Meromorphic
    };
    Ok(HolomorphyReport {
        classification,
        statuses,
        poles,
        max_regular_ratio,
        min_pole_ratio,
        tol: opts.tol,
    })
}

/// Affine change of chart parameters `t = M t′ + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: Vec<Vec<C64>>,
    pub offset: Vec<C64>,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| C64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        AffineMap {
            matrix,
            offset: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, t: &[C64]) -> Vec<C64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| row.iter().zip(t).map(|(m, x)| m * x).sum::<C64>() + c)
            .collect()
    }

    fn validate(&self, dim: usize) -> Result<(), RadonError> {
        if self.dim() != dim || self.matrix.len() != dim || self.matrix.iter().any(|r| r.len() != dim) {
            return Err(RadonError::InvalidMap(format!("expected a {dim}x{dim} map")));
        }
        let m = DMatrix::from_fn(dim, dim, |r, c| self.matrix[r][c]);
        let det = m.determinant();
        let norm = self.matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if det.norm() <= 1e-12 * norm.powi(dim as i32) {
            return Err(RadonError::InvalidMap("matrix is singular".into()));
        }
        Ok(())
    }
}

/// Outcome of [`reparametrize_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReparamReport {
    /// Largest `|pullback − direct| / max(1, |pullback|)` over components and samples.
    pub max_discrepancy: f64,
    pub components: usize,
    pub samples: usize,
    /// Samples skipped because the fiber was clustered or failed.
    pub skipped: usize,
    pub tol: f64,
    pub pass: bool,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

fn det(m: DMatrix<C64>) -> C64 {
    if m.nrows() == 1 {
        m[(0, 0)]
    } else {
        m.determinant()
    }
}

/// Compares the transform computed directly in the parameters `t′` of the
/// family `H_{μ(t′)}` with the pullback `μ*R` of the chart coefficients.
///
/// The direct side sums `(−1)^n det[∂l_i/∂t′_{k_j}] Ψ/J` over fiber points;
/// the pullback side combines the chart traces `u_I(μ(t′))` with the
/// `n × n` minors of `M`.
pub fn reparametrize_check(
    data: &ResidueData,
    domain: &DomainSpec,
    plan: &SamplingPlan,
    mu: &AffineMap,
    tol: f64,
) -> Result<ReparamReport, RadonError> {
    let v = data.variety();
    let (n, p) = (v.n(), v.p());
    let dim = PlaneChart::param_count(n, p);
    mu.validate(dim)?;
    if domain.dim() != dim {
        return Err(RadonError::InvalidMap(format!(
            "domain has dimension {}, chart has {dim}",
            domain.dim()
        )));
    }
    let labels = basis_labels(n, p);
    let label_axes: Vec<Vec<usize>> = labels
        .iter()
        .map(|l| {
            l.iter()
                .enumerate()
                .map(|(i, &j)| PlaneChart::param_index(p, i, j - 1))
                .collect()
        })
        .collect();
    let indices: Vec<MonomialIndex> = labels.iter().map(|l| label_monomial(l, p)).collect();
    let components = subsets(dim, n);
    let mut opts = TraceOptions::default();
    opts.solve.expected_degree = v.degree().general;
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };

    let nodes = domain.nodes(&plan.layout)?;
    let per_sample: Vec<Option<f64>> = par_map(&nodes, |tp| {
        let t = mu.apply(tp);
        let chart = PlaneChart::from_params(n, p, &t).ok()?;
        let u = trace_at(data, &chart, &indices, opts).ok()?;
        if u.clustered {
            return None;
        }
        let fiber = solve_fiber_with(v, &chart, opts.solve).ok()?;
        let mut worst: f64 = 0.0;
        for k in &components {
            let pullback: C64 = label_axes
                .iter()
                .zip(&u.values)
                .map(|(axes, uv)| uv * det(DMatrix::from_fn(n, n, |i, j| mu.matrix[axes[i]][k[j]])))
                .sum();
            let mut direct = C64::new(0.0, 0.0);
            for pt in &fiber.points {
                let y = &pt.coords[n..];
                let a = DMatrix::from_fn(n, n, |i, j| {
                    let col = k[j];
                    let mut s = mu.matrix[PlaneChart::param_index(p, i, p)][col];
                    for (jj, yj) in y.iter().enumerate() {
                        s += yj * mu.matrix[PlaneChart::param_index(p, i, jj)][col];
                    }
                    -s
                });
                let base = punctual_residue(data, pt, &MonomialIndex::zero(p)).ok()?;
                direct += base * det(a) * sign;
            }
            worst = worst.max((pullback - direct).norm() / pullback.norm().max(1.0));
        }
        Some(worst)
    });
    let skipped = per_sample.iter().filter(|s| s.is_none()).count();
    let max_discrepancy = per_sample.iter().flatten().copied().fold(0.0, f64::max);
    let samples = per_sample.len() - skipped;
    Ok(ReparamReport {
        max_discrepancy,
        components: components.len(),
        samples,
        skipped,
        tol,
        pass: samples > 0 && max_discrepancy <= tol,
    })
}
