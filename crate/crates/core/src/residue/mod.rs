//! Punctual residues at fiber points and the traces
//! `u_I = Σ_P Res_P(Ψ y^I dx∧dy / (f_1 ⋯ f_p · l_1 ⋯ l_n))`.
//!
//! At a simple point the residue is `Ψ(P) y^I(P) / J(P)`, with `J` the
//! Jacobian fixed by the geometry conventions. Clustered points are handled
//! by averaging the total cluster residue over a small circle of perturbed
//! charts, which is exact for the holomorphic cluster sum up to aliasing.

mod table;

use serde::{Deserialize, Serialize};

pub use table::{trace_table, ProbeValues, SampleFlag, TraceSample, TraceTable, TraceTableOptions};

use crate::geometry::{
    solve_fiber_with, solve_section, FiberPoint, GeometryError, PlaneChart, ResidueData, SolveOptions,
};
use crate::numeric::{ring_points, MultiPoly, NumericError, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResidueError {
    #[error("point is a cluster of {cluster_size} solutions; use clustered_residue")]
    ClusterPoint { cluster_size: usize },
    #[error("perturbation failed: {0}")]
    PerturbationFailure(String),
    #[error("the polar factor vanishes at a fiber point")]
    PoleAtPoint,
    #[error("only {clean} of {total} samples are clean (need {needed})")]
    TooFewCleanSamples { clean: usize, total: usize, needed: usize },
    #[error("monomial index has length {found}, expected {expected}")]
    IndexLength { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Exponents `(i_1, …, i_p)` of the fiber monomial `y^I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonomialIndex(pub Vec<u32>);

impl MonomialIndex {
    pub fn zero(p: usize) -> Self {
        MonomialIndex(vec![0; p])
    }

    pub fn single(k: u32) -> Self {
        MonomialIndex(vec![k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|I|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `I + k e_slot`.
    pub fn shifted(&self, slot: usize, k: u32) -> Self {
        let mut e = self.0.clone();
        e[slot] += k;
        MonomialIndex(e)
    }

    /// All indices with `|I| ≤ max_order`, graded, then lexicographically
    /// decreasing within a degree.
    pub fn up_to(p: usize, max_order: u32) -> Vec<Self> {
        (0..=max_order).flat_map(|k| Self::of_order(p, k)).collect()
    }

    /// All indices of order exactly `k`.
    pub fn of_order(p: usize, k: u32) -> Vec<Self> {
        if p == 1 {
            return vec![MonomialIndex(vec![k])];
        }
        (0..=k)
            .rev()
            .flat_map(|first| {
                Self::of_order(p - 1, k - first).into_iter().map(move |rest| {
                    let mut e = vec![first];
                    e.extend(rest.0);
                    MonomialIndex(e)
                })
            })
            .collect()
    }

    /// All indices in the box `0 ≤ i_j ≤ max_per_slot`.
    pub fn boxed(p: usize, max_per_slot: u32) -> Vec<Self> {
        let mut out = vec![Vec::new()];
        for _ in 0..p {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u32>| {
                    (0..=max_per_slot).map(move |k| {
                        let mut e = prefix.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        out.into_iter().map(MonomialIndex).collect()
    }

    /// `y^I` at a point with coordinates `(x, y)`.
    pub fn eval(&self, n: usize, coords: &[C64]) -> C64 {
        self.0
            .iter()
            .enumerate()
            .fold(C64::new(1.0, 0.0), |acc, (j, &k)| acc * coords[n + j].powu(k))
    }
}

impl std::fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_index(data: &ResidueData, index: &MonomialIndex) -> Result<(), ResidueError> {
    let p = data.variety().p();
    if index.len() != p {
        return Err(ResidueError::IndexLength {
            expected: p,
            found: index.len(),
        });
    }
    Ok(())
}

/// Weight `Ψ/h` at a point; errors when the polar factor vanishes there.
fn point_weight(data: &ResidueData, coords: &[C64]) -> Result<C64, ResidueError> {
    if let Some(h) = data.polar() {
        let hv = h.eval(coords);
        if hv.norm() <= 1e-12 * h.magnitude_at(coords).max(f64::MIN_POSITIVE) {
            return Err(ResidueError::PoleAtPoint);
        }
    }
    Ok(data.weight(coords))
}

/// `Ψ y^I / J` at a simple fiber point.
pub fn punctual_residue(data: &ResidueData, point: &FiberPoint, index: &MonomialIndex) -> Result<C64, ResidueError> {
    check_index(data, index)?;
    if point.cluster_size != 1 {
        return Err(ResidueError::ClusterPoint {
            cluster_size: point.cluster_size,
        });
    }
    let w = point_weight(data, &point.coords)?;
    Ok(w * index.eval(data.variety().n(), &point.coords) / point.jacobian)
}

/// Perturbation used for residues at clusters: the chart's first `b` is
/// moved around a circle of `radius`, sampled at `nodes` points, and the
/// circle means at `levels` halved radii are Richardson-extrapolated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    pub radius: f64,
    pub nodes: usize,
    pub levels: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            radius: 1e-3,
            nodes: 8,
            levels: 2,
        }
    }
}

/// Total residue at a clustered fiber point of `chart`.
pub fn clustered_residue(
    data: &ResidueData,
    chart: &PlaneChart,
    cluster: &FiberPoint,
    indices: &[MonomialIndex],
    solve: SolveOptions,
    opts: ClusterOptions,
) -> Result<Vec<C64>, ResidueError> {
    for index in indices {
        check_index(data, index)?;
    }
    if opts.levels == 0 || opts.nodes == 0 || !(opts.radius > 0.0) {
        return Err(ResidueError::PerturbationFailure(
            "invalid perturbation parameters".into(),
        ));
    }
    if data.numerator().is_zero() {
        return Ok(vec![C64::new(0.0, 0.0); indices.len()]);
    }
    let v = data.variety();
    let n = v.n();
    let slot_b = PlaneChart::param_index(v.p(), 0, v.p());
    let base = chart.params();
    let solve = SolveOptions {
        check_degree: false,
        ..solve
    };

    let mut means = Vec::with_capacity(opts.levels);
    for level in 0..opts.levels {
        let r = opts.radius / (1u32 << level) as f64;
        let mut acc = vec![C64::new(0.0, 0.0); indices.len()];
        for t in ring_points(base[slot_b], r, opts.nodes) {
            let mut params = base.clone();
            params[slot_b] = t;
            let moved = PlaneChart::from_params(n, v.p(), &params)?;
            let fiber = solve_fiber_with(v, &moved, solve)?;
            let mut near: Vec<&FiberPoint> = fiber.points.iter().collect();
            near.sort_by(|p, q| distance(&p.coords, &cluster.coords).total_cmp(&distance(&q.coords, &cluster.coords)));
            let mut taken = 0;
            for pt in near {
                if taken >= cluster.cluster_size {
                    break;
                }
                if pt.cluster_size != 1 {
                    return Err(ResidueError::PerturbationFailure(format!(
                        "perturbed fiber still has a cluster of {} points",
                        pt.cluster_size
                    )));
                }
                for (slot, index) in acc.iter_mut().zip(indices) {
                    *slot += punctual_residue(data, pt, index)?;
                }
                taken += 1;
            }
            if taken < cluster.cluster_size {
                return Err(ResidueError::PerturbationFailure(
                    "cluster lost points under perturbation".into(),
                ));
            }
        }
        means.push(acc.into_iter().map(|s| s / opts.nodes as f64).collect::<Vec<_>>());
    }
    Ok(richardson(means, opts.nodes as i32))
}

/// Extrapolates circle means at radii `r, r/2, …` whose error is `O(r^order)`.
fn richardson(mut table: Vec<Vec<C64>>, order: i32) -> Vec<C64> {
    let mut power = order;
    while table.len() > 1 {
        let f = 2f64.powi(power);
        table = table
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(c, f2)| (f2 * f - c) / (f - 1.0)).collect())
            .collect();
        power += order;
    }
    table.pop().unwrap_or_default()
}

fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Options shared by the trace evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TraceOptions {
    pub solve: SolveOptions,
    pub cluster: ClusterOptions,
}

/// Traces at one chart, with the diagnostics downstream checks need.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEval {
    pub values: Vec<C64>,
    /// Largest single-point term `|Ψ y^I / J|` over points and indices.
    pub scale: f64,
    pub clustered: bool,
}

/// `u_I` for several indices at one chart, sharing a single fiber solve.
pub fn trace_at(
    data: &ResidueData,
    chart: &PlaneChart,
    indices: &[MonomialIndex],
    opts: TraceOptions,
) -> Result<TraceEval, ResidueError> {
    for index in indices {
        check_index(data, index)?;
    }
    let fiber = solve_fiber_with(data.variety(), chart, opts.solve)?;
    let mut values = vec![C64::new(0.0, 0.0); indices.len()];
    let mut scale: f64 = 0.0;
    let mut clustered = false;
    for pt in &fiber.points {
        if pt.cluster_size == 1 {
            for (slot, index) in values.iter_mut().zip(indices) {
                let term = punctual_residue(data, pt, index)?;
                scale = scale.max(term.norm());
                *slot += term;
            }
        } else {
            clustered = true;
            let sums = clustered_residue(data, chart, pt, indices, opts.solve, opts.cluster)?;
            for ((slot, s), _) in values.iter_mut().zip(&sums).zip(indices) {
                scale = scale.max(s.norm());
                *slot += s;
            }
        }
    }
    Ok(TraceEval {
        values,
        scale,
        clustered,
    })
}

/// The single trace `u_I` over the plane of `chart`, with default options.
pub fn trace(data: &ResidueData, chart: &PlaneChart, index: &MonomialIndex) -> Result<C64, ResidueError> {
    Ok(trace_at(data, chart, std::slice::from_ref(index), TraceOptions::default())?.values[0])
}

/// Traces against an arbitrary section `{s_1 = … = s_n = 0}` instead of a
/// plane: `Σ_P Ψ y^I / det ∂(f, s)/∂(x, y)`. Clustered points are an error.
pub fn section_trace(
    data: &ResidueData,
    section: &[MultiPoly],
    indices: &[MonomialIndex],
    solve: SolveOptions,
) -> Result<Vec<C64>, ResidueError> {
    for index in indices {
        check_index(data, index)?;
    }
    let fiber = solve_section(data.variety(), section, solve)?;
    let mut values = vec![C64::new(0.0, 0.0); indices.len()];
    for pt in &fiber.points {
        for (slot, index) in values.iter_mut().zip(indices) {
            *slot += punctual_residue(data, pt, index)?;
        }
    }
    Ok(values)
}
