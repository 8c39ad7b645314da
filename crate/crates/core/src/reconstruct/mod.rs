//! Recovery of minimal polynomials and a numerator from trace moments.
//!
//! Over one base point the traces of fiber slot `i` obey the recurrence of
//! the minimal polynomial `P_i = y_i^d + a_1 y_i^{d−1} + … + a_d`, and the
//! generating series `G = Σ u_I / y^{I+1}` equals `Q / (P_1⋯P_p)`. The
//! numerator `Q` is therefore the polynomial part of `P_1⋯P_p · G`, cleared
//! one slot at a time starting with `y_1`.
//!
//! `Res[Q dy / (P_1⋯P_p)]` has the traces of the input. In the residue-data
//! convention of [`crate::geometry`] (weight `Ψ / J`, with `J = (−1)^p ∏ P_i′`
//! over a vertical chart with one base variable) it is the data `Ψ = (−1)^p Q`
//! over the equations `P_i = 0`; see [`ReconstructedData::to_residue_data`].

mod web;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use web::{line_web_traces, LineGerm};

use crate::geometry::{DomainSpec, GeometryError, ParamSpace, ResidueData, SamplingPlan, VarietySpec};
use crate::numeric::{
    fit_recurrence, poly_interpolate, DegreeChoice, HankelOptions, MultiPoly, NumericError, PolyFit, UniPoly, C64,
    FITTING_TOL,
};
use crate::residue::{trace_table, MonomialIndex, ResidueError, TraceTable, TraceTableOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trace table lacks index {0}")]
    MissingIndex(MonomialIndex),
    #[error("traces are not generated by rational data of this shape (defect {defect:.3e}, tol {tol:.1e})")]
    InconsistentTraces { defect: f64, tol: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Degree bounds for the coefficient functions of a global fit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    /// Bound for `a_j` at position `j − 1`; the last entry covers all later `j`.
    pub minimal: Vec<usize>,
    /// Bound for every coefficient of `Q` in the fiber monomials.
    pub numerator: usize,
}

impl DegreeBounds {
    pub fn uniform(k: usize) -> Self {
        DegreeBounds {
            minimal: vec![k],
            numerator: k,
        }
    }

    fn for_coefficient(&self, j: usize) -> usize {
        self.minimal
            .get(j - 1)
            .or(self.minimal.last())
            .copied()
            .unwrap_or(self.numerator)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest minimal-polynomial degree tried.
    pub d_max: usize,
    pub tol: f64,
    pub condition_cap: f64,
    /// `None` picks, per coefficient, the smallest degree in the base
    /// variable that fits the samples and still leaves one sample to spare.
    pub bounds: Option<DegreeBounds>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            d_max: 8,
            tol: FITTING_TOL,
            condition_cap: HankelOptions::default().condition_cap,
            bounds: None,
        }
    }
}

/// `P = y^d + a_1(x) y^{d−1} + … + a_d(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalPoly {
    /// `a_1, …, a_d` as polynomials in the base variable.
    pub coeffs: Vec<UniPoly>,
}

impl MinimalPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `(1, a_1(x), …, a_d(x))`.
    pub fn at(&self, x: C64) -> Vec<C64> {
        std::iter::once(C64::new(1.0, 0.0))
            .chain(self.coeffs.iter().map(|a| a.eval(x)))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Number of base samples used.
    pub samples: usize,
    /// Worst relative residual of the per-sample recurrence fits.
    pub recurrence_residual: f64,
    /// Worst condition number of the recurrence systems.
    pub condition: f64,
    /// Worst relative residual of the fits in the base variable.
    pub interpolation_residual: f64,
}

/// One monic minimal polynomial per fiber variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalPolySet {
    pub base_var: String,
    pub fiber_vars: Vec<String>,
    pub polys: Vec<MinimalPoly>,
    pub diagnostics: FitDiagnostics,
}

fn default_fiber_vars(p: usize) -> Vec<String> {
    if p == 1 {
        vec!["y".into()]
    } else {
        (1..=p).map(|i| format!("y{i}")).collect()
    }
}

impl MinimalPolySet {
    /// `P_i = y_i` for every slot.
    pub fn trivial(p: usize) -> Self {
        MinimalPolySet {
            base_var: "x".into(),
            fiber_vars: default_fiber_vars(p),
            polys: vec![
                MinimalPoly {
                    coeffs: vec![UniPoly::zero()]
                };
                p
            ],
            diagnostics: FitDiagnostics::default(),
        }
    }

    pub fn p(&self) -> usize {
        self.polys.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.polys.iter().map(MinimalPoly::degree).collect()
    }

    /// Base variable followed by the fiber variables.
    pub fn vars(&self) -> Vec<String> {
        std::iter::once(self.base_var.clone())
            .chain(self.fiber_vars.iter().cloned())
            .collect()
    }

    /// `P_i` as a polynomial in [`Self::vars`].
    pub fn poly(&self, i: usize) -> MultiPoly {
        let vars = self.vars();
        let d = self.polys[i].degree();
        let mut terms = Vec::new();
        let mut lead = vec![0u32; vars.len()];
        lead[1 + i] = d as u32;
        terms.push((lead, C64::new(1.0, 0.0)));
        for (j, a) in self.polys[i].coeffs.iter().enumerate() {
            for (e, &c) in a.coeffs().iter().enumerate() {
                let mut exps = vec![0u32; vars.len()];
                exps[0] = e as u32;
                exps[1 + i] = (d - j - 1) as u32;
                terms.push((exps, c));
            }
        }
        MultiPoly::from_terms(&vars, terms)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionDiagnostics {
    pub fit: FitDiagnostics,
    /// Worst relative residual of the numerator fits in the base variable.
    pub numerator_residual: f64,
    /// Worst recurrence defect over every available index, relative to the
    /// largest trace.
    pub truncation_defect: f64,
}

/// Minimal polynomials together with the numerator `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedData {
    pub minimal: MinimalPolySet,
    /// `Q` in the variables of [`MinimalPolySet::vars`], `deg_{y_i} Q < d_i`.
    pub numerator: MultiPoly,
    pub diagnostics: ReconstructionDiagnostics,
}

impl ReconstructedData {
    /// The zero current: `P_i = y_i`, `Q = 0`.
    pub fn zero(p: usize) -> Self {
        let minimal = MinimalPolySet::trivial(p);
        let numerator = MultiPoly::zero(&minimal.vars());
        ReconstructedData {
            minimal,
            numerator,
            diagnostics: ReconstructionDiagnostics::default(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// The same current as residue data: equations `P_i`, numerator `(−1)^p Q`.
    pub fn to_residue_data(&self, label: impl Into<String>) -> Result<ResidueData, GeometryError> {
        let m = &self.minimal;
        let defs = (0..m.p()).map(|i| m.poly(i)).collect();
        let variety = VarietySpec::new(std::slice::from_ref(&m.base_var), &m.fiber_vars, defs)?;
        let sign = if m.p().is_multiple_of(2) { 1.0 } else { -1.0 };
        ResidueData::new(variety, self.numerator.scale(C64::new(sign, 0.0)), label)
    }
}

/// The clean samples of a base table, with an index lookup.
struct Samples<'a> {
    lookup: HashMap<&'a [u32], usize>,
    rows: Vec<(C64, &'a [C64])>,
    p: usize,
    max_abs: f64,
}

impl<'a> Samples<'a> {
    fn new(t: &'a TraceTable) -> Result<Self, ReconstructError> {
        if t.space != ParamSpace::Base || t.n != 1 {
            return Err(ReconstructError::Unsupported(
                "reconstruction needs traces over vertical charts with one base variable".into(),
            ));
        }
        let rows: Vec<(C64, &[C64])> = t.clean_samples().map(|s| (s.params[0], s.values.as_slice())).collect();
        if rows.is_empty() {
            return Err(NumericError::InsufficientData("trace table has no clean samples".into()).into());
        }
        Ok(Samples {
            lookup: t.indices.iter().enumerate().map(|(k, i)| (i.0.as_slice(), k)).collect(),
            rows,
            p: t.p,
            max_abs: t.max_abs(),
        })
    }

    fn get(&self, row: &[C64], index: &[u32]) -> Option<C64> {
        self.lookup.get(index).map(|&k| row[k])
    }

    /// Every maximal run `u_{J + k e_slot}, k = 0, 1, …` present in the table,
    /// one per `J` with `J_slot = 0`, in a fixed order.
    fn sequences(&self, row: &[C64], slot: usize) -> Vec<Vec<C64>> {
        let mut starts: Vec<&[u32]> = self.lookup.keys().copied().filter(|i| i[slot] == 0).collect();
        starts.sort_unstable();
        starts
            .into_iter()
            .map(|start| {
                let mut e = start.to_vec();
                let mut seq = Vec::new();
                while let Some(v) = self.get(row, &e) {
                    seq.push(v);
                    e[slot] += 1;
                }
                seq
            })
            .collect()
    }
}

/// Sets to zero the entries of `values` that are negligible against the rest,
/// measured with the homogeneity weights `weights`.
fn snap_weighted(values: &mut [C64], weights: &[f64], tol: f64) {
    let max = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v.norm() / w)
        .fold(0.0, f64::max);
    for (v, w) in values.iter_mut().zip(weights) {
        if v.norm() / w <= tol * max {
            *v = C64::new(0.0, 0.0);
        }
    }
}

/// Root-size bound `max_j |a_j|^{1/j}` (at least 1).
fn root_scale(a: &[C64]) -> f64 {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c.norm().powf(1.0 / j as f64))
        .fold(1.0, f64::max)
}

fn fit_in_base(samples: &[(C64, C64)], bound: Option<usize>, tol: f64) -> Result<PolyFit, NumericError> {
    match bound {
        Some(b) => poly_interpolate(samples, b, tol),
        None => {
            let top = samples.len().saturating_sub(2);
            let mut last = None;
            for k in 0..=top {
                match poly_interpolate(samples, k, tol) {
                    Ok(fit) => return Ok(fit),
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one degree is tried"))
        }
    }
}

fn is_zero_data(e: &NumericError) -> bool {
    matches!(e, NumericError::DegreeUndetectable { zero_data: true, .. })
}

/// Fits the minimal polynomial of every fiber variable from a base table.
///
/// Each slot's recurrence is fitted jointly over all runs of indices in
/// that slot, first with automatic degree detection per sample, then with
/// the largest detected degree fixed; the coefficients are then fitted as
/// polynomials in the base variable. All-zero traces give
/// [`NumericError::DegreeUndetectable`] with `zero_data` set.
pub fn fit_minimal_polys(t: &TraceTable, opts: &FitOptions) -> Result<MinimalPolySet, ReconstructError> {
    let s = Samples::new(t)?;
    if s.max_abs == 0.0 {
        return Err(NumericError::DegreeUndetectable {
            max_degree: opts.d_max,
            zero_data: true,
        }
        .into());
    }
    let hopts = HankelOptions {
        tol: opts.tol,
        condition_cap: opts.condition_cap,
    };
    let mut diagnostics = FitDiagnostics::default();
    let mut polys = Vec::with_capacity(s.p);
    for slot in 0..s.p {
        let seqs: Vec<Vec<Vec<C64>>> = s.rows.iter().map(|(_, row)| s.sequences(row, slot)).collect();
        let mut d = 0;
        for q in &seqs {
            match fit_recurrence(q, DegreeChoice::Auto { max: opts.d_max }, hopts) {
                Ok(fit) => d = d.max(fit.degree()),
                Err(e) if is_zero_data(&e) => {}
                Err(e) => return Err(e.into()),
            }
        }
        let mut per_sample: Vec<(C64, Vec<C64>)> = Vec::new();
        for ((x, _), q) in s.rows.iter().zip(&seqs) {
            let fit = match fit_recurrence(q, DegreeChoice::Fixed(d), hopts) {
                Ok(fit) => fit,
                Err(e) if is_zero_data(&e) => continue,
                Err(e) => return Err(e.into()),
            };
            if fit.residual > opts.tol {
                return Err(ReconstructError::InconsistentTraces {
                    defect: fit.residual,
                    tol: opts.tol,
                });
            }
            diagnostics.recurrence_residual = diagnostics.recurrence_residual.max(fit.residual);
            diagnostics.condition = diagnostics.condition.max(fit.condition);
            let mut a: Vec<C64> = std::iter::once(C64::new(1.0, 0.0)).chain(fit.coeffs).collect();
            let rho = root_scale(&a);
            let weights: Vec<f64> = (0..a.len()).map(|j| rho.powi(j as i32)).collect();
            snap_weighted(&mut a, &weights, opts.tol);
            per_sample.push((*x, a));
        }
        diagnostics.samples = diagnostics.samples.max(per_sample.len());
        let coeffs = (1..=d)
            .map(|j| {
                let pts: Vec<(C64, C64)> = per_sample.iter().map(|(x, a)| (*x, a[j])).collect();
                let bound = opts.bounds.as_ref().map(|b| b.for_coefficient(j));
                let fit = fit_in_base(&pts, bound, opts.tol)?;
                diagnostics.interpolation_residual = diagnostics.interpolation_residual.max(fit.residual);
                Ok(fit.poly)
            })
            .collect::<Result<Vec<_>, NumericError>>()?;
        polys.push(MinimalPoly { coeffs });
    }
    Ok(MinimalPolySet {
        base_var: "x".into(),
        fiber_vars: default_fiber_vars(s.p),
        polys,
        diagnostics,
    })
}

/// Applies `v_{d−1−k} ← Σ_{m ≤ k} a_{k−m} v_m` along `slot` of a box array.
fn clear_slot(values: &mut HashMap<Vec<u32>, C64>, slot: usize, a: &[C64]) {
    let d = a.len() - 1;
    let old = values.clone();
    for (e, v) in values.iter_mut() {
        let k = d - 1 - e[slot] as usize;
        let mut src = e.clone();
        *v = (0..=k)
            .map(|m| {
                src[slot] = m as u32;
                a[k - m] * old[&src]
            })
            .sum();
    }
}

/// Recovers `Q` from the traces and their minimal polynomials.
///
/// Every run of indices in the table that is longer than `d_i` is also
/// checked against the recurrence of `P_i`; the worst relative defect is
/// reported and must stay below `opts.tol`.
pub fn reconstruct_numerator(
    t: &TraceTable,
    m: &MinimalPolySet,
    opts: &FitOptions,
) -> Result<ReconstructedData, ReconstructError> {
    let s = Samples::new(t)?;
    if m.p() != s.p {
        return Err(ReconstructError::Unsupported(format!(
            "{} minimal polynomials for {} fiber variables",
            m.p(),
            s.p
        )));
    }
    let degrees = m.degrees();
    let max_degree = *degrees.iter().max().unwrap_or(&0) as u32;
    let window: Vec<Vec<u32>> = MonomialIndex::boxed(s.p, max_degree.saturating_sub(1))
        .into_iter()
        .map(|i| i.0)
        .filter(|e| e.iter().zip(&degrees).all(|(&k, &d)| (k as usize) < d))
        .collect();
    if let Some(e) = window.iter().find(|e| !s.lookup.contains_key(e.as_slice())) {
        return Err(ReconstructError::MissingIndex(MonomialIndex(e.clone())));
    }

    let mut defect: f64 = 0.0;
    let mut per_sample: Vec<(C64, Vec<C64>)> = Vec::with_capacity(s.rows.len());
    for (x, row) in &s.rows {
        let a: Vec<Vec<C64>> = m.polys.iter().map(|pi| pi.at(*x)).collect();
        for (slot, ai) in a.iter().enumerate() {
            let d = ai.len() - 1;
            for seq in s.sequences(row, slot) {
                for start in 0..seq.len().saturating_sub(d) {
                    let r: C64 = (0..=d).map(|j| ai[j] * seq[start + d - j]).sum();
                    defect = defect.max(r.norm());
                }
            }
        }
        let mut values: HashMap<Vec<u32>, C64> = window
            .iter()
            .map(|e| (e.clone(), s.get(row, e).expect("window checked")))
            .collect();
        for (slot, ai) in a.iter().enumerate() {
            clear_slot(&mut values, slot, ai);
        }
        let rho: Vec<f64> = a.iter().map(|ai| root_scale(ai)).collect();
        let weights: Vec<f64> = window
            .iter()
            .map(|e| e.iter().zip(&rho).map(|(&k, r)| r.powi(k as i32)).product())
            .collect();
        let mut q: Vec<C64> = window.iter().map(|e| values[e]).collect();
        snap_weighted(&mut q, &weights, opts.tol);
        per_sample.push((*x, q));
    }
    let defect = if s.max_abs > 0.0 { defect / s.max_abs } else { 0.0 };
    if defect > opts.tol {
        return Err(ReconstructError::InconsistentTraces { defect, tol: opts.tol });
    }

    let vars = m.vars();
    let mut terms = Vec::new();
    let mut numerator_residual: f64 = 0.0;
    for (k, e) in window.iter().enumerate() {
        let pts: Vec<(C64, C64)> = per_sample.iter().map(|(x, q)| (*x, q[k])).collect();
        let fit = fit_in_base(&pts, opts.bounds.as_ref().map(|b| b.numerator), opts.tol)?;
        numerator_residual = numerator_residual.max(fit.residual);
        for (pow, &c) in fit.poly.coeffs().iter().enumerate() {
            let mut exps = vec![pow as u32];
            exps.extend_from_slice(e);
            terms.push((exps, c));
        }
    }
    Ok(ReconstructedData {
        minimal: m.clone(),
        numerator: MultiPoly::from_terms(&vars, terms),
        diagnostics: ReconstructionDiagnostics {
            fit: m.diagnostics.clone(),
            numerator_residual,
            truncation_defect: defect,
        },
    })
}

/// Minimal polynomials and numerator in one pass; all-zero traces give
/// [`ReconstructedData::zero`].
pub fn reconstruct(t: &TraceTable, opts: &FitOptions) -> Result<ReconstructedData, ReconstructError> {
    match fit_minimal_polys(t, opts) {
        Ok(m) => reconstruct_numerator(t, &m, opts),
        Err(ReconstructError::Numeric(e)) if is_zero_data(&e) => Ok(ReconstructedData::zero(t.p)),
        Err(e) => Err(e),
    }
}

/// Global algebraic data from traces sampled over a small base disc.
///
/// Every coefficient function is fitted as a polynomial within `bounds`; a
/// coefficient that is not polynomial there fails with
/// [`NumericError::OverdeterminedMismatch`].
pub fn reconstruct_global(
    t: &TraceTable,
    d_max: usize,
    bounds: DegreeBounds,
    tol: f64,
) -> Result<ReconstructedData, ReconstructError> {
    reconstruct(
        t,
        &FitOptions {
            d_max,
            tol,
            bounds: Some(bounds),
            ..FitOptions::default()
        },
    )
}

/// Outcome of [`verify_traces_match`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMatchReport {
    /// `max |u_I(d1) − u_I(d2)|` over compared samples and indices.
    pub max_difference: f64,
    pub worst_index: Option<MonomialIndex>,
    pub worst_params: Option<Vec<C64>>,
    /// Largest trace modulus seen on either side.
    pub scale: f64,
    pub compared: usize,
    /// Samples flagged on either side.
    pub skipped: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Compares all traces `u_I`, `|I| ≤ max_order`, of two data over vertical
/// charts sampled by `plan` on `domain`.
pub fn verify_traces_match(
    d1: &ResidueData,
    d2: &ResidueData,
    domain: &DomainSpec,
    plan: &SamplingPlan,
    max_order: u32,
    tol: f64,
) -> Result<TraceMatchReport, ReconstructError> {
    let (v1, v2) = (d1.variety(), d2.variety());
    if v1.n() != v2.n() || v1.p() != v2.p() {
        return Err(GeometryError::DimensionMismatch(format!(
            "data of dimensions ({}, {}) and ({}, {})",
            v1.n(),
            v1.p(),
            v2.n(),
            v2.p()
        ))
        .into());
    }
    let indices = MonomialIndex::up_to(v1.p(), max_order);
    let opts = TraceTableOptions::default();
    let t1 = trace_table(d1, ParamSpace::Base, domain, &indices, plan, opts)?;
    let t2 = trace_table(d2, ParamSpace::Base, domain, &indices, plan, opts)?;
    let mut report = TraceMatchReport {
        max_difference: 0.0,
        worst_index: None,
        worst_params: None,
        scale: t1.max_abs().max(t2.max_abs()),
        compared: 0,
        skipped: 0,
        tol,
        pass: false,
    };
    for (a, b) in t1.samples.iter().zip(&t2.samples) {
        if !a.is_clean() || !b.is_clean() {
            report.skipped += 1;
            continue;
        }
        report.compared += 1;
        for (k, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            let diff = (x - y).norm();
            if diff > report.max_difference || report.worst_index.is_none() {
                report.max_difference = diff;
                report.worst_index = Some(indices[k].clone());
                report.worst_params = Some(a.params.clone());
            }
        }
    }
    report.pass = report.compared > 0 && report.max_difference <= tol;
    Ok(report)
}
