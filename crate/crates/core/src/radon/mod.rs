//! The Abel–Radon transform in the affine chart and its structural checks.
//!
//! In chart coordinates the transform is the `n`-form
//! `R = Σ u_{j_1…j_n} da_1^{j_1} ∧ … ∧ da_n^{j_n}` with `a_i^{p+1} := b_i`.
//! The coefficient of a label is the trace `u_I` where `I_j` counts the
//! slots with `j_i = j`; with the plane equations `l_i = x_i − a_i·y − b_i`
//! this is `(−1)^n D(l)/D(a) = y^I`, so the sign is `+`.

mod checks;
mod propagate;

use serde::{Deserialize, Serialize};

pub use checks::{
    reparametrize_check, verify_holomorphy, verify_shock_relations, AffineMap, Classification, HolomorphyOptions,
    HolomorphyReport, ReparamReport, SampleStatus, ShockReport,
};
pub use propagate::{propagate_trace_extension, trace_evaluator, PropagateOptions};

use crate::geometry::{DomainSpec, GeometryError, ParamSpace, ResidueData, SamplingPlan};
use crate::numeric::NumericError;
use crate::residue::{trace_table, MonomialIndex, ResidueError, TraceTable, TraceTableOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RadonError {
    #[error("insufficient margin: {0}")]
    InsufficientMargin(String),
    #[error("integration path crosses a pole near parameters {params:?}")]
    PathCrossesPole { params: Vec<(f64, f64)> },
    #[error("invalid reparametrization: {0}")]
    InvalidMap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Chart coefficients of the transform, sampled over a parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadonTransform {
    pub n: usize,
    pub p: usize,
    /// Basis labels `(j_1, …, j_n)`, `1 ≤ j_i ≤ p + 1`, in lexicographic order.
    pub labels: Vec<Vec<usize>>,
    /// Position of each label's coefficient in `table.indices`.
    pub label_index: Vec<usize>,
    /// Traces over the full chart `(a, b)`.
    pub table: TraceTable,
}

/// All labels `(j_1, …, j_n)` with `1 ≤ j_i ≤ p + 1`.
pub fn basis_labels(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (1..=p + 1).map(move |j| {
                    let mut l = prefix.clone();
                    l.push(j);
                    l
                })
            })
            .collect();
    }
    out
}

/// The monomial index of a label: `I_j = #{i : j_i = j}` for `j ≤ p`.
pub fn label_monomial(label: &[usize], p: usize) -> MonomialIndex {
    let mut e = vec![0u32; p];
    for &j in label {
        if j <= p {
            e[j - 1] += 1;
        }
    }
    MonomialIndex(e)
}

impl RadonTransform {
    /// Sampled values of one label's coefficient (`None` for flagged samples).
    pub fn coefficient(&self, label: usize) -> Vec<Option<num_complex::Complex64>> {
        let k = self.label_index[label];
        self.table
            .samples
            .iter()
            .map(|s| if s.values.is_empty() { None } else { Some(s.values[k]) })
            .collect()
    }

    /// Largest coefficient modulus over clean samples.
    pub fn max_abs(&self) -> f64 {
        self.table.max_abs()
    }

    /// Largest single-point residue term over clean samples.
    pub fn scale(&self) -> f64 {
        self.table.clean_samples().map(|s| s.scale).fold(0.0, f64::max)
    }
}

/// Samples every chart coefficient of `R(α)` over `domain ⊂ (a, b)`.
pub fn radon_coefficients(
    data: &ResidueData,
    domain: &DomainSpec,
    plan: &SamplingPlan,
    opts: TraceTableOptions,
) -> Result<RadonTransform, RadonError> {
    let v = data.variety();
    let (n, p) = (v.n(), v.p());
    let labels = basis_labels(n, p);
    let mut indices: Vec<MonomialIndex> = Vec::new();
    let label_index = labels
        .iter()
        .map(|l| {
            let m = label_monomial(l, p);
            match indices.iter().position(|i| *i == m) {
                Some(k) => k,
                None => {
                    indices.push(m);
                    indices.len() - 1
                }
            }
        })
        .collect();
    let table = trace_table(data, ParamSpace::Chart, domain, &indices, plan, opts)?;
    Ok(RadonTransform {
        n,
        p,
        labels,
        label_index,
        table,
    })
}
