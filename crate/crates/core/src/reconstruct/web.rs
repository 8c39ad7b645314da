use serde::{Deserialize, Serialize};

use crate::geometry::{DomainSpec, GeometryError, ParamSpace, SamplingPlan};
use crate::numeric::C64;
use crate::residue::{MonomialIndex, TraceSample, TraceTable};

/// The germ of the line `y = slope·x + intercept` carrying a constant
/// residue weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineGerm {
    pub slope: C64,
    pub intercept: C64,
    pub weight: C64,
}

/// Traces `u_k(x) = Σ w_j (m_j x + c_j)^k`, `k ≤ max_order`, of a family of
/// weighted line germs, sampled over a base disc. Nothing global about the
/// lines enters: the table only sees their values near the disc.
pub fn line_web_traces(
    germs: &[LineGerm],
    domain: &DomainSpec,
    plan: &SamplingPlan,
    max_order: u32,
) -> Result<TraceTable, GeometryError> {
    if domain.dim() != 1 {
        return Err(GeometryError::DimensionMismatch(
            "line germs live over a one-dimensional base".into(),
        ));
    }
    let samples = domain
        .nodes(&plan.layout)?
        .into_iter()
        .map(|params| {
            let x = params[0];
            let mut scale: f64 = 0.0;
            let values = (0..=max_order)
                .map(|k| {
                    germs
                        .iter()
                        .map(|g| {
                            let term = g.weight * (g.slope * x + g.intercept).powu(k);
                            scale = scale.max(term.norm());
                            term
                        })
                        .sum()
                })
                .collect();
            TraceSample {
                params,
                values,
                scale,
                flag: None,
                probes: Vec::new(),
            }
        })
        .collect();
    Ok(TraceTable {
        source: "line web".into(),
        space: ParamSpace::Base,
        n: 1,
        p: 1,
        domain: domain.clone(),
        plan: SamplingPlan {
            layout: plan.layout.clone(),
            probe: None,
        },
        indices: (0..=max_order).map(MonomialIndex::single).collect(),
        samples,
    })
}
