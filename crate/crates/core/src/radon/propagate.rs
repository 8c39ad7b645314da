use serde::{Deserialize, Serialize};

use super::RadonError;
use crate::geometry::{DomainSpec, ParamSpace, ResidueData, SampleLayout, SamplingPlan};
use crate::numeric::{gauss_legendre, ring_laurent, ring_points, C64};
use crate::par_map;
use crate::residue::{trace_at, MonomialIndex, ResidueError, TraceOptions, TraceSample, TraceTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Gauss–Legendre nodes along each segment in `b`.
    pub quad_nodes: usize,
    /// Radius and node count of the rings used for `∂_a^m u_0`.
    pub deriv_radius: f64,
    pub deriv_nodes: usize,
    /// Values of `u_0` beyond this multiple of the table's size count as a pole.
    pub blowup: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            quad_nodes: 24,
            deriv_radius: 0.05,
            deriv_nodes: 32,
            blowup: 1e8,
        }
    }
}

/// `u_I` as a function of chart parameters, computed directly.
pub fn trace_evaluator(
    data: &ResidueData,
    index: MonomialIndex,
) -> impl Fn(&[C64]) -> Result<C64, ResidueError> + Sync + '_ {
    let v = data.variety();
    let mut opts = TraceOptions::default();
    opts.solve.expected_degree = v.degree().general;
    move |params: &[C64]| {
        let chart = ParamSpace::Chart.chart(v.n(), v.p(), params)?;
        Ok(trace_at(data, &chart, std::slice::from_ref(&index), opts)?.values[0])
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Extends the traces `u_1, …, u_order` (one fiber variable, one base
/// variable) from a circle in `a` at the base point `b_0` to the polydisc
/// `target = P_a × P_b′`, given `u_0` on `P_b′`.
///
/// Repeated use of `∂_b u_{k+1} = ∂_a u_k` gives, with `Δ = b − b_0`,
///
/// `u_m(a, b) = Σ_{j<m} Δ^j/j! ∂_a^j u_{m−j}(a, b_0)
///            + Δ^m ∫_0^1 (1−s)^{m−1}/(m−1)! ∂_a^m u_0(a, b_0 + sΔ) ds`.
///
/// The first sum uses the Cauchy interpolant of the table on its circle;
/// the integral is done by Gauss–Legendre quadrature along the segment.
pub fn propagate_trace_extension(
    t: &TraceTable,
    u0_ext: &(dyn Fn(&[C64]) -> Result<C64, ResidueError> + Sync),
    target: &DomainSpec,
    plan: &SamplingPlan,
    order: u32,
    opts: PropagateOptions,
) -> Result<TraceTable, RadonError> {
    if t.space != ParamSpace::Chart || t.n != 1 || t.p != 1 {
        return Err(RadonError::Unsupported(
            "propagation is implemented for one base and one fiber variable over the full chart".into(),
        ));
    }
    let SampleLayout::Circle { axis: 0, nodes } = t.plan.layout else {
        return Err(RadonError::InsufficientMargin(
            "input table must sample a circle in a at fixed b".into(),
        ));
    };
    if t.samples.iter().any(|s| !s.is_clean()) {
        return Err(RadonError::InsufficientMargin(
            "input table has flagged samples on its circle".into(),
        ));
    }
    let (a_c, r_a) = (t.domain.center()[0], t.domain.radii()[0]);
    let b0 = t.domain.center()[1];
    if target.dim() != 2
        || (target.center()[0] - a_c).norm() > 1e-12 * (1.0 + a_c.norm())
        || target.radii()[0] > r_a * (1.0 + 1e-12)
    {
        return Err(RadonError::InsufficientMargin(
            "target must share the table's disc in a".into(),
        ));
    }
    if (target.center()[1] - b0).norm() > target.radii()[1] {
        return Err(RadonError::InsufficientMargin(
            "target disc in b must contain the base point".into(),
        ));
    }
    let columns: Vec<usize> = (1..=order)
        .map(|k| {
            t.index_of(&MonomialIndex::single(k))
                .ok_or_else(|| RadonError::InsufficientMargin(format!("input table lacks u_{k}")))
        })
        .collect::<Result<_, _>>()?;

    // Taylor coefficients in (a − a_c) of u_k(·, b_0), k = 1..order
    let taylor: Vec<Vec<C64>> = columns
        .iter()
        .map(|&col| {
            let values: Vec<C64> = t.samples.iter().map(|s| s.values[col]).collect();
            (0..nodes as i32).map(|l| ring_laurent(&values, r_a, l)).collect()
        })
        .collect();
    let table_size = t.max_abs().max(1.0);
    let derivative_at = |k: usize, j: usize, a: C64| -> C64 {
        let h = a - a_c;
        taylor[k - 1]
            .iter()
            .enumerate()
            .skip(j)
            .map(|(l, c)| c * (factorial(l) / factorial(l - j)) * h.powu((l - j) as u32))
            .sum()
    };

    let (gl_x, gl_w) = gauss_legendre(opts.quad_nodes);
    let order = order as usize;
    let points = target.nodes(&plan.layout)?;
    let samples: Vec<Result<TraceSample, RadonError>> = par_map(&points, |params| {
        let (a, b) = (params[0], params[1]);
        let delta = b - b0;
        let pole = |z: &[C64]| RadonError::PathCrossesPole {
            params: z.iter().map(|w| (w.re, w.im)).collect(),
        };
        let u0 = u0_ext(params).map_err(|_| pole(params))?;
        if !u0.is_finite() || u0.norm() > opts.blowup * table_size {
            return Err(pole(params));
        }
        let mut values = vec![u0];
        // ∂_a^m u_0 at each quadrature node, all orders from one ring
        let mut integrals = vec![C64::new(0.0, 0.0); order + 1];
        if delta.norm() > 0.0 && order > 0 {
            for (&s, &w) in gl_x.iter().zip(&gl_w) {
                let bs = b0 + delta * s;
                let ring: Vec<C64> = ring_points(a, opts.deriv_radius, opts.deriv_nodes)
                    .into_iter()
                    .map(|z| {
                        let v = u0_ext(&[z, bs]).map_err(|_| pole(&[z, bs]))?;
                        if !v.is_finite() || v.norm() > opts.blowup * table_size {
                            return Err(pole(&[z, bs]));
                        }
                        Ok(v)
                    })
                    .collect::<Result<_, _>>()?;
                for (m, slot) in integrals.iter_mut().enumerate().skip(1) {
                    let dm = ring_laurent(&ring, opts.deriv_radius, m as i32) * factorial(m);
                    *slot += dm * (w * (1.0 - s).powi(m as i32 - 1) / factorial(m - 1));
                }
            }
        }
        for (m, integral) in integrals.iter().enumerate().skip(1) {
            let mut u = integral * delta.powu(m as u32);
            for j in 0..m {
                u += delta.powu(j as u32) / factorial(j) * derivative_at(m - j, j, a);
            }
            values.push(u);
        }
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(TraceSample {
            params: params.clone(),
            values,
            scale,
            flag: None,
            probes: Vec::new(),
        })
    });
    Ok(TraceTable {
        source: format!("{} (propagated)", t.source),
        space: ParamSpace::Chart,
        n: 1,
        p: 1,
        domain: target.clone(),
        plan: SamplingPlan {
            layout: plan.layout.clone(),
            probe: None,
        },
        indices: (0..=order as u32).map(MonomialIndex::single).collect(),
        samples: samples.into_iter().collect::<Result<_, _>>()?,
    })
}
