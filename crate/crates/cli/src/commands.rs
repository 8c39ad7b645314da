use abel_radon::geometry::{DomainSpec, ParamSpace, PlaneChart, ResidueData, SampleLayout, SamplingPlan, VarietySpec};
use abel_radon::numeric::{MultiPoly, NumericError, C64};
use abel_radon::radon::{
    propagate_trace_extension, radon_coefficients, reparametrize_check, trace_evaluator, verify_holomorphy,
    verify_shock_relations, AffineMap, Classification, HolomorphyOptions, PropagateOptions, RadonError, RadonTransform,
};
use abel_radon::reconstruct::{
    reconstruct, verify_traces_match, DegreeBounds, FitOptions, ReconstructError, ReconstructedData,
};
use abel_radon::residue::{trace_table, MonomialIndex, TraceTable, TraceTableOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{
    DataArgs, DomainArgs, ExtendArgs, RadonArgs, ReconstructArgs, SamplingArgs, Space, TraceArgs, VerifyCommand,
};
use crate::context::{CliError, Context};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }

    fn check(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub summary: Value,
    pub result: Value,
    pub lines: Vec<String>,
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

const DEFAULT_CENTER: f64 = 0.5;
const DEFAULT_RADIUS: f64 = 0.25;

fn load_data(ctx: &mut Context, args: &DataArgs) -> Result<ResidueData, CliError> {
    if let Some(path) = &args.data {
        return ctx.load("data", path);
    }
    let (Some(vp), Some(np)) = (&args.variety, &args.numerator) else {
        return Err(CliError::input("give --data, or --variety with --numerator"));
    };
    let variety: VarietySpec = ctx.load("variety", vp)?;
    let numerator: MultiPoly = ctx.load("numerator", np)?;
    let label = vp
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = ResidueData::new(variety, numerator, label).map_err(|e| CliError::input(e.to_string()))?;
    match &args.polar {
        Some(hp) => {
            let h: MultiPoly = ctx.load("polar", hp)?;
            data.with_polar(h).map_err(|e| CliError::input(e.to_string()))
        }
        None => Ok(data),
    }
}

fn resolve_domain(
    ctx: &mut Context,
    args: &DomainArgs,
    dim: usize,
    default_center: Option<&[C64]>,
) -> Result<DomainSpec, CliError> {
    let domain = match &args.domain {
        Some(path) => ctx.load("domain", path)?,
        None => {
            let center = match (&args.center, default_center) {
                (Some(c), _) => c.clone(),
                (None, Some(c)) => c.to_vec(),
                (None, None) => vec![C64::new(DEFAULT_CENTER, 0.0); dim],
            };
            let radii = args.radii.clone().unwrap_or_else(|| vec![DEFAULT_RADIUS; dim]);
            let radii = if radii.len() == 1 { vec![radii[0]; dim] } else { radii };
            DomainSpec::new(center, radii).map_err(|e| CliError::input(e.to_string()))?
        }
    };
    if domain.dim() != dim {
        return Err(CliError::input(format!(
            "domain has dimension {}, expected {dim}",
            domain.dim()
        )));
    }
    ctx.param("domain", &domain);
    Ok(domain)
}

fn pair<A: std::str::FromStr, B: std::str::FromStr>(s: &str, flag: &str) -> Result<(A, B), CliError> {
    let bad = || CliError::input(format!("--{flag} expects two values separated by ':', got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn resolve_plan(
    ctx: &mut Context,
    args: &SamplingArgs,
    dim: usize,
    default_grid: usize,
) -> Result<SamplingPlan, CliError> {
    let mut plan = match (&args.grid, &args.circle) {
        (_, Some(circle)) => {
            let (axis, nodes): (usize, usize) = pair(circle, "circle")?;
            if axis >= dim || nodes == 0 {
                return Err(CliError::input(format!(
                    "--circle {circle} does not fit a {dim}-dimensional domain"
                )));
            }
            SamplingPlan::circle(axis, nodes)
        }
        (Some(grid), None) => {
            let per_axis: Vec<usize> = grid
                .split(['x', 'X'])
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::input(format!("--grid expects sizes like 5x5, got {grid:?}")))?;
            let per_axis = if per_axis.len() == 1 {
                vec![per_axis[0]; dim]
            } else {
                per_axis
            };
            if per_axis.len() != dim || per_axis.contains(&0) {
                return Err(CliError::input(format!(
                    "--grid {grid} does not fit a {dim}-dimensional domain"
                )));
            }
            SamplingPlan::lattice(per_axis)
        }
        (None, None) => SamplingPlan::lattice(vec![default_grid; dim]),
    };
    if let Some(probe) = &args.probe {
        let (radius, nodes): (f64, usize) = pair(probe, "probe")?;
        if !(radius > 0.0) || nodes < 4 {
            return Err(CliError::input("--probe needs a positive radius and at least 4 nodes"));
        }
        plan = plan.with_probe(radius, nodes);
    }
    ctx.param("plan", &plan);
    Ok(plan)
}

fn chart_dim(data: &ResidueData) -> usize {
    let v = data.variety();
    PlaneChart::param_count(v.n(), v.p())
}

pub fn trace(ctx: &mut Context, args: &TraceArgs) -> Result<Outcome, CliError> {
    let data = load_data(ctx, &args.data)?;
    let v = data.variety();
    let space = match args.space {
        Space::Chart => ParamSpace::Chart,
        Space::Base => ParamSpace::Base,
    };
    let dim = space.dim(v.n(), v.p());
    let domain = resolve_domain(ctx, &args.domain, dim, None)?;
    let plan = resolve_plan(ctx, &args.sampling, dim, 3)?;
    ctx.param("space", space);
    ctx.param("order", args.order);
    let indices = MonomialIndex::up_to(v.p(), args.order);
    let t = trace_table(&data, space, &domain, &indices, &plan, TraceTableOptions::default())
        .map_err(CliError::computation)?;
    let clean = t.clean_samples().count();
    Ok(Outcome {
        status: Status::Ok,
        summary: json!({"samples": t.samples.len(), "clean": clean, "indices": t.indices.len(), "max_abs": t.max_abs()}),
        lines: vec![format!(
            "{} traces at {} samples ({clean} clean), max |u| = {:.3e}",
            t.indices.len(),
            t.samples.len(),
            t.max_abs()
        )],
        result: to_value(&t),
    })
}

pub fn radon(ctx: &mut Context, args: &RadonArgs) -> Result<Outcome, CliError> {
    let data = load_data(ctx, &args.data)?;
    let dim = chart_dim(&data);
    let domain = resolve_domain(ctx, &args.domain, dim, None)?;
    let plan = resolve_plan(ctx, &args.sampling, dim, 3)?;
    let rt = radon_coefficients(&data, &domain, &plan, TraceTableOptions::default()).map_err(CliError::computation)?;
    let ratio = rt.max_abs() / rt.scale().max(f64::MIN_POSITIVE);
    Ok(Outcome {
        status: Status::Ok,
        summary: json!({"labels": rt.labels, "max_abs": rt.max_abs(), "scale": rt.scale(), "ratio": ratio}),
        lines: vec![format!(
            "{} coefficients at {} samples, max |R| = {:.3e}, term size {:.3e}, ratio {:.3e}",
            rt.labels.len(),
            rt.table.samples.len(),
            rt.max_abs(),
            rt.scale(),
            ratio
        )],
        result: to_value(&rt),
    })
}

fn reconstruct_error(e: ReconstructError) -> CliError {
    match e {
        ReconstructError::InconsistentTraces { .. }
        | ReconstructError::Numeric(NumericError::OverdeterminedMismatch { .. }) => CliError::verification(e),
        ReconstructError::Unsupported(_) | ReconstructError::MissingIndex(_) => CliError::input(e.to_string()),
        e => CliError::computation(e),
    }
}

pub fn reconstruct_cmd(ctx: &mut Context, args: &ReconstructArgs) -> Result<Outcome, CliError> {
    let t: TraceTable = ctx.load("traces", &args.traces)?;
    let opts = FitOptions {
        d_max: args.d_max,
        tol: args.tol,
        bounds: args.degree_bound.map(|k| DegreeBounds {
            minimal: vec![k],
            numerator: args.numerator_bound.unwrap_or(k),
        }),
        ..FitOptions::default()
    };
    ctx.param("fit", &opts);
    let r = reconstruct(&t, &opts).map_err(reconstruct_error)?;
    let vars = r.minimal.vars();
    let minimal: Vec<String> = (0..r.minimal.p()).map(|i| readable(&r.minimal.poly(i))).collect();
    let mut lines = vec![if r.is_zero() {
        "all traces vanish: zero data".to_string()
    } else {
        format!("degrees {:?} in {}", r.minimal.degrees(), vars.join(", "))
    }];
    lines.extend(minimal.iter().enumerate().map(|(i, p)| format!("P{} = {p}", i + 1)));
    lines.push(format!("Q = {}", readable(&r.numerator)));
    Ok(Outcome {
        status: Status::Ok,
        summary: json!({
            "zero": r.is_zero(),
            "degrees": r.minimal.degrees(),
            "minimal": minimal,
            "numerator": readable(&r.numerator),
        }),
        result: to_value(&r),
        lines,
    })
}

fn readable(p: &MultiPoly) -> String {
    p.rounded(10).to_string()
}

fn load_comparison(ctx: &mut Context, path: &std::path::Path) -> Result<ResidueData, CliError> {
    let value = ctx.load_value("against", path)?;
    if let Ok(d) = serde_json::from_value::<ResidueData>(value.clone()) {
        return Ok(d);
    }
    let r: ReconstructedData = serde_json::from_value(value).map_err(|e| {
        CliError::input(format!(
            "{}: neither residue data nor a reconstruction ({e})",
            path.display()
        ))
    })?;
    r.to_residue_data("reconstructed")
        .map_err(|e| CliError::input(e.to_string()))
}

fn random_map(seed: u64, dim: usize) -> AffineMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = |r: f64| C64::new(rng.random_range(-r..r), rng.random_range(-r..r));
    let matrix = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { C64::new(1.0, 0.0) + z(0.3) } else { z(0.3) })
                .collect()
        })
        .collect();
    let offset = (0..dim).map(|_| z(0.3)).collect();
    AffineMap { matrix, offset }
}

pub fn verify(ctx: &mut Context, cmd: &VerifyCommand) -> Result<Outcome, CliError> {
    match cmd {
        VerifyCommand::Shock { traces, tol } => {
            let t: TraceTable = ctx.load("traces", traces)?;
            ctx.param("tol", tol);
            let r = verify_shock_relations(&t, *tol).map_err(|e| CliError::input(e.to_string()))?;
            Ok(Outcome {
                status: Status::check(r.pass),
                summary: json!({"max_residual": r.max_residual, "checked": r.checked}),
                lines: vec![format!(
                    "max residual {:.3e} over {} relations (tol {:.1e})",
                    r.max_residual, r.checked, tol
                )],
                result: to_value(&r),
            })
        }
        VerifyCommand::Holomorphy {
            radon,
            data,
            domain,
            sampling,
            tol,
        } => {
            let rt: RadonTransform = match radon {
                Some(path) => ctx.load("radon", path)?,
                None => {
                    let data = load_data(ctx, data)?;
                    let dim = chart_dim(&data);
                    let domain = resolve_domain(ctx, domain, dim, None)?;
                    let mut plan = resolve_plan(ctx, sampling, dim, 3)?;
                    if plan.probe.is_none() {
                        plan = plan.with_probe(0.04, 64);
                        ctx.param("plan", &plan);
                    }
                    radon_coefficients(&data, &domain, &plan, TraceTableOptions::default())
                        .map_err(CliError::computation)?
                }
            };
            ctx.param("tol", tol);
            let r =
                verify_holomorphy(&rt, HolomorphyOptions { tol: *tol }).map_err(|e| CliError::input(e.to_string()))?;
            let status = match r.classification {
                Classification::Inconclusive => Status::Fail,
                _ => Status::Pass,
            };
            let mut lines = vec![format!(
                "{:?}: {} poles among {} samples, regular ratio <= {:.3e}",
                r.classification,
                r.poles.len(),
                r.statuses.len(),
                r.max_regular_ratio
            )];
            lines.extend(r.poles.iter().map(|p| format!("pole at {}", fmt_params(p))));
            Ok(Outcome {
                status,
                summary: json!({"classification": r.classification, "poles": r.poles.len()}),
                lines,
                result: to_value(&r),
            })
        }
        VerifyCommand::Match {
            data,
            against,
            domain,
            sampling,
            order,
            tol,
        } => {
            let d1: ResidueData = ctx.load("data", data)?;
            let d2 = load_comparison(ctx, against)?;
            let n = d1.variety().n();
            let domain = resolve_domain(ctx, domain, n, None)?;
            let plan = resolve_plan(ctx, sampling, n, 5)?;
            ctx.param("order", order);
            ctx.param("tol", tol);
            let r = verify_traces_match(&d1, &d2, &domain, &plan, *order, *tol).map_err(CliError::computation)?;
            Ok(Outcome {
                status: Status::check(r.pass),
                summary: json!({"max_difference": r.max_difference, "compared": r.compared}),
                lines: vec![format!(
                    "max |u(data) - u(against)| = {:.3e} over {} samples, {} skipped (tol {:.1e})",
                    r.max_difference, r.compared, r.skipped, tol
                )],
                result: to_value(&r),
            })
        }
        VerifyCommand::Reparam {
            data,
            map,
            domain,
            sampling,
            tol,
        } => {
            let data = load_data(ctx, data)?;
            let dim = chart_dim(&data);
            let mu = match map {
                Some(path) => ctx.load("map", path)?,
                None => random_map(ctx.seed, dim),
            };
            ctx.param("map", &mu);
            ctx.param("tol", tol);
            let domain = resolve_domain(ctx, domain, dim, None)?;
            let plan = resolve_plan(ctx, sampling, dim, 3)?;
            let r = reparametrize_check(&data, &domain, &plan, &mu, *tol).map_err(|e| match e {
                RadonError::InvalidMap(_) => CliError::input(e.to_string()),
                e => CliError::computation(e),
            })?;
            Ok(Outcome {
                status: Status::check(r.pass),
                summary: json!({"max_discrepancy": r.max_discrepancy, "samples": r.samples}),
                lines: vec![format!(
                    "max discrepancy {:.3e} over {} components at {} samples, {} skipped (tol {:.1e})",
                    r.max_discrepancy, r.components, r.samples, r.skipped, tol
                )],
                result: to_value(&r),
            })
        }
    }
}

fn fmt_params(p: &[C64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

pub fn extend(ctx: &mut Context, args: &ExtendArgs) -> Result<Outcome, CliError> {
    let t: TraceTable = ctx.load("traces", &args.traces)?;
    let data = load_data(ctx, &args.data)?;
    if !matches!(t.plan.layout, SampleLayout::Circle { .. }) {
        return Err(CliError::input(
            "extend needs a table sampled on a circle in a (--circle 0:N)",
        ));
    }
    let dim = chart_dim(&data);
    let domain = resolve_domain(ctx, &args.domain, dim, Some(t.domain.center()))?;
    let plan = resolve_plan(ctx, &args.sampling, dim, 3)?;
    ctx.param("order", args.order);
    let u0 = trace_evaluator(&data, MonomialIndex::single(0));
    let ext = propagate_trace_extension(&t, &u0, &domain, &plan, args.order, PropagateOptions::default()).map_err(
        |e| match e {
            RadonError::PathCrossesPole { .. } => CliError::verification(e),
            RadonError::Unsupported(_) | RadonError::InsufficientMargin(_) => CliError::input(e.to_string()),
            e => CliError::computation(e),
        },
    )?;
    let mut lines = vec![format!(
        "{} traces extended to {} samples",
        ext.indices.len(),
        ext.samples.len()
    )];
    let (status, summary) = if args.compare {
        ctx.param("tol", args.tol);
        let direct = trace_table(
            &data,
            ParamSpace::Chart,
            &domain,
            &ext.indices,
            &plan,
            TraceTableOptions::default(),
        )
        .map_err(CliError::computation)?;
        let diff = ext
            .samples
            .iter()
            .zip(&direct.samples)
            .filter(|(_, d)| d.is_clean())
            .flat_map(|(e, d)| e.values.iter().zip(&d.values).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        lines.push(format!(
            "max difference from direct traces {diff:.3e} (tol {:.1e})",
            args.tol
        ));
        (Status::check(diff <= args.tol), json!({"max_difference": diff}))
    } else {
        (Status::Ok, json!({}))
    };
    Ok(Outcome {
        status,
        summary,
        lines,
        result: to_value(&ext),
    })
}
