//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//!
//! Run with `cargo test -p abel-radon --test acceptance`.

use std::time::{Duration, Instant};

use abel_radon::geometry::{
    hypersurface_family, lift_residue_data, veronese_lift, DomainSpec, ParamSpace, PlaneChart, ResidueData,
    SamplingPlan, SolveOptions, VarietySpec,
};
use abel_radon::numeric::{MultiPoly, UniPoly, C64};
use abel_radon::radon::{
    propagate_trace_extension, radon_coefficients, reparametrize_check, trace_evaluator, verify_holomorphy,
    verify_shock_relations, AffineMap, Classification, HolomorphyOptions, PropagateOptions, SampleStatus,
};
use abel_radon::reconstruct::{line_web_traces, reconstruct, reconstruct_global, DegreeBounds, FitOptions, LineGerm};
use abel_radon::residue::{section_trace, trace_at, trace_table, MonomialIndex, TraceOptions, TraceTableOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cz(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    c(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn curve(def: &str, psi: &str) -> ResidueData {
    let vars = ["x", "y"];
    let v = VarietySpec::new(&["x"], &["y"], vec![MultiPoly::parse(&vars, def).unwrap()]).unwrap();
    ResidueData::new(v, MultiPoly::parse(&vars, psi).unwrap(), def).unwrap()
}

fn y_poly(p: &UniPoly) -> MultiPoly {
    MultiPoly::from_terms(
        &["x", "y"],
        p.coeffs().iter().enumerate().map(|(k, &a)| (vec![0, k as u32], a)),
    )
}

/// Roots on a jittered circle, so they stay apart.
fn spread_roots(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    (0..d)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64 + rng.random_range(0.0..0.5)) / d as f64;
            C64::from_polar(rng.random_range(0.5..1.5), angle)
        })
        .collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn jacobi_vanishing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_low, mut worst_top): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let d = rng.random_range(1..=6usize);
        let p = UniPoly::from_roots(&spread_roots(&mut rng, d));
        let v = VarietySpec::new(&["x"], &["y"], vec![y_poly(&p)]).map_err(err)?;
        let data = ResidueData::new(v, MultiPoly::constant(&["x", "y"], c(1.0, 0.0)), "jacobi").map_err(err)?;
        let chart = PlaneChart::vertical(1, vec![cz(&mut rng, 1.0)]);
        let indices: Vec<MonomialIndex> = (0..d as u32).map(MonomialIndex::single).collect();
        let u = trace_at(&data, &chart, &indices, TraceOptions::default())
            .map_err(err)?
            .values;
        let max = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for z in &u[..d - 1] {
            worst_low = worst_low.max(z.norm() / max);
        }
        worst_top = worst_top.max((u[d - 1].norm() - 1.0).abs());
    }
    Ok((
        worst_low <= 1e-9 && worst_top <= 1e-9,
        format!("max |u_k|/max|u| = {worst_low:.1e}, max ||u_(d-1)| - 1| = {worst_top:.1e} (tol 1e-9)"),
    ))
}

fn trace_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vars = ["x", "y"];
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=5usize);
        let p = y_poly(&UniPoly::from_roots(&spread_roots(&mut rng, d)));
        let q = MultiPoly::from_terms(&vars, (0..d).map(|k| (vec![0, k as u32], cz(&mut rng, 1.0))));
        let v = VarietySpec::new(&["x"], &["y"], vec![p.clone()]).map_err(err)?;
        let data = ResidueData::new(v, q.scale(c(-1.0, 0.0)), "random").map_err(err)?;
        let domain = DomainSpec::new(vec![c(0.0, 0.0)], vec![1.0]).map_err(err)?;
        let indices = MonomialIndex::up_to(1, 2 * d as u32 + 1);
        let t = trace_table(
            &data,
            ParamSpace::Base,
            &domain,
            &indices,
            &SamplingPlan::lattice(vec![3]),
            TraceTableOptions::default(),
        )
        .map_err(err)?;
        let r = reconstruct(&t, &FitOptions::default()).map_err(err)?;
        if r.minimal.degrees() != vec![d] {
            return Ok((false, format!("degree {:?}, expected {d}", r.minimal.degrees())));
        }
        worst = worst.max((&r.minimal.poly(0) - &p).max_abs_coeff() / p.max_abs_coeff());
        worst = worst.max((&r.numerator - &q).max_abs_coeff() / q.max_abs_coeff());
    }
    // two fiber variables: points (s, s + 1), s = ±√x
    let tri = {
        let vars = ["x", "y1", "y2"];
        let defs = vec![
            MultiPoly::parse(&vars, "y1^2 - x").map_err(err)?,
            MultiPoly::parse(&vars, "y2 - y1 - 1").map_err(err)?,
        ];
        let v = VarietySpec::new(&["x"], &["y1", "y2"], defs).map_err(err)?;
        ResidueData::new(v, MultiPoly::constant(&vars, c(1.0, 0.0)), "triangular").map_err(err)?
    };
    let domain = DomainSpec::new(vec![c(2.0, 0.0)], vec![0.5]).map_err(err)?;
    let t = trace_table(
        &tri,
        ParamSpace::Base,
        &domain,
        &MonomialIndex::up_to(2, 5),
        &SamplingPlan::circle(0, 8),
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let r = reconstruct(&t, &FitOptions::default()).map_err(err)?;
    let vars = r.minimal.vars();
    let expect = [
        (
            "P1",
            r.minimal.poly(0),
            MultiPoly::parse(&vars, "y1^2 - x").map_err(err)?,
        ),
        (
            "P2",
            r.minimal.poly(1),
            MultiPoly::parse(&vars, "y2^2 - 2*y2 + 1 - x").map_err(err)?,
        ),
        (
            "Q",
            r.numerator.clone(),
            MultiPoly::parse(&vars, "y1 + y2 - 1").map_err(err)?,
        ),
    ];
    let tri_err = expect
        .iter()
        .map(|(_, got, want)| (got - want).max_abs_coeff())
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-8 && tri_err <= 1e-6,
        format!(
            "20 random (P, Q): worst relative error {worst:.1e} (tol 1e-8); two-slot case {tri_err:.1e} (tol 1e-6)"
        ),
    ))
}

fn abel_vanishing() -> Outcome {
    let d = curve("y^2 - x^3 - 1", "2");
    let domain = DomainSpec::new(vec![c(1.0, 0.2), c(0.0, 0.3)], vec![0.5, 0.5]).map_err(err)?;
    let rt = radon_coefficients(
        &d,
        &domain,
        &SamplingPlan::lattice(vec![5, 5]),
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let clean = rt.table.clean_samples().count();
    let ratio = rt.max_abs() / rt.scale();
    Ok((
        clean == 25 && ratio <= 1e-9,
        format!("{clean}/25 clean charts, max |R| / term size = {ratio:.1e} (tol 1e-9)"),
    ))
}

fn pole_dichotomy() -> Outcome {
    let vars = ["x", "y"];
    let h = MultiPoly::parse(&vars, "x - 2").map_err(err)?;
    let d = curve("y^2 - x^3 - 1", "2").with_polar(h).map_err(err)?;
    // a ∈ {−1, −1/3, 1/3, 1}, b ∈ {−1, −1/2, 0, 1/2, 1}; charts through (2, ±3) are b = 2 ∓ 3a
    let domain = DomainSpec::new(vec![c(0.0, 0.0), c(0.0, 0.0)], vec![1.0, 1.0]).map_err(err)?;
    let plan = SamplingPlan::lattice(vec![4, 5]).with_probe(0.04, 64);
    let rt = radon_coefficients(&d, &domain, &plan, TraceTableOptions::default()).map_err(err)?;
    let report = verify_holomorphy(&rt, HolomorphyOptions { tol: 1e-8 }).map_err(err)?;
    let mut wrong = Vec::new();
    for (s, status) in rt.table.samples.iter().zip(&report.statuses) {
        let (a, b) = (s.params[0].re, s.params[1].re);
        let on_locus = (b - (2.0 - 3.0 * a)).abs() < 1e-9 || (b - (2.0 + 3.0 * a)).abs() < 1e-9;
        let expect = if on_locus {
            SampleStatus::Pole
        } else {
            SampleStatus::Holomorphic
        };
        if *status != expect {
            wrong.push(format!("({a:.2}, {b:.2}): {status:?}"));
        }
    }
    Ok((
        wrong.is_empty() && report.classification == Classification::Meromorphic,
        format!(
            "{} poles over 20 charts, {} misclassified {:?}; regular ratio <= {:.1e}, pole ratio >= {:.1e}",
            report.poles.len(),
            wrong.len(),
            wrong,
            report.max_regular_ratio,
            report.min_pole_ratio.unwrap_or(0.0)
        ),
    ))
}

fn shock_relations() -> Outcome {
    let plan = SamplingPlan::lattice(vec![3, 3]).with_probe(0.05, 32);
    let parabola = curve("y^2 - x", "1");
    let domain = DomainSpec::new(vec![c(0.3, 0.1), c(1.0, 0.0)], vec![0.2, 0.2]).map_err(err)?;
    let t = trace_table(
        &parabola,
        ParamSpace::Chart,
        &domain,
        &MonomialIndex::up_to(1, 4),
        &plan,
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let r1 = verify_shock_relations(&t, 1e-6).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vars = ["x", "y"];
    let f = MultiPoly::from_terms(
        &vars,
        [
            (vec![0, 3], c(1.0, 0.0)),
            (vec![1, 1], cz(&mut rng, 2.0)),
            (vec![2, 0], cz(&mut rng, 1.0)),
            (vec![0, 1], cz(&mut rng, 1.0)),
            (vec![0, 0], cz(&mut rng, 3.0)),
        ],
    );
    let psi = MultiPoly::from_terms(
        &vars,
        [
            (vec![0, 0], c(1.0, 0.0)),
            (vec![1, 1], cz(&mut rng, 1.0)),
            (vec![0, 2], cz(&mut rng, 1.0)),
        ],
    );
    let v = VarietySpec::new(&["x"], &["y"], vec![f]).map_err(err)?;
    let cubic = ResidueData::new(v, psi, "random cubic").map_err(err)?;
    let domain = DomainSpec::new(vec![c(0.4, 0.2), c(0.7, -0.1)], vec![0.2, 0.2]).map_err(err)?;
    let t = trace_table(
        &cubic,
        ParamSpace::Chart,
        &domain,
        &MonomialIndex::up_to(1, 4),
        &plan,
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let r2 = verify_shock_relations(&t, 1e-6).map_err(err)?;
    Ok((
        r1.pass && r2.pass,
        format!(
            "parabola {:.1e} over {} relations, random cubic {:.1e} over {} (tol 1e-6)",
            r1.max_residual, r1.checked, r2.max_residual, r2.checked
        ),
    ))
}

fn propagation_error(d: &ResidueData, center: [C64; 2], r_a: f64, r_b: f64, big: f64) -> Result<f64, String> {
    let order = 3;
    let small = DomainSpec::new(center.to_vec(), vec![r_a, r_b]).map_err(err)?;
    let t = trace_table(
        d,
        ParamSpace::Chart,
        &small,
        &MonomialIndex::up_to(1, order),
        &SamplingPlan::circle(0, 32),
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let u0 = trace_evaluator(d, MonomialIndex::single(0));
    let target = DomainSpec::new(center.to_vec(), vec![r_a * 0.8, big]).map_err(err)?;
    let plan = SamplingPlan::lattice(vec![3, 5]);
    let ext = propagate_trace_extension(&t, &u0, &target, &plan, order, PropagateOptions::default()).map_err(err)?;
    let direct = trace_table(
        d,
        ParamSpace::Chart,
        &target,
        &ext.indices,
        &plan,
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    Ok(ext
        .samples
        .iter()
        .zip(&direct.samples)
        .flat_map(|(e, g)| e.values.iter().zip(&g.values).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max))
}

fn trace_propagation() -> Outcome {
    let e1 = propagation_error(&curve("y^2 - x", "1"), [c(0.2, 0.0), c(1.0, 0.0)], 0.3, 0.3, 0.9)?;
    let e2 = propagation_error(
        &curve("y^3 - x*y - 1", "1 + y"),
        [c(0.2, 0.1), c(0.3, 0.0)],
        0.3,
        0.1,
        0.6,
    )?;
    Ok((
        e1 <= 1e-6 && e2 <= 1e-6,
        format!("parabola b-radius 0.3 -> 0.9: {e1:.1e}; cubic 0.1 -> 0.6: {e2:.1e} (tol 1e-6)"),
    ))
}

fn inverse_abel() -> Outcome {
    let d = curve("y^2 - x*(x - 1)*(x - 2)", "1");
    let domain = DomainSpec::new(vec![c(10.0, 0.0)], vec![0.5]).map_err(err)?;
    let t = trace_table(
        &d,
        ParamSpace::Base,
        &domain,
        &MonomialIndex::up_to(1, 5),
        &SamplingPlan::circle(0, 16),
        TraceTableOptions::default(),
    )
    .map_err(err)?;
    let r = reconstruct_global(&t, 4, DegreeBounds::uniform(3), 1e-8).map_err(err)?;
    let vars = r.minimal.vars();
    let want = MultiPoly::parse(&vars, "y^2 - x*(x - 1)*(x - 2)").map_err(err)?;
    let cubic_err = if r.minimal.degrees() == vec![2] {
        (&r.minimal.poly(0) - &want).max_abs_coeff()
    } else {
        f64::INFINITY
    };

    let germs = [
        LineGerm {
            slope: c(1.0, 0.0),
            intercept: c(0.0, 0.0),
            weight: c(1.0, 0.0),
        },
        LineGerm {
            slope: c(-1.0, 0.0),
            intercept: c(2.0, 0.0),
            weight: c(-2.0, 0.0),
        },
        LineGerm {
            slope: c(0.5, 0.0),
            intercept: c(-1.0, 0.0),
            weight: c(1.0, 0.0),
        },
    ];
    let disc = DomainSpec::new(vec![c(0.3, 0.2)], vec![0.1]).map_err(err)?;
    let t = line_web_traces(&germs, &disc, &SamplingPlan::circle(0, 12), 7).map_err(err)?;
    let r = reconstruct_global(&t, 5, DegreeBounds::uniform(3), 1e-9).map_err(err)?;
    let vars = r.minimal.vars();
    let product = germs.iter().fold(MultiPoly::constant(&vars, c(1.0, 0.0)), |acc, g| {
        let line = MultiPoly::from_terms(
            &vars,
            [
                (vec![0, 1], c(1.0, 0.0)),
                (vec![1, 0], -g.slope),
                (vec![0, 0], -g.intercept),
            ],
        );
        &acc * &line
    });
    let web_err = (&r.minimal.poly(0) - &product).max_abs_coeff();
    Ok((
        cubic_err <= 1e-6 && web_err <= 1e-8,
        format!("cubic from |x-10| <= 0.5: {cubic_err:.1e} (tol 1e-6); 3-line web: {web_err:.1e} (tol 1e-8)"),
    ))
}

fn equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = curve("y^3 - x*y - 1", "1 + y");
    let domain = DomainSpec::new(vec![c(0.3, 0.1), c(1.0, 0.0)], vec![0.2, 0.2]).map_err(err)?;
    let plan = SamplingPlan::lattice(vec![3, 3]);
    let mut worst: f64 = 0.0;
    let mut passed = 0;
    for _ in 0..10 {
        let mu = AffineMap {
            matrix: vec![
                vec![c(1.0, 0.0) + cz(&mut rng, 0.3), cz(&mut rng, 0.3)],
                vec![cz(&mut rng, 0.3), c(1.0, 0.0) + cz(&mut rng, 0.3)],
            ],
            offset: vec![cz(&mut rng, 0.3), cz(&mut rng, 0.3)],
        };
        let r = reparametrize_check(&data, &domain, &plan, &mu, 1e-8).map_err(err)?;
        worst = worst.max(r.max_discrepancy);
        passed += r.pass as usize;
    }
    Ok((
        passed == 10,
        format!("{passed}/10 maps pass, worst discrepancy {worst:.1e} (tol 1e-8)"),
    ))
}

fn veronese_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vars = ["x", "y"];
    let v = VarietySpec::new(
        &["x"],
        &["y"],
        vec![MultiPoly::parse(&vars, "y^2 - x^3 - 1").map_err(err)?],
    )
    .map_err(err)?;
    let data = ResidueData::new(v.clone(), MultiPoly::parse(&vars, "1 + x*y").map_err(err)?, "cubic").map_err(err)?;
    let lift = veronese_lift(&v, 2).map_err(err)?;
    let lifted = lift_residue_data(&data, &lift).map_err(err)?;
    let p = lift.variety.p();
    let original: Vec<MonomialIndex> = (0..4).map(MonomialIndex::single).collect();
    let lifted_indices: Vec<MonomialIndex> = (0..4u32)
        .map(|k| {
            let mut e = vec![0; p];
            e[0] = k;
            MonomialIndex(e)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let row = (0..p)
            .map(|j| if j == 0 { cz(&mut rng, 1.0) } else { cz(&mut rng, 0.4) })
            .collect();
        let chart = PlaneChart::new(vec![row], vec![cz(&mut rng, 1.0)]).map_err(err)?;
        let conic = hypersurface_family(&lift, &chart).map_err(err)?;
        let below = section_trace(&data, &conic, &original, SolveOptions::default()).map_err(err)?;
        let above = trace_at(&lifted, &chart, &lifted_indices, TraceOptions::default()).map_err(err)?;
        for (a, b) in below.iter().zip(&above.values) {
            worst = worst.max((a - b).norm() / above.scale.max(1.0));
        }
    }
    Ok((
        worst <= 1e-9,
        format!("5 random conics, worst relative difference {worst:.1e} (tol 1e-9)"),
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Jacobi vanishing", Duration::from_secs(1), jacobi_vanishing),
        ("trace round trip", Duration::from_secs(5), trace_round_trip),
        ("Abel vanishing", Duration::from_secs(2), abel_vanishing),
        ("pole dichotomy", Duration::from_secs(2), pole_dichotomy),
        ("shock relations", Duration::from_secs(3), shock_relations),
        ("trace propagation", Duration::from_secs(3), trace_propagation),
        ("inverse Abel desk demo", Duration::from_secs(5), inverse_abel),
        ("equivariance", Duration::from_secs(2), equivariance),
        ("Veronese reduction", Duration::from_secs(2), veronese_reduction),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed < *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !ok as usize;
        println!(
            "[{}] {}. {name}: {detail}; {:.0} ms (budget {} ms)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64() * 1e3,
            budget.as_millis()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
