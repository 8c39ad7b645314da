use abel_radon::geometry::{DomainSpec, ParamSpace, ResidueData, SamplingPlan, VarietySpec};
use abel_radon::numeric::{MultiPoly, UniPoly, C64};
use abel_radon::reconstruct::{
    line_web_traces, reconstruct, reconstruct_global, verify_traces_match, DegreeBounds, FitOptions, LineGerm,
};
use abel_radon::residue::{trace_table, MonomialIndex, TraceTableOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn curve(def: &str, psi: &str) -> ResidueData {
    let vars = ["x", "y"];
    let v = VarietySpec::new(&["x"], &["y"], vec![MultiPoly::parse(&vars, def).unwrap()]).unwrap();
    ResidueData::new(v, MultiPoly::parse(&vars, psi).unwrap(), def).unwrap()
}

fn base_traces(
    d: &ResidueData,
    center: C64,
    radius: f64,
    plan: &SamplingPlan,
    max_order: u32,
) -> abel_radon::residue::TraceTable {
    let domain = DomainSpec::new(vec![center], vec![radius]).unwrap();
    trace_table(
        d,
        ParamSpace::Base,
        &domain,
        &MonomialIndex::up_to(d.variety().p(), max_order),
        plan,
        TraceTableOptions::default(),
    )
    .unwrap()
}

fn rel_diff(a: &MultiPoly, b: &MultiPoly) -> f64 {
    (a - b).max_abs_coeff() / b.max_abs_coeff().max(1.0)
}

#[test]
fn random_round_trips_recover_p_and_q() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let vars = ["x", "y"];
    for trial in 0..20 {
        let d = rng.random_range(1..=5usize);
        let roots: Vec<C64> = (0..d)
            .map(|k| {
                let angle = std::f64::consts::TAU * (k as f64 + rng.random_range(0.0..0.5)) / d as f64;
                C64::from_polar(rng.random_range(0.5..1.5), angle)
            })
            .collect();
        let p = UniPoly::from_roots(&roots);
        let p_multi = MultiPoly::from_terms(
            &vars,
            p.coeffs().iter().enumerate().map(|(k, &a)| (vec![0, k as u32], a)),
        );
        let q_multi = MultiPoly::from_terms(
            &vars,
            (0..d).map(|k| {
                (
                    vec![0, k as u32],
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            }),
        );
        let v = VarietySpec::new(&["x"], &["y"], vec![p_multi.clone()]).unwrap();
        let data = ResidueData::new(v, q_multi.scale(c(-1.0, 0.0)), "random").unwrap();
        let t = base_traces(
            &data,
            c(0.0, 0.0),
            1.0,
            &SamplingPlan::lattice(vec![3]),
            2 * d as u32 + 1,
        );
        let r = reconstruct(&t, &FitOptions::default()).unwrap();
        assert_eq!(r.minimal.degrees(), vec![d], "trial {trial}");
        assert!(
            rel_diff(&r.minimal.poly(0), &p_multi) < 1e-8,
            "trial {trial}: {:?}",
            r.minimal
        );
        assert!(
            rel_diff(&r.numerator, &q_multi) < 1e-8,
            "trial {trial}: {:?}",
            r.numerator
        );
    }
}

#[test]
fn global_cubic_from_a_far_disc() {
    let d = curve("y^2 - x*(x - 1)*(x - 2)", "1");
    let t = base_traces(&d, c(10.0, 0.0), 0.5, &SamplingPlan::circle(0, 16), 5);
    let r = reconstruct_global(&t, 4, DegreeBounds::uniform(3), 1e-8).unwrap();
    assert_eq!(r.minimal.degrees(), vec![2]);
    let a = &r.minimal.polys[0].coeffs;
    assert!(a[0].is_zero(), "{:?}", a[0]);
    let expect = [0.0, 2.0, -3.0, 1.0];
    let a2 = a[1].coeffs();
    for (k, e) in expect.iter().enumerate() {
        assert!(
            (a2.get(k).copied().unwrap_or_default() - c(-e, 0.0)).norm() < 1e-6,
            "{a2:?}"
        );
    }
    // Ψ = 1 over a vertical chart is Q = −1
    let q = MultiPoly::constant(&["x", "y"], c(-1.0, 0.0));
    assert!((&r.numerator - &q).max_abs_coeff() < 1e-6, "{:?}", r.numerator);
    // the reconstruction is valid far from where it was sampled
    let back = r.to_residue_data("reconstructed").unwrap();
    let far = DomainSpec::new(vec![c(-3.0, 1.0)], vec![0.5]).unwrap();
    let m = verify_traces_match(&d, &back, &far, &SamplingPlan::lattice(vec![3]), 4, 1e-6).unwrap();
    assert!(m.pass, "{m:?}");
}

#[test]
fn line_web_is_algebraic() {
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
    let domain = DomainSpec::new(vec![c(0.3, 0.2)], vec![0.1]).unwrap();
    let t = line_web_traces(&germs, &domain, &SamplingPlan::circle(0, 12), 7).unwrap();
    let r = reconstruct_global(&t, 5, DegreeBounds::uniform(3), 1e-9).unwrap();
    let vars = ["x", "y"];
    let line = |g: &LineGerm| {
        MultiPoly::from_terms(
            &vars,
            [
                (vec![0, 1], c(1.0, 0.0)),
                (vec![1, 0], -g.slope),
                (vec![0, 0], -g.intercept),
            ],
        )
    };
    let product = germs
        .iter()
        .map(line)
        .fold(MultiPoly::constant(&vars, c(1.0, 0.0)), |acc, l| &acc * &l);
    assert!(
        (&r.minimal.poly(0) - &product).max_abs_coeff() < 1e-8,
        "{:?}",
        r.minimal.poly(0)
    );
    // Q = Σ w_k ∏_{l ≠ k} (y − y_l)
    let q = (0..3).fold(MultiPoly::zero(&vars), |acc, k| {
        let others = (0..3)
            .filter(|&l| l != k)
            .fold(MultiPoly::constant(&vars, germs[k].weight), |p, l| {
                &p * &line(&germs[l])
            });
        &acc + &others
    });
    assert!((&r.numerator - &q).max_abs_coeff() < 1e-8, "{:?}", r.numerator);
    // the weights sum to zero, so Q has no y^2 term
    assert_eq!(r.numerator.degree_in(1), 1);
}

#[test]
fn reconstruction_ignores_the_representation() {
    let plain = curve("y^2 - x", "1 + y");
    let unit = curve("(y^2 - x)*(2 + x*y)", "(1 + y)*(2 + x*y)");
    let plan = SamplingPlan::circle(0, 8);
    let t1 = base_traces(&plain, c(2.0, 0.0), 0.3, &plan, 5);
    let t2 = base_traces(&unit, c(2.0, 0.0), 0.3, &plan, 5);
    let domain = DomainSpec::new(vec![c(2.0, 0.0)], vec![0.3]).unwrap();
    let m = verify_traces_match(&plain, &unit, &domain, &plan, 5, 1e-10).unwrap();
    assert!(m.pass, "{m:?}");
    let r1 = reconstruct(&t1, &FitOptions::default()).unwrap();
    let r2 = reconstruct(&t2, &FitOptions::default()).unwrap();
    assert!((&r1.numerator - &r2.numerator).max_abs_coeff() < 1e-9);
    assert!((&r1.minimal.poly(0) - &r2.minimal.poly(0)).max_abs_coeff() < 1e-9);
    let back = r1.to_residue_data("back").unwrap();
    let self_match = verify_traces_match(&plain, &back, &domain, &plan, 5, 1e-9).unwrap();
    assert!(self_match.pass, "{self_match:?}");
}
