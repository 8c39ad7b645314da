use abel_radon::geometry::{
    hypersurface_family, plane_substitute, solve_fiber, solve_section, veronese_lift, DomainSpec, ParamSpace,
    PlaneChart, ResidueData, SamplingPlan, SolveOptions, VarietySpec,
};
use abel_radon::numeric::{
    cauchy_derivative, hankel_fit, poly_interpolate, poly_roots, DegreeChoice, MultiPoly, NumericError, UniPoly, C64,
};
use abel_radon::radon::{propagate_trace_extension, reparametrize_check, trace_evaluator, AffineMap, PropagateOptions};
use abel_radon::reconstruct::{reconstruct, verify_traces_match, FitOptions};
use abel_radon::residue::{trace, trace_at, trace_table, MonomialIndex, TraceOptions, TraceTableOptions};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

/// `d` roots at least `gap` apart, inside the disc of radius 1.5.
fn separated_roots(d: std::ops::RangeInclusive<usize>, gap: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(1.5), d).prop_filter("roots too close", move |r| {
        r.iter()
            .enumerate()
            .all(|(i, a)| r[..i].iter().all(|b| (a - b).norm() > gap))
    })
}

fn y_only_variety(p: &UniPoly) -> VarietySpec {
    let vars = ["x", "y"];
    let f = MultiPoly::from_terms(
        &vars,
        p.coeffs().iter().enumerate().map(|(k, &a)| (vec![0, k as u32], a)),
    );
    VarietySpec::new(&["x"], &["y"], vec![f]).unwrap()
}

fn curve(def: &str, psi: &str) -> ResidueData {
    let vars = ["x", "y"];
    let v = VarietySpec::new(&["x"], &["y"], vec![MultiPoly::parse(&vars, def).unwrap()]).unwrap();
    ResidueData::new(v, MultiPoly::parse(&vars, psi).unwrap(), def).unwrap()
}

fn elliptic() -> VarietySpec {
    curve("y^2 - x^3 - 1", "1").variety().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn root_sum_matches_subleading_coefficient(roots in prop::collection::vec(complex(2.0), 1..=8)) {
        let p = UniPoly::from_roots(&roots);
        let d = roots.len();
        let found = poly_roots(&p, 1e-8).unwrap();
        let total: C64 = found.iter().map(|r| r.value * r.multiplicity as f64).sum();
        let expect = -p.coeff(d - 1);
        prop_assert!((total - expect).norm() <= 1e-9 * expect.norm().max(1.0));
        prop_assert_eq!(found.iter().map(|r| r.multiplicity).sum::<usize>(), d);
    }

    #[test]
    fn cauchy_derivative_is_exact_on_polynomials(
        coeffs in prop::collection::vec(complex(1.0), 1..=8),
        z0 in complex(1.0),
        radius in 0.1f64..2.0,
        order in 1u32..4,
    ) {
        let p = UniPoly::new(coeffs);
        let mut exact = p.clone();
        for _ in 0..order {
            exact = exact.derivative();
        }
        let got: C64 = cauchy_derivative(|z| Ok::<_, NumericError>(p.eval(z)), z0, radius, order, 32).unwrap();
        let scale = p.magnitude_at(C64::new(z0.norm() + radius, 0.0)) * (1..=order).product::<u32>() as f64
            / radius.powi(order as i32);
        prop_assert!((got - exact.eval(z0)).norm() <= 1e-12 * scale.max(1.0), "{} vs {}", got, exact.eval(z0));
    }

    #[test]
    fn hankel_fit_recovers_monic_polynomials(roots in separated_roots(1..=6, 0.3), weights in prop::collection::vec(complex(1.0), 6)) {
        let d = roots.len();
        prop_assume!(weights[..d].iter().all(|w| w.norm() > 0.1));
        let moments: Vec<C64> = (0..2 * d + 1)
            .map(|k| roots.iter().zip(&weights).map(|(y, w)| w * y.powu(k as u32)).sum())
            .collect();
        let fit = hankel_fit(&moments, DegreeChoice::Fixed(d), 1e-8).unwrap();
        let p = UniPoly::from_roots(&roots);
        for (j, a) in fit.coeffs.iter().enumerate() {
            let expect = p.coeff(d - 1 - j);
            prop_assert!((a - expect).norm() <= 1e-8 * p.max_abs_coeff(), "{:?}", fit.coeffs);
        }
    }

    #[test]
    fn interpolation_inverts_evaluation(
        coeffs in prop::collection::vec(complex(1.0), 1..=6),
        center in complex(0.5),
    ) {
        let deg = coeffs.len() - 1;
        let p = UniPoly::new(coeffs);
        let samples: Vec<(C64, C64)> = (0..deg + 3)
            .map(|k| {
                let x = center + C64::from_polar(1.0, k as f64 * 1.3);
                (x, p.eval(x))
            })
            .collect();
        let fit = poly_interpolate(&samples, deg, 1e-10).unwrap();
        for k in 0..=deg {
            prop_assert!((fit.poly.coeff(k) - p.coeff(k)).norm() <= 1e-10 * p.max_abs_coeff().max(1.0));
        }
    }

    #[test]
    fn fiber_degree_is_constant_and_points_lie_on_the_plane(a in complex(0.5), b in complex(0.5)) {
        let v = elliptic();
        let chart = ParamSpace::Chart.chart(1, 1, &[c(1.0, 0.2) + a, c(0.0, 0.3) + b]).unwrap();
        let fiber = solve_fiber(&v, &chart, 1e-10).unwrap();
        prop_assert_eq!(fiber.degree(), 3);
        let eqs = plane_substitute(&v, &chart).unwrap();
        for pt in &fiber.points {
            let ys = &pt.coords[1..];
            for f in &eqs {
                let at = f.eval(ys);
                prop_assert!(at.norm() <= 1e-10 * f.magnitude_at(ys).max(1.0));
            }
        }
    }

    #[test]
    fn simple_points_have_jacobian_above_the_cluster_threshold(log_eps in -14.0f64..-2.0, angle in 0.0f64..std::f64::consts::TAU) {
        let v = curve("y^2 - x", "1").variety().clone();
        let x = C64::from_polar(10f64.powf(log_eps), angle);
        let fiber = solve_fiber(&v, &PlaneChart::vertical(1, vec![x]), 1e-10).unwrap();
        for pt in fiber.points.iter().filter(|p| p.is_simple()) {
            prop_assert!(pt.jacobian.norm() >= 0.5 * 1e-5, "{:?}", pt);
        }
    }

    #[test]
    fn veronese_lift_preserves_fibers(a in prop::collection::vec(complex(0.4), 4), b in complex(1.0)) {
        let v = elliptic();
        let lift = veronese_lift(&v, 2).unwrap();
        let mut row = a.clone();
        row[0] += c(0.5, 0.0);
        let chart = PlaneChart::new(vec![row], vec![b]).unwrap();
        let conic = hypersurface_family(&lift, &chart).unwrap();
        let below = solve_section(&v, &conic, SolveOptions::default()).unwrap();
        let above = solve_fiber(&lift.variety, &chart, 1e-10).unwrap();
        prop_assume!(!below.has_clusters() && !above.has_clusters());
        prop_assert_eq!(below.points.len(), above.points.len());
        for q in &above.points {
            let nearest = below
                .points
                .iter()
                .map(|p| ((p.coords[0] - q.coords[0]).norm()).max((p.coords[1] - q.coords[1]).norm()))
                .fold(f64::INFINITY, f64::min);
            let size = q.coords[0].norm().max(q.coords[1].norm()).max(1.0);
            prop_assert!(nearest <= 1e-10 * size, "{}", nearest);
        }
    }

    #[test]
    fn jacobi_vanishing(roots in separated_roots(1..=6, 0.2), b in complex(1.0)) {
        let d = roots.len();
        let p = UniPoly::from_roots(&roots);
        let v = y_only_variety(&p);
        let data = ResidueData::new(v, MultiPoly::constant(&["x", "y"], c(1.0, 0.0)), "jacobi").unwrap();
        let chart = PlaneChart::vertical(1, vec![b]);
        let indices: Vec<MonomialIndex> = (0..d as u32).map(MonomialIndex::single).collect();
        let u = trace_at(&data, &chart, &indices, TraceOptions::default()).unwrap();
        // partial fractions: Σ y_i^k / ∏_{j≠i} (y_i − y_j), with J = −P′
        for k in 0..d {
            let oracle: C64 = -roots
                .iter()
                .enumerate()
                .map(|(i, y)| {
                    let dp: C64 = roots.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, z)| y - z).product();
                    y.powu(k as u32) / dp
                })
                .sum::<C64>();
            prop_assert!((u.values[k] - oracle).norm() <= 1e-9 * u.scale.max(1.0));
            let expect = if k + 1 == d { -1.0 } else { 0.0 };
            prop_assert!((u.values[k] - c(expect, 0.0)).norm() <= 1e-9 * u.scale.max(1.0), "k = {}: {}", k, u.values[k]);
        }
    }

    #[test]
    fn traces_ignore_unit_factors_and_are_linear(
        unit in complex(0.3),
        lambda in complex(2.0),
        x0 in complex(0.5),
    ) {
        let vars = ["x", "y"];
        let f = MultiPoly::parse(&vars, "y^3 - 2*x*y + x^2 - 3").unwrap();
        let psi1 = MultiPoly::parse(&vars, "1 + x*y").unwrap();
        let psi2 = MultiPoly::parse(&vars, "y^2 - x").unwrap();
        // u = 2 + unit·y stays away from zero on the fiber over |x| < 1
        let u = &MultiPoly::constant(&vars, c(2.0, 0.0)) + &MultiPoly::var(&vars, "y").scale(unit);
        let v = VarietySpec::new(&["x"], &["y"], vec![f.clone()]).unwrap();
        let vu = VarietySpec::new(&["x"], &["y"], vec![&f * &u]).unwrap();
        let chart = PlaneChart::vertical(1, vec![c(1.0, 0.0) + x0]);
        let indices = MonomialIndex::up_to(1, 4);
        let t = |v: &VarietySpec, psi: MultiPoly| {
            let data = ResidueData::new(v.clone(), psi, "").unwrap();
            trace_at(&data, &chart, &indices, TraceOptions::default()).unwrap()
        };
        let plain = t(&v, psi1.clone());
        let scaled = t(&vu, &psi1 * &u);
        for (a, b) in plain.values.iter().zip(&scaled.values) {
            prop_assert!((a - b).norm() <= 1e-10 * plain.scale.max(1.0));
        }
        let second = t(&v, psi2.clone());
        let combined = t(&v, &psi1 + &psi2.scale(lambda));
        for ((a, b), s) in plain.values.iter().zip(&second.values).zip(&combined.values) {
            prop_assert!((a + lambda * b - s).norm() <= 1e-12 * combined.scale.max(1.0));
        }
    }

    #[test]
    fn clustered_traces_match_the_ring_mean(psi_c in prop::collection::vec(complex(1.0), 3)) {
        let vars = ["x", "y"];
        let psi = MultiPoly::from_terms(&vars, [(vec![0, 0], psi_c[0]), (vec![0, 1], psi_c[1]), (vec![1, 1], psi_c[2])]);
        let v = curve("y^2 - x", "1").variety().clone();
        let data = ResidueData::new(v, psi, "").unwrap();
        let indices = MonomialIndex::up_to(1, 3);
        let at = |x: C64| trace_at(&data, &PlaneChart::vertical(1, vec![x]), &indices, TraceOptions::default()).unwrap();
        let center = at(c(0.0, 0.0));
        prop_assert!(center.clustered);
        let ring: Vec<_> = (0..16).map(|k| at(C64::from_polar(0.05, k as f64 * std::f64::consts::TAU / 16.0))).collect();
        for k in 0..indices.len() {
            let mean: C64 = ring.iter().map(|r| r.values[k]).sum::<C64>() / 16.0;
            prop_assert!((center.values[k] - mean).norm() <= 1e-8 * center.scale.max(1.0), "{} vs {}", center.values[k], mean);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn affine_reparametrizations_are_equivariant(m in prop::collection::vec(complex(0.3), 4), off in prop::collection::vec(complex(0.3), 2)) {
        let data = curve("y^3 - x*y - 1", "1 + y");
        let domain = DomainSpec::new(vec![c(0.3, 0.1), c(1.0, 0.0)], vec![0.2, 0.2]).unwrap();
        let mu = AffineMap {
            matrix: vec![vec![c(1.0, 0.0) + m[0], m[1]], vec![m[2], c(1.0, 0.0) + m[3]]],
            offset: off,
        };
        let r = reparametrize_check(&data, &domain, &SamplingPlan::lattice(vec![3, 3]), &mu, 1e-8).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn propagation_restricted_to_the_circle_is_the_input(a0 in complex(0.3), b0 in complex(0.5)) {
        let data = curve("y^3 - x*y - 1", "1 + y");
        let small = DomainSpec::new(vec![a0, c(0.3, 0.0) + b0], vec![0.3, 0.1]).unwrap();
        let plan = SamplingPlan::circle(0, 32);
        let t = trace_table(&data, ParamSpace::Chart, &small, &MonomialIndex::up_to(1, 3), &plan, TraceTableOptions::default()).unwrap();
        let u0 = trace_evaluator(&data, MonomialIndex::single(0));
        let ext = propagate_trace_extension(&t, &u0, &small, &plan, 3, PropagateOptions::default()).unwrap();
        for (e, s) in ext.samples.iter().zip(&t.samples) {
            for (x, y) in e.values.iter().zip(&s.values) {
                prop_assert!((x - y).norm() <= 1e-10 * t.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn reconstructions_are_monic_and_within_bounds(roots in separated_roots(1..=4, 0.3), q in prop::collection::vec(complex(1.0), 4), shift in complex(0.5)) {
        // sheets y = r_k + shift·x, so the coefficients are polynomials in x
        let d = roots.len();
        let vars = ["x", "y"];
        let f = roots.iter().fold(MultiPoly::constant(&vars, c(1.0, 0.0)), |acc, r| {
            let factor = MultiPoly::from_terms(&vars, [(vec![0, 1], c(1.0, 0.0)), (vec![1, 0], -shift), (vec![0, 0], -r)]);
            &acc * &factor
        });
        let psi = MultiPoly::from_terms(&vars, (0..d).map(|k| (vec![0, k as u32], q[k])));
        prop_assume!(roots.iter().all(|r| psi.eval(&[c(0.0, 0.0), *r]).norm() > 0.05));
        let v = VarietySpec::new(&["x"], &["y"], vec![f]).unwrap();
        let data = ResidueData::new(v, psi, "").unwrap();
        let domain = DomainSpec::new(vec![c(0.0, 0.0)], vec![0.1]).unwrap();
        let t = trace_table(&data, ParamSpace::Base, &domain, &MonomialIndex::up_to(1, 2 * d as u32 + 1), &SamplingPlan::circle(0, 12), TraceTableOptions::default()).unwrap();
        let r = reconstruct(&t, &FitOptions::default()).unwrap();
        let degrees = r.minimal.degrees();
        prop_assert_eq!(&degrees, &vec![d]);
        let p = r.minimal.poly(0);
        prop_assert_eq!(p.degree_in(1) as usize, d);
        let mut lead = vec![0u32, d as u32];
        prop_assert_eq!(p.coeff(&lead), c(1.0, 0.0));
        lead[0] = 1;
        prop_assert_eq!(p.coeff(&lead), c(0.0, 0.0));
        prop_assert!((r.numerator.degree_in(1) as usize) < d);
        for (j, a) in r.minimal.polys[0].coeffs.iter().enumerate() {
            prop_assert!(a.degree() <= j as isize + 1);
        }
    }

    #[test]
    fn matching_traces_give_matching_reconstructions(unit in complex(0.3), perturb in prop::bool::ANY) {
        let vars = ["x", "y"];
        let f = MultiPoly::parse(&vars, "y^2 - x").unwrap();
        let psi = MultiPoly::parse(&vars, "1 + y").unwrap();
        let u = &MultiPoly::constant(&vars, c(2.0, 0.0)) + &MultiPoly::var(&vars, "x").scale(unit);
        let d1 = ResidueData::new(VarietySpec::new(&["x"], &["y"], vec![f.clone()]).unwrap(), psi.clone(), "").unwrap();
        let psi2 = if perturb { &psi + &MultiPoly::constant(&vars, c(0.01, 0.0)) } else { psi.clone() };
        let d2 = ResidueData::new(VarietySpec::new(&["x"], &["y"], vec![&f * &u]).unwrap(), &psi2 * &u, "").unwrap();
        let domain = DomainSpec::new(vec![c(2.0, 0.0)], vec![0.3]).unwrap();
        let plan = SamplingPlan::circle(0, 8);
        let report = verify_traces_match(&d1, &d2, &domain, &plan, 4, 1e-9).unwrap();
        prop_assert_eq!(report.pass, !perturb);
        if report.pass {
            let table = |d: &ResidueData| trace_table(d, ParamSpace::Base, &domain, &MonomialIndex::up_to(1, 5), &plan, TraceTableOptions::default()).unwrap();
            let r1 = reconstruct(&table(&d1), &FitOptions::default()).unwrap();
            let r2 = reconstruct(&table(&d2), &FitOptions::default()).unwrap();
            prop_assert!((&r1.numerator - &r2.numerator).max_abs_coeff() <= 1e-8);
            prop_assert!((&r1.minimal.poly(0) - &r2.minimal.poly(0)).max_abs_coeff() <= 1e-8);
        }
    }
}

#[test]
fn single_trace_entry_point_agrees_with_batched() {
    let data = curve("y^2 - x", "1 + y");
    let chart = PlaneChart::vertical(1, vec![c(2.0, 0.5)]);
    let batch = trace_at(&data, &chart, &MonomialIndex::up_to(1, 3), TraceOptions::default()).unwrap();
    for (k, v) in batch.values.iter().enumerate() {
        assert_eq!(*v, trace(&data, &chart, &MonomialIndex::single(k as u32)).unwrap());
    }
}
