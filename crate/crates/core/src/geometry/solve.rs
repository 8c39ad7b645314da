//! Zero-dimensional solving of `(f_1, …, f_p, s_1, …, s_n)` where the `s_i`
//! cut out a section (usually the plane of a chart).
//!
//! The system is first reduced by eliminating variables that occur linearly
//! with a constant coefficient, then solved triangularly, with one resultant
//! step for a coupled pair of variables. Points are back-substituted and
//! polished by Newton's method on the full system.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::variety::check_chart;
use super::{GeometryError, PlaneChart, VarietySpec};
use crate::numeric::{poly_roots, ring_points, MultiPoly, UniPoly, ARITHMETIC_TOL, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// Compare the fiber degree with the variety's generic degree.
    pub check_degree: bool,
    /// Overrides the expected degree (otherwise chosen from the chart).
    pub expected_degree: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: ARITHMETIC_TOL,
            check_degree: true,
            expected_degree: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Self::default() }
    }

    pub fn unchecked() -> Self {
        SolveOptions {
            check_degree: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    /// `(x, y)` coordinates.
    pub coords: Vec<C64>,
    pub jacobian: C64,
    pub cluster_size: usize,
}

impl FiberPoint {
    pub fn is_simple(&self) -> bool {
        self.cluster_size == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FiberWarning {
    /// Point `point` is a cluster of `cluster_size` merged solutions.
    NearDiscriminant { point: usize, cluster_size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub points: Vec<FiberPoint>,
    pub warnings: Vec<FiberWarning>,
}

impl Fiber {
    /// Number of points counted with cluster size.
    pub fn degree(&self) -> usize {
        self.points.iter().map(|p| p.cluster_size).sum()
    }

    pub fn has_clusters(&self) -> bool {
        self.points.iter().any(|p| p.cluster_size > 1)
    }
}

/// Fiber of `v` over the plane of `chart`, with default options.
pub fn solve_fiber(v: &VarietySpec, chart: &PlaneChart, tol: f64) -> Result<Fiber, GeometryError> {
    solve_fiber_with(v, chart, SolveOptions::with_tol(tol))
}

pub fn solve_fiber_with(v: &VarietySpec, chart: &PlaneChart, opts: SolveOptions) -> Result<Fiber, GeometryError> {
    check_chart(v, chart)?;
    let fiber = solve_section(v, &chart.plane_equations(&v.vars()), opts)?;
    if opts.check_degree {
        if let Some(expected) = opts.expected_degree.or_else(|| v.degree().for_chart(chart)) {
            let found = fiber.degree();
            if found < expected {
                return Err(GeometryError::DegreeDrop { expected, found });
            }
            if found > expected {
                return Err(GeometryError::UnexpectedDegree { expected, found });
            }
        }
    }
    Ok(fiber)
}

/// Intersection of `v` with the section `{s_1 = … = s_n = 0}`; the `s_i` are
/// polynomials over [`VarietySpec::vars`]. The Jacobian of each point is the
/// determinant of `∂(f, s)/∂(x, y)`. No degree check is made.
pub fn solve_section(v: &VarietySpec, section: &[MultiPoly], opts: SolveOptions) -> Result<Fiber, GeometryError> {
    let vars = v.vars();
    if section.len() != v.n() {
        return Err(GeometryError::DimensionMismatch(format!(
            "section has {} equations, need {}",
            section.len(),
            v.n()
        )));
    }
    let section: Vec<MultiPoly> = section
        .iter()
        .map(|s| {
            s.with_vars(&vars)
                .ok_or_else(|| GeometryError::DimensionMismatch(format!("section equation {s} uses unknown variables")))
        })
        .collect::<Result<_, _>>()?;

    let mut eqs: Vec<Equation> = v
        .defs()
        .iter()
        .map(|f| Equation {
            poly: f.clone(),
            is_def: true,
        })
        .collect();
    eqs.extend(section.iter().map(|s| Equation {
        poly: s.clone(),
        is_def: false,
    }));
    let raw = solve_system(vars.len(), v.n(), eqs, opts.tol)?;

    let full: Vec<&MultiPoly> = v.defs().iter().chain(&section).collect();
    let section_jac: Vec<Vec<MultiPoly>> = section
        .iter()
        .map(|s| (0..vars.len()).map(|k| s.derivative(k)).collect())
        .collect();
    let jac: Vec<&Vec<MultiPoly>> = v.jacobian_polys().iter().chain(&section_jac).collect();

    let mut points = Vec::with_capacity(raw.len());
    let mut warnings = Vec::new();
    for (mut coords, cluster_size) in raw {
        if cluster_size == 1 {
            newton_polish(&full, &jac, &mut coords);
        }
        let (residual, bound) = if cluster_size == 1 {
            (relative_residual(&full, &coords), (100.0 * opts.tol).max(1e-12))
        } else {
            (normwise_residual(&full, &coords), opts.tol.sqrt())
        };
        if !(residual <= bound) {
            return Err(GeometryError::InaccuratePoint { residual });
        }
        let jacobian = jacobian_matrix(&jac, &coords).determinant();
        if cluster_size > 1 {
            warnings.push(FiberWarning::NearDiscriminant {
                point: points.len(),
                cluster_size,
            });
        }
        points.push(FiberPoint {
            coords,
            jacobian,
            cluster_size,
        });
    }
    Ok(Fiber { points, warnings })
}

struct Equation {
    poly: MultiPoly,
    is_def: bool,
}

/// Solutions of a square system over `nvars` variables (the first
/// `n_base` are base variables), with cluster multiplicities.
fn solve_system(
    nvars: usize,
    n_base: usize,
    mut eqs: Vec<Equation>,
    tol: f64,
) -> Result<Vec<(Vec<C64>, usize)>, GeometryError> {
    let mut remaining: Vec<usize> = (0..nvars).collect();
    let mut steps: Vec<(usize, MultiPoly)> = Vec::new();

    while let Some((e, var, expr)) = pick_elimination(&eqs, &remaining, n_base) {
        eqs.remove(e);
        remaining.retain(|&k| k != var);
        for eq in &mut eqs {
            if eq.poly.involves(var) {
                eq.poly = eq.poly.substitute(var, &expr);
            }
        }
        steps.push((var, expr));
    }

    if eqs.len() != remaining.len() {
        return Err(GeometryError::UnsupportedSystem(format!(
            "{} equations left in {} unknowns after elimination",
            eqs.len(),
            remaining.len()
        )));
    }

    let polys: Vec<MultiPoly> = eqs.into_iter().map(|e| e.poly).collect();
    let partial = solve_square(polys, remaining, tol)?;

    Ok(partial
        .into_iter()
        .map(|(assigned, mult)| {
            let mut point = vec![C64::new(0.0, 0.0); nvars];
            for (k, z) in assigned {
                point[k] = z;
            }
            for (var, expr) in steps.iter().rev() {
                point[*var] = expr.eval(&point);
            }
            (point, mult)
        })
        .collect())
}

/// Chooses `(equation, variable, expression)` with `var = expression`
/// solving the equation. Graph relations `v − h` of fiber variables go
/// first, then base variables from the section, then anything linear.
fn pick_elimination(eqs: &[Equation], remaining: &[usize], n_base: usize) -> Option<(usize, usize, MultiPoly)> {
    for priority in 0..3 {
        for (e, eq) in eqs.iter().enumerate() {
            for &var in remaining {
                let eligible = match priority {
                    0 => {
                        eq.is_def
                            && var >= n_base
                            && eqs
                                .iter()
                                .enumerate()
                                .all(|(o, other)| o == e || !other.is_def || !other.poly.involves(var))
                    }
                    1 => !eq.is_def && var < n_base,
                    _ => true,
                };
                if !eligible {
                    continue;
                }
                if let Some(expr) = linear_unit(&eq.poly, var) {
                    return Some((e, var, expr));
                }
            }
        }
    }
    None
}

/// If `eq = c·v + h` with `c` a constant and `h` free of `v`, returns `−h/c`.
fn linear_unit(eq: &MultiPoly, var: usize) -> Option<MultiPoly> {
    if eq.degree_in(var) != 1 {
        return None;
    }
    let cs = eq.coefficients_in(var);
    if cs[1].num_terms() != 1 || cs[1].total_degree() != 0 {
        return None;
    }
    let c = cs[1].coeff(&vec![0; eq.nvars()]);
    if c.norm() <= 1e-8 * eq.max_abs_coeff() {
        return None;
    }
    Some(cs[0].scale(-c.inv()))
}

type Partial = Vec<(Vec<(usize, C64)>, usize)>;

fn solve_square(eqs: Vec<MultiPoly>, vars: Vec<usize>, tol: f64) -> Result<Partial, GeometryError> {
    if vars.is_empty() {
        return Ok(vec![(Vec::new(), 1)]);
    }
    let mut eqs = eqs;
    for eq in &eqs {
        if eq.is_zero() {
            return Err(GeometryError::UnsupportedSystem("positive-dimensional fiber".into()));
        }
        if eq.total_degree() == 0 {
            return Ok(Vec::new());
        }
    }

    if let Some(e) = eqs.iter().position(|eq| eq.used_vars().len() == 1) {
        let eq = eqs.remove(e);
        let var = eq.used_vars()[0];
        let uni = eq.to_univariate(var).expect("single variable").trim_relative(1e-14);
        if uni.degree() < 1 {
            return Ok(Vec::new());
        }
        let rest: Vec<usize> = vars.iter().copied().filter(|&k| k != var).collect();
        let mut out = Vec::new();
        for root in poly_roots(&uni, tol)? {
            let cancel = if root.multiplicity > 1 { tol.sqrt() } else { tol };
            let reduced: Vec<MultiPoly> = eqs.iter().map(|q| eval_snapped(q, var, root.value, cancel)).collect();
            for (mut assigned, mult) in solve_square(reduced, rest.clone(), tol)? {
                assigned.push((var, root.value));
                out.push((assigned, mult * root.multiplicity));
            }
        }
        return Ok(out);
    }

    if vars.len() == 2 && eqs.len() == 2 {
        return solve_pair(&eqs[0], &eqs[1], vars[0], vars[1], tol);
    }
    Err(GeometryError::UnsupportedSystem(format!(
        "coupled system in {} unknowns",
        vars.len()
    )))
}

/// Fixes `var = value`, dropping coefficients that cancel to within
/// `cancel` of the magnitude of the terms that produced them.
fn eval_snapped(q: &MultiPoly, var: usize, value: C64, cancel: f64) -> MultiPoly {
    let mut acc: std::collections::BTreeMap<Vec<u32>, (C64, f64)> = Default::default();
    for (e, c) in q.terms() {
        let t = c * value.powu(e[var]);
        let mut rest = e.to_vec();
        rest[var] = 0;
        let slot = acc.entry(rest).or_insert((C64::new(0.0, 0.0), 0.0));
        slot.0 += t;
        slot.1 += t.norm();
    }
    MultiPoly::from_terms(
        q.vars(),
        acc.into_iter()
            .filter(|(_, (v, mag))| v.norm() > 8.0 * cancel.max(f64::EPSILON) * mag)
            .map(|(e, (v, _))| (e, v)),
    )
}

/// Two equations coupled in `(v1, v2)`: the resultant in `v2` gives the
/// `v1` coordinates, then `v2` is matched from the common roots.
fn solve_pair(e1: &MultiPoly, e2: &MultiPoly, v1: usize, v2: usize, tol: f64) -> Result<Partial, GeometryError> {
    let c1: Vec<UniPoly> = coeffs_in(e1, v2, v1);
    let c2: Vec<UniPoly> = coeffs_in(e2, v2, v1);
    let (m, k) = (c1.len() - 1, c2.len() - 1);
    let maxdeg = |c: &[UniPoly]| c.iter().map(|u| u.degree().max(0) as usize).max().unwrap_or(0);
    let bound = k * maxdeg(&c1) + m * maxdeg(&c2);
    let nodes = bound + 1;

    let values: Vec<C64> = ring_points(C64::new(0.0, 0.0), 1.0, nodes)
        .into_iter()
        .map(|z| sylvester(&c1, &c2, z).determinant())
        .collect();
    let coeffs: Vec<C64> = (0..nodes)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(l, &val)| val * C64::from_polar(1.0, -std::f64::consts::TAU * (j * l) as f64 / nodes as f64))
                .sum::<C64>()
                / nodes as f64
        })
        .collect();
    let res = UniPoly::new(coeffs).trim_relative(1e-12);
    if res.is_zero() {
        return Err(GeometryError::UnsupportedSystem(
            "equations share a common component".into(),
        ));
    }
    if res.degree() < 1 {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for root in poly_roots(&res, tol)? {
        let cancel = if root.multiplicity > 1 { tol.sqrt() } else { tol };
        let g1 = eval_snapped(e1, v1, root.value, cancel);
        let g2 = eval_snapped(e2, v1, root.value, cancel);
        let usable = |g: &MultiPoly| !g.is_zero() && g.degree_in(v2) >= 1;
        let (g, other) = match (usable(&g1), usable(&g2)) {
            (true, true) if g1.degree_in(v2) <= g2.degree_in(v2) => (&g1, e2),
            (true, true) | (false, true) => (&g2, e1),
            (true, false) => (&g1, e2),
            (false, false) => {
                return Err(GeometryError::UnsupportedSystem("degenerate resultant root".into()));
            }
        };
        let uni = g.to_univariate(v2).expect("only v2 remains").trim_relative(1e-14);
        let mut matched = Vec::new();
        for cand in poly_roots(&uni, tol)? {
            let mut pt = vec![C64::new(0.0, 0.0); e1.nvars()];
            pt[v1] = root.value;
            pt[v2] = cand.value;
            let mag = other.magnitude_at(&pt).max(f64::MIN_POSITIVE);
            if other.eval(&pt).norm() / mag <= 1e-6 {
                matched.push(cand.value);
            }
        }
        if matched.is_empty() || root.multiplicity % matched.len() != 0 {
            return Err(GeometryError::UnsupportedSystem(format!(
                "could not match {} common roots above a resultant root of multiplicity {}",
                matched.len(),
                root.multiplicity
            )));
        }
        let each = root.multiplicity / matched.len();
        for z in matched {
            out.push((vec![(v1, root.value), (v2, z)], each));
        }
    }
    Ok(out)
}

/// Coefficients of `e` in `outer`, each a univariate polynomial in `inner`.
fn coeffs_in(e: &MultiPoly, outer: usize, inner: usize) -> Vec<UniPoly> {
    e.coefficients_in(outer)
        .iter()
        .map(|c| c.to_univariate(inner).expect("two-variable equation"))
        .collect()
}

fn sylvester(c1: &[UniPoly], c2: &[UniPoly], z: C64) -> DMatrix<C64> {
    let (m, k) = (c1.len() - 1, c2.len() - 1);
    let size = m + k;
    let mut s = DMatrix::from_element(size, size, C64::new(0.0, 0.0));
    let a: Vec<C64> = c1.iter().rev().map(|u| u.eval(z)).collect();
    let b: Vec<C64> = c2.iter().rev().map(|u| u.eval(z)).collect();
    for r in 0..k {
        for (j, &v) in a.iter().enumerate() {
            s[(r, r + j)] = v;
        }
    }
    for r in 0..m {
        for (j, &v) in b.iter().enumerate() {
            s[(k + r, r + j)] = v;
        }
    }
    s
}

fn jacobian_matrix(jac: &[&Vec<MultiPoly>], point: &[C64]) -> DMatrix<C64> {
    let n = point.len();
    DMatrix::from_fn(n, n, |r, c| jac[r][c].eval(point))
}

fn relative_residual(eqs: &[&MultiPoly], point: &[C64]) -> f64 {
    eqs.iter()
        .map(|f| f.eval(point).norm() / f.magnitude_at(point).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Backward error against perturbations of every coefficient up to the
/// total degree, measured in the largest coefficient; unlike
/// [`relative_residual`] it stays meaningful at a cluster centroid where
/// every term is small.
fn normwise_residual(eqs: &[&MultiPoly], point: &[C64]) -> f64 {
    eqs.iter()
        .map(|f| {
            let radius = point.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let size = (1.0 + radius).powi(f.total_degree() as i32);
            f.eval(point).norm() / (f.max_abs_coeff() * size).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

fn newton_polish(eqs: &[&MultiPoly], jac: &[&Vec<MultiPoly>], point: &mut [C64]) {
    let mut best = relative_residual(eqs, point);
    for _ in 0..4 {
        if best <= 4.0 * f64::EPSILON {
            break;
        }
        let j = jacobian_matrix(jac, point);
        let rhs = nalgebra::DVector::from_iterator(eqs.len(), eqs.iter().map(|f| -f.eval(point)));
        let Some(step) = j.lu().solve(&rhs) else { break };
        let trial: Vec<C64> = point.iter().zip(step.iter()).map(|(z, d)| z + d).collect();
        let r = relative_residual(eqs, &trial);
        if !(r < best) {
            break;
        }
        best = r;
        point.copy_from_slice(&trial);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn variety(x: &[&str], y: &[&str], defs: &[&str]) -> VarietySpec {
        let vars: Vec<&str> = x.iter().chain(y).copied().collect();
        let defs = defs.iter().map(|d| MultiPoly::parse(&vars, d).unwrap()).collect();
        VarietySpec::new(x, y, defs).unwrap()
    }

    fn sorted_by_y(mut f: Fiber, k: usize) -> Vec<FiberPoint> {
        f.points
            .sort_by(|a, b| a.coords[k].re.partial_cmp(&b.coords[k].re).unwrap());
        f.points
    }

    #[test]
    fn parabola_vertical_fiber() {
        let v = variety(&["x"], &["y"], &["y^2 - x"]);
        let fiber = solve_fiber(&v, &PlaneChart::vertical(1, vec![c(4.0)]), 1e-10).unwrap();
        let pts = sorted_by_y(fiber, 1);
        assert_eq!(pts.len(), 2);
        // J = det [[-1, 2y], [1, 0]] = -2y
        for (pt, y) in pts.iter().zip([-2.0, 2.0]) {
            assert!((pt.coords[0] - c(4.0)).norm() < 1e-14);
            assert!((pt.coords[1] - c(y)).norm() < 1e-14);
            assert!((pt.jacobian - c(-2.0 * y)).norm() < 1e-13);
        }
    }

    #[test]
    fn parabola_slanted_jacobian() {
        // plane x = a y + b: J = -(2y - a)
        let v = variety(&["x"], &["y"], &["y^2 - x"]);
        let a = C64::new(0.3, -0.2);
        let chart = PlaneChart::new(vec![vec![a]], vec![C64::new(1.1, 0.4)]).unwrap();
        let fiber = solve_fiber(&v, &chart, 1e-10).unwrap();
        assert_eq!(fiber.degree(), 2);
        for pt in &fiber.points {
            let y = pt.coords[1];
            assert!((pt.jacobian + (y * 2.0 - a)).norm() < 1e-13);
        }
    }

    #[test]
    fn double_point_is_a_cluster() {
        let v = variety(&["x"], &["y"], &["y^2 - x"]);
        let fiber = solve_fiber(&v, &PlaneChart::vertical(1, vec![c(0.0)]), 1e-10).unwrap();
        assert_eq!(fiber.points.len(), 1);
        assert_eq!(fiber.points[0].cluster_size, 2);
        assert!(fiber.points[0].coords[1].norm() < 1e-12);
        assert_eq!(
            fiber.warnings,
            vec![FiberWarning::NearDiscriminant {
                point: 0,
                cluster_size: 2
            }]
        );
    }

    #[test]
    fn triangular_two_slot_fiber() {
        let v = variety(&["x"], &["y1", "y2"], &["y1^2 - x", "y2 - y1 - 1"]);
        let pts = sorted_by_y(
            solve_fiber(&v, &PlaneChart::vertical(2, vec![c(4.0)]), 1e-10).unwrap(),
            1,
        );
        assert_eq!(pts.len(), 2);
        assert!((pts[0].coords[1] - c(-2.0)).norm() < 1e-13 && (pts[0].coords[2] - c(-1.0)).norm() < 1e-13);
        assert!((pts[1].coords[1] - c(2.0)).norm() < 1e-13 && (pts[1].coords[2] - c(3.0)).norm() < 1e-13);
    }

    #[test]
    fn single_sheet_degree_drop() {
        // y = x on the plane x = y + b: parallel, no finite point
        let v = variety(&["x"], &["y"], &["y - x"]);
        let chart = PlaneChart::new(vec![vec![c(1.0)]], vec![c(0.5)]).unwrap();
        assert_eq!(
            solve_fiber(&v, &chart, 1e-10),
            Err(GeometryError::DegreeDrop { expected: 1, found: 0 })
        );
    }

    #[test]
    fn elliptic_curve_general_and_vertical() {
        let v = variety(&["x"], &["y"], &["y^2 - x^3 - 1"]);
        let chart = PlaneChart::new(vec![vec![c(1.0)]], vec![c(0.0)]).unwrap();
        let fiber = solve_fiber(&v, &chart, 1e-10).unwrap();
        assert_eq!(fiber.degree(), 3);
        assert_eq!(
            solve_fiber(&v, &PlaneChart::vertical(1, vec![c(2.0)]), 1e-10)
                .unwrap()
                .degree(),
            2
        );
    }

    #[test]
    fn coupled_pair_via_resultant() {
        // circle x^2 + y^2 = 5 against the hyperbola xy = 2
        let v = variety(&["x"], &["y"], &["x^2 + y^2 - 5"]);
        let section = vec![MultiPoly::parse(&v.vars(), "x*y - 2").unwrap()];
        let fiber = solve_section(&v, &section, SolveOptions::default()).unwrap();
        assert_eq!(fiber.degree(), 4);
        for (x, y) in [(1.0, 2.0), (2.0, 1.0), (-1.0, -2.0), (-2.0, -1.0)] {
            assert!(fiber
                .points
                .iter()
                .any(|p| (p.coords[0] - c(x)).norm() < 1e-12 && (p.coords[1] - c(y)).norm() < 1e-12));
        }
    }

    #[test]
    fn coupled_pair_with_shared_abscissa() {
        // x^2 + y^2 = 2 against x^2 = y^2: points (±1, ±1) share abscissas
        let v = variety(&["x"], &["y"], &["x^2 + y^2 - 2"]);
        let section = vec![MultiPoly::parse(&v.vars(), "x^2 - y^2").unwrap()];
        let fiber = solve_section(&v, &section, SolveOptions::default()).unwrap();
        assert_eq!(fiber.points.len(), 4);
        assert!(fiber.points.iter().all(|p| p.cluster_size == 1));
        for p in &fiber.points {
            assert!((p.coords[0].norm() - 1.0).abs() < 1e-12 && (p.coords[1].norm() - 1.0).abs() < 1e-12);
        }
    }
}
