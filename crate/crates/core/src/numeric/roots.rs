//! Simultaneous (Aberth–Ehrlich) root finding with a companion-matrix
//! fallback and cluster merging.

use nalgebra::DMatrix;

use super::{ensure_finite, NumericError, UniPoly, ARITHMETIC_TOL, C64};

/// A root together with the number of computed roots merged into it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    /// Residual tolerance; also drives the clustering radius.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: ARITHMETIC_TOL,
            max_iterations: 2000,
        }
    }
}

/// All roots of `p`, with nearby roots merged into clusters.
///
/// Two clusters of total size `m` merge when their centroids are closer than
/// `(1 + |z|) * tol^(1/m)`; a merged cluster reports the centroid and the
/// summed multiplicity, so multiplicities always add up to the degree.
pub fn poly_roots(p: &UniPoly, tol: f64) -> Result<Vec<Root>, NumericError> {
    poly_roots_with(
        p,
        RootOptions {
            tol,
            ..RootOptions::default()
        },
    )
}

pub fn poly_roots_with(p: &UniPoly, opts: RootOptions) -> Result<Vec<Root>, NumericError> {
    if !(opts.tol > 0.0) {
        return Err(NumericError::InvalidArgument("tol must be positive".into()));
    }
    if p.is_zero() {
        return Err(NumericError::ZeroPolynomial);
    }
    ensure_finite(p.coeffs(), "polynomial coefficients")?;
    if p.degree() < 1 {
        return Err(NumericError::InvalidArgument("root finding needs degree >= 1".into()));
    }
    let monic = p.monic();
    // exact zero roots are split off
    let zeros = monic.coeffs().iter().take_while(|c| **c == C64::new(0.0, 0.0)).count();
    let deflated = UniPoly::new(monic.coeffs()[zeros..].to_vec());
    let mut raw = if deflated.degree() < 1 {
        Vec::new()
    } else {
        match aberth(&deflated, opts.max_iterations) {
            Some(r) if worst_residual(&deflated, &r) <= opts.tol => r,
            _ => companion_roots(&deflated)?,
        }
    };
    raw.extend(std::iter::repeat_n(C64::new(0.0, 0.0), zeros));
    let worst = worst_residual(&monic, &raw);
    if !(worst <= opts.tol) {
        return Err(NumericError::NonConvergence { worst_residual: worst });
    }
    let mut clusters = merge_clusters(&raw, opts.tol);
    for root in clusters.iter_mut().filter(|r| r.multiplicity > 1) {
        root.value = refine_cluster(&monic, root.value, root.multiplicity);
    }
    // cluster centroids are validated through their members above
    let worst = clusters
        .iter()
        .filter(|r| r.multiplicity == 1)
        .map(|r| relative_residual(&monic, r.value))
        .fold(0.0, f64::max);
    if !(worst <= opts.tol) {
        return Err(NumericError::NonConvergence { worst_residual: worst });
    }
    Ok(clusters)
}

fn relative_residual(p: &UniPoly, z: C64) -> f64 {
    let scale = p.magnitude_at(z);
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

fn worst_residual(p: &UniPoly, roots: &[C64]) -> f64 {
    roots.iter().map(|&z| relative_residual(p, z)).fold(0.0, f64::max)
}

fn aberth(p: &UniPoly, max_iterations: usize) -> Option<Vec<C64>> {
    let n = p.degree() as usize;
    let coeffs = p.coeffs();
    if n == 1 {
        return Some(vec![-coeffs[0] / coeffs[1]]);
    }
    let dp = p.derivative();
    let center = -coeffs[n - 1] / (n as f64);
    // Upper bound on root moduli about the centroid (Fujiwara-type).
    let shifted = p.compose_affine(center, C64::new(1.0, 0.0));
    let radius = (0..n)
        .map(|k| {
            let c = shifted.coeff(k).norm();
            if c == 0.0 {
                0.0
            } else {
                c.powf(1.0 / (n - k) as f64)
            }
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64) / (n as f64) + 0.4;
            center + C64::from_polar(radius, theta)
        })
        .collect();
    let floor = 4.0 * f64::EPSILON * (radius + center.norm());
    for _ in 0..max_iterations {
        let mut max_step = 0.0f64;
        let mut converged_all = true;
        for k in 0..n {
            let pk = p.eval(z[k]);
            if pk == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pk / dp.eval(z[k]);
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d == C64::new(0.0, 0.0) {
                        C64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !super::is_finite(step) {
                return None;
            }
            z[k] -= step;
            let s = step.norm();
            max_step = max_step.max(s);
            if s > 4.0 * f64::EPSILON * z[k].norm() && s > floor {
                converged_all = false;
            }
        }
        if converged_all || max_step == 0.0 {
            return Some(z);
        }
    }
    None
}

/// Newton on `p^(m-1)`, which has a simple root at an `m`-fold root of `p`.
fn refine_cluster(p: &UniPoly, z0: C64, m: usize) -> C64 {
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let dd = d.derivative();
    let mut z = z0;
    for _ in 0..8 {
        let den = dd.eval(z);
        if den == C64::new(0.0, 0.0) {
            break;
        }
        let step = d.eval(z) / den;
        if !super::is_finite(step) {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    // Keep the centroid if Newton wandered off (a genuine cluster of
    // distinct roots rather than a multiple root).
    if (z - z0).norm() <= (1.0 + z0.norm()) * 1e-3 {
        z
    } else {
        z0
    }
}

fn companion_roots(p: &UniPoly) -> Result<Vec<C64>, NumericError> {
    let n = p.degree() as usize;
    let c = p.coeffs();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(NumericError::NonConvergence {
        worst_residual: f64::INFINITY,
    })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

fn merge_clusters(roots: &[C64], tol: f64) -> Vec<Root> {
    let mut clusters: Vec<(C64, usize)> = roots.iter().map(|&z| (z, 1)).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (zi, mi) = clusters[i];
                let (zj, mj) = clusters[j];
                let m = (mi + mj) as f64;
                let centroid = (zi * mi as f64 + zj * mj as f64) / m;
                let radius = (1.0 + centroid.norm()) * tol.powf(1.0 / m);
                let d = (zi - zj).norm();
                if d < radius && best.is_none_or(|(_, _, bd)| d / radius < bd) {
                    best = Some((i, j, d / radius));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                let (zi, mi) = clusters[i];
                let (zj, mj) = clusters.remove(j);
                let m = mi + mj;
                clusters[i] = ((zi * mi as f64 + zj * mj as f64) / m as f64, m);
            }
            None => break,
        }
    }
    clusters
        .into_iter()
        .map(|(value, multiplicity)| Root { value, multiplicity })
        .collect()
}
