use nalgebra::{DMatrix, DVector};

use super::linalg::lstsq;
use super::{ensure_finite, NumericError, UniPoly, C64};

/// Result of [`poly_interpolate`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    pub poly: UniPoly,
    /// Relative residual `‖V c − v‖ / ‖v‖`.
    pub residual: f64,
}

/// Least-squares polynomial of degree at most `deg_bound` through `samples`.
///
/// The fit is done in the normalized variable `t = (x − c)/s` (centroid and
/// spread of the sample points) and mapped back, which keeps the system well
/// conditioned for sample sets far from the origin. Coefficients below
/// `tol · max|coeff|` are snapped to zero.
pub fn poly_interpolate(samples: &[(C64, C64)], deg_bound: usize, tol: f64) -> Result<PolyFit, NumericError> {
    if !(tol > 0.0) {
        return Err(NumericError::InvalidArgument("tol must be positive".into()));
    }
    let points: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let values: Vec<C64> = samples.iter().map(|s| s.1).collect();
    ensure_finite(&points, "interpolation points")?;
    ensure_finite(&values, "interpolation values")?;
    let distinct = count_distinct(&points);
    if distinct < deg_bound + 1 {
        return Err(NumericError::InsufficientData(format!(
            "degree {deg_bound} needs {} distinct points, have {distinct}",
            deg_bound + 1
        )));
    }
    let vnorm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if vnorm == 0.0 {
        return Ok(PolyFit {
            poly: UniPoly::zero(),
            residual: 0.0,
        });
    }
    let center = points.iter().sum::<C64>() / points.len() as f64;
    let spread = points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let n = samples.len();
    let mut v = DMatrix::<C64>::zeros(n, deg_bound + 1);
    for (i, p) in points.iter().enumerate() {
        let t = (p - center) / spread;
        let mut pw = C64::new(1.0, 0.0);
        for k in 0..=deg_bound {
            v[(i, k)] = pw;
            pw *= t;
        }
    }
    let rhs = DVector::from_vec(values);
    let (c, _) = lstsq(&v, &rhs)?;
    let residual = (&v * &c - &rhs).norm() / vnorm;
    if residual > tol {
        return Err(NumericError::OverdeterminedMismatch { residual, tol });
    }
    let in_t = UniPoly::new(c.iter().copied().collect());
    // p(x) = q((x - c)/s) = q(-c/s + x/s)
    let in_x = in_t.compose_affine(-center / spread, C64::new(1.0 / spread, 0.0));
    let max = in_x.max_abs_coeff();
    let snapped = UniPoly::new(
        in_x.coeffs()
            .iter()
            .map(|&a| if a.norm() <= tol * max { C64::new(0.0, 0.0) } else { a })
            .collect(),
    );
    Ok(PolyFit {
        poly: snapped,
        residual,
    })
}

fn count_distinct(points: &[C64]) -> usize {
    let mut distinct: Vec<C64> = Vec::new();
    for &p in points {
        let scale = 1.0 + p.norm();
        if !distinct.iter().any(|q| (q - p).norm() <= 1e-14 * scale) {
            distinct.push(p);
        }
    }
    distinct.len()
}
