//! Derivatives and Laurent coefficients from samples on a circle, via the
//! trapezoid rule applied to Cauchy's integral formula.

use super::{is_finite, NumericError, C64};

/// The `nodes` equispaced points `center + radius * e^{2πik/nodes}`.
pub fn ring_points(center: C64, radius: f64, nodes: usize) -> Vec<C64> {
    (0..nodes)
        .map(|k| center + C64::from_polar(radius, std::f64::consts::TAU * k as f64 / nodes as f64))
        .collect()
}

/// Laurent coefficient `c_k` of `f(z) = Σ c_k (z - center)^k` from samples
/// at [`ring_points`]. Negative `k` picks up principal parts.
pub fn ring_laurent(values: &[C64], radius: f64, k: i32) -> C64 {
    let n = values.len();
    let sum: C64 = values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let theta = std::f64::consts::TAU * j as f64 / n as f64;
            v * C64::from_polar(1.0, -(k as f64) * theta)
        })
        .sum();
    sum / (n as f64) / radius.powi(k)
}

/// `order`-th derivative at the ring center from samples at [`ring_points`].
pub fn ring_derivative(values: &[C64], radius: f64, order: u32) -> C64 {
    let factorial: f64 = (1..=order).map(|k| k as f64).product();
    ring_laurent(values, radius, order as i32) * factorial
}

/// `f^(order)(z0)` by the `nodes`-point trapezoid rule on `|z - z0| = radius`.
///
/// The error decays geometrically in `nodes` when `f` is holomorphic on a
/// disc strictly larger than the ring.
pub fn cauchy_derivative<F, E>(mut f: F, z0: C64, radius: f64, order: u32, nodes: usize) -> Result<C64, E>
where
    F: FnMut(C64) -> Result<C64, E>,
    E: From<NumericError>,
{
    if nodes < 16 {
        return Err(NumericError::InvalidArgument(format!("need at least 16 nodes, got {nodes}")).into());
    }
    if order < 1 {
        return Err(NumericError::InvalidArgument("derivative order must be >= 1".into()).into());
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(NumericError::InvalidArgument("radius must be positive".into()).into());
    }
    let mut values = Vec::with_capacity(nodes);
    for z in ring_points(z0, radius, nodes) {
        let v = f(z)?;
        if !is_finite(v) {
            return Err(NumericError::NonFinite {
                context: "cauchy_derivative evaluator",
            }
            .into());
        }
        values.push(v);
    }
    Ok(ring_derivative(&values, radius, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ok(f: impl Fn(C64) -> C64) -> impl FnMut(C64) -> Result<C64, NumericError> {
        move |z| Ok(f(z))
    }

    #[test]
    fn derivative_of_square() {
        let d = cauchy_derivative(ok(|z| z * z), c(1.0), 0.5, 1, 32).unwrap();
        assert!((d - c(2.0)).norm() < 1e-13);
    }

    #[test]
    fn derivative_of_exp() {
        let d = cauchy_derivative(ok(|z: C64| z.exp()), c(0.0), 1.0, 1, 32).unwrap();
        assert!((d - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn derivative_of_simple_pole_outside_disc() {
        // f(z) = 1/(z-2): f'(0) = -1/4.
        let d = cauchy_derivative(ok(|z: C64| (z - c(2.0)).inv()), c(0.0), 1.0, 1, 64).unwrap();
        assert!((d - c(-0.25)).norm() < 1e-14);
    }

    #[test]
    fn rejects_too_few_nodes() {
        let r = cauchy_derivative(ok(|z| z), c(0.0), 1.0, 1, 8);
        assert!(matches!(r, Err(NumericError::InvalidArgument(_))));
    }

    #[test]
    fn laurent_picks_up_residue() {
        let pts = ring_points(c(0.0), 0.5, 32);
        let vals: Vec<C64> = pts.iter().map(|&z| C64::new(3.0, 0.0) / z + z).collect();
        assert!((ring_laurent(&vals, 0.5, -1) - c(3.0)).norm() < 1e-14);
        assert!((ring_laurent(&vals, 0.5, 1) - c(1.0)).norm() < 1e-14);
        assert!(ring_laurent(&vals, 0.5, -2).norm() < 1e-14);
    }
}
