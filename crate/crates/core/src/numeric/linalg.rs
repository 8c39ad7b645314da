use nalgebra::{DMatrix, DVector};

use super::{NumericError, C64};

/// Least-squares solution of `a x ≈ b` after column equilibration.
///
/// Returns the solution and the 2-norm condition number of the equilibrated
/// matrix.
pub(crate) fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<(DVector<C64>, f64), NumericError> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(NumericError::InsufficientData(format!(
            "{rows} equations for {cols} unknowns"
        )));
    }
    let mut scaled = a.clone();
    let mut col_scale = vec![1.0; cols];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let norm = scaled.column(j).norm();
        if norm > 0.0 {
            *scale = norm;
            scaled.column_mut(j).unscale_mut(norm);
        }
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let eps = smax * f64::EPSILON * rows.max(cols) as f64;
    let mut x = svd
        .solve(b, eps)
        .map_err(|e| NumericError::InvalidArgument(e.to_string()))?;
    for j in 0..cols {
        x[j] /= col_scale[j];
    }
    Ok((x, condition))
}
