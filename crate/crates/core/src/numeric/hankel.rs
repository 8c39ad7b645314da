//! Linear-recurrence fits on moment sequences (shifted Hankel systems).
//!
//! A sequence `u_0, u_1, …` satisfies a recurrence of order `d` when
//! `u_{k+d} + a_1 u_{k+d-1} + … + a_d u_k = 0` for every admissible `k`.
//! Several sequences sharing the same recurrence can be stacked; each
//! contributes its own block of rows.

use nalgebra::{DMatrix, DVector};

use super::linalg::lstsq;
use super::{ensure_finite, NumericError, C64, FITTING_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeChoice {
    Fixed(usize),
    /// Smallest degree up to `max` whose residual falls below the tolerance.
    Auto {
        max: usize,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct HankelOptions {
    pub tol: f64,
    /// Fits whose (column-equilibrated) condition number exceeds this are rejected.
    pub condition_cap: f64,
}

impl Default for HankelOptions {
    fn default() -> Self {
        HankelOptions {
            tol: FITTING_TOL,
            condition_cap: 1e12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HankelFit {
    /// `(a_1, …, a_d)`.
    pub coeffs: Vec<C64>,
    pub condition: f64,
    /// Relative residual `‖H a + r‖ / ‖u‖`.
    pub residual: f64,
}

impl HankelFit {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }
}

/// Fits a single moment sequence.
pub fn hankel_fit(moments: &[C64], degree: DegreeChoice, tol: f64) -> Result<HankelFit, NumericError> {
    fit_recurrence(
        &[moments.to_vec()],
        degree,
        HankelOptions {
            tol,
            ..HankelOptions::default()
        },
    )
}

/// Fits one recurrence shared by all `sequences`.
pub fn fit_recurrence(
    sequences: &[Vec<C64>],
    degree: DegreeChoice,
    opts: HankelOptions,
) -> Result<HankelFit, NumericError> {
    if !(opts.tol > 0.0) {
        return Err(NumericError::InvalidArgument("tol must be positive".into()));
    }
    for s in sequences {
        ensure_finite(s, "moment sequence")?;
    }
    let norm = sequences.iter().flatten().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
    let max_degree = match degree {
        DegreeChoice::Fixed(d) => d,
        DegreeChoice::Auto { max } => max,
    };
    if norm == 0.0 {
        return Err(NumericError::DegreeUndetectable {
            max_degree,
            zero_data: true,
        });
    }
    match degree {
        DegreeChoice::Fixed(0) => Err(NumericError::InvalidArgument("degree must be >= 1".into())),
        DegreeChoice::Fixed(d) => {
            let fit = solve(sequences, d, norm)?;
            check_condition(fit, opts)
        }
        DegreeChoice::Auto { max } => {
            for d in 1..=max {
                if row_count(sequences, d) < d + 1 {
                    break;
                }
                let fit = solve(sequences, d, norm)?;
                if fit.residual < opts.tol {
                    return check_condition(fit, opts);
                }
            }
            Err(NumericError::DegreeUndetectable {
                max_degree: max,
                zero_data: false,
            })
        }
    }
}

fn check_condition(fit: HankelFit, opts: HankelOptions) -> Result<HankelFit, NumericError> {
    if fit.condition > opts.condition_cap {
        Err(NumericError::IllConditioned {
            condition: fit.condition,
            cap: opts.condition_cap,
        })
    } else {
        Ok(fit)
    }
}

fn row_count(sequences: &[Vec<C64>], d: usize) -> usize {
    sequences.iter().map(|s| s.len().saturating_sub(d)).sum()
}

fn solve(sequences: &[Vec<C64>], d: usize, norm: f64) -> Result<HankelFit, NumericError> {
    let rows = row_count(sequences, d);
    if rows < d {
        return Err(NumericError::InsufficientData(format!(
            "recurrence of order {d} needs at least {d} rows, have {rows}"
        )));
    }
    let mut a = DMatrix::<C64>::zeros(rows, d);
    let mut b = DVector::<C64>::zeros(rows);
    let mut r = 0;
    for s in sequences {
        for k in 0..s.len().saturating_sub(d) {
            for j in 1..=d {
                a[(r, j - 1)] = s[k + d - j];
            }
            b[r] = -s[k + d];
            r += 1;
        }
    }
    let (x, condition) = lstsq(&a, &b)?;
    let residual = (&a * &x - &b).norm() / norm;
    Ok(HankelFit {
        coeffs: x.iter().copied().collect(),
        condition,
        residual,
    })
}
