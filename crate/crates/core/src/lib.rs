//! Algebraic traces, Abel–Radon transforms and inverse reconstruction for
//! rational residue data on complete intersections.
//!
//! The pipeline runs forward from [`geometry::ResidueData`] through fibers
//! and punctual residues to trace tables and chart coefficients, and
//! backward from trace moments to minimal polynomials and a numerator.

pub mod geometry;
pub mod numeric;
pub mod radon;
pub mod reconstruct;
pub mod residue;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
