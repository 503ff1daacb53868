//! Execution helpers: data-parallel cell loops with a sequential fallback.
//!
//! With the `parallel` feature (default) large per-cell maps and
//! max-reductions run on rayon; small grids and all float *sums* stay
//! sequential so outputs are bit-identical regardless of thread count
//! (`map` preserves order, `max` is exact under reassociation, sums are
//! not parallelized at all).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Grids below this size are not worth the fork/join overhead.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 8192;

/// Ordered map `0..n -> T`, parallel for large `n` when enabled.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Compensated (Kahan) sequential sum: deterministic and accurate to a few
/// ulps of the running total regardless of the number of terms.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let term = v - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum
}

/// Maximum of `f(i)` over `0..n` (`NEG_INFINITY` for empty ranges).
///
/// `f` must return finite values or NaN; NaN inputs are ignored by `f64::max`,
/// so callers that care run a separate finiteness scan.
pub(crate) fn max_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n)
                .into_par_iter()
                .map(f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
    }
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}
