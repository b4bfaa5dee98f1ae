use num_complex::Complex64;

use crate::{Result, SpecfunError};

/// Relative size below which a term counts as negligible.
pub const SERIES_EPS: f64 = 1e-16;
/// Hard cap on the number of summed terms.
pub const MAX_TERMS: usize = 10_000;

/// Sums `term(0) + term(1) + ...` where each term is produced from the previous
/// one by `next(k, prev)`. Stops after three consecutive negligible terms.
pub(crate) fn sum_terms<F>(first: Complex64, mut next: F) -> Result<Complex64>
where
    F: FnMut(usize, Complex64) -> Complex64,
{
    let mut sum = first;
    let mut term = first;
    let mut small = 0;
    for k in 1..MAX_TERMS {
        term = next(k, term);
        sum += term;
        if term.norm() < SERIES_EPS * sum.norm() || term == Complex64::new(0.0, 0.0) {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(SpecfunError::Convergence { terms: MAX_TERMS })
}
