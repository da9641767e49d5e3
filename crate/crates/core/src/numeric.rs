//! Shared floating-point accumulation.

/// Above this length sums switch to Neumaier-compensated accumulation.
pub const COMPENSATED_THRESHOLD: usize = 32;

/// Sums `values` left to right.
///
/// Short inputs use plain summation; longer ones use Neumaier's compensated
/// variant. Every module that needs a harmonic or load total goes through
/// here so the matching, allocation and oracle paths round identically.
pub fn sum<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: ExactSizeIterator,
{
    let iter = values.into_iter();
    if iter.len() <= COMPENSATED_THRESHOLD {
        return iter.fold(0.0, |acc, x| acc + x);
    }
    let mut total = 0.0f64;
    let mut carry = 0.0f64;
    for x in iter {
        let t = total + x;
        if total.abs() >= x.abs() {
            carry += (total - t) + x;
        } else {
            carry += (x - t) + total;
        }
        total = t;
    }
    total + carry
}

/// `Σ 1/x` over `values`.
pub fn harmonic_sum(values: &[f64]) -> f64 {
    sum(values.iter().map(|x| 1.0 / x))
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
