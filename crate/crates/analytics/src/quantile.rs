//! Deciles by linear interpolation between order statistics.

/// The eleven deciles (0th = min, 5th = median, 10th = max) of `values`.
///
/// For decile `k` the position `h = (n - 1) * k / 10` is interpolated
/// between the order statistics `floor(h)` and `floor(h) + 1`.
pub fn deciles(values: &[f64]) -> Option<[f64; 11]> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len() - 1;
    let mut out = [0.0; 11];
    for (k, slot) in out.iter_mut().enumerate() {
        let h = last as f64 * k as f64 / 10.0;
        let lo = (h.floor() as usize).min(last);
        let hi = (lo + 1).min(last);
        let frac = h - lo as f64;
        *slot = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    }
    Some(out)
}
