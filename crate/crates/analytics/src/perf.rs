//! Derived performance metrics from raw counter windows.

/// Why a derived metric produced no value this interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suppressed {
    /// Not enough readings to form a delta.
    InsufficientData,
    /// The denominator (or elapsed time) did not advance.
    ZeroDenominator,
    /// A counter went backwards inside the window.
    CounterReset,
}

/// A window of `(timestamp_ns, counter)` samples, oldest first.
pub type CounterWindow<'a> = &'a [(u64, i64)];

fn delta(window: CounterWindow<'_>) -> Result<i64, Suppressed> {
    if window.len() < 2 {
        return Err(Suppressed::InsufficientData);
    }
    if window.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Suppressed::CounterReset);
    }
    Ok(window[window.len() - 1].1 - window[0].1)
}

/// Δnumerator / Δdenominator, each delta taken last-minus-first over its
/// window. CPI is `ratio(cycles, instructions)`, the vectorization ratio is
/// `ratio(vector_instructions, instructions)`.
pub fn ratio(numerator: CounterWindow<'_>, denominator: CounterWindow<'_>) -> Result<f64, Suppressed> {
    let num = delta(numerator)?;
    let den = delta(denominator)?;
    if den == 0 {
        return Err(Suppressed::ZeroDenominator);
    }
    Ok(num as f64 / den as f64)
}

/// Δcounter per second over the window (e.g. FLOPS from a flop counter).
pub fn rate(counter: CounterWindow<'_>) -> Result<f64, Suppressed> {
    let d = delta(counter)?;
    let elapsed = counter[counter.len() - 1].0 - counter[0].0;
    if elapsed == 0 {
        return Err(Suppressed::ZeroDenominator);
    }
    Ok(d as f64 * 1e9 / elapsed as f64)
}
