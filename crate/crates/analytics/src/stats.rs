//! Window statistics used as regression features.

/// Number of statistics extracted per input window.
pub const FEATURES_PER_INPUT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub last: f64,
}

impl WindowStats {
    pub fn compute(values: &[f64]) -> Option<Self> {
        let last = *values.last()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(WindowStats {
            mean,
            std: var.sqrt(),
            min,
            max,
            last,
        })
    }

    pub fn as_array(&self) -> [f64; FEATURES_PER_INPUT] {
        [self.mean, self.std, self.min, self.max, self.last]
    }
}

/// Concatenates `(mean, std, min, max, last)` of each window in order.
/// Returns `None` if any window is empty or produces a non-finite value.
pub fn feature_vector<W: AsRef<[f64]>>(windows: &[W]) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(windows.len() * FEATURES_PER_INPUT);
    for w in windows {
        out.extend(WindowStats::compute(w.as_ref())?.as_array());
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}
