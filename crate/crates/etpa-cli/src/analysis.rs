//! Shape tests on scan curves.

/// Largest topographic prominence among local maxima other than the global
/// one, as a fraction of the global maximum. Zero for a single-peaked curve.
pub fn secondary_prominence(values: &[f64]) -> f64 {
    let n = values.len();
    let Some(top) = argmax(values) else { return 0.0 };
    let peak = values[top];
    if !(peak > 0.0) {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        if i == top {
            continue;
        }
        let left = i == 0 || values[i - 1] < values[i];
        let right = i + 1 == n || values[i + 1] <= values[i];
        if !(left && right) {
            continue;
        }
        // walk toward the global peak: the deepest dip before a higher point
        let step: isize = if top > i { 1 } else { -1 };
        let mut j = i as isize;
        let mut dip = values[i];
        while j >= 0 && (j as usize) < n && values[j as usize] <= values[i] {
            dip = dip.min(values[j as usize]);
            j += step;
        }
        worst = worst.max((values[i] - dip) / peak);
    }
    worst
}

/// Single-peaked up to secondary bumps with prominence below `tol` of the maximum.
pub fn is_single_peaked(values: &[f64], tol: f64) -> bool {
    secondary_prominence(values) < tol
}

pub fn argmax(values: &[f64]) -> Option<usize> {
    values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)
}

/// Indices sorted by decreasing value.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
    idx
}

/// min/max of a curve.
pub fn flatness(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    min / max
}

/// Largest |a/b − 1| over the `top` largest entries of `reference`.
pub fn top_relative_error(reference: &[f64], other: &[f64], top: usize) -> f64 {
    ranking(reference).iter().take(top).map(|&i| (other[i] / reference[i] - 1.0).abs()).fold(0.0, f64::max)
}
