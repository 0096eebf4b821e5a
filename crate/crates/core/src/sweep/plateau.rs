/// Relative tolerance used when none is given.
pub const DEFAULT_REL_TOL: f64 = 0.05;

/// Smallest grid `k` from which every value stays within tolerance of the
/// series' final value.
///
/// The tolerance is `max(rel_tol * |final|, abs_floor)`; pass a 1 s floor
/// for time metrics and 0 otherwise. A plateau needs at least two points, so
/// a series that only settles at its last point has none. Series shorter
/// than three points have none either. `series` is `(k, value)` in
/// ascending `k`.
pub fn detect_plateau(series: &[(f64, f64)], rel_tol: f64, abs_floor: f64) -> Option<f64> {
    if series.len() < 3 {
        return None;
    }
    let last = series.len() - 1;
    let target = series[last].1;
    let tol = (rel_tol * target.abs()).max(abs_floor);
    let mut start = last;
    while start > 0 && (series[start - 1].1 - target).abs() <= tol {
        start -= 1;
    }
    (start < last).then(|| series[start].0)
}
