/// Wilson score interval for `n_s` successes out of `n_s + n_f` trials.
///
/// With no trials the interval is the whole of `[0, 1]`. The result is
/// clamped so that it always contains the empirical rate, which the formula
/// guarantees in exact arithmetic but not always in floating point.
pub fn wilson_bounds(n_s: u64, n_f: u64, z: f64) -> (f64, f64) {
    let n = n_s + n_f;
    if n == 0 {
        return (0.0, 1.0);
    }
    let (ns, nf, nn) = (n_s as f64, n_f as f64, n as f64);
    let z2 = z * z;
    let center = (ns + 0.5 * z2) / (nn + z2);
    let half = z / (nn + z2) * (ns * nf / nn + 0.25 * z2).sqrt();
    let rate = ns / nn;
    let low = (center - half).clamp(0.0, rate);
    let up = (center + half).clamp(rate, 1.0);
    (low, up)
}
