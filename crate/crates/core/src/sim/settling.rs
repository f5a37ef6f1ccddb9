use super::Trace;

/// Absolute band on `|e1|` and `|e2|` that counts as settled.
///
/// Explicit Euler with a discontinuous law chatters with amplitude of order
/// gain times step; at `dt = 2e-4` this band sits above the chatter and far
/// below the smallest initial error of interest.
pub const SETTLING_BAND: f64 = 1e-2;

/// Time the errors must stay inside the band (s).
pub const SETTLING_HOLD: f64 = 0.05;

/// Earliest sample time `t` such that every sample in `[t, t + hold]` has
/// `|e1| <= eps1_tol` and `|e2| <= eps2_tol`. The window must be covered by
/// the trace; a run that enters the band too close to its end is not settled.
pub fn detect_settling(tr: &Trace, eps1_tol: f64, eps2_tol: f64, hold: f64) -> Option<f64> {
    let recs = &tr.records;
    let hold = hold.max(0.0);
    // Slack for sample times produced as t0 + k dt.
    let slack = 1e-9 * hold.max(1e-9);
    let n = recs.len();
    // run_end[i]: index of the last sample in the all-inside run starting at i.
    let mut run_end = vec![usize::MAX; n];
    let mut end = usize::MAX;
    for i in (0..n).rev() {
        let r = &recs[i];
        if r.e1.abs() <= eps1_tol && r.e2.abs() <= eps2_tol {
            if end == usize::MAX {
                end = i;
            }
            run_end[i] = end;
        } else {
            end = usize::MAX;
        }
    }
    (0..n).find_map(|i| {
        let j = run_end[i];
        (j != usize::MAX && recs[j].t >= recs[i].t + hold - slack).then_some(recs[i].t)
    })
}

/// [`detect_settling`] with the default band and hold.
pub fn settling_time(tr: &Trace) -> Option<f64> {
    detect_settling(tr, SETTLING_BAND, SETTLING_BAND, SETTLING_HOLD)
}
