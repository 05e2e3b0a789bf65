use super::path::PiecewisePath;
use crate::env::NodePath;
use crate::kprocess::Trajectory;

/// θ_{x|_k}^n: the jumps of θ_{k+1}^n made while the level-k trajectory sits
/// at `state`, re-timed by the local time L_k(state, ·).
///
/// `theta_upper` lives on the time axis of `parent`; jumps past the
/// trajectory horizon are ignored.
pub fn decompose_by_state(theta_upper: &PiecewisePath, parent: &Trajectory, state: &NodePath) -> PiecewisePath {
    let segs = parent.segments();
    let mut local = 0.0;
    let mut seg = 0usize;
    let mut times: Vec<f64> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for (s, size) in theta_upper.jumps() {
        if s >= parent.horizon() {
            break;
        }
        while seg < segs.len() && segs[seg].end <= s {
            if segs[seg].state.matches(state) && segs[seg].state.depth() == state.depth() {
                local += segs[seg].end - segs[seg].start;
            }
            seg += 1;
        }
        if seg == segs.len() {
            break;
        }
        let cur = &segs[seg];
        if !(cur.start <= s && cur.state.matches(state) && cur.state.depth() == state.depth()) {
            continue;
        }
        let at = local + (s - cur.start);
        total += size;
        if times.last() == Some(&at) {
            *cum.last_mut().unwrap() = total;
        } else {
            times.push(at);
            cum.push(total);
        }
    }
    PiecewisePath::from_cumulative(times, cum, f64::INFINITY)
}
