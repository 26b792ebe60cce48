//! Sign-change detection on dense-output segments.
//!
//! Zeros of `w` and of `w'` are located by probing each accepted step at a
//! fixed grid of interior points and refining every bracketed sign change
//! with a safeguarded secant iteration on the interpolant. The step cap in
//! the driver keeps consecutive events far apart relative to the step
//! length, so the probe grid cannot straddle two roots of one component.

use super::dopri::Segment;

/// Probe count per segment (interior points plus both endpoints).
const PROBES: usize = 9;

/// Relative tolerance on the refined event radius.
pub(crate) const EVENT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EventKind {
    /// `w = 0` crossing.
    Zero,
    /// `w' = 0` crossing (interior critical radius).
    Critical,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RawEvent {
    pub kind: EventKind,
    pub r: f64,
    /// Interpolated state at the event radius.
    pub state: [f64; super::dopri::DIM],
}

/// Find all events inside one segment, ordered by radius.
pub(crate) fn scan_segment(seg: &Segment) -> Vec<RawEvent> {
    let mut found: Vec<RawEvent> = Vec::new();
    let mut w_vals = [0.0; PROBES];
    let mut v_vals = [0.0; PROBES];
    for (j, (w, v)) in w_vals.iter_mut().zip(v_vals.iter_mut()).enumerate() {
        let th = j as f64 / (PROBES - 1) as f64;
        let y = seg.eval_theta(th);
        *w = y[0];
        *v = y[1];
    }
    for (component, vals) in [(0usize, &w_vals), (1usize, &v_vals)] {
        let kind = if component == 0 { EventKind::Zero } else { EventKind::Critical };
        for j in 0..PROBES - 1 {
            let a = vals[j];
            let b = vals[j + 1];
            let th_a = j as f64 / (PROBES - 1) as f64;
            let th_b = (j + 1) as f64 / (PROBES - 1) as f64;
            if a == 0.0 {
                // Exact hit at a probe; only count it at the left endpoint of
                // the subinterval so each root is reported once. A hit at the
                // segment start belongs to the previous segment's endpoint
                // and is deduplicated by the caller.
                let r = seg.r0 + th_a * seg.h;
                found.push(RawEvent { kind, r, state: seg.eval_theta(th_a) });
            } else if a * b < 0.0 {
                let th = refine(seg, component, th_a, a, th_b, b);
                let r = seg.r0 + th * seg.h;
                found.push(RawEvent { kind, r, state: seg.eval_theta(th) });
            }
        }
        // Exact zero at the far endpoint: authoritative there.
        if vals[PROBES - 1] == 0.0 {
            found.push(RawEvent { kind, r: seg.r_hi(), state: seg.eval_theta(1.0) });
        }
    }
    found.sort_by(|x, y| x.r.total_cmp(&y.r));
    found
}

/// Safeguarded secant/bisection on one interpolant component over a bracket
/// with a strict sign change. Returns the refined theta.
fn refine(seg: &Segment, component: usize, mut ta: f64, mut fa: f64, mut tb: f64, mut fb: f64) -> f64 {
    debug_assert!(fa * fb < 0.0);
    // Tolerance in theta units equivalent to EVENT_REL_TOL on the radius.
    let r_scale = seg.r0.abs().max(seg.r_hi().abs());
    let tol = (EVENT_REL_TOL * r_scale / seg.h.abs()).max(4.0 * f64::EPSILON);
    for _ in 0..128 {
        if (tb - ta).abs() <= tol {
            break;
        }
        // Secant proposal, forced strictly inside the bracket.
        let mut tm = tb - fb * (tb - ta) / (fb - fa);
        let lo = ta.min(tb);
        let hi = ta.max(tb);
        let margin = 0.01 * (hi - lo);
        if !(tm > lo + margin && tm < hi - margin) {
            tm = 0.5 * (ta + tb);
        }
        let fm = seg.eval_component(tm, component);
        if fm == 0.0 {
            return tm;
        }
        if fa * fm < 0.0 {
            tb = tm;
            fb = fm;
        } else {
            ta = tm;
            fa = fm;
        }
    }
    // Midpoint of the final bracket.
    0.5 * (ta + tb)
}

#[cfg(test)]
mod tests {
    use super::super::dopri::{Segment, DIM};
    use super::*;

    /// Build a segment whose interpolant is exactly linear in theta for the
    /// first two components: w = w0 + (w1 - w0) theta, same for v. With
    /// k-values equal to the true constant slope the cubic terms vanish.
    fn linear_segment(w0: f64, w1: f64, v0: f64, v1: f64) -> Segment {
        let y0 = [w0, v0, 0.0, 0.0, 0.0];
        let y1 = [w1, v1, 0.0, 0.0, 0.0];
        let h = 2.0;
        let mut slope = [0.0; DIM];
        slope[0] = (w1 - w0) / h;
        slope[1] = (v1 - v0) / h;
        // All stage derivatives equal: dense output degenerates to a line
        // except for the cont5 term, which needs the D-weighted sum of equal
        // values; that sum is h * slope * sum(D) and sum(D) != 0, so instead
        // zero out cont5 by passing slope through ks uniformly and accepting
        // the small quartic wiggle: the wiggle vanishes at the endpoints and
        // keeps the sign structure for a strict crossing.
        let ks = [slope; 7];
        Segment::new(1.0, h, &y0, &y1, &ks)
    }

    #[test]
    fn finds_single_zero_crossing() {
        let seg = linear_segment(1.0, -1.0, -0.5, -0.5);
        let events = scan_segment(&seg);
        let zeros: Vec<_> = events.iter().filter(|e| e.kind == EventKind::Zero).collect();
        assert_eq!(zeros.len(), 1);
        // Root of the interpolant, verified by evaluating back.
        let w_at = seg.eval(zeros[0].r)[0];
        assert!(w_at.abs() < 1e-12, "residual {w_at}");
    }

    #[test]
    fn finds_zero_and_critical_together() {
        let seg = linear_segment(0.6, -0.4, -0.3, 0.7);
        let events = scan_segment(&seg);
        assert_eq!(events.len(), 2);
        assert!(events.iter().any(|e| e.kind == EventKind::Zero));
        assert!(events.iter().any(|e| e.kind == EventKind::Critical));
        for e in events {
            let y = seg.eval(e.r);
            let comp = if e.kind == EventKind::Zero { 0 } else { 1 };
            assert!(y[comp].abs() < 1e-12);
        }
    }

    #[test]
    fn no_events_on_signed_segment() {
        let seg = linear_segment(1.0, 0.2, -0.9, -0.1);
        assert!(scan_segment(&seg).is_empty());
    }

    #[test]
    fn refined_radius_is_tight() {
        let seg = linear_segment(3.0, -1.0, -1.0, -1.0);
        let events = scan_segment(&seg);
        assert_eq!(events.len(), 1);
        let r = events[0].r;
        // Bracket the root manually to the same tolerance.
        let t = seg.theta_of(r);
        let up = seg.eval_component(t + 1e-12, 0);
        let dn = seg.eval_component(t - 1e-12, 0);
        assert!(up * dn <= 0.0 || up.abs() < 1e-10 || dn.abs() < 1e-10);
    }
}
