//! Dormand-Prince 5(4) step kernel and quartic dense interpolant.
//!
//! The state vector is `[w, w', I1, I2, I3]` where the `I` components carry
//! the weighted integrals `int_0^r |w|^q t^{n-1} dt` for `q = p+1, p` and
//! the signed density `|w|^{p-1} w`. Carrying them as extra components gives
//! them the same order of accuracy as the profile itself and makes energy
//! and flux identities available without re-quadrature.

use crate::params::ProblemParams;

pub(crate) const DIM: usize = 5;
pub(crate) type State = [f64; DIM];

/// Right-hand side of the radial system
/// `w'' + (n-1)/r w' + |w|^{p-1} w = 0` plus the three carried integrals.
pub(crate) struct Rhs {
    nf: f64,
    p: f64,
    n_minus_1: i32,
}

impl Rhs {
    pub fn new(params: &ProblemParams) -> Self {
        Rhs {
            nf: params.nf(),
            p: params.p(),
            n_minus_1: params.n() as i32 - 1,
        }
    }

    /// One derivative evaluation. `r > 0` is required (the axis is handled
    /// by the series launch, never by the stepper).
    #[inline]
    pub fn eval(&self, r: f64, y: &State) -> State {
        let w = y[0];
        let v = y[1];
        // One transcendental per call: q = |w|^{p-1}.
        let q = w.abs().powf(self.p - 1.0);
        let nl = q * w; // |w|^{p-1} w
        let rn1 = r.powi(self.n_minus_1);
        [
            v,
            -(self.nf - 1.0) / r * v - nl,
            q * w * w * rn1,
            q * w.abs() * rn1,
            nl * rn1,
        ]
    }
}

/// Weighted RMS norm with per-component scales.
#[inline]
pub(crate) fn wrms(e: &State, scale: &State) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        let q = e[i] / scale[i];
        s += q * q;
    }
    (s / DIM as f64).sqrt()
}

pub(crate) struct StepOutput {
    pub y1: State,
    /// All seven stage derivatives; `ks[6]` is `f(r+h, y1)` (FSAL).
    pub ks: [State; 7],
    /// Weighted RMS of the embedded error estimate; accept when <= 1.
    pub err: f64,
}

/// One 5(4) step from `(r, y)` with stage-1 derivative `k1` already known.
/// Costs six derivative evaluations.
pub(crate) fn rk_step(
    rhs: &Rhs,
    r: f64,
    h: f64,
    y: &State,
    k1: &State,
    abs_tol: f64,
    rel_tol: f64,
) -> StepOutput {
    const A21: f64 = 0.2;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const A71: f64 = 35.0 / 384.0;
    const A73: f64 = 500.0 / 1113.0;
    const A74: f64 = 125.0 / 192.0;
    const A75: f64 = -2187.0 / 6784.0;
    const A76: f64 = 11.0 / 84.0;
    const C2: f64 = 0.2;
    const C3: f64 = 0.3;
    const C4: f64 = 0.8;
    const C5: f64 = 8.0 / 9.0;
    // Embedded 4th-order error coefficients (b - b_hat).
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let stage = |coeffs: &[(f64, &State)], _c: f64| -> State {
        let mut out = *y;
        for item in out.iter_mut().enumerate() {
            let (i, slot) = item;
            let mut acc = 0.0;
            for (a, k) in coeffs {
                acc += a * k[i];
            }
            *slot += h * acc;
        }
        out
    };

    let k2 = rhs.eval(r + C2 * h, &stage(&[(A21, k1)], C2));
    let k3 = rhs.eval(r + C3 * h, &stage(&[(A31, k1), (A32, &k2)], C3));
    let k4 = rhs.eval(r + C4 * h, &stage(&[(A41, k1), (A42, &k2), (A43, &k3)], C4));
    let k5 = rhs.eval(
        r + C5 * h,
        &stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], C5),
    );
    let k6 = rhs.eval(
        r + h,
        &stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], 1.0),
    );
    let y1 = stage(
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        1.0,
    );
    let k7 = rhs.eval(r + h, &y1);

    let mut err_vec = [0.0; DIM];
    let mut scale = [0.0; DIM];
    for i in 0..DIM {
        err_vec[i] =
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        scale[i] = abs_tol + rel_tol * y[i].abs().max(y1[i].abs());
    }
    let err = wrms(&err_vec, &scale);

    StepOutput { y1, ks: [*k1, k2, k3, k4, k5, k6, k7], err }
}

/// Quartic dense-output coefficients for one accepted step.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub r0: f64,
    pub h: f64,
    cont: [State; 5],
}

impl Segment {
    pub fn new(r0: f64, h: f64, y0: &State, y1: &State, ks: &[State; 7]) -> Self {
        const D1: f64 = -12_715_105_075.0 / 11_282_082_432.0;
        const D3: f64 = 87_487_479_700.0 / 32_700_410_799.0;
        const D4: f64 = -10_690_763_975.0 / 1_880_347_072.0;
        const D5: f64 = 701_980_252_875.0 / 199_316_789_632.0;
        const D6: f64 = -1_453_857_185.0 / 822_651_844.0;
        const D7: f64 = 69_997_945.0 / 29_380_423.0;
        let mut cont = [[0.0; DIM]; 5];
        for i in 0..DIM {
            let ydiff = y1[i] - y0[i];
            let bspl = h * ks[0][i] - ydiff;
            cont[0][i] = y0[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * ks[6][i] - bspl;
            cont[4][i] = h
                * (D1 * ks[0][i]
                    + D3 * ks[2][i]
                    + D4 * ks[3][i]
                    + D5 * ks[4][i]
                    + D6 * ks[5][i]
                    + D7 * ks[6][i]);
        }
        Segment { r0, h, cont }
    }

    pub fn r_hi(&self) -> f64 {
        self.r0 + self.h
    }

    pub fn theta_of(&self, r: f64) -> f64 {
        (r - self.r0) / self.h
    }

    /// Interpolant value at `theta` in [0, 1]. Exact at both endpoints.
    #[inline]
    pub fn eval_theta(&self, th: f64) -> State {
        let th1 = 1.0 - th;
        let c = &self.cont;
        let mut out = [0.0; DIM];
        for i in 0..DIM {
            out[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        }
        out
    }

    #[inline]
    pub fn eval_component(&self, th: f64, i: usize) -> f64 {
        let th1 = 1.0 - th;
        let c = &self.cont;
        c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
    }

    /// Derivative of the interpolant with respect to `r`.
    #[inline]
    pub fn deriv_theta(&self, th: f64) -> State {
        // P = c0 + c1 t + c2 t(1-t) + c3 t^2(1-t) + c4 t^2(1-t)^2
        let c = &self.cont;
        let mut out = [0.0; DIM];
        for i in 0..DIM {
            let dp = c[1][i]
                + c[2][i] * (1.0 - 2.0 * th)
                + c[3][i] * th * (2.0 - 3.0 * th)
                + c[4][i] * 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th);
            out[i] = dp / self.h;
        }
        out
    }

    pub fn eval(&self, r: f64) -> State {
        self.eval_theta(self.theta_of(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_test_segment() -> Segment {
        // Segment built from an artificial cubic history so the interpolant
        // endpoints and derivative can be checked mechanically.
        let y0 = [1.0, -0.5, 0.0, 2.0, -1.0];
        let y1 = [0.2, 0.7, 1.5, 2.5, -0.25];
        let mut ks = [[0.0; DIM]; 7];
        for (j, k) in ks.iter_mut().enumerate() {
            for (i, item) in k.iter_mut().enumerate() {
                *item = (i as f64 + 1.0) * 0.1 - j as f64 * 0.03;
            }
        }
        Segment::new(2.0, 0.5, &y0, &y1, &ks)
    }

    #[test]
    fn dense_exact_at_endpoints() {
        let seg = linear_test_segment();
        let y0 = seg.eval_theta(0.0);
        let y1 = seg.eval_theta(1.0);
        assert_eq!(y0, [1.0, -0.5, 0.0, 2.0, -1.0]);
        for (a, b) in y1.iter().zip([0.2, 0.7, 1.5, 2.5, -0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let seg = linear_test_segment();
        for th in [0.1, 0.33, 0.5, 0.77, 0.95] {
            let d = seg.deriv_theta(th);
            let eps = 1e-7;
            let up = seg.eval_theta(th + eps);
            let dn = seg.eval_theta(th - eps);
            for i in 0..DIM {
                let fd = (up[i] - dn[i]) / (2.0 * eps * seg.h);
                assert!(
                    (d[i] - fd).abs() < 1e-6 * d[i].abs().max(1.0),
                    "component {i} at theta {th}: analytic {} vs fd {fd}",
                    d[i]
                );
            }
        }
    }
}
