//! Adaptive Gauss-Kronrod quadrature (7-15 pair).
//!
//! Plain recursive bisection: each panel is scored by |K15 - G7| and split
//! until the local estimate passes its share of the tolerance. The
//! integrands here (powers of smooth radial profiles) are cheap and
//! non-oscillatory, so this simple strategy converges in a handful of
//! levels.

use crate::error::{Error, Result};

/// Kronrod-15 abscissae on [0, 1] side of the symmetric rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Kronrod-15 weights matching `XGK`.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss-7 weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod panel: returns (K15 value, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol` (with an
/// absolute floor `abs_tol`). Fails with `QuadratureFailure` if the
/// subdivision budget is exhausted before the error estimate passes.
pub(crate) fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParams(format!(
            "quadrature interval [{a}, {b}] must be finite and increasing"
        )));
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = vec![Panel { a, b, value, error }];
    let mut total: f64 = value;
    let mut total_err: f64 = error;
    // 2000 panels is far beyond what the smooth integrands here need.
    for _ in 0..2000 {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        // Split the panel with the largest error estimate.
        let worst = heap
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("heap is nonempty");
        let Panel { a, b, value, error } = heap.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Interval at floating point resolution; keep its estimate.
            total_err -= error;
            total += 0.0;
            heap.push(Panel { a, b, value, error: 0.0 });
            continue;
        }
        let (lv, le) = gk15(&f, a, mid);
        let (rv, re) = gk15(&f, mid, b);
        total += lv + rv - value;
        total_err += le + re - error;
        heap.push(Panel { a, b: mid, value: lv, error: le });
        heap.push(Panel { a: mid, b, value: rv, error: re });
    }
    if total_err <= abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::QuadratureFailure { a, b, estimate: total_err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree <= 22 exactly; x^3 over [0, 1] = 1/4.
        let v = integrate(|x| x * x * x, 0.0, 1.0, 1e-14, 0.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sine_over_period() {
        let v = integrate(|x| x.sin(), 0.0, PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn exponential() {
        let v = integrate(|x| x.exp(), 0.0, 3.0, 1e-13, 0.0).unwrap();
        assert!(((v - (3.0_f64.exp() - 1.0)) / v).abs() < 1e-13);
    }

    #[test]
    fn needs_subdivision_near_spike() {
        // 1/sqrt(x) shifted off the endpoint: steep but integrable smoothly.
        let v = integrate(|x| 1.0 / (x + 1e-4).sqrt(), 0.0, 1.0, 1e-11, 0.0).unwrap();
        let want = 2.0 * ((1.0_f64 + 1e-4).sqrt() - 1e-4_f64.sqrt());
        assert!(((v - want) / want).abs() < 1e-11, "got {v}, want {want}");
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-10, 0.0).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-10, 0.0).is_err());
    }
}
