//! Nodal solutions on the unit ball, built by rescaling the whole-space
//! trajectory.
//!
//! The canonical trajectory starts at `w(0) = 1`. Truncating it at its
//! m-th zero `r_m` and rescaling, `u(x) = r_m^{2/(p-1)} w(r_m x)`, gives
//! the Dirichlet solution with `m-1` interior zeros; truncating at the
//! m-th critical point `s_m` gives the Neumann solution. The feature
//! sequences are the critical radii `delta_1 > ... > delta_m = 0` with
//! their values and the zero radii `rho_k` with their slopes, indexed
//! from the boundary inward as in the concentration limit theorems.
//!
//! The sign sibling of a solution is produced by [`NodalSolution::negated`],
//! never by re-integration: solutions are unique up to sign.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{IntegratorOptions, RadialProfile, StopRule};
use crate::params::{Bc, ProblemParams};
use crate::quad;
use crate::special::gamma;

/// Surface area of the unit sphere in `R^n`: `2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI.powf(nf / 2.0) / gamma(nf / 2.0).expect("n/2 > 0")
}

/// A critical point of the ball solution: radius `delta_k` and the value
/// `u(delta_k)` there, `k` counted from the boundary inward.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalFeature {
    pub k: usize,
    pub radius: f64,
    pub value: f64,
}

/// A zero of the ball solution: radius `rho_k` and the slope `u'(rho_k)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroFeature {
    pub k: usize,
    pub radius: f64,
    pub slope: f64,
}

/// A nodal radial solution on the unit ball with `m` nodal regions.
///
/// Immutable after construction; cheap to clone (the underlying
/// trajectory is shared).
#[derive(Debug, Clone)]
pub struct NodalSolution {
    bc: Bc,
    params: ProblemParams,
    m: usize,
    sign: f64,
    scale_radius: f64,
    amplitude_factor: f64,
    deltas: Vec<CriticalFeature>,
    rhos: Vec<ZeroFeature>,
    profile: Arc<RadialProfile>,
}

/// Both sides of the energy identity `int |grad u|^2 = int |u|^{p+1}`:
/// the gradient norm by quadrature on the dense output and the potential
/// norm from the integral carried inside the integration, so the two
/// routes are independent.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Energy {
    pub grad_sq: f64,
    pub lp_integral: f64,
}

/// One point of the serialized sample grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplePoint {
    pub x: f64,
    pub u: f64,
    pub du: f64,
}

/// Documented JSON record of a solution: parameters, feature sequences,
/// and a uniform sample grid on `[0, 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub bc: Bc,
    pub n: u32,
    pub eps: f64,
    pub p: f64,
    pub m: usize,
    pub sign: f64,
    pub scale_radius: f64,
    pub amplitude_factor: f64,
    pub criticals: Vec<CriticalFeature>,
    pub zeros: Vec<ZeroFeature>,
    pub samples: Vec<SamplePoint>,
}

/// Dirichlet solution with `m` nodal regions (`m-1` interior zeros),
/// canonical sign `u(0) > 0`.
///
/// ```
/// let sol = nodal_lab::solutions::dirichlet_solution(3, 0.5, 2).unwrap();
/// assert_eq!(sol.zeros().len(), 2);
/// assert_eq!(sol.zeros()[0].radius, 1.0);
/// ```
pub fn dirichlet_solution(n: u32, eps: f64, m: usize) -> Result<NodalSolution> {
    dirichlet_solution_with(n, eps, m, &IntegratorOptions::default())
}

/// [`dirichlet_solution`] with explicit integrator options.
pub fn dirichlet_solution_with(
    n: u32,
    eps: f64,
    m: usize,
    opts: &IntegratorOptions,
) -> Result<NodalSolution> {
    if m < 1 {
        return Err(Error::InvalidParams(format!("need m >= 1 nodal regions, got {m}")));
    }
    let params = ProblemParams::new(n, eps)?;
    let profile = crate::ode::integrate_ivp_with(&params, 1.0, StopRule::KZeros(m), *opts)?;
    Ok(build_solution(Bc::Dirichlet, params, m, profile))
}

/// Neumann solution with `m` nodal regions (`m-1` interior zeros,
/// `u'(1) = 0`, `u(1) != 0`), canonical sign `u(0) > 0`. Requires
/// `m >= 2`: the one-region Neumann problem has no nontrivial radial
/// solution of this form.
pub fn neumann_solution(n: u32, eps: f64, m: usize) -> Result<NodalSolution> {
    neumann_solution_with(n, eps, m, &IntegratorOptions::default())
}

/// [`neumann_solution`] with explicit integrator options.
pub fn neumann_solution_with(
    n: u32,
    eps: f64,
    m: usize,
    opts: &IntegratorOptions,
) -> Result<NodalSolution> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("need m >= 2 nodal regions, got {m}")));
    }
    let params = ProblemParams::new(n, eps)?;
    let profile = crate::ode::integrate_ivp_with(&params, 1.0, StopRule::KCriticals(m), *opts)?;
    Ok(build_solution(Bc::Neumann, params, m, profile))
}

fn build_solution(bc: Bc, params: ProblemParams, m: usize, profile: RadialProfile) -> NodalSolution {
    let events = profile.events();
    let scale_radius = profile.r_end();
    let amplitude_factor = scale_radius.powf(2.0 / (params.p() - 1.0));
    // delta_k = s_{m-k+1} / R for both boundary conditions; the event list
    // is increasing, so index m-k selects the (m-k+1)-th critical point.
    let deltas: Vec<CriticalFeature> = (1..=m)
        .map(|k| {
            let ev = &events.criticals[m - k];
            CriticalFeature {
                k,
                radius: ev.r / scale_radius,
                value: amplitude_factor * ev.value,
            }
        })
        .collect();
    let zero_count = match bc {
        Bc::Dirichlet => m,
        Bc::Neumann => m - 1,
        Bc::WholeSpace => unreachable!("ball constructors only"),
    };
    // Dirichlet: rho_k = r_{m-k+1}/R; Neumann: rho_k = r_{m-k}/R.
    let offset = match bc {
        Bc::Dirichlet => 0,
        _ => 1,
    };
    let rhos: Vec<ZeroFeature> = (1..=zero_count)
        .map(|k| {
            let ev = &events.zeros[m - k - offset];
            ZeroFeature {
                k,
                radius: ev.r / scale_radius,
                slope: amplitude_factor * scale_radius * ev.slope,
            }
        })
        .collect();
    NodalSolution {
        bc,
        params,
        m,
        sign: 1.0,
        scale_radius,
        amplitude_factor,
        deltas,
        rhos,
        profile: Arc::new(profile),
    }
}

impl NodalSolution {
    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// Number of nodal regions.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `+1` for the canonical solution (`u(0) > 0`), `-1` for its sibling.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// The whole-space event radius used for rescaling: `r_m` (Dirichlet)
    /// or `s_m` (Neumann).
    pub fn scale_radius(&self) -> f64 {
        self.scale_radius
    }

    /// `scale_radius^{2(n-2)/(4 - eps(n-2))} = scale_radius^{2/(p-1)}`.
    pub fn amplitude_factor(&self) -> f64 {
        self.amplitude_factor
    }

    /// The underlying whole-space trajectory.
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Critical features `delta_1 > ... > delta_m = 0`, boundary inward.
    pub fn criticals(&self) -> &[CriticalFeature] {
        &self.deltas
    }

    /// Zero features, boundary inward (`rho_1 = 1` for Dirichlet; all
    /// interior for Neumann).
    pub fn zeros(&self) -> &[ZeroFeature] {
        &self.rhos
    }

    /// The k-th critical feature, `k in 1..=m`.
    pub fn critical(&self, k: usize) -> Result<CriticalFeature> {
        if k < 1 || k > self.deltas.len() {
            return Err(Error::IndexError {
                family: "critical feature",
                k,
                lo: 1,
                hi: self.deltas.len(),
            });
        }
        Ok(self.deltas[k - 1])
    }

    /// The k-th zero feature, `k in 1..=m` (Dirichlet) or `1..=m-1`
    /// (Neumann).
    pub fn zero(&self, k: usize) -> Result<ZeroFeature> {
        if k < 1 || k > self.rhos.len() {
            return Err(Error::IndexError { family: "zero feature", k, lo: 1, hi: self.rhos.len() });
        }
        Ok(self.rhos[k - 1])
    }

    /// `(u(x), u'(x))` for `x in [0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<(f64, f64)> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { r: x, r_end: 1.0 });
        }
        let (w, dw) = self.profile.evaluate(x * self.scale_radius)?;
        Ok((
            self.sign * self.amplitude_factor * w,
            self.sign * self.amplitude_factor * self.scale_radius * dw,
        ))
    }

    /// The sign sibling, sharing the same trajectory (no re-integration).
    pub fn negated(&self) -> NodalSolution {
        let mut out = self.clone();
        out.sign = -out.sign;
        for d in &mut out.deltas {
            d.value = -d.value;
        }
        for z in &mut out.rhos {
            z.slope = -z.slope;
        }
        out
    }

    /// Relative energy-balance residual over the whole ball: the increment
    /// of the boundary functional minus the matching multiple of the
    /// carried `|u|^{p+1}` integral, normalized by the endpoint functional
    /// magnitudes (floored at the ball frame's unit scale).
    pub fn pohozaev_residual(&self) -> Result<f64> {
        let r = self.scale_radius;
        // Ball-frame quantities are the whole-space ones times A^2 R^{2-n}.
        let factor =
            self.amplitude_factor * self.amplitude_factor * r.powf(2.0 - self.params.nf());
        let res = self.profile.pohozaev_residual(0.0, r)?;
        let h_lo = self.profile.pohozaev_functional(0.0)?;
        let h_hi = self.profile.pohozaev_functional(r)?;
        let denom = (factor * h_lo.abs()).max(factor * h_hi.abs()).max(1.0);
        Ok(factor * res.abs() / denom)
    }

    /// Energy of the solution over the unit ball; see [`Energy`].
    pub fn energy(&self) -> Result<Energy> {
        let nf = self.params.nf();
        let area = sphere_area(self.params.n());
        let a = self.amplitude_factor;
        let r = self.scale_radius;
        // Gradient route: adaptive quadrature of u'(x)^2 x^{n-1} on the
        // dense output.
        let profile = Arc::clone(&self.profile);
        let du_sq = quad::integrate(
            |x: f64| {
                let (_, dw) = profile.evaluate(x * r).expect("x in [0,1] maps inside the profile");
                let du = a * r * dw;
                du * du * x.powf(nf - 1.0)
            },
            0.0,
            1.0,
            1e-10,
            0.0,
        )?;
        // Potential route: the |w|^{p+1} integral carried as an extra ODE
        // state, mapped to the ball frame.
        let i1 = self.profile.aux_integrals(r)?[0];
        let lp = a.powf(self.params.p() + 1.0) * r.powf(-nf) * i1;
        Ok(Energy { grad_sq: area * du_sq, lp_integral: area * lp })
    }

    /// Serializable record with `sample_count >= 2` uniform samples.
    pub fn record(&self, sample_count: usize) -> Result<SolutionRecord> {
        if sample_count < 2 {
            return Err(Error::InvalidParams(format!(
                "sample_count = {sample_count}, need at least 2"
            )));
        }
        let mut samples = Vec::with_capacity(sample_count);
        for i in 0..sample_count {
            let x = i as f64 / (sample_count - 1) as f64;
            let (u, du) = self.evaluate(x)?;
            samples.push(SamplePoint { x, u, du });
        }
        Ok(SolutionRecord {
            bc: self.bc,
            n: self.params.n(),
            eps: self.params.eps(),
            p: self.params.p(),
            m: self.m,
            sign: self.sign,
            scale_radius: self.scale_radius,
            amplitude_factor: self.amplitude_factor,
            criticals: self.deltas.clone(),
            zeros: self.rhos.clone(),
            samples,
        })
    }
}

/// Both sides of the Neumann boundary-value identity: the left side is
/// `|u(1)|^{p-1}`; the right side reconstructs it from the profile between
/// the outermost zero and the boundary.
fn neumann_identity_sides(sol: &NodalSolution) -> Result<(f64, f64)> {
    if sol.bc() != Bc::Neumann {
        return Err(Error::InvalidParams(format!(
            "identity applies to Neumann solutions, got {}",
            sol.bc()
        )));
    }
    let p = sol.params().p();
    let nf = sol.params().nf();
    let u1 = sol.critical(1)?.value;
    let rho1 = sol.zero(1)?.radius;
    let lhs = u1.abs().powf(p - 1.0);
    let rho_pow = rho1.powf(nf - 2.0);
    let integral = quad::integrate(
        |s: f64| {
            let (u, _) = sol.evaluate(s).expect("s in [rho1, 1]");
            let t = u / u1;
            t.abs().powf(p - 1.0) * t * s * (s.powf(nf - 2.0) - rho_pow)
        },
        rho1,
        1.0,
        1e-10,
        0.0,
    )?;
    Ok((lhs, (nf - 2.0) * rho_pow / integral))
}

/// Relative residual of the Neumann boundary-value identity
/// `|u(1)|^{p-1} = (n-2) rho_1^{n-2} / int_{rho_1}^1 |u/u(1)|^{p-1}
/// (u/u(1)) s (s^{n-2} - rho_1^{n-2}) ds`, exact for true solutions.
pub fn check_neumann_integral_identity(sol: &NodalSolution) -> Result<f64> {
    let (lhs, rhs) = neumann_identity_sides(sol)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()))
}

/// The two scaled boundary quantities of the limiting Neumann system:
/// `|u(1)|^{p-1} rho_1^{2-n}` (tends to `n(n-2)`) and
/// `|u'(rho_1)| rho_1^{n-1} |u(1)|^{-p}` (tends to `1/n`).
pub fn limiting_system_check(sol: &NodalSolution) -> Result<(f64, f64)> {
    if sol.bc() != Bc::Neumann {
        return Err(Error::InvalidParams(format!(
            "limiting system applies to Neumann solutions, got {}",
            sol.bc()
        )));
    }
    let p = sol.params().p();
    let nf = sol.params().nf();
    let u1 = sol.critical(1)?.value.abs();
    let z1 = sol.zero(1)?;
    let lhs1 = u1.powf(p - 1.0) * z1.radius.powf(2.0 - nf);
    let lhs2 = z1.slope.abs() * z1.radius.powf(nf - 1.0) * u1.powf(-p);
    Ok((lhs1, lhs2))
}
