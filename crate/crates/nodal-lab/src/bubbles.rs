//! Bubble superpositions: the single standard bubble, the signed towers
//! that describe ball solutions as `eps -> 0`, the iterated whole-space
//! ansatz, and the blow-up rescaling toward the critical profile. Towers
//! are evaluated against numerically constructed solutions, never solved
//! for.

use serde::Serialize;

use crate::constants::{self, ConstantsTable};
use crate::error::{Error, Result};
use crate::ode::{integrate_ivp, StopRule};
use crate::params::{Bc, ProblemParams};
use crate::solutions::{dirichlet_solution, neumann_solution, NodalSolution};

/// The standard bubble `gamma_n (1 + mu^{4/(n-2)} r^2)^{(2-n)/2} mu`
/// centered at the origin with height parameter `mu`.
///
/// With `mu = gamma_n^{-1}` it reduces to the critical profile:
///
/// ```
/// use nodal_lab::bubbles::single_bubble;
/// let gamma_3 = 3.0_f64.powf(0.25);
/// let u = single_bubble(3, 1.0 / gamma_3, 1.7);
/// assert!((u - (1.0 + 1.7_f64.powi(2) / 3.0).powf(-0.5)).abs() < 1e-15);
/// ```
pub fn single_bubble(n: u32, mu: f64, r: f64) -> f64 {
    let nf = n as f64;
    let gamma_n = constants::gamma_n(n);
    gamma_n * (1.0 + mu.powf(4.0 / (nf - 2.0)) * r * r).powf((2.0 - nf) / 2.0) * mu
}

/// A signed superposition of centered bubbles with the tower heights of
/// one boundary-condition family.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleTower {
    bc: Bc,
    n: u32,
    m: usize,
    eps: f64,
    /// `mu_k` for `k = 1..=m`, innermost bubble last.
    heights: Vec<f64>,
    /// Peak amplitudes `gamma_n * mu_k`; kept separate so the
    /// whole-space ansatz keeps its exact `Gamma(k) (kappa_n eps)^{k-1}`
    /// normalization (the first is exactly 1).
    amplitudes: Vec<f64>,
    gamma_n: f64,
}

impl BubbleTower {
    /// Builds the tower for `(n, eps, m)` under `bc`. Heights:
    /// Dirichlet `alpha_k eps^{1/2-k}`, Neumann
    /// `beta_k eps^{(n-2)/(2n)-(k-1)}` (limit coefficients), whole space
    /// `gamma_n^{-1} Gamma(k) (kappa_n eps)^{k-1}`.
    pub fn new(bc: Bc, n: u32, eps: f64, m: usize) -> Result<Self> {
        let params = ProblemParams::new(n, eps)?;
        let nf = params.nf();
        if m < 1 {
            return Err(Error::InvalidParams(format!("tower needs m >= 1, got {m}")));
        }
        let gamma_n = constants::gamma_n(n);
        let (heights, amplitudes) = match bc {
            Bc::Dirichlet => {
                let table = ConstantsTable::closed_form(n, m)?;
                let heights: Vec<f64> = (1..=m)
                    .map(|k| Ok(table.alpha(k)? * eps.powf(0.5 - k as f64)))
                    .collect::<Result<_>>()?;
                let amplitudes = heights.iter().map(|mu| gamma_n * mu).collect();
                (heights, amplitudes)
            }
            Bc::Neumann => {
                if m < 2 {
                    return Err(Error::InvalidParams(format!(
                        "Neumann towers need m >= 2, got {m}"
                    )));
                }
                let table = ConstantsTable::closed_form(n, m)?;
                let heights: Vec<f64> = (1..=m)
                    .map(|k| {
                        Ok(table.beta(k)? * eps.powf((nf - 2.0) / (2.0 * nf) - (k as f64 - 1.0)))
                    })
                    .collect::<Result<_>>()?;
                let amplitudes = heights.iter().map(|mu| gamma_n * mu).collect();
                (heights, amplitudes)
            }
            Bc::WholeSpace => {
                let kappa = constants::kappa(n)?;
                let mut factorial = 1.0; // Gamma(k) = (k-1)!
                let amplitudes: Vec<f64> = (1..=m)
                    .map(|k| {
                        if k > 1 {
                            factorial *= (k - 1) as f64;
                        }
                        factorial * (kappa * eps).powi(k as i32 - 1)
                    })
                    .collect();
                let heights = amplitudes.iter().map(|a| a / gamma_n).collect();
                (heights, amplitudes)
            }
        };
        Ok(BubbleTower { bc, n, m, eps, heights, amplitudes, gamma_n })
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Height parameters `mu_1..mu_m`.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    /// Signed tower value `sum_k (-1)^{k+1} bubble(mu_k, r)`. At `r = 0`
    /// this collapses to `gamma_n * sum_k (-1)^{k+1} mu_k`.
    pub fn value(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        self.heights
            .iter()
            .zip(&self.amplitudes)
            .enumerate()
            .map(|(i, (&mu, &amp))| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let shape = (1.0 + mu.powf(4.0 / (nf - 2.0)) * r * r).powf((2.0 - nf) / 2.0);
                sign * amp * shape
            })
            .sum()
    }
}

/// Evaluates a tower at radius `r`.
pub fn tower_value(tower: &BubbleTower, r: f64) -> f64 {
    tower.value(r)
}

/// Pointwise comparison of a tower against the numerical solution on a
/// grid, with the remainder scaled by the family's correction power.
#[derive(Debug, Clone, Serialize)]
pub struct RemainderReport {
    pub bc: Bc,
    pub n: u32,
    pub m: usize,
    pub eps: f64,
    pub grid: Vec<f64>,
    /// Numerical solution values, sign-aligned with the tower.
    pub solution: Vec<f64>,
    pub tower: Vec<f64>,
    /// Scaled remainder on the grid: Dirichlet
    /// `f = eps^{-1/2}(tower - u)`, Neumann
    /// `g = eps^{-(3n-2)/(2n)}(u - tower)`.
    pub remainder: Vec<f64>,
    /// `sup |remainder|` over the grid.
    pub sup: f64,
    /// Limit the remainder approaches on compacts away from the origin
    /// (Dirichlet: `gamma_n alpha_0`; none is known for Neumann).
    pub compact_target: Option<f64>,
    /// `sup |remainder - compact_target|` over grid points in [1/4, 1].
    pub compact_deviation: Option<f64>,
}

/// Log-spaced default grid on (1e-3, 1], 2048 points.
pub fn default_remainder_grid() -> Vec<f64> {
    let count = 2048;
    let (lo, hi) = (1e-3_f64.ln(), 0.0_f64);
    (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("empty evaluation grid".into()));
    }
    for &y in grid {
        if !(y > 0.0 && y <= 1.0) {
            return Err(Error::InvalidParams(format!("grid point {y} outside (0, 1]")));
        }
    }
    Ok(())
}

/// Aligns the canonical solution (positive at the origin) with the tower
/// normalization `(-1)^{m+1} u(0) > 0`.
fn align_with_tower(sol: NodalSolution) -> NodalSolution {
    if sol.m().is_multiple_of(2) {
        sol.negated()
    } else {
        sol
    }
}

fn remainder_report(
    sol: &NodalSolution,
    tower: &BubbleTower,
    grid: &[f64],
    scale: f64,
    tower_minus_solution: bool,
    compact_target: Option<f64>,
) -> Result<RemainderReport> {
    let mut solution_vals = Vec::with_capacity(grid.len());
    let mut tower_vals = Vec::with_capacity(grid.len());
    let mut remainder = Vec::with_capacity(grid.len());
    let mut sup = 0.0_f64;
    let mut compact_deviation: Option<f64> = compact_target.map(|_| 0.0);
    for &y in grid {
        let (u, _) = sol.evaluate(y)?;
        let t = tower.value(y);
        let raw = if tower_minus_solution { t - u } else { u - t };
        let f = raw * scale;
        sup = sup.max(f.abs());
        if let (Some(target), Some(dev)) = (compact_target, compact_deviation.as_mut()) {
            if y >= 0.25 {
                *dev = dev.max((f - target).abs());
            }
        }
        solution_vals.push(u);
        tower_vals.push(t);
        remainder.push(f);
    }
    Ok(RemainderReport {
        bc: tower.bc,
        n: tower.n,
        m: tower.m,
        eps: tower.eps,
        grid: grid.to_vec(),
        solution: solution_vals,
        tower: tower_vals,
        remainder,
        sup,
        compact_target,
        compact_deviation,
    })
}

/// Dirichlet remainder `f_eps = eps^{-1/2}(tower - u_eps)` on the grid.
/// `f_eps` stays uniformly bounded and approaches `gamma_n alpha_0` on
/// compacts away from the origin.
pub fn dirichlet_remainder(n: u32, eps: f64, m: usize, grid: &[f64]) -> Result<RemainderReport> {
    validate_grid(grid)?;
    let tower = BubbleTower::new(Bc::Dirichlet, n, eps, m)?;
    let sol = align_with_tower(dirichlet_solution(n, eps, m)?);
    let table = ConstantsTable::closed_form(n, m)?;
    let target = constants::gamma_n(n) * table.alpha(0)?;
    remainder_report(&sol, &tower, grid, eps.powf(-0.5), true, Some(target))
}

/// Neumann remainder `g_eps = eps^{-(3n-2)/(2n)}(u_eps - tower)` on the
/// grid, using the limit coefficients `beta_k`; the discrepancy from the
/// eps-dependent coefficients is part of the measured remainder.
pub fn neumann_remainder(n: u32, eps: f64, m: usize, grid: &[f64]) -> Result<RemainderReport> {
    validate_grid(grid)?;
    let tower = BubbleTower::new(Bc::Neumann, n, eps, m)?;
    let sol = align_with_tower(neumann_solution(n, eps, m)?);
    let nf = n as f64;
    let scale = eps.powf(-(3.0 * nf - 2.0) / (2.0 * nf));
    remainder_report(&sol, &tower, grid, scale, false, None)
}

/// Comparison of the whole-space trajectory with the iterated bubble
/// ansatz at the first `M` critical points, plus the scaled tail bound.
#[derive(Debug, Clone, Serialize)]
pub struct AnsatzReport {
    pub n: u32,
    pub eps: f64,
    /// Number of bubbles `M` in the ansatz.
    pub bubbles: usize,
    /// `eps^{1-k} (|w(s_k)| - |v(s_k)|)` for `k = 1..=M`.
    pub scaled_differences: Vec<f64>,
    /// `sup eps^{1-M} (|w| + |v|)` over the probe window.
    pub tail_sup: f64,
    /// The theoretical tail bound `2 Gamma(M) kappa_n^{M-1}`.
    pub tail_bound: f64,
    /// Probe window `[s_M, r_M]`: the tail supremum of `|w| + |v|` is
    /// attained by `s_M` (peak magnitudes decay) and both functions only
    /// shrink beyond the next zero.
    pub probe_window: (f64, f64),
}

/// Builds the `M`-bubble whole-space ansatz for the trajectory started
/// at `w(0) = 1`, evaluates both at the critical points `s_1..s_M`, and
/// probes the scaled tail sum on `[s_M, r_M]` (512 points).
pub fn whole_space_ansatz_check(n: u32, eps: f64, bubbles: usize) -> Result<AnsatzReport> {
    if bubbles < 1 {
        return Err(Error::InvalidParams(format!("ansatz needs M >= 1, got {bubbles}")));
    }
    let params = ProblemParams::new(n, eps)?;
    let tower = BubbleTower::new(Bc::WholeSpace, n, eps, bubbles)?;
    let profile = integrate_ivp(&params, 1.0, StopRule::KZeros(bubbles))?;
    let events = profile.events();
    let kappa = constants::kappa(n)?;

    let mut scaled_differences = Vec::with_capacity(bubbles);
    for k in 1..=bubbles {
        let s_k = events.criticals[k - 1];
        let v_k = tower.value(s_k.r);
        scaled_differences.push(eps.powi(1 - k as i32) * (s_k.value.abs() - v_k.abs()));
    }

    let s_m = events.criticals[bubbles - 1].r;
    let r_m = events.zeros[bubbles - 1].r;
    let count = 512;
    let tail_scale = eps.powi(1 - bubbles as i32);
    let mut tail_sup = 0.0_f64;
    for i in 0..count {
        let frac = i as f64 / (count - 1) as f64;
        // Log spacing for a positive window; s_1 = 0 forces linear.
        let r = if s_m > 0.0 {
            (s_m.ln() + (r_m.ln() - s_m.ln()) * frac).exp()
        } else {
            s_m + (r_m - s_m) * frac
        };
        let r = r.min(r_m);
        let (w, _) = profile.evaluate(r)?;
        let v = tower.value(r);
        tail_sup = tail_sup.max(tail_scale * (w.abs() + v.abs()));
    }
    let mut factorial = 1.0;
    for j in 1..bubbles {
        factorial *= j as f64;
    }
    Ok(AnsatzReport {
        n,
        eps,
        bubbles,
        scaled_differences,
        tail_sup,
        tail_bound: 2.0 * factorial * kappa.powi(bubbles as i32 - 1),
        probe_window: (s_m, r_m),
    })
}

/// The blow-up rescaling of a Dirichlet solution around its outermost
/// peak: `z(x) = u(lambda^{-1} x) / u(delta_1)` with
/// `lambda = u(delta_1)^{(p-1)/2}`, supported on the image of the
/// outermost nodal annulus and converging to the critical profile away
/// from the origin.
#[derive(Debug, Clone)]
pub struct BlowUpProfile {
    sol: NodalSolution,
    /// `u(delta_1)` of the branch normalized to be positive there.
    peak_value: f64,
    /// `u(delta_1)^{(p-1)/2}`; grows without bound as `eps -> 0`.
    lambda: f64,
    /// Support `(rho_2 * lambda, lambda)` of the rescaled profile.
    annulus: (f64, f64),
}

impl BlowUpProfile {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn peak_value(&self) -> f64 {
        self.peak_value
    }

    /// Support interval of the rescaled profile.
    pub fn annulus(&self) -> (f64, f64) {
        self.annulus
    }

    /// `z(x)`: zero outside the open annulus, the normalized solution
    /// value inside.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidParams(format!("blow-up coordinate x = {x}")));
        }
        if x <= self.annulus.0 || x >= self.annulus.1 {
            return Ok(0.0);
        }
        let (u, _) = self.sol.evaluate(x / self.lambda)?;
        Ok(u / self.peak_value)
    }

    /// The limiting critical profile `U(x) = (1 + x^2/(n(n-2)))^{-(n-2)/2}`.
    pub fn limit_profile(&self, x: f64) -> f64 {
        self.sol.params().critical_profile(x)
    }

    /// `sup |z - U|` over a uniform grid on `[lo, hi]`.
    pub fn profile_gap(&self, lo: f64, hi: f64, count: usize) -> Result<f64> {
        if !(lo >= 0.0 && hi > lo) || count < 2 {
            return Err(Error::InvalidParams(format!(
                "bad gap window [{lo}, {hi}] with {count} points"
            )));
        }
        let mut sup = 0.0_f64;
        for i in 0..count {
            let x = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let z = self.evaluate(x)?;
            sup = sup.max((z - self.limit_profile(x)).abs());
        }
        Ok(sup)
    }
}

/// Builds the blow-up rescaling for the Dirichlet solution with `m - 1`
/// interior zeros, `m >= 2`, on the branch with a positive outermost
/// peak.
pub fn blow_up_profile(n: u32, eps: f64, m: usize) -> Result<BlowUpProfile> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("blow-up rescaling needs m >= 2, got {m}")));
    }
    let sol = align_with_tower(dirichlet_solution(n, eps, m)?);
    let peak = sol.critical(1)?;
    let peak_value = peak.value;
    if peak_value <= 0.0 {
        return Err(Error::DomainError(format!(
            "outermost peak value {peak_value} not positive after alignment"
        )));
    }
    let p = sol.params().p();
    let lambda = peak_value.powf((p - 1.0) / 2.0);
    let rho_2 = sol.zero(2)?.radius;
    Ok(BlowUpProfile { sol, peak_value, lambda, annulus: (rho_2 * lambda, lambda) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn single_bubble_matches_closed_forms() {
        // mu = 1 at the origin gives gamma_n; n = 3 gives 3^{1/4}.
        for n in [3_u32, 4, 5, 6] {
            assert!(rel(single_bubble(n, 1.0, 0.0), constants::gamma_n(n)) < 1e-15);
        }
        assert!(rel(single_bubble(3, 1.0, 0.0), 3.0_f64.powf(0.25)) < 1e-15);
        // Decay r^{2-n}: doubling r at large r scales by 2^{2-n}.
        for n in [3_u32, 5] {
            let nf = n as f64;
            let v1 = single_bubble(n, 1.0, 1e6);
            let v2 = single_bubble(n, 1.0, 2e6);
            assert!(rel(v2 / v1, 2.0_f64.powf(2.0 - nf)) < 1e-9);
        }
    }

    #[test]
    fn single_bubble_reduces_to_critical_profile() {
        // mu = gamma_n^{-1} turns the bubble into U on any grid.
        for n in [3_u32, 4, 6] {
            let params = ProblemParams::critical(n).unwrap();
            let mu = 1.0 / constants::gamma_n(n);
            for i in 0..=40 {
                let r = i as f64;
                assert!(
                    (single_bubble(n, mu, r) - params.critical_profile(r)).abs() < 1e-12,
                    "n={n} r={r}"
                );
            }
        }
    }

    #[test]
    fn tower_values_at_origin_match_signed_sums() {
        // One Dirichlet bubble: gamma_n kappa_n^{-1/2} eps^{-1/2}.
        let eps = 0.1;
        let tower = BubbleTower::new(Bc::Dirichlet, 3, eps, 1).unwrap();
        let expect = constants::gamma_n(3) * constants::kappa(3).unwrap().powf(-0.5)
            / eps.sqrt();
        assert!(rel(tower.value(0.0), expect) < 1e-13);
        // Neumann m = 2, n = 3: gamma_3 (beta_1 eps^{1/6} - beta_2 eps^{1/6 - 1}).
        let tower = BubbleTower::new(Bc::Neumann, 3, eps, 2).unwrap();
        let table = ConstantsTable::closed_form(3, 2).unwrap();
        let expect = constants::gamma_n(3)
            * (table.beta(1).unwrap() * eps.powf(1.0 / 6.0)
                - table.beta(2).unwrap() * eps.powf(1.0 / 6.0 - 1.0));
        assert!(rel(tower.value(0.0), expect) < 1e-13);
        // Whole-space single-bubble ansatz matches the IVP normalization.
        let tower = BubbleTower::new(Bc::WholeSpace, 3, eps, 1).unwrap();
        assert!((tower.value(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_tower_heights_increase_inward() {
        for bc in [Bc::Dirichlet, Bc::Neumann] {
            for (n, m, eps) in [(3, 2, 0.2), (3, 3, 0.05), (4, 2, 0.1)] {
                let tower = BubbleTower::new(bc, n, eps, m).unwrap();
                let h = tower.heights();
                assert_eq!(h.len(), m);
                assert!(
                    h.windows(2).all(|w| w[1] > w[0]),
                    "{bc} n={n} m={m}: {h:?}"
                );
            }
        }
        // Whole-space heights shrink instead: later bubbles are the small
        // outer shoulders.
        let tower = BubbleTower::new(Bc::WholeSpace, 3, 0.1, 3).unwrap();
        assert!(tower.heights().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn tower_rejects_bad_inputs() {
        assert!(BubbleTower::new(Bc::Dirichlet, 3, 0.1, 0).is_err());
        assert!(BubbleTower::new(Bc::Neumann, 3, 0.1, 1).is_err());
        assert!(BubbleTower::new(Bc::Dirichlet, 3, 4.5, 1).is_err());
        assert!(BubbleTower::new(Bc::Dirichlet, 2, 0.1, 1).is_err());
    }

    #[test]
    fn dirichlet_remainder_is_consistent_and_bounded() {
        let grid = default_remainder_grid();
        assert_eq!(grid.len(), 2048);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        let mut sups = Vec::new();
        let mut compact = Vec::new();
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let report = dirichlet_remainder(3, eps, 1, &grid).unwrap();
            // Spot-check the definition at one grid point.
            let i = grid.len() / 2;
            let expect = (report.tower[i] - report.solution[i]) / eps.sqrt();
            assert!((report.remainder[i] - expect).abs() < 1e-12);
            sups.push(report.sup);
            compact.push(report.compact_deviation.unwrap());
        }
        // Uniform boundedness: consecutive sups grow by at most 1.5x.
        for w in sups.windows(2) {
            assert!(w[1] <= 1.5 * w[0], "sups {sups:?}");
        }
        // Compact convergence toward gamma_n alpha_0 on [1/4, 1].
        assert!(
            compact.windows(2).all(|w| w[1] < w[0]),
            "compact deviations {compact:?}"
        );
    }

    #[test]
    fn neumann_remainder_stays_bounded() {
        let grid = default_remainder_grid();
        let mut sups = Vec::new();
        for eps in [0.2, 0.1, 0.05, 0.025] {
            let report = neumann_remainder(3, eps, 2, &grid).unwrap();
            assert!(report.compact_target.is_none());
            assert!(report.remainder.iter().all(|g| g.is_finite()));
            sups.push(report.sup);
        }
        for w in sups.windows(2) {
            assert!(w[1] <= 1.5 * w[0], "sups {sups:?}");
        }
    }

    #[test]
    fn remainders_validate_their_inputs() {
        assert!(dirichlet_remainder(3, 0.1, 1, &[]).is_err());
        assert!(dirichlet_remainder(3, 0.1, 1, &[0.0]).is_err());
        assert!(dirichlet_remainder(3, 0.1, 1, &[1.5]).is_err());
        assert!(neumann_remainder(3, 0.1, 1, &[0.5]).is_err());
    }

    #[test]
    fn ansatz_first_difference_vanishes_for_one_bubble() {
        // M = 1: both the trajectory and the ansatz are 1 at the origin.
        let report = whole_space_ansatz_check(3, 0.1, 1).unwrap();
        assert_eq!(report.scaled_differences.len(), 1);
        assert_eq!(report.scaled_differences[0], 0.0);
        assert_eq!(report.probe_window.0, 0.0);
        // The scaled tail sum is largest at the origin where it equals 2,
        // the exact bound for M = 1.
        assert!(rel(report.tail_sup, report.tail_bound) < 1e-12);
    }

    #[test]
    fn ansatz_second_difference_shrinks() {
        let mut gaps = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let report = whole_space_ansatz_check(3, eps, 2).unwrap();
            assert_eq!(report.scaled_differences.len(), 2);
            gaps.push(report.scaled_differences[1].abs());
        }
        assert!(
            gaps.last().unwrap() < gaps.first().unwrap(),
            "scaled differences {gaps:?}"
        );
    }

    #[test]
    fn ansatz_tail_respects_theoretical_bound() {
        let report = whole_space_ansatz_check(3, 0.05, 2).unwrap();
        let kappa = constants::kappa(3).unwrap();
        assert!(rel(report.tail_bound, 2.0 * kappa) < 1e-14);
        assert!(
            report.tail_sup <= report.tail_bound * 1.1,
            "tail sup {} bound {}",
            report.tail_sup,
            report.tail_bound
        );
        assert!(whole_space_ansatz_check(3, 0.1, 0).is_err());
    }

    #[test]
    fn blow_up_profile_normalizes_the_outer_peak() {
        let profile = blow_up_profile(3, 0.1, 2).unwrap();
        let sol_peak = profile.sol.critical(1).unwrap();
        // The rescaled peak coordinate maps back to delta_1 with value 1.
        let x_peak = sol_peak.radius * profile.lambda();
        assert!((profile.evaluate(x_peak).unwrap() - 1.0).abs() < 1e-12);
        // Scale diverges and the annulus stretches past the unit scale.
        assert!(profile.lambda() > 2.0);
        assert!(profile.annulus().0 < 0.5);
        assert!(profile.annulus().1 == profile.lambda());
        // Outside the support the profile vanishes by definition.
        assert_eq!(profile.evaluate(profile.lambda() * 1.01).unwrap(), 0.0);
        assert!(blow_up_profile(3, 0.1, 1).is_err());
    }

    #[test]
    fn blow_up_profile_stays_below_one_and_converges() {
        let mut gaps = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let profile = blow_up_profile(3, eps, 2).unwrap();
            // |z| <= 1 across the whole support.
            let hi = profile.lambda();
            for i in 0..1024 {
                let x = hi * i as f64 / 1023.0;
                let z = profile.evaluate(x).unwrap();
                assert!(z.abs() <= 1.0 + 1e-8, "eps={eps} x={x}: z={z}");
            }
            gaps.push(profile.profile_gap(0.5, 2.0, 256).unwrap());
        }
        assert!(
            gaps.windows(2).all(|w| w[1] < w[0]),
            "profile gaps {gaps:?}"
        );
    }
}
