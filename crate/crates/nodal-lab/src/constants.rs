//! Concentration limit constants for nodal radial solutions.
//!
//! Two independent routes produce the same table:
//!
//! 1. closed forms, evaluated in log space from `log_gamma`;
//! 2. a recurrence that alternates between the Dirichlet and Neumann
//!    normalizations, starting from the one-region base case. The
//!    recurrence uses no gamma function at all, only the algebraic step
//!    relations, so agreement between the two routes is a genuine
//!    cross-check of every entry.
//!
//! Index conventions, for `m` nodal regions on the unit ball:
//! critical radii `delta_m < ... < delta_1` and zeros `rho_k` interlace as
//! `0 = delta_m < rho_m < ... < delta_1 < rho_1 = 1` (Dirichlet) and
//! `0 = delta_m < rho_{m-1} < ... < rho_1 < delta_1 = 1` (Neumann). The
//! table stores the limits of `|u(delta_k)|`, `delta_k`, `|u'(rho_k)|`,
//! and `rho_k` under the concentration scalings in `eps`.

use crate::error::{Error, Result};
use crate::params::Bc;
use crate::quad;
use crate::special::{beta_function, log_gamma};
use serde::Serialize;

/// `kappa_n = (n-2)/4 * Gamma(n/2)^2 / Gamma(n)`, the constant that pairs
/// with `eps` in every concentration rate.
pub fn kappa(n: u32) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    let lg_half = log_gamma(nf / 2.0)?;
    let lg_n = log_gamma(nf)?;
    Ok((nf - 2.0) / 4.0 * (2.0 * lg_half - lg_n).exp())
}

/// `gamma_n = (n(n-2))^{(n-2)/4}`, the height normalization of the
/// standard decay profile.
pub fn gamma_n(n: u32) -> f64 {
    let nf = n as f64;
    (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0)
}

fn check_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("dimension n = {n}, need n >= 3")));
    }
    Ok(())
}

fn ln_gamma_usize(k: usize) -> f64 {
    // k >= 1 in every call site.
    log_gamma(k as f64).expect("positive integer argument")
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Limits of the whole-space zeros and critical points under the
/// concentration scalings: for the normalized profile `w(0) = 1`, as
/// `eps -> 0`,
///
/// - `r_m (kappa eps)^{(2m-1)/(n-2)}   -> zero_radius`
/// - `|w'(r_m)| (kappa eps)^{(1-mn)/(n-2)} -> zero_slope`
/// - `s_m (kappa eps)^{(2mn-3n+2)/(n(n-2))} -> crit_radius` (m >= 2)
/// - `|w(s_m)| (kappa eps)^{1-m}       -> crit_value` (m >= 2)
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WholeSpaceLimits {
    pub zero_radius: f64,
    pub zero_slope: f64,
    pub crit_radius: Option<f64>,
    pub crit_value: Option<f64>,
}

/// Closed-form whole-space limits for the m-th zero and critical point.
pub fn whole_space_constants(n: u32, m: usize) -> Result<WholeSpaceLimits> {
    check_dimension(n)?;
    if m < 1 {
        return Err(Error::IndexError { family: "whole-space limits", k: m, lo: 1, hi: usize::MAX });
    }
    let nf = n as f64;
    let lg_m = ln_gamma_usize(m);
    let ln_c = (nf * (nf - 2.0)).ln();
    let zero_radius = (0.5 * ln_c - (m as f64).ln() / (nf - 2.0) - 2.0 / (nf - 2.0) * lg_m).exp();
    let zero_slope = (0.5 * ((nf - 2.0).ln() - nf.ln())
        + (nf - 1.0) / (nf - 2.0) * (m as f64).ln()
        + nf / (nf - 2.0) * lg_m)
        .exp();
    let (crit_radius, crit_value) = if m >= 2 {
        let cr = (0.5 * ln_c + ((m - 1) as f64).ln() / nf - 2.0 / (nf - 2.0) * lg_m).exp();
        (Some(cr), Some(lg_m.exp()))
    } else {
        (None, None)
    };
    Ok(WholeSpaceLimits { zero_radius, zero_slope, crit_radius, crit_value })
}

/// The complete constants table for a given dimension and nodal count.
///
/// Accessor domains follow the limit theorems: Dirichlet values and slopes
/// for `k in 1..=m`, Dirichlet critical radii for `k in 1..=m-1` (the
/// innermost critical radius tends to 0 faster than any single rate),
/// Dirichlet zero radii for `k in 1..=m` with `k = 1` exactly 1 (the
/// boundary); Neumann values for `k in 1..=m`, Neumann critical radii for
/// `k in 1..=m-1` with `k = 1` exactly 1, Neumann slopes and zero radii
/// for `k in 1..=m-1`. Neumann families require `m >= 2`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    n: u32,
    m: usize,
    kappa: f64,
    gamma_n: f64,
    dir_crit_value: Vec<f64>,
    dir_crit_radius: Vec<f64>,
    dir_zero_slope: Vec<f64>,
    dir_zero_radius: Vec<f64>,
    neu_crit_value: Vec<f64>,
    neu_crit_radius: Vec<f64>,
    neu_zero_slope: Vec<f64>,
    neu_zero_radius: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    whole_space: WholeSpaceLimits,
}

/// Log-space working tables for one `m`, either route.
#[derive(Debug, Clone)]
struct LogTables {
    // Dirichlet families.
    d_val: Vec<f64>,  // ln of crit-value limits, k = 1..=m
    d_rad: Vec<f64>,  // ln of crit-radius limits, k = 1..=m-1
    z_slo: Vec<f64>,  // ln of zero-slope limits, k = 1..=m
    z_rad: Vec<f64>,  // ln of zero-radius limits, k = 1..=m (k=1 entry 0)
    // Neumann families, empty at m = 1.
    dt_val: Vec<f64>, // k = 1..=m
    dt_rad: Vec<f64>, // k = 2..=m-1
    zt_slo: Vec<f64>, // k = 1..=m-1
    zt_rad: Vec<f64>, // k = 1..=m-1
}

impl LogTables {
    fn empty() -> Self {
        LogTables {
            d_val: Vec::new(),
            d_rad: Vec::new(),
            z_slo: Vec::new(),
            z_rad: Vec::new(),
            dt_val: Vec::new(),
            dt_rad: Vec::new(),
            zt_slo: Vec::new(),
            zt_rad: Vec::new(),
        }
    }
}

/// Closed-form log tables straight from the gamma-function formulas.
fn closed_form_logs(n: u32, m: usize) -> LogTables {
    let nf = n as f64;
    let ln_gn = (nf * (nf - 2.0)).ln() * (nf - 2.0) / 4.0;
    let ln_m = (m as f64).ln();
    let lg_m = ln_gamma_usize(m);
    let mut t = LogTables::empty();

    // Shared combination A(k) = ln(m^{1/2} Gamma(m) / Gamma(m-k+1)). The
    // gamma difference is grouped first so it cancels bitwise at k = 1,
    // which keeps the k = 1 zero-radius entry exactly 1.
    let a = |k: usize| 0.5 * ln_m + (lg_m - ln_gamma_usize(m - k + 1));

    for k in 1..=m {
        t.d_val.push(ln_gn - a(k));
        t.z_slo.push(
            (nf - 2.0) / 4.0 * nf.ln()
                + (nf + 2.0) / 4.0 * (nf - 2.0).ln()
                + (nf - 1.0) / (nf - 2.0) * ((m - k + 1) as f64).ln()
                - nf / (nf - 2.0) * a(k),
        );
        // Single final division so the k = 1 entry is exactly zero.
        t.z_rad.push((2.0 * a(k) - ((m - k + 1) as f64).ln()) / (nf - 2.0));
    }
    for k in 1..m {
        t.d_rad.push(((m - k) as f64).ln() / nf + 2.0 / (nf - 2.0) * a(k));
    }
    if m >= 2 {
        let ln_m1 = ((m - 1) as f64).ln();
        let b = |k: usize| lg_m - ln_gamma_usize(m - k + 1);
        for k in 1..=m {
            t.dt_val.push(ln_gn + (0.5 - 1.0 / nf) * ln_m1 - b(k));
        }
        for k in 2..m {
            t.dt_rad.push(-ln_m1 / nf + ((m - k) as f64).ln() / nf + 2.0 / (nf - 2.0) * b(k));
        }
        for k in 1..m {
            t.zt_slo.push(
                (nf - 2.0) / 4.0 * nf.ln()
                    + (nf + 2.0) / 4.0 * (nf - 2.0).ln()
                    + 0.5 * ln_m1
                    - ((m - k) as f64).ln() / (nf - 2.0)
                    - nf / (nf - 2.0) * b(k),
            );
            t.zt_rad.push(-ln_m1 / nf + ((m - k) as f64).ln() / (nf - 2.0) + 2.0 / (nf - 2.0) * b(k));
        }
    }
    t
}

/// One induction step Dirichlet(m-1) -> Neumann(m): rescaling by the
/// outermost zero radius of the grown solution.
fn neumann_step(n: u32, m: usize, prev: &LogTables) -> LogTables {
    let nf = n as f64;
    let ln_gn = (nf * (nf - 2.0)).ln() * (nf - 2.0) / 4.0;
    let mut t = prev.clone();
    t.dt_val.clear();
    t.dt_rad.clear();
    t.zt_slo.clear();
    t.zt_rad.clear();
    // New outermost zero radius in the previous normalization.
    let ln_zt1 = 4.0 / (nf * (nf - 2.0)) * prev.z_slo[0]
        - (nf + 2.0) / (nf * (nf - 2.0)) * (nf - 2.0).ln()
        - nf.ln() / nf;
    t.dt_val.push(ln_gn + (nf - 2.0) * (nf - 2.0) / 4.0 * ln_zt1);
    for k in 2..=m {
        t.dt_val.push(prev.d_val[k - 2] + (2.0 - nf) / 2.0 * ln_zt1);
    }
    for k in 2..m {
        t.dt_rad.push(ln_zt1 + prev.d_rad[k - 2]);
    }
    for k in 1..m {
        t.zt_slo.push(prev.z_slo[k - 1] - nf / 2.0 * ln_zt1);
    }
    t.zt_rad.push(ln_zt1);
    for k in 2..m {
        t.zt_rad.push(ln_zt1 + prev.z_rad[k - 1]);
    }
    t
}

/// One induction step Neumann(m) -> Dirichlet(m): rescaling by the new
/// outermost critical radius.
fn dirichlet_step(n: u32, m: usize, prev: &LogTables) -> LogTables {
    let nf = n as f64;
    let mut t = prev.clone();
    t.d_val.clear();
    t.d_rad.clear();
    t.z_slo.clear();
    t.z_rad.clear();
    let ln_nn2 = (nf * (nf - 2.0)).ln();
    let ln_sum = log_sum_exp(2.0 * nf / (nf - 2.0) * prev.dt_val[0], nf / 2.0 * ln_nn2);
    let ln_d1 = (1.0 / (2.0 - nf) - 1.0) * ln_nn2
        + 2.0 / (nf - 2.0) * prev.dt_val[0]
        + ln_sum / (nf - 2.0);
    t.d_val.push(prev.dt_val[0] + (1.0 - nf / 2.0) * ln_d1);
    for k in 2..=m {
        t.d_val.push((2.0 - nf) / 2.0 * ln_d1 + prev.dt_val[k - 1]);
    }
    t.d_rad.push(ln_d1);
    for k in 2..m {
        t.d_rad.push(ln_d1 + prev.dt_rad[k - 2]);
    }
    t.z_slo.push(
        nf / 2.0 * (nf - 2.0).ln() + (nf / 2.0 - 1.0) * nf.ln() + (nf / 2.0 - 1.0) * ln_d1
            - prev.dt_val[0],
    );
    for k in 2..=m {
        t.z_slo.push(-nf / 2.0 * ln_d1 + prev.zt_slo[k - 2]);
    }
    t.z_rad.push(0.0);
    for k in 2..=m {
        t.z_rad.push(ln_d1 + prev.zt_rad[k - 2]);
    }
    t
}

impl ConstantsTable {
    /// Closed-form table. `m >= 1`; the Neumann families are filled only
    /// for `m >= 2`.
    pub fn closed_form(n: u32, m: usize) -> Result<Self> {
        check_dimension(n)?;
        if m < 1 {
            return Err(Error::IndexError { family: "nodal count", k: m, lo: 1, hi: usize::MAX });
        }
        let logs = closed_form_logs(n, m);
        let kap = kappa(n)?;
        // Closed-form bubble heights directly from the gamma formulas.
        let ln_kap = kap.ln();
        let ln_m = (m as f64).ln();
        let lg_m = ln_gamma_usize(m);
        let nf = n as f64;
        let mut alpha = Vec::with_capacity(m + 1);
        for k in 0..=m {
            alpha.push(
                (ln_gamma_usize(m - k + 1) - 0.5 * ln_m - lg_m + (0.5 - k as f64) * ln_kap).exp(),
            );
        }
        let mut beta = Vec::new();
        if m >= 2 {
            let pref = (nf - 2.0) / (2.0 * nf) * ((m - 1) as f64).ln()
                + 0.5 * ln_m
                + (nf - 1.0) / nf * ln_kap;
            for a in alpha.iter().skip(1) {
                beta.push((pref + a.ln()).exp());
            }
        }
        let whole_space = whole_space_constants(n, m)?;
        Ok(Self::materialize(n, m, kap, logs, alpha, beta, whole_space))
    }

    fn materialize(
        n: u32,
        m: usize,
        kap: f64,
        logs: LogTables,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        whole_space: WholeSpaceLimits,
    ) -> Self {
        let e = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        ConstantsTable {
            n,
            m,
            kappa: kap,
            gamma_n: gamma_n(n),
            dir_crit_value: e(&logs.d_val),
            dir_crit_radius: e(&logs.d_rad),
            dir_zero_slope: e(&logs.z_slo),
            dir_zero_radius: e(&logs.z_rad),
            neu_crit_value: e(&logs.dt_val),
            neu_crit_radius: e(&logs.dt_rad),
            neu_zero_slope: e(&logs.zt_slo),
            neu_zero_radius: e(&logs.zt_rad),
            alpha,
            beta,
            whole_space,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    pub fn whole_space(&self) -> &WholeSpaceLimits {
        &self.whole_space
    }

    fn fetch(family: &'static str, v: &[f64], k: usize, lo: usize, hi: usize) -> Result<f64> {
        if k < lo || k > hi {
            return Err(Error::IndexError { family, k, lo, hi });
        }
        Ok(v[k - lo])
    }

    /// Limit of `|u(delta_k)| (kappa eps)^{(2k-1)/2}`, Dirichlet.
    pub fn dirichlet_crit_value(&self, k: usize) -> Result<f64> {
        Self::fetch("dirichlet crit value", &self.dir_crit_value, k, 1, self.m)
    }

    /// Limit of `delta_k (kappa eps)^{-2(kn-1)/(n(n-2))}`, Dirichlet,
    /// `k <= m-1`.
    pub fn dirichlet_crit_radius(&self, k: usize) -> Result<f64> {
        Self::fetch("dirichlet crit radius", &self.dir_crit_radius, k, 1, self.m.saturating_sub(1))
    }

    /// Limit of `|u'(rho_k)| (kappa eps)^{(2kn-3n+2)/(2(n-2))}`, Dirichlet.
    pub fn dirichlet_zero_slope(&self, k: usize) -> Result<f64> {
        Self::fetch("dirichlet zero slope", &self.dir_zero_slope, k, 1, self.m)
    }

    /// Limit of `rho_k (kappa eps)^{-2(k-1)/(n-2)}`, Dirichlet. The `k = 1`
    /// entry is exactly 1: `rho_1 = 1` is the boundary zero.
    pub fn dirichlet_zero_radius(&self, k: usize) -> Result<f64> {
        Self::fetch("dirichlet zero radius", &self.dir_zero_radius, k, 1, self.m)
    }

    /// Limit of `|u(delta_k)| (kappa eps)^{(2kn-3n+2)/(2n)}`, Neumann.
    pub fn neumann_crit_value(&self, k: usize) -> Result<f64> {
        if self.m < 2 {
            return Err(Error::IndexError { family: "neumann crit value", k, lo: 1, hi: 0 });
        }
        Self::fetch("neumann crit value", &self.neu_crit_value, k, 1, self.m)
    }

    /// Limit of `delta_k (kappa eps)^{-2(k-1)/(n-2)}`, Neumann,
    /// `k <= m-1`. The `k = 1` entry is exactly 1 (the boundary).
    pub fn neumann_crit_radius(&self, k: usize) -> Result<f64> {
        if k == 1 && self.m >= 2 {
            return Ok(1.0);
        }
        Self::fetch("neumann crit radius", &self.neu_crit_radius, k, 2, self.m.saturating_sub(1))
    }

    /// Limit of `|u'(rho_k)| (kappa eps)^{(2kn-3n+4)/(2(n-2))}`, Neumann,
    /// `k <= m-1`.
    pub fn neumann_zero_slope(&self, k: usize) -> Result<f64> {
        Self::fetch("neumann zero slope", &self.neu_zero_slope, k, 1, self.m.saturating_sub(1))
    }

    /// Limit of `rho_k (kappa eps)^{-(2kn-2n+2)/(n(n-2))}`, Neumann,
    /// `k <= m-1`.
    pub fn neumann_zero_radius(&self, k: usize) -> Result<f64> {
        Self::fetch("neumann zero radius", &self.neu_zero_radius, k, 1, self.m.saturating_sub(1))
    }

    /// Bubble-height coefficient `alpha_k`, `k in 0..=m` (Dirichlet tower).
    pub fn alpha(&self, k: usize) -> Result<f64> {
        if k > self.m {
            return Err(Error::IndexError { family: "alpha", k, lo: 0, hi: self.m });
        }
        Ok(self.alpha[k])
    }

    /// Bubble-height coefficient `beta_k`, `k in 1..=m` (Neumann tower),
    /// defined for `m >= 2`.
    pub fn beta(&self, k: usize) -> Result<f64> {
        if self.m < 2 || k < 1 || k > self.m {
            return Err(Error::IndexError { family: "beta", k, lo: 1, hi: self.m });
        }
        Ok(self.beta[k - 1])
    }
}

/// Closed-form table for the Dirichlet problem with `m` nodal regions.
pub fn dirichlet_constants(n: u32, m: usize) -> Result<ConstantsTable> {
    ConstantsTable::closed_form(n, m)
}

/// Closed-form table for the Neumann problem with `m` nodal regions
/// (`m >= 2`).
pub fn neumann_constants(n: u32, m: usize) -> Result<ConstantsTable> {
    if m < 2 {
        return Err(Error::InvalidParams(format!(
            "Neumann table needs m >= 2 nodal regions, got {m}"
        )));
    }
    ConstantsTable::closed_form(n, m)
}

/// Gamma-free route: build the tables for every `m <= m_max` by the
/// alternating induction from the one-region base case. Shares only
/// elementary arithmetic with the closed forms, so agreement between the
/// two routes validates both.
pub fn constants_via_recurrence(n: u32, m_max: usize) -> Result<Vec<ConstantsTable>> {
    check_dimension(n)?;
    if m_max < 1 {
        return Err(Error::IndexError { family: "nodal count", k: m_max, lo: 1, hi: usize::MAX });
    }
    let nf = n as f64;
    let kap = kappa(n)?;
    let ln_kap = kap.ln();
    let ln_gn = (nf * (nf - 2.0)).ln() * (nf - 2.0) / 4.0;

    // Base case: one nodal region, boundary zero only.
    let mut base = LogTables::empty();
    base.d_val.push(ln_gn);
    base.z_slo.push((nf - 2.0) / 4.0 * nf.ln() + (nf + 2.0) / 4.0 * (nf - 2.0).ln());
    base.z_rad.push(0.0);

    let mut log_tables: Vec<LogTables> = vec![base];
    for m in 2..=m_max {
        let after_neumann = neumann_step(n, m, &log_tables[m - 2]);
        let full = dirichlet_step(n, m, &after_neumann);
        log_tables.push(full);
    }

    let mut out = Vec::with_capacity(m_max);
    for (idx, logs) in log_tables.iter().enumerate() {
        let m = idx + 1;
        let ln_m = (m as f64).ln();
        // Bubble heights from the table itself: the gamma ratio inside
        // alpha_k equals the k-th crit-value limit divided by gamma_n.
        let mut alpha = Vec::with_capacity(m + 1);
        alpha.push((0.5 * ln_m + 0.5 * ln_kap).exp());
        for k in 1..=m {
            alpha.push((logs.d_val[k - 1] - ln_gn + (0.5 - k as f64) * ln_kap).exp());
        }
        let mut beta = Vec::new();
        if m >= 2 {
            let pref = (nf - 2.0) / (2.0 * nf) * ((m - 1) as f64).ln()
                + 0.5 * ln_m
                + (nf - 1.0) / nf * ln_kap;
            for k in 1..=m {
                beta.push((pref + logs.d_val[k - 1] - ln_gn + (0.5 - k as f64) * ln_kap).exp());
            }
        }
        // Whole-space limits from the tables: the m-th zero limit is the
        // outermost Dirichlet crit-value limit to the power 2/(n-2), and
        // similarly for the others.
        let ws_zero_radius = (2.0 / (nf - 2.0) * logs.d_val[m - 1]).exp();
        let ws_zero_slope = (logs.z_slo[0] - nf / (nf - 2.0) * logs.d_val[m - 1]).exp();
        let (ws_cr, ws_cv) = if m >= 2 {
            (
                Some((2.0 / (nf - 2.0) * logs.dt_val[m - 1]).exp()),
                Some((logs.dt_val[0] - logs.dt_val[m - 1]).exp()),
            )
        } else {
            (None, None)
        };
        let whole_space = WholeSpaceLimits {
            zero_radius: ws_zero_radius,
            zero_slope: ws_zero_slope,
            crit_radius: ws_cr,
            crit_value: ws_cv,
        };
        out.push(ConstantsTable::materialize(n, m, kap, logs.clone(), alpha, beta, whole_space));
    }
    Ok(out)
}

/// The limit-table entry a scaled quantity converges to, addressed by
/// boundary condition and feature family. Used by the sweep drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitFamily {
    /// `|u(delta_k)|` (ball) or `|w(s_k)|` (whole space).
    CritValue,
    /// `delta_k` or `s_k`.
    CritRadius,
    /// `|u'(rho_k)|` or `|w'(r_k)|`.
    ZeroSlope,
    /// `rho_k` or `r_k`.
    ZeroRadius,
}

impl std::fmt::Display for LimitFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LimitFamily::CritValue => "crit_value",
            LimitFamily::CritRadius => "crit_radius",
            LimitFamily::ZeroSlope => "zero_slope",
            LimitFamily::ZeroRadius => "zero_radius",
        };
        write!(f, "{s}")
    }
}

impl ConstantsTable {
    /// Largest relative deviation between two tables for the same
    /// `(n, m)` across every family entry, the bubble coefficients, and
    /// the whole-space limits; cross-validates construction routes.
    pub fn max_relative_deviation(&self, other: &ConstantsTable) -> Result<f64> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::InvalidParams(format!(
                "comparing tables for (n = {}, m = {}) and (n = {}, m = {})",
                self.n, self.m, other.n, other.m
            )));
        }
        fn dev(a: f64, b: f64) -> f64 {
            (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        }
        let pairs = [
            (&self.dir_crit_value, &other.dir_crit_value),
            (&self.dir_crit_radius, &other.dir_crit_radius),
            (&self.dir_zero_slope, &other.dir_zero_slope),
            (&self.dir_zero_radius, &other.dir_zero_radius),
            (&self.neu_crit_value, &other.neu_crit_value),
            (&self.neu_crit_radius, &other.neu_crit_radius),
            (&self.neu_zero_slope, &other.neu_zero_slope),
            (&self.neu_zero_radius, &other.neu_zero_radius),
            (&self.alpha, &other.alpha),
            (&self.beta, &other.beta),
        ];
        let mut worst = 0.0_f64;
        for (a, b) in pairs {
            if a.len() != b.len() {
                return Err(Error::InvalidParams(
                    "tables carry different family lengths".into(),
                ));
            }
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max(dev(*x, *y));
            }
        }
        worst = worst.max(dev(self.kappa, other.kappa));
        worst = worst.max(dev(self.gamma_n, other.gamma_n));
        worst = worst.max(dev(self.whole_space.zero_radius, other.whole_space.zero_radius));
        worst = worst.max(dev(self.whole_space.zero_slope, other.whole_space.zero_slope));
        match (self.whole_space.crit_radius, other.whole_space.crit_radius) {
            (Some(a), Some(b)) => worst = worst.max(dev(a, b)),
            (None, None) => {}
            _ => return Err(Error::InvalidParams("tables disagree on crit radius presence".into())),
        }
        match (self.whole_space.crit_value, other.whole_space.crit_value) {
            (Some(a), Some(b)) => worst = worst.max(dev(a, b)),
            (None, None) => {}
            _ => return Err(Error::InvalidParams("tables disagree on crit value presence".into())),
        }
        Ok(worst)
    }

    /// Table lookup by family for either ball normalization.
    pub fn limit(&self, bc: Bc, family: LimitFamily, k: usize) -> Result<f64> {
        match (bc, family) {
            (Bc::Dirichlet, LimitFamily::CritValue) => self.dirichlet_crit_value(k),
            (Bc::Dirichlet, LimitFamily::CritRadius) => self.dirichlet_crit_radius(k),
            (Bc::Dirichlet, LimitFamily::ZeroSlope) => self.dirichlet_zero_slope(k),
            (Bc::Dirichlet, LimitFamily::ZeroRadius) => self.dirichlet_zero_radius(k),
            (Bc::Neumann, LimitFamily::CritValue) => self.neumann_crit_value(k),
            (Bc::Neumann, LimitFamily::CritRadius) => self.neumann_crit_radius(k),
            (Bc::Neumann, LimitFamily::ZeroSlope) => self.neumann_zero_slope(k),
            (Bc::Neumann, LimitFamily::ZeroRadius) => self.neumann_zero_radius(k),
            (Bc::WholeSpace, family) => {
                let ws = whole_space_constants(self.n, k)?;
                match family {
                    LimitFamily::ZeroRadius => Ok(ws.zero_radius),
                    LimitFamily::ZeroSlope => Ok(ws.zero_slope),
                    LimitFamily::CritRadius => ws.crit_radius.ok_or(Error::IndexError {
                        family: "whole-space crit radius",
                        k,
                        lo: 2,
                        hi: usize::MAX,
                    }),
                    LimitFamily::CritValue => ws.crit_value.ok_or(Error::IndexError {
                        family: "whole-space crit value",
                        k,
                        lo: 2,
                        hi: usize::MAX,
                    }),
                }
            }
        }
    }
}

/// `int_0^inf (1 + t^2/(n(n-2)))^{-y} t^{n-1} dt` by adaptive quadrature
/// after the substitution `t = sqrt(n(n-2)) tan(theta)`, which maps the
/// half line to `[0, pi/2]` with a smooth integrand for `y > n/2`.
pub fn decay_moment_quadrature(n: u32, y: f64) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    if y <= nf / 2.0 || y.is_nan() {
        return Err(Error::DomainError(format!("decay moment diverges: y = {y} <= n/2")));
    }
    let c = nf * (nf - 2.0);
    let pow = 2.0 * y - nf - 1.0;
    let scale = c.powf(nf / 2.0);
    quad::integrate(
        |th: f64| {
            let (s, cs) = th.sin_cos();
            scale * s.powi(n as i32 - 1) * cs.powf(pow)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-10,
        0.0,
    )
}

/// Same moment in closed form: `(n(n-2))^{n/2} B(n/2, y - n/2) / 2`.
pub fn decay_moment_closed_form(n: u32, y: f64) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    if y <= nf / 2.0 || y.is_nan() {
        return Err(Error::DomainError(format!("decay moment diverges: y = {y} <= n/2")));
    }
    let c = nf * (nf - 2.0);
    Ok(0.5 * c.powf(nf / 2.0) * beta_function(nf / 2.0, y - nf / 2.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn kappa_known_values() {
        assert!(rel(kappa(3).unwrap(), PI / 32.0) < 1e-14);
        assert!(rel(kappa(4).unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(rel(kappa(6).unwrap(), 1.0 / 30.0) < 1e-14);
        assert!(kappa(2).is_err());
    }

    #[test]
    fn base_case_values() {
        // One nodal region in n = 3: both limits are 3^{1/4}.
        let t = dirichlet_constants(3, 1).unwrap();
        let expect = 3.0_f64.powf(0.25);
        assert!(rel(t.dirichlet_crit_value(1).unwrap(), expect) < 1e-14);
        assert!(rel(t.dirichlet_zero_slope(1).unwrap(), expect) < 1e-14);
        assert_eq!(t.dirichlet_zero_radius(1).unwrap(), 1.0);
        // General dimension: value limit is gamma_n, slope limit is
        // n^{(n-2)/4} (n-2)^{(n+2)/4}.
        for n in 3..=8 {
            let t = dirichlet_constants(n, 1).unwrap();
            let nf = n as f64;
            assert!(rel(t.dirichlet_crit_value(1).unwrap(), gamma_n(n)) < 1e-14);
            let z11 = nf.powf((nf - 2.0) / 4.0) * (nf - 2.0).powf((nf + 2.0) / 4.0);
            assert!(rel(t.dirichlet_zero_slope(1).unwrap(), z11) < 1e-14);
        }
    }

    #[test]
    fn boundary_zero_radius_is_exactly_one() {
        for n in 3..=8 {
            for m in 1..=8 {
                let t = dirichlet_constants(n, m).unwrap();
                assert_eq!(t.dirichlet_zero_radius(1).unwrap(), 1.0, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn neumann_slope_limit_dimension_split() {
        // k = 1 slope limit: 3^{1/4} (m-1)^{-1/2} in n = 3; the constant
        // 4 sqrt(2) independently of m in n = 4. For n >= 5 the limit
        // constant stays finite and positive; the raw boundary slope tends
        // to 0 there because its rate exponent (4-n)/(2(n-2)) is negative,
        // which the sweep layer checks on actual solutions.
        for m in 2..=8 {
            let t3 = neumann_constants(3, m).unwrap();
            let want = 3.0_f64.powf(0.25) / ((m - 1) as f64).sqrt();
            assert!(rel(t3.neumann_zero_slope(1).unwrap(), want) < 1e-13);
            let t4 = neumann_constants(4, m).unwrap();
            assert!(rel(t4.neumann_zero_slope(1).unwrap(), 4.0 * 2.0_f64.sqrt()) < 1e-13);
            let t5 = neumann_constants(5, m).unwrap();
            let v = t5.neumann_zero_slope(1).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn neumann_crit_value_small_case() {
        // m = 2, k = 1, n = 3: (m-1)^{1/2-1/n} = 1 so the value is 3^{1/4}.
        let t = neumann_constants(3, 2).unwrap();
        assert!(rel(t.neumann_crit_value(1).unwrap(), 3.0_f64.powf(0.25)) < 1e-14);
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for n in 3..=8u32 {
            let tables = constants_via_recurrence(n, 8).unwrap();
            for (idx, rec) in tables.iter().enumerate() {
                let m = idx + 1;
                let cf = dirichlet_constants(n, m).unwrap();
                let pairs: Vec<(&Vec<f64>, &Vec<f64>, &str)> = vec![
                    (&rec.dir_crit_value, &cf.dir_crit_value, "dir value"),
                    (&rec.dir_crit_radius, &cf.dir_crit_radius, "dir crit radius"),
                    (&rec.dir_zero_slope, &cf.dir_zero_slope, "dir slope"),
                    (&rec.dir_zero_radius, &cf.dir_zero_radius, "dir zero radius"),
                    (&rec.neu_crit_value, &cf.neu_crit_value, "neu value"),
                    (&rec.neu_crit_radius, &cf.neu_crit_radius, "neu crit radius"),
                    (&rec.neu_zero_slope, &cf.neu_zero_slope, "neu slope"),
                    (&rec.neu_zero_radius, &cf.neu_zero_radius, "neu zero radius"),
                    (&rec.alpha, &cf.alpha, "alpha"),
                    (&rec.beta, &cf.beta, "beta"),
                ];
                for (a, b, label) in pairs {
                    assert_eq!(a.len(), b.len(), "n={n} m={m} {label} length");
                    for (x, y) in a.iter().zip(b) {
                        assert!(
                            rel(*x, *y) < 1e-12,
                            "n={n} m={m} {label}: {x} vs {y} (rel {})",
                            rel(*x, *y)
                        );
                    }
                }
                assert!(rel(rec.whole_space.zero_radius, cf.whole_space.zero_radius) < 1e-12);
                assert!(rel(rec.whole_space.zero_slope, cf.whole_space.zero_slope) < 1e-12);
                if m >= 2 {
                    assert!(
                        rel(
                            rec.whole_space.crit_radius.unwrap(),
                            cf.whole_space.crit_radius.unwrap()
                        ) < 1e-12
                    );
                    assert!(
                        rel(
                            rec.whole_space.crit_value.unwrap(),
                            cf.whole_space.crit_value.unwrap()
                        ) < 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn max_deviation_compares_routes() {
        let cf = dirichlet_constants(3, 4).unwrap();
        let rec = constants_via_recurrence(3, 4).unwrap().pop().unwrap();
        assert!(cf.max_relative_deviation(&rec).unwrap() < 1e-12);
        assert_eq!(cf.max_relative_deviation(&cf.clone()).unwrap(), 0.0);
        let other = dirichlet_constants(3, 2).unwrap();
        assert!(cf.max_relative_deviation(&other).is_err());
    }

    #[test]
    fn recurrence_base_case_is_exact() {
        let tables = constants_via_recurrence(3, 1).unwrap();
        let cf = dirichlet_constants(3, 1).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].dirichlet_crit_value(1).unwrap(), cf.dirichlet_crit_value(1).unwrap());
        assert_eq!(tables[0].dirichlet_zero_slope(1).unwrap(), cf.dirichlet_zero_slope(1).unwrap());
    }

    #[test]
    fn first_rescaling_radius_is_one_for_two_regions_n3() {
        // The first Neumann-step rescaling radius in n = 3, m = 2 is
        // (m-1)^{2/(n(n-2))} = 1; so the outermost Neumann zero-radius
        // limit equals 1 there.
        let t = neumann_constants(3, 2).unwrap();
        assert!(rel(t.neumann_zero_radius(1).unwrap(), 1.0) < 1e-14);
    }

    #[test]
    fn origin_value_identity() {
        // The squared one-region value limit over kappa equals
        // (n(n-2))^{(n-2)/2} * 4 Gamma(n) / ((n-2) Gamma(n/2)^2).
        for n in 3..=8u32 {
            let t = dirichlet_constants(n, 1).unwrap();
            let nf = n as f64;
            let d11 = t.dirichlet_crit_value(1).unwrap();
            let lhs = d11 * d11 / t.kappa();
            let rhs = (nf * (nf - 2.0)).powf((nf - 2.0) / 2.0) * 4.0
                * (log_gamma(nf).unwrap() - 2.0 * log_gamma(nf / 2.0).unwrap()).exp()
                / (nf - 2.0);
            assert!(rel(lhs, rhs) < 1e-12, "n={n}");
        }
        // n = 3 value: 32 sqrt(3) / pi.
        let t = dirichlet_constants(3, 1).unwrap();
        let lhs = t.dirichlet_crit_value(1).unwrap().powi(2) / t.kappa();
        assert!(rel(lhs, 32.0 * 3.0_f64.sqrt() / PI) < 1e-13);
    }

    #[test]
    fn bubble_height_coefficients() {
        // m = 1: alpha_1 = kappa^{-1/2}.
        let t = dirichlet_constants(3, 1).unwrap();
        assert!(rel(t.alpha(1).unwrap(), (32.0 / PI).sqrt()) < 1e-13);
        // alpha_0 = m^{1/2} kappa^{1/2}.
        let t = dirichlet_constants(3, 2).unwrap();
        assert!(rel(t.alpha(0).unwrap(), 2.0_f64.sqrt() * (PI / 32.0).sqrt()) < 1e-13);
        // beta_1 = (m-1)^{(n-2)/(2n)} kappa^{(n-2)/(2n)}.
        for n in 3..=6u32 {
            for m in 2..=5 {
                let t = dirichlet_constants(n, m).unwrap();
                let nf = n as f64;
                let e = (nf - 2.0) / (2.0 * nf);
                let want = ((m - 1) as f64).powf(e) * t.kappa().powf(e);
                assert!(rel(t.beta(1).unwrap(), want) < 1e-13, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn beta_over_alpha_is_index_independent() {
        for n in 3..=6u32 {
            for m in 2..=6 {
                let t = dirichlet_constants(n, m).unwrap();
                let nf = n as f64;
                let want = ((m - 1) as f64).powf((nf - 2.0) / (2.0 * nf))
                    * (m as f64).sqrt()
                    * t.kappa().powf((nf - 1.0) / nf);
                for k in 1..=m {
                    let ratio = t.beta(k).unwrap() / t.alpha(k).unwrap();
                    assert!(rel(ratio, want) < 1e-12, "n={n} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn all_entries_positive() {
        for n in 3..=8u32 {
            for m in 1..=8usize {
                let t = dirichlet_constants(n, m).unwrap();
                let all = [
                    &t.dir_crit_value,
                    &t.dir_crit_radius,
                    &t.dir_zero_slope,
                    &t.dir_zero_radius,
                    &t.neu_crit_value,
                    &t.neu_crit_radius,
                    &t.neu_zero_slope,
                    &t.neu_zero_radius,
                    &t.alpha,
                    &t.beta,
                ];
                for v in all {
                    for x in v {
                        assert!(*x > 0.0 && x.is_finite());
                    }
                }
            }
        }
    }

    #[test]
    fn whole_space_examples() {
        // m = 1: zero radius limit sqrt(n(n-2)).
        for n in 3..=6u32 {
            let ws = whole_space_constants(n, 1).unwrap();
            let nf = n as f64;
            assert!(rel(ws.zero_radius, (nf * (nf - 2.0)).sqrt()) < 1e-14);
            assert!(ws.crit_radius.is_none());
        }
        // m = 2: crit value limit Gamma(2) = 1; slope limit in n = 3 is
        // (1/3)^{1/2} * 2^2 * 1 = 4/sqrt(3).
        let ws = whole_space_constants(3, 2).unwrap();
        assert!(rel(ws.crit_value.unwrap(), 1.0) < 1e-14);
        assert!(rel(ws.zero_slope, 4.0 / 3.0_f64.sqrt()) < 1e-13);
    }

    #[test]
    fn index_errors_at_family_boundaries() {
        let t = dirichlet_constants(3, 3).unwrap();
        assert!(t.dirichlet_crit_value(0).is_err());
        assert!(t.dirichlet_crit_value(4).is_err());
        assert!(t.dirichlet_crit_radius(3).is_err());
        assert!(t.neumann_zero_slope(3).is_err());
        assert!(t.neumann_crit_radius(3).is_err());
        assert!(t.alpha(4).is_err());
        assert!(t.beta(0).is_err());
        let t1 = dirichlet_constants(3, 1).unwrap();
        assert!(t1.neumann_crit_value(1).is_err());
        assert!(t1.beta(1).is_err());
        assert!(neumann_constants(3, 1).is_err());
    }

    #[test]
    fn decay_moment_quadrature_matches_closed_form() {
        for n in 3..=6u32 {
            let nf = n as f64;
            for y in [nf, nf * nf / (nf - 2.0)] {
                let q = decay_moment_quadrature(n, y).unwrap();
                let c = decay_moment_closed_form(n, y).unwrap();
                assert!(rel(q, c) < 1e-8, "n={n} y={y}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn decay_moment_value_n3() {
        // n = 3, y = 3: the moment is 3 sqrt(3) pi / 16.
        let v = decay_moment_closed_form(3, 3.0).unwrap();
        assert!(rel(v, 3.0 * 3.0_f64.sqrt() * PI / 16.0) < 1e-13);
        assert!((v - 1.020_262_2).abs() < 1e-6);
    }

    #[test]
    fn decay_moment_domain_errors() {
        assert!(decay_moment_quadrature(3, 1.5).is_err());
        assert!(decay_moment_closed_form(4, 2.0).is_err());
    }

    #[test]
    fn limit_lookup_dispatch() {
        let t = dirichlet_constants(3, 2).unwrap();
        assert_eq!(
            t.limit(Bc::Dirichlet, LimitFamily::CritValue, 1).unwrap(),
            t.dirichlet_crit_value(1).unwrap()
        );
        assert_eq!(
            t.limit(Bc::Neumann, LimitFamily::ZeroSlope, 1).unwrap(),
            t.neumann_zero_slope(1).unwrap()
        );
        let ws = whole_space_constants(3, 2).unwrap();
        assert_eq!(t.limit(Bc::WholeSpace, LimitFamily::CritValue, 2).unwrap(), ws.crit_value.unwrap());
        assert!(t.limit(Bc::WholeSpace, LimitFamily::CritValue, 1).is_err());
    }
}
