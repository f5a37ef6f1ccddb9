//! Differentiator right-hand sides.
//!
//! All four algorithms share the structure
//!
//! ```text
//! w   = z0 - y(t)
//! z0' = -H1(w, t) + z1
//! z1' = -H2(w, t)
//! ```
//!
//! and differ only in the gain laws `H1`, `H2`:
//!
//! * [`Algorithm::Levant`]: time-varying gains driven by the bound `L(t - t0)`.
//! * [`Algorithm::Predefined`]: the Levant laws re-timed by the TBG gain so that
//!   the error vanishes before `t0 + Tc`, then the stationary Levant laws.
//! * [`Algorithm::Seeber`]: autonomous fixed-time laws for constant `L`.
//! * [`Algorithm::Holloway`]: linear prescribed-time laws, valid for `y'' = 0`.

use std::fmt;
use std::str::FromStr;

use crate::bounds::{transformed_bound, TransformedBound};
use crate::error::{Error, Result};
use crate::math::{is_hurwitz_quadratic, sign, spow, TbgParams};
use crate::signal::BoundFunction;

/// Constants of the Levant gain laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevantParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub mu0: f64,
    pub mu1: f64,
}

impl Default for LevantParams {
    fn default() -> Self {
        Self {
            lambda0: 1.1,
            lambda1: 1.5,
            mu0: 2.0,
            mu1: 3.0,
        }
    }
}

impl LevantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0 && self.lambda1 > 0.0) {
            return Err(Error::Config(format!(
                "lambda0 = {}, lambda1 = {} must be positive",
                self.lambda0, self.lambda1
            )));
        }
        if !is_hurwitz_quadratic(self.mu0, self.mu1) {
            return Err(Error::Config(format!(
                "s^2 + {} s + {} is not Hurwitz",
                self.mu1,
                self.mu0 * self.mu1
            )));
        }
        Ok(())
    }

    /// Only the default constants carry a convergence guarantee from the
    /// literature; other admissible values are accepted but unverified.
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// Differentiator state: `z0` estimates `y`, `z1` estimates `y'`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiffState {
    pub z0: f64,
    pub z1: f64,
}

impl DiffState {
    pub fn new(z0: f64, z1: f64) -> Self {
        Self { z0, z1 }
    }

    pub fn is_finite(&self) -> bool {
        self.z0.is_finite() && self.z1.is_finite()
    }
}

/// Gains of the autonomous fixed-time baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeeberGains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl SeeberGains {
    /// `k1 = 4 sqrt(L)`, `k2 = 2 L`, `k3 = 9.8 / (Tc sqrt(L))` for a constant bound `L`.
    pub fn from_bound(l: f64, tc: f64) -> Result<Self> {
        if !(l > 0.0) || !(tc > 0.0) {
            return Err(Error::Config(format!("Seeber gains need L > 0 and Tc > 0 (got {l}, {tc})")));
        }
        Ok(Self {
            k1: 4.0 * l.sqrt(),
            k2: 2.0 * l,
            k3: 9.8 / (tc * l.sqrt()),
        })
    }
}

/// `nu1(w) = |w|^1/2 sign(w) + k3^2 |w|^3/2 sign(w)`.
pub fn nu1(w: f64, k3: f64) -> f64 {
    spow(w, 0.5) + k3 * k3 * spow(w, 1.5)
}

/// `nu2(w) = sign(w) + 4 k3^2 w + k3^4 |w|^2 sign(w)`.
pub fn nu2(w: f64, k3: f64) -> f64 {
    let k32 = k3 * k3;
    sign(w) + 4.0 * k32 * w + k32 * k32 * spow(w, 2.0)
}

/// Parameters of the linear prescribed-time baseline. Its gain uses
/// `kappa = 1 / (alpha (Tc - (t - t0)))` with its own `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HollowayParams {
    pub l1: f64,
    pub l2: f64,
    pub m: f64,
    pub alpha: f64,
}

impl Default for HollowayParams {
    fn default() -> Self {
        Self {
            l1: 1.0,
            l2: 1.0,
            m: 1.0,
            alpha: 1.0,
        }
    }
}

impl HollowayParams {
    /// `g1 = l1 + 2 (m + 2) kappa`.
    pub fn g1(&self, kappa: f64) -> f64 {
        self.l1 + 2.0 * (self.m + 2.0) * kappa
    }

    /// `g2 = l2 + l1 (m + 2) kappa + (m + 1)(m + 2) kappa^2`.
    pub fn g2(&self, kappa: f64) -> f64 {
        self.l2 + self.l1 * (self.m + 2.0) * kappa + (self.m + 1.0) * (self.m + 2.0) * kappa * kappa
    }

    pub fn validate(&self) -> Result<()> {
        if self.l1 > 0.0 && self.l2 > 0.0 && self.m > 0.0 && self.alpha > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("Holloway parameters must be positive: {self:?}")))
        }
    }
}

/// Levant law `phi1(w; M, L) = lambda1 L^1/2 |w|^1/2 sign(w) + mu1 M w`.
pub fn phi1(w: f64, m: f64, l: f64, lp: &LevantParams) -> Result<f64> {
    check_lm("phi1", m, l)?;
    Ok(phi1_unchecked(w, m, l, lp))
}

/// Levant law `phi2(w; M, L) = lambda0 L sign(w) + lambda1 mu0 L^1/2 M |w|^1/2 sign(w) + mu0 mu1 M^2 w`.
pub fn phi2(w: f64, m: f64, l: f64, lp: &LevantParams) -> Result<f64> {
    check_lm("phi2", m, l)?;
    Ok(phi2_unchecked(w, m, l, lp))
}

fn check_lm(op: &'static str, m: f64, l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain(op, format!("L = {l} must be positive")));
    }
    if !(m >= 0.0) {
        return Err(Error::domain(op, format!("M = {m} must be >= 0")));
    }
    Ok(())
}

#[inline]
fn phi1_unchecked(w: f64, m: f64, l: f64, lp: &LevantParams) -> f64 {
    lp.lambda1 * l.sqrt() * spow(w, 0.5) + lp.mu1 * m * w
}

#[inline]
fn phi2_unchecked(w: f64, m: f64, l: f64, lp: &LevantParams) -> f64 {
    lp.lambda0 * l * sign(w) + lp.lambda1 * lp.mu0 * l.sqrt() * m * spow(w, 0.5) + lp.mu0 * lp.mu1 * m * m * w
}

/// When the predefined algorithm leaves its TBG branch and how baselines bound
/// their gain. Built by [`crate::sim::apply_gain_cap`]; the default switches
/// exactly at the deadline with no cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule {
    /// Elapsed time at which the TBG branch hands over to the stationary one.
    pub switch_elapsed: f64,
    /// Upper bound on the effective `kappa`, if any.
    pub kappa_max: Option<f64>,
}

impl GainSchedule {
    pub fn uncapped(tc: f64) -> Self {
        Self {
            switch_elapsed: tc,
            kappa_max: None,
        }
    }
}

/// Everything the gain laws need.
#[derive(Debug, Clone)]
pub struct GainConfig {
    pub tbg: TbgParams,
    /// Constant `Mt` bounding the logarithmic derivative of the transformed bound.
    pub script_m: f64,
    pub levant: LevantParams,
    /// `L(t - t0)` and `M` of the signal class.
    pub bound: BoundFunction,
    pub seeber: SeeberGains,
    pub holloway: HollowayParams,
    pub schedule: GainSchedule,
    transformed: TransformedBound,
}

impl GainConfig {
    /// Builds a configuration with default Levant constants, Seeber gains from
    /// `L(0)`, default Holloway parameters, and the uncapped schedule.
    pub fn new(tbg: TbgParams, script_m: f64, bound: BoundFunction) -> Result<Self> {
        tbg.validate()?;
        if !(script_m > 0.0) {
            return Err(Error::Config(format!("script M = {script_m} must be positive")));
        }
        let l0 = bound.l_checked(0.0)?;
        let seeber = SeeberGains::from_bound(l0, tbg.tc)?;
        let transformed = transformed_bound(&bound, tbg, script_m);
        Ok(Self {
            tbg,
            script_m,
            levant: LevantParams::default(),
            bound,
            seeber,
            holloway: HollowayParams::default(),
            schedule: GainSchedule::uncapped(tbg.tc),
            transformed,
        })
    }

    pub fn with_levant(mut self, lp: LevantParams) -> Result<Self> {
        lp.validate()?;
        self.levant = lp;
        Ok(self)
    }

    pub fn with_seeber(mut self, g: SeeberGains) -> Self {
        self.seeber = g;
        self
    }

    pub fn with_holloway(mut self, h: HollowayParams) -> Result<Self> {
        h.validate()?;
        self.holloway = h;
        Ok(self)
    }

    pub fn with_schedule(mut self, s: GainSchedule) -> Self {
        self.schedule = s;
        self
    }

    pub fn transformed(&self) -> &TransformedBound {
        &self.transformed
    }

    /// `M` of the signal class, used by the stationary branch.
    pub fn m(&self) -> f64 {
        self.bound.m()
    }

    /// Whether the predefined algorithm is on its TBG branch at time `t`.
    pub fn on_tbg_branch(&self, t: f64) -> bool {
        let elapsed = t - self.tbg.t0;
        elapsed < self.schedule.switch_elapsed.min(self.tbg.tc)
            && self
                .schedule
                .kappa_max
                .is_none_or(|kmax| self.tbg.gain_at_elapsed(elapsed).is_ok_and(|k| k <= kmax))
    }
}

/// Both TBG-branch laws at `(w, t)`; `Err(Singularity)` at or past the deadline.
///
/// `h1 = kappa (-alpha w + phi1(w; Mt, Lt(phi(t))))`,
/// `h2 = kappa^2 (alpha^2 w + phi2(w; Mt, Lt) - alpha phi1(w; Mt, Lt))`.
pub fn tbg_laws(w: f64, t: f64, cfg: &GainConfig) -> Result<(f64, f64)> {
    let kappa = cfg.tbg.gain_at_elapsed(t - cfg.tbg.t0)?;
    let tau = cfg.tbg.forward(t)?;
    let (c1, c2) = tbg_core(w, tau, cfg);
    Ok((kappa * c1, kappa * kappa * c2))
}

/// The `kappa`-free factors of the TBG-branch laws; they depend on `(w, tau)` only.
pub fn tbg_core(w: f64, tau: f64, cfg: &GainConfig) -> (f64, f64) {
    let alpha = cfg.tbg.alpha;
    let sl = cfg.transformed.value(tau);
    let p1 = phi1_unchecked(w, cfg.script_m, sl, &cfg.levant);
    let p2 = phi2_unchecked(w, cfg.script_m, sl, &cfg.levant);
    (-alpha * w + p1, alpha * alpha * w + p2 - alpha * p1)
}

/// Stationary Levant laws at `(w, t)`.
pub fn stationary_laws(w: f64, t: f64, cfg: &GainConfig) -> Result<(f64, f64)> {
    let l = cfg.bound.l_checked(t - cfg.tbg.t0)?;
    let m = cfg.m();
    Ok((phi1_unchecked(w, m, l, &cfg.levant), phi2_unchecked(w, m, l, &cfg.levant)))
}

/// `h1` of the predefined algorithm under the configured schedule.
pub fn h1(w: f64, t: f64, cfg: &GainConfig) -> Result<f64> {
    predefined_laws(w, t, cfg).map(|(a, _)| a)
}

/// `h2` of the predefined algorithm under the configured schedule.
pub fn h2(w: f64, t: f64, cfg: &GainConfig) -> Result<f64> {
    predefined_laws(w, t, cfg).map(|(_, b)| b)
}

pub fn predefined_laws(w: f64, t: f64, cfg: &GainConfig) -> Result<(f64, f64)> {
    if cfg.on_tbg_branch(t) {
        tbg_laws(w, t, cfg)
    } else {
        stationary_laws(w, t, cfg)
    }
}

/// Effective Holloway gain: `min(kappa, kappa_max)`; past the deadline only a
/// cap keeps it finite.
pub fn holloway_kappa(t: f64, cfg: &GainConfig) -> Result<f64> {
    let hp = TbgParams {
        t0: cfg.tbg.t0,
        tc: cfg.tbg.tc,
        alpha: cfg.holloway.alpha,
    };
    let elapsed = t - hp.t0;
    match cfg.schedule.kappa_max {
        Some(kmax) => match hp.gain_at_elapsed(elapsed) {
            Ok(k) => Ok(k.min(kmax)),
            Err(_) => Ok(kmax),
        },
        None => hp.gain_at_elapsed(elapsed),
    }
}

/// Differentiator variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Levant,
    Predefined,
    Seeber,
    Holloway,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Levant,
        Algorithm::Predefined,
        Algorithm::Seeber,
        Algorithm::Holloway,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Levant => "levant",
            Algorithm::Predefined => "predefined",
            Algorithm::Seeber => "seeber",
            Algorithm::Holloway => "holloway",
        }
    }

    /// Whether the gain law has a singularity at the deadline with nothing to
    /// switch to afterwards.
    pub fn needs_cap_past_deadline(self) -> bool {
        matches!(self, Algorithm::Holloway)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "levant" => Ok(Algorithm::Levant),
            "predefined" | "ours" => Ok(Algorithm::Predefined),
            "seeber" => Ok(Algorithm::Seeber),
            "holloway" => Ok(Algorithm::Holloway),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (known: levant, predefined, seeber, holloway)"
            ))),
        }
    }
}

/// Gain laws `(H1, H2)` of `alg` at residual `w` and time `t`.
pub fn gains(alg: Algorithm, w: f64, t: f64, cfg: &GainConfig) -> Result<(f64, f64)> {
    match alg {
        Algorithm::Levant => stationary_laws(w, t, cfg),
        Algorithm::Predefined => predefined_laws(w, t, cfg),
        Algorithm::Seeber => {
            let g = cfg.seeber;
            Ok((g.k1 * nu1(w, g.k3), g.k2 * nu2(w, g.k3)))
        }
        Algorithm::Holloway => {
            let k = holloway_kappa(t, cfg)?;
            Ok((cfg.holloway.g1(k) * w, cfg.holloway.g2(k) * w))
        }
    }
}

/// Right-hand side `(z0', z1')` of the differentiator.
pub fn rhs(alg: Algorithm, state: DiffState, y_meas: f64, t: f64, cfg: &GainConfig) -> Result<(f64, f64)> {
    let w = state.z0 - y_meas;
    let (a, b) = gains(alg, w, t, cfg)?;
    Ok((-a + state.z1, -b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal;
    use approx::assert_relative_eq;

    fn ex1_cfg() -> GainConfig {
        GainConfig::new(TbgParams::new(0.0, 1.0, 1.0).unwrap(), 6.0, signal::linear().bound).unwrap()
    }

    #[test]
    fn phi_examples() {
        let lp = LevantParams::default();
        assert_eq!(phi1(0.0, 3.0, 2.0, &lp).unwrap(), 0.0);
        assert_relative_eq!(phi1(1.0, 1.0, 1.0, &lp).unwrap(), 4.5);
        assert_relative_eq!(phi1(-4.0, 2.0, 4.0, &lp).unwrap(), -30.0);
        assert_eq!(phi2(0.0, 3.0, 2.0, &lp).unwrap(), 0.0);
        assert_relative_eq!(phi2(1.0, 1.0, 1.0, &lp).unwrap(), 10.1, max_relative = 1e-14);
        assert!(phi1(1.0, 1.0, 0.0, &lp).is_err());
        assert!(phi2(1.0, -1.0, 1.0, &lp).is_err());
    }

    #[test]
    fn phi_odd() {
        let lp = LevantParams::default();
        for i in 1..200 {
            let w = 0.037 * i as f64;
            assert_eq!(phi1(-w, 1.3, 0.7, &lp).unwrap(), -phi1(w, 1.3, 0.7, &lp).unwrap());
            assert_eq!(phi2(-w, 1.3, 0.7, &lp).unwrap(), -phi2(w, 1.3, 0.7, &lp).unwrap());
        }
    }

    #[test]
    fn tbg_branch_example1() {
        let cfg = ex1_cfg();
        // kappa(0) = 1, Lt(0) = 0.1: h1 = -1 + 1.5 sqrt(0.1) + 18.
        let expected = -1.0 + 1.5 * 0.1f64.sqrt() + 18.0;
        assert_relative_eq!(h1(1.0, 0.0, &cfg).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(h1(1.0, 0.0, &cfg).unwrap(), 17.474, epsilon = 1e-3);
        // h2 = 1 + phi2(1; 6, 0.1) - phi1(1; 6, 0.1)
        let p1 = 1.5 * 0.1f64.sqrt() + 18.0;
        let p2 = 1.1 * 0.1 + 1.5 * 2.0 * 0.1f64.sqrt() * 6.0 + 6.0 * 36.0;
        assert_relative_eq!(h2(1.0, 0.0, &cfg).unwrap(), 1.0 + p2 - p1, max_relative = 1e-14);
        assert_eq!(h1(0.0, 0.3, &cfg).unwrap(), 0.0);
        assert_eq!(h2(0.0, 0.3, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn switches_at_deadline() {
        let cfg = ex1_cfg();
        assert!(cfg.on_tbg_branch(0.999_999));
        assert!(!cfg.on_tbg_branch(1.0));
        let lp = LevantParams::default();
        for t in [1.0f64, 1.5, 2.7] {
            let l = 0.1 * (-t).exp();
            assert_eq!(h1(0.3, t, &cfg).unwrap(), phi1(0.3, 1.0, l, &lp).unwrap());
            assert_eq!(h2(0.3, t, &cfg).unwrap(), phi2(0.3, 1.0, l, &lp).unwrap());
        }
        assert!(matches!(tbg_laws(0.3, 1.0, &cfg), Err(Error::Singularity { .. })));
    }

    #[test]
    fn h2_factorises_through_kappa_squared() {
        let a = GainConfig::new(TbgParams::new(0.0, 1.0, 0.5).unwrap(), 2.0, BoundFunction::constant(1.0, 0.0)).unwrap();
        let tau = 0.8;
        let t_a = a.tbg.inverse(tau).unwrap();
        let (c1, c2) = tbg_core(0.7, tau, &a);
        let k = a.tbg.gain(t_a).unwrap();
        let (x1, x2) = tbg_laws(0.7, t_a, &a).unwrap();
        assert_relative_eq!(x1, k * c1, max_relative = 1e-12);
        assert_relative_eq!(x2, k * k * c2, max_relative = 1e-12);
        // Same tau reached at a later t through a shifted start time.
        let c = GainConfig::new(TbgParams::new(3.0, 1.0, 0.5).unwrap(), 2.0, BoundFunction::constant(1.0, 0.0)).unwrap();
        let t_c = c.tbg.inverse(tau).unwrap();
        let (y1, y2) = tbg_laws(0.7, t_c, &c).unwrap();
        assert_relative_eq!(y1 / k, c1, max_relative = 1e-9);
        assert_relative_eq!(y2 / (k * k), c2, max_relative = 1e-9);
    }

    #[test]
    fn seeber_example() {
        let g = SeeberGains::from_bound(1.0, 1.0).unwrap();
        assert_eq!((g.k1, g.k2, g.k3), (4.0, 2.0, 9.8));
        let cfg = ex1_cfg().with_seeber(g);
        let (a, _) = gains(Algorithm::Seeber, 1.0, 0.0, &cfg).unwrap();
        assert_relative_eq!(a, 388.16, max_relative = 1e-12);
        let g = SeeberGains::from_bound(4.0, 0.5).unwrap();
        assert_relative_eq!(g.k3, 9.8);
        assert!(SeeberGains::from_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn holloway_example() {
        let hp = HollowayParams::default();
        assert_eq!(hp.g1(1.0), 7.0);
        assert_eq!(hp.g2(1.0), 10.0);
        let cfg = ex1_cfg();
        let (a, b) = gains(Algorithm::Holloway, 2.0, 0.0, &cfg).unwrap();
        assert_eq!((a, b), (14.0, 20.0));
        assert!(matches!(gains(Algorithm::Holloway, 2.0, 1.0, &cfg), Err(Error::Singularity { .. })));
        let capped = cfg.with_schedule(GainSchedule {
            switch_elapsed: 0.9,
            kappa_max: Some(10.0),
        });
        assert_eq!(holloway_kappa(0.95, &capped).unwrap(), 10.0);
        assert_eq!(holloway_kappa(2.0, &capped).unwrap(), 10.0);
        assert_relative_eq!(holloway_kappa(0.5, &capped).unwrap(), 2.0);
    }

    #[test]
    fn rhs_on_exact_trajectory() {
        let cfg = ex1_cfg();
        for alg in Algorithm::ALL {
            for &t in &[0.0, 0.4, 0.95] {
                let s = DiffState::new(t + 1.0, 1.0);
                let (d0, d1) = rhs(alg, s, t + 1.0, t, &cfg).unwrap();
                assert_eq!(d0, 1.0);
                assert_eq!(d1, 0.0);
            }
        }
    }

    #[test]
    fn algorithm_ids_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bogus".parse::<Algorithm>().is_err());
    }

    #[test]
    fn levant_params_checked() {
        assert!(LevantParams::default().validate().is_ok());
        let bad = LevantParams {
            mu0: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(ex1_cfg().with_levant(bad).is_err());
    }
}
