use crate::diff::{self, Algorithm, DiffState, GainConfig, GainSchedule};
use crate::error::{Error, Result};
use crate::signal::SignalSpec;

use super::{Trace, TraceRecord};

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 2e-4;

/// A run aborts once any state component exceeds this magnitude.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Bounded-gain workaround.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cap {
    /// Keep `kappa <= kappa_max`; the predefined law switches once `kappa`
    /// would exceed it.
    KappaMax(f64),
    /// Switch the predefined law at elapsed time `t_star < Tc` instead of `Tc`.
    TStar(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Absolute end time (s).
    pub horizon: f64,
    pub ic: DiffState,
    pub cap: Option<Cap>,
    pub record_stride: usize,
    /// Hand the predefined law over to its stationary branch once the explicit
    /// Euler step on the TBG branch's linear part stops being stable.
    pub stiffness_guard: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            horizon: 3.0,
            ic: DiffState::new(10.0, 10.0),
            cap: None,
            record_stride: 1,
            stiffness_guard: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, cfg: &GainConfig) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.horizon > cfg.tbg.t0) {
            return Err(Error::Config(format!(
                "horizon {} must exceed t0 = {}",
                self.horizon, cfg.tbg.t0
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be >= 1".into()));
        }
        if !self.ic.is_finite() {
            return Err(Error::Config("initial condition must be finite".into()));
        }
        if let Some(Cap::TStar(ts)) = self.cap {
            if !(ts > 0.0 && ts < cfg.tbg.tc) {
                return Err(Error::Config(format!("T* = {ts} must lie in (0, Tc = {})", cfg.tbg.tc)));
            }
        }
        Ok(())
    }
}

/// Effective gain schedule for a cap setting.
pub fn apply_gain_cap(cfg: &GainConfig, sc: &SimConfig) -> Result<GainSchedule> {
    let tbg = cfg.tbg;
    match sc.cap {
        None => Ok(GainSchedule::uncapped(tbg.tc)),
        Some(Cap::KappaMax(kmax)) => {
            let k0 = tbg.gain_at_elapsed(0.0)?;
            if !(kmax > k0) {
                return Err(Error::Config(format!(
                    "kappa_max = {kmax} must exceed the initial gain {k0}"
                )));
            }
            Ok(GainSchedule {
                switch_elapsed: tbg.elapsed_for_gain(kmax),
                kappa_max: Some(kmax),
            })
        }
        Some(Cap::TStar(ts)) => {
            if !(ts > 0.0 && ts < tbg.tc) {
                return Err(Error::Config(format!("T* = {ts} must lie in (0, Tc = {})", tbg.tc)));
            }
            Ok(GainSchedule {
                switch_elapsed: ts,
                kappa_max: Some(tbg.gain_at_elapsed(ts)?),
            })
        }
    }
}

/// Largest `dt * kappa` for which explicit Euler is stable on the linear part
/// of the TBG-branch error dynamics.
///
/// Near `w = 0` the linear terms give `e' = kappa A e` with
/// `A = [[-a, 1], [-b, 0]]`, `a = mu1 Mt - alpha`,
/// `b = alpha^2 + mu0 mu1 Mt^2 - alpha mu1 Mt`. Euler is stable while
/// `|1 + dt kappa s| < 1` for both roots `s` of `s^2 + a s + b`.
pub fn tbg_euler_limit(cfg: &GainConfig) -> Option<f64> {
    let lp = &cfg.levant;
    let (alpha, sm) = (cfg.tbg.alpha, cfg.script_m);
    let a = lp.mu1 * sm - alpha;
    let b = alpha * alpha + lp.mu0 * lp.mu1 * sm * sm - alpha * lp.mu1 * sm;
    if !(a > 0.0 && b > 0.0) {
        return None;
    }
    let disc = a * a - 4.0 * b;
    if disc < 0.0 {
        // Complex pair -a/2 +- iq: stable iff h < 2 (a/2) / |s|^2 = a / b.
        Some(a / b)
    } else {
        Some(4.0 / (a + disc.sqrt()))
    }
}

/// Elapsed time at which the predefined law leaves its TBG branch for a given
/// step: never closer than `dt / 2` to the deadline, and with the stiffness
/// guard, no later than the Euler stability limit.
pub fn guarded_switch_elapsed(cfg: &GainConfig, dt: f64, stiffness_guard: bool) -> f64 {
    let tbg = cfg.tbg;
    let mut margin = 0.5 * dt;
    if stiffness_guard {
        if let Some(h) = tbg_euler_limit(cfg) {
            margin = margin.max(dt / (tbg.alpha * h));
        }
    }
    cfg.schedule.switch_elapsed.min(tbg.tc - margin)
}

fn kappa_effective(alg: Algorithm, t: f64, cfg: &GainConfig) -> f64 {
    match alg {
        Algorithm::Predefined if cfg.on_tbg_branch(t) => cfg.tbg.gain(t).unwrap_or(0.0),
        Algorithm::Holloway => diff::holloway_kappa(t, cfg).unwrap_or(f64::INFINITY),
        _ => 0.0,
    }
}

/// Explicit Euler simulation of `alg` tracking `signal` from `t0` to `horizon`.
///
/// The measurement is `y(t)` sampled at step boundaries. Any cap in `sc`
/// replaces the schedule in `cfg`.
pub fn euler_simulate(alg: Algorithm, signal: &SignalSpec, cfg: &GainConfig, sc: &SimConfig) -> Result<Trace> {
    sc.validate(cfg)?;
    let t0 = cfg.tbg.t0;
    if alg.needs_cap_past_deadline() && sc.cap.is_none() && sc.horizon >= cfg.tbg.deadline() {
        return Err(Error::Config(format!(
            "{alg} has no branch past t0 + Tc = {}; set a gain cap or end the run earlier",
            cfg.tbg.deadline()
        )));
    }

    let mut cfg = cfg.clone();
    let capped = apply_gain_cap(&cfg, sc)?;
    cfg.schedule = capped;
    cfg.schedule.switch_elapsed = guarded_switch_elapsed(&cfg, sc.dt, sc.stiffness_guard);
    let cap_decides_switch = sc.cap.is_some() && capped.switch_elapsed <= cfg.schedule.switch_elapsed;

    let dt = sc.dt;
    let n_steps = ((sc.horizon - t0) / dt).round() as usize;
    let mut trace = Trace {
        records: Vec::with_capacity(n_steps / sc.record_stride + 1),
        ..Default::default()
    };
    let mut z = sc.ic;
    for k in 0..=n_steps {
        let t = t0 + k as f64 * dt;
        let y = signal.y(t);
        if alg == Algorithm::Predefined && trace.switched_at.is_none() && !cfg.on_tbg_branch(t) {
            trace.switched_at = Some(t);
            if cap_decides_switch {
                trace.cap_engaged_at = Some(t);
            }
        }
        let kappa = kappa_effective(alg, t, &cfg);
        if alg == Algorithm::Holloway && trace.cap_engaged_at.is_none() {
            if let Some(kmax) = cfg.schedule.kappa_max {
                if kappa >= kmax {
                    trace.cap_engaged_at = Some(t);
                }
            }
        }
        if k % sc.record_stride == 0 {
            let ydot = signal.ydot(t);
            trace.records.push(TraceRecord {
                t,
                z0: z.z0,
                z1: z.z1,
                y,
                ydot,
                e1: z.z0 - y,
                e2: z.z1 - ydot,
                kappa,
            });
        }
        if k == n_steps {
            break;
        }
        let (d0, d1) = diff::rhs(alg, z, y, t, &cfg)?;
        z.z0 += dt * d0;
        z.z1 += dt * d1;
        if !(z.z0.abs() <= DIVERGENCE_LIMIT && z.z1.abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                at: t + dt,
                partial: Box::new(trace),
            });
        }
    }
    Ok(trace)
}
