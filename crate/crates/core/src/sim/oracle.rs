//! Re-simulation of the predefined algorithm's error dynamics in transformed
//! time.
//!
//! With `eps1 = e1` and `eps2 = alpha e1 + e2 / kappa` the TBG-branch error
//! dynamics become the stationary Levant dynamics in `tau`:
//!
//! ```text
//! d eps1 / d tau = -phi1(eps1; Mt, Lt(tau)) + eps2
//! d eps2 / d tau = -phi2(eps1; Mt, Lt(tau)) + delta(tau)
//! delta(tau)     = -y''(psi(tau)) / rho(tau)^2
//! ```
//!
//! Integrating these directly and mapping back gives a check on
//! [`euler_simulate`](super::euler_simulate) that shares no time-varying gain
//! code with it.

use crate::bounds::REL_TOL_ANALYTIC;
use crate::diff::{DiffState, GainConfig};
use crate::error::{Error, Result};
use crate::math::TbgParams;
use crate::signal::SignalSpec;

use super::engine::DIVERGENCE_LIMIT;
use super::{settling_time, Trace, TraceRecord};

/// Default oracle step in transformed time.
pub const DEFAULT_DTAU: f64 = 1e-3;

/// One oracle step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TauOracleState {
    pub tau: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub rho: f64,
    /// `Lt(tau)`.
    pub script_l: f64,
}

#[derive(Debug, Clone, Default)]
pub struct OracleRun {
    /// Uniform in `tau` with spacing `dtau`, starting at 0.
    pub samples: Vec<TauOracleState>,
    pub dtau: f64,
    /// The samples mapped back to `t`.
    pub trace: Trace,
    /// Settling time of the mapped-back trace, with the default band and hold.
    pub settling_time: Option<f64>,
    /// `phi(settling_time)`.
    pub settling_tau: Option<f64>,
    /// Steps where `|delta| > Lt` beyond rounding.
    pub delta_violations: usize,
}

impl OracleRun {
    /// `(eps1, eps2)` linearly interpolated at `tau`; `None` outside the run.
    pub fn eps_at(&self, tau: f64) -> Option<(f64, f64)> {
        if !(tau >= 0.0) || self.samples.is_empty() {
            return None;
        }
        let x = tau / self.dtau;
        let i = x.floor() as usize;
        let a = self.samples.get(i)?;
        let Some(b) = self.samples.get(i + 1) else {
            return (x - i as f64 <= 1e-9).then_some((a.eps1, a.eps2));
        };
        let f = x - i as f64;
        Some((a.eps1 + f * (b.eps1 - a.eps1), a.eps2 + f * (b.eps2 - a.eps2)))
    }
}

/// `tau` horizon whose image in `t` reaches `t0 + Tc - dt`.
pub fn default_tau_max(tbg: &TbgParams, dt: f64) -> Result<f64> {
    tbg.forward(tbg.deadline() - dt)
}

/// Explicit Euler in `tau` on the transformed error dynamics from `ic` at `t0`
/// up to `tau_max`.
pub fn tau_oracle(signal: &SignalSpec, cfg: &GainConfig, ic: DiffState, tau_max: f64, dtau: f64) -> Result<OracleRun> {
    if !(tau_max > 0.0 && dtau > 0.0 && tau_max.is_finite()) {
        return Err(Error::Config(format!(
            "oracle needs tau_max > 0 and dtau > 0 (got {tau_max}, {dtau})"
        )));
    }
    let tbg = cfg.tbg;
    let alpha = tbg.alpha;
    let tb = cfg.transformed();
    let lp = cfg.levant;
    let sm = cfg.script_m;

    let e1 = ic.z0 - signal.y(tbg.t0);
    let e2 = ic.z1 - signal.ydot(tbg.t0);
    let k0 = tbg.gain(tbg.t0)?;
    let (mut eps1, mut eps2) = (e1, alpha * e1 + e2 / k0);

    let n = (tau_max / dtau - 1e-9).ceil() as usize;
    let mut run = OracleRun {
        samples: Vec::with_capacity(n + 1),
        dtau,
        ..Default::default()
    };
    for k in 0..=n {
        let tau = k as f64 * dtau;
        let t = tbg.inverse(tau)?;
        let rho = tbg.rho(tau);
        let script_l = tb.value(tau);
        let delta = -signal.yddot(t) / (rho * rho);
        if delta.abs() > script_l * (1.0 + REL_TOL_ANALYTIC) {
            run.delta_violations += 1;
        }
        run.samples.push(TauOracleState {
            tau,
            eps1,
            eps2,
            delta,
            rho,
            script_l,
        });
        let t_ok = run.trace.last().is_none_or(|r| t > r.t) && t < tbg.deadline();
        if t_ok {
            let kappa = tbg.gain(t)?;
            let (y, ydot) = (signal.y(t), signal.ydot(t));
            let (e1, e2) = (eps1, kappa * (eps2 - alpha * eps1));
            run.trace.records.push(TraceRecord {
                t,
                z0: y + e1,
                z1: ydot + e2,
                y,
                ydot,
                e1,
                e2,
                kappa,
            });
        }
        if k == n {
            break;
        }
        let p1 = crate::diff::phi1(eps1, sm, script_l, &lp)?;
        let p2 = crate::diff::phi2(eps1, sm, script_l, &lp)?;
        eps1 += dtau * (-p1 + eps2);
        eps2 += dtau * (-p2 + delta);
        if !(eps1.abs() <= DIVERGENCE_LIMIT && eps2.abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                at: tbg.inverse(tau + dtau)?,
                partial: Box::new(run.trace),
            });
        }
    }
    run.settling_time = settling_time(&run.trace);
    run.settling_tau = match run.settling_time {
        Some(ts) => Some(tbg.forward(ts)?),
        None => None,
    };
    Ok(run)
}

/// Largest disagreement between a t-domain trace and an oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpsMismatch {
    /// `max(|d eps1|, |d eps2|)` over compared samples.
    pub sup: f64,
    pub sup_eps1: f64,
    pub sup_eps2: f64,
    /// Time of the largest disagreement.
    pub at: f64,
    /// Number of compared samples.
    pub compared: usize,
}

/// Maps the TBG-branch part of `tr` into `(eps1, eps2)` and compares it with
/// the oracle interpolated at `tau = phi(t)`.
pub fn eps_mismatch(tr: &Trace, run: &OracleRun, cfg: &GainConfig) -> Result<EpsMismatch> {
    let tbg = cfg.tbg;
    let end = tr.switched_at.unwrap_or(tbg.deadline()).min(tbg.deadline());
    let mut out = EpsMismatch::default();
    for r in tr.records.iter().filter(|r| r.t < end) {
        let tau = tbg.forward(r.t)?;
        let Some((o1, o2)) = run.eps_at(tau) else {
            continue;
        };
        let kappa = tbg.gain(r.t)?;
        let d1 = (r.e1 - o1).abs();
        let d2 = (tbg.alpha * r.e1 + r.e2 / kappa - o2).abs();
        out.compared += 1;
        out.sup_eps1 = out.sup_eps1.max(d1);
        out.sup_eps2 = out.sup_eps2.max(d2);
        if d1.max(d2) > out.sup {
            out.sup = d1.max(d2);
            out.at = r.t;
        }
    }
    Ok(out)
}
