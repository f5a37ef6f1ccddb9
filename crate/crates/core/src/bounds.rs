//! Bound-family machinery.
//!
//! Under the TBG time scale a bound `L(t - t0)` on `|y''|` becomes
//! `Lt(tau) = L(psi(tau) - t0) * rho(tau)^-2`, where `psi` is the inverse
//! transformation and `rho(tau) = exp(alpha tau) / (alpha Tc)` is the gain in
//! transformed time. The differentiator is admissible when the logarithmic
//! derivative of `Lt` stays below the user-chosen constant `Mt`.
//!
//! Everything here is certified on grids, not symbolically. Grid points are
//! independent and evaluated through [`Exec`].

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::math::TbgParams;
use crate::par::Exec;
use crate::signal::{BoundFunction, SignalSpec};

/// Default grid size for validation.
pub const DEFAULT_GRID: usize = 100_000;

/// Default central-difference step in transformed time.
pub const TAU_FD_STEP: f64 = 1e-4;

/// Relative slack on `<=` comparisons when derivatives are analytic.
pub const REL_TOL_ANALYTIC: f64 = 1e-9;

/// Relative slack on `<=` comparisons when a finite-difference path is involved.
pub const REL_TOL_FD: f64 = 1e-6;

/// The transformed bound `Lt(tau)` together with its constant `Mt`.
#[derive(Debug, Clone)]
pub struct TransformedBound {
    pub bound: BoundFunction,
    pub tbg: TbgParams,
    pub script_m: f64,
}

/// How the logarithmic derivative of `Lt` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    /// Chain rule through `dL/dt`: `(L'/L) / kappa - 2 alpha`.
    Chain,
    /// Central difference of `Lt` in `tau` with the given step.
    Central { step: f64 },
    /// Triangle-inequality bound `|L'/L| / kappa + 2 alpha` on the magnitude,
    /// treating the two factors of `Lt` separately.
    Split,
}

pub fn transformed_bound(bound: &BoundFunction, tbg: TbgParams, script_m: f64) -> TransformedBound {
    TransformedBound {
        bound: bound.clone(),
        tbg,
        script_m,
    }
}

impl TransformedBound {
    /// `1 / rho(tau) = alpha Tc exp(-alpha tau)`.
    fn inv_rho(&self, tau: f64) -> f64 {
        self.tbg.alpha * self.tbg.tc * (-self.tbg.alpha * tau).exp()
    }

    /// Elapsed time `psi(tau) - t0`.
    fn elapsed(&self, tau: f64) -> f64 {
        -self.tbg.tc * (-self.tbg.alpha * tau).exp_m1()
    }

    /// `Lt(tau)`.
    pub fn value(&self, tau: f64) -> f64 {
        let r = self.inv_rho(tau);
        self.bound.l(self.elapsed(tau)) * r * r
    }

    /// `Lt(phi(t))`, i.e. the transformed bound composed with the forward map.
    pub fn at_time(&self, t: f64) -> Result<f64> {
        let tau = self.tbg.forward(t)?;
        Ok(self.value(tau))
    }

    /// Signed `(1/Lt) dLt/dtau` via the chain rule.
    pub fn log_derivative(&self, tau: f64) -> f64 {
        let s = self.elapsed(tau);
        self.bound.dl(s) / self.bound.l(s) * self.inv_rho(tau) - 2.0 * self.tbg.alpha
    }

    /// Signed `(1/Lt) dLt/dtau` by central differences of `Lt` (one-sided
    /// second-order at `tau < step`).
    pub fn log_derivative_fd(&self, tau: f64, step: f64) -> f64 {
        let h = step;
        let d = if tau >= h {
            (self.value(tau + h) - self.value(tau - h)) / (2.0 * h)
        } else {
            (-3.0 * self.value(tau) + 4.0 * self.value(tau + h) - self.value(tau + 2.0 * h)) / (2.0 * h)
        };
        d / self.value(tau)
    }

    /// `|L'/L| / kappa + 2 alpha`, an upper bound on `|(1/Lt) dLt/dtau|`.
    pub fn split_log_derivative(&self, tau: f64) -> f64 {
        let s = self.elapsed(tau);
        (self.bound.dl(s) / self.bound.l(s)).abs() * self.inv_rho(tau) + 2.0 * self.tbg.alpha
    }

    /// Magnitude of the logarithmic derivative along `route`.
    pub fn log_derivative_abs(&self, tau: f64, route: Route) -> f64 {
        match route {
            Route::Chain => self.log_derivative(tau).abs(),
            Route::Central { step } => self.log_derivative_fd(tau, step).abs(),
            Route::Split => self.split_log_derivative(tau),
        }
    }

    /// The route used by default: chain rule when `dL/dt` is analytic,
    /// central differences otherwise.
    pub fn preferred_route(&self) -> Route {
        if self.bound.has_analytic_derivative() {
            Route::Chain
        } else {
            Route::Central { step: TAU_FD_STEP }
        }
    }
}

/// Grid supremum of a logarithmic derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivativeSup {
    pub sup: f64,
    /// Grid point where the supremum is attained (first one on ties).
    pub argmax: f64,
    /// Grid spacing.
    pub spacing: f64,
}

/// `max (1/Lt)|dLt/dtau|` on an `n`-point grid over `[0, tau_max]`.
pub fn log_derivative_sup(tb: &TransformedBound, tau_max: f64, n: usize) -> Result<LogDerivativeSup> {
    log_derivative_sup_with(tb, tau_max, n, tb.preferred_route(), Exec::default())
}

pub fn log_derivative_sup_with(
    tb: &TransformedBound,
    tau_max: f64,
    n: usize,
    route: Route,
    exec: Exec,
) -> Result<LogDerivativeSup> {
    if n < 2 {
        return Err(Error::domain("log_derivative_sup", format!("grid size {n} < 2")));
    }
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::domain("log_derivative_sup", format!("tau_max = {tau_max} must be positive")));
    }
    let spacing = tau_max / (n - 1) as f64;
    let values = exec.map_indexed(n, |i| {
        let tau = spacing * i as f64;
        let l = tb.value(tau);
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidBound(format!("Lt({tau}) = {l} is not positive")));
        }
        Ok((tau, tb.log_derivative_abs(tau, route)))
    });
    let mut best = LogDerivativeSup {
        sup: f64::NEG_INFINITY,
        argmax: 0.0,
        spacing,
    };
    for v in values {
        let (tau, d) = v?;
        if d > best.sup {
            best.sup = d;
            best.argmax = tau;
        }
    }
    Ok(best)
}

fn exceeds(value: f64, bound: f64, rel: f64) -> bool {
    !(value <= bound + rel * bound.abs() + 1e-12)
}

/// Which hypothesis a grid point violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `|y''(t)| > L(t - t0)`.
    SecondDerivative,
    /// `(1/L)|dL/dt| > M`.
    LogDerivative,
    /// `(1/Lt)|dLt/dtau| > Mt`.
    TransformedLogDerivative,
    /// `L` or `Lt` is not positive.
    NonPositive,
}

impl ViolationKind {
    pub fn key(self) -> &'static str {
        match self {
            ViolationKind::SecondDerivative => "yddot",
            ViolationKind::LogDerivative => "m",
            ViolationKind::TransformedLogDerivative => "script_m",
            ViolationKind::NonPositive => "nonpositive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Absolute time for t-grid checks, transformed time for `Lt` checks.
    pub at: f64,
    pub value: f64,
    pub limit: f64,
}

/// Number of violations kept verbatim per report; the rest are only counted.
pub const MAX_LISTED: usize = 16;

/// Outcome of a grid certification. Empty `violations` means certified at the
/// stated grid resolution.
#[derive(Debug, Clone, Default)]
pub struct BoundsReport {
    pub signal: String,
    pub t_grid: Option<GridInfo>,
    pub tau_grid: Option<GridInfo>,
    /// `max |y''| / L` over the t-grid.
    pub max_yddot_ratio: f64,
    /// `max (1/L)|dL/dt|` over the t-grid.
    pub sup_log_derivative: f64,
    pub m: f64,
    pub sup_transformed: Option<f64>,
    pub script_m: Option<f64>,
    pub counts: [usize; 4],
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridInfo {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GridInfo {
    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.points.max(2) - 1) as f64
    }
}

impl BoundsReport {
    pub fn is_certified(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn total_violations(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.counts[kind as usize]
    }

    fn push(&mut self, v: Violation) {
        self.counts[v.kind as usize] += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(v);
        }
    }

    /// Line-delimited `key=value` form.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status={}", if self.is_certified() { "pass" } else { "fail" });
        let _ = writeln!(s, "signal={}", self.signal);
        if let Some(g) = self.t_grid {
            let _ = writeln!(s, "t_grid.start={:e}", g.start);
            let _ = writeln!(s, "t_grid.end={:e}", g.end);
            let _ = writeln!(s, "t_grid.points={}", g.points);
            let _ = writeln!(s, "t_grid.spacing={:e}", g.spacing());
        }
        if let Some(g) = self.tau_grid {
            let _ = writeln!(s, "tau_grid.end={:e}", g.end);
            let _ = writeln!(s, "tau_grid.points={}", g.points);
            let _ = writeln!(s, "tau_grid.spacing={:e}", g.spacing());
        }
        let _ = writeln!(s, "max_yddot_over_l={:e}", self.max_yddot_ratio);
        let _ = writeln!(s, "sup_log_derivative_l={:e}", self.sup_log_derivative);
        let _ = writeln!(s, "m={:e}", self.m);
        if let (Some(sup), Some(sm)) = (self.sup_transformed, self.script_m) {
            let _ = writeln!(s, "sup_log_derivative_script_l={sup:e}");
            let _ = writeln!(s, "script_m={sm:e}");
        }
        for kind in [
            ViolationKind::SecondDerivative,
            ViolationKind::LogDerivative,
            ViolationKind::TransformedLogDerivative,
            ViolationKind::NonPositive,
        ] {
            let _ = writeln!(s, "violations.{}={}", kind.key(), self.count(kind));
        }
        for (i, v) in self.violations.iter().enumerate() {
            let _ = writeln!(
                s,
                "violation.{i}=kind:{} at:{:e} value:{:e} limit:{:e}",
                v.kind.key(),
                v.at,
                v.value,
                v.limit
            );
        }
        s
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "bounds report for '{}': {}",
            self.signal,
            if self.is_certified() { "CERTIFIED" } else { "NOT CERTIFIED" }
        )?;
        if let Some(g) = self.t_grid {
            writeln!(
                f,
                "  t-grid   [{}, {}] with {} points (spacing {:.3e} s)",
                g.start,
                g.end,
                g.points,
                g.spacing()
            )?;
        }
        writeln!(f, "  max |y''|/L              = {:.6}", self.max_yddot_ratio)?;
        writeln!(f, "  sup (1/L)|dL/dt|         = {:.6}  (M = {})", self.sup_log_derivative, self.m)?;
        if let (Some(sup), Some(sm), Some(g)) = (self.sup_transformed, self.script_m, self.tau_grid) {
            writeln!(
                f,
                "  sup (1/Lt)|dLt/dtau|     = {:.6}  (Mt = {}) over tau in [0, {:.4}] with {} points",
                sup, sm, g.end, g.points
            )?;
        }
        if self.is_certified() {
            writeln!(f, "  no violations")?;
        } else {
            writeln!(
                f,
                "  violations: yddot={} m={} script_m={} nonpositive={}",
                self.count(ViolationKind::SecondDerivative),
                self.count(ViolationKind::LogDerivative),
                self.count(ViolationKind::TransformedLogDerivative),
                self.count(ViolationKind::NonPositive)
            )?;
            for v in &self.violations {
                writeln!(f, "    {:<12} at {:.6e}: {:.6e} > {:.6e}", v.kind.key(), v.at, v.value, v.limit)?;
            }
        }
        Ok(())
    }
}

/// Checks `|y''| <= L` and `(1/L)|dL/dt| <= M` on an `n`-point grid over
/// `[t0, horizon]`.
pub fn validate_signal(s: &SignalSpec, b: &BoundFunction, t0: f64, horizon: f64, n: usize) -> BoundsReport {
    validate_signal_with(s, b, t0, horizon, n, Exec::default())
}

pub fn validate_signal_with(
    s: &SignalSpec,
    b: &BoundFunction,
    t0: f64,
    horizon: f64,
    n: usize,
    exec: Exec,
) -> BoundsReport {
    let n = n.max(2);
    let grid = GridInfo {
        start: t0,
        end: horizon,
        points: n,
    };
    let h = grid.spacing();
    let rel = if b.has_analytic_derivative() { REL_TOL_ANALYTIC } else { REL_TOL_FD };
    let samples = exec.map_indexed(n, |i| {
        let t = t0 + h * i as f64;
        let l = b.l(t - t0);
        (t, s.yddot(t).abs(), l, b.dl(t - t0))
    });

    let mut report = BoundsReport {
        signal: s.name.clone(),
        t_grid: Some(grid),
        m: b.m(),
        ..Default::default()
    };
    for (t, ydd, l, dl) in samples {
        if !(l > 0.0 && l.is_finite()) {
            report.push(Violation {
                kind: ViolationKind::NonPositive,
                at: t,
                value: l,
                limit: 0.0,
            });
            continue;
        }
        report.max_yddot_ratio = report.max_yddot_ratio.max(ydd / l);
        if exceeds(ydd, l, REL_TOL_ANALYTIC) {
            report.push(Violation {
                kind: ViolationKind::SecondDerivative,
                at: t,
                value: ydd,
                limit: l,
            });
        }
        let ld = dl.abs() / l;
        report.sup_log_derivative = report.sup_log_derivative.max(ld);
        if exceeds(ld, b.m(), rel) {
            report.push(Violation {
                kind: ViolationKind::LogDerivative,
                at: t,
                value: ld,
                limit: b.m(),
            });
        }
    }
    report
}

/// Checks `(1/Lt)|dLt/dtau| <= Mt` on an `n`-point grid over `[0, tau_max]`
/// and appends the result to `report`.
pub fn validate_transformed(report: &mut BoundsReport, tb: &TransformedBound, tau_max: f64, n: usize, exec: Exec) {
    let n = n.max(2);
    let grid = GridInfo {
        start: 0.0,
        end: tau_max,
        points: n,
    };
    let h = grid.spacing();
    let route = tb.preferred_route();
    let rel = match route {
        Route::Chain if tb.bound.has_analytic_derivative() => REL_TOL_ANALYTIC,
        _ => REL_TOL_FD,
    };
    let samples = exec.map_indexed(n, |i| {
        let tau = h * i as f64;
        (tau, tb.value(tau), tb.log_derivative_abs(tau, route))
    });
    let mut sup = 0.0f64;
    for (tau, l, d) in samples {
        if !(l > 0.0 && l.is_finite()) {
            report.push(Violation {
                kind: ViolationKind::NonPositive,
                at: tau,
                value: l,
                limit: 0.0,
            });
            continue;
        }
        sup = sup.max(d);
        if exceeds(d, tb.script_m, rel) {
            report.push(Violation {
                kind: ViolationKind::TransformedLogDerivative,
                at: tau,
                value: d,
                limit: tb.script_m,
            });
        }
    }
    report.tau_grid = Some(grid);
    report.sup_transformed = Some(sup);
    report.script_m = Some(tb.script_m);
}

/// Full certification used before any simulation: the signal hypotheses over
/// `[t0, horizon]` and the transformed hypothesis over `[0, phi(t0 + Tc - dt)]`.
pub fn certify(
    s: &SignalSpec,
    tbg: TbgParams,
    script_m: f64,
    horizon: f64,
    dt: f64,
    n: usize,
    exec: Exec,
) -> Result<BoundsReport> {
    let mut report = validate_signal_with(s, &s.bound, tbg.t0, horizon, n, exec);
    let tb = transformed_bound(&s.bound, tbg, script_m);
    let t_end = tbg.deadline() - dt.min(0.5 * tbg.tc);
    let tau_max = tbg.forward(t_end)?;
    validate_transformed(&mut report, &tb, tau_max, n, exec);
    Ok(report)
}
