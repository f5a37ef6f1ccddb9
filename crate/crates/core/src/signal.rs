//! Signals to be differentiated and the bound families that certify them.
//!
//! A [`SignalSpec`] carries analytic evaluators for `y`, `y'`, `y''` together
//! with a [`BoundFunction`]: a time-varying bound `L(t - t0) >= |y''(t)|`, its
//! derivative, and a constant `M` bounding the logarithmic derivative of `L`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step used by the central-difference fallback for `dL/dt` (s).
pub const DL_FD_STEP: f64 = 1e-6;

/// Bound `L` on `|y''|`, as a function of elapsed time, plus `M`.
#[derive(Clone)]
pub struct BoundFunction {
    l: Eval,
    dl: Option<Eval>,
    m: f64,
}

impl BoundFunction {
    /// A bound with an analytic derivative.
    pub fn new(l: Eval, dl: Eval, m: f64) -> Self {
        Self { l, dl: Some(dl), m }
    }

    /// A bound whose derivative is estimated by central differences.
    pub fn without_derivative(l: Eval, m: f64) -> Self {
        Self { l, dl: None, m }
    }

    /// Constant bound; its logarithmic derivative is zero.
    pub fn constant(value: f64, m: f64) -> Self {
        Self::new(Arc::new(move |_| value), Arc::new(|_| 0.0), m)
    }

    pub fn l(&self, elapsed: f64) -> f64 {
        (self.l)(elapsed)
    }

    /// `dL/dt`; analytic when available, otherwise a second-order finite
    /// difference (one-sided near `elapsed = 0`).
    pub fn dl(&self, elapsed: f64) -> f64 {
        match &self.dl {
            Some(dl) => dl(elapsed),
            None => {
                let h = DL_FD_STEP;
                if elapsed >= h {
                    (self.l(elapsed + h) - self.l(elapsed - h)) / (2.0 * h)
                } else {
                    (-3.0 * self.l(elapsed) + 4.0 * self.l(elapsed + h) - self.l(elapsed + 2.0 * h))
                        / (2.0 * h)
                }
            }
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.dl.is_some()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    /// Drops the analytic derivative so that the finite-difference path is used.
    pub fn into_finite_difference(mut self) -> Self {
        self.dl = None;
        self
    }

    /// `L` checked to be positive and finite.
    pub fn l_checked(&self, elapsed: f64) -> Result<f64> {
        let v = self.l(elapsed);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidBound(format!("L({elapsed}) = {v} is not positive")))
        }
    }
}

impl fmt::Debug for BoundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundFunction")
            .field("analytic_dl", &self.dl.is_some())
            .field("m", &self.m)
            .finish()
    }
}

/// A signal with its first two derivatives and a bound family.
#[derive(Clone)]
pub struct SignalSpec {
    pub name: String,
    y: Eval,
    ydot: Eval,
    yddot: Eval,
    pub bound: BoundFunction,
}

impl SignalSpec {
    pub fn new(name: impl Into<String>, y: Eval, ydot: Eval, yddot: Eval, bound: BoundFunction) -> Self {
        Self {
            name: name.into(),
            y,
            ydot,
            yddot,
            bound,
        }
    }

    pub fn y(&self, t: f64) -> f64 {
        (self.y)(t)
    }

    pub fn ydot(&self, t: f64) -> f64 {
        (self.ydot)(t)
    }

    pub fn yddot(&self, t: f64) -> f64 {
        (self.yddot)(t)
    }

    pub fn with_bound(mut self, bound: BoundFunction) -> Self {
        self.bound = bound;
        self
    }
}

impl fmt::Debug for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignalSpec")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .finish()
    }
}

/// Ids of the built-in signals.
pub const BUILTIN_IDS: [&str; 3] = ["linear", "sine", "chirp"];

/// `y = t + 1`, `L = 0.1 exp(-(t - t0))`, `M = 1`.
pub fn linear() -> SignalSpec {
    SignalSpec::new(
        "linear",
        Arc::new(|t| t + 1.0),
        Arc::new(|_| 1.0),
        Arc::new(|_| 0.0),
        BoundFunction::new(
            Arc::new(|s: f64| 0.1 * (-s).exp()),
            Arc::new(|s: f64| -0.1 * (-s).exp()),
            1.0,
        ),
    )
}

/// `y = sin t`, `L = 1`. `L` is constant so any `M >= 0` is admissible; the
/// default `M = 1` gives the stationary branch a linear term.
pub fn sine() -> SignalSpec {
    SignalSpec::new(
        "sine",
        Arc::new(f64::sin),
        Arc::new(f64::cos),
        Arc::new(|t: f64| -t.sin()),
        BoundFunction::constant(1.0, 1.0),
    )
}

/// `y = 2 sin(t^2 / 2)`, `L = 2 (t - t0)^2 + beta`, `M = sqrt(2 / beta)`.
///
/// The signal is anchored at `t = 0`; `|y''| <= L` holds for `beta >= 2` when `t0 = 0`.
pub fn chirp(beta: f64) -> SignalSpec {
    SignalSpec::new(
        "chirp",
        Arc::new(|t: f64| 2.0 * (0.5 * t * t).sin()),
        Arc::new(|t: f64| 2.0 * t * (0.5 * t * t).cos()),
        Arc::new(|t: f64| {
            let a = 0.5 * t * t;
            2.0 * a.cos() - 2.0 * t * t * a.sin()
        }),
        BoundFunction::new(
            Arc::new(move |s: f64| 2.0 * s * s + beta),
            Arc::new(|s: f64| 4.0 * s),
            (2.0 / beta).sqrt(),
        ),
    )
}

/// Looks up a built-in signal. `beta` is used by `chirp` only.
pub fn builtin(id: &str, beta: Option<f64>) -> Result<SignalSpec> {
    match id {
        "linear" => Ok(linear()),
        "sine" => Ok(sine()),
        "chirp" => {
            let beta = beta.unwrap_or(2.0);
            if !(beta > 0.0) {
                return Err(Error::Config(format!("chirp beta = {beta} must be positive")));
            }
            Ok(chirp(beta))
        }
        other => Err(Error::Config(format!(
            "unknown signal '{other}' (known: {})",
            BUILTIN_IDS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd2(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-4;
        (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
    }

    #[test]
    fn builtin_derivatives_are_consistent() {
        for id in BUILTIN_IDS {
            let s = builtin(id, None).unwrap();
            for &t in &[0.3, 0.9, 1.7, 2.5] {
                let h = 1e-6;
                let d1 = (s.y(t + h) - s.y(t - h)) / (2.0 * h);
                assert_relative_eq!(d1, s.ydot(t), epsilon = 1e-6, max_relative = 1e-6);
                assert_relative_eq!(fd2(|x| s.y(x), t), s.yddot(t), epsilon = 1e-4, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn finite_difference_fallback_matches_analytic() {
        let s = chirp(2.0);
        let fd = s.bound.clone().into_finite_difference();
        for &e in &[0.0, 5e-7, 0.4, 1.3] {
            assert_relative_eq!(fd.dl(e), s.bound.dl(e), epsilon = 1e-6, max_relative = 1e-6);
        }
        let l = linear().bound.into_finite_difference();
        assert_relative_eq!(l.dl(0.7), -0.1 * (-0.7f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn unknown_signal_is_rejected() {
        assert!(builtin("square", None).is_err());
        assert!(builtin("chirp", Some(-1.0)).is_err());
    }
}
