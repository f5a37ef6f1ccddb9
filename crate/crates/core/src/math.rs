//! Scalar primitives: signed powers, the time-base-generator (TBG) time-scale
//! transformation with its gain, and the admissibility check for the
//! linear-part polynomial of the differentiator.
//!
//! Every time argument is absolute; the transformation works on the elapsed
//! time `t - t0`.

use crate::error::{Error, Result};

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Signed power `|x|^a * sign(x)`; for `a == 0` this is `sign(x)`.
pub fn signed_power(x: f64, a: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("signed_power", format!("non-finite base {x}")));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain("signed_power", format!("exponent {a} must be finite and >= 0")));
    }
    Ok(spow(x, a))
}

/// Unchecked signed power for hot loops. Callers guarantee finite `x` and `a >= 0`.
#[inline]
pub(crate) fn spow(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        sign(x)
    } else if a == 0.5 {
        x.abs().sqrt() * sign(x)
    } else if a == 1.0 {
        x
    } else {
        x.abs().powf(a) * sign(x)
    }
}

/// Parameters of the time-base-generator transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbgParams {
    /// Start time (s).
    pub t0: f64,
    /// Predefined deadline, measured from `t0` (s).
    pub tc: f64,
    /// Transform rate (1/s).
    pub alpha: f64,
}

impl TbgParams {
    pub fn new(t0: f64, tc: f64, alpha: f64) -> Result<Self> {
        let p = Self { t0, tc, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() {
            return Err(Error::Config(format!("t0 = {} must be finite", self.t0)));
        }
        if !(self.tc > 0.0 && self.tc.is_finite()) {
            return Err(Error::Config(format!("Tc = {} must be positive", self.tc)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha = {} must be positive", self.alpha)));
        }
        Ok(())
    }

    /// Absolute time at which the gain becomes singular.
    pub fn deadline(&self) -> f64 {
        self.t0 + self.tc
    }

    fn check_window(&self, op: &'static str, t: f64) -> Result<f64> {
        let elapsed = t - self.t0;
        if !(elapsed >= 0.0) {
            return Err(Error::domain(op, format!("t = {t} precedes t0 = {}", self.t0)));
        }
        if elapsed >= self.tc {
            return Err(Error::domain(
                op,
                format!("t = {t} is not below the deadline {}", self.deadline()),
            ));
        }
        Ok(elapsed)
    }

    /// Transformed time `tau = -ln(1 - (t - t0)/Tc) / alpha` on `[t0, t0 + Tc)`.
    pub fn forward(&self, t: f64) -> Result<f64> {
        let elapsed = self.check_window("tbg_forward", t)?;
        Ok(-(-elapsed / self.tc).ln_1p() / self.alpha)
    }

    /// Inverse transformation `t = Tc (1 - exp(-alpha tau)) + t0`, `tau >= 0`.
    pub fn inverse(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::domain("tbg_inverse", format!("tau = {tau} must be >= 0")));
        }
        Ok(-self.tc * (-self.alpha * tau).exp_m1() + self.t0)
    }

    /// TBG gain `kappa = 1 / (alpha (Tc - (t - t0)))`.
    pub fn gain(&self, t: f64) -> Result<f64> {
        let elapsed = t - self.t0;
        if !(elapsed >= 0.0) {
            return Err(Error::domain("tbg_gain", format!("t = {t} precedes t0 = {}", self.t0)));
        }
        self.gain_at_elapsed(elapsed)
    }

    /// Gain as a function of elapsed time.
    pub fn gain_at_elapsed(&self, elapsed: f64) -> Result<f64> {
        if elapsed >= self.tc {
            return Err(Error::Singularity {
                elapsed,
                tc: self.tc,
            });
        }
        Ok(1.0 / (self.alpha * (self.tc - elapsed)))
    }

    /// Gain expressed in transformed time, `rho(tau) = exp(alpha tau) / (alpha Tc)`.
    pub fn rho(&self, tau: f64) -> f64 {
        (self.alpha * tau).exp() / (self.alpha * self.tc)
    }

    /// Elapsed time at which the gain reaches `kappa`.
    pub fn elapsed_for_gain(&self, kappa: f64) -> f64 {
        self.tc - 1.0 / (self.alpha * kappa)
    }
}

/// `s^2 + mu1 s + mu0 mu1` is Hurwitz iff both non-leading coefficients are positive.
pub fn is_hurwitz_quadratic(mu0: f64, mu1: f64) -> bool {
    mu1 > 0.0 && mu0 * mu1 > 0.0
}
