//! The jump-perturbed Laguerre weight `x^alpha e^{-x} (A + B theta(x - t))`.

use rug::ops::Pow;
use rug::Float;

use crate::error::{CoreError, Result};
use crate::precision::Precision;

/// Parameters of the weight `w(x, t) = x^alpha e^{-x} (A + B theta(x - t))`
/// on `[0, inf)`, where `theta` is the unit step.
///
/// Admissibility: `A >= 0`, `A + B > 0`, `alpha >= 0` and `t >= 0`. The
/// base weight must vanish at the left endpoint for the ladder relations
/// to hold without endpoint corrections, so `alpha = 0` is only accepted
/// together with `A = 0` (the jump then removes `[0, t)` from the support).
#[derive(Debug, Clone)]
pub struct JumpWeight {
    alpha: Float,
    a: Float,
    b: Float,
    t: Float,
    origin: Option<(Float, Float)>,
}

impl JumpWeight {
    pub fn new(alpha: f64, a: f64, b: f64, t: f64, prec: &Precision) -> Result<Self> {
        Self::from_parts(
            prec.float(alpha),
            prec.float(a),
            prec.float(b),
            prec.float(t),
        )
    }

    /// Validates the admissibility conditions and builds the weight.
    pub fn from_parts(alpha: Float, a: Float, b: Float, t: Float) -> Result<Self> {
        if a < 0.0 {
            return Err(CoreError::InvalidParameter(format!("A must be >= 0, got {a}")));
        }
        let sum = a.clone() + &b;
        if sum <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "A + B must be > 0, got {sum}"
            )));
        }
        if alpha < 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        if alpha.is_zero() && !a.is_zero() {
            return Err(CoreError::InvalidParameter(
                "alpha = 0 requires A = 0 (base weight must vanish at the origin)".into(),
            ));
        }
        if t < 0.0 {
            return Err(CoreError::InvalidParameter(format!("t must be >= 0, got {t}")));
        }
        Ok(Self {
            alpha,
            a,
            b,
            t,
            origin: None,
        })
    }

    /// Builds the weight from the linear-statistics parameterization
    /// `A = (1 - beta/2)^lambda`, `B = (1 + beta/2)^lambda - A`,
    /// valid for `-2 < beta < 2`.
    pub fn from_lambda_beta(
        alpha: f64,
        lambda: f64,
        beta: f64,
        t: f64,
        prec: &Precision,
    ) -> Result<Self> {
        let (a, b) = lambda_beta_to_ab(lambda, beta, prec)?;
        let mut w = Self::from_parts(prec.float(alpha), a, b, prec.float(t))?;
        w.origin = Some((prec.float(lambda), prec.float(beta)));
        Ok(w)
    }

    /// Same weight with the jump moved to `t`. Used by derivative stencils
    /// and parameter sweeps.
    pub fn with_t(&self, t: Float) -> Result<Self> {
        let mut w = Self::from_parts(self.alpha.clone(), self.a.clone(), self.b.clone(), t)?;
        w.origin = self.origin.clone();
        Ok(w)
    }

    pub fn alpha(&self) -> &Float {
        &self.alpha
    }

    pub fn a(&self) -> &Float {
        &self.a
    }

    pub fn b(&self) -> &Float {
        &self.b
    }

    pub fn t(&self) -> &Float {
        &self.t
    }

    pub fn origin(&self) -> Option<&(Float, Float)> {
        self.origin.as_ref()
    }

    /// The unperturbed Laguerre factor `w_0(x) = x^alpha e^{-x}`.
    pub fn w0_at(&self, x: &Float, prec: &Precision) -> Float {
        let bits = prec.bits();
        let xa = if self.alpha.is_zero() {
            Float::with_val(bits, 1)
        } else {
            Float::with_val(bits, x).pow(&self.alpha)
        };
        xa * Float::with_val(bits, -x.clone()).exp()
    }

    /// The jump factor `A + B theta(x - t)`; the step takes the upper
    /// value at `x = t` (a measure-zero choice, irrelevant to integrals).
    pub fn jump_at(&self, x: &Float, prec: &Precision) -> Float {
        if *x >= self.t {
            Float::with_val(prec.bits(), &self.a + &self.b)
        } else {
            Float::with_val(prec.bits(), &self.a)
        }
    }

    /// Full weight `w_0(x) w_J(x, t)`.
    pub fn weight_at(&self, x: &Float, prec: &Precision) -> Float {
        self.w0_at(x, prec) * self.jump_at(x, prec)
    }

    /// One-line description used in report headers.
    pub fn describe(&self, prec: &Precision) -> String {
        format!(
            "alpha={} A={} B={} t={}",
            prec.format(&self.alpha),
            prec.format(&self.a),
            prec.format(&self.b),
            prec.format(&self.t)
        )
    }
}

/// `(A, B)` from `(lambda, beta)`: `A = (1 - beta/2)^lambda` and
/// `B = (1 + beta/2)^lambda - (1 - beta/2)^lambda`. Requires `|beta| < 2`.
pub fn lambda_beta_to_ab(lambda: f64, beta: f64, prec: &Precision) -> Result<(Float, Float)> {
    if !(beta.abs() < 2.0) {
        return Err(CoreError::InvalidParameter(format!(
            "beta must satisfy |beta| < 2, got {beta}"
        )));
    }
    let bits = prec.bits();
    let half_beta = Float::with_val(bits, beta) / 2u32;
    let lam = Float::with_val(bits, lambda);
    let minus = (Float::with_val(bits, 1) - &half_beta).pow(&lam);
    let plus = (Float::with_val(bits, 1) + &half_beta).pow(&lam);
    let b = plus - &minus;
    Ok((minus, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(60, 30).unwrap()
    }

    #[test]
    fn lambda_beta_examples() {
        let p = prec();
        // lambda = 0: zeroth power
        let (a, b) = lambda_beta_to_ab(0.0, 0.7, &p).unwrap();
        assert_eq!(a, 1.0);
        assert!(b.clone().abs() < p.target_eps());
        // lambda = 1, beta = 1: A = 1/2, B = 1
        let (a, b) = lambda_beta_to_ab(1.0, 1.0, &p).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(b, 1.0);
        // lambda = 2, beta = 1: A = 1/4, B = 2
        let (a, b) = lambda_beta_to_ab(2.0, 1.0, &p).unwrap();
        assert_eq!(a, 0.25);
        assert_eq!(b, 2.0);
    }

    #[test]
    fn rejects_out_of_range_beta() {
        let p = prec();
        assert!(lambda_beta_to_ab(1.0, 2.0, &p).is_err());
        assert!(lambda_beta_to_ab(1.0, -2.5, &p).is_err());
    }

    #[test]
    fn admissibility() {
        let p = prec();
        assert!(JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).is_ok());
        // A < 0
        assert!(JumpWeight::new(0.5, -0.1, 1.0, 2.0, &p).is_err());
        // A + B <= 0
        assert!(JumpWeight::new(0.5, 0.5, -0.5, 2.0, &p).is_err());
        // alpha = 0 needs A = 0
        assert!(JumpWeight::new(0.0, 1.0, 1.0, 2.0, &p).is_err());
        assert!(JumpWeight::new(0.0, 0.0, 1.0, 2.0, &p).is_ok());
        // negative alpha and negative t
        assert!(JumpWeight::new(-0.5, 0.0, 1.0, 2.0, &p).is_err());
        assert!(JumpWeight::new(0.5, 1.0, 1.0, -1.0, &p).is_err());
    }

    #[test]
    fn step_factor() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 2.0, 1.0, &p).unwrap();
        assert_eq!(w.jump_at(&p.float(0.5), &p), 1.0);
        assert_eq!(w.jump_at(&p.float(1.5), &p), 3.0);
    }
}
