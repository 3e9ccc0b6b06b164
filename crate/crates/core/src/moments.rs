//! Arbitrary-precision gamma functions and moments of the jump weight.
//!
//! The moments of `x^alpha e^{-x} (A + B theta(x - t))` split by linearity:
//!
//! ```text
//! mu_k = A Gamma(alpha + k + 1) + B Gamma(alpha + k + 1, t)
//! ```
//!
//! where `Gamma(s, t)` is the upper incomplete gamma function. The
//! incomplete gamma is computed by the lower-gamma power series for
//! `t < s + 1` and by the continued fraction for `t >= s + 1`, both with
//! relative stopping at `10^{-(digits+5)}`.

use rug::ops::Pow;
use rug::Float;

use crate::error::{CoreError, Result};
use crate::precision::Precision;
use crate::weight::JumpWeight;

/// Iteration budget multiplier: series/CF terms per working digit.
const ITER_PER_DIGIT: u32 = 12;
const ITER_FLOOR: u32 = 2_000;

fn iter_budget(prec: &Precision) -> u32 {
    ITER_PER_DIGIT * prec.digits() + ITER_FLOOR
}

/// Complete gamma function `Gamma(s)` for `s > 0`.
pub fn gamma_complete(s: &Float, prec: &Precision) -> Result<Float> {
    if *s <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "gamma_complete requires s > 0, got {s}"
        )));
    }
    Ok(Float::with_val(prec.bits(), s).gamma())
}

/// Upper incomplete gamma `Gamma(s, t) = int_t^inf x^{s-1} e^{-x} dx`
/// for `s > 0`, `t >= 0`.
pub fn gamma_upper(s: &Float, t: &Float, prec: &Precision) -> Result<Float> {
    if *s <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "gamma_upper requires s > 0, got {s}"
        )));
    }
    if *t < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "gamma_upper requires t >= 0, got {t}"
        )));
    }
    if t.is_zero() {
        return gamma_complete(s, prec);
    }
    let bits = prec.bits();
    let s = Float::with_val(bits, s);
    let t = Float::with_val(bits, t);
    // t^s e^{-t}, the common prefactor of both branches
    let prefactor = Float::with_val(bits, &t).pow(&s) * Float::with_val(bits, -t.clone()).exp();

    let boundary = s.clone() + 1u32;
    if t < boundary {
        // lower-gamma series: gamma(s,t) = t^s e^{-t} sum_k t^k / (s (s+1) ... (s+k))
        let stop = prec.stop_eps();
        let budget = iter_budget(prec);
        let mut denom = s.clone();
        let mut term = Float::with_val(bits, 1) / &denom;
        let mut sum = term.clone();
        let mut converged = false;
        for _ in 0..budget {
            denom += 1u32;
            term *= &t;
            term /= &denom;
            sum += &term;
            if term.clone().abs() < sum.clone().abs() * &stop {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(CoreError::PrecisionFailure(format!(
                "lower-gamma series did not converge for s={s}, t={t}"
            )));
        }
        let lower = prefactor * sum;
        Ok(Float::with_val(bits, s.gamma()) - lower)
    } else {
        // continued fraction (modified Lentz):
        // Gamma(s,t) = t^s e^{-t} / (t+1-s - 1(1-s)/(t+3-s - 2(2-s)/(t+5-s - ...)))
        let stop = prec.stop_eps();
        let budget = iter_budget(prec);
        let tiny = prec.pow10(-(2 * prec.digits() as i32));
        let mut b = t.clone() + 1u32 - &s;
        let mut c = Float::with_val(bits, 1) / &tiny;
        let mut d = if b.is_zero() { tiny.clone() } else { b.clone() };
        d.recip_mut();
        let mut h = d.clone();
        let mut converged = false;
        for i in 1..=budget {
            let fi = Float::with_val(bits, i);
            let an = -(fi.clone() * (fi - &s));
            b += 2u32;
            d = an.clone() * &d + &b;
            if d.clone().abs() < tiny {
                d = tiny.clone();
            }
            c = b.clone() + an / &c;
            if c.clone().abs() < tiny {
                c = tiny.clone();
            }
            d.recip_mut();
            let delta = d.clone() * &c;
            h *= &delta;
            if (delta - 1u32).abs() < stop {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(CoreError::PrecisionFailure(format!(
                "incomplete-gamma continued fraction did not converge for s={s}, t={t}"
            )));
        }
        Ok(prefactor * h)
    }
}

/// `k`-th moment `mu_k = int_0^inf x^k w(x, t) dx` of the jump weight.
pub fn moment(k: usize, w: &JumpWeight, prec: &Precision) -> Result<Float> {
    let bits = prec.bits();
    let s = Float::with_val(bits, w.alpha()) + Float::with_val(bits, k as u32 + 1);
    let complete = gamma_complete(&s, prec)?;
    let upper = gamma_upper(&s, w.t(), prec)?;
    Ok(Float::with_val(bits, w.a()) * complete + Float::with_val(bits, w.b()) * upper)
}

/// Moments `mu_0 ... mu_{k_max}` of a jump weight.
#[derive(Debug, Clone)]
pub struct MomentTable {
    weight: JumpWeight,
    mu: Vec<Float>,
    precision: Precision,
}

impl MomentTable {
    /// Builds the table using the upward recurrence
    /// `Gamma(s+1, t) = s Gamma(s, t) + t^s e^{-t}` from a single base
    /// evaluation (and the analogous recurrence for the complete gamma).
    pub fn build(w: &JumpWeight, k_max: usize, prec: &Precision) -> Result<Self> {
        let bits = prec.bits();
        let alpha = Float::with_val(bits, w.alpha());
        let t = Float::with_val(bits, w.t());

        let mut s = alpha.clone() + 1u32;
        let mut upper = gamma_upper(&s, &t, prec)?;
        let mut complete = gamma_complete(&s, prec)?;
        // t^s e^{-t}, stepped by one power of t per k
        let mut tp = if t.is_zero() {
            Float::with_val(bits, 0)
        } else {
            Float::with_val(bits, &t).pow(&s) * Float::with_val(bits, -t.clone()).exp()
        };

        let mut mu = Vec::with_capacity(k_max + 1);
        for _ in 0..=k_max {
            let m = Float::with_val(bits, w.a()) * &complete + Float::with_val(bits, w.b()) * &upper;
            mu.push(m);
            upper = upper * &s + &tp;
            complete *= &s;
            tp *= &t;
            s += 1u32;
        }
        Ok(Self {
            weight: w.clone(),
            mu,
            precision: *prec,
        })
    }

    pub fn weight(&self) -> &JumpWeight {
        &self.weight
    }

    pub fn k_max(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn mu(&self, k: usize) -> Result<&Float> {
        self.mu.get(k).ok_or(CoreError::IndexOutOfRange {
            index: k,
            max: self.mu.len() - 1,
        })
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(80, 40).unwrap()
    }

    fn close(x: &Float, y: &Float, tol: &Float) -> bool {
        let scale = Float::with_val(x.prec(), 1)
            .max(&x.clone().abs())
            .max(&y.clone().abs());
        (x.clone() - y).abs() < scale * tol.clone()
    }

    #[test]
    fn gamma_complete_values() {
        let p = prec();
        assert_eq!(gamma_complete(&p.float(1), &p).unwrap(), 1.0);
        assert_eq!(gamma_complete(&p.float(5), &p).unwrap(), 24.0);
        // Gamma(1/2) = sqrt(pi)
        let g = gamma_complete(&p.float(0.5), &p).unwrap();
        let sqrt_pi = Float::with_val(p.bits(), rug::float::Constant::Pi).sqrt();
        assert!(close(&g, &sqrt_pi, &p.target_eps()));
        assert!(gamma_complete(&p.float(0), &p).is_err());
        assert!(gamma_complete(&p.float(-1), &p).is_err());
    }

    #[test]
    fn gamma_upper_closed_forms() {
        let p = prec();
        // Gamma(1, 0) = 1
        assert_eq!(gamma_upper(&p.float(1), &p.float(0), &p).unwrap(), 1.0);
        // Gamma(1, t) = e^{-t}, on both sides of the series/CF split
        for t in [0.25, 0.5, 1.0, 3.0, 10.0, 40.0] {
            let g = gamma_upper(&p.float(1), &p.float(t), &p).unwrap();
            let e = p.float(-t).exp();
            assert!(close(&g, &e, &p.target_eps()), "t = {t}");
        }
        // complete-gamma degenerate case
        let g = gamma_upper(&p.float(2.5), &p.float(0), &p).unwrap();
        let c = gamma_complete(&p.float(2.5), &p).unwrap();
        assert_eq!(g, c);
    }

    #[test]
    fn gamma_upper_against_mpfr() {
        // MPFR carries its own incomplete gamma; use it as an
        // implementation-independent oracle across the region split.
        let p = prec();
        for s in [0.3, 1.0, 2.5, 7.0, 15.5] {
            for t in [0.1, 1.0, 2.9, 8.0, 25.0, 80.0] {
                let ours = gamma_upper(&p.float(s), &p.float(t), &p).unwrap();
                let theirs = p.float(s).gamma_inc(&p.float(t));
                assert!(close(&ours, &theirs, &p.target_eps()), "s={s}, t={t}");
            }
        }
    }

    #[test]
    fn gamma_recurrence_residual() {
        let p = prec();
        for s in [0.5, 1.5, 4.0, 9.25] {
            for t in [0.5, 2.0, 6.0, 30.0] {
                let s = p.float(s);
                let t = p.float(t);
                let lhs = gamma_upper(&(s.clone() + 1u32), &t, &p).unwrap();
                let g = gamma_upper(&s, &t, &p).unwrap();
                let tp = Float::with_val(p.bits(), &t).pow(&s)
                    * Float::with_val(p.bits(), -t.clone()).exp();
                let rhs = s * g + tp;
                assert!(close(&lhs, &rhs, &p.target_eps()));
            }
        }
    }

    #[test]
    fn moment_closed_forms() {
        let p = prec();
        // B = 0: jump term vanishes, mu_k = A k! for alpha = 1? no:
        // mu_k = A Gamma(alpha + k + 1); alpha = 1, A = 2, k = 3 -> 2 * 4! = 48
        let w = JumpWeight::new(1.0, 2.0, 0.0, 5.0, &p).unwrap();
        let m = moment(3, &w, &p).unwrap();
        assert!(close(&m, &p.float(48), &p.target_eps()));
        // (k=0, alpha=0, A=0, B=1, t=1) -> e^{-1}
        let w = JumpWeight::new(0.0, 0.0, 1.0, 1.0, &p).unwrap();
        let m = moment(0, &w, &p).unwrap();
        let e = p.float(-1).exp();
        assert!(close(&m, &e, &p.target_eps()));
    }

    #[test]
    fn moment_table_matches_direct() {
        let p = prec();
        let w = JumpWeight::new(0.75, 0.5, 1.5, 2.0, &p).unwrap();
        let table = MomentTable::build(&w, 12, &p).unwrap();
        for k in 0..=12 {
            let direct = moment(k, &w, &p).unwrap();
            assert!(close(table.mu(k).unwrap(), &direct, &p.target_eps()), "k = {k}");
            assert!(*table.mu(k).unwrap() > 0.0);
        }
    }

    #[test]
    fn moment_table_factorials() {
        // (B=0, alpha=0) is inadmissible (alpha = 0 needs A = 0), so the
        // factorial check runs at alpha = 1: mu_k = A (k+1)!.
        let p = prec();
        let w = JumpWeight::new(1.0, 1.0, 0.0, 0.0, &p).unwrap();
        let table = MomentTable::build(&w, 6, &p).unwrap();
        let mut fact = p.float(1);
        for k in 0..=6 {
            fact *= p.float(k as u32 + 1);
            assert!(close(table.mu(k).unwrap(), &fact, &p.target_eps()), "k = {k}");
        }
    }

    #[test]
    fn moments_decrease_in_t_when_a_zero() {
        let p = prec();
        let ts = [0.5, 1.0, 2.0, 4.0];
        for k in [0usize, 2, 5] {
            let mut prev: Option<Float> = None;
            for &t in &ts {
                let w = JumpWeight::new(0.5, 0.0, 1.0, t, &p).unwrap();
                let m = moment(k, &w, &p).unwrap();
                if let Some(pv) = prev {
                    assert!(m < pv, "mu_{k} not decreasing at t = {t}");
                }
                prev = Some(m);
            }
        }
    }

    #[test]
    fn doubling_agreement() {
        let p = prec();
        let p2 = p.doubled();
        let w = JumpWeight::new(2.5, 1.0, 1.0, 3.0, &p).unwrap();
        let w2 = JumpWeight::new(2.5, 1.0, 1.0, 3.0, &p2).unwrap();
        for k in [0usize, 4, 9] {
            let m1 = moment(k, &w, &p).unwrap();
            let m2 = moment(k, &w2, &p2).unwrap();
            let rel = (m1.clone() - &m2).abs() / m2.clone().abs();
            assert!(rel < p.target_eps());
        }
    }
}
