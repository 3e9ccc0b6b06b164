//! Auxiliary quantities `R_n`, `r_n`, `S_n`, `H_n` and the rational
//! ladder coefficients `A_n(z)`, `B_n(z)`.
//!
//! The residues at the jump are
//!
//! ```text
//! R_n = B w_0(t) P_n(t,t)^2 / h_n,    r_n = B w_0(t) P_n(t,t) P_{n-1}(t,t) / h_{n-1},
//! ```
//!
//! with `r_0 = 0`, and the logarithmic derivative of the Hankel
//! determinant is accumulated analytically as `H_n = -t sum_{j<n} R_j`
//! (never by numerical differentiation; finite differences are reserved
//! for *checking* derivative identities in the dynamics module).

use rug::Float;

use crate::error::{CoreError, Result};
use crate::orthopoly::OrthoTable;
use crate::precision::Precision;
use crate::weight::JumpWeight;

/// Per-degree auxiliary quantities. All sequences run to `n_max + 1`
/// (`H` to `n_max + 2`), matching the margin in [`OrthoTable`].
#[derive(Debug, Clone)]
pub struct AuxTable {
    weight: JumpWeight,
    n_max: usize,
    r_big: Vec<Float>,
    r_small: Vec<Float>,
    s: Vec<Float>,
    h_log: Vec<Float>,
    sum_r: Vec<Float>,
    precision: Precision,
}

/// Builds the auxiliary table from an orthogonal-polynomial table.
///
/// Rejects `t = 0` and `B <= 0`, where the residues degenerate; those
/// parameter points remain valid for moments and orthopoly.
pub fn aux_table(ortho: &OrthoTable, w: &JumpWeight, prec: &Precision) -> Result<AuxTable> {
    if w.t().is_zero() {
        return Err(CoreError::InvalidParameter(
            "auxiliary quantities are degenerate at t = 0".into(),
        ));
    }
    if *w.b() <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "auxiliary quantities require B > 0".into(),
        ));
    }
    let bits = prec.bits();
    let n_max = ortho.n_max();
    let t = Float::with_val(bits, w.t());
    let bw0 = Float::with_val(bits, w.b()) * w.w0_at(&t, prec);

    let top = n_max + 1;
    let mut r_big = Vec::with_capacity(top + 1);
    let mut r_small = Vec::with_capacity(top + 1);
    let mut s = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let pn = ortho.p_at_t(n)?;
        let rn = bw0.clone() * Float::with_val(bits, pn).square() / ortho.h(n)?;
        if rn.is_zero() {
            return Err(CoreError::DivisionGuard(format!(
                "R_{n} underflowed to zero at {} working digits; raise precision",
                prec.digits()
            )));
        }
        s.push(Float::with_val(bits, 1) - Float::with_val(bits, 1) / &rn);
        r_big.push(rn);
        if n == 0 {
            r_small.push(Float::with_val(bits, 0));
        } else {
            let pm = ortho.p_at_t(n - 1)?;
            r_small.push(bw0.clone() * pn * pm / ortho.h(n - 1)?);
        }
    }

    // prefix sums of R and H_n = -t sum_{j<n} R_j, n = 0 ..= top + 1
    let mut sum_r = Vec::with_capacity(top + 2);
    let mut acc = Float::with_val(bits, 0);
    sum_r.push(acc.clone());
    for rn in &r_big {
        acc += rn;
        sum_r.push(acc.clone());
    }
    let h_log: Vec<Float> = sum_r.iter().map(|s| -(t.clone() * s)).collect();

    Ok(AuxTable {
        weight: w.clone(),
        n_max,
        r_big,
        r_small,
        s,
        h_log,
        sum_r,
        precision: *prec,
    })
}

impl AuxTable {
    pub fn weight(&self) -> &JumpWeight {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    /// `R_n`, available for `n <= n_max + 1`.
    pub fn r_big(&self, n: usize) -> Result<&Float> {
        self.r_big.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.r_big.len() - 1,
        })
    }

    /// `r_n`, available for `n <= n_max + 1`; `r_0 = 0`.
    pub fn r_small(&self, n: usize) -> Result<&Float> {
        self.r_small.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.r_small.len() - 1,
        })
    }

    /// `S_n = 1 - 1/R_n`, available for `n <= n_max + 1`.
    pub fn s(&self, n: usize) -> Result<&Float> {
        self.s.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.s.len() - 1,
        })
    }

    /// `H_n = -t sum_{j<n} R_j`, available for `n <= n_max + 2`.
    pub fn h_aux(&self, n: usize) -> Result<&Float> {
        self.h_log.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.h_log.len() - 1,
        })
    }

    /// `sum_{j<n} R_j`, available for `n <= n_max + 2`.
    pub fn sum_r(&self, n: usize) -> Result<&Float> {
        self.sum_r.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.sum_r.len() - 1,
        })
    }

    /// CSV rows `(n, R_n, r_n, S_n, H_n)` at full target precision.
    pub fn to_csv_rows(&self) -> Vec<Vec<String>> {
        let p = &self.precision;
        (0..self.r_big.len())
            .map(|n| {
                vec![
                    n.to_string(),
                    p.format(&self.r_big[n]),
                    p.format(&self.r_small[n]),
                    p.format(&self.s[n]),
                    p.format(&self.h_log[n]),
                ]
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = &self.precision;
        let seq = |v: &[Float]| -> Vec<String> { v.iter().map(|x| p.format(x)).collect() };
        serde_json::json!({
            "weight": self.weight.describe(p),
            "n_max": self.n_max,
            "R": seq(&self.r_big),
            "r": seq(&self.r_small),
            "S": seq(&self.s),
            "H": seq(&self.h_log),
        })
    }
}

/// `H_n = -t sum_{j<n} R_j`, cross-checked against
/// `H_n = p1(n, t) + n (n + alpha)` before being returned.
pub fn h_of(aux: &AuxTable, ortho: &OrthoTable, n: usize) -> Result<Float> {
    let h = aux.h_aux(n)?.clone();
    if n <= ortho.n_max() + 1 {
        let prec = aux.precision();
        let bits = prec.bits();
        let nf = Float::with_val(bits, n as u32);
        let other = ortho.p1(n)?.clone()
            + nf.clone() * (nf + Float::with_val(bits, aux.weight.alpha()));
        let scale = Float::with_val(bits, 1)
            .max(&h.clone().abs())
            .max(&other.clone().abs());
        let diff = (h.clone() - &other).abs() / scale;
        let tol = prec.pow10(-(prec.target_digits() as i32 - 10));
        if diff > tol {
            return Err(CoreError::ConsistencyFailure(format!(
                "H_{n} from the R-sum disagrees with p1(n) + n(n+alpha): rel diff {diff}"
            )));
        }
    }
    Ok(h)
}

/// Rational ladder coefficients of degree `n`, represented by their pole
/// data: `A_n(z) = R_n/(z-t) + (1-R_n)/z`,
/// `B_n(z) = r_n/(z-t) - (n+r_n)/z`.
#[derive(Debug, Clone)]
pub struct LadderCoeffs {
    pub n: usize,
    /// Residue of `A_n` at `z = t` (this is `R_n`).
    pub a_res_t: Float,
    /// Residue of `A_n` at `z = 0` (this is `1 - R_n`).
    pub a_res_0: Float,
    /// Residue of `B_n` at `z = t` (this is `r_n`).
    pub b_res_t: Float,
    /// Residue of `B_n` at `z = 0` (this is `-(n + r_n)`).
    pub b_res_0: Float,
    t: Float,
    alpha: Float,
    bits: u32,
}

pub fn ladder_coeffs(aux: &AuxTable, n: usize) -> Result<LadderCoeffs> {
    let bits = aux.precision.bits();
    let rn = aux.r_big(n)?.clone();
    let sn = aux.r_small(n)?.clone();
    Ok(LadderCoeffs {
        n,
        a_res_t: rn.clone(),
        a_res_0: Float::with_val(bits, 1) - &rn,
        b_res_t: sn.clone(),
        b_res_0: -(Float::with_val(bits, n as u32) + &sn),
        t: Float::with_val(bits, aux.weight.t()),
        alpha: Float::with_val(bits, aux.weight.alpha()),
        bits,
    })
}

impl LadderCoeffs {
    pub fn a_at(&self, z: &Float) -> Float {
        self.a_res_t.clone() / (z.clone() - &self.t) + self.a_res_0.clone() / z
    }

    pub fn b_at(&self, z: &Float) -> Float {
        self.b_res_t.clone() / (z.clone() - &self.t) + self.b_res_0.clone() / z
    }

    /// `A_n'(z)`.
    pub fn a_deriv_at(&self, z: &Float) -> Float {
        let dt = (z.clone() - &self.t).square();
        let d0 = Float::with_val(self.bits, z).square();
        -(self.a_res_t.clone() / dt) - self.a_res_0.clone() / d0
    }

    /// `B_n'(z)`.
    pub fn b_deriv_at(&self, z: &Float) -> Float {
        let dt = (z.clone() - &self.t).square();
        let d0 = Float::with_val(self.bits, z).square();
        -(self.b_res_t.clone() / dt) - self.b_res_0.clone() / d0
    }

    /// `v_0'(z) = 1 - alpha/z` for the Laguerre base weight.
    pub fn v0_prime_at(&self, z: &Float) -> Float {
        Float::with_val(self.bits, 1) - self.alpha.clone() / z
    }
}

/// Diagonal resolvent identity `t Rtilde(t,t) = H_n`, computed two ways
/// (`H_n` and `-t r_n - n(n+alpha) + beta_n`) with an agreement assertion,
/// plus a finite-difference check of `d/dt (t Rtilde) = r_n`.
pub fn resolvent_diag(aux: &AuxTable, ortho: &OrthoTable, n: usize) -> Result<Float> {
    if n < 1 {
        return Err(CoreError::InvalidParameter(
            "resolvent_diag requires n >= 1".into(),
        ));
    }
    let prec = aux.precision();
    let bits = prec.bits();
    let route_a = aux.h_aux(n)?.clone();
    let nf = Float::with_val(bits, n as u32);
    let t = Float::with_val(bits, aux.weight.t());
    // from t sum_{j<n} R_j = -t r_n - n(n+alpha) + beta_n and
    // H_n = -t sum_{j<n} R_j
    let route_b = t.clone() * aux.r_small(n)?
        + nf.clone() * (nf + Float::with_val(bits, aux.weight.alpha()))
        - ortho.beta(n)?;
    let scale = Float::with_val(bits, 1)
        .max(&route_a.clone().abs())
        .max(&route_b.clone().abs());
    let tol = prec.pow10(-(prec.target_digits() as i32 - 10));
    let rel = (route_a.clone() - &route_b).abs() / scale;
    if rel > tol {
        return Err(CoreError::ConsistencyFailure(format!(
            "t Rtilde(t,t) routes disagree at n = {n}: rel diff {rel}"
        )));
    }

    // d/dt (t Rtilde) = r_n, by finite difference of H_n(t)
    let w = aux.weight.clone();
    let n_max = aux.n_max;
    let est = crate::dynamics::fd_derivative(
        &mut |tv: &Float| -> Result<Float> {
            let wt = w.with_t(tv.clone())?;
            let ortho_t = crate::orthopoly::build_ortho(&wt, n_max, prec)?;
            let aux_t = aux_table(&ortho_t, &wt, prec)?;
            Ok(aux_t.h_aux(n)?.clone())
        },
        &t,
        1,
        prec,
    )?;
    let rn = aux.r_small(n)?;
    let fd_tol = est.error_estimate.clone().max(&prec.pow10(
        -(prec.target_digits() as i32 / 2),
    ));
    let fd_diff = (est.value.clone() - rn).abs();
    if fd_diff > fd_tol * 1000u32 {
        return Err(CoreError::ConsistencyFailure(format!(
            "d/dt (t Rtilde) disagrees with r_{n}: diff {fd_diff}"
        )));
    }
    Ok(route_a)
}
