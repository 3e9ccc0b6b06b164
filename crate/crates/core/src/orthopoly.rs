//! Monic orthogonal polynomials, norms, recurrence coefficients and
//! Hankel determinants from moments.
//!
//! Construction goes through the Cholesky factorization of the moment
//! Gram matrix `(mu_{i+j})`: if `M = L L^T` then the rows of `L^{-1}` are
//! the coefficients of the orthonormal polynomials, the monic `P_n` is
//! that row rescaled by its leading entry and `h_n = L_{nn}^2`. Loss of
//! positive definiteness during the factorization is the conditioning
//! signal; callers raise the digit count and rebuild.

use rug::Float;

use crate::error::{CoreError, Result};
use crate::moments::MomentTable;
use crate::precision::Precision;
use crate::weight::JumpWeight;

/// Per-degree data for the monic orthogonal polynomials of a jump weight.
///
/// Internally built one degree past the requested `n_max` so downstream
/// consumers (auxiliary quantities, identities) have the margin they need:
/// all sequences run to index `n_max + 1`.
#[derive(Debug, Clone)]
pub struct OrthoTable {
    weight: JumpWeight,
    n_max: usize,
    /// Squared norms `h_0 ... h_{n_max+1}`.
    h: Vec<Float>,
    /// Diagonal recurrence coefficients `alpha_0 ... alpha_{n_max}`.
    alpha_rec: Vec<Float>,
    /// Off-diagonal recurrence coefficients `beta_1 ... beta_{n_max+1}`
    /// (index `n-1` holds `beta_n`).
    beta_rec: Vec<Float>,
    /// Sub-leading coefficients `p1(0) = 0, ..., p1(n_max+1)`.
    p1: Vec<Float>,
    /// Monic coefficient vectors, ascending powers, degree 0 ..= n_max+1.
    coeffs: Vec<Vec<Float>>,
    /// `P_n(t, t)` for `n = 0 ..= n_max+1`.
    p_at_t: Vec<Float>,
    precision: Precision,
}

/// Builds the orthogonal-polynomial table for `w` up to degree `n_max`.
///
/// Needs moments up to `k = 2 n_max + 2`; fails with a conditioning error
/// if the Gram matrix is not positive definite at the working precision.
pub fn build_ortho(w: &JumpWeight, n_max: usize, prec: &Precision) -> Result<OrthoTable> {
    let dim = n_max + 2; // polynomials of degree 0 ..= n_max + 1
    let moments = MomentTable::build(w, 2 * (n_max + 1), prec)?;
    let bits = prec.bits();

    // Cholesky factorization of (mu_{i+j}), lower triangular.
    let mut l = vec![vec![Float::with_val(bits, 0); dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = Float::with_val(bits, moments.mu(i + j)?);
            for k in 0..j {
                s -= l[i][k].clone() * &l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(CoreError::ConditioningFailure {
                        digits: prec.digits(),
                        detail: format!(
                            "moment Gram matrix lost positive definiteness at row {i}"
                        ),
                    });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / &l[j][j];
            }
        }
    }

    // Row n of L^{-1} holds the orthonormal coefficients of degree n;
    // rescaling by L_nn makes the polynomial monic.
    let mut coeffs: Vec<Vec<Float>> = Vec::with_capacity(dim);
    for n in 0..dim {
        // row n of L^{-1}: back-substitute L^T z = e_n, then z * L_nn
        let mut z = vec![Float::with_val(bits, 0); n + 1];
        z[n] = Float::with_val(bits, 1) / &l[n][n];
        for j in (0..n).rev() {
            let mut s = Float::with_val(bits, 0);
            for k in j + 1..=n {
                s -= l[k][j].clone() * &z[k];
            }
            z[j] = s / &l[j][j];
        }
        let lead = l[n][n].clone();
        // z_j is the orthonormal coefficient of x^j; rescaling by L_nn
        // makes the leading coefficient 1.
        let monic: Vec<Float> = z.into_iter().map(|c| c * &lead).collect();
        coeffs.push(monic);
    }

    let h: Vec<Float> = (0..dim).map(|n| l[n][n].clone().square()).collect();

    let mut p1 = Vec::with_capacity(dim);
    p1.push(Float::with_val(bits, 0)); // p1(0) := 0
    for n in 1..dim {
        p1.push(coeffs[n][n - 1].clone());
    }

    let mut alpha_rec = Vec::with_capacity(dim - 1);
    for n in 0..dim - 1 {
        alpha_rec.push(p1[n].clone() - &p1[n + 1]);
    }
    let mut beta_rec = Vec::with_capacity(dim - 1);
    for n in 1..dim {
        beta_rec.push(h[n].clone() / &h[n - 1]);
    }

    let t = Float::with_val(bits, w.t());
    let p_at_t: Vec<Float> = coeffs.iter().map(|c| horner(c, &t, bits)).collect();

    Ok(OrthoTable {
        weight: w.clone(),
        n_max,
        h,
        alpha_rec,
        beta_rec,
        p1,
        coeffs,
        p_at_t,
        precision: *prec,
    })
}

/// Builds the table at `prec`, accepting the result only when a rebuild at
/// doubled working digits agrees to `target_digits`. On disagreement or
/// conditioning failure the digit count doubles, up to `ceiling_digits`.
///
/// Returns the accepted table together with the precision actually used.
pub fn build_checked(
    w: &JumpWeight,
    n_max: usize,
    prec: &Precision,
    ceiling_digits: u32,
) -> Result<(OrthoTable, Precision)> {
    let mut current = *prec;
    loop {
        if current.digits() > ceiling_digits {
            return Err(CoreError::PrecisionCeiling {
                ceiling: ceiling_digits,
            });
        }
        let attempt = (|| -> Result<OrthoTable> {
            let base = build_ortho(w, n_max, &current)?;
            let doubled = build_ortho(w, n_max, &current.doubled())?;
            let tol = current.target_eps();
            for n in 0..=n_max + 1 {
                let a = base.h(n)?;
                let b = doubled.h(n)?;
                let rel = (a.clone() - b).abs() / b.clone().abs();
                if rel > tol {
                    return Err(CoreError::ConditioningFailure {
                        digits: current.digits(),
                        detail: format!("h_{n} disagrees under precision doubling"),
                    });
                }
            }
            Ok(base)
        })();
        match attempt {
            Ok(table) => return Ok((table, current)),
            Err(CoreError::ConditioningFailure { .. }) => {
                current = current.doubled();
            }
            Err(e) => return Err(e),
        }
    }
}

fn horner(coeffs: &[Float], z: &Float, bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

impl OrthoTable {
    pub fn weight(&self) -> &JumpWeight {
        &self.weight
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    /// Squared norm `h_n`, available for `n <= n_max + 1`.
    pub fn h(&self, n: usize) -> Result<&Float> {
        self.h.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.h.len() - 1,
        })
    }

    /// Recurrence coefficient `alpha_n`, available for `n <= n_max`.
    pub fn alpha(&self, n: usize) -> Result<&Float> {
        self.alpha_rec.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.alpha_rec.len() - 1,
        })
    }

    /// Recurrence coefficient `beta_n`, available for `1 <= n <= n_max + 1`.
    pub fn beta(&self, n: usize) -> Result<&Float> {
        if n == 0 {
            return Err(CoreError::IndexOutOfRange { index: 0, max: 0 });
        }
        self.beta_rec.get(n - 1).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.beta_rec.len(),
        })
    }

    /// Sub-leading coefficient `p1(n, t)`, with `p1(0) = 0`,
    /// available for `n <= n_max + 1`.
    pub fn p1(&self, n: usize) -> Result<&Float> {
        self.p1.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.p1.len() - 1,
        })
    }

    /// Monic coefficient vector of `P_n`, ascending powers.
    pub fn coeffs(&self, n: usize) -> Result<&[Float]> {
        self.coeffs
            .get(n)
            .map(|c| c.as_slice())
            .ok_or(CoreError::IndexOutOfRange {
                index: n,
                max: self.coeffs.len() - 1,
            })
    }

    /// `P_n(t, t)`: the polynomial evaluated at the jump.
    pub fn p_at_t(&self, n: usize) -> Result<&Float> {
        self.p_at_t.get(n).ok_or(CoreError::IndexOutOfRange {
            index: n,
            max: self.p_at_t.len() - 1,
        })
    }

    /// Evaluates `P_n(z)` by the three-term recurrence
    /// `P_{k+1} = (z - alpha_k) P_k - beta_k P_{k-1}` from `P_0 = 1`.
    pub fn eval_monic(&self, n: usize, z: &Float) -> Result<Float> {
        if n >= self.coeffs.len() {
            return Err(CoreError::IndexOutOfRange {
                index: n,
                max: self.coeffs.len() - 1,
            });
        }
        let bits = self.precision.bits();
        let mut prev = Float::with_val(bits, 0); // P_{-1}
        let mut cur = Float::with_val(bits, 1); // P_0
        for k in 0..n {
            let next = (Float::with_val(bits, z) - self.alpha(k)?) * &cur
                - if k == 0 {
                    Float::with_val(bits, 0)
                } else {
                    self.beta(k)?.clone() * &prev
                };
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Evaluates `P_n(z)` from the stored coefficient vector. Second
    /// evaluation route, used for cross-checks.
    pub fn eval_coeffs(&self, n: usize, z: &Float) -> Result<Float> {
        Ok(horner(self.coeffs(n)?, z, self.precision.bits()))
    }

    /// `P_n'(z)` by exact differentiation of the coefficient vector.
    pub fn eval_monic_deriv(&self, n: usize, z: &Float) -> Result<Float> {
        let c = self.coeffs(n)?;
        let bits = self.precision.bits();
        let mut acc = Float::with_val(bits, 0);
        for k in (1..c.len()).rev() {
            acc = acc * z + c[k].clone() * Float::with_val(bits, k as u32);
        }
        Ok(acc)
    }

    /// `P_n''(z)` by exact differentiation of the coefficient vector.
    pub fn eval_monic_deriv2(&self, n: usize, z: &Float) -> Result<Float> {
        let c = self.coeffs(n)?;
        let bits = self.precision.bits();
        let mut acc = Float::with_val(bits, 0);
        for k in (2..c.len()).rev() {
            let factor = Float::with_val(bits, k as u32) * Float::with_val(bits, (k - 1) as u32);
            acc = acc * z + c[k].clone() * factor;
        }
        Ok(acc)
    }

    /// JSON export with decimal strings at full target precision.
    pub fn to_json(&self) -> serde_json::Value {
        let p = &self.precision;
        let seq = |v: &[Float]| -> Vec<String> { v.iter().map(|x| p.format(x)).collect() };
        serde_json::json!({
            "weight": {
                "alpha": p.format(self.weight.alpha()),
                "A": p.format(self.weight.a()),
                "B": p.format(self.weight.b()),
                "t": p.format(self.weight.t()),
            },
            "n_max": self.n_max,
            "digits": p.digits(),
            "target_digits": p.target_digits(),
            "h": seq(&self.h),
            "alpha_rec": seq(&self.alpha_rec),
            "beta_rec": seq(&self.beta_rec),
            "p1": seq(&self.p1),
            "coeffs": self.coeffs.iter().map(|c| seq(c)).collect::<Vec<_>>(),
            "P_at_t": seq(&self.p_at_t),
        })
    }
}

/// Hankel determinant `D_n = det(mu_{i+j})_{i,j<n} = prod_{j<n} h_j`,
/// with `D_0 = 1` by the empty-product convention.
#[derive(Debug, Clone)]
pub struct HankelDet {
    pub n: usize,
    pub value: Float,
    pub log_value: Float,
}

/// Hankel determinant from the norm product. Available for
/// `n <= n_max + 2`.
pub fn hankel_det(table: &OrthoTable, n: usize) -> Result<HankelDet> {
    let bits = table.precision.bits();
    let mut value = Float::with_val(bits, 1);
    let mut log_value = Float::with_val(bits, 0);
    for j in 0..n {
        let hj = table.h(j)?;
        value *= hj;
        log_value += Float::with_val(bits, hj).ln();
    }
    Ok(HankelDet { n, value, log_value })
}

/// Generating function `G(t, n) = D_n(t) / D_n[w_0]`, where `w_0` is the
/// unperturbed Laguerre weight with classical norms
/// `h_j = j! Gamma(j + alpha + 1)`. For `A = 0, B = 1` this is the
/// probability that all eigenvalues lie in `[t, inf)`.
pub fn generating_fn(w: &JumpWeight, n: usize, prec: &Precision) -> Result<Float> {
    if n < 1 {
        return Err(CoreError::InvalidParameter(
            "generating_fn requires n >= 1".into(),
        ));
    }
    let table = build_ortho(w, n.saturating_sub(1), prec)?;
    let bits = prec.bits();
    let mut ratio = Float::with_val(bits, 1);
    let mut jfact = Float::with_val(bits, 1); // j!
    let mut g = crate::moments::gamma_complete(
        &(Float::with_val(bits, w.alpha()) + 1u32),
        prec,
    )?; // Gamma(j + alpha + 1)
    for j in 0..n {
        let classical = jfact.clone() * &g;
        ratio *= table.h(j)?.clone() / classical;
        jfact *= Float::with_val(bits, j as u32 + 1);
        g *= Float::with_val(bits, w.alpha()) + Float::with_val(bits, j as u32 + 1);
    }
    Ok(ratio)
}

/// Real zeros of `P_n` on `(0, upper)` by bisection on sign changes of the
/// recurrence evaluation; zeros of a positive-weight orthogonal polynomial
/// are simple and real so a fine bracketing grid suffices.
pub fn monic_zeros(table: &OrthoTable, n: usize, prec: &Precision) -> Result<Vec<Float>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let bits = prec.bits();
    // Zeros lie in the support; 4n + 2 alpha + t + margin bounds them.
    let upper = Float::with_val(bits, 4 * n as u32 + 16)
        + Float::with_val(bits, table.weight.alpha()) * 2u32
        + table.weight.t();
    let grid_points = 64 * n;
    let tol = {
        let half = prec.target_digits() / 2;
        prec.pow10(-(half as i32))
    };
    let step = upper.clone() / Float::with_val(bits, grid_points as u32);
    let mut zeros = Vec::with_capacity(n);
    let mut x_prev = Float::with_val(bits, &step) / 1000u32; // avoid exact 0
    let mut f_prev = table.eval_monic(n, &x_prev)?;
    for i in 1..=grid_points {
        let x = step.clone() * Float::with_val(bits, i as u32);
        let f = table.eval_monic(n, &x)?;
        if (f_prev.clone() * &f) < 0.0 {
            // bisect
            let (mut lo, mut hi, mut flo) = (x_prev.clone(), x.clone(), f_prev.clone());
            loop {
                let mid = (lo.clone() + &hi) / 2u32;
                let width = hi.clone() - &lo;
                if width < tol {
                    zeros.push(mid);
                    break;
                }
                let fm = table.eval_monic(n, &mid)?;
                if (flo.clone() * &fm) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
        }
        x_prev = x;
        f_prev = f;
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{gamma_complete, moment};

    fn prec() -> Precision {
        Precision::new(80, 40).unwrap()
    }

    fn relclose(x: &Float, y: &Float, tol: &Float) -> bool {
        let scale = Float::with_val(x.prec(), 1)
            .max(&x.clone().abs())
            .max(&y.clone().abs());
        (x.clone() - y).abs() < scale * tol.clone()
    }

    #[test]
    fn classical_laguerre_closed_forms() {
        // B = 0: alpha_n = 2n + 1 + alpha, beta_n = n(n + alpha),
        // h_n = A n! Gamma(n + alpha + 1).
        let p = prec();
        let alpha = 1.5f64;
        let w = JumpWeight::new(alpha, 2.0, 0.0, 3.0, &p).unwrap();
        let table = build_ortho(&w, 6, &p).unwrap();
        let tol = p.target_eps();
        for n in 0..=6usize {
            let expect_alpha = p.float(2 * n as u32 + 1) + p.float(alpha);
            assert!(relclose(table.alpha(n).unwrap(), &expect_alpha, &tol), "alpha_{n}");
            let nf = p.float(n as u32);
            let expect_h = p.float(2)
                * gamma_complete(&(nf.clone() + 1u32), &p).unwrap()
                * gamma_complete(&(nf.clone() + p.float(alpha) + 1u32), &p).unwrap();
            assert!(relclose(table.h(n).unwrap(), &expect_h, &tol), "h_{n}");
            if n >= 1 {
                let expect_beta = nf.clone() * (nf + p.float(alpha));
                assert!(relclose(table.beta(n).unwrap(), &expect_beta, &tol), "beta_{n}");
            }
        }
    }

    #[test]
    fn gap_case_low_degree() {
        // alpha=0, A=0, B=1, t=1: alpha_0 = mu_1/mu_0 = 2, h_0 = e^{-1}
        let p = prec();
        let w = JumpWeight::new(0.0, 0.0, 1.0, 1.0, &p).unwrap();
        let table = build_ortho(&w, 3, &p).unwrap();
        let tol = p.target_eps();
        let e1 = p.float(-1).exp();
        assert!(relclose(table.h(0).unwrap(), &e1, &tol));
        assert!(relclose(table.alpha(0).unwrap(), &p.float(2), &tol));
    }

    #[test]
    fn t_zero_reduces_to_scaled_classical() {
        let p = prec();
        let w = JumpWeight::new(1.0, 0.5, 1.5, 0.0, &p).unwrap();
        let w_flat = JumpWeight::new(1.0, 2.0, 0.0, 0.0, &p).unwrap();
        let a = build_ortho(&w, 5, &p).unwrap();
        let b = build_ortho(&w_flat, 5, &p).unwrap();
        let tol = p.target_eps();
        for n in 0..=5 {
            assert!(relclose(a.h(n).unwrap(), b.h(n).unwrap(), &tol));
            assert!(relclose(a.alpha(n).unwrap(), b.alpha(n).unwrap(), &tol));
        }
    }

    #[test]
    fn recurrence_consistent_with_coeff_vectors() {
        // z P_n = P_{n+1} + alpha_n P_n + beta_n P_{n-1}, coefficientwise.
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let table = build_ortho(&w, 6, &p).unwrap();
        let tol = p.target_eps();
        let bits = p.bits();
        for n in 1..=6usize {
            let pn = table.coeffs(n).unwrap();
            let pn1 = table.coeffs(n + 1).unwrap();
            let pm1 = table.coeffs(n - 1).unwrap();
            let an = table.alpha(n).unwrap();
            let bn = table.beta(n).unwrap();
            // coefficient of x^k in z*P_n is pn[k-1]
            for k in 0..=n + 1 {
                let lhs = if k >= 1 {
                    pn[k - 1].clone()
                } else {
                    Float::with_val(bits, 0)
                };
                let mut rhs = pn1[k].clone();
                if k < pn.len() {
                    rhs += an.clone() * &pn[k];
                }
                if k < pm1.len() {
                    rhs += bn.clone() * &pm1[k];
                }
                assert!(relclose(&lhs, &rhs, &tol), "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn two_evaluation_routes_agree() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let table = build_ortho(&w, 5, &p).unwrap();
        let tol = p.target_eps();
        let z = p.float(2); // z = t, generic params
        for n in [0usize, 1, 2, 5] {
            let a = table.eval_monic(n, &z).unwrap();
            let b = table.eval_coeffs(n, &z).unwrap();
            assert!(relclose(&a, &b, &tol), "n = {n}");
        }
        // P_1(z) = z - mu_1/mu_0
        let mu0 = moment(0, &w, &p).unwrap();
        let mu1 = moment(1, &w, &p).unwrap();
        let expect = z.clone() - mu1 / mu0;
        let got = table.eval_monic(1, &z).unwrap();
        assert!(relclose(&got, &expect, &tol));
    }

    #[test]
    fn derivative_against_finite_difference() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let table = build_ortho(&w, 4, &p).unwrap();
        assert!(table.eval_monic_deriv(0, &p.float(1)).unwrap().is_zero());
        let one = table.eval_monic_deriv(1, &p.float(7)).unwrap();
        assert_eq!(one, 1.0);
        // FD oracle for n = 3 at z = 2
        let z = p.float(2);
        let h = p.pow10(-(p.target_digits() as i32 / 4));
        let fp = table.eval_coeffs(3, &(z.clone() + &h)).unwrap();
        let fm = table.eval_coeffs(3, &(z.clone() - &h)).unwrap();
        let fd = (fp - fm) / (h.clone() * 2u32);
        let exact = table.eval_monic_deriv(3, &z).unwrap();
        let tol = p.pow10(-(p.target_digits() as i32 / 2));
        assert!(relclose(&exact, &fd, &tol));
    }

    #[test]
    fn hankel_values() {
        let p = prec();
        let w = JumpWeight::new(0.0, 0.0, 1.0, 1.0, &p).unwrap();
        let table = build_ortho(&w, 3, &p).unwrap();
        let tol = p.target_eps();
        // D_0 = 1, D_1 = mu_0
        assert_eq!(hankel_det(&table, 0).unwrap().value, 1.0);
        let d1 = hankel_det(&table, 1).unwrap();
        let mu0 = moment(0, &w, &p).unwrap();
        assert!(relclose(&d1.value, &mu0, &tol));
        // D_2 = det [[G(1,1), G(2,1)], [G(2,1), G(3,1)]]
        let g = |s: f64| crate::moments::gamma_upper(&p.float(s), &p.float(1), &p).unwrap();
        let expect = g(1.0) * g(3.0) - g(2.0).square();
        let d2 = hankel_det(&table, 2).unwrap();
        assert!(relclose(&d2.value, &expect, &tol));
        // log form consistent
        let diff = (d2.log_value.clone() - d2.value.clone().ln()).abs();
        assert!(diff < tol);
    }

    #[test]
    fn generating_fn_closed_forms() {
        let p = prec();
        let tol = p.target_eps();
        // (n=1, alpha=0, A=0, B=1, t): G = e^{-t}
        for t in [0.5, 1.0, 2.0] {
            let w = JumpWeight::new(0.0, 0.0, 1.0, t, &p).unwrap();
            let g = generating_fn(&w, 1, &p).unwrap();
            let e = p.float(-t).exp();
            assert!(relclose(&g, &e, &tol), "t = {t}");
        }
        // B = 0: G = A^n
        let w = JumpWeight::new(1.5, 0.7, 0.0, 3.0, &p).unwrap();
        let g = generating_fn(&w, 4, &p).unwrap();
        let expect = p.float(0.7).square().square();
        assert!(relclose(&g, &expect, &tol));
        // t = 0, A = 0, B = 1: unperturbed
        let w = JumpWeight::new(0.5, 0.0, 1.0, 0.0, &p).unwrap();
        let g = generating_fn(&w, 3, &p).unwrap();
        assert!(relclose(&g, &p.float(1), &tol));
    }

    #[test]
    fn zeros_interlace() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let table = build_ortho(&w, 6, &p).unwrap();
        for n in 2..=5usize {
            let zn = monic_zeros(&table, n, &p).unwrap();
            let zn1 = monic_zeros(&table, n + 1, &p).unwrap();
            assert_eq!(zn.len(), n, "P_{n} zero count");
            assert_eq!(zn1.len(), n + 1, "P_{} zero count", n + 1);
            for i in 0..n {
                assert!(zn1[i] < zn[i], "interlacing left, n={n} i={i}");
                assert!(zn[i] < zn1[i + 1], "interlacing right, n={n} i={i}");
            }
        }
    }

    #[test]
    fn beta_positive() {
        let p = prec();
        let w = JumpWeight::new(0.5, 0.5, 1.5, 1.0, &p).unwrap();
        let table = build_ortho(&w, 8, &p).unwrap();
        for n in 1..=8 {
            assert!(*table.beta(n).unwrap() > 0.0, "beta_{n}");
        }
    }

    #[test]
    fn build_checked_doubles_to_ceiling() {
        let p = Precision::new(64, 40).unwrap();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let (_, used) = build_checked(&w, 4, &p, 4096).unwrap();
        assert!(used.digits() >= 64);
        // an absurdly low ceiling trips the guard for large n
        let err = build_checked(&w, 20, &Precision::new(40, 19).unwrap(), 50);
        assert!(matches!(err, Err(CoreError::PrecisionCeiling { .. }) | Ok(_)));
    }
}
