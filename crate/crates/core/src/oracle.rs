//! Independent brute-force verification by quadrature: direct evaluation
//! of the n-dimensional Hankel-determinant integral for `n <= 3`,
//! orthogonality inner products and the integration-by-parts identities.
//!
//! The integrand is piecewise smooth with a single breakpoint at the jump
//! `x = t`, so each axis splits there. On `[0, t]` the substitution
//! `x = t u^2` weakens the `x^alpha` endpoint singularity and panels are
//! graded geometrically toward `u = 0`; on `[t, X]` panel widths grow
//! geometrically and `X` carries a certified exponential tail bound
//! `int_X^infty x^k e^{-x} dx <= 2 X^k e^{-X}`.

use rug::ops::Pow;
use rug::Float;

use crate::error::{CoreError, Result};
use crate::grid::map_grid;
use crate::orthopoly::OrthoTable;
use crate::precision::Precision;
use crate::report::{ResidualRecord, ResidualReport};
use crate::weight::JumpWeight;

/// Hard cap on tensor-quadrature terms; beyond it the operation reports
/// a budget error instead of silently degrading.
pub const EVAL_BUDGET: usize = 10_000_000;

/// Panel layout for one axis of the quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Panels per region (geometric toward 0 on the lower side, geometric
    /// widths away from the jump on the upper side).
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// The breakpoint, `max(t, 1)` so the `t = 0` case still splits the
    /// endpoint singularity from the tail.
    pub split_at: Float,
    /// Absolute truncation point of the upper region.
    pub tail_cutoff: Float,
    /// Certified bound on the truncated remainder.
    pub remainder_bound: Float,
}

impl QuadratureSpec {
    /// Layout for 1-dimensional integrals (inner products, IBP checks) of
    /// polynomial degree up to `max_degree` against the weight.
    pub fn for_weight(w: &JumpWeight, max_degree: usize, prec: &Precision) -> Result<Self> {
        Self::build(
            w,
            max_degree,
            prec,
            (prec.target_digits() as usize / 2).max(14),
            (prec.target_digits() as usize).max(24),
        )
    }

    /// Coarser layout for the `n`-dimensional tensor integral; per-axis
    /// node counts are kept small enough that `n = 3` stays within the
    /// evaluation budget.
    pub fn for_tensor(w: &JumpWeight, n: usize, prec: &Precision) -> Result<Self> {
        Self::build(w, 2 * n, prec, 6, 20)
    }

    fn build(
        w: &JumpWeight,
        max_degree: usize,
        prec: &Precision,
        panels: usize,
        nodes_per_panel: usize,
    ) -> Result<Self> {
        let bits = prec.bits();
        let t = w.t().to_f64();
        let split = if t > 0.0 { t } else { 1.0 };
        // choose X with X - k ln X >= (target + 8) ln 10, k = alpha + degree
        let k = w.alpha().to_f64() + max_degree as f64;
        let m = (prec.target_digits() as f64 + 8.0) * std::f64::consts::LN_10
            + std::f64::consts::LN_2;
        let mut x = m + k + split;
        for _ in 0..30 {
            x = m + split + k * x.max(2.0).ln();
        }
        let cutoff = Float::with_val(bits, x);
        let remainder = cutoff.clone().pow(&Float::with_val(bits, k)) * 2u32
            * (-cutoff.clone()).exp();
        Ok(QuadratureSpec {
            panels,
            nodes_per_panel,
            split_at: Float::with_val(bits, split),
            tail_cutoff: cutoff,
            remainder_bound: remainder,
        })
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] at full working precision,
/// by Newton iteration on the Legendre recurrence from float-seeded
/// Chebyshev initial guesses.
pub fn gauss_legendre(m: usize, bits: u32) -> (Vec<Float>, Vec<Float>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    // P_m and P_{m-1} at x by the three-term recurrence
    let legendre = |x: &Float| -> (Float, Float) {
        let mut p_prev = Float::with_val(bits, 1);
        let mut p = Float::with_val(bits, x);
        for k in 1..m {
            let next = (p.clone() * x * (2 * k as u32 + 1) - p_prev * (k as u32))
                / (k as u32 + 1);
            p_prev = p;
            p = next;
        }
        (p, p_prev)
    };
    for i in 0..m {
        let seed = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut x = Float::with_val(bits, seed);
        let eps = Float::with_val(bits, 2).pow(-(bits as i32) + 8);
        let mut deriv = Float::with_val(bits, 1);
        for _ in 0..200 {
            let (p, p_prev) = legendre(&x);
            // P_m'(x) = m (x P_m - P_{m-1}) / (x^2 - 1)
            deriv = Float::with_val(bits, m as u32) * (x.clone() * &p - &p_prev)
                / (x.clone().square() - 1u32);
            let dx = p / &deriv;
            x -= &dx;
            if dx.abs() < eps {
                break;
            }
        }
        let wgt = Float::with_val(bits, 2)
            / ((Float::with_val(bits, 1) - x.clone().square()) * deriv.clone().square());
        nodes.push(x);
        weights.push(wgt);
    }
    (nodes, weights)
}

/// One axis of the composite rule: abscissas with pure quadrature weights
/// (Jacobians included, the weight function *not* included).
pub struct AxisRule {
    pub x: Vec<Float>,
    pub w: Vec<Float>,
}

/// Builds the composite axis rule over `[0, tail_cutoff]` for the given
/// weight. The lower region `[0, split_at]` is dropped entirely when the
/// weight vanishes there (`A = 0` with `t > 0`).
pub fn axis_rule(w: &JumpWeight, spec: &QuadratureSpec, prec: &Precision) -> Result<AxisRule> {
    let bits = prec.bits();
    let (gl_x, gl_w) = gauss_legendre(spec.nodes_per_panel, bits);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let s = spec.split_at.clone();

    let lower_active = *w.a() > 0.0 || w.t().is_zero();
    if lower_active {
        // x = s u^2 on u in [0, 1], panels geometric toward 0
        let mut boundaries = vec![Float::with_val(bits, 0)];
        for k in (0..spec.panels).rev() {
            boundaries.push(Float::with_val(bits, 2).pow(-(k as i32)));
        }
        for pair in boundaries.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let mid = (a.clone() + b) / 2u32;
            let half = (b.clone() - a) / 2u32;
            for (xi, wi) in gl_x.iter().zip(&gl_w) {
                let u = mid.clone() + half.clone() * xi;
                let x = s.clone() * u.clone().square();
                let jac = s.clone() * 2u32 * &u;
                xs.push(x);
                ws.push(wi.clone() * &half * jac);
            }
        }
    }

    // upper region [s, X] with geometrically growing panel widths
    let span = spec.tail_cutoff.clone() - &s;
    let denom = Float::with_val(bits, 2).pow(spec.panels as i32) - 1u32;
    let mut prev = s.clone();
    for k in 1..=spec.panels {
        let frac = (Float::with_val(bits, 2).pow(k as i32) - 1u32) / &denom;
        let edge = s.clone() + span.clone() * frac;
        let mid = (prev.clone() + &edge) / 2u32;
        let half = (edge.clone() - &prev) / 2u32;
        for (xi, wi) in gl_x.iter().zip(&gl_w) {
            xs.push(mid.clone() + half.clone() * xi);
            ws.push(wi.clone() * &half);
        }
        prev = edge;
    }
    Ok(AxisRule { x: xs, w: ws })
}

fn horner(coeffs: &[Float], z: &Float, bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// `int f(x) g(x) w(x) dx` for polynomials given by ascending coefficient
/// vectors, against the full jump weight.
pub fn quad_inner_product(
    w: &JumpWeight,
    f_coeffs: &[Float],
    g_coeffs: &[Float],
    spec: &QuadratureSpec,
    prec: &Precision,
) -> Result<Float> {
    let bits = prec.bits();
    let rule = axis_rule(w, spec, prec)?;
    let mut acc = Float::with_val(bits, 0);
    for (x, wt) in rule.x.iter().zip(&rule.w) {
        let fx = horner(f_coeffs, x, bits);
        let gx = horner(g_coeffs, x, bits);
        acc += wt.clone() * w.weight_at(x, prec) * fx * gx;
    }
    Ok(acc)
}

/// Direct evaluation of the Hankel determinant as the n-dimensional
/// eigenvalue integral
///
/// ```text
/// D_n = (1/n!) int prod_{j<k} (x_k - x_j)^2 prod_l w(x_l) dx_l,
/// ```
///
/// tensorized over one composite axis rule. The squared Vandermonde
/// vanishes on coincident nodes, so the symmetric sum reduces exactly to
/// ordered index tuples, cutting the term count by `n!`.
pub fn direct_hankel(
    w: &JumpWeight,
    n: usize,
    spec: &QuadratureSpec,
    prec: &Precision,
) -> Result<Float> {
    if !(1..=3).contains(&n) {
        return Err(CoreError::InvalidParameter(
            "direct_hankel supports n in {1, 2, 3}".into(),
        ));
    }
    let bits = prec.bits();
    let rule = axis_rule(w, spec, prec)?;
    let m = rule.x.len();
    let terms = match n {
        1 => m,
        2 => m * (m - 1) / 2,
        _ => m * (m - 1) * (m - 2) / 6,
    };
    if terms > EVAL_BUDGET {
        return Err(CoreError::QuadratureBudgetExceeded {
            budget: EVAL_BUDGET as u64,
        });
    }
    // fold the weight function into the node weights once
    let ww: Vec<Float> = rule
        .x
        .iter()
        .zip(&rule.w)
        .map(|(x, wt)| wt.clone() * w.weight_at(x, prec))
        .collect();
    let xs = &rule.x;

    match n {
        1 => {
            let mut acc = Float::with_val(bits, 0);
            for v in &ww {
                acc += v;
            }
            Ok(acc)
        }
        2 => {
            let mut acc = Float::with_val(bits, 0);
            for i in 0..m {
                let mut inner = Float::with_val(bits, 0);
                for j in (i + 1)..m {
                    let d = (xs[j].clone() - &xs[i]).square();
                    inner += d * &ww[j];
                }
                acc += inner * &ww[i];
            }
            Ok(acc)
        }
        _ => {
            // parallelize over the outermost index
            let partials = map_grid((0..m).collect(), true, |i| {
                let mut acc_i = Float::with_val(bits, 0);
                for j in (i + 1)..m {
                    let dij = xs[j].clone() - &xs[i];
                    let mut acc_j = Float::with_val(bits, 0);
                    for k in (j + 1)..m {
                        let dik = xs[k].clone() - &xs[i];
                        let djk = xs[k].clone() - &xs[j];
                        acc_j += (dik * djk).square() * &ww[k];
                    }
                    acc_i += acc_j * dij.square() * &ww[j];
                }
                acc_i * &ww[i]
            });
            let mut acc = Float::with_val(bits, 0);
            for p in partials {
                acc += p;
            }
            Ok(acc)
        }
    }
}

/// `det(mu_{i+j})_{n x n}` by Gaussian elimination on the moment matrix;
/// a third, purely linear-algebraic route to the Hankel determinant.
pub fn moment_determinant(w: &JumpWeight, n: usize, prec: &Precision) -> Result<Float> {
    let bits = prec.bits();
    if n == 0 {
        return Ok(Float::with_val(bits, 1));
    }
    let moments = crate::moments::MomentTable::build(w, 2 * (n - 1), prec)?;
    let mut mat: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Float::with_val(bits, moments.mu(i + j).unwrap()))
                .collect()
        })
        .collect();
    let mut det = Float::with_val(bits, 1);
    for col in 0..n {
        // partial pivot
        let mut piv = col;
        for r in col + 1..n {
            if mat[r][col].clone().abs() > mat[piv][col].clone().abs() {
                piv = r;
            }
        }
        if piv != col {
            mat.swap(piv, col);
            det = -det;
        }
        if mat[col][col].is_zero() {
            return Ok(Float::with_val(bits, 0));
        }
        det *= &mat[col][col];
        for r in col + 1..n {
            let factor = mat[r][col].clone() / &mat[col][col];
            for c in col..n {
                let sub = factor.clone() * &mat[col][c];
                mat[r][c] -= sub;
            }
        }
    }
    Ok(det)
}

/// Relative residual of one integration-by-parts identity:
///
/// ```text
/// alpha int x^{alpha-1} e^{-x} w_J P_n^2       = h_n - B w_0(t) P_n(t,t)^2
/// alpha int x^{alpha-1} e^{-x} w_J P_n P_{n-1} = -n h_{n-1} - B w_0(t) P_n(t,t) P_{n-1}(t,t)
/// ```
///
/// The left side is evaluated by quadrature (weight divided by one power
/// of `x`, which the graded panels tolerate); requires `alpha > 0`.
pub fn ibp_residual(
    ortho: &OrthoTable,
    w: &JumpWeight,
    n: usize,
    second: bool,
    prec: &Precision,
) -> Result<f64> {
    let bits = prec.bits();
    let alpha = Float::with_val(bits, w.alpha());
    if alpha.is_zero() {
        return Err(CoreError::InvalidParameter(
            "IBP identities require alpha > 0".into(),
        ));
    }
    if second && n == 0 {
        return Err(CoreError::InvalidParameter(
            "the cross IBP identity needs n >= 1".into(),
        ));
    }
    let spec = QuadratureSpec::for_weight(w, 2 * n + 2, prec)?;
    let rule = axis_rule(w, &spec, prec)?;
    let mut lhs = Float::with_val(bits, 0);
    for (x, wt) in rule.x.iter().zip(&rule.w) {
        let pn = ortho.eval_coeffs(n, x)?;
        let other = if second { ortho.eval_coeffs(n - 1, x)? } else { pn.clone() };
        lhs += wt.clone() * w.weight_at(x, prec) / x * pn * other;
    }
    lhs *= &alpha;

    let t = Float::with_val(bits, w.t());
    let bw0 = Float::with_val(bits, w.b()) * w.w0_at(&t, prec);
    let rhs = if second {
        -(Float::with_val(bits, n as u32) * ortho.h(n - 1)?)
            - bw0 * ortho.p_at_t(n)? * ortho.p_at_t(n - 1)?
    } else {
        ortho.h(n)?.clone() - bw0 * Float::with_val(bits, ortho.p_at_t(n)?).square()
    };
    let scale = Float::with_val(bits, 1)
        .max(&lhs.clone().abs())
        .max(&rhs.clone().abs());
    Ok(((lhs - rhs).abs() / scale).to_f64())
}

/// Both IBP residuals as records; `alpha = 0` yields skipped-degenerate
/// records (the `x^{alpha-1}` integrand needs `alpha > 0`), and `n = 0`
/// checks only the squared identity.
pub fn ibp_check(
    w: &JumpWeight,
    ortho: &OrthoTable,
    n: usize,
    prec: &Precision,
    tol: f64,
) -> Result<Vec<ResidualRecord>> {
    let t_str = prec.format(w.t());
    if w.alpha().is_zero() {
        let mut out = vec![ResidualRecord::skipped(
            "IBP1",
            n,
            t_str.clone(),
            "alpha = 0: integrand requires alpha > 0",
        )];
        if n >= 1 {
            out.push(ResidualRecord::skipped(
                "IBP2",
                n,
                t_str,
                "alpha = 0: integrand requires alpha > 0",
            ));
        }
        return Ok(out);
    }
    let mut out = vec![ResidualRecord::evaluated(
        "IBP1",
        n,
        t_str.clone(),
        ibp_residual(ortho, w, n, false, prec)?,
        tol,
    )];
    if n >= 1 {
        out.push(ResidualRecord::evaluated(
            "IBP2",
            n,
            t_str,
            ibp_residual(ortho, w, n, true, prec)?,
            tol,
        ));
    }
    Ok(out)
}

/// Cross-validation suite over `1 <= n <= min(n_max, 3)` and the whole
/// `t_grid`: the direct tensor-quadrature Hankel determinant (`HANKEL`)
/// and the moment-matrix determinant (`MOMDET`) against the norm product
/// `D_n = prod h_j`, plus both integration-by-parts identities. The
/// dimension cap keeps the tensor sum inside [`EVAL_BUDGET`].
pub fn oracle_suite(
    w: &JumpWeight,
    n_max: usize,
    t_grid: &[Float],
    prec: &Precision,
    tol: f64,
    parallel: bool,
) -> Result<ResidualReport> {
    if t_grid.is_empty() {
        return Err(CoreError::InvalidParameter("empty t grid".into()));
    }
    let n_top = n_max.min(3).max(1);
    let rel = |x: &Float, y: &Float| -> f64 {
        let scale = Float::with_val(x.prec(), 1)
            .max(&x.clone().abs())
            .max(&y.clone().abs());
        ((x.clone() - y).abs() / scale).to_f64()
    };
    let per_point = map_grid(t_grid.to_vec(), parallel, |t| -> Vec<ResidualRecord> {
        let t_str = prec.format(&t);
        let mut records = Vec::new();
        let inner = || -> Result<Vec<ResidualRecord>> {
            let wt = w.with_t(t.clone())?;
            let ortho = crate::orthopoly::build_ortho(&wt, n_top, prec)?;
            let mut out = Vec::new();
            for n in 1..=n_top {
                let product = crate::orthopoly::hankel_det(&ortho, n)?.value;
                let spec = QuadratureSpec::for_tensor(&wt, n, prec)?;
                let direct = direct_hankel(&wt, n, &spec, prec)?;
                out.push(ResidualRecord::evaluated(
                    "HANKEL",
                    n,
                    t_str.clone(),
                    rel(&direct, &product),
                    tol,
                ));
                let momdet = moment_determinant(&wt, n, prec)?;
                out.push(ResidualRecord::evaluated(
                    "MOMDET",
                    n,
                    t_str.clone(),
                    rel(&momdet, &product),
                    tol,
                ));
                out.extend(ibp_check(&wt, &ortho, n, prec, tol)?);
            }
            Ok(out)
        };
        match inner() {
            Ok(mut rs) => records.append(&mut rs),
            Err(e) => records.push(ResidualRecord::config_error(
                "ORACLE",
                t_str,
                &e.to_string(),
            )),
        }
        records
    });
    let records: Vec<ResidualRecord> = per_point.into_iter().flatten().collect();
    let grid = t_grid.iter().map(|t| prec.format(t)).collect();
    Ok(ResidualReport::new(
        w.describe(prec),
        prec.digits(),
        prec.target_digits(),
        grid,
        records,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moment;
    use crate::orthopoly::{build_ortho, hankel_det};

    fn prec() -> Precision {
        Precision::new(50, 25).unwrap()
    }

    fn relclose(x: &Float, y: &Float, tol: f64) -> bool {
        let scale = Float::with_val(x.prec(), 1)
            .max(&x.clone().abs())
            .max(&y.clone().abs());
        ((x.clone() - y).abs() / scale).to_f64() < tol
    }

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        // 5-node rule is exact through degree 9: check int x^8 = 2/9
        let (x, w) = gauss_legendre(5, 128);
        let mut acc = Float::with_val(128, 0);
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi.clone() * xi.clone().pow(8);
        }
        let expect = Float::with_val(128, 2) / Float::with_val(128, 9);
        assert!(relclose(&acc, &expect, 1e-30));
        // weights sum to 2
        let sum: Float = w.iter().fold(Float::with_val(128, 0), |a, b| a + b);
        assert!(relclose(&sum, &Float::with_val(128, 2), 1e-30));
    }

    #[test]
    fn spec_remainder_bound_certified() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 1.0, &p).unwrap();
        let spec = QuadratureSpec::for_weight(&w, 6, &p).unwrap();
        assert!(spec.remainder_bound < p.pow10(-(p.target_digits() as i32)));
    }

    #[test]
    fn hankel_n1_is_mu0() {
        let p = prec();
        for (alpha, a, b, t) in [(0.5, 1.0, 1.0, 1.0), (2.5, 0.5, 1.5, 5.0)] {
            let w = JumpWeight::new(alpha, a, b, t, &p).unwrap();
            let spec = QuadratureSpec::for_tensor(&w, 1, &p).unwrap();
            let d1 = direct_hankel(&w, 1, &spec, &p).unwrap();
            let mu0 = moment(0, &w, &p).unwrap();
            assert!(relclose(&d1, &mu0, 1e-12), "{alpha} {a} {b} {t}");
        }
        // gap case closed form e^{-t}
        let w = JumpWeight::new(0.0, 0.0, 1.0, 2.0, &p).unwrap();
        let spec = QuadratureSpec::for_tensor(&w, 1, &p).unwrap();
        let d1 = direct_hankel(&w, 1, &spec, &p).unwrap();
        let expect = p.float(-2).exp();
        assert!(relclose(&d1, &expect, 1e-12));
    }

    #[test]
    fn hankel_n2_matches_norm_product_and_moment_det() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 1.0, &p).unwrap();
        let spec = QuadratureSpec::for_tensor(&w, 2, &p).unwrap();
        let d2 = direct_hankel(&w, 2, &spec, &p).unwrap();
        let table = build_ortho(&w, 2, &p).unwrap();
        let from_h = hankel_det(&table, 2).unwrap().value;
        assert!(relclose(&d2, &from_h, 1e-10));
        let from_mu = moment_determinant(&w, 2, &p).unwrap();
        assert!(relclose(&d2, &from_mu, 1e-10));
    }

    #[test]
    fn hankel_n3_within_budget_and_tolerance() {
        let p = prec();
        let w = JumpWeight::new(0.5, 0.0, 1.0, 1.0, &p).unwrap();
        let spec = QuadratureSpec::for_tensor(&w, 3, &p).unwrap();
        let d3 = direct_hankel(&w, 3, &spec, &p).unwrap();
        let table = build_ortho(&w, 3, &p).unwrap();
        let from_h = hankel_det(&table, 3).unwrap().value;
        assert!(relclose(&d3, &from_h, 1e-8));
    }

    #[test]
    fn budget_guard_trips() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 1.0, &p).unwrap();
        let mut spec = QuadratureSpec::for_tensor(&w, 3, &p).unwrap();
        spec.nodes_per_panel = 400; // per-axis nodes far past the cap for n = 3
        assert!(matches!(
            direct_hankel(&w, 3, &spec, &p),
            Err(CoreError::QuadratureBudgetExceeded { .. })
        ));
    }

    #[test]
    fn moment_determinant_matches_norms_to_n4() {
        let p = Precision::new(60, 30).unwrap();
        let w = JumpWeight::new(1.5, 0.5, 1.5, 2.0, &p).unwrap();
        let table = build_ortho(&w, 4, &p).unwrap();
        for n in 0..=4usize {
            let a = moment_determinant(&w, n, &p).unwrap();
            let b = hankel_det(&table, n).unwrap().value;
            assert!(relclose(&a, &b, 1e-15), "n = {n}");
        }
    }

    #[test]
    fn inner_products_orthogonal() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let table = build_ortho(&w, 3, &p).unwrap();
        let spec = QuadratureSpec::for_weight(&w, 8, &p).unwrap();
        // <1, 1> = mu_0
        let one = [p.float(1)];
        let ip = quad_inner_product(&w, &one, &one, &spec, &p).unwrap();
        let mu0 = moment(0, &w, &p).unwrap();
        assert!(relclose(&ip, &mu0, 1e-15));
        // <P_1, P_0> = 0
        let cross = quad_inner_product(
            &w,
            table.coeffs(1).unwrap(),
            table.coeffs(0).unwrap(),
            &spec,
            &p,
        )
        .unwrap();
        assert!(cross.clone().abs().to_f64() < 1e-15, "got {cross}");
        // <P_n, P_n> = h_n
        for n in 1..=3usize {
            let sq = quad_inner_product(
                &w,
                table.coeffs(n).unwrap(),
                table.coeffs(n).unwrap(),
                &spec,
                &p,
            )
            .unwrap();
            assert!(relclose(&sq, table.h(n).unwrap(), 1e-14), "n = {n}");
        }
    }

    #[test]
    fn ibp_identities_hold() {
        let p = prec();
        let w = JumpWeight::new(1.0, 0.0, 1.0, 1.0, &p).unwrap();
        let table = build_ortho(&w, 2, &p).unwrap();
        let records = ibp_check(&w, &table, 1, &p, 1e-10).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.passed(), "{}: residual {}", r.id, r.residual);
        }
        // n = 0: only the squared identity
        let records = ibp_check(&w, &table, 0, &p, 1e-10).unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].passed());
        // alpha = 0 is a guarded skip
        let w0 = JumpWeight::new(0.0, 0.0, 1.0, 1.0, &p).unwrap();
        let t0 = build_ortho(&w0, 2, &p).unwrap();
        let records = ibp_check(&w0, &t0, 1, &p, 1e-10).unwrap();
        for r in &records {
            assert_eq!(r.status, crate::report::RecordStatus::SkippedDegenerate);
        }
    }
}
