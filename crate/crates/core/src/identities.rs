//! Registry and residual evaluation of every algebraic (non-differential)
//! identity satisfied by the recurrence coefficients, the auxiliary
//! quantities `R_n`, `r_n`, `S_n`, `H_n` and the ladder coefficients
//! `A_n(z)`, `B_n(z)`.
//!
//! Each entry computes a dimensionless relative residual
//! `|LHS - RHS| / max(|LHS|, |RHS|, 1)`; z-dependent identities take the
//! max over a sample set avoiding the poles at `0` and `t`. Guarded
//! denominators below `10^{-digits/2}` produce skipped-degenerate
//! records, never silent passes.

use rug::Float;

use crate::auxiliary::{aux_table, ladder_coeffs, AuxTable};
use crate::error::{CoreError, Result};
use crate::grid::map_grid;
use crate::orthopoly::{build_ortho, OrthoTable};
use crate::precision::Precision;
use crate::report::{ResidualRecord, ResidualReport};
use crate::weight::JumpWeight;

/// One registry entry: an identity id, its human-readable form, the
/// degree range it is defined on and whether it needs z samples.
#[derive(Debug, Clone, Copy)]
pub struct IdentityEntry {
    pub id: &'static str,
    pub form: &'static str,
    /// Smallest degree the identity is stated for.
    pub min_n: usize,
    /// Initial-condition identities evaluate at n = 0 only.
    pub only_n0: bool,
    pub needs_z: bool,
    /// Evaluated by quadrature (much more expensive than the rest).
    pub quadrature: bool,
}

const ENTRIES: &[IdentityEntry] = &[
    entry("S1", "B_{n+1}(z) + B_n(z) = (z - alpha_n) A_n(z) - v0'(z)", 0, true),
    entry("S2", "1 + (z - alpha_n)[B_{n+1}(z) - B_n(z)] = beta_{n+1} A_{n+1}(z) - beta_n A_{n-1}(z)", 1, true),
    entry("S2p", "B_n(z)^2 + v0'(z) B_n(z) + sum_{j<n} A_j(z) = beta_n A_n(z) A_{n-1}(z)", 1, true),
    entry("LOWER", "P_n'(z) = -B_n(z) P_n(z) + beta_n A_n(z) P_{n-1}(z)", 1, true),
    entry("RAISE", "P_{n-1}'(z) = [B_n(z) + v0'(z)] P_{n-1}(z) - A_{n-1}(z) P_n(z)", 1, true),
    entry("ODE2", "y'' - (v0' + A_n'/A_n) y' + (B_n' - B_n A_n'/A_n + sum_{j<n} A_j) y = 0, y = P_n", 1, true),
    quad_entry("IBP1", "alpha int y^{alpha-1} e^{-y} w_J P_n^2 = h_n - B w_0(t) P_n(t,t)^2", 0),
    quad_entry("IBP2", "alpha int y^{alpha-1} e^{-y} w_J P_n P_{n-1} = -n h_{n-1} - B w_0(t) P_n(t,t) P_{n-1}(t,t)", 1),
    entry("ALPHA", "alpha_n = 2n + 1 + alpha + t R_n", 0, false),
    entry("STRING", "r_{n+1} + r_n = R_n (t - alpha_n)", 0, false),
    entry("PROD", "r_n^2 = beta_n R_n R_{n-1}", 1, false),
    entry("PROD2", "(n + r_n)(n + alpha + r_n) = beta_n (1 - R_n)(1 - R_{n-1})", 1, false),
    entry("RES15", "sum_{j<n} R_j + r_n [1 - alpha/t - 2(n + r_n)/t] = (beta_n/t)[(1-R_n) R_{n-1} + (1-R_{n-1}) R_n]", 1, false),
    entry("BETAEXPR", "beta_n = [r_n (2n+alpha) + n(n+alpha) + r_n^2/R_n] / (1 - R_n)", 1, false),
    entry("DIFF1", "r_{n+1} + r_n = R_n (t - 2n - alpha - 1 - t R_n)", 0, false),
    entry("DIFF2", "r_n^2 (1/(R_n R_{n-1}) - 1/R_n - 1/R_{n-1}) = r_n (2n+alpha) + n(n+alpha)", 1, false),
    init_entry("INIT", "r_0 = 0 and R_0 = B t^alpha e^{-t} / h_0"),
    entry("SUMR", "t sum_{j<n} R_j = -t r_n - n(n+alpha) + beta_n", 1, false),
    entry("SUMALPHA", "sum_{j<n} alpha_j = -p1(n) = beta_n - t r_n", 1, false),
    entry("HREP14", "beta_n = t r_n - H_n + n(n+alpha)", 1, false),
    entry("SREP9", "S_n = (alpha_n - (2n+alpha+1) - t)/(alpha_n - (2n+alpha+1))", 0, false),
    entry("T8A", "t R_n = H_n - H_{n+1}", 0, false),
    entry("T8B", "t r_n = {[H_n - n(n+alpha)](t + H_{n+1} - H_{n-1}) + t n(n+alpha)} / (t + H_{n+1} - H_{n-1} - 2n - alpha)", 1, false),
    entry("T8C", "(t r_n)^2 = [n(n+alpha) + t r_n - H_n][(t R_n)^2 + t R_n (H_{n+1} + H_{n-1} - 2 H_n)]", 1, false),
    entry("T9A", "alpha_n - (2n+alpha+1) = H_n - H_{n+1}", 0, false),
    entry("T9B", "beta_n - n(n+alpha) = [H_n (2n+alpha) - n(n+alpha)(H_{n+1} - H_{n-1})] / (t + H_{n+1} - H_{n-1} - 2n - alpha)", 1, false),
    entry("DSIGMA", "discrete sigma form: T8C with t R_n and t r_n substituted by their H-representations", 1, false),
    entry("DSIGMA_DISPLAY", "discrete sigma form as displayed, with the (2n+alpha)[H_n - n(n+alpha)] + t n(n+alpha) bracket", 1, false),
    entry("DP3A", "r_{n+1} + r_n = R_n (-alpha - 2n - 1 + t - t R_n)", 0, false),
    entry("DP3B", "(1/R_n - 1)(1/R_{n-1} - 1) = (r_n + n + alpha)(r_n + n) / r_n^2", 1, false),
];

const fn entry(id: &'static str, form: &'static str, min_n: usize, needs_z: bool) -> IdentityEntry {
    IdentityEntry { id, form, min_n, only_n0: false, needs_z, quadrature: false }
}

const fn quad_entry(id: &'static str, form: &'static str, min_n: usize) -> IdentityEntry {
    IdentityEntry { id, form, min_n, only_n0: false, needs_z: false, quadrature: true }
}

const fn init_entry(id: &'static str, form: &'static str) -> IdentityEntry {
    IdentityEntry { id, form, min_n: 0, only_n0: true, needs_z: false, quadrature: false }
}

/// The immutable identity registry.
pub fn registry() -> &'static [IdentityEntry] {
    ENTRIES
}

fn find_entry(id: &str) -> Result<&'static IdentityEntry> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| CoreError::InvalidParameter(format!("unknown identity id {id}")))
}

/// Default z samples `{t/2, t+1, 2t+3}`: one point between the poles at
/// `0` and `t`, two beyond the jump.
pub fn default_z_samples(t: &Float, bits: u32) -> Vec<Float> {
    vec![
        Float::with_val(bits, t) / 2u32,
        Float::with_val(bits, t) + 1u32,
        Float::with_val(bits, t) * 2u32 + 3u32,
    ]
}

struct Ctx<'a> {
    ortho: &'a OrthoTable,
    aux: &'a AuxTable,
    prec: Precision,
    bits: u32,
    t: Float,
    alpha: Float,
}

impl<'a> Ctx<'a> {
    fn new(ortho: &'a OrthoTable, aux: &'a AuxTable, prec: &Precision) -> Self {
        let bits = prec.bits();
        Ctx {
            ortho,
            aux,
            prec: *prec,
            bits,
            t: Float::with_val(bits, aux.weight().t()),
            alpha: Float::with_val(bits, aux.weight().alpha()),
        }
    }

    fn nf(&self, n: usize) -> Float {
        Float::with_val(self.bits, n as u32)
    }

    /// `n (n + alpha)`
    fn nna(&self, n: usize) -> Float {
        self.nf(n) * (self.nf(n) + &self.alpha)
    }

    /// `2n + alpha`
    fn tna(&self, n: usize) -> Float {
        self.nf(n) * 2u32 + &self.alpha
    }

    fn guard(&self) -> Float {
        self.prec.pow10(-(self.prec.digits() as i32 / 2))
    }

    fn rel(&self, lhs: &Float, rhs: &Float) -> f64 {
        let scale = Float::with_val(self.bits, 1)
            .max(&lhs.clone().abs())
            .max(&rhs.clone().abs());
        ((lhs.clone() - rhs).abs() / scale).to_f64()
    }

    fn record(&self, id: &str, n: usize, residual: f64, tol: f64) -> ResidualRecord {
        ResidualRecord::evaluated(id, n, self.prec.format(&self.t), residual, tol)
    }

    fn skip(&self, id: &str, n: usize, note: &str) -> ResidualRecord {
        ResidualRecord::skipped(id, n, self.prec.format(&self.t), note)
    }

    /// `v0'(z) = 1 - alpha/z`
    fn v0p(&self, z: &Float) -> Float {
        Float::with_val(self.bits, 1) - self.alpha.clone() / z
    }
}

/// Evaluates one registry identity at `(n, t)` and returns its record.
/// z-dependent identities take the max residual over `z_samples`
/// (defaulting to [`default_z_samples`]).
pub fn check_identity(
    id: &str,
    ortho: &OrthoTable,
    aux: &AuxTable,
    n: usize,
    z_samples: Option<&[Float]>,
    prec: &Precision,
    tol: f64,
) -> Result<ResidualRecord> {
    let e = find_entry(id)?;
    if n < e.min_n || (e.only_n0 && n != 0) {
        return Err(CoreError::InvalidParameter(format!(
            "identity {id} is not defined at n = {n}"
        )));
    }
    let ctx = Ctx::new(ortho, aux, prec);
    if e.needs_z {
        let default;
        let samples = match z_samples {
            Some(s) => s,
            None => {
                default = default_z_samples(&ctx.t, ctx.bits);
                &default
            }
        };
        if samples.len() < 3 {
            return Err(CoreError::InvalidParameter(
                "z-dependent identities need at least 3 samples".into(),
            ));
        }
        for z in samples {
            if z.is_zero() || (z.clone() - &ctx.t).abs() < ctx.guard() {
                return Err(CoreError::InvalidParameter(
                    "z samples must avoid the poles at 0 and t".into(),
                ));
            }
        }
        let mut worst = 0.0f64;
        for z in samples {
            match eval_z_identity(id, &ctx, n, z)? {
                Some(res) => worst = worst.max(res),
                None => return Ok(ctx.skip(id, n, "ladder coefficient degenerate at sample")),
            }
        }
        return Ok(ctx.record(id, n, worst, tol));
    }
    match eval_scalar_identity(id, &ctx, n)? {
        ScalarOutcome::Residual(res) => Ok(ctx.record(id, n, res, tol)),
        ScalarOutcome::Skipped(note) => Ok(ctx.skip(id, n, &note)),
    }
}

enum ScalarOutcome {
    Residual(f64),
    Skipped(String),
}

fn eval_z_identity(id: &str, ctx: &Ctx, n: usize, z: &Float) -> Result<Option<f64>> {
    let bits = ctx.bits;
    let lc = |m: usize| ladder_coeffs(ctx.aux, m);
    match id {
        "S1" => {
            let an = lc(n)?;
            let bn1 = lc(n + 1)?;
            let lhs = bn1.b_at(z) + lc(n)?.b_at(z);
            let rhs = (Float::with_val(bits, z) - ctx.ortho.alpha(n)?) * an.a_at(z) - ctx.v0p(z);
            Ok(Some(ctx.rel(&lhs, &rhs)))
        }
        "S2" => {
            let lhs = Float::with_val(bits, 1)
                + (Float::with_val(bits, z) - ctx.ortho.alpha(n)?)
                    * (lc(n + 1)?.b_at(z) - lc(n)?.b_at(z));
            let rhs = ctx.ortho.beta(n + 1)?.clone() * lc(n + 1)?.a_at(z)
                - ctx.ortho.beta(n)?.clone() * lc(n - 1)?.a_at(z);
            Ok(Some(ctx.rel(&lhs, &rhs)))
        }
        "S2p" => {
            let bn = lc(n)?.b_at(z);
            let sum_a = sum_a_checked(ctx, n, z)?;
            let lhs = bn.clone().square() + ctx.v0p(z) * &bn + sum_a;
            let rhs = ctx.ortho.beta(n)?.clone() * lc(n)?.a_at(z) * lc(n - 1)?.a_at(z);
            Ok(Some(ctx.rel(&lhs, &rhs)))
        }
        "LOWER" => {
            let lhs = ctx.ortho.eval_monic_deriv(n, z)?;
            let rhs = -(lc(n)?.b_at(z) * ctx.ortho.eval_coeffs(n, z)?)
                + ctx.ortho.beta(n)?.clone() * lc(n)?.a_at(z) * ctx.ortho.eval_coeffs(n - 1, z)?;
            Ok(Some(ctx.rel(&lhs, &rhs)))
        }
        "RAISE" => {
            let lhs = ctx.ortho.eval_monic_deriv(n - 1, z)?;
            let rhs = (lc(n)?.b_at(z) + ctx.v0p(z)) * ctx.ortho.eval_coeffs(n - 1, z)?
                - lc(n - 1)?.a_at(z) * ctx.ortho.eval_coeffs(n, z)?;
            Ok(Some(ctx.rel(&lhs, &rhs)))
        }
        "ODE2" => {
            let coeff = lc(n)?;
            let an = coeff.a_at(z);
            if an.clone().abs() < ctx.guard() {
                return Ok(None);
            }
            let ratio = coeff.a_deriv_at(z) / &an;
            let y = ctx.ortho.eval_coeffs(n, z)?;
            let yp = ctx.ortho.eval_monic_deriv(n, z)?;
            let ypp = ctx.ortho.eval_monic_deriv2(n, z)?;
            let sum_a = sum_a_checked(ctx, n, z)?;
            let term1 = ypp;
            let term2 = -((ctx.v0p(z) + &ratio) * &yp);
            let term3 = (coeff.b_deriv_at(z) - coeff.b_at(z) * &ratio + sum_a) * &y;
            let mut scale = Float::with_val(bits, 1);
            for m in [&term1, &term2, &term3] {
                scale = scale.max(&m.clone().abs());
            }
            let res = ((term1 + term2 + term3).abs() / scale).to_f64();
            Ok(Some(res))
        }
        _ => Err(CoreError::InvalidParameter(format!(
            "{id} is not a z-dependent identity"
        ))),
    }
}

/// `sum_{j<n} A_j(z)` from the stored residues, cross-checked against the
/// route through `t sum R_j = -t r_n - n(n+alpha) + beta_n`.
fn sum_a_checked(ctx: &Ctx, n: usize, z: &Float) -> Result<Float> {
    let bits = ctx.bits;
    let mut direct = Float::with_val(bits, 0);
    for j in 0..n {
        direct += ladder_coeffs(ctx.aux, j)?.a_at(z);
    }
    // independent route: sum R_j from the beta_n identity
    let sr = (ctx.ortho.beta(n)?.clone()
        - ctx.t.clone() * ctx.aux.r_small(n)?
        - ctx.nna(n))
        / &ctx.t;
    let other = sr.clone() / (z.clone() - &ctx.t) + (ctx.nf(n) - sr) / z;
    let rel = ctx.rel(&direct, &other);
    let route_tol = ctx
        .prec
        .pow10(-(ctx.prec.target_digits() as i32 - 10))
        .to_f64();
    if rel > route_tol {
        return Err(CoreError::ConsistencyFailure(format!(
            "sum A_j routes disagree at n = {n}: rel {rel}"
        )));
    }
    Ok(direct)
}

fn eval_scalar_identity(id: &str, ctx: &Ctx, n: usize) -> Result<ScalarOutcome> {
    use ScalarOutcome::{Residual, Skipped};
    let bits = ctx.bits;
    let aux = ctx.aux;
    let ortho = ctx.ortho;
    let t = &ctx.t;
    let one = || Float::with_val(bits, 1);
    match id {
        "IBP1" | "IBP2" => {
            if ctx.alpha.is_zero() {
                return Ok(Skipped("alpha = 0: integrand requires alpha > 0".into()));
            }
            let res = crate::oracle::ibp_residual(ortho, aux.weight(), n, id == "IBP2", &ctx.prec)?;
            Ok(Residual(res))
        }
        "ALPHA" => {
            let rhs = ctx.nf(n) * 2u32 + 1u32 + &ctx.alpha + t.clone() * aux.r_big(n)?;
            Ok(Residual(ctx.rel(ortho.alpha(n)?, &rhs)))
        }
        "STRING" => {
            let lhs = aux.r_small(n + 1)?.clone() + aux.r_small(n)?;
            let rhs = aux.r_big(n)?.clone() * (t.clone() - ortho.alpha(n)?);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "PROD" => {
            let lhs = aux.r_small(n)?.clone().square();
            let rhs = ortho.beta(n)?.clone() * aux.r_big(n)? * aux.r_big(n - 1)?;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "PROD2" => {
            let rn = aux.r_small(n)?;
            let lhs = (ctx.nf(n) + rn) * (ctx.nf(n) + &ctx.alpha + rn);
            let rhs = ortho.beta(n)?.clone()
                * (one() - aux.r_big(n)?)
                * (one() - aux.r_big(n - 1)?);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "RES15" => {
            let rn = aux.r_small(n)?;
            let lhs = aux.sum_r(n)?.clone()
                + rn.clone()
                    * (one() - ctx.alpha.clone() / t - (ctx.nf(n) + rn) * 2u32 / t);
            let rhs = ortho.beta(n)?.clone() / t
                * ((one() - aux.r_big(n)?) * aux.r_big(n - 1)?
                    + (one() - aux.r_big(n - 1)?) * aux.r_big(n)?);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "BETAEXPR" => {
            let rn = aux.r_big(n)?;
            let sn = aux.r_small(n)?;
            let denom = one() - rn;
            if denom.clone().abs() < ctx.guard() || rn.clone().abs() < ctx.guard() {
                return Ok(Skipped("1 - R_n or R_n degenerate".into()));
            }
            let rhs = (sn.clone() * ctx.tna(n) + ctx.nna(n) + sn.clone().square() / rn) / denom;
            Ok(Residual(ctx.rel(ortho.beta(n)?, &rhs)))
        }
        "DIFF1" | "DP3A" => {
            let lhs = aux.r_small(n + 1)?.clone() + aux.r_small(n)?;
            let rn = aux.r_big(n)?;
            let rhs = rn.clone()
                * (t.clone() - ctx.nf(n) * 2u32 - &ctx.alpha - 1u32 - t.clone() * rn);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "DIFF2" => {
            let rn = aux.r_big(n)?;
            let rm = aux.r_big(n - 1)?;
            if rn.clone().abs() < ctx.guard() || rm.clone().abs() < ctx.guard() {
                return Ok(Skipped("R_n R_{n-1} degenerate".into()));
            }
            let sn = aux.r_small(n)?;
            let lhs = sn.clone().square()
                * (one() / (rn.clone() * rm) - one() / rn - one() / rm);
            let rhs = sn.clone() * ctx.tna(n) + ctx.nna(n);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "INIT" => {
            // r_0 = 0 exactly, R_0 = B w_0(t) / mu_0 with mu_0 recomputed
            // through the moment route.
            let r0 = aux.r_small(0)?.clone().abs().to_f64();
            let mu0 = crate::moments::moment(0, aux.weight(), &ctx.prec)?;
            let bw0 = Float::with_val(bits, aux.weight().b()) * aux.weight().w0_at(t, &ctx.prec);
            let expect = bw0 / mu0;
            Ok(Residual(r0.max(ctx.rel(aux.r_big(0)?, &expect))))
        }
        "SUMR" => {
            let lhs = t.clone() * aux.sum_r(n)?;
            let rhs = -(t.clone() * aux.r_small(n)?) - ctx.nna(n) + ortho.beta(n)?;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "SUMALPHA" => {
            let mut sum = Float::with_val(bits, 0);
            for j in 0..n {
                sum += ortho.alpha(j)?;
            }
            let mid = -ortho.p1(n)?.clone();
            let rhs = ortho.beta(n)?.clone() - t.clone() * aux.r_small(n)?;
            let res = ctx.rel(&sum, &mid).max(ctx.rel(&mid, &rhs));
            Ok(Residual(res))
        }
        "HREP14" => {
            let rhs = t.clone() * aux.r_small(n)? - aux.h_aux(n)? + ctx.nna(n);
            Ok(Residual(ctx.rel(ortho.beta(n)?, &rhs)))
        }
        "SREP9" => {
            let shift = ortho.alpha(n)?.clone() - ctx.nf(n) * 2u32 - &ctx.alpha - 1u32;
            if shift.clone().abs() < ctx.guard() {
                return Ok(Skipped("alpha_n - (2n+alpha+1) degenerate".into()));
            }
            let rhs = (shift.clone() - t) / &shift;
            Ok(Residual(ctx.rel(aux.s(n)?, &rhs)))
        }
        "T8A" => {
            let lhs = t.clone() * aux.r_big(n)?;
            let rhs = aux.h_aux(n)?.clone() - aux.h_aux(n + 1)?;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "T8B" => match t8b_rhs(ctx, n)? {
            Some(rhs) => {
                let lhs = t.clone() * aux.r_small(n)?;
                Ok(Residual(ctx.rel(&lhs, &rhs)))
            }
            None => Ok(Skipped("t + H_{n+1} - H_{n-1} - 2n - alpha degenerate".into())),
        },
        "T8C" => {
            let trn = t.clone() * aux.r_small(n)?;
            let lhs = trn.clone().square();
            let rhs = t8c_rhs(ctx, n, &trn, &(t.clone() * aux.r_big(n)?))?;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "T9A" => {
            let lhs = ortho.alpha(n)?.clone() - ctx.nf(n) * 2u32 - &ctx.alpha - 1u32;
            let rhs = aux.h_aux(n)?.clone() - aux.h_aux(n + 1)?;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "T9B" => {
            let (hm, h, hp) = h_triple(ctx, n)?;
            let denom = t.clone() + &hp - &hm - ctx.tna(n);
            if denom.clone().abs() < ctx.guard() {
                return Ok(Skipped("t + H_{n+1} - H_{n-1} - 2n - alpha degenerate".into()));
            }
            let lhs = ortho.beta(n)?.clone() - ctx.nna(n);
            let rhs = (h.clone() * ctx.tna(n) - ctx.nna(n) * (hp.clone() - &hm)) / denom;
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "DSIGMA" => match t8b_rhs(ctx, n)? {
            Some(trn_rep) => {
                let (_, h, hp) = h_triple(ctx, n)?;
                let trbig_rep = h.clone() - &hp; // H_n - H_{n+1}
                let lhs = trn_rep.clone().square();
                let rhs = t8c_rhs(ctx, n, &trn_rep, &trbig_rep)?;
                Ok(Residual(ctx.rel(&lhs, &rhs)))
            }
            None => Ok(Skipped("t + H_{n+1} - H_{n-1} - 2n - alpha degenerate".into())),
        },
        "DSIGMA_DISPLAY" => {
            let (hm, h, hp) = h_triple(ctx, n)?;
            let denom = t.clone() + &hp - &hm - ctx.tna(n);
            if denom.clone().abs() < ctx.guard() {
                return Ok(Skipped("t + H_{n+1} - H_{n-1} - 2n - alpha degenerate".into()));
            }
            let lhs = ((h.clone() - ctx.nna(n)) * (t.clone() + &hp - &hm)
                + t.clone() * ctx.nna(n))
                / &denom;
            let lhs = lhs.square();
            let bracket = (ctx.tna(n) * (h.clone() - ctx.nna(n)) + t.clone() * ctx.nna(n))
                / &denom;
            let rhs = bracket * (h.clone() - &hp) * (hm.clone() - &h);
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        "DP3B" => {
            let rn = aux.r_big(n)?;
            let rm = aux.r_big(n - 1)?;
            let sn = aux.r_small(n)?;
            if sn.clone().abs() < ctx.guard()
                || rn.clone().abs() < ctx.guard()
                || rm.clone().abs() < ctx.guard()
            {
                return Ok(Skipped("r_n or R_n R_{n-1} degenerate".into()));
            }
            let lhs = (one() / rn - 1u32) * (one() / rm - 1u32);
            let rhs = (sn.clone() + ctx.nf(n) + &ctx.alpha) * (sn.clone() + ctx.nf(n))
                / sn.clone().square();
            Ok(Residual(ctx.rel(&lhs, &rhs)))
        }
        _ => Err(CoreError::InvalidParameter(format!(
            "{id} is not a scalar identity"
        ))),
    }
}

fn h_triple(ctx: &Ctx, n: usize) -> Result<(Float, Float, Float)> {
    Ok((
        ctx.aux.h_aux(n - 1)?.clone(),
        ctx.aux.h_aux(n)?.clone(),
        ctx.aux.h_aux(n + 1)?.clone(),
    ))
}

/// Right-hand side of the closed form for `t r_n` in `H_{n-1}, H_n, H_{n+1}`,
/// or `None` when the denominator is degenerate.
fn t8b_rhs(ctx: &Ctx, n: usize) -> Result<Option<Float>> {
    let (hm, h, hp) = h_triple(ctx, n)?;
    let denom = ctx.t.clone() + &hp - &hm - ctx.tna(n);
    if denom.clone().abs() < ctx.guard() {
        return Ok(None);
    }
    let num = (h.clone() - ctx.nna(n)) * (ctx.t.clone() + &hp - &hm)
        + ctx.t.clone() * ctx.nna(n);
    Ok(Some(num / denom))
}

/// Right-hand side of `(t r_n)^2 = [n(n+alpha) + t r_n - H_n]
/// [(t R_n)^2 + t R_n (H_{n+1} + H_{n-1} - 2 H_n)]`, with the two
/// bracketed quantities supplied by the caller (direct or H-substituted).
fn t8c_rhs(ctx: &Ctx, n: usize, trn: &Float, trbig: &Float) -> Result<Float> {
    let (hm, h, hp) = h_triple(ctx, n)?;
    let first = ctx.nna(n) + trn - &h;
    let second = trbig.clone().square()
        + trbig.clone() * (hp.clone() + &hm - h.clone() * 2u32);
    Ok(first * second)
}

/// Evaluates the difference equation `(1/R_n - 1)(1/R_{n-1} - 1) =
/// (r_n + n + alpha)(r_n + n)/r_n^2` and asserts its exact algebraic
/// equivalence to the `DIFF2` form: multiplying by `r_n^2` and moving
/// the cross terms shows they differ by adding `r_n^2` to both sides.
pub fn check_dp3_equivalence(
    ortho: &OrthoTable,
    aux: &AuxTable,
    n: usize,
    prec: &Precision,
    tol: f64,
) -> Result<ResidualRecord> {
    if n < 1 {
        return Err(CoreError::InvalidParameter(
            "check_dp3_equivalence requires n >= 1".into(),
        ));
    }
    let ctx = Ctx::new(ortho, aux, prec);
    let bits = ctx.bits;
    let rn = aux.r_big(n)?;
    let rm = aux.r_big(n - 1)?;
    let sn = aux.r_small(n)?;
    if sn.clone().abs() < ctx.guard() {
        return Ok(ctx.skip("DP3B", n, "r_n degenerate"));
    }
    let one = Float::with_val(bits, 1);
    let lhs37 = (one.clone() / rn - 1u32) * (one.clone() / rm - 1u32);
    let rhs37 = (sn.clone() + ctx.nf(n) + &ctx.alpha) * (sn.clone() + ctx.nf(n))
        / sn.clone().square();
    let res = ctx.rel(&lhs37, &rhs37);

    // exact equivalence: lhs37 * r_n^2 - DIFF2 left side = r_n^2
    let diff2_lhs = sn.clone().square()
        * (one.clone() / (rn.clone() * rm) - one.clone() / rn - one / rm);
    let gap = lhs37 * sn.clone().square() - diff2_lhs;
    let equiv = ctx.rel(&gap, &sn.clone().square());
    if equiv > tol {
        return Err(CoreError::ConsistencyFailure(format!(
            "DP3B is not algebraically equivalent to DIFF2 at n = {n}: rel {equiv}"
        )));
    }
    Ok(ctx.record("DP3B", n, res, tol))
}

/// Evaluates the authoritative (substituted) discrete sigma form and the
/// displayed variant; if they disagree beyond tolerance both records are
/// returned with a discrepancy note.
pub fn check_dsigma(
    ortho: &OrthoTable,
    aux: &AuxTable,
    n: usize,
    prec: &Precision,
    tol: f64,
) -> Result<Vec<ResidualRecord>> {
    let sub = check_identity("DSIGMA", ortho, aux, n, None, prec, tol)?;
    let mut disp = check_identity("DSIGMA_DISPLAY", ortho, aux, n, None, prec, tol)?;
    if sub.residual.is_finite()
        && disp.residual.is_finite()
        && (sub.residual - disp.residual).abs() > tol
    {
        disp = disp.with_note("discrepancy: displayed form disagrees with substituted form");
    }
    Ok(vec![sub, disp])
}

/// Runs every registry entry over `n <= n_max` and the whole `t_grid`.
/// Build failures at a grid point become configuration-error records;
/// quadrature-backed entries run only when `include_quadrature` is set
/// (they cost orders of magnitude more than the rest of the suite).
pub fn verify_suite(
    w: &JumpWeight,
    n_max: usize,
    t_grid: &[Float],
    prec: &Precision,
    tol: f64,
    include_quadrature: bool,
    parallel: bool,
) -> Result<ResidualReport> {
    if t_grid.is_empty() {
        return Err(CoreError::InvalidParameter("empty t grid".into()));
    }
    for t in t_grid {
        if *t <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "t grid must be positive, got {t}"
            )));
        }
    }
    let points: Vec<Float> = t_grid.to_vec();
    let per_point = map_grid(points, parallel, |t| -> Vec<ResidualRecord> {
        let t_str = prec.format(&t);
        let wt = match w.with_t(t.clone()) {
            Ok(wt) => wt,
            Err(e) => return vec![ResidualRecord::config_error("BUILD", t_str, &e.to_string())],
        };
        let ortho = match build_ortho(&wt, n_max, prec) {
            Ok(o) => o,
            Err(e) => return vec![ResidualRecord::config_error("BUILD", t_str, &e.to_string())],
        };
        let aux = match aux_table(&ortho, &wt, prec) {
            Ok(a) => a,
            Err(e) => return vec![ResidualRecord::config_error("BUILD", t_str, &e.to_string())],
        };
        let mut records = Vec::new();
        for e in registry() {
            if e.quadrature && !include_quadrature {
                continue;
            }
            let top = if e.only_n0 { 0 } else { n_max };
            for n in e.min_n..=top {
                match check_identity(e.id, &ortho, &aux, n, None, prec, tol) {
                    Ok(rec) => records.push(rec),
                    Err(err) => records.push(
                        ResidualRecord::config_error(e.id, t_str.clone(), &err.to_string()),
                    ),
                }
            }
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

    fn prec() -> Precision {
        Precision::new(80, 40).unwrap()
    }

    fn build(alpha: f64, a: f64, b: f64, t: f64, n_max: usize) -> (OrthoTable, AuxTable) {
        let p = prec();
        let w = JumpWeight::new(alpha, a, b, t, &p).unwrap();
        let ortho = build_ortho(&w, n_max, &p).unwrap();
        let aux = aux_table(&ortho, &w, &p).unwrap();
        (ortho, aux)
    }

    #[test]
    fn registry_ids_unique() {
        let mut ids: Vec<&str> = registry().iter().map(|e| e.id).collect();
        let len = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), len);
    }

    #[test]
    fn init_examples() {
        let p = prec();
        let (ortho, aux) = build(0.5, 1.0, 1.0, 2.0, 3);
        let rec = check_identity("INIT", &ortho, &aux, 0, None, &p, 1e-30).unwrap();
        assert!(rec.passed(), "residual {}", rec.residual);
    }

    #[test]
    fn alpha_gap_case_n0() {
        // alpha=0, A=0, B=1: R_0 = 1 so alpha_0 = 1 + t
        let p = prec();
        for t in [0.5, 1.0, 3.0] {
            let (ortho, aux) = build(0.0, 0.0, 1.0, t, 2);
            let rec = check_identity("ALPHA", &ortho, &aux, 0, None, &p, 1e-30).unwrap();
            assert!(rec.passed(), "t = {t}: residual {}", rec.residual);
            let a0 = ortho.alpha(0).unwrap();
            let expect = p.float(1) + p.float(t);
            assert!((a0.clone() - expect).abs() < p.pow10(-30));
        }
    }

    #[test]
    fn diff1_gap_case_gives_r1() {
        // n=0, alpha=0, A=0, B=1: r_1 + r_0 = R_0 (t - 1 - t) = -1
        let p = prec();
        let (ortho, aux) = build(0.0, 0.0, 1.0, 1.0, 2);
        let rec = check_identity("DIFF1", &ortho, &aux, 0, None, &p, 1e-30).unwrap();
        assert!(rec.passed(), "residual {}", rec.residual);
        assert!((aux.r_small(1).unwrap().clone() + 1u32).abs() < p.pow10(-30));
    }

    #[test]
    fn full_suite_generic_weight() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 1.0, 2.0, &p).unwrap();
        let report = verify_suite(&w, 5, &[p.float(1), p.float(2)], &p, 1e-30, false, false)
            .unwrap();
        assert!(report.summary.fail == 0, "{:?}", report.summary);
        assert!(report.summary.config_errors == 0);
        assert!(report.summary.pass > 100);
    }

    #[test]
    fn full_suite_gap_case() {
        // closed forms at n = 0, 1 must hold within the suite
        let p = prec();
        let w = JumpWeight::new(0.0, 0.0, 1.0, 1.0, &p).unwrap();
        let report = verify_suite(&w, 5, &[p.float(1)], &p, 1e-30, false, false).unwrap();
        assert_eq!(report.summary.fail, 0, "{:?}", report.summary);
        assert_eq!(report.summary.config_errors, 0);
    }

    #[test]
    fn suite_rejects_b_zero_with_config_record() {
        let p = prec();
        let w = JumpWeight::new(0.5, 1.0, 0.0, 1.0, &p).unwrap();
        let report = verify_suite(&w, 3, &[p.float(1)], &p, 1e-30, false, false).unwrap();
        assert_eq!(report.summary.config_errors, 1);
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].id, "BUILD");
    }

    #[test]
    fn z_samples_validated() {
        let p = prec();
        let (ortho, aux) = build(0.5, 1.0, 1.0, 2.0, 3);
        // a sample at the pole z = t must be rejected
        let bad = vec![p.float(2), p.float(3), p.float(4)];
        assert!(check_identity("S1", &ortho, &aux, 1, Some(&bad), &p, 1e-30).is_err());
        // too few samples
        let few = vec![p.float(1)];
        assert!(check_identity("S1", &ortho, &aux, 1, Some(&few), &p, 1e-30).is_err());
    }

    #[test]
    fn dp3_equivalence() {
        let p = prec();
        let (ortho, aux) = build(0.5, 0.0, 1.0, 1.0, 4);
        let rec = check_dp3_equivalence(&ortho, &aux, 2, &p, 1e-30).unwrap();
        assert!(rec.passed(), "residual {}", rec.residual);
    }

    #[test]
    fn dsigma_forms_agree() {
        let p = prec();
        let (ortho, aux) = build(0.5, 1.0, 1.0, 2.0, 6);
        for n in 1..=5usize {
            let recs = check_dsigma(&ortho, &aux, n, &p, 1e-30).unwrap();
            assert_eq!(recs.len(), 2);
            for r in &recs {
                assert!(
                    r.passed() || r.status == crate::report::RecordStatus::SkippedDegenerate,
                    "{} at n={n}: residual {}",
                    r.id,
                    r.residual
                );
                assert!(r.note.is_none() || !r.passed(), "unexpected discrepancy note");
            }
        }
    }

    #[test]
    fn unknown_id_rejected() {
        let p = prec();
        let (ortho, aux) = build(0.5, 1.0, 1.0, 2.0, 2);
        assert!(check_identity("NOPE", &ortho, &aux, 1, None, &p, 1e-30).is_err());
    }
}
