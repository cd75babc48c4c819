//! The bare origin-parametrix function system of a p-chain.
//!
//! Indices follow the 1-based conventions of the underlying formulas: g_j, f_j and
//! f̂_j for j = 1..p+1, exponents a_1..a_p and partial sums a_{kℓ}.

mod verify;

pub use verify::{
    assemble_sector, asymptotic_form, jump_matrix, verify_asymptotics, verify_jump, verify_monodromy, verify_ray_jump, Ray,
};

use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx, PrecisionContext};
use crate::linalg::CMat;
use crate::meijer::{meijer_series_deltas, MeijerSeriesSpec, ResidueExpansion, ResonancePolicy, RESONANCE_TOL};

/// The exponent pack a₁..a_p of a p-chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainExponents {
    a: Vec<f64>,
}

impl ChainExponents {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(NumError::Invalid("a chain needs p ≥ 1".into()));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(NumError::Invalid("non-finite exponent".into()));
        }
        let e = ChainExponents { a };
        for k in 1..=e.p() {
            for l in k..=e.p() {
                let s = e.a_sum(k, l);
                if s <= -1.0 {
                    return Err(NumError::Constraint(format!("a_{{{k}{l}}} = {s} ≤ −1")));
                }
            }
        }
        Ok(e)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// a_j, 1-based.
    pub fn aj(&self, j: usize) -> f64 {
        self.a[j - 1]
    }

    /// a_{kℓ} = a_k + … + a_ℓ, zero when ℓ < k.
    pub fn a_sum(&self, k: usize, l: usize) -> f64 {
        if l < k {
            0.0
        } else {
            self.a[k - 1..l].iter().sum()
        }
    }

    /// The cumulative sums 0, a₁, a₁₂, …, a_{1p}.
    pub fn cumulative(&self) -> Vec<f64> {
        (0..=self.p()).map(|l| self.a_sum(1, l)).collect()
    }

    /// True when some a_{kℓ} is within tolerance of an integer.
    pub fn is_resonant(&self) -> bool {
        (1..=self.p()).any(|k| {
            (k..=self.p()).any(|l| {
                let s = self.a_sum(k, l);
                (s - s.round()).abs() < RESONANCE_TOL
            })
        })
    }

    /// Exponents shifted by ε·d_j.
    pub fn perturbed(&self, eps: f64) -> ChainExponents {
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(i, x)| x + eps * crate::meijer::perturbation_direction(i))
            .collect();
        ChainExponents { a }
    }
}

/// Which boundary value or half-plane a function is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn of_half_plane(z: &Cx) -> Option<Side> {
        if z.im > 0 {
            Some(Side::Plus)
        } else if z.im < 0 {
            Some(Side::Minus)
        } else {
            None
        }
    }
}

/// A point on the universal cover with the half-plane tag selecting g^{(±)}.
#[derive(Debug, Clone)]
pub struct SidedPoint {
    pub log: Cx,
    pub side: Side,
}

impl SidedPoint {
    /// Off the real axis the tag is inferred; on the real axis it is required.
    /// Negative reals take log|z| ± iπ according to the tag.
    pub fn new(z: &Cx, tag: Option<Side>, prec: u32) -> Result<SidedPoint> {
        if z.is_zero() {
            return Err(NumError::Domain("the origin is a branch point".into()));
        }
        let inferred = Side::of_half_plane(z);
        let side = match (inferred, tag) {
            (Some(s), None) => s,
            (Some(s), Some(t)) if s == t => s,
            (Some(_), Some(_)) => return Err(NumError::Invalid("side tag contradicts the half-plane".into())),
            (None, Some(t)) => t,
            (None, None) => return Err(NumError::Invalid("real argument needs a side tag".into())),
        };
        let mut log = z.with_prec(prec).ln();
        if inferred.is_none() && z.re < 0 {
            log.im = Float::with_val(prec, pi(prec) * side.sign());
        }
        Ok(SidedPoint { log, side })
    }

    pub fn from_log(log: Cx, side: Side) -> SidedPoint {
        SidedPoint { log, side }
    }

    /// z^γ on the sheet of this point.
    pub fn pow(&self, gamma: f64) -> Cx {
        self.log.scale_f64(gamma).exp()
    }
}

/// Derived constants of the parametrix for a fixed exponent pack.
#[derive(Debug, Clone)]
pub struct ParametrixContext {
    pub exps: ChainExponents,
    /// A_1..A_{p+1} with A_{j+1} − A_j = (p+1)a_j and ΣA_j = 0.
    pub big_a: Vec<f64>,
    /// diag(0, a₁, a₁₂, …, a_{1p}).
    pub d: Vec<f64>,
    /// σ_j = (j+1) mod 2 for j = 0..p+1.
    pub sigma: Vec<u8>,
    /// c_1..c_{p+1} (index 0 unused).
    pub c: Vec<Cx>,
    pub c_hat: Vec<Cx>,
    /// Coefficients of K(u) = (−1)^p Π_{ℓ=0}^{p} (u − a_{1ℓ}), lowest degree first.
    pub k_coeffs: Vec<Float>,
    /// 𝒦_{jk} = (−1)^{k−1} [u^{j+k−1}]K, stored 0-based. This sign makes B(f_j, f̂_k) = δ_{jk}.
    pub concomitant: Vec<Vec<Float>>,
    pub ctx: PrecisionContext,
}

pub fn sigma(j: usize) -> u8 {
    ((j + 1) % 2) as u8
}

/// Builds all constants for the pack.
pub fn build_context(exps: ChainExponents, ctx: &PrecisionContext) -> Result<ParametrixContext> {
    let p = exps.p();
    let prec = ctx.bits() + 32;
    let cum = exps.cumulative();
    let a1 = -cum.iter().sum::<f64>();
    let big_a: Vec<f64> = (0..=p).map(|j| a1 + (p as f64 + 1.0) * cum[j]).collect();
    let sigma_v: Vec<u8> = (0..=p + 1).map(sigma).collect();

    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let norm = (Float::with_val(prec, p + 1) / Float::with_val(prec, two_pi.clone().pow_u(p as u32))).sqrt();
    let two_pi_i = Cx::from_parts(Float::new(prec), two_pi.clone());
    let mut c = vec![Cx::zero(prec)];
    let mut c_hat = vec![Cx::zero(prec)];
    for j in 1..=p + 1 {
        let cj = two_pi_i.powi((p + 1 - j) as i32).scale(&norm);
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        c_hat.push(cj.recip().scale_f64(sign));
        c.push(cj);
    }

    // K(u) = (−1)^p Π (u − a_{1ℓ})
    let mut k = vec![Float::with_val(prec, if p % 2 == 0 { 1 } else { -1 })];
    for &r in &cum {
        let mut next = vec![Float::new(prec); k.len() + 1];
        for (i, ci) in k.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= Float::with_val(prec, ci * r);
        }
        k = next;
    }
    let concomitant = (1..=p + 1)
        .map(|j| {
            (1..=p + 1)
                .map(|kk| {
                    let n = j + kk - 1;
                    let v = k.get(n).cloned().unwrap_or_else(|| Float::new(prec));
                    if (kk - 1) % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();

    Ok(ParametrixContext {
        d: cum.clone(),
        exps,
        big_a,
        sigma: sigma_v,
        c,
        c_hat,
        k_coeffs: k,
        concomitant,
        ctx: *ctx,
    })
}

trait PowU {
    fn pow_u(self, n: u32) -> Float;
}

impl PowU for Float {
    fn pow_u(self, n: u32) -> Float {
        let mut acc = Float::with_val(self.prec(), 1);
        for _ in 0..n {
            acc *= &self;
        }
        acc
    }
}

/// Which member of the function system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    G,
    F,
    FHat,
}

impl ParametrixContext {
    pub fn p(&self) -> usize {
        self.exps.p()
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.p() + 1 {
            return Err(NumError::Invalid(format!("index {j} outside 1..={}", self.p() + 1)));
        }
        Ok(())
    }

    /// Mellin–Barnes spec of g_j^{(±)}, f_j^{(±)} or f̂_j^{(±)}, constants included.
    pub fn spec(&self, family: Family, j: usize, side: Side) -> Result<MeijerSeriesSpec> {
        self.check_index(j)?;
        let e = &self.exps;
        let p = self.p();
        let prec = self.ctx.bits() + 32;
        let sgn = side.sign();
        let phase_const = |x: f64| {
            let th = Float::with_val(prec, pi(prec) * x);
            Cx::polar(&Float::with_val(prec, 1), &th)
        };
        let spec = match family {
            Family::G => {
                let num: Vec<f64> = (1..=j).map(|l| e.a_sum(l, j - 1)).collect();
                let den: Vec<f64> = (j..=p).map(|l| -e.a_sum(j, l)).collect();
                MeijerSeriesSpec::from_lists(&num, &den)?
                    .with_phase(sgn * self.sigma[j] as f64)
                    .with_prefactor(self.c[j].clone())
            }
            Family::F => {
                let num: Vec<f64> = (0..j).map(|l| -self.d[l]).collect();
                let den: Vec<f64> = (j..=p).map(|l| -self.d[l]).collect();
                let s = self.sigma[j] as f64;
                MeijerSeriesSpec::from_lists(&num, &den)?
                    .with_phase(sgn * s)
                    .with_prefactor(&self.c[j] * &phase_const(-sgn * self.d[j - 1] * s))
            }
            Family::FHat => {
                let num: Vec<f64> = (j - 1..=p).map(|l| self.d[l]).collect();
                let den: Vec<f64> = (0..j.saturating_sub(1)).map(|l| self.d[l]).collect();
                let s = self.sigma[j - 1] as f64;
                MeijerSeriesSpec::from_lists(&num, &den)?
                    .with_phase(sgn * s)
                    .with_prefactor(&self.c_hat[j] * &phase_const(sgn * self.d[j - 1] * s))
            }
        };
        Ok(spec.with_resonance(ResonancePolicy::Perturb))
    }

    /// Δ^r h(ζ) for r = 0..=rmax at a sided point, h one of g_j, f_j, f̂_j.
    pub fn deltas(&self, family: Family, j: usize, at: &SidedPoint, rmax: usize) -> Result<Vec<Cx>> {
        let spec = self.spec(family, j, at.side)?;
        meijer_series_deltas(&spec, &at.log, rmax, &self.ctx)
    }

    /// Residue expansion of f_j or f̂_j on the given side, at the given working precision.
    pub fn expansion(&self, family: Family, j: usize, side: Side, prec: u32) -> Result<ResidueExpansion> {
        ResidueExpansion::new(&self.spec(family, j, side)?, prec)
    }

    fn principal(&self, j: usize, zeta: &Cx, side: Side) -> Result<SidedPoint> {
        if zeta.is_zero() {
            return Err(NumError::Domain("ζ = 0".into()));
        }
        if j >= 2 && zeta.im.is_zero() && zeta.re < 0 {
            return Err(NumError::Cut(format!("g_{j} is cut along (−∞, 0]")));
        }
        Ok(SidedPoint::from_log(zeta.with_prec(self.ctx.bits() + 32).ln(), side))
    }
}

/// g_j^{(±)}(ζ) on the principal sheet.
pub fn g_func(j: usize, side: Side, zeta: &Cx, pc: &ParametrixContext) -> Result<Cx> {
    if zeta.is_zero() {
        pc.check_index(j)?;
        let spec = pc.spec(Family::G, j, side)?;
        return crate::meijer::meijer_series(&spec, zeta, &pc.ctx);
    }
    if j == 1 && zeta.im.is_zero() && zeta.re < 0 {
        // entire: any log of ζ gives the same value
        let at = SidedPoint::from_log(zeta.with_prec(pc.ctx.bits() + 32).ln(), side);
        return Ok(pc.deltas(Family::G, 1, &at, 0)?.remove(0));
    }
    let at = pc.principal(j, zeta, side)?;
    Ok(pc.deltas(Family::G, j, &at, 0)?.remove(0))
}

/// g_j^{(±)} at an explicit log ζ, i.e. on any sheet of the universal cover.
pub fn g_func_log(j: usize, side: Side, log_zeta: &Cx, pc: &ParametrixContext) -> Result<Cx> {
    let at = SidedPoint::from_log(log_zeta.clone(), side);
    Ok(pc.deltas(Family::G, j, &at, 0)?.remove(0))
}

/// f_j^{(±)}(ζ) = ζ^{−a_{1,j−1}} g_j^{(±)}(ζ).
pub fn f_func(j: usize, side: Side, zeta: &Cx, pc: &ParametrixContext) -> Result<Cx> {
    let at = pc.principal(2.max(j), zeta, side)?;
    Ok(pc.deltas(Family::F, j, &at, 0)?.remove(0))
}

/// f̂_j^{(±)}(ζ).
pub fn f_hat_func(j: usize, side: Side, zeta: &Cx, pc: &ParametrixContext) -> Result<Cx> {
    let at = pc.principal(2, zeta, side)?;
    Ok(pc.deltas(Family::FHat, j, &at, 0)?.remove(0))
}

fn sandwich(pc: &ParametrixContext, left: &[Cx], right: &[Cx]) -> Cx {
    let prec = pc.ctx.bits() + 32;
    let mut s = Cx::zero(prec);
    for (r, lv) in left.iter().enumerate() {
        for (c, rv) in right.iter().enumerate() {
            let k = &pc.concomitant[r][c];
            if !k.is_zero() {
                s += &(lv * rv).scale(k);
            }
        }
    }
    s
}

/// B(f_j, f̂_k)(ζ): Δ-derivative row of f̂_k, times 𝒦, times the Δ-derivative column of f_j.
pub fn bilinear_concomitant(
    j: usize,
    k: usize,
    side_f: Side,
    side_fhat: Side,
    zeta: &Cx,
    pc: &ParametrixContext,
) -> Result<Cx> {
    let at = pc.principal(2, zeta, side_f)?;
    let f = pc.deltas(Family::F, j, &at, pc.p())?;
    let at_hat = SidedPoint::from_log(at.log.clone(), side_fhat);
    let fh = pc.deltas(Family::FHat, k, &at_hat, pc.p())?;
    Ok(sandwich(pc, &fh, &f).with_prec(pc.ctx.bits()))
}

/// B̄(f_j, f̂_k)(w, z) in the matrix-sandwich form.
pub fn generalized_concomitant(j: usize, k: usize, w: &SidedPoint, z: &SidedPoint, pc: &ParametrixContext) -> Result<Cx> {
    let f = pc.deltas(Family::F, j, z, pc.p())?;
    let fh = pc.deltas(Family::FHat, k, w, pc.p())?;
    Ok(sandwich(pc, &fh, &f).with_prec(pc.ctx.bits()))
}

/// Σ_{t,s} α_t β_s e^{(e_t)Lz + (e_s)Lw} / (shift + e_t + e_s) over the residue families of
/// two expansions, where each expansion is Σ_t α_t e^{e_t L}.
pub fn double_residue_sum(
    left: &mut ResidueExpansion,
    log_left: &Cx,
    right: &mut ResidueExpansion,
    log_right: &Cx,
    shift: f64,
) -> Result<(Cx, f64)> {
    let prec = left.prec().min(right.prec());
    let zl = left.phase_applied(log_left);
    let zr = right.phase_applied(log_right);
    let el = zl.exp();
    let er = zr.exp();
    let mut total = Cx::zero(prec);
    let mut peak = f64::NEG_INFINITY;
    let pl = left.prefactor().clone();
    let pr = right.prefactor().clone();
    let nl = left.families.len();
    let nr = right.families.len();
    for fi in 0..nl {
        // terms of the left family: α_t e^{(b+n)L}
        let go = left.growth_order();
        let lt = left.families[fi].terms(&el, go);
        let bl = left.families[fi].exponent.clone();
        let base_l = zl.scale(&bl).exp();
        for fj in 0..nr {
            let go = right.growth_order();
            let rt = right.families[fj].terms(&er, go);
            let br = right.families[fj].exponent.clone();
            let base_r = zr.scale(&br).exp();
            let mut acc = Cx::zero(prec);
            let e0 = Float::with_val(prec, &bl + &br) + shift;
            for (n, tl) in lt.iter().enumerate() {
                if tl.is_zero() {
                    continue;
                }
                let nn = n + left.families[fi].start();
                for (m, tr) in rt.iter().enumerate() {
                    if tr.is_zero() {
                        continue;
                    }
                    let mm = m + right.families[fj].start();
                    let den = Float::with_val(prec, &e0 + (nn + mm) as u32);
                    if den.is_zero() || crate::gammakit::log2_float(&Float::with_val(prec, den.abs_ref())) < -30.0 {
                        return Err(NumError::Resonance(format!(
                            "exponent sum {} hits a pole of the double series",
                            den.to_f64()
                        )));
                    }
                    let t = (tl * tr).scale(&den.recip());
                    peak = peak.max(t.log2_abs() + base_l.log2_abs() + base_r.log2_abs());
                    acc += &t;
                }
            }
            total += &(&(&acc * &base_l) * &base_r);
        }
    }
    let total = &(&total * &pl) * &pr;
    let lost = peak + pl.log2_abs() + pr.log2_abs() - total.log2_abs();
    Ok((total, lost))
}

/// B̄(f_j, f̂_k)(w, z) from the split into a double residue series plus the
/// residues at the points 0, a₁₁, …, a_{1p}.
pub fn generalized_concomitant_split(
    j: usize,
    k: usize,
    w: &SidedPoint,
    z: &SidedPoint,
    pc: &ParametrixContext,
) -> Result<Cx> {
    pc.check_index(j)?;
    pc.check_index(k)?;
    if pc.exps.is_resonant() {
        return crate::meijer::richardson(crate::meijer::PERTURBATION_STEP, |eps| {
            let wctx = PrecisionContext { mantissa_bits: pc.ctx.bits() + 64, ..pc.ctx };
            let pe = build_context(pc.exps.perturbed(eps), &wctx)?;
            generalized_concomitant_split(j, k, w, z, &pe)
        })
        .map(|v| v.with_prec(pc.ctx.bits()));
    }
    let mut prec = pc.ctx.bits() + 32;
    for _ in 0..4 {
        let mut ef = pc.expansion(Family::F, j, z.side, prec)?;
        let mut eh = pc.expansion(Family::FHat, k, w.side, prec)?;
        let (phi, lost) = double_residue_sum(&mut ef, &z.log, &mut eh, &w.log, 1.0)?;
        if lost + 8.0 >= (prec - pc.ctx.bits()) as f64 {
            prec = pc.ctx.bits() + lost.ceil() as u32 + 40;
            continue;
        }
        let wz = &w.log.exp() - &z.log.exp();
        let mut v = &phi * &wz.with_prec(prec);
        v -= &split_residue_term(j, k, w, z, pc, prec);
        return Ok(v.with_prec(pc.ctx.bits()));
    }
    Err(NumError::Precision("double residue series cancellation".into()))
}

/// c_j ĉ_k Σ_{s ∈ {0, a₁₁, …}} res_{v=s} F_j(v+1) F̂_k(−v) w^v z^{−v}.
fn split_residue_term(j: usize, k: usize, w: &SidedPoint, z: &SidedPoint, pc: &ParametrixContext, prec: u32) -> Cx {
    let mut total = Cx::zero(prec);
    if j < k {
        return total;
    }
    let d = &pc.d;
    let pi_p = pi(prec);
    let sj = pc.sigma[j] as f64 * z.side.sign();
    let sk = pc.sigma[k - 1] as f64 * w.side.sign();
    let lw_lz = &w.log.with_prec(prec) - &z.log.with_prec(prec);
    for l in k - 1..j {
        let v = d[l];
        // res of Π π/sin(π(a_{1n} − v)) at v = a_{1l}: the pole factor gives −1
        let mut r = Float::with_val(prec, -1);
        for n in k - 1..j {
            if n != l {
                let x = Float::with_val(prec, &pi_p * (d[n] - v));
                r *= Float::with_val(prec, &pi_p / x.sin());
            }
        }
        let theta = Float::with_val(prec, &pi_p * (sj * (v + 1.0 - d[j - 1]) + sk * (-v + d[k - 1])));
        let ph = Cx::polar(&Float::with_val(prec, 1), &theta);
        let pw = lw_lz.scale_f64(v).exp();
        total += &(&ph * &pw).scale(&r);
    }
    &(&total * &pc.c[j].with_prec(prec)) * &pc.c_hat[k].with_prec(prec)
}

/// 𝔾^{(±)}(ζ) = [(Δ − a_{1,k−1})^{j−1} g_k]_{j,k}, computed as 𝔽 ζ^{−D}.
pub fn g_matrix(at: &SidedPoint, pc: &ParametrixContext) -> Result<CMat> {
    let f = f_matrix(at, pc)?;
    let n = pc.p() + 1;
    let pows: Vec<Cx> = (0..n).map(|k| at.pow(pc.d[k])).collect();
    Ok(CMat::from_fn(n, |r, k| f.get(r, k) * &pows[k]))
}

/// 𝔽^{(±)}(ζ) = [Δ^{j−1} f_k].
pub fn f_matrix(at: &SidedPoint, pc: &ParametrixContext) -> Result<CMat> {
    let n = pc.p() + 1;
    let cols: Vec<Vec<Cx>> = (1..=n).map(|k| pc.deltas(Family::F, k, at, pc.p())).collect::<Result<_>>()?;
    Ok(CMat::from_fn(n, |r, k| cols[k][r].clone()))
}

/// 𝔽̂^{(±)}(ζ) = [Δ^{j−1} f̂_k].
pub fn f_hat_matrix(at: &SidedPoint, pc: &ParametrixContext) -> Result<CMat> {
    let n = pc.p() + 1;
    let cols: Vec<Vec<Cx>> = (1..=n).map(|k| pc.deltas(Family::FHat, k, at, pc.p())).collect::<Result<_>>()?;
    Ok(CMat::from_fn(n, |r, k| cols[k][r].clone()))
}

/// 𝔾^{−1}(w) 𝔾(z) = w^{−D} B̄(w, z) z^{D}, with B̄ = 𝔽̂(w)ᵀ 𝒦 𝔽(z).
pub fn inverse_product(w: &SidedPoint, z: &SidedPoint, pc: &ParametrixContext) -> Result<CMat> {
    let fz = f_matrix(z, pc)?;
    let fw = f_hat_matrix(w, pc)?;
    let n = pc.p() + 1;
    let prec = pc.ctx.bits() + 32;
    let kmat = CMat::from_fn(n, |i, j| Cx::from_real(Float::with_val(prec, &pc.concomitant[i][j])));
    let b = fw.transpose().mul(&kmat).mul(&fz);
    let wp: Vec<Cx> = (0..n).map(|i| w.pow(-pc.d[i])).collect();
    let zp: Vec<Cx> = (0..n).map(|i| z.pow(pc.d[i])).collect();
    Ok(CMat::from_fn(n, |i, j| (&(&wp[i] * b.get(i, j)) * &zp[j]).with_prec(pc.ctx.bits())))
}

/// The inverse 𝔾^{−1}(ζ) = ζ^{−D} 𝔽̂(ζ)ᵀ 𝒦.
pub fn g_inverse(at: &SidedPoint, pc: &ParametrixContext) -> Result<CMat> {
    let fw = f_hat_matrix(at, pc)?;
    let n = pc.p() + 1;
    let prec = pc.ctx.bits() + 32;
    let kmat = CMat::from_fn(n, |i, j| Cx::from_real(Float::with_val(prec, &pc.concomitant[i][j])));
    let b = fw.transpose().mul(&kmat);
    Ok(CMat::from_fn(n, |i, j| &at.pow(-pc.d[i]) * b.get(i, j)))
}
