//! 𝔤-functions, their normalizing constants 𝔩_j, the ω and π combinations and the effective
//! potentials of the quartic, all from contour integrals of the sheets.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rug::Float;

use super::quartic::{branch_points_p3, sheet, BRANCH_A, BRANCH_B};
use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx, PrecisionContext};
use crate::parametrix::Side;
use crate::quad::{gauss_legendre, Rule};

/// Distance kept between the integration paths and the cuts.
pub const PATH_STANDOFF: f64 = 0.1;
/// Absolute tolerance of every path integral.
const PATH_TOL: f64 = 1e-14;
const MAX_PANELS: usize = 4000;

/// Parameter maps of [0, 1] onto a segment z₀ → z₁, graded at an end with an integrable singularity.
#[derive(Debug, Clone, Copy)]
enum Grade {
    None,
    /// λ = z₀ + (z₁ − z₀)t^k.
    Start(i32),
    /// λ = z₁ − (z₁ − z₀)(1 − t)^k.
    End(i32),
}

struct Panel {
    lo: Float,
    hi: Float,
    value: [Cx; 2],
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

struct Integrator {
    prec: u32,
    fine: Rule,
    coarse: Rule,
}

impl Integrator {
    fn new(prec: u32) -> Integrator {
        let ctx = PrecisionContext::with_bits(prec);
        Integrator { prec, fine: gauss_legendre(20, &ctx), coarse: gauss_legendre(10, &ctx) }
    }

    fn rule<F>(&self, r: &Rule, f: &F, lo: &Float, hi: &Float) -> Result<[Cx; 2]>
    where
        F: Fn(&Float) -> Result<[Cx; 2]>,
    {
        let p = self.prec;
        let half = Float::with_val(p, hi - lo) / 2u32;
        let mid = Float::with_val(p, hi + lo) / 2u32;
        let mut acc = [Cx::zero(p), Cx::zero(p)];
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            let t = Float::with_val(p, x * &half) + &mid;
            let v = f(&t)?;
            let ww = Float::with_val(p, w * &half);
            for k in 0..2 {
                acc[k] += &v[k].scale(&ww);
            }
        }
        Ok(acc)
    }

    fn panel<F>(&self, f: &F, lo: Float, hi: Float) -> Result<Panel>
    where
        F: Fn(&Float) -> Result<[Cx; 2]>,
    {
        let a = self.rule(&self.fine, f, &lo, &hi)?;
        let b = self.rule(&self.coarse, f, &lo, &hi)?;
        let err = (0..2).map(|k| a[k].dist(&b[k])).fold(0.0, f64::max);
        Ok(Panel { lo, hi, value: a, err })
    }

    /// ∫₀¹ f(t) dt for a pair of integrands, refined globally until the summed estimate is below tol.
    fn unit<F>(&self, f: &F, tol: f64) -> Result<[Cx; 2]>
    where
        F: Fn(&Float) -> Result<[Cx; 2]>,
    {
        let p = self.prec;
        let mut heap = BinaryHeap::new();
        heap.push(self.panel(f, Float::new(p), Float::with_val(p, 1))?);
        let mut total_err = heap.peek().map(|x| x.err).unwrap_or(0.0);
        let mut count = 1;
        while total_err > tol {
            if count >= MAX_PANELS {
                return Err(NumError::Convergence(format!("path integral stalled at error {total_err:e}")));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = Float::with_val(p, &worst.lo + &worst.hi) / 2u32;
            let left = self.panel(f, worst.lo, mid.clone())?;
            let right = self.panel(f, mid, worst.hi)?;
            total_err += left.err + right.err - worst.err;
            heap.push(left);
            heap.push(right);
            count += 1;
            if count % 64 == 0 {
                total_err = heap.iter().map(|x| x.err).sum();
            }
        }
        let mut acc = [Cx::zero(p), Cx::zero(p)];
        for pn in heap.into_iter() {
            for k in 0..2 {
                acc[k] += &pn.value[k];
            }
        }
        Ok(acc)
    }

    /// ∫ (y₁, y₂) dλ along the segment z₀ → z₁.
    fn segment(&self, z0: &Cx, z1: &Cx, grade: Grade, side: Side, tol: f64) -> Result<[Cx; 2]> {
        let p = self.prec;
        let d = z1 - z0;
        let f = |t: &Float| -> Result<[Cx; 2]> {
            let (lam, jac) = match grade {
                Grade::None => (z0 + &d.scale(t), d.clone()),
                Grade::Start(k) => {
                    let tk = Float::with_val(p, t.pow_ref_i32(k));
                    let dt = Float::with_val(p, t.pow_ref_i32(k - 1)) * k;
                    (z0 + &d.scale(&tk), d.scale(&dt))
                }
                Grade::End(k) => {
                    let u = Float::with_val(p, 1 - t);
                    let uk = Float::with_val(p, u.pow_ref_i32(k));
                    let du = Float::with_val(p, u.pow_ref_i32(k - 1)) * k;
                    (z1 - &d.scale(&uk), d.scale(&du))
                }
            };
            let y1 = sheet(1, &lam, Some(side))?;
            let y2 = sheet(2, &lam, Some(side))?;
            Ok([&y1 * &jac, &y2 * &jac])
        };
        self.unit(&f, tol)
    }

    /// ∫ (y₁, y₂) dλ along a polyline whose first vertex is the branch point 0.
    fn polyline(&self, pts: &[Cx], end_side: Side) -> Result<[Cx; 2]> {
        let p = self.prec;
        let mut acc = [Cx::zero(p), Cx::zero(p)];
        let n = pts.len();
        for (i, w) in pts.windows(2).enumerate() {
            if (&w[1] - &w[0]).is_zero() {
                continue;
            }
            let last = i + 2 == n;
            let grade = if i == 0 {
                Grade::Start(4)
            } else if last && w[1].im.is_zero() {
                Grade::End(2)
            } else {
                Grade::None
            };
            let v = self.segment(&w[0], &w[1], grade, end_side, PATH_TOL / 8.0)?;
            for k in 0..2 {
                acc[k] += &v[k];
            }
        }
        Ok(acc)
    }
}

trait PowRef {
    fn pow_ref_i32(&self, k: i32) -> Float;
}

impl PowRef for Float {
    fn pow_ref_i32(&self, k: i32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(k))
    }
}

/// The 𝔩 constants and the machinery to evaluate 𝔤^(j), ω, π and φ on demand.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    prec: u32,
    /// 𝔩₁..𝔩₄ with 𝔩₄ = −𝔩₁, 𝔩₃ = −𝔩₂.
    pub ell: [Cx; 4],
}

/// Real-axis integrals ∫₀^b y_{j+} (j = 1, 2) split at b/2 and graded at both ends.
fn cut_integrals(ig: &Integrator) -> Result<[Cx; 2]> {
    let p = ig.prec;
    let (_, b) = branch_points_p3(p);
    let zero = Cx::zero(p);
    let mid = Cx::from_real(Float::with_val(p, &b / 2u32));
    let bb = Cx::from_real(b);
    let l = ig.segment(&zero, &mid, Grade::Start(4), Side::Plus, PATH_TOL / 4.0)?;
    let r = ig.segment(&mid, &bb, Grade::End(2), Side::Plus, PATH_TOL / 4.0)?;
    Ok([&l[0] + &r[0], &l[1] + &r[1]])
}

impl EquilibriumData {
    pub fn new(ctx: &PrecisionContext) -> Result<EquilibriumData> {
        let p = ctx.bits();
        let ig = Integrator::new(p);
        let (_, b) = branch_points_p3(p);
        let cut = cut_integrals(&ig)?;
        // ∫_b^{b+1}: sqrt-type start; ∫_{b+1}^∞ through λ = (b + 1)/w
        let bc = Cx::from_real(b.clone());
        let b1 = Cx::from_real(Float::with_val(p, &b + 1u32));
        let near = {
            let f = |t: &Float| -> Result<[Cx; 2]> {
                let t2 = Float::with_val(p, t * t);
                let lam = &bc + &Cx::from_real(t2);
                let jac = Float::with_val(p, t * 2u32);
                let y1 = sheet(1, &lam, None)?;
                let y2 = sheet(2, &lam, None)?;
                let half = Cx::new(p, 0.5, 0.0);
                let a = &(&y1 - &half) + &lam.recip();
                let c = &y2 + &half;
                Ok([a.scale(&jac), c.scale(&jac)])
            };
            ig.unit(&f, PATH_TOL / 4.0)?
        };
        let far = {
            let f = |w: &Float| -> Result<[Cx; 2]> {
                let lam = Cx::from_real(Float::with_val(p, &b1.re / w));
                let jac = Float::with_val(p, &b1.re / Float::with_val(p, w * w));
                let y1 = sheet(1, &lam, None)?;
                let y2 = sheet(2, &lam, None)?;
                let half = Cx::new(p, 0.5, 0.0);
                let a = &(&y1 - &half) + &lam.recip();
                let c = &y2 + &half;
                Ok([a.scale(&jac), c.scale(&jac)])
            };
            ig.unit(&f, PATH_TOL / 4.0)?
        };
        let half_b = Float::with_val(p, &b / 2u32);
        let l1 = &(&(&cut[0] + &near[0]) + &far[0]) + &Cx::from_real(Float::with_val(p, b.ln_ref()) - &half_b);
        let l2 = &(&(&cut[1] + &near[1]) + &far[1]) + &Cx::from_real(half_b);
        let l1 = l1.scale_f64(4.0);
        let l2 = l2.scale_f64(4.0);
        let ell = [l1.clone(), l2.clone(), l2.scale_f64(-1.0), l1.scale_f64(-1.0)];
        Ok(EquilibriumData { prec: p, ell })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    fn point(&self, z: &Cx) -> Cx {
        z.with_prec(self.prec)
    }

    /// (∫₀^z y₁, ∫₀^z y₂) along the standard path: up to i·d, across at height d, then straight to z
    /// from above; points below the axis (or the lower side of a cut) are reached by crossing the
    /// axis to the right of b.
    fn integrals(&self, z: &Cx, side: Option<Side>) -> Result<[Cx; 2]> {
        let p = self.prec;
        let z = self.point(z);
        if !z.is_finite() {
            return Err(NumError::Domain("z must be finite".into()));
        }
        if z.is_zero() {
            return Ok([Cx::zero(p), Cx::zero(p)]);
        }
        let on_axis = z.im.is_zero();
        if on_axis {
            let x = z.re.to_f64();
            if x > BRANCH_A && x < BRANCH_B && side.is_none() {
                return Err(NumError::Cut(format!("z = {x} lies on a cut of the 𝔤-functions; pass a side")));
            }
        }
        let below = z.im < 0 || (on_axis && side == Some(Side::Minus));
        let d = Cx::new(p, 0.0, PATH_STANDOFF);
        let re = Cx::from_real(z.re.clone());
        let mut pts = vec![Cx::zero(p), d.clone()];
        if below {
            let x = z.re.to_f64().max(BRANCH_B) + 1.0;
            let xc = Cx::new(p, x, 0.0);
            pts.push(&xc + &d);
            pts.push(&xc - &d);
            pts.push(&re - &d);
        } else {
            pts.push(&re + &d);
        }
        pts.push(z);
        let ig = Integrator::new(p);
        ig.polyline(&pts, side.unwrap_or(Side::Plus))
    }

    /// 𝔤^(1..4)(z): 𝔤^(j) = 𝔩_j/4 ± z/2 − ∫₀^z y_j with + for j = 1, 3.
    pub fn g_functions(&self, z: &Cx, side: Option<Side>) -> Result<[Cx; 4]> {
        let [i1, i2] = self.integrals(z, side)?;
        let zz = self.point(z);
        let hz = zz.scale_f64(0.5);
        let q = |k: usize| self.ell[k].scale_f64(0.25);
        Ok([
            &(&q(0) + &hz) - &i1,
            &(&q(1) - &hz) - &i2,
            &(&q(2) + &hz) + &i2,
            &(&q(3) - &hz) + &i1,
        ])
    }

    /// ω_{j,j+1}(x) = 𝔤^(j)_−(x) − 𝔤^(j+1)_+(x) − (−1)^{j+1}x − 𝔩_j/4 + 𝔩_{j+1}/4 at real x ≠ 0.
    /// With the 𝔩 constants as defined its imaginary part is a multiple of 2π.
    pub fn omega(&self, j: usize, x: f64) -> Result<Cx> {
        if !(1..=3).contains(&j) {
            return Err(NumError::Invalid(format!("ω index {j} outside 1..=3")));
        }
        let z = Cx::new(self.prec, x, 0.0);
        let gm = self.g_functions(&z, Some(Side::Minus))?;
        let gp = self.g_functions(&z, Some(Side::Plus))?;
        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
        let lin = z.scale_f64(sign);
        let c = &self.ell[j].scale_f64(0.25) - &self.ell[j - 1].scale_f64(0.25);
        Ok(&(&(&gm[j - 1] - &gp[j]) + &lin) + &c)
    }

    /// π_j(x) = 𝔤^(j)_+(x) − 𝔤^(j)_−(x).
    pub fn pi_jump(&self, j: usize, x: f64) -> Result<Cx> {
        if !(1..=4).contains(&j) {
            return Err(NumError::Invalid(format!("π index {j} outside 1..=4")));
        }
        let z = Cx::new(self.prec, x, 0.0);
        let gp = self.g_functions(&z, Some(Side::Plus))?;
        let gm = self.g_functions(&z, Some(Side::Minus))?;
        Ok(&gp[j - 1] - &gm[j - 1])
    }

    /// (φ₁, φ₂, φ₃) with φ_j = ∫₀^z (y_j − y_{j+1}).
    pub fn effective_potentials(&self, z: &Cx, side: Option<Side>) -> Result<[Cx; 3]> {
        let [i1, i2] = self.integrals(z, side)?;
        let phi1 = &i1 - &i2;
        let phi2 = i2.scale_f64(2.0);
        let phi3 = &i1 - &i2;
        Ok([phi1, phi2, phi3])
    }

    /// (∫₀^z y₁, ∫₀^z y₂) along the straight segment from 0, for z off the real axis.
    pub fn straight_integrals(&self, z: &Cx) -> Result<[Cx; 2]> {
        let z = self.point(z);
        if z.im.is_zero() {
            return Err(NumError::Invalid("the straight path needs z off the real axis".into()));
        }
        let ig = Integrator::new(self.prec);
        ig.segment(&Cx::zero(self.prec), &z, Grade::Start(4), Side::Plus, PATH_TOL)
    }
}

/// ∫ρ_j over the support of level j, by graded quadrature of |Im y_{j+}|/π.
pub fn density_mass(j: usize, ctx: &PrecisionContext) -> Result<f64> {
    let p = ctx.bits();
    let ig = Integrator::new(p);
    let k = match j {
        1 | 3 => 0,
        2 => 1,
        _ => return Err(NumError::Invalid(format!("density level {j} outside 1..=3"))),
    };
    let (a, b) = branch_points_p3(p);
    let end = if k == 0 { b } else { a };
    let zero = Cx::zero(p);
    let mid = Cx::from_real(Float::with_val(p, &end / 2u32));
    let e = Cx::from_real(end);
    let l = ig.segment(&zero, &mid, Grade::Start(4), Side::Plus, PATH_TOL)?;
    let r = ig.segment(&mid, &e, Grade::End(2), Side::Plus, PATH_TOL)?;
    // the imaginary part of y_{j+} keeps one sign on each cut
    let im = Float::with_val(p, &l[k].im + &r[k].im);
    Ok(im.to_f64().abs() / pi(53).to_f64())
}
