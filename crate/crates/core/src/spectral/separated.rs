//! The three-matrix curve when the middle exponent grows like βn: q(β), Q₀ and the
//! level densities.

use rug::Float;

use super::{Laurent, SpectralCurve};
use crate::error::{NumError, Result};
use crate::gammakit::{Cx, PrecisionContext};
use crate::linalg::RMat;

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(NumError::Domain(format!("β = {beta} must be a nonnegative real")))
    }
}

/// Coefficients (constant first) of 27(1+β)²q³ − 16(9β²+9β+4)q² + 16β²(β²+β+8)q − 64β⁴.
fn q_cubic(beta: &Float) -> [Float; 4] {
    let p = beta.prec();
    let b2 = Float::with_val(p, beta * beta);
    let one_b = Float::with_val(p, beta + 1u32);
    let c3 = Float::with_val(p, &one_b * &one_b) * 27u32;
    let c2 = -(Float::with_val(p, &b2 * 9u32) + Float::with_val(p, beta * 9u32) + 4u32) * 16u32;
    let c1 = Float::with_val(p, &b2 * 16u32) * (Float::with_val(p, &b2 + beta) + 8u32);
    let c0 = -(Float::with_val(p, &b2 * &b2) * 64u32);
    [c0, c1, c2, c3]
}

fn horner(c: &[Float], x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for a in c.iter().rev() {
        acc *= x;
        acc += a;
    }
    acc
}

/// The positive root of the cubic in q, by bisection on a bracket where the cubic changes sign.
pub fn q_of_beta(beta: f64, ctx: &PrecisionContext) -> Result<Float> {
    check_beta(beta)?;
    let p = ctx.bits() + 16;
    let c = q_cubic(&Float::with_val(p, beta));
    // the cubic is negative on (0, q) and positive beyond; q < 4 for all β
    let mut lo = Float::with_val(p, 1e-300);
    let mut hi = Float::with_val(p, 8);
    if horner(&c, &hi) <= 0 {
        return Err(NumError::Convergence(format!("no sign change of the q-cubic below 8 at β = {beta}")));
    }
    for _ in 0..(p + 64) {
        let mid = Float::with_val(p, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if horner(&c, &mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Float::with_val(ctx.bits(), &lo + &hi) / 2u32)
}

/// Root structure of Q₀: the double root and the remaining real roots.
#[derive(Debug, Clone, PartialEq)]
pub struct Q0Structure {
    pub double_root: f64,
    /// Distance between the two roots forming the double root.
    pub double_split: f64,
    pub others: Vec<f64>,
    /// Largest imaginary part over all roots.
    pub max_imag: f64,
}

/// The curve y⁴ − (z² − 2z + β²)/(2z²) y² + Q₀(z)/(16z⁴) = 0 with
/// Q₀ = z⁴ − 4z³ − 2β(β + 4)z² + 4((1 + β)²q − β²)z + β⁴.
#[derive(Debug, Clone)]
pub struct SeparatedCurve {
    pub beta: f64,
    pub q: Float,
    /// Coefficients of Q₀, constant first.
    pub q0: [Float; 5],
    prec: u32,
}

impl SeparatedCurve {
    pub fn new(beta: f64, ctx: &PrecisionContext) -> Result<SeparatedCurve> {
        let q = q_of_beta(beta, ctx)?;
        let p = ctx.bits();
        let b = Float::with_val(p, beta);
        let b2 = Float::with_val(p, &b * &b);
        let one_b = Float::with_val(p, &b + 1u32);
        let c1 = (Float::with_val(p, &one_b * &one_b) * &q - &b2) * 4u32;
        let c2 = -(Float::with_val(p, &b + 4u32) * &b) * 2u32;
        let q0 = [Float::with_val(p, &b2 * &b2), c1, c2, Float::with_val(p, -4), Float::with_val(p, 1)];
        Ok(SeparatedCurve { beta, q, q0, prec: p })
    }

    pub fn q0_at(&self, z: &Float) -> Float {
        horner(&self.q0, z)
    }

    /// The discriminant of Q₀ in z divided by the largest coefficient to the sixth power.
    pub fn q0_discriminant(&self) -> Float {
        let p = self.prec + 32;
        let c: Vec<Float> = self.q0.iter().map(|x| Float::with_val(p, x)).collect();
        let d = 4;
        let dc: Vec<Float> = (1..=d).map(|k| Float::with_val(p, &c[k] * k as u32)).collect();
        let n = 2 * d - 1;
        let mut m = RMat::zeros(n, n, p);
        for r in 0..d - 1 {
            for k in 0..=d {
                *m.get_mut(r, r + k) = c[d - k].clone();
            }
        }
        for r in 0..d {
            for k in 0..d {
                *m.get_mut(d - 1 + r, r + k) = dc[d - 1 - k].clone();
            }
        }
        let scale = c.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
        Float::with_val(self.prec, m.det() / scale.powi(2 * d as i32 - 2))
    }

    /// Roots of Q₀, grouped into the double root and the rest.
    pub fn q0_structure(&self) -> Result<Q0Structure> {
        let c: Vec<Cx> = self.q0.iter().map(|x| Cx::from_real(x.clone())).collect();
        let mut r = super::aberth(&c, self.prec + 32)?;
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                let d = r[i].dist(&r[j]);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let double = (r[best.0].re.to_f64() + r[best.1].re.to_f64()) / 2.0;
        let others = (0..r.len()).filter(|&k| k != best.0 && k != best.1).map(|k| r[k].re.to_f64()).collect();
        let max_imag = r.iter().map(|x| x.im.to_f64().abs()).fold(0.0, f64::max);
        Ok(Q0Structure { double_root: double, double_split: best.2, others, max_imag })
    }

    /// The curve as a [`SpectralCurve`] for root finding, discriminants and support scans.
    pub fn curve(&self) -> SpectralCurve {
        let p = self.prec + 32;
        let b2 = Float::with_val(p, self.beta * self.beta);
        let c2 = Laurent { lo: -2, c: vec![-Float::with_val(p, &b2 / 2u32), Float::with_val(p, 1), Float::with_val(p, -0.5)] };
        let c0 = Laurent { lo: -4, c: self.q0.iter().map(|x| Float::with_val(p, x / 16u32)).collect() };
        let zero = Laurent::zero(p);
        let one = Laurent { lo: 0, c: vec![Float::with_val(p, 1)] };
        SpectralCurve::from_coeffs(3, vec![c0, zero.clone(), c2, zero, one], self.prec)
    }

    /// ρ₁(x) for x > 0 and, through z = −x, ρ₂(x): the largest |Im y|/π over the sheets.
    pub fn density(&self, level: usize, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(NumError::Domain(format!("density argument {x} must be positive")));
        }
        let z = match level {
            1 | 3 => x,
            2 => -x,
            _ => return Err(NumError::Invalid(format!("density level {level} outside 1..=3"))),
        };
        self.curve().density(z)
    }
}
