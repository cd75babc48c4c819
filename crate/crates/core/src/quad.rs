//! Quadrature rules: Gauss rules refined in extended precision, double-exponential
//! rules, and an f64 adaptive Gauss–Kronrod integrator.

use nalgebra::{DMatrix, SymmetricEigen};
use rug::ops::Pow;
use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{fl, pi, PrecisionContext};

/// Nodes and weights in extended precision.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Monic three-term recurrence p_{k+1} = (x − a_k) p_k − b_k p_{k−1}, with b_0 = μ₀.
struct Recurrence {
    a: Vec<Float>,
    b: Vec<Float>,
}

fn jacobi_recurrence(n: usize, alpha: &Float, beta: &Float, prec: u32) -> Recurrence {
    let al = Float::with_val(prec, alpha);
    let be = Float::with_val(prec, beta);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let ab = Float::with_val(prec, &al + &be);
    for k in 0..n {
        let kf = Float::with_val(prec, k);
        let s = Float::with_val(prec, &kf * 2u32) + &ab;
        if k == 0 {
            // (β − α)/(α + β + 2)
            let num = Float::with_val(prec, &be - &al);
            a.push(num / Float::with_val(prec, &ab + 2u32));
            // μ₀ = 2^{α+β+1} Γ(α+1)Γ(β+1)/Γ(α+β+2)
            let lg = |x: Float| x.ln_abs_gamma().0;
            let l = lg(Float::with_val(prec, &al + 1u32)) + lg(Float::with_val(prec, &be + 1u32))
                - lg(Float::with_val(prec, &ab + 2u32))
                + Float::with_val(prec, &ab + 1u32) * Float::with_val(prec, 2).ln();
            b.push(l.exp());
        } else {
            let num = Float::with_val(prec, be.square_ref()) - Float::with_val(prec, al.square_ref());
            let den = Float::with_val(prec, &s * Float::with_val(prec, &s + 2u32));
            a.push(num / den);
            let t1 = Float::with_val(prec, &kf + &al);
            let t2 = Float::with_val(prec, &kf + &be);
            let t3 = Float::with_val(prec, &kf + &ab);
            let num = Float::with_val(prec, &kf * 4u32) * t1 * t2 * t3;
            let den = Float::with_val(prec, s.square_ref())
                * Float::with_val(prec, &s + 1u32)
                * Float::with_val(prec, &s - 1u32);
            b.push(num / den);
        }
    }
    Recurrence { a, b }
}

fn laguerre_recurrence(n: usize, alpha: f64, prec: u32) -> Recurrence {
    let al = fl(prec, alpha);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        a.push(Float::with_val(prec, 2 * k + 1) + &al);
        if k == 0 {
            b.push(Float::with_val(prec, &al + 1u32).gamma());
        } else {
            b.push(Float::with_val(prec, &al + k) * k as u32);
        }
    }
    Recurrence { a, b }
}

fn golub_welsch_f64(rec: &Recurrence) -> Vec<f64> {
    let n = rec.a.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rec.a[i].to_f64();
        if i + 1 < n {
            let off = rec.b[i + 1].to_f64().sqrt();
            m[(i, i + 1)] = off;
            m[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// p_n(x), p_n'(x) and Σ_{k<n} p_k(x)²/h_k for the monic family.
fn eval_recurrence(rec: &Recurrence, x: &Float, prec: u32) -> (Float, Float, Float) {
    let n = rec.a.len();
    let mut p_prev = Float::new(prec);
    let mut p = Float::with_val(prec, 1);
    let mut d_prev = Float::new(prec);
    let mut d = Float::new(prec);
    let mut h = rec.b[0].clone();
    let mut christoffel = Float::with_val(prec, p.square_ref()) / &h;
    for k in 0..n {
        let xa = Float::with_val(prec, x - &rec.a[k]);
        let bk = if k == 0 { Float::new(prec) } else { rec.b[k].clone() };
        let p_next = Float::with_val(prec, &xa * &p) - Float::with_val(prec, &bk * &p_prev);
        let d_next = Float::with_val(prec, &xa * &d) + &p - Float::with_val(prec, &bk * &d_prev);
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if k + 1 < n {
            h *= &rec.b[k + 1];
            christoffel += Float::with_val(prec, p.square_ref()) / &h;
        }
    }
    (p, d, christoffel)
}

fn gauss_from_recurrence(rec: &Recurrence, prec: u32) -> Rule {
    let wp = prec + 32;
    let guesses = golub_welsch_f64(rec);
    let mut nodes = Vec::with_capacity(guesses.len());
    let mut weights = Vec::with_capacity(guesses.len());
    for g in guesses {
        let mut x = fl(wp, g);
        for _ in 0..60 {
            let (p, d, _) = eval_recurrence(rec, &x, wp);
            let step = Float::with_val(wp, &p / &d);
            x -= &step;
            let scale = Float::with_val(wp, x.abs_ref()).max(&fl(wp, 1.0));
            if step.is_zero() || crate::gammakit::log2_float(&(step.abs() / scale)) < -(wp as f64) + 8.0 {
                break;
            }
        }
        let (_, _, c) = eval_recurrence(rec, &x, wp);
        weights.push(Float::with_val(prec, c.recip_ref()));
        nodes.push(Float::with_val(prec, &x));
    }
    Rule { nodes, weights }
}

/// Gauss–Jacobi rule for ∫_{−1}^{1} (1−x)^α (1+x)^β f(x) dx.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64, ctx: &PrecisionContext) -> Result<Rule> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(NumError::Invalid(format!("Jacobi exponents ({alpha}, {beta}) must exceed −1")));
    }
    let p = ctx.bits() + 32;
    let rec = jacobi_recurrence(n, &fl(p, alpha), &fl(p, beta), p);
    Ok(gauss_from_recurrence(&rec, ctx.bits()))
}

pub fn gauss_legendre(n: usize, ctx: &PrecisionContext) -> Rule {
    gauss_jacobi(n, 0.0, 0.0, ctx).expect("Legendre exponents are valid")
}

/// Gauss rule for ∫₀¹ t^e f(t) dt.
pub fn gauss_unit_power(n: usize, e: f64, ctx: &PrecisionContext) -> Result<Rule> {
    gauss_unit_power_exact(n, &fl(ctx.bits(), e), ctx)
}

/// [`gauss_unit_power`] for an exponent given in extended precision.
pub fn gauss_unit_power_exact(n: usize, e: &Float, ctx: &PrecisionContext) -> Result<Rule> {
    if !(*e > -1) {
        return Err(NumError::Invalid(format!("power weight exponent {} must exceed −1", e.to_f64())));
    }
    let p = ctx.bits();
    let rp = p + 32;
    let rec = jacobi_recurrence(n, &Float::new(rp), e, rp);
    let r = gauss_from_recurrence(&rec, p);
    let scale = Float::with_val(p, 2).pow(Float::with_val(p, -e) - 1u32);
    let nodes = r.nodes.iter().map(|x| Float::with_val(p, x + 1u32) / 2u32).collect();
    let weights = r.weights.iter().map(|w| Float::with_val(p, w * &scale)).collect();
    Ok(Rule { nodes, weights })
}

/// Generalized Gauss–Laguerre rule for ∫₀^∞ x^α e^{−x} f(x) dx.
pub fn gauss_laguerre(n: usize, alpha: f64, ctx: &PrecisionContext) -> Result<Rule> {
    if !(alpha > -1.0) {
        return Err(NumError::Invalid(format!("Laguerre exponent {alpha} must exceed −1")));
    }
    let rec = laguerre_recurrence(n, alpha, ctx.bits() + 32);
    Ok(gauss_from_recurrence(&rec, ctx.bits()))
}

/// Double-exponential rule for ∫₀^∞ f(t) dt with t = exp(π/2·sinh u),
/// u = kh for k in [−k_lo, k_hi].
pub fn exp_sinh(h: f64, u_lo: f64, u_hi: f64, ctx: &PrecisionContext) -> Rule {
    let p = ctx.bits();
    let k_lo = (u_lo / h).ceil() as i64;
    let k_hi = (u_hi / h).ceil() as i64;
    let half_pi = pi(p) / 2u32;
    let hf = fl(p, h);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in -k_lo..=k_hi {
        let u = Float::with_val(p, &hf * k);
        let mut s = u.clone();
        let mut c = Float::new(p);
        s.sinh_cosh_mut(&mut c);
        let t = Float::with_val(p, &half_pi * &s).exp();
        let w = Float::with_val(p, &hf * &half_pi) * &c * &t;
        nodes.push(t);
        weights.push(w);
    }
    Rule { nodes, weights }
}

/// Tanh-sinh nodes on [0, 1] with the complements 1 − x computed without cancellation.
#[derive(Debug, Clone)]
pub struct UnitTanhSinh {
    pub nodes: Vec<Float>,
    pub complements: Vec<Float>,
    pub weights: Vec<Float>,
}

pub fn tanh_sinh_unit(h: f64, u_max: f64, ctx: &PrecisionContext) -> UnitTanhSinh {
    let p = ctx.bits();
    let k_max = (u_max / h).ceil() as i64;
    let half_pi = pi(p) / 2u32;
    let hf = fl(p, h);
    let mut nodes = Vec::new();
    let mut complements = Vec::new();
    let mut weights = Vec::new();
    for k in -k_max..=k_max {
        let u = Float::with_val(p, &hf * k);
        let mut s = u.clone();
        let mut c = Float::new(p);
        s.sinh_cosh_mut(&mut c);
        let v = Float::with_val(p, &half_pi * &s);
        // x = 1/(1 + e^{−2v}), 1 − x = 1/(1 + e^{2v})
        let e2 = Float::with_val(p, &v * 2u32).exp();
        let x = Float::with_val(p, &e2 / Float::with_val(p, &e2 + 1u32));
        let xc = Float::with_val(p, Float::with_val(p, &e2 + 1u32).recip_ref());
        let ch = Float::with_val(p, v.cosh_ref());
        let w = Float::with_val(p, &hf * &half_pi) * &c / Float::with_val(p, ch.square_ref()) / 2u32;
        nodes.push(x);
        complements.push(xc);
        weights.push(w);
    }
    UnitTanhSinh { nodes, complements, weights }
}

/// Adaptive Gauss–Kronrod (7–15) on [a, b] in f64.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.000000000000000000000000000000000,
        ];
        const WK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let x = h * XK[i];
            let s = f(c - x) + f(c + x);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (v, e) = gk15(f, a, b);
        if !v.is_finite() {
            return Err(NumError::Convergence(format!("non-finite integrand on [{a}, {b}]")));
        }
        if e <= tol || depth == 0 {
            if e > tol * 1e3 && depth == 0 {
                return Err(NumError::Convergence(format!("Gauss–Kronrod error {e:e} on [{a}, {b}]")));
            }
            return Ok(v);
        }
        let m = 0.5 * (a + b);
        Ok(rec(f, a, m, 0.5 * tol, depth - 1)? + rec(f, m, b, 0.5 * tol, depth - 1)?)
    }
    rec(f, a, b, tol, max_depth)
}

/// ∫₀^∞ f via the substitution x = t/(1−t) and adaptive Gauss–Kronrod.
pub fn gauss_kronrod_half_line<F: Fn(f64) -> f64>(f: &F, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        f(x) / ((1.0 - t) * (1.0 - t))
    };
    gauss_kronrod(&g, 0.0, 1.0, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_bits(192)
    }

    fn sum(r: &Rule, f: impl Fn(&Float) -> Float) -> Float {
        let mut s = Float::new(r.nodes[0].prec());
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            s += f(x) * w;
        }
        s
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let c = ctx();
        let r = gauss_legendre(10, &c);
        // ∫ x^18 = 2/19
        let v = sum(&r, |x| Float::with_val(192, x.pow(18u32)));
        assert!((v - 2.0 / 19.0f64).abs().to_f64() < 1e-16);
        let v = sum(&r, |x| Float::with_val(192, x.pow(18u32)));
        let exact = Float::with_val(192, 2) / 19u32;
        assert!(crate::gammakit::log2_float(&Float::with_val(192, &v - &exact).abs()) < -180.0);
    }

    #[test]
    fn unit_power_rule_moments() {
        let c = ctx();
        let r = gauss_unit_power(12, -0.6, &c).unwrap();
        // ∫₀¹ t^{−0.6} t^5 dt = 1/5.4
        let v = sum(&r, |x| Float::with_val(192, x.pow(5u32)));
        let exact = Float::with_val(192, 1) / (Float::with_val(192, -0.6) + 6u32);
        assert!(Float::with_val(192, &v - &exact).abs().to_f64() < 1e-50);
    }

    #[test]
    fn laguerre_moments() {
        let c = ctx();
        let r = gauss_laguerre(15, 0.5, &c).unwrap();
        // ∫ x^{0.5} e^{−x} x^7 = Γ(8.5)
        let v = sum(&r, |x| Float::with_val(192, x.pow(7u32)));
        let exact = Float::with_val(192, 8.5).gamma();
        assert!((Float::with_val(192, &v / &exact) - 1u32).abs().to_f64() < 1e-50);
    }

    #[test]
    fn exp_sinh_algebraic_decay() {
        let c = ctx();
        let r = exp_sinh(0.05, 6.0, 5.0, &c);
        // ∫₀^∞ (1+t)^{−2.5} dt = 1/1.5
        let v = sum(&r, |t| Float::with_val(192, t + 1u32).pow(-2.5f64));
        assert!((v.to_f64() - 1.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let c = ctx();
        let r = tanh_sinh_unit(0.05, 4.0, &c);
        // ∫₀¹ (1−x)^{−0.5} dx = 2
        let mut s = Float::new(192);
        for (xc, w) in r.complements.iter().zip(&r.weights) {
            s += Float::with_val(192, xc.pow(-0.5f64)) * w;
        }
        assert!((s.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kronrod_smooth_and_half_line() {
        let v = gauss_kronrod(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 30).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = gauss_kronrod_half_line(&|x: f64| (-x).exp(), 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }
}
