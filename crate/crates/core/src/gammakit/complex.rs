use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

/// Real constant at the given precision.
pub fn fl(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Extended-precision complex number.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} {:+e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cx {
    pub fn new(prec: u32, re: f64, im: f64) -> Cx {
        Cx { re: fl(prec, re), im: fl(prec, im) }
    }

    pub fn from_real(re: Float) -> Cx {
        let im = Float::new(re.prec());
        Cx { re, im }
    }

    pub fn from_parts(re: Float, im: Float) -> Cx {
        Cx { re, im }
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Cx {
        Cx::new(prec, z.re, z.im)
    }

    pub fn zero(prec: u32) -> Cx {
        Cx::new(prec, 0.0, 0.0)
    }

    pub fn one(prec: u32) -> Cx {
        Cx::new(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Cx {
        Cx::new(prec, 0.0, 1.0)
    }

    /// r·e^{iθ}.
    pub fn polar(r: &Float, theta: &Float) -> Cx {
        let prec = r.prec().max(theta.prec());
        let mut s = Float::with_val(prec, theta);
        let mut c = Float::new(prec);
        s.sin_cos_mut(&mut c);
        Cx { re: c * r, im: s * r }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Cx {
        Cx { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Cx {
        Cx { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    /// log2 |z| as f64, finite even when the value leaves the f64 range.
    pub fn log2_abs(&self) -> f64 {
        log2_float(&self.abs())
    }

    pub fn scale(&self, x: &Float) -> Cx {
        Cx { re: Float::with_val(self.prec(), &self.re * x), im: Float::with_val(self.prec(), &self.im * x) }
    }

    pub fn scale_f64(&self, x: f64) -> Cx {
        Cx { re: Float::with_val(self.prec(), &self.re * x), im: Float::with_val(self.prec(), &self.im * x) }
    }

    pub fn mul_i(&self) -> Cx {
        Cx { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn recip(&self) -> Cx {
        let n = self.norm_sqr();
        Cx {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: Float::with_val(self.prec(), -&self.im) / &n,
        }
    }

    pub fn square(&self) -> Cx {
        self * self
    }

    pub fn exp(&self) -> Cx {
        let r = Float::with_val(self.prec(), self.re.exp_ref());
        Cx::polar(&r, &self.im)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Cx {
        let p = self.prec();
        let r = self.abs();
        Cx { re: Float::with_val(p, r.ln_ref()), im: self.arg() }
    }

    pub fn sqrt(&self) -> Cx {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prec();
        let r = self.abs();
        // sqrt((r + |re|)/2) computed without cancellation
        let t = Float::with_val(p, (r + Float::with_val(p, self.re.abs_ref())) / 2u32).sqrt();
        if self.re >= 0 {
            let im = Float::with_val(p, &self.im / &t) / 2u32;
            Cx { re: t, im }
        } else {
            let re = Float::with_val(p, self.im.abs_ref()) / &t / 2u32;
            let im = if self.im < 0 { -t } else { t };
            Cx { re, im }
        }
    }

    /// Principal power z^w = exp(w Log z).
    pub fn powc(&self, w: &Cx) -> Cx {
        if self.is_zero() {
            return Cx::zero(self.prec());
        }
        (w * &self.ln()).exp()
    }

    pub fn powf(&self, w: f64) -> Cx {
        if self.is_zero() {
            return Cx::zero(self.prec());
        }
        self.ln().scale_f64(w).exp()
    }

    pub fn powi(&self, n: i32) -> Cx {
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Cx::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    pub fn sin(&self) -> Cx {
        let p = self.prec();
        let mut s = self.re.clone();
        let mut c = Float::new(p);
        s.sin_cos_mut(&mut c);
        let mut sh = self.im.clone();
        let mut ch = Float::new(p);
        sh.sinh_cosh_mut(&mut ch);
        Cx { re: s * ch, im: c * sh }
    }

    pub fn cos(&self) -> Cx {
        let p = self.prec();
        let mut s = self.re.clone();
        let mut c = Float::new(p);
        s.sin_cos_mut(&mut c);
        let mut sh = self.im.clone();
        let mut ch = Float::new(p);
        sh.sinh_cosh_mut(&mut ch);
        Cx { re: c * ch, im: -(s * sh) }
    }

    /// Distance |z − w| as f64.
    pub fn dist(&self, w: &Cx) -> f64 {
        (self - w).abs().to_f64()
    }
}

/// log2 of a positive float without leaving the f64 range.
pub fn log2_float(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if !x.is_finite() {
        return f64::INFINITY;
    }
    let e = x.get_exp().unwrap_or(0);
    let m = Float::with_val(53, x.abs_ref()) >> e;
    m.to_f64().log2() + e as f64
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Cx> for &'a Cx {
            type Output = Cx;
            fn $f(self, rhs: &'b Cx) -> Cx {
                let g: fn(&Cx, &Cx) -> Cx = $body;
                g(self, rhs)
            }
        }
        impl $tr<Cx> for Cx {
            type Output = Cx;
            fn $f(self, rhs: Cx) -> Cx {
                (&self).$f(&rhs)
            }
        }
        impl<'b> $tr<&'b Cx> for Cx {
            type Output = Cx;
            fn $f(self, rhs: &'b Cx) -> Cx {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<Cx> for &'a Cx {
            type Output = Cx;
            fn $f(self, rhs: Cx) -> Cx {
                self.$f(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let p = a.prec();
    Cx { re: Float::with_val(p, &a.re + &b.re), im: Float::with_val(p, &a.im + &b.im) }
});
binop!(Sub, sub, |a, b| {
    let p = a.prec();
    Cx { re: Float::with_val(p, &a.re - &b.re), im: Float::with_val(p, &a.im - &b.im) }
});
binop!(Mul, mul, |a, b| {
    let p = a.prec();
    let re = Float::with_val(p, &a.re * &b.re) - Float::with_val(p, &a.im * &b.im);
    let im = Float::with_val(p, &a.re * &b.im) + Float::with_val(p, &a.im * &b.re);
    Cx { re, im }
});
binop!(Div, div, |a, b| {
    let p = a.prec();
    let n = b.norm_sqr();
    let re = Float::with_val(p, &a.re * &b.re) + Float::with_val(p, &a.im * &b.im);
    let im = Float::with_val(p, &a.im * &b.re) - Float::with_val(p, &a.re * &b.im);
    Cx { re: re / &n, im: im / &n }
});

impl AddAssign<&Cx> for Cx {
    fn add_assign(&mut self, rhs: &Cx) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign<Cx> for Cx {
    fn add_assign(&mut self, rhs: Cx) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl SubAssign<&Cx> for Cx {
    fn sub_assign(&mut self, rhs: &Cx) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Cx> for Cx {
    fn mul_assign(&mut self, rhs: &Cx) {
        *self = &*self * rhs;
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: -self.re, im: -self.im }
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_roundtrip() {
        let a = Cx::new(128, 1.5, -2.0);
        let b = Cx::new(128, -0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!(q.dist(&a) < 1e-35);
        let s = &(&a + &b) - &b;
        assert!(s.dist(&a) < 1e-35);
    }

    #[test]
    fn exp_ln_inverse() {
        let z = Cx::new(192, -0.7, 2.9);
        assert!(z.ln().exp().dist(&z) < 1e-50);
        let w = Cx::new(192, 0.3, -0.4);
        let r = z.powc(&w);
        let direct = (&w * &z.ln()).exp();
        assert!(r.dist(&direct) < 1e-50);
    }

    #[test]
    fn sqrt_branches() {
        for (re, im) in [(4.0, 0.0), (-4.0, 1e-30), (-4.0, -1e-30), (0.0, 2.0), (-3.0, -4.0)] {
            let z = Cx::new(128, re, im);
            let s = z.sqrt();
            assert!(s.square().dist(&z) < 1e-30);
            assert!(s.re >= 0);
        }
    }

    #[test]
    fn trig_identity() {
        let z = Cx::new(128, 0.4, 1.3);
        let s = z.sin();
        let c = z.cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!(one.dist(&Cx::one(128)) < 1e-35);
    }

    #[test]
    fn powi_matches_powf() {
        let z = Cx::new(128, 0.9, 0.2);
        assert!(z.powi(-3).dist(&z.powf(-3.0)) < 1e-30);
    }

    #[test]
    fn log2_of_huge_float() {
        let x = Float::with_val(64, 1) << 5000u32;
        assert!((log2_float(&x) - 5000.0).abs() < 1e-9);
    }
}
