//! Dense extended-precision linear algebra for small real and complex matrices.

use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{log2_float, Cx};

/// Row-major real matrix.
#[derive(Debug, Clone)]
pub struct RMat {
    pub n: usize,
    pub m: usize,
    pub data: Vec<Float>,
}

impl RMat {
    pub fn zeros(n: usize, m: usize, prec: u32) -> RMat {
        RMat { n, m, data: vec![Float::new(prec); n * m] }
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> Float) -> RMat {
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                data.push(f(i, j));
            }
        }
        RMat { n, m, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.data[i * self.m + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[i * self.m + j]
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(64, |x| x.prec())
    }

    pub fn mul(&self, o: &RMat) -> RMat {
        assert_eq!(self.m, o.n);
        let p = self.prec();
        RMat::from_fn(self.n, o.m, |i, j| {
            let mut s = Float::new(p);
            for k in 0..self.m {
                s += Float::with_val(p, self.get(i, k) * o.get(k, j));
            }
            s
        })
    }

    pub fn mul_vec(&self, v: &[Float]) -> Vec<Float> {
        let p = self.prec();
        (0..self.n)
            .map(|i| {
                let mut s = Float::new(p);
                for k in 0..self.m {
                    s += Float::with_val(p, self.get(i, k) * &v[k]);
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> RMat {
        RMat::from_fn(self.m, self.n, |i, j| self.get(j, i).clone())
    }
}

impl RMat {
    /// Determinant of a square matrix by elimination with partial pivoting.
    pub fn det(&self) -> Float {
        let n = self.n;
        let p = self.prec();
        let mut a = self.clone();
        let mut det = Float::with_val(p, 1);
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| log2_float(&a.get(i, k).clone().abs()).total_cmp(&log2_float(&a.get(j, k).clone().abs())))
                .unwrap();
            if a.get(piv, k).is_zero() {
                return Float::new(p);
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            det *= a.get(k, k);
            for i in k + 1..n {
                let f = Float::with_val(p, a.get(i, k) / a.get(k, k));
                for j in k..n {
                    let t = Float::with_val(p, &f * a.get(k, j));
                    *a.get_mut(i, j) -= t;
                }
            }
        }
        det
    }
}

/// Doolittle LU without pivoting. Returns the unit-lower L and upper U factors.
pub fn lu_nopivot(a: &RMat) -> Result<(RMat, RMat)> {
    let n = a.n;
    let p = a.prec();
    let mut l = RMat::zeros(n, n, p);
    let mut u = a.clone();
    for k in 0..n {
        *l.get_mut(k, k) = Float::with_val(p, 1);
        if u.get(k, k).is_zero() {
            return Err(NumError::Singular(format!("zero pivot at {k} in unpivoted LU")));
        }
        for i in k + 1..n {
            let f = Float::with_val(p, u.get(i, k) / u.get(k, k));
            for j in k..n {
                let t = Float::with_val(p, &f * u.get(k, j));
                *u.get_mut(i, j) -= t;
            }
            *l.get_mut(i, k) = f;
        }
    }
    Ok((l, u))
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve(a: &RMat, b: &[Float]) -> Result<Vec<Float>> {
    let n = a.n;
    let p = a.prec();
    let mut m = a.clone();
    let mut x: Vec<Float> = b.iter().map(|v| Float::with_val(p, v)).collect();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| log2_float(&m.get(i, k).clone().abs()).total_cmp(&log2_float(&m.get(j, k).clone().abs())))
            .unwrap();
        if m.get(piv, k).is_zero() {
            return Err(NumError::Singular(format!("singular matrix at column {k}")));
        }
        if piv != k {
            for j in 0..n {
                m.data.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = Float::with_val(p, m.get(i, k) / m.get(k, k));
            for j in k..n {
                let t = Float::with_val(p, &f * m.get(k, j));
                *m.get_mut(i, j) -= t;
            }
            let t = Float::with_val(p, &f * &x[k]);
            x[i] -= t;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k].clone();
        for j in k + 1..n {
            s -= Float::with_val(p, m.get(k, j) * &x[j]);
        }
        x[k] = s / m.get(k, k);
    }
    Ok(x)
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Cx>,
}

impl CMat {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Cx) -> CMat {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMat { n, data }
    }

    pub fn identity(n: usize, prec: u32) -> CMat {
        CMat::from_fn(n, |i, j| if i == j { Cx::one(prec) } else { Cx::zero(prec) })
    }

    pub fn get(&self, i: usize, j: usize) -> &Cx {
        &self.data[i * self.n + j]
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(64, |x| x.prec())
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        let p = self.prec();
        CMat::from_fn(self.n, |i, j| {
            let mut s = Cx::zero(p);
            for k in 0..self.n {
                s += self.get(i, k) * o.get(k, j);
            }
            s
        })
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(i, j) - o.get(i, j))
    }

    /// Largest entry modulus, as f64.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.abs().to_f64()).fold(0.0, f64::max)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMat> {
        let n = self.n;
        let p = self.prec();
        let mut a = self.data.clone();
        let mut inv = CMat::identity(n, p).data;
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].log2_abs().total_cmp(&a[j * n + k].log2_abs()))
                .unwrap();
            if a[piv * n + k].is_zero() {
                return Err(NumError::Singular(format!("singular complex matrix at column {k}")));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                    inv.swap(k * n + j, piv * n + j);
                }
            }
            let d = a[k * n + k].recip();
            for j in 0..n {
                a[k * n + j] = &a[k * n + j] * &d;
                inv[k * n + j] = &inv[k * n + j] * &d;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i * n + k].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = &f * &a[k * n + j];
                    a[i * n + j] -= &t;
                    let t = &f * &inv[k * n + j];
                    inv[i * n + j] -= &t;
                }
            }
        }
        Ok(CMat { n, data: inv })
    }

    /// Determinant by elimination with partial pivoting.
    pub fn det(&self) -> Cx {
        let n = self.n;
        let p = self.prec();
        let mut a = self.data.clone();
        let mut det = Cx::one(p);
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].log2_abs().total_cmp(&a[j * n + k].log2_abs()))
                .unwrap();
            if a[piv * n + k].is_zero() {
                return Cx::zero(p);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            det = &det * &a[k * n + k];
            let d = a[k * n + k].recip();
            for i in k + 1..n {
                let f = &a[i * n + k] * &d;
                for j in k..n {
                    let t = &f * &a[k * n + j];
                    a[i * n + j] -= &t;
                }
            }
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_and_solve_hilbert() {
        let p = 256;
        let a = RMat::from_fn(6, 6, |i, j| Float::with_val(p, 1) / (i + j + 1) as u32);
        let (l, u) = lu_nopivot(&a).unwrap();
        let r = l.mul(&u);
        for (x, y) in r.data.iter().zip(&a.data) {
            assert!(Float::with_val(p, x - y).abs().to_f64() < 1e-60);
        }
        let b: Vec<Float> = (0..6).map(|i| Float::with_val(p, i + 1)).collect();
        let x = solve(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        for (x, y) in ax.iter().zip(&b) {
            assert!(Float::with_val(p, x - y).abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn complex_inverse_and_det() {
        let p = 192;
        let m = CMat::from_fn(4, |i, j| Cx::new(p, (i * 3 + j) as f64 % 5.0 + 0.5, (i as f64) - (j as f64) * 0.3));
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!(id.sub(&CMat::identity(4, p)).max_abs() < 1e-50);
        let d = m.det();
        let di = inv.det();
        assert!((&d * &di).dist(&Cx::one(p)) < 1e-50);
    }
}
