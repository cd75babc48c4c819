//! The 𝕂/𝕄 kernel family at finite n and the correlation determinants built from it.

use std::sync::Arc;

use rayon::prelude::*;
use rug::Float;

use super::BiorthogonalSystem;
use crate::error::{NumError, Result};
use crate::linalg::RMat;

/// Ψ/Φ chain transforms of the first n polynomials, tabulated on the chain grid.
#[derive(Debug, Clone)]
pub struct FiniteKernelSet {
    pub sys: Arc<BiorthogonalSystem>,
    pub n: usize,
    /// psi_tab[ℓ − 2][k]: the density whose Cauchy transform is Ψ_{ℓk} without its weight.
    psi_tab: Vec<Vec<Vec<Float>>>,
    /// phi_tab[ℓ − 1][k]: the same for Φ_{ℓk}, ℓ < p.
    phi_tab: Vec<Vec<Vec<Float>>>,
}

/// Tables for the kernels with n terms, 1 ≤ n ≤ nmax + 1.
pub fn finite_kernels(sys: Arc<BiorthogonalSystem>, n: usize) -> Result<FiniteKernelSet> {
    if n == 0 || n > sys.nmax + 1 {
        return Err(NumError::Invalid(format!("kernel size n = {n} outside 1..={}", sys.nmax + 1)));
    }
    let p = sys.pot.p();
    let grid = &sys.grid;
    let prec = sys.prec();
    let build = |k: usize| {
        let mut psi_levels = Vec::with_capacity(p - 1);
        let mut v: Vec<Float> = grid
            .nodes
            .iter()
            .zip(grid.level_weights(1))
            .map(|(x, w)| Float::with_val(prec, sys.psi(k, x) * w))
            .collect();
        psi_levels.push(v.clone());
        for l in 2..p {
            v = grid.couple(&v, l);
            psi_levels.push(v.clone());
        }
        let mut phi_levels = vec![Vec::new(); p - 1];
        let mut u: Vec<Float> = grid
            .nodes
            .iter()
            .zip(grid.level_weights(p))
            .map(|(x, w)| Float::with_val(prec, sys.phi(k, x) * w))
            .collect();
        phi_levels[p - 2] = u.clone();
        for l in (1..p - 1).rev() {
            u = grid.couple(&u, l + 1);
            phi_levels[l - 1] = u.clone();
        }
        (psi_levels, phi_levels)
    };
    let per_k: Vec<_> = (0..n).into_par_iter().map(build).collect();
    let mut psi_tab = vec![Vec::with_capacity(n); p - 1];
    let mut phi_tab = vec![Vec::with_capacity(n); p - 1];
    for (ps, ph) in per_k {
        for (l, v) in ps.into_iter().enumerate() {
            psi_tab[l].push(v);
        }
        for (l, u) in ph.into_iter().enumerate() {
            phi_tab[l].push(u);
        }
    }
    Ok(FiniteKernelSet { sys, n, psi_tab, phi_tab })
}

fn check_point(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(NumError::Domain(format!("kernel argument {x} must be positive")))
    }
}

impl FiniteKernelSet {
    pub fn p(&self) -> usize {
        self.sys.pot.p()
    }

    fn prec(&self) -> u32 {
        self.sys.prec()
    }

    fn check_level(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.p() {
            return Err(NumError::Invalid(format!("level {l} outside 1..={}", self.p())));
        }
        Ok(())
    }

    fn check_resolved(&self, x: &Float) -> Result<()> {
        // below the grid the transforms lose their quadrature accuracy
        if *x < Float::with_val(self.prec(), self.sys.grid.smallest() * 1e6f64) {
            return Err(NumError::Precision(format!("point {} lies below the resolved range of the chain grid", x.to_f64())));
        }
        Ok(())
    }

    /// Ψ_{ℓk}(x) without the factor e^{−U_ℓ(x)/2}, with an error estimate.
    fn psi_bare(&self, l: usize, k: usize, x: &Float) -> (Float, Float) {
        if l == 1 {
            (self.sys.psi(k, x), Float::new(self.prec()))
        } else {
            self.sys.grid.transform(&self.psi_tab[l - 2][k], x)
        }
    }

    /// Φ_{ℓk}(x) without the factor e^{−U_ℓ(x)/2}, with an error estimate.
    fn phi_bare(&self, l: usize, k: usize, x: &Float) -> (Float, Float) {
        if l == self.p() {
            (self.sys.phi(k, x), Float::new(self.prec()))
        } else {
            self.sys.grid.transform(&self.phi_tab[l - 1][k], x)
        }
    }

    fn half_weight(&self, l: usize, x: &Float) -> Float {
        (-self.sys.pot.u(l, x) / 2u32).exp()
    }

    /// Ψ_{ℓk}(x) = e^{−U_ℓ(x)/2} times the (ℓ − 1)-fold chain transform of ψ_k.
    pub fn psi_level(&self, l: usize, k: usize, x: f64) -> Result<Float> {
        self.check_level(l)?;
        check_point(x)?;
        let xf = Float::with_val(self.prec(), x);
        Ok(self.psi_bare(l, k, &xf).0 * self.half_weight(l, &xf))
    }

    /// Φ_{ℓk}(x) = e^{−U_ℓ(x)/2} times the (p − ℓ)-fold chain transform of φ_k.
    pub fn phi_level(&self, l: usize, k: usize, x: f64) -> Result<Float> {
        self.check_level(l)?;
        check_point(x)?;
        let xf = Float::with_val(self.prec(), x);
        Ok(self.phi_bare(l, k, &xf).0 * self.half_weight(l, &xf))
    }

    /// The subtracted chain term of 𝕄_{ij}: zero for i ≥ j, 1/(x + y) for j = i + 1, otherwise
    /// the Cauchy couplings through levels i + 1, …, j − 1.
    fn e_bare(&self, i: usize, j: usize, x: &Float, y: &Float) -> (Float, Float) {
        let prec = self.prec();
        if i >= j {
            return (Float::new(prec), Float::new(prec));
        }
        if j == i + 1 {
            return (Float::with_val(prec, x + y).recip(), Float::new(prec));
        }
        let grid = &self.sys.grid;
        let mut e: Vec<Float> = grid
            .nodes
            .iter()
            .zip(grid.level_weights(i + 1))
            .map(|(z, w)| Float::with_val(prec, w / Float::with_val(prec, x + z)))
            .collect();
        for l in i + 2..j {
            e = grid.couple(&e, l);
        }
        grid.transform(&e, y)
    }

    /// 𝕄_{ij}(x, y) with an absolute error estimate from the step-doubled rule.
    pub fn m_kernel_with_error(&self, i: usize, j: usize, x: f64, y: f64) -> Result<(Float, f64)> {
        self.check_level(i)?;
        self.check_level(j)?;
        check_point(x)?;
        check_point(y)?;
        let prec = self.prec();
        let xf = Float::with_val(prec, x);
        let yf = Float::with_val(prec, y);
        if i < self.p() {
            self.check_resolved(&xf)?;
        }
        if j > 1 {
            self.check_resolved(&yf)?;
        }
        let mut sum = Float::new(prec);
        let mut err = Float::new(prec);
        for k in 0..self.n {
            let (a, ea) = self.phi_bare(i, k, &xf);
            let (b, eb) = self.psi_bare(j, k, &yf);
            let h = &self.sys.norms[k];
            let t = Float::with_val(prec, &a * &b) / h;
            let et = (Float::with_val(prec, &ea * b.abs()) + Float::with_val(prec, &eb * a.abs())) / h;
            sum += t;
            err += et;
        }
        let (e, ee) = self.e_bare(i, j, &xf, &yf);
        sum -= e;
        err += ee;
        Ok((sum, err.to_f64()))
    }

    /// 𝕄_{ij}(x, y).
    pub fn m_kernel(&self, i: usize, j: usize, x: f64, y: f64) -> Result<Float> {
        Ok(self.m_kernel_with_error(i, j, x, y)?.0)
    }

    /// 𝕂_{ij}(x, y) = e^{−U_i(x)/2 − U_j(y)/2} 𝕄_{ij}(x, y).
    pub fn k_kernel(&self, i: usize, j: usize, x: f64, y: f64) -> Result<Float> {
        let m = self.m_kernel(i, j, x, y)?;
        let prec = self.prec();
        let g = self.half_weight(i, &Float::with_val(prec, x)) * self.half_weight(j, &Float::with_val(prec, y));
        Ok(m * g)
    }

    /// 𝕂_{ij} on a list of points, evaluated in parallel.
    pub fn k_kernel_grid(&self, i: usize, j: usize, points: &[(f64, f64)]) -> Vec<Result<Float>> {
        points.par_iter().map(|&(x, y)| self.k_kernel(i, j, x, y)).collect()
    }

    /// e^{−U_j(x)}.
    pub fn weight(&self, j: usize, x: f64) -> Float {
        self.sys.pot.weight(j, &Float::with_val(self.prec(), x))
    }
}

fn block_matrix(
    levels: &[usize],
    points: &[f64],
    f: impl Fn(usize, usize, f64, f64) -> Result<Float> + Sync,
    prec: u32,
) -> Result<RMat> {
    if levels.len() != points.len() {
        return Err(NumError::Invalid(format!("{} levels for {} points", levels.len(), points.len())));
    }
    let n = levels.len();
    let entries: Vec<Result<Float>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (r, s) = (idx / n, idx % n);
            f(levels[r], levels[s], points[r], points[s])
        })
        .collect();
    let mut m = RMat::zeros(n, n, prec);
    for (slot, e) in m.data.iter_mut().zip(entries) {
        *slot = e?;
    }
    Ok(m)
}

/// det[𝕂_{ℓ_r ℓ_s}(x_r, x_s)]: the correlation function of the points x_r observed at levels ℓ_r.
pub fn correlation_density(levels: &[usize], points: &[f64], ks: &FiniteKernelSet) -> Result<Float> {
    let m = block_matrix(levels, points, |i, j, x, y| ks.k_kernel(i, j, x, y), ks.prec())?;
    Ok(m.det())
}

/// The same correlation function as Π e^{−U_{ℓ_r}(x_r)} · det[𝕄_{ℓ_r ℓ_s}(x_r, x_s)].
pub fn correlation_density_reduced(levels: &[usize], points: &[f64], ks: &FiniteKernelSet) -> Result<Float> {
    let m = block_matrix(levels, points, |i, j, x, y| ks.m_kernel(i, j, x, y), ks.prec())?;
    let mut w = m.det();
    for (&l, &x) in levels.iter().zip(points) {
        w *= ks.weight(l, x);
    }
    Ok(w)
}
