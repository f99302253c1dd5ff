//! Symmetric tridiagonal pencils `A x = lambda M x` with diagonal `M > 0`:
//! inertia by LDL^T pivots and eigenvalues by Sturm bisection.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParams(format!(
                "tridiagonal sizes {} / {} do not match",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// A symmetric tridiagonal stiffness matrix with a lumped (diagonal) mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub stiffness: SymTridiag,
    pub mass: Vec<f64>,
}

pub const MAX_SHIFT_RETRIES: usize = 3;

impl Pencil {
    pub fn new(stiffness: SymTridiag, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != stiffness.len() || mass.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidParams(
                "mass must be positive and match the stiffness size".into(),
            ));
        }
        Ok(Self { stiffness, mass })
    }

    /// Standard eigenproblem `A x = lambda x`.
    pub fn standard(a: SymTridiag) -> Self {
        let mass = vec![1.0; a.len()];
        Self { stiffness: a, mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Gershgorin interval of `M^{-1/2} A M^{-1/2}`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let a = &self.stiffness;
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let mut radius = 0.0;
            if k > 0 {
                radius += a.off[k - 1].abs() / (self.mass[k] * self.mass[k - 1]).sqrt();
            }
            if k + 1 < n {
                radius += a.off[k].abs() / (self.mass[k] * self.mass[k + 1]).sqrt();
            }
            let centre = a.diag[k] / self.mass[k];
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    fn pivots_below(&self, sigma: f64) -> Option<usize> {
        let a = &self.stiffness;
        let mut count = 0;
        let mut d = 0.0;
        for k in 0..self.len() {
            let shifted = a.diag[k] - sigma * self.mass[k];
            d = if k == 0 {
                shifted
            } else {
                shifted - a.off[k - 1] * a.off[k - 1] / d
            };
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        Some(count)
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of
    /// `A - sigma M`). A zero pivot nudges the shift by `1e-12` of the
    /// spectral scale, at most `MAX_SHIFT_RETRIES` times.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        if let Some(c) = self.pivots_below(sigma) {
            return Ok(c);
        }
        let step = 1e-12 * self.scale().max(sigma.abs());
        for attempt in 1..=MAX_SHIFT_RETRIES {
            let shifted = sigma - step * attempt as f64;
            if let Some(c) = self.pivots_below(shifted) {
                log::debug!("inertia pivot breakdown at {sigma}; shifted to {shifted}");
                return Ok(c);
            }
        }
        Err(Error::InertiaBreakdown(MAX_SHIFT_RETRIES))
    }

    pub fn negative_count(&self) -> Result<usize> {
        self.count_below(0.0)
    }

    /// The `k` smallest eigenvalues by bisection on the inertia count.
    pub fn smallest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let k = k.min(self.len());
        let (lo0, hi0) = self.spectral_bounds();
        let pad = 1e-9 * self.scale();
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let (mut lo, mut hi) = (lo0 - pad, hi0 + pad);
            if let Some(&prev) = out.last() {
                lo = prev - pad;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if self.count_below(mid)? > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// `x^T A x`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let a = &self.stiffness;
        let mut s = 0.0;
        for k in 0..self.len() {
            s += a.diag[k] * x[k] * x[k];
            if k + 1 < self.len() {
                s += 2.0 * a.off[k] * x[k] * x[k + 1];
            }
        }
        s
    }

    /// `x^T M x`.
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mass).map(|(v, m)| m * v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let pencil = Pencil::standard(laplacian(n));
        let eig = pencil.smallest_eigenvalues(3).unwrap();
        for (j, e) in eig.iter().enumerate() {
            let x = (j as f64 + 1.0) * std::f64::consts::PI / (2.0 * (n as f64 + 1.0));
            assert_relative_eq!(*e, 4.0 * x.sin().powi(2), max_relative = 1e-12);
        }
        assert_eq!(pencil.negative_count().unwrap(), 0);
        assert_eq!(pencil.count_below(5.0).unwrap(), n);
    }

    #[test]
    fn single_node_pencil() {
        let c = 3.5;
        let m = 0.25;
        let pencil = Pencil::new(SymTridiag::new(vec![-c * m], vec![]).unwrap(), vec![m]).unwrap();
        assert_relative_eq!(
            pencil.smallest_eigenvalues(1).unwrap()[0],
            -c,
            max_relative = 1e-14
        );
        assert_eq!(pencil.negative_count().unwrap(), 1);
    }

    #[test]
    fn zero_pivot_is_shifted() {
        // eigenvalues 0 and 2; the first pivot at sigma = 0 is exactly zero
        let pencil = Pencil::standard(SymTridiag::new(vec![1.0, 1.0], vec![-1.0]).unwrap());
        assert_eq!(pencil.count_below(0.0).unwrap(), 0);
        assert_eq!(pencil.count_below(1.0).unwrap(), 1);
    }

    #[test]
    fn generalized_scaling_invariance() {
        let a = laplacian(20);
        let mass: Vec<f64> = (0..20).map(|k| 1.0 + k as f64).collect();
        let pencil = Pencil::new(a.clone(), mass.clone()).unwrap();
        let ev = pencil.smallest_eigenvalues(2).unwrap();
        // congruence by a positive diagonal leaves the pencil spectrum alone
        let s: Vec<f64> = (0..20).map(|k| 0.5 + 0.1 * k as f64).collect();
        let diag = (0..20).map(|k| a.diag[k] * s[k] * s[k]).collect();
        let off = (0..19).map(|k| a.off[k] * s[k] * s[k + 1]).collect();
        let m2 = (0..20).map(|k| mass[k] * s[k] * s[k]).collect();
        let scaled = Pencil::new(SymTridiag::new(diag, off).unwrap(), m2).unwrap();
        let ev2 = scaled.smallest_eigenvalues(2).unwrap();
        assert_relative_eq!(ev[0], ev2[0], max_relative = 1e-10);
        assert_relative_eq!(ev[1], ev2[1], max_relative = 1e-10);
    }

    #[test]
    fn shape_validation() {
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(Pencil::new(laplacian(3), vec![1.0, 0.0, 1.0]).is_err());
    }
}
