//! Oscillating test functions `f_j(r) = r^{-(N-2)/2} sin((eps/2) ln r)`
//! supported on one half-period `[r_{j+1}, r_j]`, `r_j = exp(-2 pi j / eps)`.
//! They solve `-f'' - (N-1)/r f' = ((N-2)^2/4 + eps^2/4) f / r^2` there, so a
//! potential above that level makes the quadratic form negative on them.

use serde::{Deserialize, Serialize};

use super::{Pencil, Profile, RadialPencil};
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 0.35;
pub const DEFAULT_SAMPLES: usize = 4096;

/// `(r_{j+1}, r_j)`.
pub fn support(j: u32, eps: f64) -> (f64, f64) {
    let period = 2.0 * std::f64::consts::PI / eps;
    (
        (-period * (j as f64 + 1.0)).exp(),
        (-period * j as f64).exp(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyFunction {
    pub j: u32,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: u32,
    /// `ln r` nodes on the support, uniformly spaced
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub j: u32,
    pub support: (f64, f64),
    /// `J(f_j)` in log coordinates, `int f^2 r^{N-3} dr` normalization
    pub form: f64,
    /// `J / int sin^2`: average of `hardy + eps^2/4 - r^2 q`
    pub normalized: f64,
    pub residual: f64,
}

pub fn hardy_test_function(j: u32, eps: f64, n: u32, samples: usize) -> Result<HardyFunction> {
    if j == 0 || !(eps > 0.0) || n < 3 || samples < 8 {
        return Err(Error::InvalidParams(format!(
            "hardy test function needs j >= 1, eps > 0, N >= 3 (j {j}, eps {eps}, N {n})"
        )));
    }
    let (lo, hi) = support(j, eps);
    let (a, b) = (lo.ln(), hi.ln());
    let s = (0..=samples)
        .map(|k| a + (b - a) * k as f64 / samples as f64)
        .collect();
    Ok(HardyFunction { j, eps, n, s })
}

impl HardyFunction {
    fn kappa(&self) -> f64 {
        0.5 * (self.n as f64 - 2.0)
    }

    fn b(&self) -> f64 {
        0.5 * self.eps
    }

    pub fn support(&self) -> (f64, f64) {
        support(self.j, self.eps)
    }

    /// `f_j(r)`, zero outside the support.
    pub fn value(&self, r: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(r >= lo && r <= hi) {
            return 0.0;
        }
        let s = r.ln();
        (-self.kappa() * s).exp() * (self.b() * s).sin()
    }

    /// Quadratic form with weight `r^{N-1}` written in `s = ln r`, with
    /// `f = e^{-kappa s} psi`, `psi = sin(b s)`:
    /// `J = int [(psi' - kappa psi)^2 - r^2 q psi^2] ds`. Returns `J` and
    /// `J / int psi^2 ds`.
    pub fn form(&self, profile: Profile<'_>) -> Result<(f64, f64)> {
        let (k, b) = (self.kappa(), self.b());
        let mut num = Vec::with_capacity(self.s.len());
        let mut den = Vec::with_capacity(self.s.len());
        for &s in &self.s {
            let r2q = profile.scaled_potential(s.exp())?;
            let (sn, cs) = (b * s).sin_cos();
            let grad = b * cs - k * sn;
            num.push(grad * grad - r2q * sn * sn);
            den.push(sn * sn);
        }
        let h = self.s[1] - self.s[0];
        let trap = |f: &[f64]| h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]));
        let j = trap(&num);
        Ok((j, j / trap(&den)))
    }

    /// Max over interior nodes of the finite-difference residual of the
    /// radial equation, in `r`, relative to the size of the zero-order term.
    pub fn residual(&self) -> f64 {
        let n1 = self.n as f64 - 1.0;
        let lambda = self.kappa().powi(2) + 0.25 * self.eps * self.eps;
        let r: Vec<f64> = self.s.iter().map(|s| s.exp()).collect();
        let f: Vec<f64> = r.iter().map(|&x| self.value_unchecked(x)).collect();
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for k in 1..r.len() - 1 {
            let (h0, h1) = (r[k] - r[k - 1], r[k + 1] - r[k]);
            let d2 =
                2.0 * (h0 * f[k + 1] - (h0 + h1) * f[k] + h1 * f[k - 1]) / (h0 * h1 * (h0 + h1));
            let d1 = (h0 * h0 * f[k + 1] + (h1 * h1 - h0 * h0) * f[k] - h1 * h1 * f[k - 1])
                / (h0 * h1 * (h0 + h1));
            let zero_order = lambda * f[k] / (r[k] * r[k]);
            worst = worst.max((-d2 - n1 / r[k] * d1 - zero_order).abs());
            scale = scale.max(zero_order.abs());
        }
        worst / scale
    }

    fn value_unchecked(&self, r: f64) -> f64 {
        let s = r.ln();
        (-self.kappa() * s).exp() * (self.b() * s).sin()
    }

    /// Nodal values of the rescaled unknowns `f(r_k) r_k^{kappa} = sin(b ln r_k)`
    /// on an assembled operator, extended by zero off the support.
    pub fn project(&self, op: &RadialPencil) -> Vec<f64> {
        let (lo, hi) = self.support();
        op.nodes
            .iter()
            .map(|&r| {
                if r > lo && r < hi {
                    (self.b() * r.ln()).sin()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `psi^T A psi / psi^T M psi` for the projected function.
    pub fn discrete_quotient(&self, op: &RadialPencil) -> Result<f64> {
        let psi = self.project(op);
        quotient(&op.pencil, &psi)
    }

    pub fn report(&self, profile: Profile<'_>) -> Result<HardyReport> {
        let (form, normalized) = self.form(profile)?;
        Ok(HardyReport {
            j: self.j,
            support: self.support(),
            form,
            normalized,
            residual: self.residual(),
        })
    }
}

fn quotient(pencil: &Pencil, x: &[f64]) -> Result<f64> {
    let den = pencil.norm_sq(x);
    if !(den > 0.0) {
        return Err(Error::InvalidParams(
            "projected test function is zero on this grid".into(),
        ));
    }
    Ok(pencil.energy(x) / den)
}
