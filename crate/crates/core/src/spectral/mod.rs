//! Radial linearized operator `L phi = -phi'' - (N-1)/r phi' - q phi`,
//! `q = p u^{p-1} - 1`, on `[delta, R]` with Dirichlet at the cutoff and
//! Neumann at `R`.
//!
//! The discretization is a conservative finite-volume form with lumped mass.
//! Unknowns are rescaled by `s_k = r_k^{-(N-2)/2}` so that the entries stay
//! O(1) near the singular point; the congruence does not change inertia.

pub mod hardy;
pub mod tridiag;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::singular::SingularSolution;
pub use tridiag::{Pencil, SymTridiag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    #[default]
    Geometric,
}

impl std::str::FromStr for GridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "geometric" => Ok(Self::Geometric),
            _ => Err(Error::InvalidParams(format!("unknown grid kind {s:?}"))),
        }
    }
}

/// `grid_size` intervals on `[lo, hi]`, endpoints included.
pub fn grid(lo: f64, hi: f64, grid_size: usize, kind: GridKind) -> Vec<f64> {
    let n = grid_size as f64;
    let mut r: Vec<f64> = (0..=grid_size)
        .map(|k| match kind {
            GridKind::Uniform => lo + (hi - lo) * k as f64 / n,
            GridKind::Geometric => (lo.ln() + (hi / lo).ln() * k as f64 / n).exp(),
        })
        .collect();
    r[0] = lo;
    r[grid_size] = hi;
    r
}

/// The profile `u` whose linearization is studied.
#[derive(Debug, Clone, Copy)]
pub enum Profile<'a> {
    Constant { u: f64, p: f64 },
    Singular(&'a SingularSolution),
}

impl Profile<'_> {
    pub fn p(&self) -> f64 {
        match self {
            Profile::Constant { p, .. } => *p,
            Profile::Singular(s) => s.params.p,
        }
    }

    /// Largest radius the profile covers.
    pub fn r_max(&self) -> f64 {
        match self {
            Profile::Constant { .. } => f64::INFINITY,
            Profile::Singular(s) => s.r_end(),
        }
    }

    /// `r^2 q(r)`.
    pub fn scaled_potential(&self, r: f64) -> Result<f64> {
        let value = match self {
            Profile::Constant { u, p } => Some(r * r * (p * u.powf(p - 1.0) - 1.0)),
            Profile::Singular(s) => s.scaled_potential(r),
        };
        value.filter(|v| v.is_finite()).ok_or(Error::Coverage {
            lo: r,
            hi: self.r_max(),
        })
    }
}

/// Everything needed to rebuild a discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenProblemSpec {
    pub n: u32,
    pub p: f64,
    pub radius: f64,
    pub cutoff: f64,
    pub grid_size: usize,
    pub grid: GridKind,
}

#[derive(Debug, Clone)]
pub struct RadialPencil {
    pub spec: EigenProblemSpec,
    /// Interior and outer nodes `r_1..r_n`; `r_0 = cutoff` carries the Dirichlet condition.
    pub nodes: Vec<f64>,
    pub pencil: Pencil,
}

pub fn assemble_operator(
    profile: Profile<'_>,
    n: u32,
    radius: f64,
    cutoff: f64,
    grid_size: usize,
    kind: GridKind,
) -> Result<RadialPencil> {
    if !(cutoff > 0.0 && radius > cutoff) || grid_size < 2 || n < 2 {
        return Err(Error::InvalidParams(format!(
            "need 0 < cutoff < R and at least 2 intervals (cutoff {cutoff}, R {radius}, {grid_size})"
        )));
    }
    if radius > profile.r_max() {
        return Err(Error::Coverage {
            lo: cutoff,
            hi: profile.r_max(),
        });
    }
    let r = grid(cutoff, radius, grid_size, kind);
    let pencil = assemble_on_nodes(profile, n, &r)?;
    Ok(RadialPencil {
        spec: EigenProblemSpec {
            n,
            p: profile.p(),
            radius,
            cutoff,
            grid_size,
            grid: kind,
        },
        nodes: r[1..].to_vec(),
        pencil,
    })
}

/// Pencil on an arbitrary increasing node set `r_0 < ... < r_m`, Dirichlet at
/// `r_0`. Dropping leading nodes gives a principal submatrix.
pub fn assemble_on_nodes(profile: Profile<'_>, n: u32, r: &[f64]) -> Result<Pencil> {
    if r.len() < 3 || !(r[0] > 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams(
            "need at least 3 increasing positive nodes".into(),
        ));
    }
    let m = r.len() - 1;
    let ln_r: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let dim = n as f64;
    let kappa = 0.5 * (dim - 2.0);

    // scaled flux weight of each interval: s_k s_{k+1} m^{N-1} / h
    let flux: Vec<f64> = (0..m)
        .map(|k| {
            let h = r[k + 1] - r[k];
            let mid = 0.5 * (r[k] + r[k + 1]);
            (-kappa * (ln_r[k] + ln_r[k + 1]) + (dim - 1.0) * mid.ln() - h.ln()).exp()
        })
        .collect();

    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m - 1);
    let mut mass = Vec::with_capacity(m);
    for k in 1..=m {
        let h_left = r[k] - r[k - 1];
        let h_right = if k < m { r[k + 1] - r[k] } else { 0.0 };
        let half = 0.5 * (h_left + h_right);
        // s_k^2 r_k^{N-1} = r_k
        let mut d = flux[k - 1] * (r[k - 1] / r[k]).powf(kappa);
        if k < m {
            d += flux[k] * (r[k + 1] / r[k]).powf(kappa);
            off.push(-flux[k]);
        }
        let r2q = profile.scaled_potential(r[k])?;
        d -= r2q * half / r[k];
        diag.push(d);
        mass.push(r[k] * half);
    }
    Pencil::new(SymTridiag::new(diag, off)?, mass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub spec: EigenProblemSpec,
    pub negative_count: usize,
    pub smallest_eigenvalues: Vec<f64>,
}

pub fn spectrum(
    profile: Profile<'_>,
    n: u32,
    radius: f64,
    cutoff: f64,
    grid_size: usize,
    kind: GridKind,
    n_eigs: usize,
) -> Result<SpectrumReport> {
    let op = assemble_operator(profile, n, radius, cutoff, grid_size, kind)?;
    Ok(SpectrumReport {
        spec: op.spec,
        negative_count: op.pencil.negative_count()?,
        smallest_eigenvalues: op.pencil.smallest_eigenvalues(n_eigs)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MorseClass {
    /// counts grow without bound as the cutoff shrinks
    Unbounded,
    /// counts level off
    Plateau,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCounts {
    pub cutoff: f64,
    /// one entry per grid size
    pub reports: Vec<SpectrumReport>,
    /// the count when it agrees across all grid sizes
    pub converged: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseScan {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub grid: GridKind,
    pub grid_sizes: Vec<usize>,
    pub rows: Vec<CutoffCounts>,
    pub class: MorseClass,
    /// what the position of p relative to the Joseph-Lundgren exponent predicts
    pub expected: MorseClass,
}

impl MorseScan {
    pub fn consistent(&self) -> bool {
        self.class == self.expected
    }

    pub fn converged_counts(&self) -> Vec<Option<usize>> {
        self.rows.iter().map(|r| r.converged).collect()
    }
}

/// Counts for every `(cutoff, grid_size)` pair, cutoffs in decreasing order.
/// A strictly increasing converged sequence is `Unbounded`, a constant one is
/// `Plateau`; anything else, including a grid disagreement, is `Inconclusive`.
pub fn morse_scan(
    sol: &SingularSolution,
    radius: f64,
    cutoffs: &[f64],
    grid_sizes: &[usize],
    kind: GridKind,
    n_eigs: usize,
) -> Result<MorseScan> {
    if cutoffs.is_empty() || grid_sizes.is_empty() {
        return Err(Error::InvalidParams("empty cutoff or grid list".into()));
    }
    let mut cutoffs = cutoffs.to_vec();
    cutoffs.sort_by(|a, b| b.total_cmp(a));
    let n = sol.params.n;
    let pairs: Vec<(usize, usize)> = (0..cutoffs.len())
        .flat_map(|i| (0..grid_sizes.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<SpectrumReport> = pairs
        .par_iter()
        .map(|&(i, j)| {
            spectrum(
                Profile::Singular(sol),
                n,
                radius,
                cutoffs[i],
                grid_sizes[j],
                kind,
                n_eigs,
            )
        })
        .collect::<Result<_>>()?;
    let rows: Vec<CutoffCounts> = results
        .chunks(grid_sizes.len())
        .zip(&cutoffs)
        .map(|(chunk, &cutoff)| {
            let first = chunk[0].negative_count;
            let converged = chunk
                .iter()
                .all(|r| r.negative_count == first)
                .then_some(first);
            CutoffCounts {
                cutoff,
                reports: chunk.to_vec(),
                converged,
            }
        })
        .collect();
    let counts: Option<Vec<usize>> = rows.iter().map(|r| r.converged).collect();
    let class = match counts {
        None => MorseClass::Inconclusive,
        Some(c) if c.len() < 2 => MorseClass::Inconclusive,
        Some(c) if c.windows(2).all(|w| w[1] > w[0]) => MorseClass::Unbounded,
        Some(c) if c.windows(2).all(|w| w[1] == w[0]) => MorseClass::Plateau,
        Some(_) => MorseClass::Inconclusive,
    };
    let expected = if sol.constants.pjl.is_above(sol.params.p) {
        MorseClass::Unbounded
    } else {
        MorseClass::Plateau
    };
    Ok(MorseScan {
        n,
        p: sol.params.p,
        radius,
        grid: kind,
        grid_sizes: grid_sizes.to_vec(),
        rows,
        class,
        expected,
    })
}

/// A test function sampled on an increasing radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

/// `int (phi'^2 - q phi^2) r^{N-1} dr / int phi^2 r^{N-1} dr`, trapezoid rule
/// with a second-order nonuniform difference for `phi'`. Returns
/// `(numerator, quotient)`.
pub fn rayleigh_quotient(
    phi: &SampledFunction,
    profile: Profile<'_>,
    n: u32,
) -> Result<(f64, f64)> {
    let (r, v) = (&phi.r, &phi.values);
    let len = r.len();
    if len < 3 || v.len() != len || r.windows(2).any(|w| !(w[1] > w[0])) || !(r[0] > 0.0) {
        return Err(Error::InvalidParams(
            "need at least 3 increasing positive sample radii".into(),
        ));
    }
    if r[len - 1] > profile.r_max() {
        return Err(Error::Coverage {
            lo: r[0],
            hi: profile.r_max(),
        });
    }
    let deriv = |k: usize| -> f64 {
        let (i0, i1, i2) = if k == 0 {
            (0, 1, 2)
        } else if k == len - 1 {
            (len - 3, len - 2, len - 1)
        } else {
            (k - 1, k, k + 1)
        };
        let (x0, x1, x2) = (r[i0], r[i1], r[i2]);
        let x = r[k];
        // derivative of the quadratic through three points
        v[i0] * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + v[i1] * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + v[i2] * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    let w = n as f64 - 1.0;
    let mut num = Vec::with_capacity(len);
    let mut den = Vec::with_capacity(len);
    for k in 0..len {
        let q = profile.scaled_potential(r[k])? / (r[k] * r[k]);
        let weight = r[k].powf(w);
        let d = deriv(k);
        num.push((d * d - q * v[k] * v[k]) * weight);
        den.push(v[k] * v[k] * weight);
    }
    let trap = |f: &[f64]| -> f64 {
        r.windows(2)
            .zip(f.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    };
    let numerator = trap(&num);
    let denominator = trap(&den);
    if !(denominator > 0.0) {
        return Err(Error::InvalidParams("test function vanishes".into()));
    }
    Ok((numerator, numerator / denominator))
}

/// Comparison of the limit of `r^2 q` at the origin with the Hardy constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    /// `p theta (N-2-theta)`
    pub limit: f64,
    /// `(N-2)^2/4`
    pub hardy: f64,
    /// `r^2 q` sampled just above the seed radius
    pub observed: f64,
    pub relative_gap: f64,
    pub above_hardy: bool,
    /// largest `eps` with `limit >= hardy + eps^2`, when above
    pub eps_above: Option<f64>,
    /// largest `eps` with `limit <= hardy (1 - eps^2)`, when below
    pub eps_below: Option<f64>,
}

pub fn potential_threshold_check(sol: &SingularSolution) -> Result<ThresholdReport> {
    let c: &DerivedConstants = &sol.constants;
    let limit = c.hardy_limit();
    let hardy = c.hardy_constant();
    let r = sol.seed_radius * (1.0 + 1e-6);
    let observed = sol.scaled_potential(r).ok_or(Error::Coverage {
        lo: r,
        hi: sol.r_end(),
    })?;
    let above = limit > hardy;
    Ok(ThresholdReport {
        n: sol.params.n,
        p: sol.params.p,
        limit,
        hardy,
        observed,
        relative_gap: (observed - limit).abs() / limit,
        above_hardy: above,
        eps_above: above.then(|| (limit - hardy).sqrt()),
        eps_below: (!above).then(|| (1.0 - limit / hardy).sqrt()),
    })
}
