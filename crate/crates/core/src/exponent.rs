//! Exponents `p^i` at which the `i`-th critical radius of the singular
//! solution equals a prescribed ball radius, and the continuity scan of
//! `p -> R_p^i`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::Tolerances;
use crate::params::{ProblemParams, DEFAULT_P_CAP};
use crate::singular::{solve_singular, solve_to_critical, SingularOptions, R_END_CAP_FACTOR};

/// Relative width of the final `p` bracket.
pub const P_BRACKET_RTOL: f64 = 1e-11;
/// Acceptance threshold on `|R_p^i - R| / R`.
pub const RESIDUAL_RTOL: f64 = 1e-6;

/// Smallest `i` with `R_p^i > R` for the given exponent.
pub fn find_istar(params: &ProblemParams, radius: f64, tol: Tolerances) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!(
            "R = {radius} must be positive"
        )));
    }
    let opts = SingularOptions::with_tol(tol);
    let mut r_end = 2.0 * radius;
    let cap = 2.0 * radius * R_END_CAP_FACTOR;
    while r_end <= cap {
        let sol = solve_singular(params, r_end, &opts)?;
        if let Some(k) = sol.critical_radii.radii.iter().position(|&r| r > radius) {
            return Ok(k + 1);
        }
        r_end *= 2.0;
    }
    Err(Error::CriticalPointMissing { i: 0, r_cap: cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSolution {
    pub i: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub n: u32,
    pub p_i: f64,
    /// `|R_{p_i}^i - R|`.
    pub residual: f64,
    /// Unit crossings of the singular solution on `(0, R]`.
    pub crossings: usize,
    /// `U'(R)` from the dense output.
    pub du_at_radius: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

struct RadiusMap {
    n: u32,
    i: usize,
    radius: f64,
    opts: SingularOptions,
    evaluations: usize,
}

impl RadiusMap {
    fn eval(&mut self, p: f64) -> Result<f64> {
        self.evaluations += 1;
        let params = ProblemParams::new(self.n, p)?;
        let sol = solve_to_critical(&params, self.i, self.radius, &self.opts)?;
        Ok(sol.critical_radius(self.i).unwrap())
    }
}

/// Bracket `p -> R_p^i - R` by doubling `p` from `p_lo`, then bisect.
pub fn find_exponent(
    i: usize,
    radius: f64,
    n: u32,
    p_lo: f64,
    p_cap: f64,
    tol: Tolerances,
) -> Result<ExponentSolution> {
    match find_exponent_once(i, radius, n, p_lo, p_cap, tol) {
        Err(Error::CrossingMismatch { expected, found }) => {
            log::warn!(
                "crossing count {found} != {expected} at i = {i}; retrying with tolerance / 10"
            );
            find_exponent_once(i, radius, n, p_lo, p_cap, tol.scaled(0.1))
        }
        other => other,
    }
}

fn find_exponent_once(
    i: usize,
    radius: f64,
    n: u32,
    p_lo: f64,
    p_cap: f64,
    tol: Tolerances,
) -> Result<ExponentSolution> {
    if i == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need i >= 1 and R > 0, got {i}, {radius}"
        )));
    }
    ProblemParams::new(n, p_lo)?;
    let mut map = RadiusMap {
        n,
        i,
        radius,
        opts: SingularOptions::with_tol(tol),
        evaluations: 0,
    };
    let mut lo = p_lo;
    let r_lo = map.eval(lo)?;
    if !(r_lo > radius) {
        return Err(Error::NoBracket { lo, hi: lo });
    }
    let mut hi = 2.0 * lo;
    loop {
        if hi > p_cap {
            return Err(Error::NoBracket {
                lo: p_lo,
                hi: p_cap,
            });
        }
        if map.eval(hi)? < radius {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    let bracket = (lo, hi);
    while hi - lo > P_BRACKET_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if map.eval(mid)? > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_i = 0.5 * (lo + hi);
    let params = ProblemParams::new(n, p_i)?;
    let sol = solve_to_critical(&params, i, radius, &map.opts)?;
    let r_i = sol.critical_radius(i).unwrap();
    let residual = (r_i - radius).abs();
    if residual >= RESIDUAL_RTOL * radius {
        log::warn!("residual {residual:e} above {RESIDUAL_RTOL:e} R at p = {p_i}");
    }
    // the integration stops at R_p^i, which sits within the residual of R
    let crossings = sol.trajectory.unit_crossings_up_to(radius.max(r_i));
    if crossings != i {
        return Err(Error::CrossingMismatch {
            expected: i,
            found: crossings,
        });
    }
    let du_at_radius = sol.eval(radius.min(r_i)).map(|s| s.du).unwrap_or(f64::NAN);
    Ok(ExponentSolution {
        i,
        radius,
        n,
        p_i,
        residual,
        crossings,
        du_at_radius,
        bracket,
        evaluations: map.evaluations,
    })
}

/// Default upper limit for the exponent search.
pub fn default_p_cap() -> f64 {
    DEFAULT_P_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub i: usize,
    pub n: u32,
    pub coarse_grid: Vec<f64>,
    pub coarse_radii: Vec<f64>,
    pub fine_grid: Vec<f64>,
    pub fine_radii: Vec<f64>,
    /// `max |R_{p_k}^i - R_{p_{k+1}}^i|` on each grid.
    pub coarse_modulus: f64,
    pub fine_modulus: f64,
    /// `fine_modulus / coarse_modulus`; absent for a single-point grid.
    pub ratio: Option<f64>,
    /// Largest slope `|dR/dp|` on one fine interval relative to the larger of
    /// its two neighbours.
    pub max_jump_ratio: f64,
    pub pass: bool,
}

/// `R_p^i` at every grid point, in parallel; order follows the grid.
pub fn critical_radii_on_grid(i: usize, n: u32, grid: &[f64], tol: Tolerances) -> Result<Vec<f64>> {
    let opts = SingularOptions::with_tol(tol);
    grid.par_iter()
        .map(|&p| {
            let params = ProblemParams::new(n, p)?;
            let sol = solve_to_critical(&params, i, 1.0, &opts)?;
            Ok(sol.critical_radius(i).unwrap())
        })
        .collect()
}

pub fn modulus(radii: &[f64]) -> f64 {
    radii
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

pub fn midpoint_refinement(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = grid.last() {
        out.push(last);
    }
    out
}

/// Modulus of `p -> R_p^i` on `coarse` and on `fine` (the midpoint
/// refinement of `coarse` when not given). Passes when the modulus ratio
/// lies in `[1/3, 2/3]` and no interval's slope exceeds ten times both of its
/// neighbours'.
pub fn continuity_scan(
    i: usize,
    n: u32,
    coarse: &[f64],
    fine: Option<&[f64]>,
    tol: Tolerances,
) -> Result<ContinuityReport> {
    if coarse.is_empty() || coarse.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("p grid must be increasing".into()));
    }
    let fine_grid = match fine {
        Some(f) => {
            if f.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParams("p grid must be increasing".into()));
            }
            f.to_vec()
        }
        None => midpoint_refinement(coarse),
    };
    let coarse_radii = critical_radii_on_grid(i, n, coarse, tol)?;
    let fine_radii = critical_radii_on_grid(i, n, &fine_grid, tol)?;
    let coarse_modulus = modulus(&coarse_radii);
    let fine_modulus = modulus(&fine_radii);
    let ratio = (coarse_modulus > 0.0).then(|| fine_modulus / coarse_modulus);

    let slopes: Vec<f64> = fine_grid
        .windows(2)
        .zip(fine_radii.windows(2))
        .map(|(p, r)| ((r[1] - r[0]) / (p[1] - p[0])).abs())
        .collect();
    let mut max_jump_ratio: f64 = 0.0;
    for k in 0..slopes.len() {
        let left = if k > 0 { slopes[k - 1] } else { 0.0 };
        let right = slopes.get(k + 1).copied().unwrap_or(0.0);
        let neighbour = left.max(right);
        if neighbour > 0.0 {
            max_jump_ratio = max_jump_ratio.max(slopes[k] / neighbour);
        }
    }
    let pass = match ratio {
        Some(q) => (1.0 / 3.0..=2.0 / 3.0).contains(&q) && max_jump_ratio <= 10.0,
        None => fine_modulus == 0.0,
    };
    Ok(ContinuityReport {
        i,
        n,
        coarse_grid: coarse.to_vec(),
        coarse_radii,
        fine_grid,
        fine_radii,
        coarse_modulus,
        fine_modulus,
        ratio,
        max_jump_ratio,
        pass,
    })
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    b
                } else {
                    a + (b - a) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn istar_definition() {
        let tol = Tolerances::default();
        let pr = ProblemParams::new(5, 20.0).unwrap();
        // R_20^1 ~ 1.069, R_20^2 ~ 1.863
        assert_eq!(find_istar(&pr, 1.0, tol).unwrap(), 1);
        assert_eq!(find_istar(&pr, 1.5, tol).unwrap(), 2);
        assert_eq!(find_istar(&pr, 2.0, tol).unwrap(), 3);
    }

    #[test]
    fn single_exponent() {
        let tol = Tolerances::uniform(1e-11);
        let sol = find_exponent(1, 1.0, 5, 6.0, 1e4, tol).unwrap();
        assert_eq!(sol.crossings, 1);
        assert!(sol.residual < 1e-6);
        assert!(sol.du_at_radius.abs() < 1e-6);
        assert!(sol.bracket.0 <= sol.p_i && sol.p_i <= sol.bracket.1);
        // R_20^1 > 1 so p^1 lies above 20
        assert!(sol.p_i > 20.0);
    }

    #[test]
    fn bracket_failures() {
        let tol = Tolerances::default();
        // R_p^1 at p = 40 is already below 1
        assert!(matches!(
            find_exponent(1, 1.0, 5, 40.0, 1e4, tol),
            Err(Error::NoBracket { .. })
        ));
        assert!(matches!(
            find_exponent(1, 1.0, 5, 6.0, 10.0, tol),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn degenerate_grid() {
        let rep = continuity_scan(1, 5, &[12.0], None, Tolerances::default()).unwrap();
        assert_eq!(rep.coarse_modulus, 0.0);
        assert_eq!(rep.fine_modulus, 0.0);
        assert!(rep.ratio.is_none());
        assert!(rep.pass);
    }

    #[test]
    fn refinement_helpers() {
        assert_eq!(
            midpoint_refinement(&[1.0, 2.0, 4.0]),
            vec![1.0, 1.5, 2.0, 3.0, 4.0]
        );
        assert_eq!(linspace(10.0, 40.0, 4), vec![10.0, 20.0, 30.0, 40.0]);
        assert_eq!(modulus(&[3.0, 2.5, 2.2]), 0.5);
    }
}
