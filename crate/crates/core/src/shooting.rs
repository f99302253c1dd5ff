//! Regular solutions `u(0) = gamma, u'(0) = 0`, their critical radii, the
//! distance to the singular solution and bifurcation-diagram samples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{
    integrate, integrate_radial, CriticalRadii, IntegratorOptions, OdeSystem, RadialState,
    RadialTrajectory, Tolerances,
};
use crate::params::{default_ctilde, derive_constants, LemmaConstants, ProblemParams};

#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub gamma: f64,
    pub params: ProblemParams,
    pub trajectory: RadialTrajectory,
    pub critical_radii: CriticalRadii,
}

impl ShootingResult {
    pub fn critical_radius(&self, i: usize) -> Option<f64> {
        self.critical_radii.get(i)
    }
}

/// Series start `u = gamma + a r^2 + b r^4` at a radius small enough that
/// the dropped terms are below tolerance.
pub fn taylor_start(gamma: f64, params: &ProblemParams, tol: &Tolerances) -> Result<RadialState> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "gamma = {gamma} must be positive"
        )));
    }
    let n = params.dim();
    let p = params.p;
    let gp = gamma.powf(p);
    let slope = p * gamma.powf(p - 1.0);
    if !(gp.is_finite() && slope.is_finite()) {
        return Err(Error::Overflow(format!(
            "gamma^p for gamma = {gamma}, p = {p}"
        )));
    }
    let b = (1.0 - slope) * (gamma - gp) / (8.0 * n * (n + 2.0));
    let cap = 1e-3 / slope.max(1.0).sqrt();
    let h = if b == 0.0 {
        cap
    } else {
        (tol.abs.min(tol.rel) * gamma.max(1.0) / b.abs())
            .powf(0.25)
            .min(cap)
    };
    Ok(series_at(gamma, params, h))
}

fn series_at(gamma: f64, params: &ProblemParams, h: f64) -> RadialState {
    let n = params.dim();
    let p = params.p;
    let a = (gamma - gamma.powf(p)) / (2.0 * n);
    let b = (1.0 - p * gamma.powf(p - 1.0)) * a / (4.0 * (n + 2.0));
    let h2 = h * h;
    RadialState {
        r: h,
        u: gamma + a * h2 + b * h2 * h2,
        du: 2.0 * a * h + 4.0 * b * h2 * h,
    }
}

pub fn shoot(
    gamma: f64,
    params: &ProblemParams,
    r_end: f64,
    tol: Tolerances,
) -> Result<ShootingResult> {
    shoot_with_stop(gamma, params, r_end, tol, None)
}

/// Shoot until the `i`-th critical point, giving up at `r_end`.
pub fn shoot_to_critical(
    gamma: f64,
    params: &ProblemParams,
    i: usize,
    r_end: f64,
    tol: Tolerances,
) -> Result<ShootingResult> {
    let res = shoot_with_stop(gamma, params, r_end, tol, Some(i))?;
    if res.critical_radii.len() < i {
        return Err(Error::CriticalPointMissing { i, r_cap: r_end });
    }
    Ok(res)
}

fn shoot_with_stop(
    gamma: f64,
    params: &ProblemParams,
    r_end: f64,
    tol: Tolerances,
    stop: Option<usize>,
) -> Result<ShootingResult> {
    params.validate()?;
    let start = taylor_start(gamma, params, &tol)?;
    let trajectory = integrate_radial(params, start, r_end, tol, stop)?;
    let critical_radii = trajectory.critical.clone();
    Ok(ShootingResult {
        gamma,
        params: *params,
        trajectory,
        critical_radii,
    })
}

/// First critical radius of the linearization about `u = 1`:
/// `j_{nu+1,1} / sqrt(p-1)` with `nu = (N-2)/2`, for the dimensions where
/// the Bessel zero has a closed characterization.
pub fn linearized_first_critical_radius(n: u32, p: f64) -> Option<f64> {
    let zero = match n {
        // tan x = x
        3 => 4.493_409_457_909_064,
        // J_{5/2}: tan x = 3x / (3 - x^2)
        5 => 5.763_459_196_894_55,
        _ => return None,
    };
    Some(zero / (p - 1.0).sqrt())
}

/// `(U, U', v, v')` with `v = u - U`; the `v` equation is written so the
/// difference is never formed by subtraction.
struct DeviationSystem {
    n: f64,
    p: f64,
}

impl OdeSystem<4> for DeviationSystem {
    fn rhs(&self, r: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let [big, dbig, v, dv] = *y;
        if !(big > 0.0) {
            return Err(Error::NonPositive { r, u: big });
        }
        let rel = v / big;
        if !(1.0 + rel > 0.0) {
            return Err(Error::NonPositive { r, u: big + v });
        }
        let bp = big.powf(self.p);
        let damp = (self.n - 1.0) / r;
        let jump = bp * (self.p * rel.ln_1p()).exp_m1();
        Ok([dbig, -damp * dbig + big - bp, dv, -damp * dv + v - jump])
    }

    fn error_weights(&self, y0: &[f64; 4], y1: &[f64; 4], tol: &Tolerances) -> [f64; 4] {
        let base = |i: usize| tol.abs + tol.rel * y0[i].abs().max(y1[i].abs());
        // relative control on the deviation, through zeros of v
        let amp = (y0[2].abs() + y0[3].abs()).max(y1[2].abs() + y1[3].abs());
        let dev = (tol.rel * amp).max(f64::MIN_POSITIVE);
        [base(0), base(1), dev, dev]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShotStatus {
    Ok,
    Nonpositive,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n: u32,
    pub p: f64,
    pub interval: (f64, f64),
    pub gammas: Vec<f64>,
    /// `sup |u_gamma - U*|` on the shared grid; `None` for excluded shots.
    pub distances: Vec<Option<f64>>,
    pub status: Vec<ShotStatus>,
    pub messages: Vec<Option<String>>,
    pub pass: bool,
}

/// Number of sample points on `[a, b]` for the sup distance.
pub const CONVERGENCE_GRID: usize = 2001;

/// Sup distance between `u_gamma` and the singular solution on `[a, b]`.
///
/// The regular and singular solutions are integrated together from a radius
/// below both the series start and the singular seed, carrying their
/// difference as its own unknown. Naive subtraction would stall at the
/// rounding level of `u`, far above the true distance for large `gamma`.
pub fn deviation_sup(
    gamma: f64,
    params: &ProblemParams,
    interval: (f64, f64),
    tol: Tolerances,
) -> Result<f64> {
    let (a, b) = interval;
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParams(format!(
            "need 0 < a < b, got [{a}, {b}]"
        )));
    }
    let c = derive_constants(params)?;
    let lemma = LemmaConstants::new(&c, default_ctilde(params.n)?)?;
    // start below both the series radius and the singular seed radius
    let rs = taylor_start(gamma, params, &tol)?
        .r
        .min(lemma.rtilde_p / 16.0);
    let regular = series_at(gamma, params, rs);
    let lead = c.a * rs.powf(-c.theta);
    let big = lead * (1.0 + c.dp * rs * rs);
    let dbig = lead / rs * (-c.theta + (2.0 - c.theta) * c.dp * rs * rs);
    let y0 = [big, dbig, regular.u - big, regular.du - dbig];
    let sys = DeviationSystem {
        n: params.dim(),
        p: params.p,
    };
    let sol = integrate(&sys, rs, y0, b, &[], None, &IntegratorOptions::new(tol))?;
    let mut sup: f64 = 0.0;
    for k in 0..CONVERGENCE_GRID {
        let r = a + (b - a) * k as f64 / (CONVERGENCE_GRID - 1) as f64;
        let y = sol.eval(r).ok_or(Error::Coverage { lo: a, hi: b })?;
        sup = sup.max(y[2].abs());
    }
    Ok(sup)
}

/// `d(gamma)` along an increasing list of `gamma`; passes when every shot
/// succeeds and `d` strictly decreases.
pub fn convergence_to_singular(
    params: &ProblemParams,
    gammas: &[f64],
    interval: (f64, f64),
    tol: Tolerances,
) -> Result<ConvergenceReport> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("gammas must be increasing".into()));
    }
    let mut distances = Vec::new();
    let mut status = Vec::new();
    let mut messages = Vec::new();
    for &g in gammas {
        match deviation_sup(g, params, interval, tol) {
            Ok(d) => {
                distances.push(Some(d));
                status.push(ShotStatus::Ok);
                messages.push(None);
            }
            Err(e @ Error::NonPositive { .. }) => {
                distances.push(None);
                status.push(ShotStatus::Nonpositive);
                messages.push(Some(e.to_string()));
            }
            Err(e) => {
                distances.push(None);
                status.push(ShotStatus::Failed);
                messages.push(Some(e.to_string()));
            }
        }
    }
    let pass = distances.iter().all(Option::is_some)
        && distances.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
    Ok(ConvergenceReport {
        n: params.n,
        p: params.p,
        interval,
        gammas: gammas.to_vec(),
        distances,
        status,
        messages,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub gamma: f64,
    pub p: f64,
    /// `|r^i_{p,gamma} - R|`.
    pub residual: f64,
}

/// Solve `r^i_{p,gamma} = R` for `p` by bisection inside `p_bracket`.
pub fn branch_sample(
    i: usize,
    radius: f64,
    n: u32,
    gamma: f64,
    p_bracket: (f64, f64),
    tol: Tolerances,
) -> Result<BranchSample> {
    let (mut lo, mut hi) = p_bracket;
    if !(hi > lo) {
        return Err(Error::InvalidParams(format!("empty bracket [{lo}, {hi}]")));
    }
    let r_cap = 64.0 * radius.max(1.0);
    let f = |p: f64| -> Result<f64> {
        let params = ProblemParams::new(n, p)?;
        let shot = shoot_to_critical(gamma, &params, i, r_cap, tol)?;
        Ok(shot.critical_radius(i).unwrap() - radius)
    };
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for _ in 0..200 {
        if best.1.abs() < 1e-9 || hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(BranchSample {
        gamma,
        p: best.0,
        residual: best.1.abs(),
    })
}
