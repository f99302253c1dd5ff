//! The singular solution: seeded from its origin expansion, integrated
//! outward in `r`, with unit crossings, critical radii and the bound checks
//! near the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate_radial, CriticalRadii, RadialState, RadialTrajectory, Tolerances};
use crate::params::{
    default_ctilde, derive_constants, log_grid, DerivedConstants, LemmaConstants, ProblemParams,
};

/// Largest factor by which `critical_radius` extends the integration range.
pub const R_END_CAP_FACTOR: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    /// `A r^{-theta} (1 + D_p r^2)`.
    TwoTerm,
    /// `A r^{-theta}`, the lower bound itself.
    OneTerm,
}

#[derive(Debug, Clone, Copy)]
pub struct SingularOptions {
    pub tol: Tolerances,
    /// `r0 = r~_p / seed_divisor`.
    pub seed_divisor: f64,
    pub seed: SeedKind,
    pub check_seed: bool,
    pub stop_after_critical: Option<usize>,
    /// Overrides the searched `c~`.
    pub ctilde: Option<f64>,
}

impl Default for SingularOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed_divisor: 16.0,
            seed: SeedKind::TwoTerm,
            check_seed: true,
            stop_after_critical: None,
            ctilde: None,
        }
    }
}

impl SingularOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedCheck {
    pub u_coarse: f64,
    pub u_fine: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone)]
pub struct SingularSolution {
    pub params: ProblemParams,
    pub constants: DerivedConstants,
    pub lemma: LemmaConstants,
    pub seed_kind: SeedKind,
    pub seed_radius: f64,
    pub tol: Tolerances,
    pub trajectory: RadialTrajectory,
    pub r_p: Option<f64>,
    pub critical_radii: CriticalRadii,
    pub seed_check: Option<SeedCheck>,
}

pub fn seed_at_origin(
    c: &DerivedConstants,
    lemma: &LemmaConstants,
    r0: f64,
    kind: SeedKind,
) -> Result<RadialState> {
    if !(r0 > 0.0 && r0 <= lemma.rtilde_p) {
        return Err(Error::InvalidParams(format!(
            "seed radius {r0} must lie in (0, r~_p = {}]",
            lemma.rtilde_p
        )));
    }
    Ok(expansion(c, r0, kind))
}

fn expansion(c: &DerivedConstants, r: f64, kind: SeedKind) -> RadialState {
    let lead = c.a * r.powf(-c.theta);
    let d = match kind {
        SeedKind::TwoTerm => c.dp,
        SeedKind::OneTerm => 0.0,
    };
    RadialState {
        r,
        u: lead * (1.0 + d * r * r),
        du: lead / r * (-c.theta + (2.0 - c.theta) * d * r * r),
    }
}

pub fn solve_singular(
    params: &ProblemParams,
    r_end: f64,
    opts: &SingularOptions,
) -> Result<SingularSolution> {
    let c = derive_constants(params)?;
    let ctilde = match opts.ctilde {
        Some(ct) => ct,
        None => default_ctilde(params.n)?,
    };
    let lemma = LemmaConstants::new(&c, ctilde)?;
    if !(r_end > lemma.rtilde_p) {
        return Err(Error::InvalidParams(format!(
            "r_end = {r_end} must exceed r~_p = {}",
            lemma.rtilde_p
        )));
    }
    if !(opts.seed_divisor >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "seed divisor {} must be at least 1",
            opts.seed_divisor
        )));
    }
    let r0 = lemma.rtilde_p / opts.seed_divisor;
    let seed = seed_at_origin(&c, &lemma, r0, opts.seed)?;
    let trajectory = integrate_radial(params, seed, r_end, opts.tol, opts.stop_after_critical)?;

    let seed_check = if opts.check_seed && trajectory.r_end() >= lemma.rtilde_p {
        let fine_seed = seed_at_origin(&c, &lemma, 0.5 * r0, opts.seed)?;
        let fine = integrate_radial(params, fine_seed, lemma.rtilde_p, opts.tol, None)?;
        let u_fine = fine.samples.last().unwrap().u;
        let u_coarse = trajectory
            .eval(lemma.rtilde_p)
            .ok_or(Error::Coverage {
                lo: r0,
                hi: lemma.rtilde_p,
            })?
            .u;
        let allowed = 10.0 * (opts.tol.abs + opts.tol.rel * u_fine.abs());
        let check = SeedCheck {
            u_coarse,
            u_fine,
            allowed,
        };
        if (u_coarse - u_fine).abs() > allowed {
            return Err(Error::SeedSensitivity {
                u_coarse,
                u_fine,
                allowed,
            });
        }
        Some(check)
    } else {
        None
    };

    let r_p = trajectory.unit_crossings.first().copied();
    if r_p.is_none() {
        log::info!(
            "no unit crossing for N = {}, p = {} before r = {}",
            params.n,
            params.p,
            trajectory.r_end()
        );
    }
    let critical_radii = trajectory.critical.clone();
    Ok(SingularSolution {
        params: *params,
        constants: c,
        lemma,
        seed_kind: opts.seed,
        seed_radius: r0,
        tol: opts.tol,
        trajectory,
        r_p,
        critical_radii,
        seed_check,
    })
}

impl SingularSolution {
    pub fn rtilde(&self) -> f64 {
        self.lemma.rtilde_p
    }

    pub fn r_end(&self) -> f64 {
        self.trajectory.r_end()
    }

    /// The solution on `(0, r_end]`: the origin expansion below the seed
    /// radius, the integrated trajectory above it.
    pub fn eval(&self, r: f64) -> Option<RadialState> {
        if !(r > 0.0) {
            None
        } else if r <= self.seed_radius {
            Some(expansion(&self.constants, r, self.seed_kind))
        } else {
            self.trajectory.eval(r)
        }
    }

    /// `r^2 (p u^{p-1} - 1)`, finite down to `r -> 0`.
    pub fn scaled_potential(&self, r: f64) -> Option<f64> {
        let c = &self.constants;
        let p = c.p;
        let r2 = r * r;
        if r > 0.0 && r <= self.seed_radius {
            let d = match self.seed_kind {
                SeedKind::TwoTerm => c.dp,
                SeedKind::OneTerm => 0.0,
            };
            // A^{p-1} = 1/m^2
            return Some(p / (c.m * c.m) * ((p - 1.0) * (d * r2).ln_1p()).exp() - r2);
        }
        let u = self.eval(r)?.u;
        // r^2 u^{p-1} = (r^theta u)^{p-1}
        let log_scaled = c.theta * r.ln() + u.ln();
        Some(p * ((p - 1.0) * log_scaled).exp() - r2)
    }

    pub fn first_unit_crossing(&self) -> Result<f64> {
        self.r_p.ok_or(Error::NoUnitCrossing {
            r_end: self.r_end(),
        })
    }

    pub fn critical_radius(&self, i: usize) -> Option<f64> {
        self.critical_radii.get(i)
    }
}

/// `R_p^i`, extending `r_end` by doubling up to `R_END_CAP_FACTOR`.
pub fn critical_radius(
    params: &ProblemParams,
    i: usize,
    r_end: f64,
    opts: &SingularOptions,
) -> Result<f64> {
    let sol = solve_to_critical(params, i, r_end, opts)?;
    Ok(sol.critical_radius(i).unwrap())
}

/// A singular solution integrated exactly up to its `i`-th critical point.
pub fn solve_to_critical(
    params: &ProblemParams,
    i: usize,
    r_end: f64,
    opts: &SingularOptions,
) -> Result<SingularSolution> {
    if i == 0 {
        return Err(Error::InvalidParams("critical index starts at 1".into()));
    }
    let opts = SingularOptions {
        stop_after_critical: Some(i),
        ..*opts
    };
    let mut r = r_end;
    while r <= r_end * R_END_CAP_FACTOR {
        let sol = solve_singular(params, r, &opts)?;
        if sol.critical_radii.len() >= i {
            return Ok(sol);
        }
        r *= 2.0;
    }
    Err(Error::CriticalPointMissing {
        i,
        r_cap: r_end * R_END_CAP_FACTOR,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginBoundsReport {
    pub n_samples: usize,
    /// `min (u / (A r^-theta) - 1)`; should be `>= -tolerance`.
    pub lower_margin: f64,
    /// `max (u / (A r^-theta (1 + D_p r^2)) - 1)`; should be `<= tolerance`.
    pub upper_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Both origin bounds at `n_samples` log-spaced radii in `(r0, r~_p]`.
/// `tolerance` defaults to ten times the relative integrator tolerance.
pub fn verify_origin_bounds(
    sol: &SingularSolution,
    n_samples: usize,
    tolerance: Option<f64>,
) -> Result<OriginBoundsReport> {
    let c = &sol.constants;
    let tolerance = tolerance.unwrap_or(10.0 * sol.tol.rel);
    let grid = log_grid(sol.seed_radius, sol.rtilde(), n_samples + 1);
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::NEG_INFINITY;
    for &r in &grid[1..] {
        let u = sol
            .eval(r)
            .ok_or(Error::Coverage {
                lo: sol.seed_radius,
                hi: sol.rtilde(),
            })?
            .u;
        let lower = c.a * r.powf(-c.theta);
        let upper = lower * (1.0 + c.dp * r * r);
        lower_margin = lower_margin.min(u / lower - 1.0);
        upper_margin = upper_margin.max(u / upper - 1.0);
    }
    Ok(OriginBoundsReport {
        n_samples,
        lower_margin,
        upper_margin,
        tolerance,
        pass: lower_margin >= -tolerance && upper_margin <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBoundReport {
    pub p: f64,
    pub u_at_rtilde: f64,
    pub du_at_rtilde: f64,
    /// `|u'(r~_p)| sqrt(p)`.
    pub scaled_du: f64,
    /// `max |u' + theta A r^{-1-theta}| / r^{1-theta}` over the seed interval.
    pub seed_ratio_max: f64,
}

pub fn derivative_bound_check(sol: &SingularSolution) -> Result<DerivativeBoundReport> {
    let c = &sol.constants;
    let rt = sol.rtilde();
    let at = sol.eval(rt).ok_or(Error::Coverage {
        lo: sol.seed_radius,
        hi: rt,
    })?;
    let mut seed_ratio_max: f64 = 0.0;
    for &r in &log_grid(sol.seed_radius, rt, 65)[1..] {
        let s = sol.eval(r).unwrap();
        let dev = (s.du + c.theta * c.a * r.powf(-1.0 - c.theta)).abs();
        seed_ratio_max = seed_ratio_max.max(dev / r.powf(1.0 - c.theta));
    }
    Ok(DerivativeBoundReport {
        p: c.p,
        u_at_rtilde: at.u,
        du_at_rtilde: at.du,
        scaled_du: at.du.abs() * c.p.sqrt(),
        seed_ratio_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSweep {
    pub reports: Vec<DerivativeBoundReport>,
    /// Largest `|u'(r~_p)| sqrt(p)` seen; the fitted constant.
    pub fitted_constant: f64,
    /// Along increasing `p` the scaled derivative never exceeds its value
    /// at the first exponent, which then serves as the constant.
    pub bounded: bool,
    /// `|u(r~_p) - 1|` decreases along the sweep.
    pub u_tends_to_one: bool,
}

pub fn derivative_bound_sweep(
    n: u32,
    ps: &[f64],
    r_end: f64,
    opts: &SingularOptions,
) -> Result<DerivativeSweep> {
    let reports: Vec<DerivativeBoundReport> = ps
        .iter()
        .map(|&p| {
            let params = ProblemParams::new(n, p)?;
            let sol = solve_singular(&params, r_end, opts)?;
            derivative_bound_check(&sol)
        })
        .collect::<Result<_>>()?;
    let scaled: Vec<f64> = reports.iter().map(|r| r.scaled_du).collect();
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    let first = scaled.first().copied().unwrap_or(0.0);
    let increasing = ps.windows(2).all(|w| w[1] > w[0]);
    let u_tends_to_one = reports
        .windows(2)
        .all(|w| (w[1].u_at_rtilde - 1.0).abs() < (w[0].u_at_rtilde - 1.0).abs());
    Ok(DerivativeSweep {
        reports,
        fitted_constant: hi,
        bounded: increasing && hi <= first * (1.0 + 1e-9),
        u_tends_to_one,
    })
}

/// Sup of the relative difference between runs seeded at `r0` and `r0/2`
/// on `[r~_p, r_end]`.
pub fn seed_agreement(params: &ProblemParams, r_end: f64, opts: &SingularOptions) -> Result<f64> {
    let base = SingularOptions {
        check_seed: false,
        ..*opts
    };
    let a = solve_singular(params, r_end, &base)?;
    let b = solve_singular(
        params,
        r_end,
        &SingularOptions {
            seed_divisor: 2.0 * opts.seed_divisor,
            ..base
        },
    )?;
    let hi = a.r_end().min(b.r_end());
    let lo = a.rtilde();
    let mut worst: f64 = 0.0;
    for k in 0..=2000 {
        let r = lo + (hi - lo) * k as f64 / 2000.0;
        let (ua, ub) = (a.eval(r).unwrap().u, b.eval(r).unwrap().u);
        worst = worst.max((ua - ub).abs() / ua.abs().max(1.0));
    }
    Ok(worst)
}
