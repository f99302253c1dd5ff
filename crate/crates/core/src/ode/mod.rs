//! Radial ODE formulations, the energy functional, the Emden-Fowler change
//! of variables and trajectory bookkeeping.

pub mod integrator;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::params::{phi_nonlinearity, DerivedConstants, ProblemParams};
pub use integrator::{
    integrate, DenseSegment, Event, IntegratorOptions, OdeSystem, Solution, StopRule, Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaState {
    pub zeta: f64,
    pub eta: f64,
    pub deta: f64,
}

/// `(u', u'')` for `-u'' - (N-1)/r u' + u = u^p`.
pub fn rhs_original(state: RadialState, params: &ProblemParams) -> Result<(f64, f64)> {
    radial_rhs(state.r, state.u, state.du, params.dim(), params.p)
}

fn radial_rhs(r: f64, u: f64, du: f64, n: f64, p: f64) -> Result<(f64, f64)> {
    if !(u > 0.0) {
        return Err(Error::NonPositive { r, u });
    }
    Ok((du, -(n - 1.0) / r * du + u - u.powf(p)))
}

/// `(eta', eta'')` for the equation satisfied by `eta` in the variable `zeta`.
pub fn rhs_eta(state: EtaState, c: &DerivedConstants, p: f64) -> Result<(f64, f64)> {
    let EtaState { zeta, eta, deta } = state;
    if !(1.0 + eta > 0.0) {
        return Err(Error::NonPositive {
            r: (-c.m * zeta).exp(),
            u: 1.0 + eta,
        });
    }
    let forcing = c.m * c.m * (-2.0 * c.m * zeta).exp() * (1.0 + eta);
    let dd = c.alpha * deta - (p - 1.0) * eta + phi_nonlinearity(eta, p)? + forcing;
    Ok((deta, dd))
}

/// `(w', w'')` for the equation of `w = r^{(N-1)/2} (u - 1)`.
pub fn rhs_w(r: f64, u: f64, w: f64, dw: f64, params: &ProblemParams) -> (f64, f64) {
    let p = params.p;
    let n = params.dim();
    let ratio = if (u - 1.0).abs() < 1e-8 {
        p - 1.0
    } else {
        (u.powf(p) - u) / (u - 1.0)
    };
    (dw, -(ratio - (n - 1.0) * (n - 3.0) / (4.0 * r * r)) * w)
}

pub fn energy(state: RadialState, p: f64) -> f64 {
    let RadialState { u, du, .. } = state;
    0.5 * du * du - 0.5 * u * u + u.powf(p + 1.0) / (p + 1.0)
}

pub fn transform_eta_to_u(state: EtaState, c: &DerivedConstants) -> RadialState {
    let r = (-c.m * state.zeta).exp();
    let scale = c.a * r.powf(-c.theta);
    RadialState {
        r,
        u: scale * (1.0 + state.eta),
        du: scale / r * (-c.theta * (1.0 + state.eta) - state.deta / c.m),
    }
}

pub fn transform_u_to_eta(state: RadialState, c: &DerivedConstants) -> EtaState {
    let RadialState { r, u, du } = state;
    let rt = r.powf(c.theta) / c.a;
    EtaState {
        zeta: -r.ln() / c.m,
        eta: rt * u - 1.0,
        deta: -c.m * rt * (c.theta * u + r * du),
    }
}

/// Equation (u, u') in the radius.
#[derive(Debug, Clone, Copy)]
pub struct RadialSystem {
    pub n: f64,
    pub p: f64,
}

impl RadialSystem {
    pub fn new(params: &ProblemParams) -> Self {
        Self {
            n: params.dim(),
            p: params.p,
        }
    }
}

impl OdeSystem<2> for RadialSystem {
    fn rhs(&self, r: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let (a, b) = radial_rhs(r, y[0], y[1], self.n, self.p)?;
        Ok([a, b])
    }
}

/// Equation (eta, eta') in `zeta`.
#[derive(Debug, Clone, Copy)]
pub struct EtaSystem {
    pub c: DerivedConstants,
}

impl OdeSystem<2> for EtaSystem {
    fn rhs(&self, zeta: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let (a, b) = rhs_eta(
            EtaState {
                zeta,
                eta: y[0],
                deta: y[1],
            },
            &self.c,
            self.c.p,
        )?;
        Ok([a, b])
    }
}

pub const UNIT_CROSSING: usize = 0;
pub const CRITICAL_POINT: usize = 1;

pub fn radial_events() -> [Event; 2] {
    [
        Event {
            component: 0,
            level: 1.0,
        },
        Event {
            component: 1,
            level: 0.0,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CriticalKind {
    Min,
    Max,
}

impl CriticalKind {
    /// At a critical point `u'' = u - u^p`, positive exactly when `u < 1`.
    pub fn classify(u: f64, p: f64) -> Self {
        if u - u.powf(p) > 0.0 {
            CriticalKind::Min
        } else {
            CriticalKind::Max
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CriticalRadii {
    pub radii: Vec<f64>,
    pub kind: Vec<CriticalKind>,
}

impl CriticalRadii {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The `i`-th critical radius, counting from 1.
    pub fn get(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|k| self.radii.get(k).copied())
    }

    pub fn alternates(&self) -> bool {
        self.kind.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Debug, Clone)]
pub struct RadialTrajectory {
    pub n: u32,
    pub p: f64,
    pub samples: Vec<RadialState>,
    pub unit_crossings: Vec<f64>,
    pub critical: CriticalRadii,
    pub energy: Vec<f64>,
    /// True if integration ended at a requested critical point.
    pub stopped: bool,
    segments: Vec<DenseSegment<2>>,
}

/// Integrate the radial equation with unit-crossing and critical-point
/// events, optionally stopping at the `k`-th critical point.
pub fn integrate_radial(
    params: &ProblemParams,
    start: RadialState,
    r_end: f64,
    tol: Tolerances,
    stop_after_critical: Option<usize>,
) -> Result<RadialTrajectory> {
    if !(start.r > 0.0) || !(r_end > start.r) {
        return Err(Error::InvalidParams(format!(
            "need 0 < r_start = {} < r_end = {r_end}",
            start.r
        )));
    }
    let sys = RadialSystem::new(params);
    let stop = stop_after_critical.map(|count| StopRule {
        event: CRITICAL_POINT,
        count,
    });
    let sol = integrate(
        &sys,
        start.r,
        [start.u, start.du],
        r_end,
        &radial_events(),
        stop,
        &IntegratorOptions::new(tol),
    )?;
    Ok(RadialTrajectory::from_solution(params, sol))
}

impl RadialTrajectory {
    pub fn from_solution(params: &ProblemParams, sol: Solution<2>) -> Self {
        let p = params.p;
        let samples: Vec<RadialState> = sol
            .ts
            .iter()
            .zip(&sol.ys)
            .map(|(&r, y)| RadialState {
                r,
                u: y[0],
                du: y[1],
            })
            .collect();
        let energy = samples.iter().map(|s| energy(*s, p)).collect();
        let mut unit_crossings = Vec::new();
        let mut critical = CriticalRadii::default();
        for hit in &sol.events {
            if hit.index == UNIT_CROSSING {
                unit_crossings.push(hit.t);
            } else {
                critical.radii.push(hit.t);
                critical.kind.push(CriticalKind::classify(hit.y[0], p));
            }
        }
        Self {
            n: params.n,
            p,
            samples,
            unit_crossings,
            critical,
            energy,
            stopped: sol.stopped,
            segments: sol.segments,
        }
    }

    pub fn r_start(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_end(&self) -> f64 {
        self.samples.last().unwrap().r
    }

    fn segment(&self, r: f64) -> Option<&DenseSegment<2>> {
        let idx = self.segments.partition_point(|s| s.t1() < r);
        self.segments.get(idx).filter(|s| s.contains(r))
    }

    /// Dense-output state at `r`, or `None` outside the integrated range.
    pub fn eval(&self, r: f64) -> Option<RadialState> {
        self.segment(r).map(|s| {
            let y = s.eval(r);
            RadialState {
                r,
                u: y[0],
                du: y[1],
            }
        })
    }

    pub fn unit_crossings_up_to(&self, r: f64) -> usize {
        self.unit_crossings.iter().filter(|&&x| x <= r).count()
    }

    /// Largest relative increase of `E` between consecutive samples.
    pub fn max_energy_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Compares `E(r_{k+1}) - E(r_k)` with the three-point Gauss quadrature
    /// of `-(N-1) u'^2 / r` over each step. Steps where the dissipated amount
    /// is below `floor * max(|E|, 1)` are skipped. Returns the worst relative
    /// mismatch and the number of steps compared.
    pub fn energy_dissipation_mismatch(&self, floor: f64) -> (f64, usize) {
        let n = f64::from(self.n);
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        for (k, seg) in self.segments.iter().enumerate() {
            let (a, b) = (seg.t0, seg.t1());
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let integral: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(x, w)| {
                    let r = mid + half * x;
                    let du = seg.eval(r)[1];
                    -w * (n - 1.0) * du * du / r
                })
                .sum::<f64>()
                * half;
            let de = self.energy[k + 1] - self.energy[k];
            if integral.abs() < floor * self.energy[k].abs().max(1.0) {
                continue;
            }
            checked += 1;
            worst = worst.max((de - integral).abs() / integral.abs());
        }
        (worst, checked)
    }

    fn thinned_indices(&self, max_rows: Option<usize>) -> Vec<usize> {
        let len = self.samples.len();
        match max_rows {
            Some(m) if m >= 2 && len > m => {
                let stride = len.div_ceil(m - 1);
                let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
                if *idx.last().unwrap() != len - 1 {
                    idx.push(len - 1);
                }
                idx
            }
            _ => (0..len).collect(),
        }
    }

    /// CSV with columns `r,u,du,E`.
    pub fn to_csv(&self, max_rows: Option<usize>) -> String {
        let mut out = String::from("r,u,du,E\n");
        for i in self.thinned_indices(max_rows) {
            let s = self.samples[i];
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", s.r, s.u, s.du, self.energy[i]);
        }
        out
    }

    pub fn to_json(&self, max_rows: Option<usize>) -> serde_json::Value {
        let rows: Vec<_> = self
            .thinned_indices(max_rows)
            .into_iter()
            .map(|i| {
                let s = self.samples[i];
                json!({"r": s.r, "u": s.u, "du": s.du, "E": self.energy[i]})
            })
            .collect();
        json!({
            "N": self.n,
            "p": self.p,
            "samples": rows,
            "unit_crossings": self.unit_crossings,
            "critical_points": self.critical.radii,
            "critical_kinds": self.critical.kind,
        })
    }
}
