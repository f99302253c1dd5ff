//! Critical radii over a grid of (N, p, i[, gamma]) with resumable points
//! and trend checks in p.

use std::collections::BTreeMap;
use std::fs;

use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use lnt_core::ode::Tolerances;
use lnt_core::params::ProblemParams;
use lnt_core::shooting::shoot_to_critical;
use lnt_core::singular::{critical_radius, SingularOptions};

use crate::commands::Output;
use crate::config::{sweep_axes, SweepArgs, SweepAxes};
use crate::report::{Check, Status};

pub const POINTS_FILE: &str = "points.json";
/// Shots give up beyond this radius.
const SHOT_R_CAP: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub i: usize,
    pub gamma: Option<f64>,
    /// `R_p^i` of the singular solution, or of the shot when `gamma` is set.
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub error: Option<String>,
}

impl SweepPoint {
    fn same_point(&self, other: &SweepPoint) -> bool {
        self.n == other.n && self.p == other.p && self.i == other.i && self.gamma == other.gamma
    }
}

/// Grid points in a fixed order: N, then i, then gamma, then p.
pub fn grid_points(a: &SweepArgs) -> Result<Vec<SweepPoint>> {
    let SweepAxes { ns, ps, is, gammas } = sweep_axes(a)?;
    let gammas: Vec<Option<f64>> = match gammas {
        Some(g) => g.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut out = Vec::new();
    for &n in &ns {
        for &i in &is {
            for &gamma in &gammas {
                for &p in &ps {
                    out.push(SweepPoint {
                        n,
                        p,
                        i,
                        gamma,
                        radius: None,
                        error: None,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn evaluate(point: &SweepPoint, tol: Tolerances) -> SweepPoint {
    let result = ProblemParams::new(point.n, point.p).and_then(|params| match point.gamma {
        None => critical_radius(&params, point.i, 1.0, &SingularOptions::with_tol(tol)),
        Some(g) => shoot_to_critical(g, &params, point.i, SHOT_R_CAP, tol)
            .map(|s| s.critical_radius(point.i).unwrap()),
    });
    let mut done = point.clone();
    match result {
        Ok(r) => done.radius = Some(r),
        Err(e) => done.error = Some(e.to_string()),
    }
    done
}

fn load_points(out: &Output) -> Vec<SweepPoint> {
    let path = out.dir.join(POINTS_FILE);
    let Ok(text) = fs::read_to_string(&path) else {
        return Vec::new();
    };
    match serde_json::from_str(&text) {
        Ok(points) => points,
        Err(e) => {
            log::warn!("ignoring unreadable {}: {e}", path.display());
            Vec::new()
        }
    }
}

/// Returns the finished points and how many were computed in this run.
pub fn run_points(a: &SweepArgs, out: &mut Output) -> Result<(Vec<SweepPoint>, usize)> {
    let grid = grid_points(a)?;
    let previous = if a.fresh {
        Vec::new()
    } else {
        load_points(out)
    };
    let todo: Vec<&SweepPoint> = grid
        .iter()
        .filter(|g| !previous.iter().any(|d| d.same_point(g)))
        .collect();
    log::info!("sweep: {} of {} points to compute", todo.len(), grid.len());
    let tol = out.tol;
    let fresh: Vec<SweepPoint> = todo.par_iter().map(|g| evaluate(g, tol)).collect();
    let computed = fresh.len();
    let points: Vec<SweepPoint> = grid
        .iter()
        .map(|g| {
            fresh
                .iter()
                .chain(&previous)
                .find(|d| d.same_point(g))
                .cloned()
                .expect("every grid point is evaluated")
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&points)?;
    text.push('\n');
    out.write(POINTS_FILE, &text)?;
    Ok((points, computed))
}

fn trend_name(n: u32, i: usize, gamma: Option<f64>) -> String {
    match gamma {
        Some(g) => format!("radius_decreasing_in_p[N={n},i={i},gamma={g}]"),
        None => format!("radius_decreasing_in_p[N={n},i={i}]"),
    }
}

pub const TREND_ANCHOR: &str = "singular.critical_radius_decreasing_in_p";
pub const POINTS_ANCHOR: &str = "sweep.points_completed";

/// Names and anchors of every check a sweep over `a` reports.
pub fn declared(a: &SweepArgs) -> Result<Vec<(String, &'static str)>> {
    let mut out = vec![("points_completed".to_string(), POINTS_ANCHOR)];
    let mut seen = Vec::new();
    for g in grid_points(a)? {
        let name = trend_name(g.n, g.i, g.gamma);
        if !seen.contains(&name) {
            seen.push(name.clone());
            out.push((name, TREND_ANCHOR));
        }
    }
    Ok(out)
}

/// A failed point anywhere makes the grid incomplete, and every trend over
/// an incomplete grid is INFO.
pub fn checks(points: &[SweepPoint], computed: usize) -> Vec<Check> {
    let failed: Vec<String> = points
        .iter()
        .filter(|p| p.error.is_some())
        .map(|p| {
            format!(
                "N={} p={} i={}{}: {}",
                p.n,
                p.p,
                p.i,
                p.gamma.map(|g| format!(" gamma={g}")).unwrap_or_default(),
                p.error.as_deref().unwrap_or_default()
            )
        })
        .collect();
    let complete = failed.is_empty();
    let mut out = Vec::new();
    let mut c = Check::pass_if("points_completed", POINTS_ANCHOR, complete).margins(json!({
        "points": points.len(),
        "failed": failed.len(),
        "computed_this_run": computed,
        "resumed": points.len() - computed,
    }));
    if !complete {
        c = c.message(failed.join("; "));
    }
    out.push(c);

    let mut groups: BTreeMap<String, Vec<&SweepPoint>> = BTreeMap::new();
    let mut order = Vec::new();
    for p in points {
        let name = trend_name(p.n, p.i, p.gamma);
        if !groups.contains_key(&name) {
            order.push(name.clone());
        }
        groups.entry(name).or_default().push(p);
    }
    for name in order {
        let mut group = groups.remove(&name).unwrap();
        group.sort_by(|a, b| a.p.total_cmp(&b.p));
        let ps: Vec<f64> = group.iter().map(|g| g.p).collect();
        let radii: Vec<Option<f64>> = group.iter().map(|g| g.radius).collect();
        let decreasing = radii
            .windows(2)
            .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
        let status = if !complete || group.len() < 2 {
            Status::Info
        } else if decreasing {
            Status::Pass
        } else {
            Status::Fail
        };
        let mut c = Check::new(&name, TREND_ANCHOR, status)
            .margins(json!({"R": radii}))
            .fixtures(json!({"p": ps}));
        if !complete {
            c = c.message("grid incomplete: trend not assessed");
        } else if group.len() < 2 {
            c = c.message("fewer than two exponents");
        }
        out.push(c);
    }
    out
}

pub fn write_table(points: &[SweepPoint], out: &mut Output) -> Result<()> {
    let mut text = String::from("N,p,i,gamma,R,status,message\n");
    for p in points {
        let message = p.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        text.push_str(&format!(
            "{},{:e},{},{},{},{},{}\n",
            p.n,
            p.p,
            p.i,
            p.gamma.map(|g| format!("{g:e}")).unwrap_or_default(),
            p.radius.map(|r| format!("{r:e}")).unwrap_or_default(),
            if p.error.is_some() { "FAILED" } else { "OK" },
            message,
        ));
    }
    out.write("sweep.csv", &text)
}
