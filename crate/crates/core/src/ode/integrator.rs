//! Dormand-Prince 5(4) with PI step control, native dense output and
//! linear event location.
//!
//! The integrator is generic over the state dimension and runs in either
//! direction of the independent variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerances {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        let tol = Self { abs, rel };
        tol.validate()?;
        Ok(tol)
    }

    pub fn uniform(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }

    pub fn validate(&self) -> Result<()> {
        if self.abs > 0.0 && self.rel > 0.0 && self.abs.is_finite() && self.rel.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "tolerances must be positive, got abs = {}, rel = {}",
                self.abs, self.rel
            )))
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }

    /// The larger of the two, used where a single number is needed.
    pub fn max(&self) -> f64 {
        self.abs.max(self.rel)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(1e-10)
    }
}

pub trait OdeSystem<const D: usize> {
    fn rhs(&self, t: f64, y: &[f64; D]) -> Result<[f64; D]>;

    /// Per-component error scales for the step acceptance test.
    fn error_weights(&self, y0: &[f64; D], y1: &[f64; D], tol: &Tolerances) -> [f64; D] {
        std::array::from_fn(|i| tol.abs + tol.rel * y0[i].abs().max(y1[i].abs()))
    }
}

/// Zero of `y[component] - level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub component: usize,
    pub level: f64,
}

impl Event {
    fn value<const D: usize>(&self, y: &[f64; D]) -> f64 {
        y[self.component] - self.level
    }
}

/// Stop after the `count`-th occurrence of event `event`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub event: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tol: Tolerances,
    pub max_steps: usize,
    pub h_init: Option<f64>,
    pub h_max: f64,
}

impl IntegratorOptions {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_steps: 2_000_000,
            h_init: None,
            h_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const D: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; D],
}

/// Quartic interpolant over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<const D: usize> {
    pub t0: f64,
    pub h: f64,
    c: [[f64; D]; 5],
}

impl<const D: usize> DenseSegment<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.bounds();
        t >= a && t <= b
    }

    pub fn bounds(&self) -> (f64, f64) {
        let t1 = self.t1();
        (self.t0.min(t1), self.t0.max(t1))
    }

    pub fn eval(&self, t: f64) -> [f64; D] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.c;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }

    pub fn eval_derivative(&self, t: f64) -> [f64; D] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.c;
        std::array::from_fn(|i| {
            (c[1][i]
                + (1.0 - 2.0 * s) * c[2][i]
                + s * (2.0 - 3.0 * s) * c[3][i]
                + 2.0 * s * s1 * (1.0 - 2.0 * s) * c[4][i])
                / self.h
        })
    }
}

#[derive(Debug, Clone)]
pub struct Solution<const D: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; D]>,
    pub segments: Vec<DenseSegment<D>>,
    pub events: Vec<EventHit<D>>,
    /// True if a stop rule ended the integration before `t_end`.
    pub stopped: bool,
    pub rejected: usize,
}

impl<const D: usize> Solution<D> {
    pub fn last(&self) -> (f64, [f64; D]) {
        (*self.ts.last().unwrap(), *self.ys.last().unwrap())
    }

    /// Dense evaluation anywhere in the integrated range.
    pub fn eval(&self, t: f64) -> Option<[f64; D]> {
        self.segment_at(t).map(|seg| seg.eval(t))
    }

    pub fn eval_derivative(&self, t: f64) -> Option<[f64; D]> {
        self.segment_at(t).map(|seg| seg.eval_derivative(t))
    }

    pub fn segment_at(&self, t: f64) -> Option<&DenseSegment<D>> {
        if self.segments.is_empty() {
            return None;
        }
        let forward = self.segments[0].h > 0.0;
        // segments are ordered along the direction of integration
        let idx = self
            .segments
            .partition_point(|seg| if forward { seg.t1() < t } else { seg.t1() > t });
        let seg = self.segments.get(idx)?;
        seg.contains(t).then_some(seg)
    }
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FACC1: f64 = 1.0 / 0.2;
const FACC2: f64 = 1.0 / 10.0;

const EVENT_TOL: f64 = 1e-12;
const EVENT_SUBDIVISIONS: usize = 4;

fn combo<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn rms<const D: usize>(v: &[f64; D], sc: &[f64; D]) -> f64 {
    let s: f64 = v.iter().zip(sc).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / D as f64).sqrt()
}

struct Step<const D: usize> {
    y1: [f64; D],
    k7: [f64; D],
    err: f64,
    seg: DenseSegment<D>,
}

fn try_step<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
    tol: &Tolerances,
) -> Result<Step<D>> {
    let k2 = sys.rhs(t + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rhs(
        t + C4 * h,
        &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = sys.rhs(
        t + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &combo(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y1 = combo(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = sys.rhs(t + h, &y1)?;
    let e: [f64; D] = combo(
        &[0.0; D],
        h,
        &[
            (E1, k1),
            (E3, &k3),
            (E4, &k4),
            (E5, &k5),
            (E6, &k6),
            (E7, &k7),
        ],
    );
    let sc = sys.error_weights(y, &y1, tol);
    let err = rms(&e, &sc);

    let c1 = *y;
    let c2: [f64; D] = std::array::from_fn(|i| y1[i] - y[i]);
    let c3: [f64; D] = std::array::from_fn(|i| h * k1[i] - c2[i]);
    let c4: [f64; D] = std::array::from_fn(|i| c2[i] - h * k7[i] - c3[i]);
    let c5 = combo(
        &[0.0; D],
        h,
        &[
            (D1, k1),
            (D3, &k3),
            (D4, &k4),
            (D5, &k5),
            (D6, &k6),
            (D7, &k7),
        ],
    );
    Ok(Step {
        y1,
        k7,
        err,
        seg: DenseSegment {
            t0: t,
            h,
            c: [c1, c2, c3, c4, c5],
        },
    })
}

fn initial_step<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t: f64,
    y: &[f64; D],
    f0: &[f64; D],
    dir: f64,
    opts: &IntegratorOptions,
    span: f64,
) -> f64 {
    let sc = sys.error_weights(y, y, &opts.tol);
    let d0 = rms(y, &sc);
    let d1 = rms(f0, &sc);
    let mut h0 = if d0 <= 1e-10 || d1 <= 1e-10 {
        1e-6 * span.max(f64::MIN_POSITIVE)
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(opts.h_max).min(span);
    // the explicit Euler probe may leave the domain of the rhs
    for _ in 0..60 {
        let y1 = combo(y, dir * h0, &[(1.0, f0)]);
        if let Ok(f1) = sys.rhs(t + dir * h0, &y1) {
            let diff: [f64; D] = std::array::from_fn(|i| f1[i] - f0[i]);
            let d2 = rms(&diff, &sc) / h0;
            let der12 = d2.abs().max(d1);
            let h1 = if der12 <= 1e-15 {
                (h0 * 1e-3).max(1e-6 * span)
            } else {
                (0.01 / der12).powf(0.2)
            };
            return (100.0 * h0).min(h1).min(opts.h_max).min(span);
        }
        h0 *= 0.25;
    }
    h0
}

/// Integrate from `(t0, y0)` to `t_end`, locating zeros of the given events.
pub fn integrate<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    events: &[Event],
    stop: Option<StopRule>,
    opts: &IntegratorOptions,
) -> Result<Solution<D>> {
    opts.tol.validate()?;
    if !(t0.is_finite() && t_end.is_finite()) || y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite initial data".into()));
    }
    let mut sol = Solution {
        ts: vec![t0],
        ys: vec![y0],
        segments: Vec::new(),
        events: Vec::new(),
        stopped: false,
        rejected: 0,
    };
    if t_end == t0 {
        return Ok(sol);
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y)?;
    let mut h = match opts.h_init {
        Some(h) => h.abs().min(span),
        None => initial_step(sys, t, &y, &k1, dir, opts, span),
    };
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut counts = vec![0usize; events.len()];
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let h_min = (16.0 * f64::EPSILON * t.abs()).max(f64::MIN_POSITIVE);
        if h < h_min {
            return Err(Error::StepUnderflow {
                t,
                h,
                last: y.to_vec(),
            });
        }
        let last_step = (t + dir * h - t_end) * dir >= 0.0;
        let h_signed = if last_step { t_end - t } else { dir * h };

        let step = match try_step(sys, t, &y, &k1, h_signed, &opts.tol) {
            Ok(step) if step.err.is_finite() => step,
            Ok(_) => {
                h *= 0.25;
                sol.rejected += 1;
                last_rejected = true;
                continue;
            }
            Err(e) => {
                h *= 0.25;
                sol.rejected += 1;
                last_rejected = true;
                if h < h_min {
                    return Err(e);
                }
                continue;
            }
        };
        steps += 1;

        let fac11 = step.err.powf(EXPO1);
        if step.err <= 1.0 {
            let mut fac = fac11 / facold.powf(BETA);
            fac = FACC2.max(FACC1.min(fac / SAFE));
            let mut hnew = h_signed.abs() / fac;
            if last_rejected {
                hnew = hnew.min(h_signed.abs());
            }
            facold = step.err.max(1e-4);
            last_rejected = false;

            let t_new = if last_step { t_end } else { t + h_signed };
            let seg = step.seg;
            let hits = locate_events(&seg, events, &y, &step.y1)?;
            sol.segments.push(seg);

            for hit in hits {
                if let Some(prev) = sol.events.last() {
                    if prev.index != hit.index
                        && (prev.t - hit.t).abs() < EVENT_TOL * prev.t.abs().max(1.0)
                    {
                        return Err(Error::DegenerateEvent { r: hit.t });
                    }
                }
                counts[hit.index] += 1;
                sol.events.push(hit);
                if let Some(rule) = stop {
                    if rule.event == hit.index && counts[hit.index] >= rule.count {
                        *sol.segments.last_mut().unwrap() = rescale(&seg, hit.t);
                        sol.ts.push(hit.t);
                        sol.ys.push(hit.y);
                        sol.stopped = true;
                        return Ok(sol);
                    }
                }
            }

            t = t_new;
            y = step.y1;
            k1 = step.k7;
            sol.ts.push(t);
            sol.ys.push(y);
            if last_step {
                return Ok(sol);
            }
            h = hnew.min(opts.h_max);
        } else {
            h = h_signed.abs() / FACC1.min(fac11 / SAFE);
            sol.rejected += 1;
            last_rejected = true;
        }
    }
}

/// The same quartic, reparametrized over the shortened step `[t0, t_cut]`.
fn rescale<const D: usize>(seg: &DenseSegment<D>, t_cut: f64) -> DenseSegment<D> {
    // five conditions pin the restricted quartic down exactly
    let h_new = t_cut - seg.t0;
    if h_new == 0.0 {
        return DenseSegment {
            t0: seg.t0,
            h: seg.h,
            c: seg.c,
        };
    }
    let y0 = seg.eval(seg.t0);
    let y1 = seg.eval(t_cut);
    let f0 = seg.eval_derivative(seg.t0);
    let f1 = seg.eval_derivative(t_cut);
    let ym = seg.eval(seg.t0 + 0.5 * h_new);
    let c1 = y0;
    let c2: [f64; D] = std::array::from_fn(|i| y1[i] - y0[i]);
    let c3: [f64; D] = std::array::from_fn(|i| h_new * f0[i] - c2[i]);
    let c4: [f64; D] = std::array::from_fn(|i| c2[i] - h_new * f1[i] - c3[i]);
    // at s = 1/2: y = c1 + c2/2 + c3/4 + c4/8 + c5/16
    let c5: [f64; D] = std::array::from_fn(|i| {
        16.0 * (ym[i] - c1[i] - 0.5 * c2[i] - 0.25 * c3[i] - 0.125 * c4[i])
    });
    DenseSegment {
        t0: seg.t0,
        h: h_new,
        c: [c1, c2, c3, c4, c5],
    }
}

fn locate_events<const D: usize>(
    seg: &DenseSegment<D>,
    events: &[Event],
    y0: &[f64; D],
    y1: &[f64; D],
) -> Result<Vec<EventHit<D>>> {
    let mut hits = Vec::new();
    if events.is_empty() {
        return Ok(hits);
    }
    let nodes: Vec<f64> = (0..=EVENT_SUBDIVISIONS)
        .map(|k| seg.t0 + seg.h * k as f64 / EVENT_SUBDIVISIONS as f64)
        .collect();
    let states: Vec<[f64; D]> = nodes
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k == 0 {
                *y0
            } else if k == EVENT_SUBDIVISIONS {
                *y1
            } else {
                seg.eval(t)
            }
        })
        .collect();
    for (index, ev) in events.iter().enumerate() {
        for k in 0..EVENT_SUBDIVISIONS {
            let ga = ev.value(&states[k]);
            let gb = ev.value(&states[k + 1]);
            if ga == 0.0 || !(gb == 0.0 || ga.signum() != gb.signum()) {
                continue;
            }
            let t = polish(seg, ev, nodes[k], nodes[k + 1], ga)?;
            let y = if gb == 0.0 && t == nodes[k + 1] {
                states[k + 1]
            } else {
                seg.eval(t)
            };
            hits.push(EventHit { index, t, y });
        }
    }
    let forward = seg.h > 0.0;
    hits.sort_by(|a, b| {
        if forward {
            a.t.total_cmp(&b.t)
        } else {
            b.t.total_cmp(&a.t)
        }
    });
    Ok(hits)
}

fn polish<const D: usize>(
    seg: &DenseSegment<D>,
    ev: &Event,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
) -> Result<f64> {
    let scale = ev.level.abs().max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let gm = ev.value(&seg.eval(mid));
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let mut t = 0.5 * (a + b);
    let g = ev.value(&seg.eval(t));
    let dg = seg.eval_derivative(t)[ev.component];
    if dg != 0.0 && dg.is_finite() {
        let tn = t - g / dg;
        if tn >= lo && tn <= hi && ev.value(&seg.eval(tn)).abs() <= g.abs() {
            t = tn;
        }
    }
    let residual = ev.value(&seg.eval(t)).abs();
    let width = hi - lo;
    if residual <= EVENT_TOL * scale || width <= 8.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
        Ok(t)
    } else {
        Err(Error::EventPolish { t, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Harmonic;
    impl OdeSystem<2> for Harmonic {
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
            Ok([y[1], -y[0]])
        }
    }

    struct Decay;
    impl OdeSystem<1> for Decay {
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
            Ok([-y[0]])
        }
    }

    struct PositiveOnly;
    impl OdeSystem<1> for PositiveOnly {
        fn rhs(&self, t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
            if y[0] <= 0.0 {
                return Err(Error::NonPositive { r: t, u: y[0] });
            }
            Ok([-1.0])
        }
    }

    fn opts(tol: f64) -> IntegratorOptions {
        IntegratorOptions::new(Tolerances::uniform(tol))
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let sol = integrate(&Harmonic, 0.0, [1.0, 0.0], 10.0, &[], None, &opts(1e-11)).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 10.0);
        assert_relative_eq!(y[0], 10f64.cos(), epsilon = 1e-9);
        assert_relative_eq!(y[1], -10f64.sin(), epsilon = 1e-9);
    }

    #[test]
    fn dense_output_matches_exact() {
        let sol = integrate(&Harmonic, 0.0, [1.0, 0.0], 6.0, &[], None, &opts(1e-11)).unwrap();
        for k in 0..=600 {
            let t = 0.01 * k as f64;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
            let dy = sol.eval_derivative(t).unwrap();
            assert!((dy[0] + t.sin()).abs() < 1e-6, "t = {t}");
        }
        assert!(sol.eval(6.5).is_none());
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(&Decay, 2.0, [1.0], 0.0, &[], None, &opts(1e-12)).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 0.0);
        assert_relative_eq!(y[0], 2f64.exp(), max_relative = 1e-10);
        let mid = sol.eval(1.0).unwrap();
        assert_relative_eq!(mid[0], 1f64.exp(), max_relative = 1e-9);
    }

    #[test]
    fn events_located_precisely() {
        let zero = Event {
            component: 0,
            level: 0.0,
        };
        let peak = Event {
            component: 1,
            level: 0.0,
        };
        let sol = integrate(
            &Harmonic,
            0.0,
            [1.0, 0.0],
            10.0,
            &[zero, peak],
            None,
            &opts(1e-12),
        )
        .unwrap();
        let zeros: Vec<f64> = sol
            .events
            .iter()
            .filter(|e| e.index == 0)
            .map(|e| e.t)
            .collect();
        let peaks: Vec<f64> = sol
            .events
            .iter()
            .filter(|e| e.index == 1)
            .map(|e| e.t)
            .collect();
        let pi = std::f64::consts::PI;
        assert_eq!(zeros.len(), 3);
        assert_eq!(peaks.len(), 3);
        for (k, t) in zeros.iter().enumerate() {
            assert!((t - (k as f64 + 0.5) * pi).abs() < 1e-10);
        }
        for (k, t) in peaks.iter().enumerate() {
            assert!((t - (k as f64 + 1.0) * pi).abs() < 1e-10);
        }
        assert!(sol.events.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn stop_rule_truncates() {
        let zero = Event {
            component: 0,
            level: 0.0,
        };
        let sol = integrate(
            &Harmonic,
            0.0,
            [1.0, 0.0],
            100.0,
            &[zero],
            Some(StopRule { event: 0, count: 2 }),
            &opts(1e-12),
        )
        .unwrap();
        assert!(sol.stopped);
        let (t, y) = sol.last();
        assert!((t - 1.5 * std::f64::consts::PI).abs() < 1e-10);
        assert!(y[0].abs() < 1e-10);
        let seg = sol.segments.last().unwrap();
        assert!((seg.t1() - t).abs() < 1e-12);
        let inside = 0.5 * (seg.t0 + t);
        assert!((sol.eval(inside).unwrap()[0] - inside.cos()).abs() < 1e-8);
    }

    #[test]
    fn rhs_failure_shrinks_then_reports() {
        let err = integrate(&PositiveOnly, 0.0, [1.0], 2.0, &[], None, &opts(1e-8)).unwrap_err();
        assert!(matches!(err, Error::NonPositive { .. }));
    }

    #[test]
    fn equilibrium_has_no_events() {
        let ev = Event {
            component: 0,
            level: 0.0,
        };
        let sol = integrate(&Harmonic, 0.0, [0.0, 0.0], 5.0, &[ev], None, &opts(1e-10)).unwrap();
        assert!(sol.events.is_empty());
        assert_eq!(sol.last().1, [0.0, 0.0]);
    }

    #[test]
    fn convergence_order() {
        let errors: Vec<f64> = [1e-6, 1e-7, 1e-8]
            .iter()
            .map(|&tol| {
                let mut o = opts(tol);
                o.h_init = Some(0.1);
                let sol = integrate(&Harmonic, 0.0, [1.0, 0.0], 20.0, &[], None, &o).unwrap();
                let y = sol.last().1;
                ((y[0] - 20f64.cos()).powi(2) + (y[1] + 20f64.sin()).powi(2)).sqrt()
            })
            .collect();
        // tolerance proportionality: a tenfold tighter tolerance buys a
        // substantial error reduction
        assert!(errors[1] < errors[0] / 3.0);
        assert!(errors[2] < errors[1] / 3.0);
    }

    #[test]
    fn fixed_step_order_is_five() {
        let tol = Tolerances::uniform(1.0);
        let run = |n: usize| {
            let h = 2.0 / n as f64;
            let mut y = [1.0, 0.0];
            let mut t = 0.0;
            for _ in 0..n {
                let k1 = Harmonic.rhs(t, &y).unwrap();
                y = try_step(&Harmonic, t, &y, &k1, h, &tol).unwrap().y1;
                t += h;
            }
            (y[0] - 2f64.cos()).abs()
        };
        let ratio = run(40) / run(80);
        assert!(ratio > 26.0 && ratio < 38.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(Tolerances::new(0.0, 1e-8).is_err());
        assert!(Tolerances::new(1e-8, f64::NAN).is_err());
    }
}
