//! Closed-form constants of the radial problem: exponent thresholds, the
//! Emden-Fowler scaling constants, regime classification and the scalar
//! kernels shared by the solvers.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper end of the exponent range used when `c~` is chosen without an
/// explicit range.
pub const DEFAULT_P_CAP: f64 = 1.0e4;

/// Problem instance: dimension, exponent and (optionally) the ball radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        let params = Self { n, p, radius: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_radius(n: u32, p: f64, radius: f64) -> Result<Self> {
        let params = Self {
            n,
            p,
            radius: Some(radius),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let ps = critical_exponent(self.n)?;
        if !(self.p.is_finite() && self.p > ps) {
            return Err(Error::InvalidParams(format!(
                "p = {} must exceed the critical exponent {} for N = {}",
                self.p, ps, self.n
            )));
        }
        if let Some(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParams(format!("R = {r} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        f64::from(self.n)
    }
}

/// The Joseph-Lundgren exponent. Infinite for `3 <= N <= 10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JlExponent {
    Finite(f64),
    Infinite,
}

impl JlExponent {
    pub fn is_infinite(&self) -> bool {
        matches!(self, JlExponent::Infinite)
    }

    pub fn value(&self) -> f64 {
        match *self {
            JlExponent::Finite(v) => v,
            JlExponent::Infinite => f64::INFINITY,
        }
    }

    /// `p < p_JL`.
    pub fn is_above(&self, p: f64) -> bool {
        match *self {
            JlExponent::Finite(v) => p < v,
            JlExponent::Infinite => true,
        }
    }
}

impl fmt::Display for JlExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JlExponent::Finite(v) => write!(f, "{v}"),
            JlExponent::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for JlExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            JlExponent::Finite(v) => s.serialize_f64(v),
            JlExponent::Infinite => s.serialize_str("infinity"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Oscillatory,
    NonOscillatory,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    #[serde(skip)]
    pub n: u32,
    #[serde(skip)]
    pub p: f64,
    pub theta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "Dp")]
    pub dp: f64,
    #[serde(rename = "pS")]
    pub ps: f64,
    #[serde(rename = "pJL")]
    pub pjl: JlExponent,
    pub regime: Regime,
}

impl DerivedConstants {
    /// `p * theta * (N - 2 - theta)`, the limit of `r^2 p u^{p-1}` at the origin.
    pub fn hardy_limit(&self) -> f64 {
        self.p / (self.m * self.m)
    }

    /// The Hardy constant `(N-2)^2 / 4`.
    pub fn hardy_constant(&self) -> f64 {
        let k = f64::from(self.n) - 2.0;
        0.25 * k * k
    }

    /// Signed discriminant `p - 1 - (alpha/2)^2`.
    pub fn discriminant(&self) -> f64 {
        let half = 0.5 * self.alpha;
        self.p - 1.0 - half * half
    }
}

pub fn critical_exponent(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("N = {n} must be at least 3")));
    }
    let n = f64::from(n);
    Ok((n + 2.0) / (n - 2.0))
}

pub fn joseph_lundgren(n: u32) -> Result<JlExponent> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("N = {n} must be at least 3")));
    }
    if n <= 10 {
        return Ok(JlExponent::Infinite);
    }
    let nf = f64::from(n);
    Ok(JlExponent::Finite(
        1.0 + 4.0 / (nf - 4.0 - 2.0 * (nf - 1.0).sqrt()),
    ))
}

pub fn derive_constants(params: &ProblemParams) -> Result<DerivedConstants> {
    params.validate()?;
    closed_form_constants(params.n, params.p)
}

/// The closed forms without the supercriticality check. They only need
/// `theta < N - 2`, i.e. `p > N/(N-2)`; hand-checkable cases such as
/// `(N, p) = (4, 3)` sit exactly at the critical exponent.
pub fn closed_form_constants(n_dim: u32, p: f64) -> Result<DerivedConstants> {
    critical_exponent(n_dim)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
    }
    let n = f64::from(n_dim);
    let theta = 2.0 / (p - 1.0);
    if theta >= n - 2.0 {
        return Err(Error::InvalidParams(format!(
            "theta = {theta} >= N - 2 leaves A undefined"
        )));
    }
    let base = theta * (n - 2.0 - theta);
    let a = base.powf(1.0 / (p - 1.0));
    let m = base.powf(-0.5);
    let alpha = m * (n - 2.0 - 2.0 * theta);
    let half = 0.5 * alpha;
    let disc = p - 1.0 - half * half;
    let beta = disc.abs().sqrt();
    let dp = m * m / (4.0 * m * m + 2.0 * alpha * m + (p - 1.0));
    let regime = if disc > 0.0 {
        Regime::Oscillatory
    } else if disc < 0.0 {
        Regime::NonOscillatory
    } else {
        Regime::Degenerate
    };
    if n_dim == 10 {
        log::debug!(
            "N = 10: generic beta = {beta}, special display value = {}",
            beta_n10_display(p)
        );
    }
    Ok(DerivedConstants {
        n: n_dim,
        p,
        theta,
        a,
        m,
        alpha,
        beta,
        dp,
        ps: critical_exponent(n_dim)?,
        pjl: joseph_lundgren(n_dim)?,
        regime,
    })
}

/// The `N = 10` specialisation of `beta`. Solvers always use the generic
/// closed form; this only serves as a cross-check.
pub fn beta_n10_display(p: f64) -> f64 {
    ((3.0 * (p - 1.0) - 1.0) / (4.0 * (p - 1.0) - 1.0)).sqrt()
}

/// Limits of the scaling constants as `p -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticLimits {
    /// `lim beta / sqrt(p)`; zero at `N = 10`, where `beta` itself stays bounded.
    pub beta_over_sqrt_p: f64,
    pub p_theta: f64,
    pub a: f64,
    pub alpha_over_sqrt_p: f64,
    pub m_over_sqrt_p: f64,
    pub dp: f64,
}

pub fn asymptotic_limits(n: u32) -> Result<AsymptoticLimits> {
    critical_exponent(n)?;
    let nf = f64::from(n);
    Ok(AsymptoticLimits {
        beta_over_sqrt_p: (1.0 - (nf - 2.0) / 8.0).abs().sqrt(),
        p_theta: 2.0,
        a: 1.0,
        alpha_over_sqrt_p: ((nf - 2.0) / 2.0).sqrt(),
        m_over_sqrt_p: 1.0 / (2.0 * (nf - 2.0)).sqrt(),
        dp: 1.0 / (4.0 * (nf - 1.0)),
    })
}

/// Kernel of `eta'' - alpha eta' + (p-1) eta` on the half line.
pub fn green_kernel(x: f64, c: &DerivedConstants) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let damp = (-0.5 * c.alpha * x).exp();
    match c.regime {
        Regime::Degenerate => Ok(x * damp),
        _ if c.beta == 0.0 => Err(Error::InvalidParams(
            "beta = 0 outside the degenerate regime".into(),
        )),
        Regime::Oscillatory => Ok(damp * (c.beta * x).sin() / c.beta),
        Regime::NonOscillatory => Ok(damp * (c.beta * x).sinh() / c.beta),
    }
}

/// `phi(eta) = -((1+eta)^p - 1 - p eta)`, evaluated without cancellation for
/// small `eta`.
pub fn phi_nonlinearity(eta: f64, p: f64) -> Result<f64> {
    if !(1.0 + eta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "phi needs 1 + eta > 0, got eta = {eta}"
        )));
    }
    if eta.abs() < 1e-3 && (p * eta).abs() < 1e-3 {
        // binomial series from the quadratic term on
        let mut term = p * eta;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            term *= (p - k) / (k + 1.0) * eta;
            sum += term;
            k += 1.0;
            if term.abs() <= 1e-18 * sum.abs() || k > 40.0 {
                break;
            }
        }
        return Ok(-sum);
    }
    Ok(-((p * eta.ln_1p()).exp_m1() - p * eta))
}

/// `f(zeta) = D_p e^{-2 m zeta}`.
pub fn f_envelope(zeta: f64, c: &DerivedConstants) -> f64 {
    c.dp * (-2.0 * c.m * zeta).exp()
}

/// `P_N` together with the threshold it has to stay below.
pub fn compute_pn(c: &DerivedConstants, ctilde: f64) -> Result<(f64, f64)> {
    if !(ctilde > 0.0 && ctilde < 1.0) {
        return Err(Error::InvalidParams(format!(
            "c~ = {ctilde} must lie in (0, 1)"
        )));
    }
    let p = c.p;
    let k = c.dp * ctilde * ctilde;
    if k > 1.0 {
        return Err(Error::InvalidParams(format!("D_p c~^2 = {k} exceeds 1")));
    }
    let f = k / p;
    let ratio = phi_nonlinearity(f, p)?.abs() / f;
    let (alpha, m, beta) = (c.alpha, c.m, c.beta);
    // complex characteristic roots: the form stated for low dimensions
    if c.regime != Regime::NonOscillatory {
        let decay = if beta > 0.0 {
            (-(alpha + 8.0 * m) * std::f64::consts::PI / (2.0 * beta)).exp()
        } else {
            0.0
        };
        let s = alpha + 8.0 * m;
        let pn = ratio * 4.0 / (s * s + 4.0 * beta * beta) * (1.0 + decay);
        let threshold = 0.5 * (1.0 - decay) / (1.0 + decay);
        Ok((pn, threshold))
    } else {
        let denom = 2.0 * beta * (0.5 * alpha + 4.0 * m - beta);
        if !(denom > 0.0) {
            return Err(Error::InvalidParams(format!(
                "P_N denominator {denom} is not positive"
            )));
        }
        Ok((ratio / denom, 0.5))
    }
}

/// Result of the `c~` search with the worst margin `threshold - P_N` seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CtildeChoice {
    pub ctilde: f64,
    pub worst_margin: f64,
}

type CtildeKey = (u32, u64, u64);

fn ctilde_cache() -> &'static Mutex<HashMap<CtildeKey, CtildeChoice>> {
    static CACHE: OnceLock<Mutex<HashMap<CtildeKey, CtildeChoice>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest `c~` in `{2^-1, ..., 2^-20}` for which `P_N` stays below its
/// threshold at 32 log-spaced exponents in `p_range`.
pub fn choose_ctilde(n: u32, p_range: (f64, f64)) -> Result<CtildeChoice> {
    let ps = critical_exponent(n)?;
    let (lo, hi) = p_range;
    if !(lo > ps && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "p range [{lo}, {hi}] must lie above p_S = {ps}"
        )));
    }
    let key = (n, lo.to_bits(), hi.to_bits());
    if let Some(hit) = ctilde_cache().lock().unwrap().get(&key) {
        return Ok(*hit);
    }

    let samples: Vec<DerivedConstants> = log_grid(lo, hi, 32)
        .into_iter()
        .map(|p| derive_constants(&ProblemParams { n, p, radius: None }))
        .collect::<Result<_>>()?;

    let mut found = None;
    for k in 1..=20 {
        let ct = 0.5_f64.powi(k);
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for c in &samples {
            match compute_pn(c, ct) {
                Ok((pn, thr)) if pn < thr => worst = worst.min(thr - pn),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            found = Some(CtildeChoice {
                ctilde: ct,
                worst_margin: worst,
            });
            break;
        }
    }
    let choice = found.ok_or(Error::NoFeasibleCtilde {
        n,
        p_lo: lo,
        p_hi: hi,
    })?;
    ctilde_cache().lock().unwrap().insert(key, choice);
    Ok(choice)
}

/// `c~` over the default range `[1.001 p_S, DEFAULT_P_CAP]`.
pub fn default_ctilde(n: u32) -> Result<f64> {
    let ps = critical_exponent(n)?;
    Ok(choose_ctilde(n, (ps * 1.001, DEFAULT_P_CAP))?.ctilde)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaConstants {
    pub ctilde: f64,
    pub rtilde_p: f64,
    pub zetatilde_p: f64,
    #[serde(rename = "PN")]
    pub pn: f64,
    #[serde(rename = "PN_threshold")]
    pub pn_threshold: f64,
}

impl LemmaConstants {
    pub fn new(c: &DerivedConstants, ctilde: f64) -> Result<Self> {
        let (pn, pn_threshold) = compute_pn(c, ctilde)?;
        let rtilde_p = ctilde / c.p.sqrt();
        Ok(Self {
            ctilde,
            rtilde_p,
            zetatilde_p: -rtilde_p.ln() / c.m,
            pn,
            pn_threshold,
        })
    }

    pub fn for_params(c: &DerivedConstants) -> Result<Self> {
        Self::new(c, default_ctilde(c.n)?)
    }
}

pub(crate) fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 || hi == lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn consts(n: u32, p: f64) -> DerivedConstants {
        closed_form_constants(n, p).unwrap()
    }

    #[test]
    fn critical_exponent_values() {
        assert_eq!(critical_exponent(3).unwrap(), 5.0);
        assert_eq!(critical_exponent(4).unwrap(), 3.0);
        assert_eq!(critical_exponent(6).unwrap(), 2.0);
        assert!(critical_exponent(2).is_err());
    }

    #[test]
    fn joseph_lundgren_sentinel_and_values() {
        for n in 3..=10 {
            assert!(joseph_lundgren(n).unwrap().is_infinite());
        }
        assert!(joseph_lundgren(2).is_err());
        // 1 + 4/(7 - 2 sqrt 10) and 1 + 4/(8 - 2 sqrt 11) in 30-digit arithmetic
        assert_relative_eq!(
            joseph_lundgren(11).unwrap().value(),
            6.922_024_586_816_337,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            joseph_lundgren(12).unwrap().value(),
            3.926_649_916_142_16,
            max_relative = 1e-13
        );
        assert!(JlExponent::Infinite.is_above(1e300));
        assert!(!JlExponent::Finite(3.9).is_above(5.0));
    }

    #[test]
    fn constants_n4_p3() {
        let c = consts(4, 3.0);
        assert_relative_eq!(c.theta, 1.0);
        assert_relative_eq!(c.a, 1.0);
        assert_relative_eq!(c.m, 1.0);
        assert_relative_eq!(c.alpha, 0.0);
        assert_relative_eq!(c.beta, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.dp, 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(c.regime, Regime::Oscillatory);
    }

    #[test]
    fn constants_n12_p5() {
        let c = consts(12, 5.0);
        assert_relative_eq!(c.theta, 0.5);
        // m = 19^{-1/2} * 2, alpha = m * 9
        assert_relative_eq!(c.alpha, 18.0 / 19f64.sqrt(), epsilon = 1e-14);
        assert!((0.25 * c.alpha * c.alpha - 4.263_157_894_736_842).abs() < 1e-12);
        assert_eq!(c.regime, Regime::NonOscillatory);
    }

    #[test]
    fn regime_for_large_p_follows_dimension() {
        for p in [1e3, 1e5] {
            assert_eq!(consts(10, p).regime, Regime::Oscillatory);
            assert_eq!(consts(12, p).regime, Regime::NonOscillatory);
        }
    }

    #[test]
    fn rejects_subcritical() {
        assert!(ProblemParams::new(4, 3.0).is_err());
        assert!(derive_constants(&ProblemParams {
            n: 4,
            p: 3.0,
            radius: None
        })
        .is_err());
        assert!(closed_form_constants(4, 2.0).is_err());
        assert!(ProblemParams::new(5, 7.0 / 3.0).is_err());
        assert!(ProblemParams::new(5, 2.0).is_err());
        assert!(ProblemParams::with_radius(5, 10.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_values() {
        assert_relative_eq!(asymptotic_limits(5).unwrap().dp, 1.0 / 16.0);
        assert_relative_eq!(asymptotic_limits(10).unwrap().alpha_over_sqrt_p, 2.0);
        assert_eq!(asymptotic_limits(10).unwrap().beta_over_sqrt_p, 0.0);
        for n in 3..20 {
            assert_eq!(asymptotic_limits(n).unwrap().p_theta, 2.0);
        }
    }

    #[test]
    fn n10_specialisation_matches_generic_beta() {
        for p in [1.6, 3.0, 100.0, 1e5] {
            let c = consts(10, p);
            assert_relative_eq!(c.beta, beta_n10_display(p), max_relative = 1e-10);
        }
        assert_relative_eq!(consts(10, 1e8).beta, 0.75f64.sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn green_kernel_cases() {
        let c = consts(4, 3.0);
        assert_eq!(green_kernel(-1.0, &c).unwrap(), 0.0);
        assert_eq!(green_kernel(0.0, &c).unwrap(), 0.0);
        let x = std::f64::consts::PI / (2.0 * c.beta);
        assert_relative_eq!(green_kernel(x, &c).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let nonosc = consts(12, 5.0);
        assert_eq!(green_kernel(0.0, &nonosc).unwrap(), 0.0);
        assert!(green_kernel(0.3, &nonosc).unwrap() > 0.0);
        let mut degenerate = c;
        degenerate.regime = Regime::Degenerate;
        assert_relative_eq!(green_kernel(2.0, &degenerate).unwrap(), 2.0);
        let mut broken = c;
        broken.beta = 0.0;
        assert!(green_kernel(1.0, &broken).is_err());
    }

    #[test]
    fn green_kernel_nonnegative_on_first_lobe() {
        for (n, p) in [(3, 6.0), (5, 10.0), (9, 40.0)] {
            let c = consts(n, p);
            assert_eq!(c.regime, Regime::Oscillatory);
            let end = std::f64::consts::PI / c.beta;
            for k in 0..=200 {
                let x = end * k as f64 / 200.0;
                assert!(green_kernel(x, &c).unwrap() >= -1e-15);
            }
            assert!(green_kernel(1e-12, &c).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_nonlinearity(0.0, 7.0).unwrap(), 0.0);
        assert_relative_eq!(phi_nonlinearity(0.1, 3.0).unwrap(), -0.031, epsilon = 1e-15);
        assert!(phi_nonlinearity(-1.0, 3.0).is_err());
        // 40-digit references on both sides of the series switch
        assert_relative_eq!(
            phi_nonlinearity(1.999e-4, 5.0).unwrap(),
            -3.996_799_880_443_212e-7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            phi_nonlinearity(1e-5, 7.0).unwrap(),
            -2.100_035_000_350_002e-9,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            phi_nonlinearity(0.3, 12.0).unwrap(),
            -18.698_085_122_481,
            max_relative = 1e-12
        );
    }

    #[test]
    fn phi_bounded_by_exponential_limit() {
        for p in [3.0, 10.0, 100.0, 1e4] {
            for i in 1..=20 {
                let k = i as f64 / 20.0;
                let lhs = phi_nonlinearity(k / p, p).unwrap().abs();
                assert!(lhs <= k.exp() - k - 1.0 + 1e-15, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn f_envelope_values() {
        let c = consts(4, 3.0);
        assert_relative_eq!(f_envelope(0.0, &c), 1.0 / 6.0);
        assert!(f_envelope(100.0, &c) < 1e-80);
        assert!(f_envelope(1.0, &c) < f_envelope(0.5, &c));
    }

    #[test]
    fn pn_threshold_and_scaling() {
        for (n, p) in [(5, 50.0), (9, 12.0), (10, 30.0), (12, 5.0), (12, 3.0)] {
            let c = consts(n, p);
            let (pn, thr) = compute_pn(&c, 0.5).unwrap();
            assert!(thr <= 0.5);
            assert!(pn < thr);
            let (half, _) = compute_pn(&c, 0.25).unwrap();
            assert!(half < 0.5 * pn);
        }
        assert!(compute_pn(&consts(5, 10.0), 1.0).is_err());
        assert!(compute_pn(&consts(5, 10.0), 0.0).is_err());
    }

    #[test]
    fn ctilde_search() {
        let choice = choose_ctilde(5, (20.0, 1e4)).unwrap();
        assert!(choice.ctilde > 0.0 && choice.ctilde < 1.0);
        assert!(choice.worst_margin > 0.0);
        assert_eq!(choice.ctilde, 0.5);
        let wider = choose_ctilde(5, (7.0 / 3.0 + 0.01, 1e4)).unwrap();
        assert!(wider.ctilde <= choice.ctilde);
        assert!(choose_ctilde(5, (2.0, 10.0)).is_err());
    }

    #[test]
    fn lemma_relations() {
        let c = consts(5, 50.0);
        let lc = LemmaConstants::for_params(&c).unwrap();
        assert_relative_eq!(
            lc.rtilde_p,
            (-c.m * lc.zetatilde_p).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            f_envelope(lc.zetatilde_p, &c),
            c.dp * lc.ctilde * lc.ctilde / c.p,
            max_relative = 1e-13
        );
        assert!(lc.pn < lc.pn_threshold);
    }

    #[test]
    fn constants_serialize_with_expected_names() {
        let v = serde_json::to_value(consts(5, 10.0)).unwrap();
        for key in [
            "theta", "A", "m", "alpha", "beta", "Dp", "pS", "pJL", "regime",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["pJL"], "infinity");
        assert_eq!(v["regime"], "OSCILLATORY");
        let v12 = serde_json::to_value(consts(12, 5.0)).unwrap();
        assert!(v12["pJL"].is_f64());
    }
}
