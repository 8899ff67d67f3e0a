//! Geodesic flow of the quotient metric: integration with conserved-quantity
//! monitoring, `r = const` torus geodesics, closure detection.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::metric::{gcd, QuotientMetric, CORE_DELTA};
use crate::ode::{self, Control, Options};
use crate::quotient::angle_difference;

pub const DEFAULT_ODE_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_DRIFT_THRESHOLD: f64 = 1e-7;
const FEATURE_STEPS: f64 = 10.0;
pub const DEFAULT_SAMPLE_SPACING: f64 = 1.0 / 128.0;
pub const CLOSURE_TOLERANCE: f64 = 1e-6;
pub const WINDING_GUARD: f64 = 1e-3;
pub const MIN_RESIDUAL_SAMPLES: usize = 256;
/// Points per collar in the slope scan.
pub const SLOPE_SCAN_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub r: f64,
    pub theta: f64,
    pub t: f64,
    pub vr: f64,
    pub vtheta: f64,
    pub vt: f64,
}

impl GeodesicState {
    fn to_array(self) -> [f64; 6] {
        [self.r, self.theta, self.t, self.vr, self.vtheta, self.vt]
    }

    fn from_array(y: &[f64; 6]) -> Self {
        GeodesicState {
            r: y[0],
            theta: y[1],
            t: y[2],
            vr: y[3],
            vtheta: y[4],
            vt: y[5],
        }
    }

    /// Same point, velocity negated.
    pub fn reversed(&self) -> Self {
        GeodesicState {
            vr: -self.vr,
            vtheta: -self.vtheta,
            vt: -self.vt,
            ..*self
        }
    }
}

fn in_interior(r: f64) -> bool {
    (CORE_DELTA..=FRAC_PI_2 - CORE_DELTA).contains(&r)
}

fn rhs_unchecked(metric: &QuotientMetric, y: &[f64; 6]) -> [f64; 6] {
    let r = y[0];
    if !(r > 0.0 && r < FRAC_PI_2) {
        return [f64::NAN; 6];
    }
    let (f, fp, _) = metric.f_all(r);
    let (h, hp, _) = metric.h_all(r);
    let (vr, vth, vt) = (y[3], y[4], y[5]);
    [
        vr,
        vth,
        vt,
        f * fp * vth * vth + h * hp * vt * vt,
        -2.0 * fp / f * vr * vth,
        -2.0 * hp / h * vr * vt,
    ]
}

/// `(r', theta', t', r'', theta'', t'')` along the geodesic through `state`.
pub fn geodesic_rhs(metric: &QuotientMetric, state: &GeodesicState) -> Result<[f64; 6]> {
    if !in_interior(state.r) {
        return Err(Error::CoreSingularity {
            r: state.r,
            delta: CORE_DELTA,
        });
    }
    Ok(rhs_unchecked(metric, &state.to_array()))
}

/// Energy and the momenta of the two rotational Killing fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub energy: f64,
    pub p_theta: f64,
    pub p_t: f64,
}

pub fn first_integrals(metric: &QuotientMetric, state: &GeodesicState) -> FirstIntegrals {
    let (f, h) = metric.warps(state.r.clamp(0.0, FRAC_PI_2));
    let (f2, h2) = (f * f, h * h);
    FirstIntegrals {
        energy: state.vr * state.vr + f2 * state.vtheta * state.vtheta + h2 * state.vt * state.vt,
        p_theta: f2 * state.vtheta,
        p_t: h2 * state.vt,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub energy_drift: f64,
    pub p_theta_drift: f64,
    pub p_t_drift: f64,
    pub threshold: f64,
    pub length: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
}

impl ConservationReport {
    pub fn max_drift(&self) -> f64 {
        self.energy_drift
            .max(self.p_theta_drift)
            .max(self.p_t_drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    pub tolerance: f64,
    pub drift_threshold: f64,
    /// Arclength between stored samples (rounded so samples are uniform).
    pub sample_spacing: f64,
    /// Upper bound on the integrator step; `None` resolves the narrowest
    /// warp transition (see [`feature_step`]).
    pub max_step: Option<f64>,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tolerance: DEFAULT_ODE_TOLERANCE,
            drift_threshold: DEFAULT_DRIFT_THRESHOLD,
            sample_spacing: DEFAULT_SAMPLE_SPACING,
            max_step: None,
        }
    }
}

/// A tenth of the narrowest rise zone `[e, b]` of either warp. The mollifier
/// steps there have huge high derivatives over a short interval, and the
/// embedded error estimate can step across them without noticing.
pub fn feature_step(metric: &QuotientMetric) -> f64 {
    [metric.theta_profile(), metric.t_profile()]
        .iter()
        .map(|w| w.params())
        .filter(|p| p.b > p.e)
        .map(|p| (p.b - p.e) / FEATURE_STEPS)
        .fold(f64::INFINITY, f64::min)
}

/// Relative change; momenta that start at zero are measured against the
/// speed instead.
fn drift(value: f64, initial: f64, scale: f64) -> f64 {
    let denom = if initial.abs() > 1e-12 * scale {
        initial.abs()
    } else {
        scale
    };
    (value - initial).abs() / denom
}

pub fn integrate_geodesic(
    metric: &QuotientMetric,
    init: &GeodesicState,
    length: f64,
    tol: f64,
) -> Result<(Curve, ConservationReport)> {
    integrate_geodesic_with(
        metric,
        init,
        length,
        &GeodesicOptions {
            tolerance: tol,
            ..GeodesicOptions::default()
        },
    )
}

pub fn integrate_geodesic_with(
    metric: &QuotientMetric,
    init: &GeodesicState,
    length: f64,
    opts: &GeodesicOptions,
) -> Result<(Curve, ConservationReport)> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "length = {length} must be positive"
        )));
    }
    if !(opts.tolerance > 0.0) || !(opts.sample_spacing > 0.0) {
        return Err(Error::InvalidArgument(
            "tolerance and spacing must be positive".into(),
        ));
    }
    if !in_interior(init.r) {
        return Err(Error::CoreApproach {
            s: 0.0,
            state: *init,
        });
    }
    let start = first_integrals(metric, init);
    if !(start.energy > 0.0) {
        return Err(Error::InvalidArgument("initial velocity vanishes".into()));
    }
    let speed = start.energy.sqrt();

    let intervals = ((length / opts.sample_spacing).ceil() as usize).max(MIN_RESIDUAL_SAMPLES);
    let sample_at = |k: usize| {
        if k == intervals {
            length
        } else {
            length * k as f64 / intervals as f64
        }
    };
    let mut curve = Curve::with_capacity(intervals + 1);
    curve.push(0.0, init);
    let mut next = 1;

    let mut report = ConservationReport {
        energy_drift: 0.0,
        p_theta_drift: 0.0,
        p_t_drift: 0.0,
        threshold: opts.drift_threshold,
        length,
        accepted_steps: 0,
        rejected_steps: 0,
        evaluations: 0,
    };

    let ode_opts = Options {
        rtol: opts.tolerance,
        atol: opts.tolerance,
        // unwrapped angles grow without bound
        absolute_mask: 0b110,
        max_step: opts.max_step.unwrap_or_else(|| feature_step(metric)),
        ..Options::default()
    };
    let (_, stats) = ode::integrate(
        |_, y| rhs_unchecked(metric, y),
        0.0,
        init.to_array(),
        length,
        &ode_opts,
        |step| {
            while next <= intervals && sample_at(next) <= step.t {
                let s = sample_at(next);
                let y = if s == step.t { step.y } else { step.eval(s) };
                let state = GeodesicState::from_array(&y);
                if !in_interior(state.r) {
                    return Err(Error::CoreApproach { s, state });
                }
                curve.push(s, &state);
                next += 1;
            }
            let state = GeodesicState::from_array(&step.y);
            if !in_interior(state.r) {
                return Err(Error::CoreApproach { s: step.t, state });
            }
            let now = first_integrals(metric, &state);
            let checks = [
                ("energy", drift(now.energy, start.energy, start.energy)),
                ("p_theta", drift(now.p_theta, start.p_theta, speed)),
                ("p_t", drift(now.p_t, start.p_t, speed)),
            ];
            report.energy_drift = report.energy_drift.max(checks[0].1);
            report.p_theta_drift = report.p_theta_drift.max(checks[1].1);
            report.p_t_drift = report.p_t_drift.max(checks[2].1);
            for (quantity, d) in checks {
                if !(d <= opts.drift_threshold) {
                    return Err(Error::DriftAbort {
                        quantity,
                        drift: d,
                        threshold: opts.drift_threshold,
                        s: step.t,
                    });
                }
            }
            Ok(Control::Continue)
        },
    )?;
    report.accepted_steps = stats.accepted;
    report.rejected_steps = stats.rejected;
    report.evaluations = stats.evaluations;
    debug_assert_eq!(curve.len(), intervals + 1);
    Ok((curve, report))
}

/// `s,r,theta,t,vr,vtheta,vt,E,p_theta,p_t`
pub fn write_trajectory_csv<W: Write>(
    metric: &QuotientMetric,
    curve: &Curve,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "s,r,theta,t,vr,vtheta,vt,E,p_theta,p_t")?;
    for i in 0..curve.len() {
        let st = curve.state(i);
        let fi = first_integrals(metric, &st);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            curve.s[i],
            st.r,
            st.theta,
            st.t,
            st.vr,
            st.vtheta,
            st.vt,
            fi.energy,
            fi.p_theta,
            fi.p_t
        )?;
    }
    Ok(())
}

/// Ratio `vtheta / vt` for which the `r = const` curve is a geodesic.
pub fn torus_slope(metric: &QuotientMetric, r: f64) -> Result<f64> {
    if !in_interior(r) {
        return Err(Error::CoreSingularity {
            r,
            delta: CORE_DELTA,
        });
    }
    Ok(slope_unchecked(metric, r))
}

fn slope_unchecked(metric: &QuotientMetric, r: f64) -> f64 {
    let (f, fp, _) = metric.f_all(r);
    let (h, hp, _) = metric.h_all(r);
    (-h * hp / (f * fp)).sqrt()
}

/// Unit-speed state on the torus `r` with windings in ratio `p : q`.
pub fn torus_state(metric: &QuotientMetric, r: f64, p: i64, q: i64) -> Result<GeodesicState> {
    if !in_interior(r) {
        return Err(Error::CoreSingularity {
            r,
            delta: CORE_DELTA,
        });
    }
    if p == 0 && q == 0 {
        return Err(Error::InvalidArgument("windings (0, 0)".into()));
    }
    let (f, h) = metric.warps(r);
    // direction (p / f, q / h)-proportional in coordinates: (p, q) scaled
    let (pf, qf) = (p as f64, q as f64);
    let scale = 1.0 / (f * f * pf * pf + h * h * qf * qf).sqrt();
    Ok(GeodesicState {
        r,
        theta: 0.0,
        t: 0.0,
        vr: 0.0,
        vtheta: pf * scale,
        vt: qf * scale,
    })
}

/// Outcome of [`closure_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub closed: bool,
    pub period: f64,
    pub windings: (i64, i64),
    /// State mismatch at the detected period.
    pub mismatch: f64,
}

fn state_mismatch(curve: &Curve, s: f64, reference: &GeodesicState) -> [f64; 6] {
    let p = curve.position_at(s);
    let v = curve.velocity_at(s);
    [
        p[0] - reference.r,
        angle_difference(p[1], reference.theta),
        angle_difference(p[2], reference.t),
        v[0] - reference.vr,
        v[1] - reference.vtheta,
        v[2] - reference.vt,
    ]
}

fn sample_mismatch(curve: &Curve, i: usize, reference: &GeodesicState) -> f64 {
    let st = curve.state(i);
    [
        st.r - reference.r,
        angle_difference(st.theta, reference.theta),
        angle_difference(st.t, reference.t),
        st.vr - reference.vr,
        st.vtheta - reference.vtheta,
        st.vt - reference.vt,
    ]
    .iter()
    .fold(0.0, |m, x| m.max(x.abs()))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    // the endpoints can beat the interior when the minimum sits on one
    [a, x, b]
        .into_iter()
        .min_by(|u, v| f(*u).total_cmp(&f(*v)))
        .unwrap_or(x)
}

fn round_windings(dtheta: f64, dt: f64) -> Result<(i64, i64)> {
    let (a, b) = (dtheta / TAU, dt / TAU);
    if (a - a.round()).abs() > WINDING_GUARD || (b - b.round()).abs() > WINDING_GUARD {
        return Err(Error::WindingAmbiguous { theta: a, t: b });
    }
    Ok((a.round() as i64, b.round() as i64))
}

/// Finds the smallest period after which position (angles mod 2pi) and
/// velocity return to the initial sample within `tol`.
pub fn closure_check(curve: &Curve, tol: f64) -> Result<Closure> {
    let n = curve.len();
    if n < 4 {
        return Err(Error::TooFewSamples { got: n, need: 4 });
    }
    let start = curve.state(0);
    let dist: Vec<f64> = (0..n).map(|i| sample_mismatch(curve, i, &start)).collect();
    let mut max_change: f64 = 0.0;
    for i in 1..n {
        let (a, b) = (curve.state(i - 1), curve.state(i));
        for d in [
            b.r - a.r,
            b.theta - a.theta,
            b.t - a.t,
            b.vr - a.vr,
            b.vtheta - a.vtheta,
            b.vt - a.vt,
        ] {
            max_change = max_change.max(d.abs());
        }
    }
    let gate = 2.0 * max_change + tol;
    let not_closed = Error::NotClosed {
        length: curve.length(),
    };
    let Some(departure) = dist.iter().position(|&d| d > gate) else {
        return Err(not_closed);
    };
    for i in departure + 1..n {
        let local_min =
            dist[i] <= gate && dist[i] <= dist[i - 1] && (i + 1 == n || dist[i] <= dist[i + 1]);
        if !local_min {
            continue;
        }
        let lo = curve.s[i - 1];
        let hi = curve.s[(i + 1).min(n - 1)];
        let sq = |s: f64| {
            state_mismatch(curve, s, &start)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
        };
        let s_star = golden_min(sq, lo, hi);
        let mismatch = state_mismatch(curve, s_star, &start)
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if mismatch <= tol {
            let p = curve.position_at(s_star);
            let windings = round_windings(p[1] - start.theta, p[2] - start.t)?;
            return Ok(Closure {
                closed: true,
                period: s_star - curve.s[0],
                windings,
                mismatch,
            });
        }
    }
    Err(not_closed)
}

/// Largest geodesic-equation defect along the curve, in the orthonormal
/// frame, with 5-point finite differences for both derivatives.
pub fn geodesic_residual(metric: &QuotientMetric, curve: &Curve) -> Result<f64> {
    let n = curve.len();
    if n < MIN_RESIDUAL_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            need: MIN_RESIDUAL_SAMPLES,
        });
    }
    let h = (curve.s[n - 1] - curve.s[0]) / (n - 1) as f64;
    for i in 1..n {
        let ds = curve.s[i] - curve.s[i - 1];
        if (ds - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::InvalidArgument(
                "curve is not uniformly sampled".into(),
            ));
        }
    }
    let d1 =
        |x: &[f64], i: usize| (x[i - 2] - 8.0 * x[i - 1] + 8.0 * x[i + 1] - x[i + 2]) / (12.0 * h);
    let d2 = |x: &[f64], i: usize| {
        (-x[i - 2] + 16.0 * x[i - 1] - 30.0 * x[i] + 16.0 * x[i + 1] - x[i + 2]) / (12.0 * h * h)
    };
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let r = curve.r[i];
        if !in_interior(r) {
            return Err(Error::CoreSingularity {
                r,
                delta: CORE_DELTA,
            });
        }
        let (f, fp, _) = metric.f_all(r);
        let (hh, hp, _) = metric.h_all(r);
        let (vr, vth, vt) = (d1(&curve.r, i), d1(&curve.theta, i), d1(&curve.t, i));
        let ar = d2(&curve.r, i) - f * fp * vth * vth - hh * hp * vt * vt;
        let ath = d2(&curve.theta, i) + 2.0 * fp / f * vr * vth;
        let at = d2(&curve.t, i) + 2.0 * hp / hh * vr * vt;
        let norm = (ar * ar + (f * ath).powi(2) + (hh * at).powi(2)).sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}

/// A closed `r = const` geodesic with its confirmation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGeodesic {
    pub r: f64,
    pub state: GeodesicState,
    pub balance: f64,
    pub closure: Closure,
    pub residual: f64,
    pub conservation: ConservationReport,
    #[serde(skip)]
    pub curve: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum TorusSolution {
    Radii {
        curves: Vec<TorusGeodesic>,
    },
    DegenerateBand {
        band: (f64, f64),
        representative: TorusGeodesic,
    },
}

impl TorusSolution {
    pub fn radii(&self) -> Vec<f64> {
        match self {
            TorusSolution::Radii { curves } => curves.iter().map(|c| c.r).collect(),
            TorusSolution::DegenerateBand { representative, .. } => vec![representative.r],
        }
    }

    pub fn geodesics(&self) -> Vec<&TorusGeodesic> {
        match self {
            TorusSolution::Radii { curves } => curves.iter().collect(),
            TorusSolution::DegenerateBand { representative, .. } => vec![representative],
        }
    }
}

/// The part of `[delta, pi/2 - delta]` where the slope can vary: both
/// collars, each sampled with [`SLOPE_SCAN_POINTS`] points.
pub fn slope_scan(metric: &QuotientMetric) -> Vec<(f64, f64)> {
    let rho = metric.rho();
    let mut out = Vec::with_capacity(2 * SLOPE_SCAN_POINTS);
    for (lo, hi) in [(CORE_DELTA, rho), (FRAC_PI_2 - rho, FRAC_PI_2 - CORE_DELTA)] {
        for k in 0..SLOPE_SCAN_POINTS {
            let r = lo + (hi - lo) * k as f64 / (SLOPE_SCAN_POINTS - 1) as f64;
            out.push((r, slope_unchecked(metric, r)));
        }
    }
    out
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == (glo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates the torus geodesic at `r` a little past one period and checks
/// that it closes with the requested windings.
pub fn confirm_torus_geodesic(
    metric: &QuotientMetric,
    r: f64,
    p: i64,
    q: i64,
) -> Result<TorusGeodesic> {
    let state = torus_state(metric, r, p, q)?;
    let (f, fp, _) = metric.f_all(r);
    let (h, hp, _) = metric.h_all(r);
    let balance = f * fp * state.vtheta.powi(2) + h * hp * state.vt.powi(2);
    let period = if q != 0 {
        TAU * q as f64 / state.vt
    } else {
        TAU * p as f64 / state.vtheta
    };
    let spacing = (period / 512.0).min(DEFAULT_SAMPLE_SPACING);
    let (curve, conservation) = integrate_geodesic_with(
        metric,
        &state,
        1.05 * period + 4.0 * spacing,
        &GeodesicOptions {
            sample_spacing: spacing,
            ..GeodesicOptions::default()
        },
    )?;
    let closure = closure_check(&curve, CLOSURE_TOLERANCE)?;
    if closure.windings != (p, q) {
        return Err(Error::NoSolution {
            p,
            q,
            reason: format!(
                "integrated curve at r = {r} closed with windings {:?}",
                closure.windings
            ),
        });
    }
    let residual = geodesic_residual(metric, &curve)?;
    Ok(TorusGeodesic {
        r,
        state,
        balance,
        closure,
        residual,
        conservation,
        curve,
    })
}

/// Solves `torus_slope(r) = |p / q|` over both collars and the round band.
pub fn find_torus_geodesic(metric: &QuotientMetric, p: i64, q: i64) -> Result<TorusSolution> {
    if p == 0 && q == 0 {
        return Err(Error::InvalidArgument("windings (0, 0)".into()));
    }
    let d = gcd(p.unsigned_abs(), q.unsigned_abs());
    if d != 1 {
        return Err(Error::NotCoprimeWindings {
            p,
            q,
            gcd: d as i64,
        });
    }
    let (m, n) = (metric.m() as i64, metric.n() as i64);
    let band_slope = n as f64 / m as f64;
    if p.abs() * m == q.abs() * n {
        // on the round metric every interior torus carries the slope
        let band = if metric.is_round() {
            (CORE_DELTA, FRAC_PI_2 - CORE_DELTA)
        } else {
            metric.round_band()
        };
        let rep = confirm_torus_geodesic(metric, 0.5 * (band.0 + band.1), p, q)?;
        return Ok(TorusSolution::DegenerateBand {
            band,
            representative: rep,
        });
    }
    if p == 0 || q == 0 {
        return Err(Error::NoSolution {
            p,
            q,
            reason: "slope 0 or infinity is only reached at a core".into(),
        });
    }
    let target = (p as f64 / q as f64).abs();
    let scan = slope_scan(metric);
    let (lo, hi) = scan
        .iter()
        .fold((band_slope, band_slope), |(a, b), &(_, v)| {
            (a.min(v), b.max(v))
        });
    if target < lo || target > hi {
        return Err(Error::NoSolution {
            p,
            q,
            reason: format!("slope {target} outside the attained range [{lo}, {hi}]"),
        });
    }
    let g = |r: f64| slope_unchecked(metric, r) - target;
    let mut roots = Vec::new();
    for w in scan.windows(2) {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if r1 <= r0 {
            continue; // gap between the collars
        }
        let (g0, g1) = (v0 - target, v1 - target);
        if g0 == 0.0 {
            roots.push(r0);
        } else if g0 * g1 < 0.0 {
            roots.push(bisect(g, r0, r1));
        }
    }
    if let Some(&(r, v)) = scan.last() {
        if v == target {
            roots.push(r);
        }
    }
    if roots.is_empty() {
        return Err(Error::NoSolution {
            p,
            q,
            reason: format!("slope {target} is touched but never crossed"),
        });
    }
    let curves = roots
        .into_iter()
        .map(|r| confirm_torus_geodesic(metric, r, p, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(TorusSolution::Radii { curves })
}

/// Effective radial potential `p_theta^2 / f^2 + p_t^2 / h^2`.
fn radial_potential(metric: &QuotientMetric, r: f64, fi: &FirstIntegrals) -> f64 {
    let (f, h) = metric.warps(r);
    fi.p_theta * fi.p_theta / (f * f) + fi.p_t * fi.p_t / (h * h)
}

/// The interval of radii reachable from `state`: the component of
/// `{r : potential(r) <= E}` containing `state.r`.
pub fn accessible_band(metric: &QuotientMetric, state: &GeodesicState) -> (f64, f64) {
    let fi = first_integrals(metric, state);
    let excess = |r: f64| radial_potential(metric, r, &fi) - fi.energy;
    let step = 1e-4;
    let walk = |dir: f64, limit: f64| {
        let mut r = state.r;
        loop {
            let next = r + dir * step;
            if (dir < 0.0 && next <= limit) || (dir > 0.0 && next >= limit) {
                return limit;
            }
            if excess(next) > 0.0 {
                return bisect(excess, r.min(next), r.max(next));
            }
            r = next;
        }
    };
    (walk(-1.0, 0.0), walk(1.0, FRAC_PI_2))
}

/// Random unit-speed start in the round band whose reachable radii stay at
/// least `margin` away from both cores.
pub fn random_admissible_start<R: Rng>(
    metric: &QuotientMetric,
    rng: &mut R,
    margin: f64,
) -> GeodesicState {
    let (lo, hi) = metric.round_band();
    loop {
        let r = rng.gen_range(lo..=hi);
        // uniform direction in the orthonormal frame
        let u: [f64; 3] = loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n2: f64 = v.iter().map(|x| x * x).sum();
            if n2 > 1e-4 && n2 <= 1.0 {
                let n = n2.sqrt();
                break [v[0] / n, v[1] / n, v[2] / n];
            }
        };
        let (f, h) = metric.warps(r);
        let state = GeodesicState {
            r,
            theta: rng.gen_range(0.0..TAU),
            t: rng.gen_range(0.0..TAU),
            vr: u[0],
            vtheta: u[1] / f,
            vt: u[2] / h,
        };
        let (a, b) = accessible_band(metric, &state);
        if a >= margin && b <= FRAC_PI_2 - margin {
            return state;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_metric;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn hopf_torus_balance() {
        let g = build_metric(1, 1, 0.25).unwrap();
        let s = GeodesicState {
            r: FRAC_PI_4,
            theta: 0.0,
            t: 0.0,
            vr: 0.0,
            vtheta: 1.0,
            vt: 1.0,
        };
        let d = geodesic_rhs(&g, &s).unwrap();
        assert!(d[3].abs() < 1e-15);
    }

    #[test]
    fn radial_geodesic() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let s = GeodesicState {
            r: 0.6,
            theta: 1.0,
            t: 2.0,
            vr: 1.0,
            vtheta: 0.0,
            vt: 0.0,
        };
        let d = geodesic_rhs(&g, &s).unwrap();
        assert_eq!(&d[3..], &[0.0, 0.0, 0.0]);
        let fi = first_integrals(&g, &s);
        assert_eq!((fi.energy, fi.p_theta, fi.p_t), (1.0, 0.0, 0.0));
    }

    #[test]
    fn hopf_state_energy() {
        let g = build_metric(1, 1, 0.25).unwrap();
        let s = GeodesicState {
            r: FRAC_PI_4,
            theta: 0.0,
            t: 0.0,
            vr: 0.0,
            vtheta: 2f64.sqrt(),
            vt: 2f64.sqrt(),
        };
        assert!((first_integrals(&g, &s).energy - 2.0).abs() < 1e-14);
    }

    #[test]
    fn core_is_refused() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let s = GeodesicState {
            r: 1e-4,
            theta: 0.0,
            t: 0.0,
            vr: 1.0,
            vtheta: 0.0,
            vt: 0.0,
        };
        assert!(matches!(
            geodesic_rhs(&g, &s),
            Err(Error::CoreSingularity { .. })
        ));
        // radial line into K
        let s = GeodesicState {
            r: 0.1,
            vr: -1.0,
            ..s
        };
        assert!(matches!(
            integrate_geodesic(&g, &s, 1.0, 1e-10),
            Err(Error::CoreApproach { .. })
        ));
    }

    #[test]
    fn slope_in_band() {
        let g = build_metric(2, 3, 0.25).unwrap();
        assert!((torus_slope(&g, FRAC_PI_4).unwrap() - 1.5).abs() < 1e-14);
        let round = build_metric(1, 1, 0.25).unwrap();
        assert!((torus_slope(&round, 0.1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn great_circle_returns() {
        let g = build_metric(1, 1, 0.25).unwrap();
        let s = torus_state(&g, FRAC_PI_4, 1, 1).unwrap();
        let (c, rep) = integrate_geodesic(&g, &s, TAU, 1e-10).unwrap();
        let end = c.state(c.len() - 1);
        assert!((end.r - s.r).abs() < 1e-7);
        assert!(angle_difference(end.theta, s.theta).abs() < 1e-7);
        assert!(angle_difference(end.t, s.t).abs() < 1e-7);
        assert!(rep.max_drift() < 1e-8);
    }

    #[test]
    fn unbalanced_torus_curve_is_not_geodesic() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let mut c = Curve::default();
        let (f, h) = g.warps(FRAC_PI_4);
        let (vth, vt) = (0.9 / f, 0.19f64.sqrt() / h);
        for k in 0..400 {
            let s = k as f64 * 0.01;
            c.push(
                s,
                &GeodesicState {
                    r: FRAC_PI_4,
                    theta: vth * s,
                    t: vt * s,
                    vr: 0.0,
                    vtheta: vth,
                    vt,
                },
            );
        }
        assert!(geodesic_residual(&g, &c).unwrap() > 1e-3);
        assert!(matches!(
            geodesic_residual(&g, &c.resampled(100)),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
