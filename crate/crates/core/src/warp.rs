//! Concave warping profile that interpolates between `sin r` near a core
//! circle and `sin(r) / n` away from it.
//!
//! The profile is specified through its curvature density `kappa = -sigma''`,
//! which is strictly positive by construction:
//!
//! ```text
//!   [0, a]   kappa = sin r                                   (sigma = sin r)
//!   [a, c]   kappa = sin r + amplitude * bump((r - a)/(c - a))
//!   [c, d]   kappa = sin r * (1 - (1 - s/n) * step((r - c)/(d - c)))
//!   [d, e]   kappa = sin r * s/n
//!   [e, b]   kappa = sin r * (s + (1 - s) * step((r - e)/(b - e))) / n
//!   [b, pi/2] kappa = sin r / n                              (sigma = sin(r)/n)
//! ```
//!
//! `bump` and `step` are built from `exp(-1/x)`, so every seam is C-infinity.
//! Matching `sigma` and `sigma'` to `sin(r)/n` at `b` gives two conditions
//! that are linear in `(s, amplitude)`. Both must come out positive, which
//! keeps `kappa > 0`; `sigma' > 0` then follows from `sigma'(b) = cos(b)/n`.
//!
//! Between `a` and `b`, `sigma` and `sigma'` are read from a table of node
//! values accumulated with 16-point Gauss-Legendre panels and completed from
//! the nearest node with one more panel; `sigma''` is always closed form.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gl16, GaussLegendre};

pub const BLEND_ID: &str = "exp-mollifier/bump-dip-rise";

const SEGMENTS_PER_ZONE: usize = 256;
const B_FRACTION: f64 = 0.9;
const A_FRACTION: f64 = 0.1;
const BUMP_END: f64 = 1.0;
const DIP_START: f64 = 2.0;
const RISE_START: f64 = 0.9;
const MIN_EXACT_ZONE: f64 = 1e-6;

// Kept out of line so the optimizer cannot fuse them into a `sincos` call,
// which may differ from `sin`/`cos` in the last bit.
#[inline(never)]
fn sine(r: f64) -> f64 {
    r.sin()
}

#[inline(never)]
fn cosine(r: f64) -> f64 {
    r.cos()
}

/// `exp(-1/y)` for `y > 0`, zero otherwise.
fn mollifier(y: f64) -> f64 {
    if y > 0.0 {
        (-1.0 / y).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `x <= 0`, 1 for `x >= 1`.
pub(crate) fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let l = mollifier(x);
        l / (l + mollifier(1.0 - x))
    }
}

/// `smooth_step` with its first two derivatives.
fn smooth_step_all(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    // l(y) = exp(-1/y): l' = l / y^2, l'' = l (1 - 2y) / y^4
    let l = |y: f64| {
        let v = mollifier(y);
        (v, v / (y * y), v * (1.0 - 2.0 * y) / y.powi(4))
    };
    let (lv, l1, l2) = l(x);
    let (rv, r1, r2) = l(1.0 - x);
    let (r1, r2) = (-r1, r2);
    let sum = lv + rv;
    let num = l1 * rv - lv * r1;
    let num1 = l2 * rv - lv * r2;
    let sum1 = l1 + r1;
    (
        lv / sum,
        num / (sum * sum),
        (num1 * sum - 2.0 * num * sum1) / (sum * sum * sum),
    )
}

/// Compactly supported bump on (0, 1).
pub(crate) fn bump(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        (-1.0 / (x * (1.0 - x))).exp()
    } else {
        0.0
    }
}

/// Plain parameters of a profile; this is the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    pub n: u32,
    pub rho: f64,
    /// End of the exact `sin r` zone.
    pub a: f64,
    /// End of the bump zone.
    pub c: f64,
    /// Start of the dip floor.
    pub d: f64,
    /// Start of the rise back to `sin(r)/n` curvature.
    pub e: f64,
    /// Start of the exact `sin(r)/n` zone.
    pub b: f64,
    /// Dip depth: on `[d, e]` the curvature density is `s * sin(r) / n`.
    pub s: f64,
    pub amplitude: f64,
    pub blend: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default)]
struct NodeTable {
    r: Vec<f64>,
    value: Vec<f64>,
    slope: Vec<f64>,
    /// Rounding left in `(sigma, sigma')` at `b`, removed on `[e, b]`.
    closing: (f64, f64),
}

/// The warping function and its first two derivatives on `[0, pi/2]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "WarpParams", into = "WarpParams")]
pub struct WarpProfile {
    params: WarpParams,
    table: NodeTable,
}

impl From<WarpProfile> for WarpParams {
    fn from(p: WarpProfile) -> Self {
        p.params
    }
}

impl TryFrom<WarpParams> for WarpProfile {
    type Error = Error;

    fn try_from(params: WarpParams) -> Result<Self> {
        if params.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if params.n > 1 {
            let p = &params;
            let ordered = 0.0 < p.a && p.a < p.c && p.c < p.d && p.d < p.e && p.e < p.b;
            if !ordered || p.b >= p.rho {
                return Err(Error::InvalidArgument(format!(
                    "zone boundaries out of order: a={} c={} d={} e={} b={} rho={}",
                    p.a, p.c, p.d, p.e, p.b, p.rho
                )));
            }
        }
        Ok(WarpProfile::from_params(params))
    }
}

/// Builds the profile for quotient order `n` and collar radius `rho`.
pub fn build_warp(n: u32, rho: f64, tolerance: f64) -> Result<WarpProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(rho > 0.0 && rho < std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidArgument(format!(
            "rho = {rho} must lie in (0, pi/4)"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let b = B_FRACTION * rho;
    if n == 1 {
        return Ok(WarpProfile::from_params(WarpParams {
            n,
            rho,
            a: b,
            c: b,
            d: b,
            e: b,
            b,
            s: 1.0,
            amplitude: 0.0,
            blend: BLEND_ID.to_string(),
            tolerance,
        }));
    }

    let nf = n as f64;
    let kink = kink_radius(nf, b);
    let c = BUMP_END * kink;
    let d = DIP_START * kink;
    let e = RISE_START * b;
    let mut a = (rho / 10.0).min(A_FRACTION * kink);

    loop {
        if a < MIN_EXACT_ZONE {
            return Err(Error::InfeasibleZone { n, rho, a });
        }
        match solve_shape(nf, a, c, d, e, b)? {
            Some((s, amplitude)) => {
                let profile = WarpProfile::from_params(WarpParams {
                    n,
                    rho,
                    a,
                    c,
                    d,
                    e,
                    b,
                    s,
                    amplitude,
                    blend: BLEND_ID.to_string(),
                    tolerance,
                });
                let residual = profile.seam_residual();
                if !(residual <= tolerance) {
                    return Err(Error::NoRoot(format!(
                        "matching residual {residual:e} at b exceeds tolerance {tolerance:e}"
                    )));
                }
                return Ok(profile);
            }
            None => a *= 0.5,
        }
    }
}

/// Where `sin r` meets the tangent line of `sin(r)/n` at `b`. Any concave
/// profile must leave `sin r` before this point.
fn kink_radius(n: f64, b: f64) -> f64 {
    let g = |r: f64| r.sin() - (b.sin() - (b - r) * b.cos()) / n;
    let (mut lo, mut hi) = (0.0_f64, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the two matching conditions for `(s, amplitude)`. Returns `None`
/// when the solution would make the curvature density non-positive.
fn solve_shape(n: f64, a: f64, c: f64, d: f64, e: f64, b: f64) -> Result<Option<(f64, f64)>> {
    let rule = gl16();
    let seg = SEGMENTS_PER_ZONE;
    let int = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| rule.integrate_composite(f, lo, hi, seg);

    let step1 = |r: f64| smooth_step((r - c) / (d - c));
    let step2 = |r: f64| smooth_step((r - e) / (b - e));
    let psi = |r: f64| bump((r - a) / (c - a));

    // kappa = sin * (w0 + s * w1) + amplitude * psi
    let p0 = (1.0 - a.cos())
        + int(&|r| r.sin(), a, c)
        + int(&|r| r.sin() * (1.0 - step1(r)), c, d)
        + int(&|r| r.sin() * step2(r) / n, e, b);
    let p1 = int(&|r| r.sin() * step1(r) / n, c, d)
        + (d.cos() - e.cos()) / n
        + int(&|r| r.sin() * (1.0 - step2(r)) / n, e, b);
    let q0 = (a.sin() - a * a.cos())
        + int(&|r| r * r.sin(), a, c)
        + int(&|r| r * r.sin() * (1.0 - step1(r)), c, d)
        + int(&|r| r * r.sin() * step2(r) / n, e, b);
    let q1 = int(&|r| r * r.sin() * step1(r) / n, c, d)
        + ((e.sin() - e * e.cos()) - (d.sin() - d * d.cos())) / n
        + int(&|r| r * r.sin() * (1.0 - step2(r)) / n, e, b);
    let b0 = int(&psi, a, c);
    let b1 = int(&|r| r * psi(r), a, c);

    // total curvature and first moment required by sigma(b), sigma'(b)
    let mass = 1.0 - b.cos() / n;
    let moment = (b.sin() - b * b.cos()) / n;

    let det = p1 * b1 - q1 * b0;
    if !det.is_finite() || det == 0.0 {
        return Err(Error::NoRoot("singular matching system".into()));
    }
    let rhs0 = mass - p0;
    let rhs1 = moment - q0;
    let s = (rhs0 * b1 - rhs1 * b0) / det;
    let amplitude = (p1 * rhs1 - q1 * rhs0) / det;
    if s.is_finite() && amplitude.is_finite() && s > 0.0 && s < n && amplitude > 0.0 {
        Ok(Some((s, amplitude)))
    } else {
        Ok(None)
    }
}

impl WarpProfile {
    fn from_params(params: WarpParams) -> Self {
        let mut profile = WarpProfile {
            params,
            table: NodeTable::default(),
        };
        profile.table = profile.build_table();
        profile
    }

    /// Same zones and amplitude with a different dip depth. The result no
    /// longer satisfies the matching conditions; used for negative controls.
    pub fn with_shape_parameter(&self, s: f64) -> WarpProfile {
        let mut params = self.params.clone();
        params.s = s;
        WarpProfile::from_params(params)
    }

    pub fn params(&self) -> &WarpParams {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn rho(&self) -> f64 {
        self.params.rho
    }

    pub fn a(&self) -> f64 {
        self.params.a
    }

    pub fn b(&self) -> f64 {
        self.params.b
    }

    pub fn s(&self) -> f64 {
        self.params.s
    }

    pub fn tolerance(&self) -> f64 {
        self.params.tolerance
    }

    fn is_trivial(&self) -> bool {
        self.params.n == 1
    }

    fn zone_edges(&self) -> [f64; 5] {
        let p = &self.params;
        [p.a, p.c, p.d, p.e, p.b]
    }

    /// Curvature density `-sigma''` on `[0, pi/2]`.
    pub(crate) fn kappa(&self, r: f64) -> f64 {
        let p = &self.params;
        let sin = r.sin();
        if r <= p.a {
            return sin;
        }
        if r >= p.b {
            return sin / p.n as f64;
        }
        let n = p.n as f64;
        if r <= p.c {
            sin + p.amplitude * bump((r - p.a) / (p.c - p.a))
        } else if r <= p.d {
            sin * (1.0 - (1.0 - p.s / n) * smooth_step((r - p.c) / (p.d - p.c)))
        } else if r <= p.e {
            sin * p.s / n
        } else {
            sin * (p.s + (1.0 - p.s) * smooth_step((r - p.e) / (p.b - p.e))) / n
        }
    }

    fn build_table(&self) -> NodeTable {
        if self.is_trivial() {
            return NodeTable::default();
        }
        let edges = self.zone_edges();
        let mut r = Vec::with_capacity(4 * SEGMENTS_PER_ZONE + 1);
        for w in edges.windows(2) {
            let width = (w[1] - w[0]) / SEGMENTS_PER_ZONE as f64;
            for k in 0..SEGMENTS_PER_ZONE {
                r.push(w[0] + width * k as f64);
            }
        }
        r.push(self.params.b);

        let mut value = Vec::with_capacity(r.len());
        let mut slope = Vec::with_capacity(r.len());
        value.push(self.params.a.sin());
        slope.push(self.params.a.cos());
        for i in 1..r.len() {
            let (lo, hi) = (r[i - 1], r[i]);
            let (dv, ds) = self.panel(lo, hi, gl16());
            slope.push(slope[i - 1] - ds);
            value.push(value[i - 1] + slope[i - 1] * (hi - lo) - dv);
        }
        let b = self.params.b;
        let n = self.params.n as f64;
        let last = r.len() - 1;
        let mut closing = (b.sin() / n - value[last], b.cos() / n - slope[last]);
        // only rounding is absorbed; a real mismatch must stay visible
        if closing.0.abs().max(closing.1.abs()) > self.params.tolerance {
            closing = (0.0, 0.0);
        }
        NodeTable {
            r,
            value,
            slope,
            closing,
        }
    }

    /// Correction `(alpha + beta (r - b)) w(r)` with `w` rising from 0 at `e`
    /// to 1 at `b`; it makes `sigma` and `sigma'` meet `sin(r)/n` exactly.
    fn closing_term(&self, r: f64) -> (f64, f64, f64) {
        let p = &self.params;
        if r <= p.e {
            return (0.0, 0.0, 0.0);
        }
        let (alpha, beta) = self.table.closing;
        let width = p.b - p.e;
        let (w, w1, w2) = smooth_step_all((r - p.e) / width);
        let (w1, w2) = (w1 / width, w2 / (width * width));
        let lin = alpha + beta * (r - p.b);
        (lin * w, beta * w + lin * w1, 2.0 * beta * w1 + lin * w2)
    }

    /// Returns `(int (hi - u) kappa(u) du, int kappa(u) du)` over `[lo, hi]`.
    fn panel(&self, lo: f64, hi: f64, rule: &GaussLegendre) -> (f64, f64) {
        let moment = rule.integrate(|u| (hi - u) * self.kappa(u), lo, hi);
        let mass = rule.integrate(|u| self.kappa(u), lo, hi);
        (moment, mass)
    }

    /// `(sigma, sigma')` from the node table, `a <= r <= b`.
    fn table_lookup(&self, r: f64) -> (f64, f64) {
        let t = &self.table;
        let i = t.r.partition_point(|&x| x <= r).saturating_sub(1);
        let r0 = t.r[i];
        if r == r0 {
            return (t.value[i], t.slope[i]);
        }
        let (dv, ds) = self.panel(r0, r, gl16());
        (t.value[i] + t.slope[i] * (r - r0) - dv, t.slope[i] - ds)
    }

    /// `(sigma, sigma', sigma'')` without the domain check.
    pub(crate) fn eval_all_unchecked(&self, r: f64) -> (f64, f64, f64) {
        let p = &self.params;
        if r <= p.a {
            let s = sine(r);
            return (s, cosine(r), -s);
        }
        if r >= p.b {
            let n = p.n as f64;
            let s = sine(r);
            return (s / n, cosine(r) / n, -s / n);
        }
        let (v, d1) = self.table_lookup(r);
        let (c0, c1, c2) = self.closing_term(r);
        (v + c0, d1 + c1, c2 - self.kappa(r))
    }

    fn check_domain(r: f64) -> Result<()> {
        if (0.0..=FRAC_PI_2).contains(&r) {
            Ok(())
        } else {
            Err(Error::Domain(format!("r = {r} outside [0, pi/2]")))
        }
    }

    /// `(sigma, sigma', sigma'')` at `r`.
    pub fn eval_all(&self, r: f64) -> Result<(f64, f64, f64)> {
        Self::check_domain(r)?;
        Ok(self.eval_all_unchecked(r))
    }

    /// Derivative of the given order (0, 1 or 2) at `r`.
    pub fn eval(&self, r: f64, order: u8) -> Result<f64> {
        Self::check_domain(r)?;
        let p = &self.params;
        match order {
            0 | 1 => {
                let (v, d1, _) = self.eval_all_unchecked(r);
                Ok(if order == 0 { v } else { d1 })
            }
            2 => Ok(if r <= p.a || r >= p.b {
                self.eval_all_unchecked(r).2
            } else {
                self.closing_term(r).2 - self.kappa(r)
            }),
            _ => Err(Error::InvalidArgument(format!(
                "derivative order {order} not supported"
            ))),
        }
    }

    /// Mismatch of the accumulated `sigma` and `sigma'` against `sin(b)/n`
    /// and `cos(b)/n` at the outer seam.
    fn seam_residual(&self) -> f64 {
        if self.is_trivial() {
            return 0.0;
        }
        let b = self.params.b;
        let n = self.params.n as f64;
        let last = self.table.r.len() - 1;
        let dv = (self.table.value[last] - b.sin() / n).abs();
        let ds = (self.table.slope[last] - b.cos() / n).abs();
        dv.max(ds)
    }

    /// Grid audit of every profile property.
    pub fn verify(&self, grid_size: usize) -> Result<PropertyReport> {
        verify_warp(self, grid_size)
    }
}

/// Outcome of [`verify_warp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub n: u32,
    pub rho: f64,
    pub grid_size: usize,
    pub min_first_derivative: f64,
    pub max_second_derivative: f64,
    /// Finite-difference jumps of orders 0, 1, 2 across `r = a`.
    pub seam_jumps_a: [f64; 3],
    /// Finite-difference jumps of orders 0, 1, 2 across `r = b`.
    pub seam_jumps_b: [f64; 3],
    pub seam_tolerance: f64,
    pub exact_sine_zone: bool,
    pub exact_scaled_zone: bool,
    pub sandwich: bool,
    pub constraint_residual: f64,
    pub constraint_tolerance: f64,
}

pub const SEAM_TOLERANCE: f64 = 1e-8;

impl PropertyReport {
    pub fn monotone(&self) -> bool {
        self.min_first_derivative > 0.0
    }

    pub fn concave(&self) -> bool {
        self.max_second_derivative < 0.0
    }

    pub fn seams_continuous(&self) -> bool {
        self.seam_jumps_a
            .iter()
            .chain(&self.seam_jumps_b)
            .all(|j| *j < self.seam_tolerance)
    }

    pub fn constraint_satisfied(&self) -> bool {
        self.constraint_residual < self.constraint_tolerance
    }

    pub fn passed(&self) -> bool {
        self.monotone()
            && self.concave()
            && self.seams_continuous()
            && self.exact_sine_zone
            && self.exact_scaled_zone
            && self.sandwich
            && self.constraint_satisfied()
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(
            f,
            "warp profile n = {}, rho = {} (grid {})",
            self.n, self.rho, self.grid_size
        )?;
        writeln!(
            f,
            "  min sigma'          {:+.6e}  {}",
            self.min_first_derivative,
            mark(self.monotone())
        )?;
        writeln!(
            f,
            "  max sigma''         {:+.6e}  {}",
            self.max_second_derivative,
            mark(self.concave())
        )?;
        writeln!(
            f,
            "  seam jumps at a     {:.2e} {:.2e} {:.2e}",
            self.seam_jumps_a[0], self.seam_jumps_a[1], self.seam_jumps_a[2]
        )?;
        writeln!(
            f,
            "  seam jumps at b     {:.2e} {:.2e} {:.2e}  {}",
            self.seam_jumps_b[0],
            self.seam_jumps_b[1],
            self.seam_jumps_b[2],
            mark(self.seams_continuous())
        )?;
        writeln!(f, "  sigma = sin r zone  {}", mark(self.exact_sine_zone))?;
        writeln!(f, "  sigma = sin r / n   {}", mark(self.exact_scaled_zone))?;
        writeln!(f, "  sandwich            {}", mark(self.sandwich))?;
        write!(
            f,
            "  matching residual   {:.2e}  {}",
            self.constraint_residual,
            mark(self.constraint_satisfied())
        )
    }
}

/// One-sided finite-difference estimates of the jump of orders 0..2 at `x`.
/// Orders 0 and 1 difference `sigma`, order 2 differences `sigma'`.
fn seam_jumps(p: &WarpProfile, x: f64, step: f64) -> [f64; 3] {
    let v = |r: f64| p.eval_all_unchecked(r).0;
    let d = |r: f64| p.eval_all_unchecked(r).1;
    let h = step;
    let left0 = 2.0 * v(x - h) - v(x - 2.0 * h);
    let right0 = 2.0 * v(x + h) - v(x + 2.0 * h);
    let left1 = (3.0 * v(x) - 4.0 * v(x - h) + v(x - 2.0 * h)) / (2.0 * h);
    let right1 = (-3.0 * v(x) + 4.0 * v(x + h) - v(x + 2.0 * h)) / (2.0 * h);
    let left2 = (3.0 * d(x) - 4.0 * d(x - h) + d(x - 2.0 * h)) / (2.0 * h);
    let right2 = (-3.0 * d(x) + 4.0 * d(x + h) - d(x + 2.0 * h)) / (2.0 * h);
    [
        (left0 - right0).abs(),
        (left1 - right1).abs(),
        (left2 - right2).abs(),
    ]
}

/// Audits a profile on a uniform grid of `[0, pi/2]`.
pub fn verify_warp(p: &WarpProfile, grid_size: usize) -> Result<PropertyReport> {
    if grid_size < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid_size = {grid_size} must be at least 100"
        )));
    }
    let n = p.params.n as f64;
    let spacing = FRAC_PI_2 / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|k| {
            if k + 1 == grid_size {
                FRAC_PI_2
            } else {
                spacing * k as f64
            }
        })
        .collect();

    let mut min_first = f64::INFINITY;
    let mut max_second = f64::NEG_INFINITY;
    let mut sandwich = true;
    for &r in &grid {
        let (v, d1, d2) = p.eval_all_unchecked(r);
        if r < FRAC_PI_2 {
            min_first = min_first.min(d1);
        }
        if r > 0.0 {
            max_second = max_second.max(d2);
        }
        let slack = 1e-14;
        if v < r.sin() / n - slack || v > r.sin() + slack {
            sandwich = false;
        }
    }

    let (a, b) = (p.params.a, p.params.b);
    let mut inner: Vec<f64> = grid.iter().copied().filter(|&r| r <= a).collect();
    inner.extend([0.5 * a, a]);
    let exact_sine_zone = inner.iter().all(|&r| {
        let (v, d1, d2) = p.eval_all_unchecked(r);
        v == sine(r) && d1 == cosine(r) && d2 == -sine(r)
    });
    let mut outer: Vec<f64> = grid.iter().copied().filter(|&r| r >= b).collect();
    outer.extend([b, p.params.rho, 0.5 * (b + FRAC_PI_2)]);
    let exact_scaled_zone = outer.iter().all(|&r| {
        let (v, d1, d2) = p.eval_all_unchecked(r);
        v == sine(r) / n && d1 == cosine(r) / n && d2 == -sine(r) / n
    });

    let (seam_jumps_a, seam_jumps_b) = if p.is_trivial() {
        let j = seam_jumps(p, b, 1e-6);
        (j, j)
    } else {
        let step_a = (1e-5_f64).min((p.params.c - a) / 100.0).min(a / 4.0);
        let step_b = (1e-5_f64).min((b - p.params.e) / 100.0);
        (seam_jumps(p, a, step_a), seam_jumps(p, b, step_b))
    };

    let constraint_residual = if p.is_trivial() {
        0.0
    } else {
        matching_residual(p, 10 * grid_size)
    };

    Ok(PropertyReport {
        n: p.params.n,
        rho: p.params.rho,
        grid_size,
        min_first_derivative: min_first,
        max_second_derivative: max_second,
        seam_jumps_a,
        seam_jumps_b,
        seam_tolerance: SEAM_TOLERANCE,
        exact_sine_zone,
        exact_scaled_zone,
        sandwich,
        constraint_residual,
        constraint_tolerance: p.params.tolerance,
    })
}

/// Re-derives the matching conditions at `b` by integrating the evaluated
/// `sigma'` and `sigma''` with a 10-point rule on `segments` panels, spread
/// over the zones in proportion to their count.
fn matching_residual(p: &WarpProfile, segments: usize) -> f64 {
    let rule = GaussLegendre::new(10);
    let n = p.params.n as f64;
    let b = p.params.b;
    let per_zone = (segments / 5).max(1);
    let mut edges = vec![0.0];
    edges.extend(p.zone_edges());
    let mut value = 0.0;
    let mut slope_drop = 0.0;
    for w in edges.windows(2) {
        value += rule.integrate_composite(|r| p.eval_all_unchecked(r).1, w[0], w[1], per_zone);
        slope_drop -= rule.integrate_composite(|r| p.eval_all_unchecked(r).2, w[0], w[1], per_zone);
    }
    let dv = (value - b.sin() / n).abs();
    let ds = (1.0 - slope_drop - b.cos() / n).abs();
    dv.max(ds)
}
