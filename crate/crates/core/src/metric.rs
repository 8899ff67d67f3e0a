//! The doubly warped metric `dr^2 + f(r)^2 dtheta^2 + h(r)^2 dt^2` on the
//! quotient of the 3-sphere, with `f = sigma_n` and `h(r) = sigma_m(pi/2 - r)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warp::{build_warp, WarpProfile};

/// Width of the coordinate-singular zone excluded around both cores.
pub const CORE_DELTA: f64 = 1e-3;
pub const DEFAULT_WARP_TOLERANCE: f64 = 1e-12;
pub const FD_STEP: f64 = 1e-5;
pub const BAND_TOLERANCE: f64 = 1e-9;
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-6;
pub const ORACLE_TOLERANCE: f64 = 1e-5;

/// Coordinates `(r, theta, t)`.
pub type Point = [f64; 3];
/// Tangent vector in the coordinate basis `(d_r, d_theta, d_t)`.
pub type Vector = [f64; 3];

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientMetric {
    m: u32,
    n: u32,
    rho: f64,
    /// Profile of the theta-circles, closing at K (r = 0).
    f: WarpProfile,
    /// Profile of the t-circles, evaluated at `pi/2 - r`, closing at L.
    h: WarpProfile,
    #[serde(skip)]
    concavity_defect: bool,
}

pub fn build_metric(m: u32, n: u32, rho: f64) -> Result<QuotientMetric> {
    build_metric_with_tolerance(m, n, rho, DEFAULT_WARP_TOLERANCE)
}

pub fn build_metric_with_tolerance(
    m: u32,
    n: u32,
    rho: f64,
    tolerance: f64,
) -> Result<QuotientMetric> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    if gcd(m as u64, n as u64) != 1 {
        return Err(Error::NotCoprime {
            m: m as i64,
            n: n as i64,
        });
    }
    if m < 2 || n < 2 {
        log::warn!("m = {m}, n = {n}: a factor of order < 2 leaves that core unmodified");
    }
    let f = build_warp(n, rho, tolerance)?;
    let h = build_warp(m, rho, tolerance)?;
    debug_assert!(f.b() < FRAC_PI_2 - h.b());
    Ok(QuotientMetric {
        m,
        n,
        rho,
        f,
        h,
        concavity_defect: false,
    })
}

/// Nonzero Christoffel symbols of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Christoffel {
    pub r_theta_theta: f64,
    pub r_t_t: f64,
    pub theta_r_theta: f64,
    pub t_r_t: f64,
}

impl Christoffel {
    /// `Gamma^i_{jk}` as a dense array indexed `[i][j][k]`.
    pub fn dense(&self) -> [[[f64; 3]; 3]; 3] {
        let mut g = [[[0.0; 3]; 3]; 3];
        g[0][1][1] = self.r_theta_theta;
        g[0][2][2] = self.r_t_t;
        g[1][0][1] = self.theta_r_theta;
        g[1][1][0] = self.theta_r_theta;
        g[2][0][2] = self.t_r_t;
        g[2][2][0] = self.t_r_t;
        g
    }
}

/// Sectional curvatures of the three coordinate planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalCurvatures {
    /// span(d_theta, d_t)
    pub k23: f64,
    /// span(d_r, d_t)
    pub k13: f64,
    /// span(d_r, d_theta)
    pub k12: f64,
}

impl PrincipalCurvatures {
    pub fn min(&self) -> f64 {
        self.k23.min(self.k13).min(self.k12)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k23, self.k13, self.k12]
    }
}

impl QuotientMetric {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta_profile(&self) -> &WarpProfile {
        &self.f
    }

    pub fn t_profile(&self) -> &WarpProfile {
        &self.h
    }

    /// End of the K-collar, where `f` becomes `sin(r)/n`.
    pub fn k_collar_end(&self) -> f64 {
        self.f.b()
    }

    /// Start of the L-collar, after which `h` stops being `cos(r)/m`.
    pub fn l_collar_start(&self) -> f64 {
        FRAC_PI_2 - self.h.b()
    }

    /// The interval on which the metric is the descended round metric.
    pub fn round_band(&self) -> (f64, f64) {
        (self.rho, FRAC_PI_2 - self.rho)
    }

    /// Whether `r` lies in the curvature bump of either collar, where the
    /// curvature density climbs by several orders of magnitude within about
    /// `1e-3` and a fixed-step finite-difference stencil cannot resolve it.
    pub fn in_bump_zone(&self, r: f64) -> bool {
        let f = self.f.params();
        let h = self.h.params();
        let l = FRAC_PI_2 - r;
        (r > f.a && r < f.c) || (l > h.a && l < h.c)
    }

    pub fn is_round(&self) -> bool {
        self.m == 1 && self.n == 1
    }

    /// Test hook: flips the sign of `f''` on the round band, which makes
    /// `K12` negative there.
    pub fn with_concavity_defect(&self) -> QuotientMetric {
        let mut out = self.clone();
        out.concavity_defect = true;
        out
    }

    fn check_r(r: f64) -> Result<()> {
        if (0.0..=FRAC_PI_2).contains(&r) {
            Ok(())
        } else {
            Err(Error::Domain(format!("r = {r} outside [0, pi/2]")))
        }
    }

    fn check_interior(r: f64) -> Result<()> {
        if (CORE_DELTA..=FRAC_PI_2 - CORE_DELTA).contains(&r) {
            Ok(())
        } else {
            Err(Error::CoreSingularity {
                r,
                delta: CORE_DELTA,
            })
        }
    }

    /// `(f, f', f'')`
    pub(crate) fn f_all(&self, r: f64) -> (f64, f64, f64) {
        let (v, d1, mut d2) = self.f.eval_all_unchecked(r);
        if self.concavity_defect && r >= self.rho && r <= FRAC_PI_2 - self.rho {
            d2 = -d2;
        }
        (v, d1, d2)
    }

    /// `(h, h', h'')`
    pub(crate) fn h_all(&self, r: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.h.eval_all_unchecked((FRAC_PI_2 - r).max(0.0));
        (v, -d1, d2)
    }

    /// `(f(r), h(r))` without domain checks.
    pub(crate) fn warps(&self, r: f64) -> (f64, f64) {
        (self.f_all(r).0, self.h_all(r).0)
    }

    /// Diagonal components `(1, f^2, h^2)` at a point.
    pub fn metric_components(&self, point: Point) -> Result<[f64; 3]> {
        Self::check_r(point[0])?;
        let f = self.f_all(point[0]).0;
        let h = self.h_all(point[0]).0;
        Ok([1.0, f * f, h * h])
    }

    pub fn christoffel(&self, point: Point) -> Result<Christoffel> {
        let r = point[0];
        Self::check_interior(r)?;
        let (f, fp, _) = self.f_all(r);
        let (h, hp, _) = self.h_all(r);
        Ok(Christoffel {
            r_theta_theta: -f * fp,
            r_t_t: -h * hp,
            theta_r_theta: fp / f,
            t_r_t: hp / h,
        })
    }

    pub fn principal_curvatures(&self, r: f64) -> Result<PrincipalCurvatures> {
        Self::check_interior(r)?;
        let (f, fp, fpp) = self.f_all(r);
        let (h, hp, hpp) = self.h_all(r);
        Ok(PrincipalCurvatures {
            k23: -fp * hp / (f * h),
            k13: -hpp / h,
            k12: -fpp / f,
        })
    }

    /// Sectional curvature of the plane spanned by `x` and `y`. The curvature
    /// operator is diagonal in the frame `(d_r, d_theta/f, d_t/h)`, so the
    /// value is a weighted sum of the principal curvatures by the squared
    /// components of the plane's unit normal.
    pub fn sectional_curvature(&self, point: Point, x: Vector, y: Vector) -> Result<f64> {
        let r = point[0];
        Self::check_interior(r)?;
        let (f, h) = self.warps(r);
        let xf = [x[0], f * x[1], h * x[2]];
        let yf = [y[0], f * y[1], h * y[2]];
        let normal = cross(xf, yf);
        let nn = dot(normal, normal);
        let gram = nn / (dot(xf, xf) * dot(yf, yf));
        if !(gram >= 1e-12) {
            return Err(Error::DegeneratePlane { gram });
        }
        let k = self.principal_curvatures(r)?;
        Ok(
            (k.k23 * normal[0].powi(2) + k.k13 * normal[1].powi(2) + k.k12 * normal[2].powi(2))
                / nn,
        )
    }

    /// Sectional curvature from the metric components alone: central
    /// differences give the Christoffel symbols, a second round of central
    /// differences gives the Riemann tensor; one Richardson step on top.
    pub fn fd_curvature_oracle(&self, point: Point, x: Vector, y: Vector) -> Result<f64> {
        self.fd_check_point(point)?;
        let gram = {
            let g = self.fd_metric(point);
            let gxx = quad_form(&g, x, x);
            let gyy = quad_form(&g, y, y);
            let gxy = quad_form(&g, x, y);
            (gxx * gyy - gxy * gxy) / (gxx * gyy)
        };
        if !(gram >= 1e-12) {
            return Err(Error::DegeneratePlane { gram });
        }
        let step = FD_STEP;
        let coarse = self.fd_sectional(point, x, y, 2.0 * step);
        let fine = self.fd_sectional(point, x, y, step);
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Frame components `<R(e_i, e_j) e_j, e_k>` with `k` outside `{i, j}`,
    /// which vanish for a diagonal curvature operator. Returns the largest
    /// magnitude (finite differences, Richardson-extrapolated).
    pub fn fd_off_diagonal(&self, r: f64) -> Result<f64> {
        let point = [r, 0.0, 0.0];
        self.fd_check_point(point)?;
        let step = FD_STEP;
        let coarse = self.fd_frame_off_diagonal(point, 2.0 * step);
        let fine = self.fd_frame_off_diagonal(point, step);
        let mut worst: f64 = 0.0;
        for (c, f) in coarse.iter().zip(&fine) {
            worst = worst.max(((4.0 * f - c) / 3.0).abs());
        }
        Ok(worst)
    }

    fn fd_check_point(&self, point: Point) -> Result<()> {
        Self::check_interior(point[0])
    }

    fn fd_metric(&self, p: Point) -> [[f64; 3]; 3] {
        let d = self
            .metric_components([p[0].clamp(0.0, FRAC_PI_2), p[1], p[2]])
            .expect("clamped radius is in range");
        [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
    }

    fn fd_christoffel(&self, p: Point, step: f64) -> [[[f64; 3]; 3]; 3] {
        let g = self.fd_metric(p);
        let ginv = invert3(&g);
        // dg[k][i][j] = d_k g_ij
        let mut dg = [[[0.0; 3]; 3]; 3];
        for (k, dgk) in dg.iter_mut().enumerate() {
            let mut plus = p;
            let mut minus = p;
            plus[k] += step;
            minus[k] -= step;
            let gp = self.fd_metric(plus);
            let gm = self.fd_metric(minus);
            for i in 0..3 {
                for j in 0..3 {
                    dgk[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * step);
                }
            }
        }
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for (i, gi) in gamma.iter_mut().enumerate() {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        s += ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                    }
                    gi[j][k] = 0.5 * s;
                }
            }
        }
        gamma
    }

    /// `R^i_{jkl}` with `R(d_k, d_l) d_j = R^i_{jkl} d_i`.
    fn fd_riemann(&self, p: Point, step: f64) -> [[[[f64; 3]; 3]; 3]; 3] {
        let gamma = self.fd_christoffel(p, step);
        let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3]; // [k][i][j][l] = d_k Gamma^i_{jl}
        for (k, dk) in dgamma.iter_mut().enumerate() {
            let mut plus = p;
            let mut minus = p;
            plus[k] += step;
            minus[k] -= step;
            let gp = self.fd_christoffel(plus, step);
            let gm = self.fd_christoffel(minus, step);
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        dk[i][j][l] = (gp[i][j][l] - gm[i][j][l]) / (2.0 * step);
                    }
                }
            }
        }
        let mut riem = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut v = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                        for m in 0..3 {
                            v += gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j];
                        }
                        riem[i][j][k][l] = v;
                    }
                }
            }
        }
        riem
    }

    /// `<R(x, y) z, w>`
    fn fd_riemann_form(
        g: &[[f64; 3]; 3],
        riem: &[[[[f64; 3]; 3]; 3]; 3],
        x: Vector,
        y: Vector,
        z: Vector,
        w: Vector,
    ) -> f64 {
        let mut out = 0.0;
        for a in 0..3 {
            for i in 0..3 {
                if g[a][i] == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            s += riem[i][j][k][l] * x[k] * y[l] * z[j];
                        }
                    }
                }
                out += g[a][i] * w[a] * s;
            }
        }
        out
    }

    fn fd_sectional(&self, p: Point, x: Vector, y: Vector, step: f64) -> f64 {
        let g = self.fd_metric(p);
        let riem = self.fd_riemann(p, step);
        let num = Self::fd_riemann_form(&g, &riem, x, y, y, x);
        let gxx = quad_form(&g, x, x);
        let gyy = quad_form(&g, y, y);
        let gxy = quad_form(&g, x, y);
        num / (gxx * gyy - gxy * gxy)
    }

    fn fd_frame_off_diagonal(&self, p: Point, step: f64) -> Vec<f64> {
        let g = self.fd_metric(p);
        let riem = self.fd_riemann(p, step);
        let frame = [
            [1.0 / g[0][0].sqrt(), 0.0, 0.0],
            [0.0, 1.0 / g[1][1].sqrt(), 0.0],
            [0.0, 0.0, 1.0 / g[2][2].sqrt()],
        ];
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for k in 0..3 {
                    if k == i || k == j {
                        continue;
                    }
                    out.push(Self::fd_riemann_form(
                        &g, &riem, frame[i], frame[j], frame[j], frame[k],
                    ));
                }
            }
        }
        out
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn quad_form(g: &[[f64; 3]; 3], x: Vector, y: Vector) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += g[i][j] * x[i] * y[j];
        }
    }
    s
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] / det;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    pub k23: f64,
    pub k13: f64,
    pub k12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub m: u32,
    pub n: u32,
    pub rho: f64,
    pub grid_size: usize,
    pub min_curvature: f64,
    pub argmin_r: f64,
    pub argmin_plane: String,
    /// Minimum after repeatedly halving the grid step.
    pub refined_min_curvature: f64,
    pub refinement_levels: usize,
    pub middle_band_deviation: f64,
    pub off_diagonal_max: f64,
    pub band_tolerance: f64,
    pub off_diagonal_tolerance: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rows: Vec<ScanRow>,
}

impl CurvatureReport {
    pub fn positive(&self) -> bool {
        self.min_curvature > 0.0 && self.refined_min_curvature > 0.0
    }

    pub fn band_round(&self) -> bool {
        self.middle_band_deviation < self.band_tolerance
    }

    pub fn diagonal(&self) -> bool {
        self.off_diagonal_max < self.off_diagonal_tolerance
    }

    pub fn passed(&self) -> bool {
        self.positive() && self.band_round() && self.diagonal()
    }

    /// `r,K23,K13,K12` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,K23,K13,K12")?;
        for row in &self.rows {
            writeln!(out, "{},{},{},{}", row.r, row.k23, row.k13, row.k12)?;
        }
        Ok(())
    }
}

fn scan_grid(size: usize) -> Vec<f64> {
    let lo = CORE_DELTA;
    let hi = FRAC_PI_2 - CORE_DELTA;
    (0..size)
        .map(|k| {
            if k + 1 == size {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (size - 1) as f64
            }
        })
        .collect()
}

fn scan_rows(metric: &QuotientMetric, grid: &[f64]) -> Result<Vec<ScanRow>> {
    grid.par_iter()
        .map(|&r| {
            let k = metric.principal_curvatures(r)?;
            Ok(ScanRow {
                r,
                k23: k.k23,
                k13: k.k13,
                k12: k.k12,
            })
        })
        .collect()
}

fn minimum(rows: &[ScanRow]) -> (f64, f64, &'static str) {
    let mut best = (f64::INFINITY, f64::NAN, "");
    for row in rows {
        for (value, label) in [(row.k23, "K23"), (row.k13, "K13"), (row.k12, "K12")] {
            // NaN compares false, so a NaN anywhere must fail the scan
            if value.is_nan() || value < best.0 {
                best = (
                    if value.is_nan() {
                        f64::NEG_INFINITY
                    } else {
                        value
                    },
                    row.r,
                    label,
                );
            }
        }
    }
    best
}

const MAX_REFINEMENTS: usize = 6;
const REFINEMENT_TOLERANCE: f64 = 1e-6;

/// Principal curvatures on a uniform grid of `[delta, pi/2 - delta]`.
pub fn curvature_scan(metric: &QuotientMetric, grid_size: usize) -> Result<CurvatureReport> {
    if grid_size < 500 {
        return Err(Error::InvalidArgument(format!(
            "grid_size = {grid_size} must be at least 500"
        )));
    }
    let grid = scan_grid(grid_size);
    let rows = scan_rows(metric, &grid)?;
    let (min_curvature, argmin_r, plane) = minimum(&rows);

    let (band_lo, band_hi) = metric.round_band();
    let middle_band_deviation = rows
        .iter()
        .filter(|row| row.r >= band_lo && row.r <= band_hi)
        .flat_map(|row| [row.k23, row.k13, row.k12])
        .map(|k| (k - 1.0).abs())
        .fold(0.0, f64::max);

    let off = grid
        .par_iter()
        .map(|&r| metric.fd_off_diagonal(r))
        .collect::<Result<Vec<f64>>>()?;
    let off_diagonal_max = off.into_iter().fold(0.0, f64::max);

    let mut refined = min_curvature;
    let mut size = grid_size;
    let mut levels = 0;
    while levels < MAX_REFINEMENTS {
        size = 2 * size - 1;
        levels += 1;
        let finer = scan_rows(metric, &scan_grid(size))?;
        let (m, _, _) = minimum(&finer);
        let change = (m - refined).abs();
        refined = m;
        if change < REFINEMENT_TOLERANCE {
            break;
        }
    }

    Ok(CurvatureReport {
        m: metric.m,
        n: metric.n,
        rho: metric.rho,
        grid_size,
        min_curvature,
        argmin_r,
        argmin_plane: plane.to_string(),
        refined_min_curvature: refined,
        refinement_levels: levels,
        middle_band_deviation,
        off_diagonal_max,
        band_tolerance: BAND_TOLERANCE,
        off_diagonal_tolerance: OFF_DIAGONAL_TOLERANCE,
        rows,
    })
}

/// Agreement between [`QuotientMetric::sectional_curvature`] and
/// [`QuotientMetric::fd_curvature_oracle`] on random planes. Points inside the
/// collar bumps are drawn but kept out of the pass criterion; their worst
/// error is reported on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub samples: usize,
    pub seed: u64,
    /// Largest `|closed - fd| / max(1, |closed|)` outside the bump zones.
    pub max_scaled_error: f64,
    pub worst_r: f64,
    pub worst_closed_form: f64,
    pub worst_oracle: f64,
    pub bump_zone_samples: usize,
    pub bump_zone_max_scaled_error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.max_scaled_error < self.tolerance
    }
}

/// A random point in the admissible range and a random plane there.
pub fn random_plane<R: Rng>(rng: &mut R) -> (Point, Vector, Vector) {
    let r = rng.gen_range(CORE_DELTA..=FRAC_PI_2 - CORE_DELTA);
    let point = [
        r,
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.0..2.0 * PI),
    ];
    let mut v = || {
        [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]
    };
    (point, v(), v())
}

fn scaled_error(closed: f64, fd: f64) -> f64 {
    let err = (closed - fd).abs() / closed.abs().max(1.0);
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

/// Compares closed form and oracle on `samples` random planes outside the
/// bump zones (non-degenerate planes only).
pub fn oracle_cross_check(
    metric: &QuotientMetric,
    samples: usize,
    seed: u64,
) -> Result<OracleCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut smooth = Vec::with_capacity(samples);
    let mut bumps = Vec::new();
    while smooth.len() < samples {
        let (p, x, y) = random_plane(&mut rng);
        let closed = match metric.sectional_curvature(p, x, y) {
            Ok(k) => k,
            Err(Error::DegeneratePlane { .. }) => continue,
            Err(e) => return Err(e),
        };
        if metric.in_bump_zone(p[0]) {
            bumps.push((p, x, y, closed));
        } else {
            smooth.push((p, x, y, closed));
        }
    }
    let eval = |cases: &[(Point, Vector, Vector, f64)]| -> Result<Vec<(f64, f64, f64)>> {
        cases
            .par_iter()
            .map(|&(p, x, y, closed)| Ok((p[0], closed, metric.fd_curvature_oracle(p, x, y)?)))
            .collect()
    };
    let mut check = OracleCheck {
        samples,
        seed,
        max_scaled_error: 0.0,
        worst_r: f64::NAN,
        worst_closed_form: f64::NAN,
        worst_oracle: f64::NAN,
        bump_zone_samples: bumps.len(),
        bump_zone_max_scaled_error: 0.0,
        tolerance: ORACLE_TOLERANCE,
    };
    for (r, closed, fd) in eval(&smooth)? {
        let err = scaled_error(closed, fd);
        if err > check.max_scaled_error || check.worst_r.is_nan() {
            check.max_scaled_error = err;
            check.worst_r = r;
            check.worst_closed_form = closed;
            check.worst_oracle = fd;
        }
    }
    for (_, closed, fd) in eval(&bumps)? {
        check.bump_zone_max_scaled_error = check
            .bump_zone_max_scaled_error
            .max(scaled_error(closed, fd));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn coprimality_is_enforced() {
        assert!(matches!(
            build_metric(2, 4, 0.25),
            Err(Error::NotCoprime { m: 2, n: 4 })
        ));
        assert!(build_metric(2, 3, 0.25).is_ok());
    }

    #[test]
    fn round_components() {
        let g = build_metric(1, 1, 0.25).unwrap();
        let c = g.metric_components([FRAC_PI_4, 0.0, 0.0]).unwrap();
        assert_eq!(c[0], 1.0);
        assert!((c[1] - 0.5).abs() < 1e-15 && (c[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn band_components() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let c = g.metric_components([FRAC_PI_4, 0.0, 0.0]).unwrap();
        assert!((c[1] - 1.0 / 18.0).abs() < 1e-15);
        assert!((c[2] - 1.0 / 8.0).abs() < 1e-15);
        let shifted = g.metric_components([FRAC_PI_4, 1.0, 2.0]).unwrap();
        assert_eq!(c, shifted);
        assert!(g.metric_components([-0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn christoffel_values() {
        let round = build_metric(1, 1, 0.25).unwrap();
        let c = round.christoffel([FRAC_PI_4, 0.0, 0.0]).unwrap();
        assert!((c.r_theta_theta + 0.5).abs() < 1e-15);
        let g = build_metric(2, 3, 0.25).unwrap();
        let c = g.christoffel([FRAC_PI_4, 0.0, 0.0]).unwrap();
        assert!((c.theta_r_theta - 1.0).abs() < 1e-15);
        assert!(matches!(
            g.christoffel([1e-4, 0.0, 0.0]),
            Err(Error::CoreSingularity { .. })
        ));
    }

    #[test]
    fn closure_at_cores() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let (f, fp, _) = g.f_all(0.0);
        let (h, hp, _) = g.h_all(FRAC_PI_2);
        assert_eq!((f, fp), (0.0, 1.0));
        assert_eq!((h, hp), (0.0, -1.0));
    }

    #[test]
    fn collar_curvature_inside_k_collar() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let k = g.principal_curvatures(0.1).unwrap();
        // h = cos(r)/2 there, so the (r, t) plane is round
        assert!((k.k13 - 1.0).abs() < 1e-14);
        assert!(k.k12 > 0.0 && k.k23 > 0.0);
    }

    #[test]
    fn degenerate_plane() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!(matches!(
            g.sectional_curvature([0.5, 0.0, 0.0], x, y),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn coordinate_planes_give_principal_values() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let r = 0.05;
        let k = g.principal_curvatures(r).unwrap();
        let p = [r, 0.3, 0.7];
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        let e3 = [0.0, 0.0, 1.0];
        assert!((g.sectional_curvature(p, e1, e2).unwrap() - k.k12).abs() < 1e-12);
        assert!((g.sectional_curvature(p, e1, e3).unwrap() - k.k13).abs() < 1e-12);
        assert!((g.sectional_curvature(p, e2, e3).unwrap() - k.k23).abs() < 1e-12);
    }

    #[test]
    fn oracle_on_round_metric() {
        let g = build_metric(1, 1, 0.25).unwrap();
        let k = g
            .fd_curvature_oracle([0.7, 0.0, 0.0], [1.0, 0.2, -0.3], [0.1, 1.0, 0.5])
            .unwrap();
        assert!((k - 1.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn defect_hook_breaks_positivity() {
        let g = build_metric(2, 3, 0.25).unwrap().with_concavity_defect();
        let k = g.principal_curvatures(0.5).unwrap();
        assert!(k.k12 < 0.0);
    }

    #[test]
    fn bump_zones_sit_in_the_collars() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let p = g.t_profile().params().clone();
        assert!(g.in_bump_zone(FRAC_PI_2 - 0.5 * (p.a + p.c)));
        assert!(!g.in_bump_zone(0.5));
        assert!(!build_metric(1, 1, 0.25).unwrap().in_bump_zone(0.225));
    }

    #[test]
    fn oracle_matches_at_seam_and_band() {
        let g = build_metric(2, 3, 0.25).unwrap();
        let x = [0.3, 1.0, -2.0];
        let y = [1.0, -0.5, 4.0];
        for r in [0.1, g.k_collar_end(), FRAC_PI_4, g.l_collar_start()] {
            let closed = g.sectional_curvature([r, 0.0, 0.0], x, y).unwrap();
            let fd = g.fd_curvature_oracle([r, 0.0, 0.0], x, y).unwrap();
            assert!(
                (closed - fd).abs() < 1e-5 * closed.abs().max(1.0),
                "r={r}: {closed} vs {fd}"
            );
        }
    }

    #[test]
    fn scan_rejects_small_grid() {
        let g = build_metric(1, 1, 0.25).unwrap();
        assert!(curvature_scan(&g, 499).is_err());
    }
}
