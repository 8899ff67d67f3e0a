//! Coordinates on the 3-sphere, the cyclic quotient map, and images of Hopf
//! circles.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geodesic::GeodesicState;

/// Radius of the core circle in the solid-torus picture of [`embed_r3`].
pub const EMBED_RADIUS: f64 = 2.0;
pub const SPHERE_TOLERANCE: f64 = 1e-10;

/// A point of the quotient: distance `r` to K and the two new angles, each
/// reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientPoint {
    pub r: f64,
    pub theta: f64,
    pub t: f64,
}

/// Reduces an angle to `[0, 2pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2pi
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Signed angular difference in `(-pi, pi]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

impl QuotientPoint {
    /// Canonical point: angles wrapped, and the angle that is undefined on a
    /// core set to 0.
    pub fn new(r: f64, theta: f64, t: f64) -> Self {
        QuotientPoint {
            r,
            theta: if r == 0.0 { 0.0 } else { wrap_angle(theta) },
            t: if r == FRAC_PI_2 { 0.0 } else { wrap_angle(t) },
        }
    }
}

/// `(z1, z2) -> (r, n arg z2, m arg z1)`.
pub fn quotient_map(m: u32, n: u32, z1: Complex64, z2: Complex64) -> Result<QuotientPoint> {
    let norm2 = z1.norm_sqr() + z2.norm_sqr();
    if !((norm2 - 1.0).abs() <= SPHERE_TOLERANCE) {
        return Err(Error::NotOnSphere { norm2 });
    }
    // arcsin|z2| on the sphere; atan2 keeps full precision near both cores
    let r = z2.norm().atan2(z1.norm());
    Ok(QuotientPoint::new(
        r,
        n as f64 * z2.arg(),
        m as f64 * z1.arg(),
    ))
}

/// Image of the Hopf circle `{z2 = lambda z1}` as a closed curve,
/// parametrized by arclength of the lift (which the quotient preserves in
/// the round band). With `conjugated`, the second coordinate is replaced by
/// its complex conjugate, reversing the theta-winding.
pub fn hopf_circle_image(
    m: u32,
    n: u32,
    rho: f64,
    lambda: Complex64,
    conjugated: bool,
    samples: usize,
) -> Result<Curve> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let min_samples = 64.max(2 * m.max(n) as usize + 2);
    if samples < min_samples {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_samples} samples, got {samples}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite".into()));
    }
    let a = 1.0 / (1.0 + lambda.norm_sqr()).sqrt();
    let radius = lambda.norm().atan2(1.0);
    if !(radius > rho && radius < FRAC_PI_2 - rho) {
        return Err(Error::CollarViolation { r: radius, rho });
    }

    let i = Complex64::i();
    let lift = |phi: f64| {
        let z1 = a * (i * phi).exp();
        let z2 = lambda * z1;
        // d/dphi of each coordinate
        let (w2, dw2) = if conjugated {
            (z2.conj(), (i * z2).conj())
        } else {
            (z2, i * z2)
        };
        (z1, i * z1, w2, dw2)
    };

    let mut curve = Curve::with_capacity(samples);
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..samples {
        let phi = if k + 1 == samples {
            TAU
        } else {
            TAU * k as f64 / (samples - 1) as f64
        };
        let (z1, dz1, w2, dw2) = lift(phi);
        let p = quotient_map(m, n, z1, w2)?;
        let (theta, t) = match prev {
            None => (p.theta, p.t),
            Some((th, tt)) => (
                th + angle_difference(p.theta, th),
                tt + angle_difference(p.t, tt),
            ),
        };
        prev = Some((theta, t));
        // d(arg z)/dphi = Im(z'/z)
        let vtheta = n as f64 * (dw2 / w2).im;
        let vt = m as f64 * (dz1 / z1).im;
        curve.push(
            phi,
            &GeodesicState {
                r: p.r,
                theta,
                t,
                vr: 0.0,
                vtheta,
                vt,
            },
        );
    }
    Ok(curve)
}

/// Solid-torus picture of the t-handle: `((R + r cos theta) cos t,
/// (R + r cos theta) sin t, r sin theta)` with `R = 2`.
pub fn embed_r3(p: &QuotientPoint) -> [f64; 3] {
    let ring = EMBED_RADIUS + p.r * p.theta.cos();
    [ring * p.t.cos(), ring * p.t.sin(), p.r * p.theta.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn point_on_k() {
        let p = quotient_map(2, 3, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!((p.r, p.theta, p.t), (0.0, 0.0, 0.0));
    }

    #[test]
    fn direct_evaluation() {
        let z1 = Complex64::new(0.0, FRAC_1_SQRT_2);
        let z2 = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let p = quotient_map(2, 1, z1, z2).unwrap();
        assert!((p.t - PI).abs() < 1e-15);
        assert!((p.r - PI / 4.0).abs() < 1e-15);
        assert_eq!(p.theta, 0.0);
    }

    #[test]
    fn off_sphere() {
        let r = quotient_map(2, 3, Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0));
        assert!(matches!(r, Err(Error::NotOnSphere { .. })));
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(-1e-18), 0.0);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((angle_difference(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn embedding() {
        let a = embed_r3(&QuotientPoint::new(0.0, 1.0, 0.0));
        assert_eq!(a, [2.0, 0.0, 0.0]);
        let b = embed_r3(&QuotientPoint::new(PI / 4.0, 0.0, PI));
        assert!((b[0] + 2.0 + PI / 4.0).abs() < 1e-15 && b[1].abs() < 1e-15 && b[2] == 0.0);
    }

    #[test]
    fn hopf_image_collar_violation() {
        let r = hopf_circle_image(2, 3, 0.25, Complex64::new(1e6, 0.0), false, 512);
        assert!(matches!(r, Err(Error::CollarViolation { .. })));
    }

    #[test]
    fn hopf_image_windings() {
        let c = hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), false, 512).unwrap();
        let n = c.len() - 1;
        assert!(((c.theta[n] - c.theta[0]) - 3.0 * TAU).abs() < 1e-9);
        assert!(((c.t[n] - c.t[0]) - 2.0 * TAU).abs() < 1e-9);
        assert!(c.r.iter().all(|r| (r - PI / 4.0).abs() < 1e-15));
        let c = hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), true, 512).unwrap();
        assert!(((c.theta[n] - c.theta[0]) + 3.0 * TAU).abs() < 1e-9);
        assert!(c.vtheta.iter().all(|v| (v + 3.0).abs() < 1e-12));
    }

    #[test]
    fn too_few_samples() {
        assert!(hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), false, 63).is_err());
        assert!(hopf_circle_image(2, 40, 0.25, Complex64::new(1.0, 0.0), false, 64).is_err());
    }
}
