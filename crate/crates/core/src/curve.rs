//! Sampled curves in `(r, theta, t)` coordinates with unwrapped angles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geodesic::GeodesicState;
use crate::quotient::{embed_r3, QuotientPoint};

/// Samples `s -> (r, theta, t)` with velocities `d/ds`. Angles are unwrapped,
/// i.e. continuous along the curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
    pub vr: Vec<f64>,
    pub vtheta: Vec<f64>,
    pub vt: Vec<f64>,
}

impl Curve {
    pub fn with_capacity(n: usize) -> Self {
        Curve {
            s: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
            vr: Vec::with_capacity(n),
            vtheta: Vec::with_capacity(n),
            vt: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn push(&mut self, s: f64, state: &GeodesicState) {
        self.s.push(s);
        self.r.push(state.r);
        self.theta.push(state.theta);
        self.t.push(state.t);
        self.vr.push(state.vr);
        self.vtheta.push(state.vtheta);
        self.vt.push(state.vt);
    }

    pub fn state(&self, i: usize) -> GeodesicState {
        GeodesicState {
            r: self.r[i],
            theta: self.theta[i],
            t: self.t[i],
            vr: self.vr[i],
            vtheta: self.vtheta[i],
            vt: self.vt[i],
        }
    }

    pub fn length(&self) -> f64 {
        match (self.s.first(), self.s.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Same trace run backwards, parametrized from 0.
    pub fn reversed(&self) -> Curve {
        let end = self.s.last().copied().unwrap_or(0.0);
        let mut out = Curve::with_capacity(self.len());
        for i in (0..self.len()).rev() {
            let st = self.state(i);
            out.push(
                end - self.s[i],
                &GeodesicState {
                    vr: -st.vr,
                    vtheta: -st.vtheta,
                    vt: -st.vt,
                    ..st
                },
            );
        }
        out
    }

    /// Adds constant phases to both angles.
    pub fn rotated(&self, dtheta: f64, dt: f64) -> Curve {
        let mut out = self.clone();
        out.theta.iter_mut().for_each(|x| *x += dtheta);
        out.t.iter_mut().for_each(|x| *x += dt);
        out
    }

    /// Position at `s` by cubic Hermite interpolation with the stored
    /// velocities as slopes.
    pub fn position_at(&self, s: f64) -> [f64; 3] {
        let i = self.interval(s);
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        let x = (s - s0) / h;
        let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
        let h10 = x * (1.0 - x) * (1.0 - x);
        let h01 = x * x * (3.0 - 2.0 * x);
        let h11 = x * x * (x - 1.0);
        let herm = |p: &[f64], v: &[f64]| {
            h00 * p[i] + h10 * h * v[i] + h01 * p[i + 1] + h11 * h * v[i + 1]
        };
        [
            herm(&self.r, &self.vr),
            herm(&self.theta, &self.vtheta),
            herm(&self.t, &self.vt),
        ]
    }

    /// Velocity at `s`, cubic Hermite with finite-difference accelerations.
    pub fn velocity_at(&self, s: f64) -> [f64; 3] {
        let i = self.interval(s);
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        let x = (s - s0) / h;
        let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
        let h10 = x * (1.0 - x) * (1.0 - x);
        let h01 = x * x * (3.0 - 2.0 * x);
        let h11 = x * x * (x - 1.0);
        let acc = |v: &[f64], j: usize| {
            let n = v.len();
            if j == 0 {
                (v[1] - v[0]) / (self.s[1] - self.s[0])
            } else if j + 1 == n {
                (v[n - 1] - v[n - 2]) / (self.s[n - 1] - self.s[n - 2])
            } else {
                (v[j + 1] - v[j - 1]) / (self.s[j + 1] - self.s[j - 1])
            }
        };
        let herm =
            |v: &[f64]| h00 * v[i] + h10 * h * acc(v, i) + h01 * v[i + 1] + h11 * h * acc(v, i + 1);
        [herm(&self.vr), herm(&self.vtheta), herm(&self.vt)]
    }

    fn interval(&self, s: f64) -> usize {
        let n = self.len();
        assert!(n >= 2, "interpolation needs two samples");
        self.s.partition_point(|&x| x <= s).clamp(1, n - 1) - 1
    }

    /// Resamples at `count` uniformly spaced arclengths over the same span.
    pub fn resampled(&self, count: usize) -> Curve {
        assert!(count >= 2);
        let (a, b) = (self.s[0], self.s[self.len() - 1]);
        let mut out = Curve::with_capacity(count);
        for k in 0..count {
            let s = if k + 1 == count {
                b
            } else {
                a + (b - a) * k as f64 / (count - 1) as f64
            };
            let p = self.position_at(s);
            let v = self.velocity_at(s);
            out.push(
                s,
                &GeodesicState {
                    r: p[0],
                    theta: p[1],
                    t: p[2],
                    vr: v[0],
                    vtheta: v[1],
                    vt: v[2],
                },
            );
        }
        out
    }

    pub fn point(&self, i: usize) -> QuotientPoint {
        QuotientPoint::new(self.r[i], self.theta[i], self.t[i])
    }

    /// `s,r,theta_unwrapped,t_unwrapped,x,y,z`
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,r,theta_unwrapped,t_unwrapped,x,y,z")?;
        for i in 0..self.len() {
            let [x, y, z] = embed_r3(&self.point(i));
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.s[i], self.r[i], self.theta[i], self.t[i], x, y, z
            )?;
        }
        Ok(())
    }

    /// Wavefront OBJ polyline of the embedded curve.
    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            let [x, y, z] = embed_r3(&self.point(i));
            writeln!(out, "v {x} {y} {z}")?;
        }
        write!(out, "l")?;
        for i in 1..=self.len() {
            write!(out, " {i}")?;
        }
        writeln!(out)
    }
}
