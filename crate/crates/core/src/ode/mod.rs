//! Explicit Runge-Kutta 8(5,3) integrator with dense output.

mod tableau;

use tableau::{A, C, D, E3, E5, STAGES};

use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;
const ORDER: f64 = 7.0;
const DENSE_TERMS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
    pub max_steps: usize,
    /// Bit `k` set: component `k` is controlled by `atol` alone (for
    /// unbounded cyclic coordinates whose size says nothing about accuracy).
    pub absolute_mask: u64,
}

impl Options {
    pub fn with_tolerance(tol: f64) -> Self {
        Options {
            rtol: tol,
            atol: tol,
            ..Options::default()
        }
    }
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: f64::INFINITY,
            first_step: None,
            max_steps: 10_000_000,
            absolute_mask: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// An accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t_old: f64,
    pub t: f64,
    pub y_old: [f64; N],
    pub y: [f64; N],
    pub f_old: [f64; N],
    pub f: [f64; N],
    terms: [[f64; N]; DENSE_TERMS],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `t` in `[t_old, t]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t - self.t_old;
        let x = (t - self.t_old) / h;
        let mut y = [0.0; N];
        for (i, term) in self.terms.iter().rev().enumerate() {
            for k in 0..N {
                y[k] += term[k];
                y[k] *= if i % 2 == 0 { x } else { 1.0 - x };
            }
        }
        for k in 0..N {
            y[k] += self.y_old[k];
        }
        y
    }
}

/// What the observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

fn rms<const N: usize>(v: &[f64; N]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    opts: &Options,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale: [f64; N] = std::array::from_fn(|k| opts.atol + y0[k].abs() * opts.rtol);
    let d0 = rms::<N>(&std::array::from_fn(|k| y0[k] / scale[k]));
    let d1 = rms::<N>(&std::array::from_fn(|k| f0[k] / scale[k]));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|k| y0[k] + h0 * f0[k]);
    let f1 = f(t0 + h0, &y1);
    let d2 = rms::<N>(&std::array::from_fn(|k| (f1[k] - f0[k]) / scale[k])) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (ORDER + 1.0))
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end > t0`, handing every
/// accepted step to `observer`. Returns the time reached (earlier than
/// `t_end` when the observer stopped) and step statistics.
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    mut observer: O,
) -> Result<(f64, Stats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&DenseStep<N>) -> Result<Control>,
{
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!(
            "integration interval [{t0}, {t_end}] is empty"
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y);
    stats.evaluations += 1;
    let mut h = match opts.first_step {
        Some(h) => h,
        None => {
            stats.evaluations += 1;
            initial_step(&mut f, t, &y, &fy, opts)
        }
    }
    .min(opts.max_step);

    let mut k = [[0.0; N]; 16];
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { s: t });
        }
        let min_step = 10.0 * (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
        let mut rejected = false;
        let (t_new, y_new, f_new) = loop {
            if h < min_step {
                return Err(Error::StepSizeUnderflow { s: t });
            }
            let mut step = h.min(opts.max_step);
            let mut t_new = t + step;
            if t_new > t_end {
                t_new = t_end;
                step = t_end - t;
            }
            k[0] = fy;
            for s in 1..STAGES {
                let ys: [f64; N] = std::array::from_fn(|c| {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][c];
                    }
                    y[c] + step * acc
                });
                k[s] = f(t + C[s] * step, &ys);
            }
            let y_new: [f64; N] = std::array::from_fn(|c| {
                let mut acc = 0.0;
                for j in 0..STAGES {
                    acc += A[STAGES][j] * k[j][c];
                }
                y[c] + step * acc
            });
            let f_new = f(t_new, &y_new);
            k[STAGES] = f_new;
            stats.evaluations += STAGES;

            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for c in 0..N {
                let scale = if opts.absolute_mask >> c & 1 == 1 {
                    opts.atol
                } else {
                    opts.atol + y[c].abs().max(y_new[c].abs()) * opts.rtol
                };
                let (mut s5, mut s3) = (0.0, 0.0);
                for j in 0..=STAGES {
                    s5 += E5[j] * k[j][c];
                    s3 += E3[j] * k[j][c];
                }
                e5 += (s5 / scale).powi(2);
                e3 += (s3 / scale).powi(2);
            }
            let err = if e5 == 0.0 && e3 == 0.0 {
                0.0
            } else {
                step * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
            };
            if !err.is_finite() {
                // non-finite derivative: retreat hard
                stats.rejected += 1;
                h *= MIN_FACTOR;
                rejected = true;
                continue;
            }
            if err < 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                };
                if rejected {
                    factor = factor.min(1.0);
                }
                h = step * factor;
                break (t_new, y_new, f_new);
            }
            stats.rejected += 1;
            h = step * MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
            rejected = true;
        };
        stats.accepted += 1;

        let step = t_new - t;
        for s in STAGES + 1..16 {
            let ys: [f64; N] = std::array::from_fn(|c| {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][c];
                }
                y[c] + step * acc
            });
            k[s] = f(t + C[s] * step, &ys);
        }
        stats.evaluations += 3;
        let mut terms = [[0.0; N]; DENSE_TERMS];
        for c in 0..N {
            let dy = y_new[c] - y[c];
            terms[0][c] = dy;
            terms[1][c] = step * fy[c] - dy;
            terms[2][c] = 2.0 * dy - step * (f_new[c] + fy[c]);
            for (row, d) in D.iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..16 {
                    acc += d[j] * k[j][c];
                }
                terms[3 + row][c] = step * acc;
            }
        }
        let dense = DenseStep {
            t_old: t,
            t: t_new,
            y_old: y,
            y: y_new,
            f_old: fy,
            f: f_new,
            terms,
        };
        t = t_new;
        y = y_new;
        fy = f_new;
        if observer(&dense)? == Control::Stop {
            break;
        }
    }
    Ok((t, stats))
}
