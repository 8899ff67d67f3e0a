use thiserror::Error;

use crate::geodesic::GeodesicState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no feasible exact-sine zone: a shrank to {a:e} (n = {n}, rho = {rho})")]
    InfeasibleZone { n: u32, rho: f64, a: f64 },

    #[error("shape parameter not bracketed: {0}")]
    NoRoot(String),

    #[error("orders {m} and {n} are not coprime")]
    NotCoprime { m: i64, n: i64 },

    #[error("r = {r} lies within {delta:e} of a core circle")]
    CoreSingularity { r: f64, delta: f64 },

    #[error("tangent vectors span a degenerate plane (normalized gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("point is not on the unit sphere (|z1|^2 + |z2|^2 = {norm2})")]
    NotOnSphere { norm2: f64 },

    #[error("circle at r = {r} enters a modified collar (rho = {rho})")]
    CollarViolation { r: f64, rho: f64 },

    #[error("trajectory entered the core exclusion zone at s = {s}")]
    CoreApproach { s: f64, state: GeodesicState },

    #[error("{quantity} drifted by {drift:e} (threshold {threshold:e}) at s = {s}")]
    DriftAbort {
        quantity: &'static str,
        drift: f64,
        threshold: f64,
        s: f64,
    },

    #[error("step size underflow at s = {s}")]
    StepSizeUnderflow { s: f64 },

    #[error("no torus geodesic with windings ({p}, {q}): {reason}")]
    NoSolution { p: i64, q: i64, reason: String },

    #[error("curve does not close within its sampled length {length}")]
    NotClosed { length: f64 },

    #[error("winding increments ({theta}, {t}) are not within the rounding guard of integers")]
    WindingAmbiguous { theta: f64, t: f64 },

    #[error("windings ({p}, {q}) are not coprime (gcd {gcd}); torus link component")]
    NotCoprimeWindings { p: i64, q: i64, gcd: i64 },

    #[error("curve has {got} samples, at least {need} required")]
    TooFewSamples { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
