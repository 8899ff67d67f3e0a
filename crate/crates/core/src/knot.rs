//! Torus-knot types of closed curves on the Heegaard tori, read off from
//! their winding pairs.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geodesic::{closure_check, CLOSURE_TOLERANCE};
use crate::metric::gcd;

pub const UNKNOT: &str = "unknot";

/// Knot type of a `(p, q)` torus curve. `(p, q)` and `(-p, -q)` describe
/// the same knot with opposite orientation and are stored with `q > 0`
/// (or `p > 0` when `q = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnotType {
    /// Winding around the theta-circles.
    pub p: i64,
    /// Winding around the t-circles.
    pub q: i64,
    /// `"unknot"` or `"T(a,b)"` with `2 <= a = min(|p|, |q|)` and `b` carrying
    /// the sign of `pq`.
    pub label: String,
    /// True iff the mirror image is a different knot.
    pub chiral_pair: bool,
    /// Alexander polynomial, ascending coefficients.
    pub alexander: Vec<i64>,
    pub mirror_label: String,
}

impl KnotType {
    pub fn is_unknot(&self) -> bool {
        self.label == UNKNOT
    }

    /// Same knot up to isotopy. `T(2,3)` from `(3, 2)` and from `(2, 3)`
    /// are equivalent but carry different winding data.
    pub fn is_equivalent(&self, other: &KnotType) -> bool {
        self.label == other.label
    }
}

fn torus_label(p: i64, q: i64) -> String {
    let (a, b) = (p.abs().min(q.abs()), p.abs().max(q.abs()));
    let sign = if (p < 0) == (q < 0) { "" } else { "-" };
    format!("T({a},{sign}{b})")
}

/// Normalizes the orientation and checks the pair is a knot, not a link.
fn canonical(p: i64, q: i64) -> Result<(i64, i64)> {
    if p == 0 && q == 0 {
        return Err(Error::InvalidArgument(
            "(0, 0) is not a closed torus curve".into(),
        ));
    }
    let d = gcd(p.unsigned_abs(), q.unsigned_abs()) as i64;
    if d > 1 {
        return Err(Error::NotCoprimeWindings { p, q, gcd: d });
    }
    Ok(if q < 0 || (q == 0 && p < 0) {
        (-p, -q)
    } else {
        (p, q)
    })
}

/// Classifies the `(p, q)` torus curve.
pub fn classify_torus_knot(p: i64, q: i64) -> Result<KnotType> {
    let (p, q) = canonical(p, q)?;
    if p.abs().min(q.abs()) <= 1 {
        return Ok(KnotType {
            p,
            q,
            label: UNKNOT.into(),
            chiral_pair: false,
            alexander: vec![1],
            mirror_label: UNKNOT.into(),
        });
    }
    Ok(KnotType {
        p,
        q,
        label: torus_label(p, q),
        chiral_pair: true,
        alexander: alexander_polynomial(p, q)?,
        mirror_label: torus_label(-p, q),
    })
}

/// Mirror image: negates `p`. The unknot is its own mirror.
pub fn mirror(k: &KnotType) -> KnotType {
    if k.is_unknot() {
        return k.clone();
    }
    KnotType {
        p: -k.p,
        q: k.q,
        label: k.mirror_label.clone(),
        chiral_pair: k.chiral_pair,
        alexander: k.alexander.clone(),
        mirror_label: k.label.clone(),
    }
}

/// Winding pair `(p, q)` of a closed curve over its first period.
pub fn winding_numbers(c: &Curve) -> Result<(i64, i64)> {
    Ok(closure_check(c, CLOSURE_TOLERANCE)?.windings)
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `x^k - 1`, ascending.
fn x_pow_minus_one(k: usize) -> Vec<i64> {
    let mut v = vec![0; k + 1];
    v[0] = -1;
    v[k] = 1;
    v
}

/// Exact division of integer polynomials by a monic divisor; `None` if the
/// remainder is non-zero.
fn poly_div_exact(num: &[i64], den: &[i64]) -> Option<Vec<i64>> {
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1);
    if num.len() < den.len() {
        return None;
    }
    let mut rem = num.to_vec();
    let mut quot = vec![0; num.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        for (j, d) in den.iter().enumerate() {
            rem[k + j] -= c * d;
        }
    }
    rem.iter().all(|&x| x == 0).then_some(quot)
}

/// `(x^{|pq|} - 1)(x - 1) / ((x^{|p|} - 1)(x^{|q|} - 1))`, ascending
/// coefficients.
pub fn alexander_polynomial(p: i64, q: i64) -> Result<Vec<i64>> {
    let (a, b) = (p.unsigned_abs(), q.unsigned_abs());
    if a < 2 || b < 2 {
        return Err(Error::InvalidArgument(format!(
            "({p}, {q}) is not a non-trivial torus knot"
        )));
    }
    let d = gcd(a, b);
    if d > 1 {
        return Err(Error::NotCoprimeWindings {
            p,
            q,
            gcd: d as i64,
        });
    }
    let (a, b) = (a as usize, b as usize);
    let num = poly_mul(&x_pow_minus_one(a * b), &x_pow_minus_one(1));
    let den = poly_mul(&x_pow_minus_one(a), &x_pow_minus_one(b));
    poly_div_exact(&num, &den)
        .ok_or_else(|| Error::InvalidArgument(format!("division for ({p}, {q}) is not exact")))
}
