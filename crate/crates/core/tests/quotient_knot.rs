use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use s3knots::curve::Curve;
use s3knots::knot::*;
use s3knots::metric::{build_metric, gcd};
use s3knots::quotient::*;
use s3knots::Error;

fn sphere_point(a: f64, b: f64, c: f64) -> (Complex64, Complex64) {
    (
        Complex64::from_polar(a.cos(), b),
        Complex64::from_polar(a.sin(), c),
    )
}

/// Distance between quotient points with the angles compared on the circle.
fn point_distance(p: &QuotientPoint, q: &QuotientPoint) -> f64 {
    (p.r - q.r)
        .abs()
        .max(angle_difference(p.theta, q.theta).abs())
        .max(angle_difference(p.t, q.t).abs())
}

proptest! {
    #[test]
    fn deck_invariance(a in 0.01f64..1.56, b in -PI..PI, c in -PI..PI) {
        let (m, n) = (2u32, 3u32);
        let (z1, z2) = sphere_point(a, b, c);
        let base = quotient_map(m, n, z1, z2).unwrap();
        for k in 0..m {
            for l in 0..n {
                let w1 = z1 * Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
                let w2 = z2 * Complex64::from_polar(1.0, TAU * l as f64 / n as f64);
                let q = quotient_map(m, n, w1, w2).unwrap();
                prop_assert!(point_distance(&base, &q) < 1e-12);
            }
        }
    }

    #[test]
    fn deck_invariance_larger_groups(m in 1u32..6, n in 1u32..6, a in 0.01f64..1.56, b in -PI..PI, c in -PI..PI) {
        let (z1, z2) = sphere_point(a, b, c);
        let base = quotient_map(m, n, z1, z2).unwrap();
        let w1 = z1 * Complex64::from_polar(1.0, TAU / m as f64);
        let w2 = z2 * Complex64::from_polar(1.0, TAU * (n as f64 - 1.0) / n as f64);
        prop_assert!(point_distance(&base, &quotient_map(m, n, w1, w2).unwrap()) < 1e-12);
    }
}

#[test]
fn twenty_deck_elements() {
    // all (k, l) in Z_4 x Z_5 on one point
    let (z1, z2) = sphere_point(0.7, 0.3, -2.1);
    let base = quotient_map(4, 5, z1, z2).unwrap();
    let mut count = 0;
    for k in 0..4 {
        for l in 0..5 {
            let q = quotient_map(
                4,
                5,
                z1 * Complex64::from_polar(1.0, TAU * k as f64 / 4.0),
                z2 * Complex64::from_polar(1.0, TAU * l as f64 / 5.0),
            )
            .unwrap();
            assert!(point_distance(&base, &q) < 1e-12);
            count += 1;
        }
    }
    assert_eq!(count, 20);
}

/// Length with the quotient metric, composite Simpson over the samples.
fn metric_length(m: u32, n: u32, c: &Curve) -> f64 {
    let g = build_metric(m, n, 0.25).unwrap();
    let speed: Vec<f64> = (0..c.len())
        .map(|i| {
            let k = g.metric_components([c.r[i], c.theta[i], c.t[i]]).unwrap();
            (k[0] * c.vr[i].powi(2) + k[1] * c.vtheta[i].powi(2) + k[2] * c.vt[i].powi(2)).sqrt()
        })
        .collect();
    let n_int = c.len() - 1;
    assert!(n_int.is_multiple_of(2));
    let h = c.length() / n_int as f64;
    let mut sum = speed[0] + speed[n_int];
    for (i, v) in speed.iter().enumerate().take(n_int).skip(1) {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    sum * h / 3.0
}

#[test]
fn hopf_images_have_length_two_pi() {
    for (lambda, conj) in [
        (Complex64::new(1.0, 0.0), false),
        (Complex64::new(0.6, -0.9), true),
        (Complex64::new(0.4, 0.1), false),
    ] {
        let c = hopf_circle_image(2, 3, 0.25, lambda, conj, 1025).unwrap();
        assert!((metric_length(2, 3, &c) - TAU).abs() < 1e-8);
    }
}

#[test]
fn hopf_image_radius_and_parity() {
    let lambda = Complex64::new(0.3, 0.8);
    let c = hopf_circle_image(2, 3, 0.25, lambda, false, 512).unwrap();
    let d = hopf_circle_image(2, 3, 0.25, lambda, true, 512).unwrap();
    let expected = (lambda.norm() / (1.0 + lambda.norm_sqr()).sqrt()).asin();
    assert!(c.r.iter().all(|r| (r - expected).abs() < 1e-14));
    let last = c.len() - 1;
    let dth = |c: &Curve| (c.theta[last] - c.theta[0]) / TAU;
    let dt = |c: &Curve| (c.t[last] - c.t[0]) / TAU;
    assert!((dth(&c) + dth(&d)).abs() < 1e-9);
    assert!((dt(&c) - dt(&d)).abs() < 1e-9);
}

#[test]
fn exported_polyline_closes() {
    let c = hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), false, 256).unwrap();
    let mut buf = Vec::new();
    c.write_obj(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let verts: Vec<[f64; 3]> = text
        .lines()
        .filter(|l| l.starts_with("v "))
        .map(|l| {
            let v: Vec<f64> = l[2..].split(' ').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(verts.len(), 256);
    let (a, b) = (verts[0], verts[255]);
    assert!((0..3).all(|k| (a[k] - b[k]).abs() < 1e-9));
    assert!(text.lines().last().unwrap().starts_with("l 1 2 3"));
}

#[test]
fn hopf_windings_and_types() {
    let one = Complex64::new(1.0, 0.0);
    let c = hopf_circle_image(2, 3, 0.25, one, false, 2048).unwrap();
    assert_eq!(winding_numbers(&c).unwrap(), (3, 2));
    let k = classify_torus_knot(3, 2).unwrap();
    assert_eq!(k.label, "T(2,3)");
    let d = hopf_circle_image(2, 3, 0.25, one, true, 2048).unwrap();
    assert_eq!(winding_numbers(&d).unwrap(), (-3, 2));
    assert_eq!(classify_torus_knot(-3, 2).unwrap(), mirror(&k));

    let u = hopf_circle_image(1, 1, 0.25, one, false, 512).unwrap();
    assert_eq!(winding_numbers(&u).unwrap(), (1, 1));
    assert!(classify_torus_knot(1, 1).unwrap().is_unknot());
}

#[test]
fn core_parallel_circle() {
    // theta fixed, t running once around at unit speed
    let g = build_metric(2, 3, 0.25).unwrap();
    let r = FRAC_PI_4;
    let h = g.metric_components([r, 0.0, 0.0]).unwrap()[2].sqrt();
    let mut c = Curve::with_capacity(1025);
    let period = TAU * h;
    for i in 0..1025 {
        let s = 1.1 * period * i as f64 / 1024.0;
        c.push(
            s,
            &s3knots::geodesic::GeodesicState {
                r,
                theta: 0.4,
                t: s / h,
                vr: 0.0,
                vtheta: 0.0,
                vt: 1.0 / h,
            },
        );
    }
    assert_eq!(winding_numbers(&c).unwrap(), (0, 1));
}

#[test]
fn winding_reparametrization_invariance() {
    let base = hopf_circle_image(2, 3, 0.25, Complex64::new(0.8, 0.5), false, 4096).unwrap();
    let w = winding_numbers(&base).unwrap();
    assert_eq!(w, (3, 2));
    assert_eq!(winding_numbers(&base.resampled(3001)).unwrap(), w);
    assert_eq!(winding_numbers(&base.rotated(1.3, -2.2)).unwrap(), w);
    // start the loop at another point: shift by a quarter period
    let shifted = {
        let q = base.len() / 4;
        let mut c = Curve::with_capacity(base.len());
        for i in 0..base.len() {
            let j = (q + i) % (base.len() - 1);
            let mut st = base.state(j);
            if q + i >= base.len() - 1 {
                st.theta += 3.0 * TAU;
                st.t += 2.0 * TAU;
            }
            c.push(base.s[i], &st);
        }
        c
    };
    assert_eq!(winding_numbers(&shifted).unwrap(), w);
    let rev = base.reversed();
    assert_eq!(winding_numbers(&rev).unwrap(), (-3, -2));
    assert_eq!(
        classify_torus_knot(-3, -2).unwrap(),
        classify_torus_knot(3, 2).unwrap()
    );
}

#[test]
fn open_curve_is_refused() {
    let c = hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), false, 1024).unwrap();
    let mut half = Curve::with_capacity(512);
    for i in 0..512 {
        half.push(c.s[i], &c.state(i));
    }
    assert!(matches!(
        winding_numbers(&half),
        Err(Error::NotClosed { .. })
    ));
}

/// `Delta(x) (x^p - 1)(x^q - 1) = (x^{pq} - 1)(x - 1)` at an integer point.
fn identity_holds(coeffs: &[i64], p: u32, q: u32, x: i128) -> bool {
    let delta = coeffs
        .iter()
        .rev()
        .fold(0i128, |acc, &c| acc * x + c as i128);
    delta * (x.pow(p) - 1) * (x.pow(q) - 1) == (x.pow(p * q) - 1) * (x - 1)
}

#[test]
fn alexander_small_table() {
    assert_eq!(alexander_polynomial(3, 2).unwrap(), vec![1, -1, 1]);
    assert_eq!(alexander_polynomial(2, 3).unwrap(), vec![1, -1, 1]);
    assert_eq!(
        alexander_polynomial(3, 4).unwrap(),
        vec![1, -1, 0, 1, 0, -1, 1]
    );
    let a25 = alexander_polynomial(2, 5).unwrap();
    assert_eq!(a25.len(), 5);
    assert!(identity_holds(&a25, 2, 5, 2) && identity_holds(&a25, 2, 5, 3));
}

#[test]
fn alexander_degree_law_up_to_seven() {
    for p in -7i64..=7 {
        for q in -7i64..=7 {
            if p.abs() < 2 || q.abs() < 2 || gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
                continue;
            }
            let a = alexander_polynomial(p, q).unwrap();
            let deg = a.len() - 1;
            assert_eq!(deg as i64, (p.abs() - 1) * (q.abs() - 1));
            assert!(a.iter().eq(a.iter().rev()), "palindromic");
            assert_eq!(a.iter().sum::<i64>().abs(), 1);
            let (pa, qa) = (p.unsigned_abs() as u32, q.unsigned_abs() as u32);
            assert!(identity_holds(&a, pa, qa, 2));
            assert_eq!(a, alexander_polynomial(q, p).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn classifier_identities(p in -40i64..40, q in -40i64..40) {
        prop_assume!((p, q) != (0, 0));
        match classify_torus_knot(p, q) {
            Ok(k) => {
                prop_assert_eq!(&classify_torus_knot(-p, -q).unwrap(), &k);
                prop_assert_eq!(&mirror(&mirror(&k)), &k);
                prop_assert_eq!(k.chiral_pair, p.abs() >= 2 && q.abs() >= 2);
                if k.chiral_pair {
                    let m = classify_torus_knot(-p, q).unwrap();
                    prop_assert_ne!(&m, &k);
                    prop_assert!(!m.is_equivalent(&k));
                    prop_assert_eq!(&mirror(&k), &m);
                    prop_assert_eq!(&m.alexander, &k.alexander);
                    prop_assert!(classify_torus_knot(q, p).unwrap().is_equivalent(&k));
                } else {
                    prop_assert!(k.is_unknot());
                    prop_assert_eq!(&mirror(&k), &k);
                }
                let json = serde_json::to_value(&k).unwrap();
                for key in ["p", "q", "label", "chiral_pair", "alexander", "mirror_label"] {
                    prop_assert!(json.get(key).is_some());
                }
            }
            Err(Error::NotCoprimeWindings { gcd: d, .. }) => {
                prop_assert!(d > 1);
                prop_assert_eq!(d as u64, gcd(p.unsigned_abs(), q.unsigned_abs()));
            }
            Err(e) => prop_assert!(false, "unexpected {}", e),
        }
    }
}
