use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3knots::curve::Curve;
use s3knots::geodesic::*;
use s3knots::metric::{build_metric, QuotientMetric, CORE_DELTA};
use s3knots::quotient::hopf_circle_image;
use s3knots::Error;

/// Accelerations from the Euler-Lagrange equations of `L = g(v, v) / 2`,
/// with the metric derivatives taken by central differences.
fn lagrangian_acceleration(g: &QuotientMetric, s: &GeodesicState) -> [f64; 3] {
    let h = 1e-6;
    let at = |r: f64| g.metric_components([r, s.theta, s.t]).unwrap();
    let (p, m, c) = (at(s.r + h), at(s.r - h), at(s.r));
    let d: Vec<f64> = (0..3).map(|k| (p[k] - m[k]) / (2.0 * h)).collect();
    let v = [s.vr, s.vtheta, s.vt];
    // d/ds (g_kk v^k) = 1/2 d_k g_ii v^i v^i, and only d_r is non-zero
    let ar = (0.5 * (d[1] * v[1] * v[1] + d[2] * v[2] * v[2]) - d[0] * v[0] * v[0]) / c[0];
    let ath = -d[1] * v[0] * v[1] / c[1];
    let at_ = -d[2] * v[0] * v[2] / c[2];
    [ar, ath, at_]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhs_matches_euler_lagrange(r in 0.02f64..1.55, vr in -1.0f64..1.0, vth in -3.0f64..3.0, vt in -3.0f64..3.0) {
        let g = build_metric(2, 3, 0.25).unwrap();
        let s = GeodesicState { r, theta: 0.7, t: -1.1, vr, vtheta: vth, vt };
        let rhs = geodesic_rhs(&g, &s).unwrap();
        let a = lagrangian_acceleration(&g, &s);
        prop_assert_eq!(&rhs[..3], &[vr, vth, vt][..]);
        for k in 0..3 {
            prop_assert!((rhs[3 + k] - a[k]).abs() < 1e-7 * a[k].abs().max(1.0), "component {}: {} vs {}", k, rhs[3 + k], a[k]);
        }
    }
}

#[test]
fn first_integral_examples() {
    let round = build_metric(1, 1, 0.25).unwrap();
    let fi = first_integrals(
        &round,
        &GeodesicState {
            r: 0.4,
            theta: 0.0,
            t: 0.0,
            vr: 1.0,
            vtheta: 0.0,
            vt: 0.0,
        },
    );
    assert_eq!((fi.energy, fi.p_theta, fi.p_t), (1.0, 0.0, 0.0));
    let s2 = 2f64.sqrt();
    let fi = first_integrals(
        &round,
        &GeodesicState {
            r: FRAC_PI_4,
            theta: 0.0,
            t: 0.0,
            vr: 0.0,
            vtheta: s2,
            vt: s2,
        },
    );
    assert!((fi.energy - 2.0).abs() < 1e-15);
}

#[test]
fn rhs_refuses_cores() {
    let g = build_metric(2, 3, 0.25).unwrap();
    let s = GeodesicState {
        r: 0.5 * CORE_DELTA,
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
    assert!(matches!(
        integrate_geodesic(&g, &s, 1.0, 1e-10),
        Err(Error::CoreApproach { .. })
    ));
    // a radial geodesic runs into K
    let s = GeodesicState {
        r: 0.3,
        theta: 0.0,
        t: 0.0,
        vr: -1.0,
        vtheta: 0.0,
        vt: 0.0,
    };
    match integrate_geodesic(&g, &s, 1.0, 1e-10) {
        Err(Error::CoreApproach { s, state }) => {
            assert!(state.r < CORE_DELTA && (s - (0.3 - CORE_DELTA)).abs() < 0.01);
        }
        other => panic!("{other:?}"),
    }
}

/// Lift of a round-metric state to the unit sphere in R^4.
fn lift(r: f64, theta: f64, t: f64) -> [f64; 4] {
    [
        r.cos() * t.cos(),
        r.cos() * t.sin(),
        r.sin() * theta.cos(),
        r.sin() * theta.sin(),
    ]
}

fn lift_velocity(s: &GeodesicState) -> [f64; 4] {
    let (c, sn) = (s.r.cos(), s.r.sin());
    [
        -sn * s.vr * s.t.cos() - c * s.vt * s.t.sin(),
        -sn * s.vr * s.t.sin() + c * s.vt * s.t.cos(),
        c * s.vr * s.theta.cos() - sn * s.vtheta * s.theta.sin(),
        c * s.vr * s.theta.sin() + sn * s.vtheta * s.theta.cos(),
    ]
}

#[test]
fn round_geodesics_are_great_circles() {
    let g = build_metric(1, 1, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let s0 = random_admissible_start(&g, &mut rng, 2.0 * CORE_DELTA);
        let (c, _) = integrate_geodesic(&g, &s0, 20.0, 1e-10).unwrap();
        let x0 = lift(s0.r, s0.theta, s0.t);
        let v0 = lift_velocity(&s0);
        let mut worst: f64 = 0.0;
        for i in 0..c.len() {
            let x = lift(c.r[i], c.theta[i], c.t[i]);
            let s = c.s[i];
            for k in 0..4 {
                worst = worst.max((x[k] - (s.cos() * x0[k] + s.sin() * v0[k])).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }
}

#[test]
fn round_equator_returns() {
    let g = build_metric(1, 1, 0.25).unwrap();
    let v = 2f64.sqrt() / 2.0 / FRAC_PI_4.sin();
    let s0 = GeodesicState {
        r: FRAC_PI_4,
        theta: 0.0,
        t: 0.0,
        vr: 0.0,
        vtheta: v,
        vt: v,
    };
    let (c, _) = integrate_geodesic(&g, &s0, TAU, 1e-10).unwrap();
    let e = c.state(c.len() - 1);
    assert!((e.r - s0.r).abs() < 1e-7 && (e.theta - TAU).abs() < 1e-7 && (e.t - TAU).abs() < 1e-7);
    assert!((e.vr).abs() < 1e-7 && (e.vtheta - v).abs() < 1e-7);
    let cl = closure_check(&c, CLOSURE_TOLERANCE).unwrap();
    assert!((cl.period - TAU).abs() < 1e-6);
    assert_eq!(cl.windings, (1, 1));
}

#[test]
fn tilted_great_circle_closes() {
    // a radial one would pass through the cores, so keep a little p_theta
    let g = build_metric(1, 1, 0.25).unwrap();
    let r = FRAC_PI_4;
    let (u, w) = (0.3 / r.sin(), (1.0f64 - 0.36 - 0.09).sqrt() / r.cos());
    let s0 = GeodesicState {
        r,
        theta: 0.0,
        t: 0.0,
        vr: 0.6,
        vtheta: u,
        vt: w,
    };
    let (c, _) = integrate_geodesic(&g, &s0, 1.2 * TAU, 1e-10).unwrap();
    let cl = closure_check(&c, CLOSURE_TOLERANCE).unwrap();
    assert!((cl.period - TAU).abs() < 1e-6);
    assert_eq!(cl.windings, (1, 1));
}

#[test]
fn integrated_hopf_tangent_retraces_the_image() {
    let g = build_metric(2, 3, 0.25).unwrap();
    let img = hopf_circle_image(2, 3, 0.25, Complex64::new(0.7, -0.4), false, 2049).unwrap();
    let (c, _) = integrate_geodesic_with(
        &g,
        &img.state(0),
        TAU,
        &GeodesicOptions {
            sample_spacing: TAU / 2048.0,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(c.len(), img.len());
    let mut worst: f64 = 0.0;
    for i in 0..c.len() {
        worst = worst
            .max((c.r[i] - img.r[i]).abs())
            .max((c.theta[i] - img.theta[i]).abs())
            .max((c.t[i] - img.t[i]).abs());
    }
    assert!(worst < 1e-6, "{worst}");
    assert!(geodesic_residual(&g, &c).unwrap() < 1e-6);
    assert!(geodesic_residual(&g, &img).unwrap() < 1e-6);
}

#[test]
fn unbalanced_torus_curve_is_not_geodesic() {
    let g = build_metric(2, 3, 0.25).unwrap();
    let img = hopf_circle_image(2, 3, 0.25, Complex64::new(1.0, 0.0), false, 1025).unwrap();
    // same torus, vtheta/vt off balance, unit speed
    let (f, h) = (FRAC_PI_4.sin() / 3.0, FRAC_PI_4.cos() / 2.0);
    let (a, b) = (0.9 / f, 0.19f64.sqrt() / h);
    let mut c = Curve::with_capacity(img.len());
    for i in 0..img.len() {
        let s = img.s[i];
        c.push(
            s,
            &GeodesicState {
                r: FRAC_PI_4,
                theta: a * s,
                t: b * s,
                vr: 0.0,
                vtheta: a,
                vt: b,
            },
        );
    }
    assert!(geodesic_residual(&g, &c).unwrap() > 1e-3);
    let mut few = Curve::with_capacity(100);
    for i in 0..100 {
        few.push(img.s[i], &img.state(i));
    }
    assert!(matches!(
        geodesic_residual(&g, &few),
        Err(Error::TooFewSamples { .. })
    ));
}

#[test]
fn open_spiral_does_not_close() {
    let slope = 2f64.sqrt();
    let mut c = Curve::with_capacity(4097);
    for i in 0..4097 {
        let s = 60.0 * i as f64 / 4096.0;
        c.push(
            s,
            &GeodesicState {
                r: FRAC_PI_4,
                theta: slope * s,
                t: s,
                vr: 0.0,
                vtheta: slope,
                vt: 1.0,
            },
        );
    }
    assert!(matches!(
        closure_check(&c, CLOSURE_TOLERANCE),
        Err(Error::NotClosed { .. })
    ));
}

#[test]
fn torus_slope_values() {
    let round = build_metric(1, 1, 0.25).unwrap();
    for r in [0.01, 0.4, 1.3] {
        assert!((torus_slope(&round, r).unwrap() - 1.0).abs() < 1e-12);
    }
    let g = build_metric(2, 3, 0.25).unwrap();
    for k in 0..=20 {
        let r = 0.25 + (FRAC_PI_2 - 0.5) * k as f64 / 20.0;
        assert!((torus_slope(&g, r).unwrap() - 1.5).abs() < 1e-12);
    }
    assert!(matches!(
        torus_slope(&g, 0.0),
        Err(Error::CoreSingularity { .. })
    ));
}

#[test]
fn balance_identity_at_returned_radii() {
    let g = build_metric(2, 3, 0.25).unwrap();
    for (p, q) in [(1, 1), (2, 1), (5, 2), (3, 4)] {
        let sol = find_torus_geodesic(&g, p, q).unwrap();
        for tg in sol.geodesics() {
            assert!(tg.balance.abs() < 1e-10, "({p},{q}) balance {}", tg.balance);
            assert_eq!(tg.closure.windings, (p, q));
            assert!(tg.residual < 1e-6);
        }
    }
    assert!(matches!(
        find_torus_geodesic(&g, 2, 4),
        Err(Error::NotCoprimeWindings { .. })
    ));
    assert!(matches!(
        find_torus_geodesic(&g, 0, 0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn negative_windings_mirror_the_solution() {
    let g = build_metric(2, 3, 0.25).unwrap();
    let a = find_torus_geodesic(&g, 1, 1).unwrap().radii();
    let b = find_torus_geodesic(&g, -1, 1).unwrap().radii();
    assert_eq!(a, b);
    let sol = find_torus_geodesic(&g, -3, 2).unwrap();
    assert!(matches!(sol, TorusSolution::DegenerateBand { .. }));
    assert_eq!(sol.geodesics()[0].closure.windings, (-3, 2));
}

#[test]
fn round_metric_band_covers_the_interior() {
    let g = build_metric(1, 1, 0.25).unwrap();
    match find_torus_geodesic(&g, 1, 1).unwrap() {
        TorusSolution::DegenerateBand { band, .. } => {
            assert_eq!(band, (CORE_DELTA, FRAC_PI_2 - CORE_DELTA));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        find_torus_geodesic(&g, 2, 1),
        Err(Error::NoSolution { .. })
    ));
}

#[test]
fn trajectory_export_has_constant_integrals() {
    let g = build_metric(2, 3, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s0 = random_admissible_start(&g, &mut rng, 2.0 * CORE_DELTA);
    let (c, rep) = integrate_geodesic(&g, &s0, 10.0, 1e-10).unwrap();
    assert!(rep.max_drift() < 1e-8);
    let mut buf = Vec::new();
    write_trajectory_csv(&g, &c, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,r,theta,t,vr,vtheta,vt,E,p_theta,p_t"
    );
    for l in lines {
        let e: f64 = l.split(',').nth(7).unwrap().parse().unwrap();
        assert!((e - 1.0).abs() < 1e-8);
    }
}
