mod common;

use overtake_core::geometry::{
    load_track, make_reference_line, shapes, FrenetPose, GeometryError, LineKind, RefLineConfig,
    TrackModel, Vec2,
};
use proptest::prelude::*;

fn bundled(name: &str) -> TrackModel {
    let text = std::fs::read_to_string(common::crate_dir().join("tracks").join(name)).unwrap();
    load_track(&text).unwrap()
}

#[test]
fn bundled_tracks_load() {
    let oval = bundled("oval.csv");
    let exact = 20.0 + 2.0 * std::f64::consts::PI * 3.5;
    assert!((oval.length() - exact).abs() < 0.01, "{}", oval.length());
    let bean = bundled("bean.csv");
    assert!(bean.length() > 40.0 && bean.length() < 70.0);
}

#[test]
fn oval_curvature_matches_geometry() {
    let t = common::oval();
    // mid straight and mid arc
    assert!(t.curvature_at(5.0).abs() < 1e-6);
    let mid_arc = 10.0 + 0.5 * std::f64::consts::PI * 3.5;
    assert!(
        (t.curvature_at(mid_arc) - 1.0 / 3.5).abs() < 1e-3,
        "{}",
        t.curvature_at(mid_arc)
    );
}

#[test]
fn circle_curvature_is_inverse_radius() {
    for r in [4.0, 8.0, 20.0] {
        let t = common::circle(r);
        for k in 0..10 {
            let s = t.length() * k as f64 / 10.0;
            assert!((t.curvature_at(s) - 1.0 / r).abs() < 1e-3 / r, "r = {r}");
        }
    }
}

#[test]
fn round_trip_on_the_grid() {
    let t = common::oval();
    for i in (0..t.len()).step_by(7) {
        for d in [-0.9, -0.3, 0.0, 0.4, 1.0] {
            let q = FrenetPose::new(i as f64 * t.ds(), d);
            let back = t.cart_to_frenet(t.frenet_to_cart(q)).unwrap();
            assert!(
                t.signed_gap(q.s, back.s).abs() < 1e-9,
                "s {} vs {}",
                q.s,
                back.s
            );
            assert!((back.d - d).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn round_trip_anywhere(u in 0.0f64..1.0, d in -1.0f64..1.0) {
        let t = common::oval();
        let q = FrenetPose::new(u * t.length(), d);
        let p = t.frenet_to_cart(q);
        let back = t.cart_to_frenet(p).unwrap();
        // the projection lands on the same Cartesian point
        prop_assert!(t.frenet_to_cart(back).dist(p) < 1e-3);
        prop_assert!(t.signed_gap(q.s, back.s).abs() < 0.02);
        prop_assert!((back.d - d).abs() < 0.02);
    }

    #[test]
    fn gaps_are_consistent(a in -100.0f64..100.0, b in -100.0f64..100.0) {
        let t = common::oval();
        let l = t.length();
        let fwd = t.forward_gap(a, b);
        prop_assert!((0.0..l).contains(&fwd));
        let signed = t.signed_gap(a, b);
        prop_assert!(signed.abs() <= 0.5 * l + 1e-9);
        prop_assert!(t.wrap_s(a + signed).sub_wrapped(t.wrap_s(b), l) < 1e-6);
    }
}

trait WrappedDiff {
    fn sub_wrapped(self, other: f64, l: f64) -> f64;
}

impl WrappedDiff for f64 {
    fn sub_wrapped(self, other: f64, l: f64) -> f64 {
        let d = (self - other).rem_euclid(l);
        d.min(l - d)
    }
}

#[test]
fn far_point_is_rejected() {
    let t = common::oval();
    let err = t.cart_to_frenet(Vec2::new(5.0, -5.0)).unwrap_err();
    assert!(
        matches!(err, GeometryError::OutOfCorridor { .. }),
        "{err:?}"
    );
}

#[test]
fn file_errors() {
    let good = shapes::to_csv(&shapes::oval(10.0, 3.5, 1.1, 0.1));
    assert!(load_track(&good).is_ok());

    let no_header = good.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(
        load_track(&no_header).unwrap_err(),
        GeometryError::MissingHeader
    );

    let short: String = good.lines().take(10).map(|l| format!("{l}\n")).collect();
    assert!(matches!(
        load_track(&short).unwrap_err(),
        GeometryError::TooFewPoints {
            found: 9,
            required: 20
        }
    ));

    // third data row broken
    let mut rows: Vec<String> = good.lines().map(str::to_string).collect();
    rows[3] = "1.0,nan,1.1,1.1".into();
    match load_track(&rows.join("\n")).unwrap_err() {
        GeometryError::Row { row, .. } => assert_eq!(row, 3),
        e => panic!("{e:?}"),
    }
    rows[3] = "1.0,0.0,-1.0,1.1".into();
    assert!(matches!(
        load_track(&rows.join("\n")).unwrap_err(),
        GeometryError::Row { row: 3, .. }
    ));

    // an open horseshoe
    let open: String = good.lines().take(200).map(|l| format!("{l}\n")).collect();
    assert!(matches!(
        load_track(&open).unwrap_err(),
        GeometryError::NotClosed { .. }
    ));
}

#[test]
fn reference_lines_on_the_oval() {
    let t = common::oval();
    let cfg = RefLineConfig::default();
    let center = make_reference_line(&t, LineKind::Centerline, 5.0, &cfg).unwrap();
    let short = make_reference_line(&t, LineKind::ShortestPath, 5.0, &cfg).unwrap();
    let racing = make_reference_line(&t, LineKind::RacingLine, 5.0, &cfg).unwrap();

    assert!(center.offsets.iter().all(|&d| d == 0.0));
    let lc = center.path_length(&t);
    let ls = short.path_length(&t);
    let lr = racing.path_length(&t);
    assert!(ls <= lr + 1e-6 && lr <= lc + 1e-6, "{ls} {lr} {lc}");

    let margin = cfg.margin();
    for line in [&center, &short, &racing] {
        for i in 0..t.len() {
            let d = line.offsets[i];
            assert!(
                d <= t.width_left()[i] - margin + 1e-6 && d >= -t.width_right()[i] + margin - 1e-6
            );
            assert!(line.speed[i] > 0.0 && line.speed[i] <= 5.0 + 1e-12);
        }
    }
    // the racing line opens the corners, so it laps faster
    assert!(racing.lap_time() < center.lap_time());
}

#[test]
fn speed_profile_respects_lateral_acceleration() {
    let t = common::circle(4.0);
    let cfg = RefLineConfig::default();
    let line = make_reference_line(&t, LineKind::Centerline, 10.0, &cfg).unwrap();
    let cap = (cfg.a_lat_max * 4.0).sqrt();
    for &v in &line.speed {
        assert!((v - cap).abs() < 0.01, "{v} vs {cap}");
    }
}

#[test]
fn non_positive_lap_speed_is_rejected() {
    let t = common::oval();
    assert!(make_reference_line(&t, LineKind::Centerline, 0.0, &RefLineConfig::default()).is_err());
}
