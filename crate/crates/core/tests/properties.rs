use pointsource_core::forward::{free_space_response, FreeSpaceMedium};
use pointsource_core::identify1d::alternation_diagnostic;
use pointsource_core::identifynd::{
    alpha_ladder, build_a0, condition_d_check, distance_differences, locate_nd, multilaterate, pairwise_from_log_rho,
};
use pointsource_core::laplace::laplace_transform;
use pointsource_core::model::{DriftFieldND, PointSource, SensorRecord};
use pointsource_core::{Point, TimeGrid};
use proptest::prelude::*;

fn sensors3() -> Vec<Point> {
    vec![
        Point::spatial(1.0, 0.0, 0.0),
        Point::spatial(0.0, 1.2, 0.0),
        Point::spatial(0.0, 0.0, 1.0),
        Point::spatial(-0.8, -0.7, 0.6),
    ]
}

fn rotate_z(p: &Point, th: f64) -> Point {
    let c = p.coords();
    Point::spatial(c[0] * th.cos() - c[1] * th.sin(), c[0] * th.sin() + c[1] * th.cos(), c[2])
}

fn locate3(source: Point, sensors: &[Point]) -> Point {
    let grid = TimeGrid::covering(1e-3, 20.0).unwrap();
    let src = [PointSource::constant(source, 1.0)];
    let recs: Vec<SensorRecord> = sensors
        .iter()
        .map(|b| SensorRecord::new(*b, free_space_response(&src, b, &grid, 3, 0.0).unwrap(), grid).unwrap())
        .collect();
    locate_nd(&recs, &FreeSpaceMedium::new(3, 0.0), &alpha_ladder(8.0, 16.0).unwrap()).unwrap().x1_hat
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_cancels_prefactor(ai in 0.3f64..2.0, aj in 0.3f64..2.0) {
        let alphas: Vec<f64> = (8..=16).map(f64::from).collect();
        let g: Vec<f64> = alphas.iter().map(|a| ai / aj * (-a * (aj - ai)).exp()).collect();
        let fit = distance_differences(&alphas, &g).unwrap();
        prop_assert!((fit.d - (aj - ai)).abs() < 1e-13);
    }

    #[test]
    fn pairwise_solve_round_trip(ai in 0.3f64..3.0, ratio in 1.05f64..3.0, planar in any::<bool>(), flip in any::<bool>()) {
        let aj = if flip { ai / ratio } else { ai * ratio };
        let n = if planar { 2 } else { 3 };
        let log_rho = if planar { 0.5 * (ai / aj).ln() } else { (ai / aj).ln() };
        let (ei, ej) = pairwise_from_log_rho(n, log_rho, aj - ai).unwrap();
        prop_assert!((ei - ai).abs() < 1e-10 * ai && (ej - aj).abs() < 1e-10 * aj);
    }

    #[test]
    fn multilateration_recovers_exact_points(x in -0.8f64..0.8, y in -0.8f64..0.8, z in -0.8f64..0.8) {
        let p = Point::spatial(x, y, z);
        let s = sensors3();
        let d: Vec<f64> = s.iter().map(|b| b.distance(&p)).collect();
        let m = multilaterate(&s, &d, 3).unwrap();
        prop_assert!(m.x.distance(&p) < 1e-10);
        prop_assert!(m.rms_residual < 1e-10);
    }

    #[test]
    fn residual_grows_with_perturbation(e in 1e-4f64..1e-2) {
        let p = Point::planar(0.1, 0.2);
        let s = [Point::planar(1.0, 0.0), Point::planar(-1.0, 0.3), Point::planar(0.2, -1.1), Point::planar(0.9, 1.0)];
        let exact: Vec<f64> = s.iter().map(|b| b.distance(&p)).collect();
        let residual = |k: f64| {
            let mut d = exact.clone();
            d[2] += k * e;
            multilaterate(&s, &d, 2).unwrap().rms_residual
        };
        prop_assert!(residual(1.0) < residual(2.0));
    }

    #[test]
    fn alternation_ignores_order(mut xs in prop::collection::vec(0.0f64..1.0, 1..5), mut bs in prop::collection::vec(0.0f64..1.0, 1..5)) {
        let before = alternation_diagnostic(&xs, &bs);
        xs.reverse();
        bs.reverse();
        prop_assert_eq!(before, alternation_diagnostic(&xs, &bs));
    }

    #[test]
    fn condition_d_survives_rigid_motion(th in 0.0f64..core::f64::consts::TAU, tx in -2.0f64..2.0) {
        let mut pts = sensors3();
        pts.push(Point::spatial(0.5, 0.5, 0.0));
        let shift = Point::spatial(tx, -tx, 0.5 * tx);
        let moved: Vec<Point> = pts.iter().map(|p| rotate_z(p, th).add(&shift)).collect();
        prop_assert_eq!(condition_d_check(&pts, 3), condition_d_check(&moved, 3));
    }

    #[test]
    fn zero_drift_a0_is_a_selection(shift in -0.4f64..0.4) {
        let sources = [Point::planar(0.0, 0.0), Point::planar(4.0, 0.0), Point::planar(0.0, 4.0)];
        let sensors = [Point::planar(0.3 + shift, 0.1), Point::planar(3.6, 0.2 - shift), Point::planar(0.4, 3.5 + shift)];
        let a = build_a0(&sources, &sensors, &DriftFieldND::Zero { dim: 2 }).unwrap();
        for row in &a.entries {
            prop_assert_eq!(row.iter().filter(|v| **v == 1.0).count(), 1);
            prop_assert!(row.iter().all(|v| *v == 0.0 || *v == 1.0));
        }
        prop_assert_eq!(a.determinant.unwrap().abs(), 1.0);
    }

    #[test]
    fn laplace_transform_is_linear(c in -3.0f64..3.0, lambda in 0.5f64..50.0) {
        let grid = TimeGrid::new(1e-2, 500).unwrap();
        let f: Vec<f64> = grid.times().map(|t| t.sin()).collect();
        let g: Vec<f64> = grid.times().map(|t| (-t).exp()).collect();
        let h: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + c * b).collect();
        let lf = laplace_transform(&f, &grid, lambda).unwrap().value;
        let lg = laplace_transform(&g, &grid, lambda).unwrap().value;
        let lh = laplace_transform(&h, &grid, lambda).unwrap().value;
        prop_assert!((lh - lf - c * lg).abs() < 1e-12 * (1.0 + lh.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn localization_commutes_with_rigid_motion(th in 0.0f64..core::f64::consts::TAU, tx in -1.0f64..1.0, tz in -1.0f64..1.0) {
        let source = Point::spatial(0.2, 0.1, -0.3);
        let shift = Point::spatial(tx, 0.3, tz);
        let moved: Vec<Point> = sensors3().iter().map(|p| rotate_z(p, th).add(&shift)).collect();
        let base = locate3(source, &sensors3());
        let image = locate3(rotate_z(&source, th).add(&shift), &moved);
        prop_assert!(image.distance(&rotate_z(&base, th).add(&shift)) < 1e-6);
    }
}
