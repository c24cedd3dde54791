use std::f64::consts::{FRAC_PI_2, PI};

use isar_core::kinematics::{animate, make_trajectory, KinematicsError, Maneuver, Route};
use isar_core::mesh::fleet::{build, VehicleKind};
use isar_core::mesh::Part;
use isar_core::Mesh;
use nalgebra::Vector3;
use proptest::prelude::*;

fn car() -> Mesh {
    build(VehicleKind::MidSizeCar)
}

fn route_strategy() -> impl Strategy<Value = Route> {
    (0..16usize).prop_map(|i| Route::all()[i])
}

#[test]
fn all_routes_turn_by_the_expected_angle() {
    let mesh = car();
    for route in Route::all() {
        let plan = make_trajectory::<f64>(route, 6.0, 5.0, 0.01).unwrap();
        let frames = animate(&mesh, &plan);
        let turn = frames.yaw[frames.len() - 1] - frames.yaw[0];
        let want = match route.maneuver {
            Maneuver::Straight => 0.0,
            Maneuver::Right => -FRAC_PI_2,
            Maneuver::Left => FRAC_PI_2,
            Maneuver::UTurn => PI,
        };
        assert!((turn - want).abs() < 1e-6, "{route}: turned {turn}");
        assert_eq!(frames.len(), 501);
        assert!((frames.path_length() - 30.0).abs() < 0.05, "{route}: {}", frames.path_length());
    }
}

#[test]
fn short_duration_reports_minimum() {
    let err = make_trajectory::<f64>("W2W".parse().unwrap(), 1.0, 2.0, 0.01).unwrap_err();
    match err {
        KinematicsError::TooShort { min_duration_s, .. } => assert!(min_duration_s > 2.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn wheel_top_moves_at_twice_the_vehicle_speed() {
    let mesh = car();
    let plan = make_trajectory::<f64>("S2N".parse().unwrap(), 5.0, 4.0, 0.001).unwrap();
    let frames = animate(&mesh, &plan);
    let r = frames.rig.radii[0];
    let up = Vector3::new(0.0, 0.0, r);
    for f in [100, 1500, 3000] {
        let xf = frames.transforms(f);
        // material points currently at the top and at the contact patch
        let top = xf.rot[1].transpose() * up;
        let bottom = -top;
        let probe = |f: usize, local: &Vector3<f64>| {
            let xf = frames.transforms(f);
            xf.origin[1] + xf.rot[1] * local
        };
        let dt = plan.frame_dt;
        let v_top = (probe(f + 1, &top) - probe(f - 1, &top)).norm() / (2.0 * dt);
        let v_bottom = (probe(f + 1, &bottom) - probe(f - 1, &bottom)).norm() / (2.0 * dt);
        assert!((v_top / 10.0 - 1.0).abs() < 1e-3, "top {v_top}");
        assert!(v_bottom < 1e-3, "contact point slides at {v_bottom}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chassis_is_rigid(route in route_strategy(), speed in 6.0f64..12.0, f in 1usize..500) {
        let mesh = car();
        let plan = make_trajectory::<f64>(route, speed, 5.0, 0.01).unwrap();
        let frames = animate(&mesh, &plan);
        let chassis: Vec<usize> = mesh
            .facets
            .iter()
            .enumerate()
            .filter(|(_, x)| x.part == Part::Chassis)
            .map(|(i, _)| i)
            .step_by(97)
            .collect();
        let p0 = frames.positions(0);
        let pf = frames.positions(f);
        for w in chassis.windows(2) {
            let d0 = (p0[w[0]] - p0[w[1]]).norm();
            let df = (pf[w[0]] - pf[w[1]]).norm();
            prop_assert!((d0 - df).abs() < 1e-9);
        }
        let n = frames.normals(f);
        prop_assert!(n.iter().all(|v| (v.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn yaw_is_continuous(route in route_strategy(), speed in 6.0f64..12.0, dt in 0.005f64..0.05) {
        let plan = make_trajectory::<f64>(route, speed, 5.0, dt).unwrap();
        let frames = animate(&car(), &plan);
        let step = speed * dt;
        // tightest curvature is the U-turn radius
        let bound = step / 3.5 + 1e-9;
        for w in frames.yaw.windows(2) {
            prop_assert!((w[1] - w[0]).abs() <= bound * 1.01, "jump {}", w[1] - w[0]);
        }
    }

    #[test]
    fn wheel_spin_matches_path(route in route_strategy(), speed in 6.0f64..12.0) {
        let plan = make_trajectory::<f64>(route, speed, 5.0, 0.01).unwrap();
        let frames = animate(&car(), &plan);
        let last = frames.len() - 1;
        for (k, r) in frames.rig.radii.iter().enumerate() {
            let want = frames.path_length() / r;
            prop_assert!((frames.wheel_angle[last][k] - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn interpolated_pose_is_between_frames(route in route_strategy(), t in 0.0f64..5.0) {
        let plan = make_trajectory::<f64>(route, 8.0, 5.0, 0.01).unwrap();
        let frames = animate(&car(), &plan);
        let i = ((t / 0.01).floor() as usize).min(frames.len() - 2);
        let c = frames.center_at(t);
        let a = frames.centers[i];
        let b = frames.centers[i + 1];
        prop_assert!((c - a).norm() + (b - c).norm() <= (b - a).norm() + 1e-9);
    }
}
