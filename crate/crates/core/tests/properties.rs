//! Property tests for the geometric and algebraic invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use riswfl::channel::{Cir, PathKind, PathTap};
use riswfl::fingerprint::rss;
use riswfl::geometry::{distance, elevation_angle, tx_element_offset, TxGeometry, Vec3};
use riswfl::propagation::db_to_linear;
use riswfl::spatial::los_probability;

fn coord() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

proptest! {
    #[test]
    fn distance_symmetric_nonnegative(ax in coord(), ay in coord(), az in coord(),
                                      bx in coord(), by in coord(), bz in coord()) {
        let a = Vec3::new(ax, ay, az);
        let b = Vec3::new(bx, by, bz);
        let d = distance(a, b);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, distance(b, a));
        prop_assert_eq!(distance(a, a), 0.0);
    }

    #[test]
    fn elevation_in_range_and_scale_invariant(dx in coord(), dy in coord(), dz in coord(), scale in 0.01..100.0f64) {
        prop_assume!(dx.abs() + dy.abs() + dz.abs() > 1e-6);
        let from = Vec3::new(1.0, 2.0, 3.0);
        let normal = Vec3::new(0.0, 0.0, 1.0);
        let d = Vec3::new(dx, dy, dz);
        let a1 = elevation_angle(from, normal, from + d).unwrap();
        let a2 = elevation_angle(from, normal, from + d * scale).unwrap();
        prop_assert!((0.0..=std::f64::consts::PI).contains(&a1));
        prop_assert!((a1 - a2).abs() < 1e-9);
    }

    #[test]
    fn tx_offsets_mirror_exactly(antennas in 1usize..12, spacing in 0.01..2.0f64) {
        let tx = TxGeometry::new(Vec3::ZERO, antennas, spacing, Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        for m in 1..=antennas {
            let a = tx_element_offset(&tx, m).unwrap();
            let b = tx_element_offset(&tx, antennas + 1 - m).unwrap();
            prop_assert_eq!(a + b, Vec3::ZERO);
        }
    }

    #[test]
    fn db_linear_round_trip(l in 1e-12..1e6f64) {
        let pl = -10.0 * l.log10();
        let back = db_to_linear(pl);
        prop_assert!((back - l).abs() / l < 1e-12);
    }

    #[test]
    fn los_probability_in_unit_interval(d in 0.0..500.0f64) {
        let p = los_probability(d);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn rss_global_phase_invariance(re1 in -1e-2..1e-2f64, im1 in -1e-2..1e-2f64,
                                   re2 in -1e-2..1e-2f64, im2 in -1e-2..1e-2f64,
                                   rot in 0.0..std::f64::consts::TAU) {
        let cir = Cir {
            taps: vec![PathTap {
                delay_s: 0.0,
                amplitudes: vec![Complex64::new(re1, im1), Complex64::new(re2, im2)],
                kind: PathKind::Los,
                source: None,
            }],
            position: Vec3::ZERO,
            measurement: 0,
        };
        let f = vec![Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
        let f_rot: Vec<Complex64> = f.iter().map(|w| w * Complex64::cis(rot)).collect();
        let a = rss(&cir, &f, 10.0).unwrap();
        let b = rss(&cir, &f_rot, 10.0).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }
}
