//! Close-in reference-distance path-loss models for the four path families
//! and dB ↔ linear conversion.
//!
//! All operations are pure: the shadow-fading term `chi_db` is an input, never
//! sampled here. Sub-reference geometry is a hard error rather than a clamp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RisGeometry;

/// Path-loss model parameters shared by all four path families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathlossParams {
    /// Carrier wavelength, meters.
    pub wavelength_m: f64,
    /// Reference distance for the direct and cluster paths, meters.
    pub d0_m: f64,
    /// Reference distance for the Tx→RIS hop, meters.
    pub d0_ti_m: f64,
    /// Reference distance for the RIS→Rx hop, meters.
    pub d0_ir_m: f64,
    /// Path-loss exponent on LoS-type paths.
    pub n_los: f64,
    /// Path-loss exponent on NLoS-type paths.
    pub n_nlos: f64,
    /// Shadow-fading standard deviation on LoS-type paths, dB.
    pub sigma_los_db: f64,
    /// Shadow-fading standard deviation on NLoS-type paths, dB.
    pub sigma_nlos_db: f64,
}

impl PathlossParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("d0_m", self.d0_m),
            ("d0_ti_m", self.d0_ti_m),
            ("d0_ir_m", self.d0_ir_m),
            ("n_los", self.n_los),
            ("n_nlos", self.n_nlos),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "pathloss.{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("sigma_los_db", self.sigma_los_db),
            ("sigma_nlos_db", self.sigma_nlos_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "pathloss.{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Free-space reference term `20 log10(4π d0 / λ)` shared by the LoS and
    /// SB-NLoS models, dB.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.d0_m / self.wavelength_m).log10()
    }

    /// Reference term of the RIS-reflected models,
    /// `20 log10(4π d0¹ d0² / (I Δdx Δdy A))`, dB.
    pub fn ris_reference_loss_db(&self, ris: &RisGeometry) -> f64 {
        let aperture = ris.unit_count() as f64 * ris.unit_area_m2() * ris.reflection_magnitude;
        20.0 * (4.0 * std::f64::consts::PI * self.d0_ti_m * self.d0_ir_m / aperture).log10()
    }
}

/// LoS path loss, dB.
pub fn pl_los(p: &PathlossParams, d_tr_m: f64, chi_db: f64) -> Result<f64> {
    if d_tr_m < p.d0_m {
        return Err(Error::SubReferenceDistance {
            dist_m: d_tr_m,
            d0_m: p.d0_m,
        });
    }
    Ok(p.reference_loss_db() + 10.0 * p.n_los * (d_tr_m / p.d0_m).log10() + chi_db)
}

/// VLoS (Tx→RIS→Rx) path loss, dB.
pub fn pl_vlos(
    p: &PathlossParams,
    ris: &RisGeometry,
    d_ti_m: f64,
    d_ir_m: f64,
    chi_db: f64,
) -> Result<f64> {
    if d_ti_m < p.d0_ti_m {
        return Err(Error::SubReferenceDistance {
            dist_m: d_ti_m,
            d0_m: p.d0_ti_m,
        });
    }
    if d_ir_m < p.d0_ir_m {
        return Err(Error::SubReferenceDistance {
            dist_m: d_ir_m,
            d0_m: p.d0_ir_m,
        });
    }
    Ok(p.ris_reference_loss_db(ris)
        + 10.0 * p.n_los * (d_ti_m * d_ir_m / (p.d0_ti_m * p.d0_ir_m)).log10()
        + chi_db)
}

/// SB-NLoS (Tx→cluster→Rx) path loss, dB. The distance law uses the total
/// traveled distance `d_tc + d_cr`.
pub fn pl_sb_nlos(p: &PathlossParams, d_tc_m: f64, d_cr_m: f64, chi_db: f64) -> Result<f64> {
    if !(d_tc_m > 0.0 && d_cr_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_tc_m.min(d_cr_m)));
    }
    let total = d_tc_m + d_cr_m;
    if total < p.d0_m {
        return Err(Error::SubReferenceDistance {
            dist_m: total,
            d0_m: p.d0_m,
        });
    }
    Ok(p.reference_loss_db() + 10.0 * p.n_nlos * (total / p.d0_m).log10() + chi_db)
}

/// DB-NLoS (Tx→RIS→cluster→Rx) path loss, dB.
pub fn pl_db_nlos(
    p: &PathlossParams,
    ris: &RisGeometry,
    d_ti_m: f64,
    d_ic_m: f64,
    d_cr_m: f64,
    chi_db: f64,
) -> Result<f64> {
    if !(d_ti_m > 0.0 && d_ic_m > 0.0 && d_cr_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_ti_m.min(d_ic_m).min(d_cr_m)));
    }
    Ok(p.ris_reference_loss_db(ris)
        + 10.0 * p.n_nlos * (d_ti_m * (d_ic_m + d_cr_m) / (p.d0_ti_m * p.d0_ir_m)).log10()
        + chi_db)
}

/// Linear attenuation from a path loss in dB: `10^(-PL/10)`.
pub fn db_to_linear(pl_db: f64) -> f64 {
    10f64.powf(-pl_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    const LAMBDA: f64 = 0.057655;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn params() -> PathlossParams {
        PathlossParams {
            wavelength_m: LAMBDA,
            d0_m: 1.0,
            d0_ti_m: 1.0,
            d0_ir_m: 1.0,
            n_los: 1.73,
            n_nlos: 3.19,
            sigma_los_db: 3.02,
            sigma_nlos_db: 8.29,
        }
    }

    fn ris(units_per_side: usize, reflection: f64) -> RisGeometry {
        RisGeometry::new(
            Vec3::ZERO,
            units_per_side,
            units_per_side,
            LAMBDA / 2.0,
            LAMBDA / 2.0,
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            reflection,
        )
        .unwrap()
    }

    #[test]
    fn los_reference_loss_at_5_2_ghz() {
        // 20 log10(4π / 0.057655) = 46.7676 dB.
        let expected = 20.0 * (4.0 * std::f64::consts::PI / LAMBDA).log10();
        approx(expected, 46.7676, 1e-3);
        approx(pl_los(&params(), 1.0, 0.0).unwrap(), expected, 1e-12);
    }

    #[test]
    fn los_doubling_distance_adds_slope() {
        let p = params();
        let a = pl_los(&p, 4.0, 0.0).unwrap();
        let b = pl_los(&p, 8.0, 0.0).unwrap();
        approx(b - a, 10.0 * p.n_los * 2f64.log10(), 1e-9);
    }

    #[test]
    fn los_shadow_fading_is_additive() {
        let p = params();
        let a = pl_los(&p, 3.0, 0.0).unwrap();
        let b = pl_los(&p, 3.0, 3.0).unwrap();
        approx(b - a, 3.0, 1e-12);
    }

    #[test]
    fn los_sub_reference_distance_is_error() {
        assert!(matches!(
            pl_los(&params(), 0.5, 0.0),
            Err(Error::SubReferenceDistance { .. })
        ));
    }

    #[test]
    fn vlos_doubling_unit_count_drops_6db() {
        let p = params();
        let a = pl_vlos(&p, &ris(10, 1.0), 5.0, 5.0, 0.0).unwrap();
        // 200 units: 10x20 panel.
        let b_ris = RisGeometry::new(
            Vec3::ZERO,
            10,
            20,
            LAMBDA / 2.0,
            LAMBDA / 2.0,
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            1.0,
        )
        .unwrap();
        let b = pl_vlos(&p, &b_ris, 5.0, 5.0, 0.0).unwrap();
        approx(a - b, 20.0 * 2f64.log10(), 1e-9);
    }

    #[test]
    fn vlos_doubling_reflection_magnitude_drops_6db() {
        let p = params();
        let a = pl_vlos(&p, &ris(20, 0.5), 5.0, 5.0, 0.0).unwrap();
        let b = pl_vlos(&p, &ris(20, 1.0), 5.0, 5.0, 0.0).unwrap();
        approx(a - b, 20.0 * 2f64.log10(), 1e-9);
    }

    #[test]
    fn vlos_reference_term_400_units() {
        // First term at I=400, A=1, half-wavelength units, reference distances:
        // 20 log10(4π / (400 (λ/2)²)).
        let p = params();
        let r = ris(20, 1.0);
        let expected =
            20.0 * (4.0 * std::f64::consts::PI / (400.0 * (LAMBDA / 2.0).powi(2))).log10();
        approx(pl_vlos(&p, &r, 1.0, 1.0, 0.0).unwrap(), expected, 1e-12);
        approx(expected, 31.551, 1e-3);
    }

    #[test]
    fn vlos_reference_exceeds_free_space_for_subwavelength_units() {
        let p = params();
        let single = ris(1, 1.0);
        assert!(p.ris_reference_loss_db(&single) > p.reference_loss_db());
    }

    #[test]
    fn sb_reference_term_matches_los_reference() {
        let p = params();
        approx(
            pl_sb_nlos(&p, 0.4, 0.6, 0.0).unwrap(),
            p.reference_loss_db(),
            1e-12,
        );
    }

    #[test]
    fn sb_exceeds_los_at_equal_total_distance() {
        let p = params();
        let los = pl_los(&p, 7.0, 0.0).unwrap();
        let sb = pl_sb_nlos(&p, 3.0, 4.0, 0.0).unwrap();
        assert!(
            sb > los,
            "n_nlos > n_los must make the cluster path lossier"
        );
    }

    #[test]
    fn sb_negative_shadowing_shifts_down() {
        let p = params();
        let a = pl_sb_nlos(&p, 2.0, 3.0, 0.0).unwrap();
        let b = pl_sb_nlos(&p, 2.0, 3.0, -5.0).unwrap();
        approx(a - b, 5.0, 1e-12);
    }

    #[test]
    fn db_nlos_reduces_to_reference_term() {
        let p = params();
        let r = ris(20, 1.0);
        let pl = pl_db_nlos(&p, &r, 1.0, 0.5, 0.5, 0.0).unwrap();
        approx(pl, p.ris_reference_loss_db(&r), 1e-12);
    }

    #[test]
    fn db_nlos_doubling_cluster_leg_adds_slope() {
        let p = params();
        let r = ris(20, 1.0);
        let a = pl_db_nlos(&p, &r, 5.0, 1.0, 1.0, 0.0).unwrap();
        let b = pl_db_nlos(&p, &r, 5.0, 2.0, 2.0, 0.0).unwrap();
        approx(b - a, 10.0 * p.n_nlos * 2f64.log10(), 1e-9);
    }

    #[test]
    fn db_nlos_structurally_matches_vlos() {
        // Substituting n_nlos → n_los and d_ic + d_cr → d_ir turns the DB-NLoS
        // law into the VLoS law.
        let mut p = params();
        p.n_nlos = p.n_los;
        let r = ris(20, 1.0);
        let db = pl_db_nlos(&p, &r, 5.0, 2.0, 1.0, 0.7).unwrap();
        let vlos = pl_vlos(&p, &r, 5.0, 3.0, 0.7).unwrap();
        approx(db, vlos, 1e-12);
    }

    #[test]
    fn db_to_linear_values() {
        assert_eq!(db_to_linear(0.0), 1.0);
        approx(db_to_linear(10.0), 0.1, 1e-15);
        approx(db_to_linear(46.766), 2.106e-5, 5e-9);
    }

    #[test]
    fn db_to_linear_round_trip() {
        for l in [1.0f64, 0.5, 2.3e-6, 7.7e3] {
            let pl = -10.0 * l.log10();
            let back = db_to_linear(pl);
            assert!((back - l).abs() / l < 1e-12);
        }
    }

    #[test]
    fn pathloss_strictly_increasing_in_distance() {
        let p = params();
        let r = ris(20, 1.0);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=20 {
            let d = 1.0 + k as f64;
            let v = pl_los(&p, d, 0.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        prev = f64::NEG_INFINITY;
        for k in 1..=20 {
            let d = 1.0 + k as f64;
            let v = pl_vlos(&p, &r, d, 3.0, 0.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}
