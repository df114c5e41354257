//! Immutable scene description: room, Tx array, RIS panel, Rx properties,
//! radiation patterns, path-loss parameters, and the survey area of interest.
//!
//! `Scene::new` validates everything once and precomputes the per-element
//! geometry tables the channel equations reuse at every position (unit
//! positions, Tx-antenna-to-unit distances and their phase factors).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    distance, elevation_angle, ris_element_offset, tx_element_offset, RisGeometry, RxGeometry,
    TxGeometry, Vec3,
};
use crate::propagation::PathlossParams;
use crate::radiation::Pattern;

/// Rectangular room, axis-aligned with the floor corner at the origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Room {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

impl Room {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.width_m > 0.0 && self.height_m > 0.0) {
            return Err(Error::Config("room dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn contains_footprint(&self, x: f64, y: f64) -> bool {
        (0.0..=self.length_m).contains(&x) && (0.0..=self.width_m).contains(&y)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.contains_footprint(p.x, p.y) && (0.0..=self.height_m).contains(&p.z)
    }
}

/// Survey area of interest: an axis-aligned rectangle on the floor plan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Aoi {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
}

impl Aoi {
    pub fn x_span(&self) -> f64 {
        self.x_max_m - self.x_min_m
    }

    pub fn y_span(&self) -> f64 {
        self.y_max_m - self.y_min_m
    }

    /// Nearest point of the rectangle (at height `z`) to `p`.
    pub fn nearest_point(&self, p: Vec3, z: f64) -> Vec3 {
        Vec3::new(
            p.x.clamp(self.x_min_m, self.x_max_m),
            p.y.clamp(self.y_min_m, self.y_max_m),
            z,
        )
    }
}

/// Fully validated scene with precomputed element geometry.
#[derive(Debug, Clone)]
pub struct Scene {
    pub room: Room,
    pub tx: TxGeometry,
    pub ris: RisGeometry,
    pub rx: RxGeometry,
    /// Height of the survey plane (Rx antenna height), m.
    pub rx_height_m: f64,
    pub tx_pattern: Pattern,
    pub rx_pattern: Pattern,
    pub pathloss: PathlossParams,
    pub aoi: Aoi,

    // Precomputed tables, fixed for the scene's lifetime.
    tx_offsets: Vec<Vec3>,
    unit_positions: Vec<Vec3>,
    /// Center-to-center Tx→RIS distance, m.
    d_ti_m: f64,
    /// Per-antenna-per-unit Tx→RIS distances, row-major `[m][i]`, m.
    d_ti_elem_m: Vec<f64>,
    /// `exp(-j 2π d_ti_elem / λ)`, same layout.
    ti_phasors: Vec<Complex64>,
    /// Elevation Tx→RIS at the Tx broadside, rad.
    phi_ti: f64,
    /// Elevation RIS→Tx at the RIS broadside, rad.
    phi_it: f64,
}

impl Scene {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        room: Room,
        tx: TxGeometry,
        ris: RisGeometry,
        rx_normal: Vec3,
        rx_height_m: f64,
        tx_pattern: Pattern,
        rx_pattern: Pattern,
        pathloss: PathlossParams,
        aoi: Aoi,
    ) -> Result<Self> {
        room.validate()?;
        pathloss.validate()?;
        tx_pattern.validate()?;
        rx_pattern.validate()?;
        if !room.contains(tx.position) {
            return Err(Error::Config("tx.position_m outside the room".into()));
        }
        if !room.contains(ris.position) {
            return Err(Error::Config("ris.position_m outside the room".into()));
        }
        if !(rx_height_m > 0.0 && rx_height_m < room.height_m) {
            return Err(Error::Config("rx.height_m must lie inside the room".into()));
        }
        if !(aoi.x_min_m < aoi.x_max_m && aoi.y_min_m < aoi.y_max_m) {
            return Err(Error::Config(
                "aoi bounds must span a non-empty rectangle".into(),
            ));
        }
        if !(room.contains_footprint(aoi.x_min_m, aoi.y_min_m)
            && room.contains_footprint(aoi.x_max_m, aoi.y_max_m))
        {
            return Err(Error::Config(
                "aoi must lie inside the room footprint".into(),
            ));
        }
        // The close-in path-loss model is undefined below its reference
        // distance; refuse survey areas that get too close to Tx or RIS.
        for (name, anchor, d0) in [
            ("tx", tx.position, pathloss.d0_m),
            ("ris", ris.position, pathloss.d0_ir_m),
        ] {
            let nearest = aoi.nearest_point(anchor, rx_height_m);
            let d = distance(anchor, nearest);
            if d < d0 {
                return Err(Error::Config(format!(
                    "aoi comes within {d:.3} m of {name} (reference distance {d0} m)"
                )));
            }
        }

        let rx = RxGeometry::new(Vec3::new(0.0, 0.0, rx_height_m), rx_normal)?;

        let tx_offsets: Vec<Vec3> = (1..=tx.antennas)
            .map(|m| tx_element_offset(&tx, m))
            .collect::<Result<_>>()?;
        let unit_count = ris.unit_count();
        let unit_positions: Vec<Vec3> = (1..=unit_count)
            .map(|i| ris_element_offset(&ris, i).map(|off| ris.position + off))
            .collect::<Result<_>>()?;

        let d_ti_m = distance(tx.position, ris.position);
        let k = 2.0 * std::f64::consts::PI / pathloss.wavelength_m;
        let mut d_ti_elem_m = Vec::with_capacity(tx.antennas * unit_count);
        let mut ti_phasors = Vec::with_capacity(tx.antennas * unit_count);
        for off in &tx_offsets {
            let antenna = tx.position + *off;
            for unit in &unit_positions {
                let d = distance(antenna, *unit);
                d_ti_elem_m.push(d);
                ti_phasors.push(Complex64::cis(-k * d));
            }
        }

        let phi_ti = elevation_angle(tx.position, tx.normal, ris.position)?;
        let phi_it = elevation_angle(ris.position, ris.normal, tx.position)?;

        Ok(Scene {
            room,
            tx,
            ris,
            rx,
            rx_height_m,
            tx_pattern,
            rx_pattern,
            pathloss,
            aoi,
            tx_offsets,
            unit_positions,
            d_ti_m,
            d_ti_elem_m,
            ti_phasors,
            phi_ti,
            phi_it,
        })
    }

    pub fn wavelength_m(&self) -> f64 {
        self.pathloss.wavelength_m
    }

    /// Wavenumber `2π/λ`, rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.pathloss.wavelength_m
    }

    pub fn antennas(&self) -> usize {
        self.tx.antennas
    }

    pub fn unit_count(&self) -> usize {
        self.ris.unit_count()
    }

    /// Offset of the m-th antenna (0-based here) from the array center.
    pub fn tx_offset(&self, m: usize) -> Vec3 {
        self.tx_offsets[m]
    }

    /// World position of the i-th reflective unit (0-based here).
    pub fn unit_position(&self, i: usize) -> Vec3 {
        self.unit_positions[i]
    }

    pub fn unit_positions(&self) -> &[Vec3] {
        &self.unit_positions
    }

    pub fn d_ti_m(&self) -> f64 {
        self.d_ti_m
    }

    /// Distance from antenna `m` to unit `i` (0-based), m.
    pub fn d_ti_elem_m(&self, m: usize, i: usize) -> f64 {
        self.d_ti_elem_m[m * self.unit_positions.len() + i]
    }

    /// Row of precomputed `exp(-j 2π d_ti_elem/λ)` for antenna `m`.
    pub fn ti_phasor_row(&self, m: usize) -> &[Complex64] {
        let n = self.unit_positions.len();
        &self.ti_phasors[m * n..(m + 1) * n]
    }

    pub fn phi_ti(&self) -> f64 {
        self.phi_ti
    }

    pub fn phi_it(&self) -> f64 {
        self.phi_it
    }

    /// Rx geometry placed at a concrete survey position.
    pub fn rx_at(&self, position: Vec3) -> RxGeometry {
        RxGeometry {
            position,
            normal: self.rx.normal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn default_scene() -> Scene {
        crate::config::RunConfig::default().build_scene().unwrap()
    }

    #[test]
    fn default_scene_builds() {
        let s = default_scene();
        assert_eq!(s.antennas(), 4);
        assert_eq!(s.unit_count(), 400);
        assert!((s.d_ti_m() - 125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn element_distances_collapse_to_center_distance() {
        // As spacings shrink, per-element Tx→RIS distances approach the
        // center-to-center distance.
        let mut cfg = crate::config::RunConfig::default();
        cfg.tx.spacing_m = Some(1e-6);
        cfg.ris.unit_x_m = Some(1e-6);
        cfg.ris.unit_y_m = Some(1e-6);
        let s = cfg.build_scene().unwrap();
        for m in 0..s.antennas() {
            for i in 0..s.unit_count() {
                assert!((s.d_ti_elem_m(m, i) - s.d_ti_m()).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn aoi_outside_room_rejected() {
        let mut cfg = crate::config::RunConfig::default();
        cfg.aoi.x_max_m = 25.0;
        assert!(cfg.build_scene().is_err());
    }

    #[test]
    fn aoi_too_close_to_tx_rejected() {
        let mut cfg = crate::config::RunConfig::default();
        cfg.aoi.x_min_m = 0.0;
        cfg.rx.height_m = 3.0;
        assert!(cfg.build_scene().is_err());
    }
}
