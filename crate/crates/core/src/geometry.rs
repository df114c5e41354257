//! 3-D coordinates, array orientations, per-element offsets, distances, and
//! elevation angles for the Tx array, the RIS panel, the Rx, and scatterers.
//!
//! Everything here is pure arithmetic on immutable inputs; all angles are in
//! radians, all lengths in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for unit-norm and orthogonality checks on orientation vectors.
pub const ORIENTATION_TOL: f64 = 1e-9;

/// A point or direction in 3-D Cartesian space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// True if the vector has unit length within [`ORIENTATION_TOL`].
    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= ORIENTATION_TOL
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Transmitter: a uniform linear array with an explicit orientation.
///
/// `axis` is the unit direction along which the antennas are laid out and
/// `normal` the unit pointing direction of each antenna; they must be
/// orthogonal unit vectors. Invalid orientations are a hard error at
/// construction, never silently renormalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TxGeometry {
    pub position: Vec3,
    pub antennas: usize,
    pub spacing_m: f64,
    pub axis: Vec3,
    pub normal: Vec3,
}

impl TxGeometry {
    pub fn new(
        position: Vec3,
        antennas: usize,
        spacing_m: f64,
        axis: Vec3,
        normal: Vec3,
    ) -> Result<Self> {
        if antennas < 1 {
            return Err(Error::Config("tx.antennas must be >= 1".into()));
        }
        if !spacing_m.is_finite() || spacing_m <= 0.0 {
            return Err(Error::Config("tx.spacing_m must be > 0".into()));
        }
        if !position.is_finite() {
            return Err(Error::Config("tx.position_m must be finite".into()));
        }
        if !axis.is_unit() {
            return Err(Error::Config("tx.axis must be a unit vector".into()));
        }
        if !normal.is_unit() {
            return Err(Error::Config("tx.normal must be a unit vector".into()));
        }
        if axis.dot(normal).abs() > ORIENTATION_TOL {
            return Err(Error::Config(
                "tx.axis and tx.normal must be orthogonal".into(),
            ));
        }
        Ok(TxGeometry {
            position,
            antennas,
            spacing_m,
            axis,
            normal,
        })
    }
}

/// RIS panel: a rectangular grid of reflective units.
///
/// `rows * cols` units, each of size `unit_x_m` by `unit_y_m`. `row_axis`,
/// `col_axis`, and `normal` are the panel's mutually orthogonal unit vectors.
/// `reflection_magnitude` is the per-unit reflection magnitude in (0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RisGeometry {
    pub position: Vec3,
    pub rows: usize,
    pub cols: usize,
    pub unit_x_m: f64,
    pub unit_y_m: f64,
    pub row_axis: Vec3,
    pub col_axis: Vec3,
    pub normal: Vec3,
    pub reflection_magnitude: f64,
}

impl RisGeometry {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        position: Vec3,
        rows: usize,
        cols: usize,
        unit_x_m: f64,
        unit_y_m: f64,
        row_axis: Vec3,
        col_axis: Vec3,
        normal: Vec3,
        reflection_magnitude: f64,
    ) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::Config("ris.rows and ris.cols must be >= 1".into()));
        }
        if !(unit_x_m > 0.0 && unit_y_m > 0.0) {
            return Err(Error::Config("ris unit dimensions must be > 0".into()));
        }
        if !position.is_finite() {
            return Err(Error::Config("ris.position_m must be finite".into()));
        }
        for (name, v) in [
            ("ris.row_axis", row_axis),
            ("ris.col_axis", col_axis),
            ("ris.normal", normal),
        ] {
            if !v.is_unit() {
                return Err(Error::Config(format!("{name} must be a unit vector")));
            }
        }
        if row_axis.dot(col_axis).abs() > ORIENTATION_TOL
            || row_axis.dot(normal).abs() > ORIENTATION_TOL
            || col_axis.dot(normal).abs() > ORIENTATION_TOL
        {
            return Err(Error::Config(
                "ris.row_axis, ris.col_axis, ris.normal must be mutually orthogonal".into(),
            ));
        }
        if !(reflection_magnitude > 0.0 && reflection_magnitude <= 1.0) {
            return Err(Error::Config(
                "ris.reflection_magnitude must be in (0, 1]".into(),
            ));
        }
        Ok(RisGeometry {
            position,
            rows,
            cols,
            unit_x_m,
            unit_y_m,
            row_axis,
            col_axis,
            normal,
            reflection_magnitude,
        })
    }

    /// Total number of reflective units.
    pub fn unit_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Effective aperture of one reflective unit, m².
    pub fn unit_area_m2(&self) -> f64 {
        self.unit_x_m * self.unit_y_m
    }
}

/// Receiver: a single antenna with a pointing direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RxGeometry {
    pub position: Vec3,
    pub normal: Vec3,
}

impl RxGeometry {
    pub fn new(position: Vec3, normal: Vec3) -> Result<Self> {
        if !normal.is_unit() {
            return Err(Error::Config("rx.normal must be a unit vector".into()));
        }
        Ok(RxGeometry { position, normal })
    }
}

/// Offset of the m-th Tx antenna (1-based) from the array center:
/// `(m - (M+1)/2) * spacing * axis`.
pub fn tx_element_offset(tx: &TxGeometry, m: usize) -> Result<Vec3> {
    if m < 1 || m > tx.antennas {
        return Err(Error::IndexOutOfRange {
            index: m,
            count: tx.antennas,
        });
    }
    let center = (tx.antennas as f64 + 1.0) / 2.0;
    Ok(tx.axis * ((m as f64 - center) * tx.spacing_m))
}

/// Offset of the i-th reflective unit (1-based) from the panel center.
///
/// Units are numbered row-major from the bottom-left corner:
/// `i = (row - 1) * cols + col`. The row index moves along `col_axis` in
/// steps of `unit_y_m`, the column index along `row_axis` in steps of
/// `unit_x_m`.
pub fn ris_element_offset(ris: &RisGeometry, i: usize) -> Result<Vec3> {
    let count = ris.unit_count();
    if i < 1 || i > count {
        return Err(Error::IndexOutOfRange { index: i, count });
    }
    let row = ((i - 1) / ris.cols + 1) as f64;
    let col = ((i - 1) % ris.cols + 1) as f64;
    let row_center = (ris.rows as f64 + 1.0) / 2.0;
    let col_center = (ris.cols as f64 + 1.0) / 2.0;
    Ok(ris.col_axis * ((row - row_center) * ris.unit_y_m)
        + ris.row_axis * ((col - col_center) * ris.unit_x_m))
}

/// Euclidean distance between two points, meters.
pub fn distance(a: Vec3, b: Vec3) -> f64 {
    (b - a).norm()
}

/// Elevation angle between `normal` and the direction from `from` to `to`,
/// in [0, π]: `arccos((to - from) · normal / |to - from|)`.
pub fn elevation_angle(from: Vec3, normal: Vec3, to: Vec3) -> Result<f64> {
    let dir = to - from;
    let len = dir.norm();
    if len == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let cos = (dir.dot(normal) / len).clamp(-1.0, 1.0);
    Ok(cos.acos())
}
