//! Radiation-pattern gains of the Tx antenna, the Rx antenna, and one RIS
//! reflective unit.
//!
//! Antennas are either omnidirectional (gain 1 everywhere) or follow the
//! cosine pattern `G_max * cos^(G_max/2 - 1)(phi)` over the front hemisphere.
//! The back hemisphere (phi > π/2) radiates nothing: the gain is exactly 0
//! there for both the cosine and the RIS unit pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RisGeometry;

/// Antenna radiation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    Omnidirectional,
    /// Cosine pattern with linear peak gain `g_max` (requires `g_max >= 2`
    /// so the exponent `g_max/2 - 1` is non-negative).
    Cosine {
        g_max: f64,
    },
}

impl Pattern {
    /// Cosine pattern from a peak gain given in dB.
    pub fn cosine_from_db(g_max_db: f64) -> Result<Pattern> {
        let g_max = 10f64.powf(g_max_db / 10.0);
        Pattern::Cosine { g_max }.validate()?;
        Ok(Pattern::Cosine { g_max })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Pattern::Omnidirectional => Ok(()),
            Pattern::Cosine { g_max } => {
                if g_max >= 2.0 && g_max.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "cosine pattern requires linear g_max >= 2, got {g_max}"
                    )))
                }
            }
        }
    }
}

/// Linear antenna gain at elevation angle `phi` in [0, π].
pub fn gain_antenna(pattern: Pattern, phi: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::AngleOutOfRange {
            value_rad: phi,
            max_rad: std::f64::consts::PI,
        });
    }
    Ok(match pattern {
        Pattern::Omnidirectional => 1.0,
        Pattern::Cosine { g_max } => {
            if phi > std::f64::consts::FRAC_PI_2 {
                0.0
            } else {
                g_max * phi.cos().powf(g_max / 2.0 - 1.0)
            }
        }
    })
}

/// Peak gain of one reflective unit, `4π Δdx Δdy / λ²`.
///
/// Derived from the unit's physical aperture; never a free parameter.
pub fn ris_gain_max(ris: &RisGeometry, wavelength_m: f64) -> f64 {
    4.0 * std::f64::consts::PI * ris.unit_area_m2() / (wavelength_m * wavelength_m)
}

/// Directional factor of the unit pattern for one traversal direction:
/// `G_I,max * cos(phi)`, 0 for a shadowed panel (phi ≥ π/2).
///
/// The two-angle unit gain of [`gain_ris_unit`] factors as
/// `gain_ris_dir(phi1) * gain_ris_dir(phi2) / G_I,max`; the channel equations
/// consume the square root of the per-direction product.
pub fn gain_ris_dir(ris: &RisGeometry, wavelength_m: f64, phi: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::AngleOutOfRange {
            value_rad: phi,
            max_rad: std::f64::consts::PI,
        });
    }
    if phi >= std::f64::consts::FRAC_PI_2 {
        return Ok(0.0);
    }
    Ok(ris_gain_max(ris, wavelength_m) * phi.cos())
}

/// Linear gain of one reflective unit for an incidence angle `phi1` and a
/// reflection angle `phi2`: `G_I,max * cos(phi1) * cos(phi2)`.
///
/// Angles at or beyond π/2 mean the panel is geometrically shadowed from
/// that direction and the gain is 0.
pub fn gain_ris_unit(ris: &RisGeometry, wavelength_m: f64, phi1: f64, phi2: f64) -> Result<f64> {
    let g1 = gain_ris_dir(ris, wavelength_m, phi1)?;
    let g2 = gain_ris_dir(ris, wavelength_m, phi2)?;
    Ok(g1 * g2 / ris_gain_max(ris, wavelength_m))
}
