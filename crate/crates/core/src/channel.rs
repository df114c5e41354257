//! Per-position, per-measurement channel impulse response assembled from the
//! four path families: LoS, VLoS (via the RIS), SB-NLoS (via Tx-side
//! clusters), and DB-NLoS (via the RIS and RIS-side clusters).
//!
//! Path losses use center-to-center distances while phases use per-element
//! distances; the availability indicators gate only the LoS and VLoS
//! components. Delays are kept per tap even though the fingerprint stage sums
//! taps coherently.

use num_complex::Complex64;
use serde::Serialize;

use crate::clusters::ClusterSet;
use crate::error::{Error, Result};
use crate::geometry::{distance, elevation_angle, Vec3};
use crate::propagation::{db_to_linear, pl_db_nlos, pl_los, pl_sb_nlos, pl_vlos};
use crate::radiation::{gain_antenna, gain_ris_dir};
use crate::scene::Scene;
use crate::spatial::{ConsistencyMaps, LocalParams};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Which path family a tap belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Los,
    Vlos,
    SbNlos,
    DbNlos,
}

/// One resolvable delay tap: a complex amplitude per Tx antenna.
#[derive(Debug, Clone)]
pub struct PathTap {
    pub delay_s: f64,
    pub amplitudes: Vec<Complex64>,
    pub kind: PathKind,
    /// Cluster index within its set for SB/DB taps.
    pub source: Option<usize>,
}

/// Channel impulse response at one position for one measurement: at most one
/// LoS and one VLoS tap plus one tap per cluster.
#[derive(Debug, Clone)]
pub struct Cir {
    pub taps: Vec<PathTap>,
    pub position: Vec3,
    pub measurement: usize,
}

impl Cir {
    pub fn taps_of(&self, kind: PathKind) -> impl Iterator<Item = &PathTap> {
        self.taps.iter().filter(move |t| t.kind == kind)
    }
}

/// LoS tap, or `None` when the path is blocked. All antennas share the
/// amplitude magnitude (the loss uses the center distance); only the phase
/// varies with the per-antenna distance.
pub fn cir_los(scene: &Scene, rx: Vec3, zeta_los: bool, chi_db: f64) -> Result<Option<PathTap>> {
    if !zeta_los {
        return Ok(None);
    }
    let tx_pos = scene.tx.position;
    let d_tr = distance(tx_pos, rx);
    let phi_tr = elevation_angle(tx_pos, scene.tx.normal, rx)?;
    let phi_rt = elevation_angle(rx, scene.rx.normal, tx_pos)?;
    let loss = db_to_linear(pl_los(&scene.pathloss, d_tr, chi_db)?);
    let magnitude =
        (loss * gain_antenna(scene.tx_pattern, phi_tr)? * gain_antenna(scene.rx_pattern, phi_rt)?)
            .sqrt();
    let k = scene.wavenumber();
    let amplitudes = (0..scene.antennas())
        .map(|m| {
            let d_m = distance(tx_pos + scene.tx_offset(m), rx);
            Complex64::from_polar(magnitude, -k * d_m)
        })
        .collect();
    Ok(Some(PathTap {
        delay_s: d_tr / SPEED_OF_LIGHT_M_S,
        amplitudes,
        kind: PathKind::Los,
        source: None,
    }))
}

/// Per-antenna inner sums of the VLoS component:
/// `Σ_i exp(j(θ_i - 2π (d_ti[m,i] + d_ir[i]) / λ))`.
///
/// Exposed separately because the beam-sweeping construction is defined by
/// the property that this sum reaches magnitude `I` at its target.
pub fn vlos_unit_sums(scene: &Scene, rx: Vec3, phases: &[f64]) -> Result<Vec<Complex64>> {
    let unit_count = scene.unit_count();
    if phases.len() != unit_count {
        return Err(Error::PhaseLengthMismatch {
            got: phases.len(),
            expected: unit_count,
        });
    }
    let k = scene.wavenumber();
    // One phasor per unit for the Rx leg; the Tx-leg factors are precomputed.
    let rx_leg: Vec<Complex64> = (0..unit_count)
        .map(|i| Complex64::cis(phases[i] - k * distance(scene.unit_position(i), rx)))
        .collect();
    Ok((0..scene.antennas())
        .map(|m| {
            scene
                .ti_phasor_row(m)
                .iter()
                .zip(&rx_leg)
                .map(|(t, w)| t * w)
                .sum()
        })
        .collect())
}

/// VLoS tap, or `None` when blocked. The attenuation and radiation patterns
/// are uniform across units (units are much smaller than the hop distances);
/// the per-unit phase shifts steer the sum.
pub fn cir_vlos(
    scene: &Scene,
    rx: Vec3,
    phases: &[f64],
    zeta_vlos: bool,
    chi_db: f64,
) -> Result<Option<PathTap>> {
    if !zeta_vlos {
        return Ok(None);
    }
    let ris_pos = scene.ris.position;
    let d_ir = distance(ris_pos, rx);
    let phi_ri = elevation_angle(rx, scene.rx.normal, ris_pos)?;
    let phi_ir = elevation_angle(ris_pos, scene.ris.normal, rx)?;
    let loss = db_to_linear(pl_vlos(
        &scene.pathloss,
        &scene.ris,
        scene.d_ti_m(),
        d_ir,
        chi_db,
    )?);
    let lam = scene.wavelength_m();
    let factor = (loss
        * gain_antenna(scene.tx_pattern, scene.phi_ti())?
        * gain_antenna(scene.rx_pattern, phi_ri)?
        * gain_ris_dir(&scene.ris, lam, scene.phi_it())?
        * gain_ris_dir(&scene.ris, lam, phi_ir)?)
    .sqrt();
    let sums = vlos_unit_sums(scene, rx, phases)?;
    let amplitudes = sums.into_iter().map(|s| s * factor).collect();
    Ok(Some(PathTap {
        delay_s: (scene.d_ti_m() + d_ir) / SPEED_OF_LIGHT_M_S,
        amplitudes,
        kind: PathKind::Vlos,
        source: None,
    }))
}

/// SB-NLoS taps, one per cluster. Empty sets produce no taps.
pub fn cir_sb(scene: &Scene, rx: Vec3, sb: &ClusterSet, chi_db: f64) -> Result<Vec<PathTap>> {
    if sb.is_empty() {
        return Ok(Vec::new());
    }
    let gamma = sb.normalization();
    let tx_pos = scene.tx.position;
    let k = scene.wavenumber();
    let mut taps = Vec::with_capacity(sb.clusters.len());
    for (c_idx, cluster) in sb.clusters.iter().enumerate() {
        let d_tc = cluster.distance_m;
        let d_cr = distance(cluster.position, rx);
        let phi_tc = elevation_angle(tx_pos, scene.tx.normal, cluster.position)?;
        let phi_rc = elevation_angle(rx, scene.rx.normal, cluster.position)?;
        let loss = db_to_linear(pl_sb_nlos(&scene.pathloss, d_tc, d_cr, chi_db)?);
        let factor = gamma
            * (loss
                * gain_antenna(scene.tx_pattern, phi_tc)?
                * gain_antenna(scene.rx_pattern, phi_rc)?)
            .sqrt();

        let amplitudes = (0..scene.antennas())
            .map(|m| {
                let antenna = tx_pos + scene.tx_offset(m);
                let mut acc = Complex64::new(0.0, 0.0);
                for s in &cluster.scatterers {
                    let d_ts = distance(antenna, s.position);
                    let d_sr = distance(s.position, rx);
                    acc += s.gain * Complex64::cis(-k * (d_ts + d_sr));
                }
                acc * factor
            })
            .collect();

        taps.push(PathTap {
            delay_s: (d_tc + d_cr) / SPEED_OF_LIGHT_M_S,
            amplitudes,
            kind: PathKind::SbNlos,
            source: Some(c_idx),
        });
    }
    Ok(taps)
}

/// DB-NLoS taps, one per RIS-side cluster. Empty sets produce no taps.
pub fn cir_db(
    scene: &Scene,
    rx: Vec3,
    db: &ClusterSet,
    phases: &[f64],
    chi_db: f64,
) -> Result<Vec<PathTap>> {
    if db.is_empty() {
        return Ok(Vec::new());
    }
    let unit_count = scene.unit_count();
    if phases.len() != unit_count {
        return Err(Error::PhaseLengthMismatch {
            got: phases.len(),
            expected: unit_count,
        });
    }
    let gamma = db.normalization();
    let ris_pos = scene.ris.position;
    let lam = scene.wavelength_m();
    let k = scene.wavenumber();
    let antennas = scene.antennas();
    let mut taps = Vec::with_capacity(db.clusters.len());
    for (c_idx, cluster) in db.clusters.iter().enumerate() {
        let d_ic = cluster.distance_m;
        let d_cr = distance(cluster.position, rx);
        let phi_rc = elevation_angle(rx, scene.rx.normal, cluster.position)?;
        let phi_ic = elevation_angle(ris_pos, scene.ris.normal, cluster.position)?;
        let loss = db_to_linear(pl_db_nlos(
            &scene.pathloss,
            &scene.ris,
            scene.d_ti_m(),
            d_ic,
            d_cr,
            chi_db,
        )?);
        let factor = gamma
            * (loss
                * gain_antenna(scene.tx_pattern, scene.phi_ti())?
                * gain_antenna(scene.rx_pattern, phi_rc)?
                * gain_ris_dir(&scene.ris, lam, scene.phi_it())?
                * gain_ris_dir(&scene.ris, lam, phi_ic)?)
            .sqrt();

        let mut amplitudes = vec![Complex64::new(0.0, 0.0); antennas];
        let mut unit_leg: Vec<Complex64> = Vec::with_capacity(unit_count);
        for s in &cluster.scatterers {
            let d_sr = distance(s.position, rx);
            unit_leg.clear();
            unit_leg.extend((0..unit_count).map(|i| {
                let d_is = distance(scene.unit_position(i), s.position);
                Complex64::cis(phases[i] - k * (d_is + d_sr))
            }));
            for (m, amp) in amplitudes.iter_mut().enumerate() {
                let inner: Complex64 = scene
                    .ti_phasor_row(m)
                    .iter()
                    .zip(&unit_leg)
                    .map(|(t, w)| t * w)
                    .sum();
                *amp += s.gain * inner;
            }
        }
        for amp in &mut amplitudes {
            *amp *= factor;
        }

        taps.push(PathTap {
            delay_s: (scene.d_ti_m() + d_ic + d_cr) / SPEED_OF_LIGHT_M_S,
            amplitudes,
            kind: PathKind::DbNlos,
            source: Some(c_idx),
        });
    }
    Ok(taps)
}

/// Assemble the full CIR from explicit local channel parameters.
pub fn cir_from_params(
    scene: &Scene,
    rx: Vec3,
    params: &LocalParams<'_>,
    phases: &[f64],
) -> Result<Cir> {
    let mut taps = Vec::new();
    if let Some(tap) = cir_los(scene, rx, params.zeta_los, params.chi_los_db)? {
        taps.push(tap);
    }
    if let Some(tap) = cir_vlos(scene, rx, phases, params.zeta_vlos, params.chi_los_db)? {
        taps.push(tap);
    }
    taps.extend(cir_sb(scene, rx, params.sb, params.chi_nlos_db)?);
    taps.extend(cir_db(scene, rx, params.db, phases, params.chi_nlos_db)?);
    Ok(Cir {
        taps,
        position: rx,
        measurement: 0,
    })
}

/// Full CIR at a survey position: queries the consistency maps for the
/// availability indicators, shadow-fading terms, and cluster sets, then
/// composes all four components.
pub fn cir_total(scene: &Scene, rx: Vec3, maps: &ConsistencyMaps, phases: &[f64]) -> Result<Cir> {
    if !scene.room.contains(rx) {
        return Err(Error::OutOfRoom { x: rx.x, y: rx.y });
    }
    let params = maps.query(rx)?;
    cir_from_params(scene, rx, &params, phases)
}

/// Debug dump of one CIR as CSV: one row per tap with the delay, kind,
/// cluster index, and the complex amplitude per antenna.
pub fn cir_to_csv(cir: &Cir) -> String {
    use std::fmt::Write as _;
    let antennas = cir.taps.first().map_or(0, |t| t.amplitudes.len());
    let mut out = String::from("delay_s,kind,cluster");
    for m in 1..=antennas {
        let _ = write!(out, ",re_{m},im_{m}");
    }
    out.push('\n');
    for tap in &cir.taps {
        let kind = match tap.kind {
            PathKind::Los => "los",
            PathKind::Vlos => "vlos",
            PathKind::SbNlos => "sb_nlos",
            PathKind::DbNlos => "db_nlos",
        };
        let cluster = tap.source.map_or(String::new(), |c| c.to_string());
        let _ = write!(out, "{:.9e},{kind},{cluster}", tap.delay_s);
        for amp in &tap.amplitudes {
            let _ = write!(out, ",{:.9e},{:.9e}", amp.re, amp.im);
        }
        out.push('\n');
    }
    out
}
