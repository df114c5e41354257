//! Measurement planning (uniform Tx beamforming plus a RIS beam sweep over
//! the area of interest), received-signal-strength computation, and
//! fingerprint database assembly.
//!
//! A measurement is one (beamformer, RIS phase vector) configuration; at
//! every survey position each of the N measurements yields one RSS value.
//! RSS is the coherent narrowband sum over all delay taps; an exactly zero
//! field maps to the -200 dBm sentinel so records stay rectangular.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{cir_from_params, Cir, PathKind};
use crate::clusters::{sample_cluster_set, ClusterFamily, ClusterGenParams};
use crate::error::{Error, Result};
use crate::geometry::{distance, Vec3};
use crate::rng::substream;
use crate::scene::Scene;
use crate::spatial::{los_probability, ConsistencyMaps, LocalParams};

/// RSS sentinel for a position/measurement with no received field at all.
pub const ZERO_FIELD_RSS_DBM: f64 = -200.0;

/// One transmit configuration: Tx beamformer and RIS phase vector.
#[derive(Debug, Clone)]
pub struct Measurement {
    /// Unit-norm complex beamformer, one entry per Tx antenna.
    pub beamformer: Vec<Complex64>,
    /// Phase shift per reflective unit, in [0, 2π).
    pub ris_phases: Vec<f64>,
    /// Beam-sweep target this measurement steers toward.
    pub target: Vec3,
}

/// The ordered list of N measurement configurations.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub measurements: Vec<Measurement>,
}

impl MeasurementPlan {
    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }
}

/// Uniform beamformer: every entry `1/sqrt(M_T)`.
pub fn uniform_beamformer(antennas: usize) -> Vec<Complex64> {
    let w = 1.0 / (antennas as f64).sqrt();
    vec![Complex64::new(w, 0.0); antennas]
}

/// Beam-sweeping phases steering the panel's reflection toward `target`:
/// `θ_i = 2π (d(Tx center, unit_i) + d(unit_i, target)) / λ mod 2π`.
///
/// Phases are referenced to the Tx array center; for a single-antenna Tx the
/// VLoS unit sum at the target reaches magnitude `I` exactly.
pub fn ebs_phases(scene: &Scene, target: Vec3) -> Vec<f64> {
    let k = scene.wavenumber();
    let tx = scene.tx.position;
    scene
        .unit_positions()
        .iter()
        .map(|&unit| {
            (k * (distance(tx, unit) + distance(unit, target)))
                .rem_euclid(2.0 * std::f64::consts::PI)
        })
        .collect()
}

/// Beam-sweep targets: centers of an a×b grid tiling the area of interest
/// with `a = ⌊√N⌋` rows and `b = ⌈N/a⌉` columns; excess targets are dropped
/// row-major from the end.
fn sweep_targets(scene: &Scene, n: usize) -> Vec<Vec3> {
    let a = (n as f64).sqrt().floor() as usize;
    let a = a.max(1);
    let b = n.div_ceil(a);
    let aoi = &scene.aoi;
    let dx = aoi.x_span() / b as f64;
    let dy = aoi.y_span() / a as f64;
    let mut targets = Vec::with_capacity(n);
    'outer: for row in 0..a {
        for col in 0..b {
            if targets.len() == n {
                break 'outer;
            }
            targets.push(Vec3::new(
                aoi.x_min_m + (col as f64 + 0.5) * dx,
                aoi.y_min_m + (row as f64 + 0.5) * dy,
                scene.rx_height_m,
            ));
        }
    }
    targets
}

/// Build the N-measurement plan: uniform beamforming and one beam-sweep
/// target per measurement.
pub fn build_plan(scene: &Scene, n: usize) -> Result<MeasurementPlan> {
    if n < 1 {
        return Err(Error::Config("measurement count must be >= 1".into()));
    }
    let beamformer = uniform_beamformer(scene.antennas());
    let measurements = sweep_targets(scene, n)
        .into_iter()
        .map(|target| Measurement {
            beamformer: beamformer.clone(),
            ris_phases: ebs_phases(scene, target),
            target,
        })
        .collect();
    Ok(MeasurementPlan { measurements })
}

/// Survey grid: uniformly spaced cell centers over the area of interest at
/// the Rx height, ordered row-major (y rows, x columns).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyGrid {
    pub x_min_m: f64,
    pub y_min_m: f64,
    pub spacing_m: f64,
    pub z_m: f64,
    pub rows: usize,
    pub cols: usize,
}

impl SurveyGrid {
    pub fn new(scene: &Scene, spacing_m: f64) -> Result<Self> {
        if !spacing_m.is_finite() || spacing_m <= 0.0 {
            return Err(Error::Config("grid.spacing_m must be > 0".into()));
        }
        let aoi = &scene.aoi;
        let cols = (aoi.x_span() / spacing_m).ceil() as usize;
        let rows = (aoi.y_span() / spacing_m).ceil() as usize;
        if rows == 0 || cols == 0 {
            return Err(Error::Config("survey grid is empty".into()));
        }
        Ok(SurveyGrid {
            x_min_m: aoi.x_min_m,
            y_min_m: aoi.y_min_m,
            spacing_m,
            z_m: scene.rx_height_m,
            rows,
            cols,
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, index: usize) -> Vec3 {
        let row = index / self.cols;
        let col = index % self.cols;
        Vec3::new(
            self.x_min_m + (col as f64 + 0.5) * self.spacing_m,
            self.y_min_m + (row as f64 + 0.5) * self.spacing_m,
            self.z_m,
        )
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        (0..self.len()).map(|i| self.position(i))
    }
}

/// One fingerprint: a survey coordinate and its N RSS values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FingerprintRecord {
    pub position: Vec3,
    pub rss_dbm: Vec<f64>,
}

/// The assembled fingerprint database.
#[derive(Debug, Clone)]
pub struct FingerprintDb {
    pub records: Vec<FingerprintRecord>,
}

impl FingerprintDb {
    /// Number of RSS values per record.
    pub fn measurements(&self) -> usize {
        self.records.first().map_or(0, |r| r.rss_dbm.len())
    }
}

/// RSS in dBm for one CIR under beamformer `f` and transmit power `p0_mw`:
/// `10 log10(|Σ_taps √P0 (amplitudes · f)|²)` with the transmit symbol fixed
/// to 1.
pub fn rss(cir: &Cir, beamformer: &[Complex64], p0_mw: f64) -> Result<f64> {
    if !p0_mw.is_finite() || p0_mw <= 0.0 {
        return Err(Error::Config("transmit power must be > 0 mW".into()));
    }
    let mut field = Complex64::new(0.0, 0.0);
    for tap in &cir.taps {
        if tap.amplitudes.len() != beamformer.len() {
            return Err(Error::DimensionMismatch {
                got: beamformer.len(),
                expected: tap.amplitudes.len(),
            });
        }
        let mut y = Complex64::new(0.0, 0.0);
        for (a, f) in tap.amplitudes.iter().zip(beamformer) {
            y += a * f;
        }
        field += y;
    }
    let power = p0_mw * field.norm_sqr();
    if power == 0.0 {
        Ok(ZERO_FIELD_RSS_DBM)
    } else {
        Ok(10.0 * power.log10())
    }
}

/// AoI-averaged received power per path family, dBm (averaged in linear
/// milliwatts over all positions and measurements; -300 marks an absent
/// family).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathPowerSummary {
    pub los_dbm: f64,
    pub vlos_dbm: f64,
    pub sb_dbm: f64,
    pub db_dbm: f64,
}

const ABSENT_POWER_DBM: f64 = -300.0;

fn to_dbm(avg_mw: f64) -> f64 {
    if avg_mw > 0.0 {
        10.0 * avg_mw.log10()
    } else {
        ABSENT_POWER_DBM
    }
}

/// Where the per-position channel parameters come from.
pub enum ParamSource<'a> {
    /// Query the spatially consistent maps.
    Maps(&'a ConsistencyMaps),
    /// Fresh i.i.d. draws per position (spatial consistency disabled). The
    /// draws reuse the map domain tags with the position index, and
    /// `ris_enabled = false` additionally suppresses VLoS and RIS-side
    /// clusters.
    Iid {
        seed: u64,
        cluster_params: &'a ClusterGenParams,
        ris_enabled: bool,
    },
}

/// Additive Gaussian dB noise on each RSS value; off by default and excluded
/// from the published pipeline defaults.
#[derive(Debug, Clone, Copy)]
pub struct RssNoise {
    pub sigma_db: f64,
    pub seed: u64,
}

struct PositionOutcome {
    rss_dbm: Vec<f64>,
    /// Per-family linear power sums over the N measurements, mW.
    power_mw: [f64; 4],
}

fn kind_slot(kind: PathKind) -> usize {
    match kind {
        PathKind::Los => 0,
        PathKind::Vlos => 1,
        PathKind::SbNlos => 2,
        PathKind::DbNlos => 3,
    }
}

fn evaluate_position(
    scene: &Scene,
    params: &LocalParams<'_>,
    plan: &MeasurementPlan,
    position: Vec3,
    p0_mw: f64,
    noise: Option<(&RssNoise, usize)>,
) -> Result<PositionOutcome> {
    let mut rss_dbm = Vec::with_capacity(plan.len());
    let mut power_mw = [0.0; 4];
    for measurement in &plan.measurements {
        let cir = cir_from_params(scene, position, params, &measurement.ris_phases)?;
        // Per-family coherent sums; their total reproduces the RSS field.
        let mut family = [Complex64::new(0.0, 0.0); 4];
        for tap in &cir.taps {
            let mut y = Complex64::new(0.0, 0.0);
            for (a, f) in tap.amplitudes.iter().zip(&measurement.beamformer) {
                y += a * f;
            }
            family[kind_slot(tap.kind)] += y;
        }
        let field: Complex64 = family.iter().sum();
        let power = p0_mw * field.norm_sqr();
        rss_dbm.push(if power == 0.0 {
            ZERO_FIELD_RSS_DBM
        } else {
            10.0 * power.log10()
        });
        for (slot, y) in family.iter().enumerate() {
            power_mw[slot] += p0_mw * y.norm_sqr();
        }
    }
    if let Some((noise, pos_index)) = noise {
        let mut rng = substream(noise.seed, "rss-noise", pos_index as u64);
        let normal = Normal::new(0.0, noise.sigma_db)
            .map_err(|e| Error::Config(format!("invalid rss noise sigma: {e}")))?;
        for v in &mut rss_dbm {
            if *v != ZERO_FIELD_RSS_DBM {
                *v += normal.sample(&mut rng);
            }
        }
    }
    Ok(PositionOutcome { rss_dbm, power_mw })
}

/// I.i.d. per-position channel parameters for the no-spatial-consistency case.
fn draw_iid_params(
    scene: &Scene,
    cluster_params: &ClusterGenParams,
    seed: u64,
    pos_index: usize,
    position: Vec3,
    ris_enabled: bool,
) -> Result<(
    bool,
    bool,
    f64,
    f64,
    crate::clusters::ClusterSet,
    crate::clusters::ClusterSet,
)> {
    let idx = pos_index as u64;
    let u_los: f64 = substream(seed, "los-map", idx).random_range(0.0..1.0);
    let zeta_los = u_los <= los_probability(distance(scene.tx.position, position));
    let u_vlos: f64 = substream(seed, "vlos-map", idx).random_range(0.0..1.0);
    let zeta_vlos =
        ris_enabled && u_vlos <= los_probability(distance(scene.ris.position, position));
    let chi_los = if scene.pathloss.sigma_los_db > 0.0 {
        Normal::new(0.0, scene.pathloss.sigma_los_db)
            .unwrap()
            .sample(&mut substream(seed, "sf-los", idx))
    } else {
        0.0
    };
    let chi_nlos = if scene.pathloss.sigma_nlos_db > 0.0 {
        Normal::new(0.0, scene.pathloss.sigma_nlos_db)
            .unwrap()
            .sample(&mut substream(seed, "sf-nlos", idx))
    } else {
        0.0
    };
    let mut rng = substream(seed, "clusters", idx);
    let sb = sample_cluster_set(
        cluster_params,
        ClusterFamily::Sb,
        scene.tx.position,
        scene.pathloss.d0_m,
        distance(scene.tx.position, position),
        &mut rng,
    )?;
    let db = if ris_enabled {
        sample_cluster_set(
            cluster_params,
            ClusterFamily::Db,
            scene.ris.position,
            scene.pathloss.d0_m,
            distance(scene.ris.position, position),
            &mut rng,
        )?
    } else {
        crate::clusters::ClusterSet::empty(ClusterFamily::Db)
    };
    Ok((zeta_los, zeta_vlos, chi_los, chi_nlos, sb, db))
}

/// Generate the fingerprint database together with the AoI-averaged per-path
/// powers, in one pass over all positions and measurements.
///
/// Positions are evaluated in parallel; record order is fixed by the grid's
/// row-major index regardless of execution order.
pub fn generate_database_with_powers(
    scene: &Scene,
    source: &ParamSource<'_>,
    plan: &MeasurementPlan,
    grid: &SurveyGrid,
    p0_mw: f64,
    noise: Option<&RssNoise>,
) -> Result<(FingerprintDb, PathPowerSummary)> {
    if plan.is_empty() {
        return Err(Error::Config("measurement plan is empty".into()));
    }
    let outcomes: Vec<PositionOutcome> = (0..grid.len())
        .into_par_iter()
        .map(|pos_index| {
            let position = grid.position(pos_index);
            if !scene.room.contains(position) {
                return Err(Error::OutOfRoom {
                    x: position.x,
                    y: position.y,
                });
            }
            let noise_arg = noise.map(|n| (n, pos_index));
            match source {
                ParamSource::Maps(maps) => {
                    let params = maps.query(position)?;
                    evaluate_position(scene, &params, plan, position, p0_mw, noise_arg)
                }
                ParamSource::Iid {
                    seed,
                    cluster_params,
                    ris_enabled,
                } => {
                    let (zeta_los, zeta_vlos, chi_los_db, chi_nlos_db, sb, db) = draw_iid_params(
                        scene,
                        cluster_params,
                        *seed,
                        pos_index,
                        position,
                        *ris_enabled,
                    )?;
                    let params = LocalParams {
                        zeta_los,
                        zeta_vlos,
                        chi_los_db,
                        chi_nlos_db,
                        sb: &sb,
                        db: &db,
                    };
                    evaluate_position(scene, &params, plan, position, p0_mw, noise_arg)
                }
            }
        })
        .collect::<Result<_>>()?;

    // Sequential reduction keeps the float sums independent of thread order.
    let mut totals = [0.0f64; 4];
    for outcome in &outcomes {
        for (slot, p) in outcome.power_mw.iter().enumerate() {
            totals[slot] += p;
        }
    }
    let samples = (grid.len() * plan.len()) as f64;
    let powers = PathPowerSummary {
        los_dbm: to_dbm(totals[0] / samples),
        vlos_dbm: to_dbm(totals[1] / samples),
        sb_dbm: to_dbm(totals[2] / samples),
        db_dbm: to_dbm(totals[3] / samples),
    };

    let records = outcomes
        .into_iter()
        .enumerate()
        .map(|(i, o)| FingerprintRecord {
            position: grid.position(i),
            rss_dbm: o.rss_dbm,
        })
        .collect();
    Ok((FingerprintDb { records }, powers))
}

/// Generate the fingerprint database from the consistency maps.
pub fn generate_database(
    scene: &Scene,
    maps: &ConsistencyMaps,
    plan: &MeasurementPlan,
    grid: &SurveyGrid,
    p0_mw: f64,
) -> Result<FingerprintDb> {
    generate_database_with_powers(scene, &ParamSource::Maps(maps), plan, grid, p0_mw, None)
        .map(|(db, _)| db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::vlos_unit_sums;
    use crate::config::RunConfig;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn uniform_beamformer_values() {
        assert_eq!(uniform_beamformer(1), vec![Complex64::new(1.0, 0.0)]);
        let f4 = uniform_beamformer(4);
        for w in &f4 {
            approx(w.re, 0.5, 1e-15);
            approx(w.im, 0.0, 0.0);
        }
        for m in 1..=16 {
            let f = uniform_beamformer(m);
            let norm: f64 = f.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            approx(norm, 1.0, 1e-12);
        }
    }

    #[test]
    fn ebs_phases_align_at_target() {
        let mut cfg = RunConfig::default();
        cfg.tx.antennas = Some(1);
        cfg.tx.pattern = Some("omnidirectional".into());
        cfg.tx.gain_max_db = None;
        let scene = cfg.build_scene().unwrap();
        let target = Vec3::new(9.0, 4.0, 1.0);
        let phases = ebs_phases(&scene, target);
        assert!(phases
            .iter()
            .all(|&p| (0.0..2.0 * std::f64::consts::PI).contains(&p)));
        let sums = vlos_unit_sums(&scene, target, &phases).unwrap();
        approx(
            sums[0].norm(),
            scene.unit_count() as f64,
            1e-6 * scene.unit_count() as f64,
        );
    }

    #[test]
    fn ebs_phases_off_target_below_unit_count() {
        let mut cfg = RunConfig::default();
        cfg.tx.antennas = Some(1);
        cfg.tx.pattern = Some("omnidirectional".into());
        cfg.tx.gain_max_db = None;
        let scene = cfg.build_scene().unwrap();
        let target = Vec3::new(9.0, 4.0, 1.0);
        let phases = ebs_phases(&scene, target);
        let count = scene.unit_count() as f64;
        // Direct phasor summation at 10 random points at least 1.5 m away
        // from the steered target.
        let mut rng = crate::rng::substream(41, "clusters", 0);
        let mut checked = 0;
        while checked < 10 {
            let rx = Vec3::new(rng.random_range(5.0..15.0), rng.random_range(0.5..10.0), 1.0);
            if distance(rx, target) < 1.5 {
                continue;
            }
            checked += 1;
            let sums = vlos_unit_sums(&scene, rx, &phases).unwrap();
            assert!(
                sums[0].norm() < 0.9 * count,
                "off-target sum {}",
                sums[0].norm()
            );
        }
    }

    #[test]
    fn plan_target_grids() {
        let scene = RunConfig::default().build_scene().unwrap();
        // N=20 on the 10x10 AoI: 4 rows x 5 cols.
        let plan = build_plan(&scene, 20).unwrap();
        assert_eq!(plan.len(), 20);
        approx(plan.measurements[0].target.x, 6.0, 1e-12);
        approx(plan.measurements[0].target.y, 1.25, 1e-12);
        approx(plan.measurements[19].target.x, 14.0, 1e-12);
        approx(plan.measurements[19].target.y, 8.75, 1e-12);

        // N=4: 2x2 at quarter-points.
        let plan4 = build_plan(&scene, 4).unwrap();
        assert_eq!(plan4.len(), 4);
        approx(plan4.measurements[0].target.x, 7.5, 1e-12);
        approx(plan4.measurements[0].target.y, 2.5, 1e-12);

        // N=1: the AoI center.
        let plan1 = build_plan(&scene, 1).unwrap();
        approx(plan1.measurements[0].target.x, 10.0, 1e-12);
        approx(plan1.measurements[0].target.y, 5.0, 1e-12);

        // N=5: 2x3 grid with the last target dropped.
        let plan5 = build_plan(&scene, 5).unwrap();
        assert_eq!(plan5.len(), 5);
    }

    #[test]
    fn beamformer_norm_invariant() {
        let scene = RunConfig::default().build_scene().unwrap();
        let plan = build_plan(&scene, 20).unwrap();
        for m in &plan.measurements {
            let norm: f64 = m
                .beamformer
                .iter()
                .map(|w| w.norm_sqr())
                .sum::<f64>()
                .sqrt();
            approx(norm, 1.0, 1e-12);
        }
    }

    #[test]
    fn survey_grid_dimensions() {
        let scene = RunConfig::default().build_scene().unwrap();
        let grid = SurveyGrid::new(&scene, 0.2).unwrap();
        assert_eq!(grid.len(), 2500);
        assert_eq!((grid.rows, grid.cols), (50, 50));
        let first = grid.position(0);
        approx(first.x, 5.1, 1e-12);
        approx(first.y, 0.1, 1e-12);
        approx(first.z, 1.0, 1e-12);
        assert!(grid.positions().all(|p| scene.room.contains(p)));
    }

    #[test]
    fn rss_scalar_example() {
        // Single tap, M_T = 1, amplitude g, f = [1], P0 = 10 mW:
        // RSS = 10 + 20 log10 |g|.
        let g = 4.589e-3;
        let cir = Cir {
            taps: vec![crate::channel::PathTap {
                delay_s: 0.0,
                amplitudes: vec![Complex64::new(g, 0.0)],
                kind: PathKind::Los,
                source: None,
            }],
            position: Vec3::ZERO,
            measurement: 0,
        };
        let f = vec![Complex64::new(1.0, 0.0)];
        let v = rss(&cir, &f, 10.0).unwrap();
        approx(v, 10.0 + 20.0 * g.log10(), 1e-12);
        approx(v, -36.77, 5e-3);
    }

    #[test]
    fn rss_empty_cir_sentinel() {
        let cir = Cir {
            taps: vec![],
            position: Vec3::ZERO,
            measurement: 0,
        };
        let v = rss(&cir, &uniform_beamformer(4), 10.0).unwrap();
        assert_eq!(v, ZERO_FIELD_RSS_DBM);
    }

    #[test]
    fn rss_invariant_under_global_beamformer_phase() {
        let cir = Cir {
            taps: vec![crate::channel::PathTap {
                delay_s: 0.0,
                amplitudes: vec![Complex64::new(1e-3, 2e-4), Complex64::new(-3e-4, 1e-3)],
                kind: PathKind::Los,
                source: None,
            }],
            position: Vec3::ZERO,
            measurement: 0,
        };
        let f: Vec<Complex64> = uniform_beamformer(2);
        let rot = Complex64::cis(1.234);
        let f_rot: Vec<Complex64> = f.iter().map(|w| w * rot).collect();
        approx(
            rss(&cir, &f, 10.0).unwrap(),
            rss(&cir, &f_rot, 10.0).unwrap(),
            1e-12,
        );
    }

    #[test]
    fn rss_power_scaling_adds_10db() {
        let cir = Cir {
            taps: vec![crate::channel::PathTap {
                delay_s: 0.0,
                amplitudes: vec![Complex64::new(2e-3, 0.0)],
                kind: PathKind::Los,
                source: None,
            }],
            position: Vec3::ZERO,
            measurement: 0,
        };
        let f = vec![Complex64::new(1.0, 0.0)];
        let a = rss(&cir, &f, 10.0).unwrap();
        let b = rss(&cir, &f, 100.0).unwrap();
        approx(b - a, 10.0, 1e-12);
    }

    #[test]
    fn database_shape_and_determinism() {
        let mut cfg = RunConfig::default();
        cfg.grid.spacing_m = Some(1.0);
        cfg.measurements = Some(4);
        let scene = cfg.build_scene().unwrap();
        let maps = ConsistencyMaps::generate(
            &scene,
            &cfg.spatial_params(),
            &cfg.cluster_params().unwrap(),
            9,
        )
        .unwrap();
        let plan = build_plan(&scene, 4).unwrap();
        let grid = SurveyGrid::new(&scene, 1.0).unwrap();
        let db1 = generate_database(&scene, &maps, &plan, &grid, 10.0).unwrap();
        let db2 = generate_database(&scene, &maps, &plan, &grid, 10.0).unwrap();
        assert_eq!(db1.records.len(), 100);
        assert_eq!(db1.measurements(), 4);
        for (a, b) in db1.records.iter().zip(&db2.records) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.rss_dbm, b.rss_dbm);
        }
    }
}
