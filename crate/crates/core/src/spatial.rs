//! Spatially consistent 2-D grid maps over the room: LoS/VLoS availability,
//! LoS/NLoS shadow fading, and per-cell cluster layouts.
//!
//! Condition maps start from an i.i.d. standard Gaussian field, get spatially
//! correlated by convolution with a truncated exponential kernel, are
//! standardized back to zero mean / unit variance, and pass through the
//! probability integral transform before the comparison with the LoS
//! probability. Shadow-fading maps use the same kernel and are rescaled so
//! the map's sample standard deviation equals the configured sigma (the raw
//! convolution inflates the variance, which would make sigma meaningless).
//! Cluster maps draw one independent SB and DB cluster set per coherence
//! cell from a per-cell substream, so cells are order-independent.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clusters::{sample_cluster_set, ClusterFamily, ClusterGenParams, ClusterSet};
use crate::error::{Error, Result};
use crate::geometry::{distance, Vec3};
use crate::rng::substream;
use crate::scene::{Room, Scene};

/// Dense row-major grid over the room footprint. Rows advance along +y,
/// columns along +x, starting at `origin`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMap<V> {
    pub origin: Vec3,
    pub granularity_m: f64,
    pub rows: usize,
    pub cols: usize,
    values: Vec<V>,
}

impl<V> GridMap<V> {
    pub fn from_values(
        origin: Vec3,
        granularity_m: f64,
        rows: usize,
        cols: usize,
        values: Vec<V>,
    ) -> Self {
        assert_eq!(
            values.len(),
            rows * cols,
            "value count must match grid size"
        );
        assert!(granularity_m > 0.0);
        GridMap {
            origin,
            granularity_m,
            rows,
            cols,
            values,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> &V {
        &self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    /// Center of cell `(row, col)` on the map plane (z from `origin`).
    pub fn cell_center(&self, row: usize, col: usize) -> Vec3 {
        Vec3::new(
            self.origin.x + (col as f64 + 0.5) * self.granularity_m,
            self.origin.y + (row as f64 + 0.5) * self.granularity_m,
            self.origin.z,
        )
    }

    fn axis_index(&self, coord: f64, origin: f64, count: usize) -> Result<usize> {
        let raw = (coord - origin) / self.granularity_m;
        if raw < -1e-9 {
            return Err(Error::OutOfRoom {
                x: coord,
                y: origin,
            });
        }
        let idx = raw.max(0.0).floor() as usize;
        if idx < count {
            Ok(idx)
        } else if raw - count as f64 <= 1e-9 {
            // Points on the upper boundary belong to the last cell.
            Ok(count - 1)
        } else {
            Err(Error::OutOfRoom {
                x: coord,
                y: origin,
            })
        }
    }

    /// Row-major index of the cell containing `position` (x, y only).
    /// Interior edges resolve to the larger index per the floor convention.
    pub fn cell_index(&self, position: Vec3) -> Result<usize> {
        let col = self
            .axis_index(position.x, self.origin.x, self.cols)
            .map_err(|_| Error::OutOfRoom {
                x: position.x,
                y: position.y,
            })?;
        let row = self
            .axis_index(position.y, self.origin.y, self.rows)
            .map_err(|_| Error::OutOfRoom {
                x: position.x,
                y: position.y,
            })?;
        Ok(row * self.cols + col)
    }

    /// Value of the cell containing `position`.
    pub fn query(&self, position: Vec3) -> Result<&V> {
        Ok(&self.values[self.cell_index(position)?])
    }
}

/// Grid dimensions covering `room` at the given granularity.
fn grid_shape(room: &Room, granularity_m: f64) -> (usize, usize) {
    let cols = (room.length_m / granularity_m).ceil() as usize;
    let rows = (room.width_m / granularity_m).ceil() as usize;
    (rows.max(1), cols.max(1))
}

/// 3GPP InH-Office LoS probability as a function of 3-D distance, meters.
pub fn los_probability(d_m: f64) -> f64 {
    if d_m <= 5.0 {
        1.0
    } else if d_m <= 49.0 {
        (-(d_m - 5.0) / 70.8).exp()
    } else {
        0.54 * (-(d_m - 49.0) / 211.7).exp()
    }
}

/// Truncated centered exponential kernel: weight `exp(-r * gran / corr)` for
/// cell offsets with Euclidean radius `r` up to `4 corr / gran` cells (the
/// mass beyond four correlation lengths is under 2%).
fn exponential_kernel(granularity_m: f64, corr_distance_m: f64) -> (usize, Vec<f64>) {
    let radius_cells = 4.0 * corr_distance_m / granularity_m;
    let r = radius_cells.ceil() as usize;
    let side = 2 * r + 1;
    let mut kernel = vec![0.0; side * side];
    for dp in 0..side {
        for dq in 0..side {
            let dy = dp as f64 - r as f64;
            let dx = dq as f64 - r as f64;
            let dist_cells = (dx * dx + dy * dy).sqrt();
            if dist_cells <= radius_cells + 1e-12 {
                kernel[dp * side + dq] = (-dist_cells * granularity_m / corr_distance_m).exp();
            }
        }
    }
    (r, kernel)
}

/// 2-D convolution with zero-padded borders.
fn convolve(field: &[f64], rows: usize, cols: usize, radius: usize, kernel: &[f64]) -> Vec<f64> {
    let side = 2 * radius + 1;
    let mut out = vec![0.0; rows * cols];
    for p in 0..rows {
        for q in 0..cols {
            let mut acc = 0.0;
            let dp_lo = radius.saturating_sub(p);
            let dp_hi = (rows + radius - p).min(side);
            let dq_lo = radius.saturating_sub(q);
            let dq_hi = (cols + radius - q).min(side);
            for dp in dp_lo..dp_hi {
                let src_row = p + dp - radius;
                for dq in dq_lo..dq_hi {
                    let src_col = q + dq - radius;
                    acc += kernel[dp * side + dq] * field[src_row * cols + src_col];
                }
            }
            out[p * cols + q] = acc;
        }
    }
    out
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standardize to zero mean, unit variance.
fn standardize(values: &mut [f64]) {
    let (mean, std) = mean_and_std(values);
    if std > 0.0 {
        for v in values.iter_mut() {
            *v = (*v - mean) / std;
        }
    }
}

/// Standard normal CDF via the error function.
fn phi(v: f64) -> f64 {
    0.5 * (1.0 + libm::erf(v / std::f64::consts::SQRT_2))
}

/// Correlated Gaussian field over the room: i.i.d. N(0,1) per cell, filtered,
/// standardized back to zero mean / unit variance.
fn correlated_unit_field<R: Rng>(
    room: &Room,
    granularity_m: f64,
    corr_distance_m: f64,
    rng: &mut R,
) -> (usize, usize, Vec<f64>) {
    let (rows, cols) = grid_shape(room, granularity_m);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let field: Vec<f64> = (0..rows * cols).map(|_| normal.sample(rng)).collect();
    let (radius, kernel) = exponential_kernel(granularity_m, corr_distance_m);
    let mut filtered = convolve(&field, rows, cols, radius, &kernel);
    standardize(&mut filtered);
    (rows, cols, filtered)
}

/// Spatially correlated uniform field: the probability-integral transform of
/// the filtered, standardized Gaussian field. This is the stage the condition
/// maps threshold against the LoS probability.
pub fn gen_uniform_field<R: Rng>(
    room: &Room,
    plane_z: f64,
    granularity_m: f64,
    corr_distance_m: f64,
    rng: &mut R,
) -> GridMap<f64> {
    let (rows, cols, field) = correlated_unit_field(room, granularity_m, corr_distance_m, rng);
    let values = field.into_iter().map(phi).collect();
    GridMap::from_values(
        Vec3::new(0.0, 0.0, plane_z),
        granularity_m,
        rows,
        cols,
        values,
    )
}

/// Spatially correlated availability map. Per cell the filtered Gaussian is
/// mapped to a uniform `u` by the probability integral transform and the cell
/// is available iff `u <= prob(distance(anchor, cell center))`. The cell
/// center sits on the survey plane at `plane_z`.
pub fn gen_condition_map<R: Rng, P: Fn(f64) -> f64>(
    room: &Room,
    anchor: Vec3,
    plane_z: f64,
    granularity_m: f64,
    corr_distance_m: f64,
    prob: P,
    rng: &mut R,
) -> GridMap<bool> {
    let uniform = gen_uniform_field(room, plane_z, granularity_m, corr_distance_m, rng);
    let values = (0..uniform.rows * uniform.cols)
        .map(|idx| {
            let center = uniform.cell_center(idx / uniform.cols, idx % uniform.cols);
            uniform.values()[idx] <= prob(distance(anchor, center))
        })
        .collect();
    GridMap::from_values(
        uniform.origin,
        granularity_m,
        uniform.rows,
        uniform.cols,
        values,
    )
}

/// Spatially correlated shadow-fading map, dB. i.i.d. N(0, σ²) per cell,
/// filtered, then rescaled so the map's sample standard deviation is σ.
pub fn gen_sf_map<R: Rng>(
    room: &Room,
    sigma_db: f64,
    granularity_m: f64,
    corr_distance_m: f64,
    rng: &mut R,
) -> GridMap<f64> {
    let (rows, cols) = grid_shape(room, granularity_m);
    let values = if sigma_db == 0.0 {
        // Zero-variance input stays identically zero.
        let normal = Normal::new(0.0, 1.0).unwrap();
        for _ in 0..rows * cols {
            normal.sample(rng);
        }
        vec![0.0; rows * cols]
    } else {
        let normal = Normal::new(0.0, sigma_db).unwrap();
        let field: Vec<f64> = (0..rows * cols).map(|_| normal.sample(rng)).collect();
        let (radius, kernel) = exponential_kernel(granularity_m, corr_distance_m);
        let mut filtered = convolve(&field, rows, cols, radius, &kernel);
        let (_, std) = mean_and_std(&filtered);
        if std > 0.0 {
            let scale = sigma_db / std;
            for v in filtered.iter_mut() {
                *v *= scale;
            }
        }
        filtered
    };
    GridMap::from_values(Vec3::ZERO, granularity_m, rows, cols, values)
}

/// Cluster layouts of one coherence cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellClusters {
    pub sb: ClusterSet,
    pub db: ClusterSet,
}

/// Spatially coherent cluster map: every cell gets one independently drawn
/// SB set (anchored at the Tx) and DB set (anchored at the RIS), with the
/// maximum cluster range set by the anchor-to-cell-center distance. Each cell
/// uses its own `(seed, "clusters", cell)` substream.
#[allow(clippy::too_many_arguments)]
pub fn gen_cluster_map(
    room: &Room,
    granularity_m: f64,
    params: &ClusterGenParams,
    tx_position: Vec3,
    ris_position: Vec3,
    plane_z: f64,
    d_min_m: f64,
    master_seed: u64,
) -> Result<GridMap<CellClusters>> {
    let (rows, cols) = grid_shape(room, granularity_m);
    let origin = Vec3::new(0.0, 0.0, plane_z);
    let template = GridMap::from_values(origin, granularity_m, rows, cols, vec![(); rows * cols]);
    let values: Vec<CellClusters> = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let center = template.cell_center(idx / cols, idx % cols);
            let mut rng = substream(master_seed, "clusters", idx as u64);
            let sb = sample_cluster_set(
                params,
                ClusterFamily::Sb,
                tx_position,
                d_min_m,
                distance(tx_position, center),
                &mut rng,
            )?;
            let db = sample_cluster_set(
                params,
                ClusterFamily::Db,
                ris_position,
                d_min_m,
                distance(ris_position, center),
                &mut rng,
            )?;
            Ok(CellClusters { sb, db })
        })
        .collect::<Result<_>>()?;
    Ok(GridMap::from_values(
        origin,
        granularity_m,
        rows,
        cols,
        values,
    ))
}

/// Spatial-consistency parameters: map granularities and the shadow-fading
/// correlation distance (also used for the condition-map kernel).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialParams {
    pub condition_granularity_m: f64,
    pub sf_granularity_m: f64,
    pub cluster_granularity_m: f64,
    pub sf_correlation_m: f64,
}

impl SpatialParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("condition_granularity_m", self.condition_granularity_m),
            ("sf_granularity_m", self.sf_granularity_m),
            ("cluster_granularity_m", self.cluster_granularity_m),
            ("sf_correlation_m", self.sf_correlation_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "spatial.{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Channel parameters at one survey position, borrowed from the maps (or an
/// owned i.i.d. draw when spatial consistency is disabled).
#[derive(Debug, Clone, Copy)]
pub struct LocalParams<'a> {
    pub zeta_los: bool,
    pub zeta_vlos: bool,
    pub chi_los_db: f64,
    pub chi_nlos_db: f64,
    pub sb: &'a ClusterSet,
    pub db: &'a ClusterSet,
}

/// The full set of spatially consistent maps used by the generation pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyMaps {
    pub los: GridMap<bool>,
    pub vlos: GridMap<bool>,
    pub sf_los: GridMap<f64>,
    pub sf_nlos: GridMap<f64>,
    pub clusters: GridMap<CellClusters>,
}

impl ConsistencyMaps {
    /// Generate every map from the scene and one master seed. Each map uses
    /// its own domain-tagged substream, so maps never share draws.
    pub fn generate(
        scene: &Scene,
        spatial: &SpatialParams,
        cluster_params: &ClusterGenParams,
        master_seed: u64,
    ) -> Result<ConsistencyMaps> {
        spatial.validate()?;
        cluster_params.validate()?;
        let room = &scene.room;
        let z = scene.rx_height_m;

        let los = gen_condition_map(
            room,
            scene.tx.position,
            z,
            spatial.condition_granularity_m,
            spatial.sf_correlation_m,
            los_probability,
            &mut substream(master_seed, "los-map", 0),
        );
        let vlos = gen_condition_map(
            room,
            scene.ris.position,
            z,
            spatial.condition_granularity_m,
            spatial.sf_correlation_m,
            los_probability,
            &mut substream(master_seed, "vlos-map", 0),
        );
        let sf_los = gen_sf_map(
            room,
            scene.pathloss.sigma_los_db,
            spatial.sf_granularity_m,
            spatial.sf_correlation_m,
            &mut substream(master_seed, "sf-los", 0),
        );
        let sf_nlos = gen_sf_map(
            room,
            scene.pathloss.sigma_nlos_db,
            spatial.sf_granularity_m,
            spatial.sf_correlation_m,
            &mut substream(master_seed, "sf-nlos", 0),
        );
        let clusters = gen_cluster_map(
            room,
            spatial.cluster_granularity_m,
            cluster_params,
            scene.tx.position,
            scene.ris.position,
            z,
            scene.pathloss.d0_m,
            master_seed,
        )?;
        Ok(ConsistencyMaps {
            los,
            vlos,
            sf_los,
            sf_nlos,
            clusters,
        })
    }

    /// Channel parameters at a survey position.
    pub fn query(&self, position: Vec3) -> Result<LocalParams<'_>> {
        let cell = self.clusters.query(position)?;
        Ok(LocalParams {
            zeta_los: *self.los.query(position)?,
            zeta_vlos: *self.vlos.query(position)?,
            chi_los_db: *self.sf_los.query(position)?,
            chi_nlos_db: *self.sf_nlos.query(position)?,
            sb: &cell.sb,
            db: &cell.db,
        })
    }

    /// Disable the RIS: no VLoS availability anywhere and no RIS-side
    /// clusters. Leaves every Tx-side draw untouched.
    pub fn disable_ris(&mut self) {
        let n = self.vlos.rows * self.vlos.cols;
        self.vlos = GridMap::from_values(
            self.vlos.origin,
            self.vlos.granularity_m,
            self.vlos.rows,
            self.vlos.cols,
            vec![false; n],
        );
        let rows = self.clusters.rows;
        let cols = self.clusters.cols;
        let values: Vec<CellClusters> = self
            .clusters
            .values()
            .iter()
            .map(|c| CellClusters {
                sb: c.sb.clone(),
                db: ClusterSet::empty(ClusterFamily::Db),
            })
            .collect();
        self.clusters = GridMap::from_values(
            self.clusters.origin,
            self.clusters.granularity_m,
            rows,
            cols,
            values,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn room(side: f64) -> Room {
        Room {
            length_m: side,
            width_m: side,
            height_m: 3.5,
        }
    }

    #[test]
    fn grid_shape_matches_paper_setup() {
        // 20 m room: 10x10 cells at 2 m, 8x8 at 2.5 m, 20x20 at 1 m.
        assert_eq!(grid_shape(&room(20.0), 2.0), (10, 10));
        assert_eq!(grid_shape(&room(20.0), 2.5), (8, 8));
        assert_eq!(grid_shape(&room(20.0), 1.0), (20, 20));
    }

    #[test]
    fn query_cell_center_and_origin() {
        let map = GridMap::from_values(Vec3::ZERO, 2.0, 10, 10, (0..100).collect());
        let center = map.cell_center(3, 7);
        assert_eq!(*map.query(center).unwrap(), 3 * 10 + 7);
        assert_eq!(*map.query(Vec3::ZERO).unwrap(), 0);
    }

    #[test]
    fn query_interior_edge_goes_to_larger_index() {
        let map = GridMap::from_values(Vec3::ZERO, 2.0, 10, 10, (0..100).collect());
        // x = 2.0 is the edge between columns 0 and 1.
        assert_eq!(*map.query(Vec3::new(2.0, 0.5, 0.0)).unwrap(), 1);
    }

    #[test]
    fn query_upper_boundary_maps_to_last_cell() {
        let map = GridMap::from_values(Vec3::ZERO, 2.0, 10, 10, (0..100).collect());
        assert_eq!(*map.query(Vec3::new(20.0, 20.0, 0.0)).unwrap(), 99);
    }

    #[test]
    fn query_outside_is_error() {
        let map = GridMap::from_values(Vec3::ZERO, 2.0, 10, 10, vec![0u8; 100]);
        assert!(map.query(Vec3::new(20.1, 1.0, 0.0)).is_err());
        assert!(map.query(Vec3::new(-0.5, 1.0, 0.0)).is_err());
    }

    #[test]
    fn los_probability_branches() {
        assert_eq!(los_probability(3.0), 1.0);
        assert_eq!(los_probability(5.0), 1.0);
        let p49 = los_probability(49.0);
        assert!((p49 - (-44.0f64 / 70.8).exp()).abs() < 1e-12);
        assert!((p49 - 0.5371).abs() < 1e-3);
    }

    #[test]
    fn los_probability_monotone_per_branch_and_continuous_joins() {
        // Each branch is non-increasing; the branch joins may step by at
        // most 1e-2.
        for (lo, hi) in [(0.0, 5.0), (5.0 + 1e-9, 49.0), (49.0 + 1e-9, 120.0)] {
            let mut prev = f64::INFINITY;
            let mut d = lo;
            while d <= hi {
                let p = los_probability(d);
                assert!(p <= prev + 1e-12, "not monotone at {d}");
                assert!((0.0..=1.0).contains(&p));
                prev = p;
                d += 0.05;
            }
        }
        assert!((los_probability(5.0) - los_probability(5.0 + 1e-9)).abs() < 1e-2);
        assert!((los_probability(49.0) - los_probability(49.0 + 1e-9)).abs() < 1e-2);
    }

    #[test]
    fn condition_map_prob_one_is_all_true() {
        let r = room(20.0);
        let map = gen_condition_map(
            &r,
            Vec3::ZERO,
            1.0,
            1.0,
            4.0,
            |_| 1.0,
            &mut substream(1, "los-map", 0),
        );
        assert!(map.values().iter().all(|&b| b));
    }

    #[test]
    fn condition_map_prob_zero_is_all_false() {
        let r = room(20.0);
        let map = gen_condition_map(
            &r,
            Vec3::ZERO,
            1.0,
            1.0,
            4.0,
            |_| 0.0,
            &mut substream(1, "los-map", 0),
        );
        assert!(map.values().iter().all(|&b| !b));
    }

    #[test]
    fn pit_of_zero_is_half() {
        assert!((phi(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sf_map_zero_sigma_is_all_zero() {
        let map = gen_sf_map(&room(20.0), 0.0, 2.0, 4.0, &mut substream(2, "sf-los", 0));
        assert!(map.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sf_map_default_room_is_10_by_10() {
        let map = gen_sf_map(&room(20.0), 8.29, 2.0, 4.0, &mut substream(2, "sf-nlos", 0));
        assert_eq!((map.rows, map.cols), (10, 10));
    }

    #[test]
    fn sf_map_sample_std_equals_sigma() {
        let map = gen_sf_map(&room(60.0), 3.02, 1.0, 4.0, &mut substream(3, "sf-los", 0));
        let (_, std) = mean_and_std(map.values());
        assert!((std - 3.02).abs() < 1e-9, "std {std}");
    }

    #[test]
    fn kernel_center_is_one() {
        let (r, k) = exponential_kernel(2.0, 4.0);
        let side = 2 * r + 1;
        assert_eq!(k[r * side + r], 1.0);
    }

    #[test]
    fn maps_identical_across_runs_with_same_seed() {
        let r = room(20.0);
        let a = gen_sf_map(&r, 8.29, 2.0, 4.0, &mut substream(5, "sf-nlos", 0));
        let b = gen_sf_map(&r, 8.29, 2.0, 4.0, &mut substream(5, "sf-nlos", 0));
        assert_eq!(a.values(), b.values());
        let ca = gen_condition_map(
            &r,
            Vec3::new(0.0, 10.0, 3.0),
            1.0,
            1.0,
            4.0,
            los_probability,
            &mut substream(5, "los-map", 0),
        );
        let cb = gen_condition_map(
            &r,
            Vec3::new(0.0, 10.0, 3.0),
            1.0,
            1.0,
            4.0,
            los_probability,
            &mut substream(5, "los-map", 0),
        );
        assert_eq!(ca.values(), cb.values());
    }

    #[test]
    fn cluster_map_coherence_and_independence() {
        let r = room(20.0);
        let params = crate::config::RunConfig::default()
            .cluster_params()
            .unwrap();
        let tx = Vec3::new(0.0, 10.0, 3.0);
        let ris = Vec3::new(10.0, 15.0, 3.0);
        let map = gen_cluster_map(&r, 2.5, &params, tx, ris, 1.0, 1.0, 7).unwrap();
        assert_eq!((map.rows, map.cols), (8, 8));

        // Two positions in the same cell share the same sets.
        let a = map.query(Vec3::new(5.1, 5.1, 1.0)).unwrap();
        let b = map.query(Vec3::new(6.9, 6.9, 1.0)).unwrap();
        assert_eq!(a.sb.clusters.len(), b.sb.clusters.len());
        assert_eq!(
            a.sb.clusters[0].position, b.sb.clusters[0].position,
            "same coherence cell must share cluster objects"
        );

        // Adjacent cells are drawn independently.
        let c = map.query(Vec3::new(8.0, 5.1, 1.0)).unwrap();
        let differs = a.sb.clusters.len() != c.sb.clusters.len()
            || a.sb.clusters[0].position != c.sb.clusters[0].position;
        assert!(differs, "independent substreams should give different sets");
    }

    #[test]
    fn cluster_map_is_order_independent() {
        // Per-cell substreams: regenerating yields identical layouts.
        let r = room(20.0);
        let params = crate::config::RunConfig::default()
            .cluster_params()
            .unwrap();
        let tx = Vec3::new(0.0, 10.0, 3.0);
        let ris = Vec3::new(10.0, 15.0, 3.0);
        let a = gen_cluster_map(&r, 2.5, &params, tx, ris, 1.0, 1.0, 11).unwrap();
        let b = gen_cluster_map(&r, 2.5, &params, tx, ris, 1.0, 1.0, 11).unwrap();
        for (ca, cb) in a.values().iter().zip(b.values()) {
            assert_eq!(ca.sb.clusters.len(), cb.sb.clusters.len());
            assert_eq!(ca.db.clusters.len(), cb.db.clusters.len());
        }
    }

    #[test]
    fn condition_map_tracks_probability_by_distance() {
        // Empirical availability fraction per distance bin tracks Pr(d)
        // within ±0.1, averaged over seeds.
        let r = room(60.0);
        let anchor = Vec3::new(0.0, 0.0, 1.0);
        let n_seeds = 20;
        let mut bins: Vec<(f64, f64)> = vec![(0.0, 0.0); 12]; // (hits, total) per 5 m bin
        for seed in 0..n_seeds {
            let map = gen_condition_map(
                &r,
                anchor,
                1.0,
                1.0,
                4.0,
                los_probability,
                &mut substream(seed, "los-map", 0),
            );
            for row in 0..map.rows {
                for col in 0..map.cols {
                    let d = distance(anchor, map.cell_center(row, col));
                    let bin = (d / 5.0) as usize;
                    if bin < bins.len() {
                        bins[bin].1 += 1.0;
                        if *map.get(row, col) {
                            bins[bin].0 += 1.0;
                        }
                    }
                }
            }
        }
        for (i, (hits, total)) in bins.iter().enumerate() {
            if *total < 200.0 {
                continue;
            }
            let mid = (i as f64 + 0.5) * 5.0;
            let expected = los_probability(mid);
            let got = hits / total;
            assert!(
                (got - expected).abs() <= 0.1,
                "bin {i}: empirical {got:.3} vs model {expected:.3}"
            );
        }
    }

    #[test]
    fn sf_lag1_autocorr_exceeds_lag5() {
        let r = room(40.0);
        let mut medians = Vec::new();
        for seed in 0..20 {
            let map = gen_sf_map(&r, 8.29, 2.0, 4.0, &mut substream(seed, "sf-nlos", 0));
            let rho1 = spatial_autocorr(&map, 1);
            let rho5 = spatial_autocorr(&map, 5);
            medians.push(rho1 - rho5);
        }
        medians.sort_by(f64::total_cmp);
        let median = medians[medians.len() / 2];
        assert!(median > 0.0, "median lag-1 minus lag-5 autocorr {median}");
    }

    pub(crate) fn spatial_autocorr(map: &GridMap<f64>, lag: usize) -> f64 {
        let (mean, std) = mean_and_std(map.values());
        let var = std * std;
        let mut acc = 0.0;
        let mut count = 0usize;
        for row in 0..map.rows {
            for col in 0..map.cols - lag {
                acc += (map.get(row, col) - mean) * (map.get(row, col + lag) - mean);
                count += 1;
            }
        }
        for row in 0..map.rows - lag {
            for col in 0..map.cols {
                acc += (map.get(row, col) - mean) * (map.get(row + lag, col) - mean);
                count += 1;
            }
        }
        acc / (count as f64 * var)
    }

    #[test]
    fn disable_ris_clears_vlos_and_db() {
        let cfg = crate::config::RunConfig::default();
        let scene = cfg.build_scene().unwrap();
        let mut maps = ConsistencyMaps::generate(
            &scene,
            &cfg.spatial_params(),
            &cfg.cluster_params().unwrap(),
            3,
        )
        .unwrap();
        maps.disable_ris();
        assert!(maps.vlos.values().iter().all(|&b| !b));
        assert!(maps.clusters.values().iter().all(|c| c.db.is_empty()));
        assert!(maps.clusters.values().iter().all(|c| !c.sb.is_empty()));
    }
}
