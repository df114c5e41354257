//! Statistical generation of clusters and intra-cluster scatterers for the
//! SB-NLoS and DB-NLoS path families.
//!
//! Cluster count is Poisson, cluster range/angles are uniform over configured
//! ranges, scatterer angles are Laplacian around the cluster mean, and each
//! scatterer carries a circularly symmetric complex Gaussian gain of unit
//! variance. All scatterers of a cluster share its anchor distance.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Closed angular interval in radians.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AngleRange {
    pub lo: f64,
    pub hi: f64,
}

impl AngleRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidRange(format!(
                "angle range [{lo}, {hi}] is empty"
            )));
        }
        Ok(AngleRange { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

/// Angular geometry of one path family (SB or DB).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyParams {
    pub azimuth: AngleRange,
    pub elevation: AngleRange,
    /// Laplacian angular spread (standard deviation) of scatterer azimuths, rad.
    pub azimuth_spread: f64,
    /// Laplacian angular spread (standard deviation) of scatterer elevations, rad.
    pub elevation_spread: f64,
}

/// Parameters of the statistical cluster generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterGenParams {
    /// Poisson mean of the cluster count.
    pub poisson_mean: f64,
    /// Scatterer-count bounds (inclusive).
    pub scatterers_min: usize,
    pub scatterers_max: usize,
    pub sb: FamilyParams,
    pub db: FamilyParams,
    /// Clusters are clamped to z in [0.1, room_height - 0.1] m.
    pub room_height_m: f64,
}

impl ClusterGenParams {
    pub fn validate(&self) -> Result<()> {
        if !self.poisson_mean.is_finite() || self.poisson_mean <= 0.0 {
            return Err(Error::Config("clusters.poisson_mean must be > 0".into()));
        }
        if self.scatterers_min < 1 || self.scatterers_min > self.scatterers_max {
            return Err(Error::Config(
                "clusters scatterer bounds require 1 <= min <= max".into(),
            ));
        }
        if !self.room_height_m.is_finite() || self.room_height_m <= 0.2 {
            return Err(Error::Config(
                "room height too small for cluster placement".into(),
            ));
        }
        for (name, f) in [("sb", &self.sb), ("db", &self.db)] {
            if !(f.azimuth_spread > 0.0 && f.elevation_spread > 0.0) {
                return Err(Error::Config(format!(
                    "clusters.{name} angular spreads must be > 0"
                )));
            }
            // Strictly sub-vertical elevations keep the in-room z clamp from
            // ever collapsing a cluster onto its anchor.
            if !(f.elevation.lo > -std::f64::consts::FRAC_PI_2
                && f.elevation.hi < std::f64::consts::FRAC_PI_2)
            {
                return Err(Error::Config(format!(
                    "clusters.{name} elevation range must lie strictly inside (-90°, 90°)"
                )));
            }
        }
        Ok(())
    }

    fn family(&self, family: ClusterFamily) -> &FamilyParams {
        match family {
            ClusterFamily::Sb => &self.sb,
            ClusterFamily::Db => &self.db,
        }
    }
}

/// Which bounce family a cluster set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterFamily {
    /// Single-bounced: Tx → cluster → Rx, anchored at the Tx.
    Sb,
    /// Double-bounced: Tx → RIS → cluster → Rx, anchored at the RIS.
    Db,
}

/// One scattering point with its complex sub-ray gain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec3,
    pub gain: Complex64,
}

/// A group of co-located scatterers producing one resolvable delay tap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub position: Vec3,
    /// Distance from the anchor (Tx or RIS), shared by all scatterers, m.
    pub distance_m: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub scatterers: Vec<Scatterer>,
}

/// All clusters of one family at one coherence cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSet {
    pub family: ClusterFamily,
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn empty(family: ClusterFamily) -> Self {
        ClusterSet {
            family,
            clusters: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn total_scatterers(&self) -> usize {
        self.clusters.iter().map(|c| c.scatterers.len()).sum()
    }

    /// Normalization factor `γ = 1/sqrt(Σ S_c)`; only meaningful for
    /// non-empty sets (an empty set contributes no taps).
    pub fn normalization(&self) -> f64 {
        let total = self.total_scatterers();
        if total == 0 {
            0.0
        } else {
            (1.0 / total as f64).sqrt()
        }
    }
}

/// Position at distance `d` from `anchor` along azimuth `phi` / elevation
/// `theta`: `anchor + d [cosθ cosφ, cosθ sinφ, sinθ]`.
pub fn cluster_position(anchor: Vec3, d: f64, phi: f64, theta: f64) -> Vec3 {
    anchor
        + Vec3::new(
            theta.cos() * phi.cos(),
            theta.cos() * phi.sin(),
            theta.sin(),
        ) * d
}

/// Laplace sample with the given mean and standard deviation, clipped to
/// `mean ± π/2` to keep scatterers in the cluster's half-space.
fn sample_laplace<R: Rng>(rng: &mut R, mean: f64, std_dev: f64) -> f64 {
    // Inverse CDF with scale b = σ/√2.
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random_range(-0.5..0.5);
    let x = mean - b * u.signum() * (1.0 - 2.0 * u.abs()).ln();
    x.clamp(
        mean - std::f64::consts::FRAC_PI_2,
        mean + std::f64::consts::FRAC_PI_2,
    )
}

/// Circularly symmetric complex Gaussian with unit variance.
fn sample_cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let n = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    Complex64::new(n.sample(rng), n.sample(rng))
}

/// Clamp a cluster's z into the room and recompute range and mean angles from
/// the clamped position, so scatterers stay near the cluster and exactly at
/// its anchor distance.
fn clamp_into_room(anchor: Vec3, pos: Vec3, room_height_m: f64) -> (Vec3, f64, f64, f64) {
    let z = pos.z.clamp(0.1, room_height_m - 0.1);
    let clamped = Vec3::new(pos.x, pos.y, z);
    let rel = clamped - anchor;
    let d = rel.norm();
    let phi = rel.y.atan2(rel.x);
    let theta = (rel.z / d).clamp(-1.0, 1.0).asin();
    (clamped, d, phi, theta)
}

/// Draw one cluster set.
///
/// The cluster count is Poisson; for the SB family a draw of zero is redrawn
/// (an indoor room always has at least one scattering path to the Rx), while
/// the DB family may come out empty. Cluster ranges are uniform in
/// `[d_min, d_max]`, angles uniform over the family's configured ranges, and
/// scatterer angles Laplacian around the cluster mean.
pub fn sample_cluster_set<R: Rng>(
    params: &ClusterGenParams,
    family: ClusterFamily,
    anchor: Vec3,
    d_min_m: f64,
    d_max_m: f64,
    rng: &mut R,
) -> Result<ClusterSet> {
    params.validate()?;
    if d_min_m.is_nan() || d_max_m.is_nan() || d_min_m >= d_max_m {
        return Err(Error::InvalidRange(format!(
            "cluster distance range [{d_min_m}, {d_max_m}] is empty"
        )));
    }
    let fam = params.family(family);
    let poisson = Poisson::new(params.poisson_mean)
        .map_err(|e| Error::Config(format!("invalid poisson mean: {e}")))?;

    let mut count = poisson.sample(rng) as usize;
    if family == ClusterFamily::Sb {
        while count == 0 {
            count = poisson.sample(rng) as usize;
        }
    }

    let mut clusters = Vec::with_capacity(count);
    for _ in 0..count {
        let d = rng.random_range(d_min_m..d_max_m);
        let phi = rng.random_range(fam.azimuth.lo..fam.azimuth.hi);
        let theta = rng.random_range(fam.elevation.lo..fam.elevation.hi);
        let raw = cluster_position(anchor, d, phi, theta);
        let (position, d, phi, theta) = clamp_into_room(anchor, raw, params.room_height_m);

        let n_scatterers = rng.random_range(params.scatterers_min..=params.scatterers_max);
        let mut scatterers = Vec::with_capacity(n_scatterers);
        for _ in 0..n_scatterers {
            let phi_s = sample_laplace(rng, phi, fam.azimuth_spread);
            let theta_s = sample_laplace(rng, theta, fam.elevation_spread);
            scatterers.push(Scatterer {
                position: cluster_position(anchor, d, phi_s, theta_s),
                gain: sample_cn01(rng),
            });
        }

        clusters.push(Cluster {
            position,
            distance_m: d,
            azimuth: phi,
            elevation: theta,
            scatterers,
        });
    }

    Ok(ClusterSet { family, clusters })
}
