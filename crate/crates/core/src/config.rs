//! Run configuration: a human-editable TOML file with unit-suffixed keys.
//!
//! Every parameter has a default matching the reference indoor setup (20 m
//! room, 4-antenna Tx at [0, 10, 3], 20x20 RIS at [10, 15, 3], 5.2 GHz,
//! 10 dBm transmit power, 10x10 m survey area at 0.2 m spacing, 20
//! measurements). Unknown keys are rejected; angles are accepted in degrees
//! and dB at this boundary only, everything downstream is radians and linear.

use serde::{Deserialize, Serialize};

use crate::clusters::{AngleRange, ClusterGenParams, FamilyParams};
use crate::error::{Error, Result};
use crate::geometry::{RisGeometry, TxGeometry, Vec3};
use crate::propagation::PathlossParams;
use crate::radiation::Pattern;
use crate::scene::{Aoi, Room, Scene};
use crate::spatial::SpatialParams;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomConfig {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for RoomConfig {
    fn default() -> Self {
        RoomConfig {
            length_m: 20.0,
            width_m: 20.0,
            height_m: 3.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TxConfig {
    pub position_m: Option<[f64; 3]>,
    pub antennas: Option<usize>,
    /// Antenna spacing; defaults to half a wavelength.
    pub spacing_m: Option<f64>,
    pub axis: Option<[f64; 3]>,
    pub normal: Option<[f64; 3]>,
    /// "cosine" (default) or "omnidirectional".
    pub pattern: Option<String>,
    pub gain_max_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RxConfig {
    pub height_m: f64,
    pub normal: [f64; 3],
    /// "omnidirectional" (default) or "cosine".
    pub pattern: Option<String>,
    pub gain_max_db: Option<f64>,
}

impl Default for RxConfig {
    fn default() -> Self {
        RxConfig {
            height_m: 1.0,
            normal: [0.0, 0.0, 1.0],
            pattern: None,
            gain_max_db: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RisConfig {
    pub position_m: Option<[f64; 3]>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Unit length/width; default half a wavelength each.
    pub unit_x_m: Option<f64>,
    pub unit_y_m: Option<f64>,
    pub row_axis: Option<[f64; 3]>,
    pub col_axis: Option<[f64; 3]>,
    pub normal: Option<[f64; 3]>,
    pub reflection_magnitude: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathlossConfig {
    pub n_los: f64,
    pub n_nlos: f64,
    pub sigma_los_db: f64,
    pub sigma_nlos_db: f64,
    pub d0_m: f64,
    pub d0_ti_m: f64,
    pub d0_ir_m: f64,
}

impl Default for PathlossConfig {
    fn default() -> Self {
        PathlossConfig {
            n_los: 1.73,
            n_nlos: 3.19,
            sigma_los_db: 3.02,
            sigma_nlos_db: 8.29,
            d0_m: 1.0,
            d0_ti_m: 1.0,
            d0_ir_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpatialConfig {
    pub condition_granularity_m: f64,
    pub sf_granularity_m: f64,
    pub cluster_granularity_m: f64,
    pub sf_correlation_m: f64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig {
            condition_granularity_m: 1.0,
            sf_granularity_m: 2.0,
            cluster_granularity_m: 2.5,
            sf_correlation_m: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClustersConfig {
    pub poisson_mean: f64,
    pub scatterers_min: usize,
    pub scatterers_max: usize,
    pub sb_azimuth_deg: [f64; 2],
    pub sb_elevation_deg: [f64; 2],
    pub db_azimuth_deg: [f64; 2],
    pub db_elevation_deg: [f64; 2],
    pub azimuth_spread_deg: f64,
    pub elevation_spread_deg: f64,
}

impl Default for ClustersConfig {
    fn default() -> Self {
        ClustersConfig {
            poisson_mean: 1.8,
            scatterers_min: 1,
            scatterers_max: 30,
            sb_azimuth_deg: [-90.0, 90.0],
            sb_elevation_deg: [-45.0, 45.0],
            db_azimuth_deg: [225.0, 315.0],
            db_elevation_deg: [-45.0, 45.0],
            azimuth_spread_deg: 5.0,
            elevation_spread_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoiConfig {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
}

impl Default for AoiConfig {
    fn default() -> Self {
        AoiConfig {
            x_min_m: 5.0,
            x_max_m: 15.0,
            y_min_m: 0.0,
            y_max_m: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Survey grid spacing; default 0.2 m.
    pub spacing_m: Option<f64>,
}

/// Complete run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Number of measurements N per survey position.
    pub measurements: Option<usize>,
    pub frequency_ghz: f64,
    pub tx_power_dbm: f64,
    /// Additive Gaussian dB noise on RSS values; 0 disables it.
    pub rss_noise_sigma_db: f64,
    pub room: RoomConfig,
    pub tx: TxConfig,
    pub rx: RxConfig,
    pub ris: RisConfig,
    pub pathloss: PathlossConfig,
    pub spatial: SpatialConfig,
    pub clusters: ClustersConfig,
    pub aoi: AoiConfig,
    pub grid: GridConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            measurements: None,
            frequency_ghz: 5.2,
            tx_power_dbm: 10.0,
            rss_noise_sigma_db: 0.0,
            room: RoomConfig::default(),
            tx: TxConfig::default(),
            rx: RxConfig::default(),
            ris: RisConfig::default(),
            pathloss: PathlossConfig::default(),
            spatial: SpatialConfig::default(),
            clusters: ClustersConfig::default(),
            aoi: AoiConfig::default(),
            grid: GridConfig::default(),
        }
    }
}

fn parse_pattern(key: &str, name: &str, gain_max_db: Option<f64>) -> Result<Pattern> {
    match name {
        "omnidirectional" => Ok(Pattern::Omnidirectional),
        "cosine" => Pattern::cosine_from_db(gain_max_db.unwrap_or(8.0)),
        other => Err(Error::Config(format!(
            "{key}.pattern must be \"omnidirectional\" or \"cosine\", got \"{other}\""
        ))),
    }
}

impl RunConfig {
    /// Parse a TOML configuration string; parse errors carry line/column.
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Resolved TOML echo with every derived default made explicit.
    pub fn to_toml_string(&self) -> Result<String> {
        let resolved = self.resolved()?;
        toml::to_string(&resolved).map_err(|e| Error::Config(format!("config echo failed: {e}")))
    }

    /// Copy of the config with all wavelength-derived defaults filled in.
    pub fn resolved(&self) -> Result<RunConfig> {
        let mut out = self.clone();
        let half_wave = self.wavelength_m() / 2.0;
        out.measurements = Some(self.measurement_count());
        let tx = &mut out.tx;
        tx.position_m.get_or_insert([0.0, 10.0, 3.0]);
        tx.antennas.get_or_insert(4);
        tx.spacing_m.get_or_insert(half_wave);
        tx.axis.get_or_insert([0.0, 0.0, -1.0]);
        tx.normal.get_or_insert([1.0, 0.0, 0.0]);
        tx.pattern.get_or_insert_with(|| "cosine".into());
        if tx.pattern.as_deref() == Some("cosine") {
            tx.gain_max_db.get_or_insert(8.0);
        }
        let ris = &mut out.ris;
        ris.position_m.get_or_insert([10.0, 15.0, 3.0]);
        ris.rows.get_or_insert(20);
        ris.cols.get_or_insert(20);
        ris.unit_x_m.get_or_insert(half_wave);
        ris.unit_y_m.get_or_insert(half_wave);
        ris.row_axis.get_or_insert([0.0, 0.0, 1.0]);
        ris.col_axis.get_or_insert([1.0, 0.0, 0.0]);
        ris.normal.get_or_insert([0.0, -1.0, 0.0]);
        ris.reflection_magnitude.get_or_insert(0.4);
        out.rx
            .pattern
            .get_or_insert_with(|| "omnidirectional".into());
        out.grid.spacing_m.get_or_insert(0.2);
        out.build_scene()?;
        Ok(out)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / (self.frequency_ghz * 1e9)
    }

    pub fn p0_mw(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 10.0)
    }

    pub fn measurement_count(&self) -> usize {
        self.measurements.unwrap_or(20)
    }

    pub fn grid_spacing_m(&self) -> f64 {
        self.grid.spacing_m.unwrap_or(0.2)
    }

    pub fn spatial_params(&self) -> SpatialParams {
        SpatialParams {
            condition_granularity_m: self.spatial.condition_granularity_m,
            sf_granularity_m: self.spatial.sf_granularity_m,
            cluster_granularity_m: self.spatial.cluster_granularity_m,
            sf_correlation_m: self.spatial.sf_correlation_m,
        }
    }

    pub fn cluster_params(&self) -> Result<ClusterGenParams> {
        let c = &self.clusters;
        let params = ClusterGenParams {
            poisson_mean: c.poisson_mean,
            scatterers_min: c.scatterers_min,
            scatterers_max: c.scatterers_max,
            sb: FamilyParams {
                azimuth: AngleRange::new(
                    c.sb_azimuth_deg[0].to_radians(),
                    c.sb_azimuth_deg[1].to_radians(),
                )?,
                elevation: AngleRange::new(
                    c.sb_elevation_deg[0].to_radians(),
                    c.sb_elevation_deg[1].to_radians(),
                )?,
                azimuth_spread: c.azimuth_spread_deg.to_radians(),
                elevation_spread: c.elevation_spread_deg.to_radians(),
            },
            db: FamilyParams {
                azimuth: AngleRange::new(
                    c.db_azimuth_deg[0].to_radians(),
                    c.db_azimuth_deg[1].to_radians(),
                )?,
                elevation: AngleRange::new(
                    c.db_elevation_deg[0].to_radians(),
                    c.db_elevation_deg[1].to_radians(),
                )?,
                azimuth_spread: c.azimuth_spread_deg.to_radians(),
                elevation_spread: c.elevation_spread_deg.to_radians(),
            },
            room_height_m: self.room.height_m,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn pathloss_params(&self) -> PathlossParams {
        PathlossParams {
            wavelength_m: self.wavelength_m(),
            d0_m: self.pathloss.d0_m,
            d0_ti_m: self.pathloss.d0_ti_m,
            d0_ir_m: self.pathloss.d0_ir_m,
            n_los: self.pathloss.n_los,
            n_nlos: self.pathloss.n_nlos,
            sigma_los_db: self.pathloss.sigma_los_db,
            sigma_nlos_db: self.pathloss.sigma_nlos_db,
        }
    }

    /// Build and validate the full scene.
    pub fn build_scene(&self) -> Result<Scene> {
        if !self.frequency_ghz.is_finite() || self.frequency_ghz <= 0.0 {
            return Err(Error::Config("frequency_ghz must be > 0".into()));
        }
        if !(self.tx_power_dbm.is_finite()) {
            return Err(Error::Config("tx_power_dbm must be finite".into()));
        }
        if self.rss_noise_sigma_db < 0.0 {
            return Err(Error::Config("rss_noise_sigma_db must be >= 0".into()));
        }
        if self.measurement_count() < 1 {
            return Err(Error::Config("measurements must be >= 1".into()));
        }
        let half_wave = self.wavelength_m() / 2.0;
        let room = Room {
            length_m: self.room.length_m,
            width_m: self.room.width_m,
            height_m: self.room.height_m,
        };
        let tx = TxGeometry::new(
            vec3(self.tx.position_m.unwrap_or([0.0, 10.0, 3.0])),
            self.tx.antennas.unwrap_or(4),
            self.tx.spacing_m.unwrap_or(half_wave),
            vec3(self.tx.axis.unwrap_or([0.0, 0.0, -1.0])),
            vec3(self.tx.normal.unwrap_or([1.0, 0.0, 0.0])),
        )?;
        let ris = RisGeometry::new(
            vec3(self.ris.position_m.unwrap_or([10.0, 15.0, 3.0])),
            self.ris.rows.unwrap_or(20),
            self.ris.cols.unwrap_or(20),
            self.ris.unit_x_m.unwrap_or(half_wave),
            self.ris.unit_y_m.unwrap_or(half_wave),
            vec3(self.ris.row_axis.unwrap_or([0.0, 0.0, 1.0])),
            vec3(self.ris.col_axis.unwrap_or([1.0, 0.0, 0.0])),
            vec3(self.ris.normal.unwrap_or([0.0, -1.0, 0.0])),
            self.ris.reflection_magnitude.unwrap_or(0.4),
        )?;
        let tx_pattern = parse_pattern(
            "tx",
            self.tx.pattern.as_deref().unwrap_or("cosine"),
            self.tx.gain_max_db,
        )?;
        let rx_pattern = parse_pattern(
            "rx",
            self.rx.pattern.as_deref().unwrap_or("omnidirectional"),
            self.rx.gain_max_db,
        )?;
        let aoi = Aoi {
            x_min_m: self.aoi.x_min_m,
            x_max_m: self.aoi.x_max_m,
            y_min_m: self.aoi.y_min_m,
            y_max_m: self.aoi.y_max_m,
        };
        // Cluster and spatial parameters are validated here too so a bad
        // config fails at load, not mid-run.
        self.cluster_params()?;
        self.spatial_params().validate()?;
        if !self.grid_spacing_m().is_finite() || self.grid_spacing_m() <= 0.0 {
            return Err(Error::Config("grid.spacing_m must be > 0".into()));
        }
        Scene::new(
            room,
            tx,
            ris,
            vec3(self.rx.normal),
            self.rx.height_m,
            tx_pattern,
            rx_pattern,
            self.pathloss_params(),
            aoi,
        )
    }
}
