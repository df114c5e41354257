//! File formats: the database CSV, map/radio-map CSV grids with JSON
//! descriptors, and the metadata sidecar.
//!
//! All numeric CSV values use fixed-format decimals with 6 fractional digits,
//! and every writer is deterministic: the same in-memory data always produces
//! the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fingerprint::{FingerprintDb, FingerprintRecord, PathPowerSummary, SurveyGrid};
use crate::geometry::Vec3;
use crate::spatial::{ConsistencyMaps, GridMap};

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

/// Render the database CSV: header `x,y,z,rss_1,...,rss_N`, one row per
/// survey position in grid row-major order.
pub fn database_to_csv(db: &FingerprintDb) -> String {
    let n = db.measurements();
    let mut out = String::new();
    out.push_str("x,y,z");
    for i in 1..=n {
        let _ = write!(out, ",rss_{i}");
    }
    out.push('\n');
    for record in &db.records {
        let _ = write!(
            out,
            "{},{},{}",
            fmt6(record.position.x),
            fmt6(record.position.y),
            fmt6(record.position.z)
        );
        for v in &record.rss_dbm {
            let _ = write!(out, ",{}", fmt6(*v));
        }
        out.push('\n');
    }
    out
}

/// Parse a database CSV, rejecting malformed input with the offending file
/// line number (the header is line 1).
pub fn database_from_csv(text: &str) -> Result<FingerprintDb> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Schema("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 4 || columns[0] != "x" || columns[1] != "y" || columns[2] != "z" {
        return Err(Error::Schema(format!(
            "header must be x,y,z,rss_1,...,rss_N, got \"{header}\""
        )));
    }
    let n = columns.len() - 3;
    for (i, col) in columns[3..].iter().enumerate() {
        let expected = format!("rss_{}", i + 1);
        if *col != expected {
            return Err(Error::Schema(format!(
                "header column {} should be {expected}, got \"{col}\"",
                i + 4
            )));
        }
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1; // 1-based file line number
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 3 {
            return Err(Error::Schema(format!(
                "row {row}: expected {} columns, found {}",
                n + 3,
                fields.len()
            )));
        }
        let mut values = Vec::with_capacity(n + 3);
        for field in &fields {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("row {row}: non-numeric value \"{field}\"")))?;
            values.push(v);
        }
        records.push(FingerprintRecord {
            position: Vec3::new(values[0], values[1], values[2]),
            rss_dbm: values[3..].to_vec(),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    Ok(FingerprintDb { records })
}

/// Render one grid map as CSV, one line per map row.
pub fn grid_to_csv<V, F: Fn(&V) -> String>(map: &GridMap<V>, cell: F) -> String {
    let mut out = String::new();
    for row in 0..map.rows {
        for col in 0..map.cols {
            if col > 0 {
                out.push(',');
            }
            out.push_str(&cell(map.get(row, col)));
        }
        out.push('\n');
    }
    out
}

/// JSON descriptor accompanying a map CSV.
#[derive(Debug, Serialize)]
pub struct MapDescriptor {
    pub kind: String,
    pub origin: Vec3,
    pub granularity_m: f64,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl MapDescriptor {
    pub fn new<V>(kind: &str, map: &GridMap<V>, seed: u64) -> Self {
        MapDescriptor {
            kind: kind.to_string(),
            origin: map.origin,
            granularity_m: map.granularity_m,
            rows: map.rows,
            cols: map.cols,
            seed,
        }
    }
}

/// Per-measurement radio map over the survey grid: RSS of measurement
/// `measurement` arranged as a rows×cols CSV.
pub fn radiomap_to_csv(
    db: &FingerprintDb,
    grid: &SurveyGrid,
    measurement: usize,
) -> Result<String> {
    if measurement >= db.measurements() {
        return Err(Error::Schema(format!(
            "measurement {measurement} out of range"
        )));
    }
    if db.records.len() != grid.len() {
        return Err(Error::Schema(
            "database does not match the survey grid".into(),
        ));
    }
    let mut out = String::new();
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            if col > 0 {
                out.push(',');
            }
            out.push_str(&fmt6(
                db.records[row * grid.cols + col].rss_dbm[measurement],
            ));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Flags recording the resolved modeling choices, echoed into the sidecar so
/// a database is interpretable without this crate's source at hand.
#[derive(Debug, Serialize)]
pub struct DesignFlags {
    /// The RIS unit gain enters the VLoS/DB amplitudes as
    /// sqrt(G_I,max cos(phi_in)) * sqrt(G_I,max cos(phi_out)).
    pub ris_gain_product_form: &'static str,
    /// VLoS uses the LoS shadow-fading map; DB-NLoS uses the NLoS map.
    pub vlos_shadow_fading_source: &'static str,
    /// Tx-side cluster count is redrawn to be at least 1; RIS-side may be 0.
    pub sb_cluster_count_min_one: bool,
    /// Filtered fields are renormalized (unit variance for the condition
    /// field, sample std = sigma for shadow fading).
    pub filtered_field_renormalized: bool,
    /// RSS is the coherent narrowband sum over all taps.
    pub narrowband_coherent_sum: bool,
    /// Scatterer gains are fixed per coherence cell for the whole survey.
    pub beta_fixed_per_coherence_cell: bool,
    pub zero_field_rss_sentinel_dbm: f64,
}

impl Default for DesignFlags {
    fn default() -> Self {
        DesignFlags {
            ris_gain_product_form: "sqrt(G_I,max*cos(phi_IT)) * sqrt(G_I,max*cos(phi_IR))",
            vlos_shadow_fading_source: "vlos:chi_los, db_nlos:chi_nlos",
            sb_cluster_count_min_one: true,
            filtered_field_renormalized: true,
            narrowband_coherent_sum: true,
            beta_fixed_per_coherence_cell: true,
            zero_field_rss_sentinel_dbm: crate::fingerprint::ZERO_FIELD_RSS_DBM,
        }
    }
}

/// FNV-1a digest of a canonical config rendering, as a hex string.
pub fn config_digest(canonical: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// The metadata sidecar emitted next to every database.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub format: &'static str,
    pub software_version: &'static str,
    pub seed: u64,
    pub case: String,
    pub positions: usize,
    pub measurements: usize,
    /// Digest of the resolved config echo (`config_echo.toml`).
    pub config_digest: String,
    pub design_flags: DesignFlags,
    pub path_powers_dbm: PathPowerSummary,
    pub config: &'a crate::config::RunConfig,
    /// Full cluster layouts for reproducibility audits (None when spatial
    /// consistency is disabled and clusters are drawn per position).
    pub cluster_map: Option<&'a ConsistencyMaps>,
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("json serialization failed: {e}")))
}
