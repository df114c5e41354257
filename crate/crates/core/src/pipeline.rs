//! Pipeline orchestration: preparation (scene, plan, maps), CIR and database
//! generation, file emission, evaluation, and the trend sweeps.
//!
//! Case A is the full model. Case B disables the RIS (no VLoS availability,
//! no RIS-side clusters; the sweep phases become inert). Case C keeps the
//! RIS but replaces the spatially consistent maps with fresh i.i.d. draws
//! per survey position.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fingerprint::{
    build_plan, generate_database_with_powers, FingerprintDb, MeasurementPlan, ParamSource,
    PathPowerSummary, RssNoise, SurveyGrid,
};
use crate::io;
use crate::localize::{evaluate, EvalReport, SplitSpec};
use crate::scene::Scene;
use crate::spatial::ConsistencyMaps;

/// Database generation case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Full model: RIS and spatial consistency.
    A,
    /// RIS disabled, spatial consistency kept.
    B,
    /// RIS kept, spatial consistency disabled (i.i.d. per-position draws).
    C,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::A => write!(f, "A"),
            Case::B => write!(f, "B"),
            Case::C => write!(f, "C"),
        }
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Case> {
        match s {
            "A" | "a" => Ok(Case::A),
            "B" | "b" => Ok(Case::B),
            "C" | "c" => Ok(Case::C),
            other => Err(Error::Config(format!(
                "case must be A, B, or C, got \"{other}\""
            ))),
        }
    }
}

/// Everything produced by one generation run.
pub struct GenerateOutcome {
    pub scene: Scene,
    pub grid: SurveyGrid,
    pub plan: MeasurementPlan,
    /// Present for cases A and B; case C draws parameters per position.
    pub maps: Option<ConsistencyMaps>,
    pub db: FingerprintDb,
    pub powers: PathPowerSummary,
}

/// Run the full generation pipeline in memory.
pub fn generate(config: &RunConfig, case: Case) -> Result<GenerateOutcome> {
    let scene = config.build_scene()?;
    let grid = SurveyGrid::new(&scene, config.grid_spacing_m())?;
    let plan = build_plan(&scene, config.measurement_count())?;
    let cluster_params = config.cluster_params()?;
    let noise = (config.rss_noise_sigma_db > 0.0).then_some(RssNoise {
        sigma_db: config.rss_noise_sigma_db,
        seed: config.seed,
    });

    let maps = match case {
        Case::A | Case::B => {
            let mut generated = ConsistencyMaps::generate(
                &scene,
                &config.spatial_params(),
                &cluster_params,
                config.seed,
            )?;
            if case == Case::B {
                generated.disable_ris();
            }
            Some(generated)
        }
        Case::C => None,
    };
    let source = match &maps {
        Some(m) => ParamSource::Maps(m),
        None => ParamSource::Iid {
            seed: config.seed,
            cluster_params: &cluster_params,
            ris_enabled: true,
        },
    };

    let (db, powers) = generate_database_with_powers(
        &scene,
        &source,
        &plan,
        &grid,
        config.p0_mw(),
        noise.as_ref(),
    )?;
    Ok(GenerateOutcome {
        scene,
        grid,
        plan,
        maps,
        db,
        powers,
    })
}

/// Files emitted by [`write_outputs`].
#[derive(Debug, Serialize)]
pub struct EmittedFiles {
    pub database_csv: PathBuf,
    pub metadata_json: PathBuf,
    pub config_echo_toml: PathBuf,
    pub map_files: Vec<PathBuf>,
    pub radiomap_files: Vec<PathBuf>,
}

/// Write the database CSV, metadata sidecar, config echo, and the optional
/// map and radio-map exports.
pub fn write_outputs(
    outcome: &GenerateOutcome,
    config: &RunConfig,
    case: Case,
    out_dir: &Path,
    emit_maps: bool,
    emit_radiomaps: bool,
) -> Result<EmittedFiles> {
    std::fs::create_dir_all(out_dir)?;

    let database_csv = out_dir.join("database.csv");
    io::write_string(&database_csv, &io::database_to_csv(&outcome.db))?;

    let resolved = config.resolved()?;
    let echo = config.to_toml_string()?;
    let metadata = io::Metadata {
        format: "riswfl-database",
        software_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        case: case.to_string(),
        positions: outcome.db.records.len(),
        measurements: outcome.db.measurements(),
        config_digest: io::config_digest(&echo),
        design_flags: io::DesignFlags::default(),
        path_powers_dbm: outcome.powers,
        config: &resolved,
        cluster_map: outcome.maps.as_ref(),
    };
    let metadata_json = out_dir.join("metadata.json");
    io::write_string(&metadata_json, &io::to_json_pretty(&metadata)?)?;

    let config_echo_toml = out_dir.join("config_echo.toml");
    io::write_string(&config_echo_toml, &echo)?;

    let mut map_files = Vec::new();
    if emit_maps {
        if let Some(maps) = &outcome.maps {
            let dir = out_dir.join("maps");
            let seed = config.seed;
            let exports: [(&str, String, io::MapDescriptor); 4] = [
                (
                    "los_condition",
                    io::grid_to_csv(&maps.los, |b| if *b { "1".into() } else { "0".into() }),
                    io::MapDescriptor::new("los_condition", &maps.los, seed),
                ),
                (
                    "vlos_condition",
                    io::grid_to_csv(&maps.vlos, |b| if *b { "1".into() } else { "0".into() }),
                    io::MapDescriptor::new("vlos_condition", &maps.vlos, seed),
                ),
                (
                    "sf_los",
                    io::grid_to_csv(&maps.sf_los, |v| format!("{v:.6}")),
                    io::MapDescriptor::new("sf_los", &maps.sf_los, seed),
                ),
                (
                    "sf_nlos",
                    io::grid_to_csv(&maps.sf_nlos, |v| format!("{v:.6}")),
                    io::MapDescriptor::new("sf_nlos", &maps.sf_nlos, seed),
                ),
            ];
            for (name, csv, descriptor) in exports {
                let csv_path = dir.join(format!("{name}.csv"));
                io::write_string(&csv_path, &csv)?;
                let json_path = dir.join(format!("{name}.json"));
                io::write_string(&json_path, &io::to_json_pretty(&descriptor)?)?;
                map_files.push(csv_path);
                map_files.push(json_path);
            }
        }
    }

    let mut radiomap_files = Vec::new();
    if emit_radiomaps {
        let dir = out_dir.join("radiomaps");
        for n in 0..outcome.db.measurements() {
            let path = dir.join(format!("radiomap_m{:02}.csv", n + 1));
            io::write_string(&path, &io::radiomap_to_csv(&outcome.db, &outcome.grid, n)?)?;
            radiomap_files.push(path);
        }
    }

    Ok(EmittedFiles {
        database_csv,
        metadata_json,
        config_echo_toml,
        map_files,
        radiomap_files,
    })
}

/// Generate and write in one step.
pub fn run_generate(
    config: &RunConfig,
    case: Case,
    out_dir: &Path,
    emit_maps: bool,
    emit_radiomaps: bool,
) -> Result<EmittedFiles> {
    let outcome = generate(config, case)?;
    write_outputs(&outcome, config, case, out_dir, emit_maps, emit_radiomaps)
}

/// Evaluate a database file with the KNN baseline: writes
/// `eval_report.json` and `eval_errors.csv` into `out_dir`.
pub fn run_eval(db_path: &Path, k: usize, split_seed: u64, out_dir: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(db_path)?;
    let db = io::database_from_csv(&text)?;
    let spec = SplitSpec {
        train_fraction: 0.8,
        shuffle_seed: split_seed,
    };
    let report = evaluate(&db, &spec, k)?;

    std::fs::create_dir_all(out_dir)?;
    io::write_string(
        &out_dir.join("eval_report.json"),
        &io::to_json_pretty(&report)?,
    )?;
    let mut csv = String::from("query,error_m\n");
    for (i, e) in report.errors_m.iter().enumerate() {
        csv.push_str(&format!("{i},{e:.6}\n"));
    }
    io::write_string(&out_dir.join("eval_errors.csv"), &csv)?;
    Ok(report)
}

/// One row of the trend sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub case: Case,
    pub measurements: usize,
    pub unit_count: usize,
    pub seed: u64,
    pub rmse_m: f64,
}

/// Median per-path powers for one RIS size (case A).
#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub unit_count: usize,
    pub los_dbm: f64,
    pub vlos_dbm: f64,
    pub sb_dbm: f64,
    pub db_dbm: f64,
}

/// Trend sweep results.
#[derive(Debug, Serialize)]
pub struct TrendsSummary {
    pub rows: Vec<TrendRow>,
    pub medians: Vec<TrendRow>,
    pub powers: Vec<PowerRow>,
}

pub fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Configuration of one sweep cell.
fn sweep_config(
    base: &RunConfig,
    measurements: usize,
    units_per_side: usize,
    seed: u64,
) -> RunConfig {
    let mut cfg = base.clone();
    cfg.measurements = Some(measurements);
    cfg.ris.rows = Some(units_per_side);
    cfg.ris.cols = Some(units_per_side);
    cfg.seed = seed;
    cfg
}

/// Run the full trend sweep: {A, B, C} × N ∈ {4, 12, 20} × I ∈ {25, 100,
/// 225, 400} × seeds, evaluate each database with KNN (K = 5, split seed =
/// run seed), and aggregate medians plus the per-path power table versus I.
pub fn run_trends(
    base: &RunConfig,
    seeds: &[u64],
    k: usize,
    out_dir: &Path,
) -> Result<TrendsSummary> {
    if seeds.is_empty() {
        return Err(Error::Config("trends needs at least one seed".into()));
    }
    let cases = [Case::A, Case::B, Case::C];
    let measurement_counts = [4usize, 12, 20];
    let sides = [5usize, 10, 15, 20]; // I = 25, 100, 225, 400

    let mut rows = Vec::new();
    let mut power_samples: Vec<(usize, PathPowerSummary)> = Vec::new();
    for &case in &cases {
        for &n in &measurement_counts {
            for &side in &sides {
                for &seed in seeds {
                    let cfg = sweep_config(base, n, side, seed);
                    let outcome = generate(&cfg, case)?;
                    let spec = SplitSpec {
                        train_fraction: 0.8,
                        shuffle_seed: seed,
                    };
                    let report = evaluate(&outcome.db, &spec, k)?;
                    rows.push(TrendRow {
                        case,
                        measurements: n,
                        unit_count: side * side,
                        seed,
                        rmse_m: report.rmse_m,
                    });
                    if case == Case::A && n == 20 {
                        power_samples.push((side * side, outcome.powers));
                    }
                }
            }
        }
    }

    let mut medians = Vec::new();
    for &case in &cases {
        for &n in &measurement_counts {
            for &side in &sides {
                let values: Vec<f64> = rows
                    .iter()
                    .filter(|r| {
                        r.case == case && r.measurements == n && r.unit_count == side * side
                    })
                    .map(|r| r.rmse_m)
                    .collect();
                let m = median(values);
                medians.push(TrendRow {
                    case,
                    measurements: n,
                    unit_count: side * side,
                    seed: 0,
                    rmse_m: m,
                });
            }
        }
    }

    let powers = sides
        .iter()
        .map(|&side| {
            let unit_count = side * side;
            let of = |f: fn(&PathPowerSummary) -> f64| {
                let v: Vec<f64> = power_samples
                    .iter()
                    .filter(|(u, _)| *u == unit_count)
                    .map(|(_, p)| f(p))
                    .collect();
                median(v)
            };
            PowerRow {
                unit_count,
                los_dbm: of(|p| p.los_dbm),
                vlos_dbm: of(|p| p.vlos_dbm),
                sb_dbm: of(|p| p.sb_dbm),
                db_dbm: of(|p| p.db_dbm),
            }
        })
        .collect();

    let summary = TrendsSummary {
        rows,
        medians,
        powers,
    };
    write_trends(&summary, out_dir)?;
    Ok(summary)
}

fn write_trends(summary: &TrendsSummary, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;

    let mut csv = String::from("case,measurements,unit_count,seed,rmse_m\n");
    for r in &summary.rows {
        csv.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            r.case, r.measurements, r.unit_count, r.seed, r.rmse_m
        ));
    }
    for r in &summary.medians {
        csv.push_str(&format!(
            "{},{},{},median,{:.6}\n",
            r.case, r.measurements, r.unit_count, r.rmse_m
        ));
    }
    io::write_string(&out_dir.join("trends.csv"), &csv)?;

    let mut powers = String::from("unit_count,p_los_dbm,p_vlos_dbm,p_sb_dbm,p_db_dbm\n");
    for p in &summary.powers {
        powers.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            p.unit_count, p.los_dbm, p.vlos_dbm, p.sb_dbm, p.db_dbm
        ));
    }
    io::write_string(&out_dir.join("path_powers.csv"), &powers)?;

    let mut md = String::from("# Trend sweep\n\n## KNN RMSE per run\n\n");
    md.push_str("| case | N | I | seed | RMSE (m) |\n|---|---|---|---|---|\n");
    for r in &summary.rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {:.3} |\n",
            r.case, r.measurements, r.unit_count, r.seed, r.rmse_m
        ));
    }
    md.push_str("\n## Median RMSE\n\n| case | N | I | RMSE (m) |\n|---|---|---|---|\n");
    for r in &summary.medians {
        md.push_str(&format!(
            "| {} | {} | {} | {:.3} |\n",
            r.case, r.measurements, r.unit_count, r.rmse_m
        ));
    }
    md.push_str("\n## AoI-averaged path powers (case A, N = 20, median over seeds)\n\n");
    md.push_str(
        "| I | P_LoS (dBm) | P_VLoS (dBm) | P_SB (dBm) | P_DB (dBm) |\n|---|---|---|---|---|\n",
    );
    for p in &summary.powers {
        md.push_str(&format!(
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} |\n",
            p.unit_count, p.los_dbm, p.vlos_dbm, p.sb_dbm, p.db_dbm
        ));
    }
    io::write_string(&out_dir.join("trends.md"), &md)?;
    Ok(())
}
