//! KNN fingerprint localization and accuracy metrics.
//!
//! The database splits into train/test by a seeded shuffle, queries are
//! matched by Euclidean distance in RSS space, and the prediction is the
//! inverse-distance-weighted mean of the K nearest training coordinates.
//! Errors are 2-D (x, y): the survey height is constant by construction.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fingerprint::{FingerprintDb, FingerprintRecord};
use crate::geometry::Vec3;
use crate::rng::substream;

/// Train/test split specification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitSpec {
    /// Fraction of records used for training, in (0, 1).
    pub train_fraction: f64,
    pub shuffle_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            shuffle_seed: 0,
        }
    }
}

/// Localization accuracy report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub rmse_m: f64,
    /// Sorted per-query 2-D errors, meters (the error CDF support).
    pub errors_m: Vec<f64>,
    pub k: usize,
    pub train_fraction: f64,
    pub shuffle_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

/// Seeded uniform shuffle followed by a prefix split: `⌊fraction·S_P⌋`
/// records train, the rest test.
pub fn split(
    db: &FingerprintDb,
    spec: &SplitSpec,
) -> Result<(Vec<FingerprintRecord>, Vec<FingerprintRecord>)> {
    if db.records.len() < 2 {
        return Err(Error::EmptyDatabase);
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config("split fraction must be in (0, 1)".into()));
    }
    let mut records = db.records.clone();
    let mut rng = substream(spec.shuffle_seed, "split", 0);
    records.shuffle(&mut rng);
    let train_size =
        ((spec.train_fraction * records.len() as f64).floor() as usize).clamp(1, records.len() - 1);
    let test = records.split_off(train_size);
    Ok((records, test))
}

/// Squared Euclidean distance between two fingerprints in RSS space.
fn rss_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Predict a position from a query fingerprint: inverse-distance-weighted
/// mean of the K nearest training coordinates (weights `1/(d + 1e-9)`),
/// with z fixed to the survey height. Distance ties break by ascending
/// training-record index.
pub fn knn_predict(train: &[FingerprintRecord], query_rss: &[f64], k: usize) -> Result<Vec3> {
    if k < 1 || k > train.len() {
        return Err(Error::KOutOfRange {
            k,
            max: train.len(),
        });
    }
    let expected = train[0].rss_dbm.len();
    if query_rss.len() != expected {
        return Err(Error::DimensionMismatch {
            got: query_rss.len(),
            expected,
        });
    }

    let mut dists: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, r)| (rss_distance_sq(&r.rss_dbm, query_rss), i))
        .collect();
    // Stable sort on distance preserves record order among ties.
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));

    const EPS: f64 = 1e-9;
    let mut wx = 0.0;
    let mut wy = 0.0;
    let mut wsum = 0.0;
    for &(d_sq, idx) in dists.iter().take(k) {
        let w = 1.0 / (d_sq.sqrt() + EPS);
        wx += w * train[idx].position.x;
        wy += w * train[idx].position.y;
        wsum += w;
    }
    Ok(Vec3::new(wx / wsum, wy / wsum, train[0].position.z))
}

/// Split, predict every test record, and report 2-D errors and the RMSE.
pub fn evaluate(db: &FingerprintDb, spec: &SplitSpec, k: usize) -> Result<EvalReport> {
    let (train, test) = split(db, spec)?;
    let mut errors: Vec<f64> = test
        .iter()
        .map(|record| {
            let predicted = knn_predict(&train, &record.rss_dbm, k)?;
            let dx = predicted.x - record.position.x;
            let dy = predicted.y - record.position.y;
            Ok((dx * dx + dy * dy).sqrt())
        })
        .collect::<Result<_>>()?;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    errors.sort_by(f64::total_cmp);
    Ok(EvalReport {
        rmse_m: mse.sqrt(),
        errors_m: errors,
        k,
        train_fraction: spec.train_fraction,
        shuffle_seed: spec.shuffle_seed,
        train_size: train.len(),
        test_size: test.len(),
    })
}
