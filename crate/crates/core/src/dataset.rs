//! Per-release raw datasets: every requirement resolved at one release,
//! without headers and exact duplicates.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::model::{DeploymentScope, DevelopmentRegistry, ReleaseId, SpecDocument};
use crate::resolver::{materialize, release_universe, ResolveError};
use crate::tokenizer::token_count;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("release {0} is not in the release universe")]
    UnknownRelease(ReleaseId),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("cannot write dataset: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Records with fewer tokens are treated as headers and dropped.
    pub min_tokens: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { min_tokens: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub release: ReleaseId,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub dropped_headers: usize,
    pub dropped_duplicates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseDataset {
    pub release: ReleaseId,
    pub records: Vec<DatasetRecord>,
    pub stats: DatasetStats,
}

impl ReleaseDataset {
    /// JSON Lines, one `{id, release, text}` object per record.
    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }
}

pub fn extract_release_dataset(
    docs: &[SpecDocument],
    r: ReleaseId,
    reg: &DevelopmentRegistry,
    config: &DatasetConfig,
) -> Result<ReleaseDataset, DatasetError> {
    if !release_universe(docs, reg).contains(&r) {
        return Err(DatasetError::UnknownRelease(r));
    }
    extract_unchecked(docs, r, reg, config)
}

fn extract_unchecked(
    docs: &[SpecDocument],
    r: ReleaseId,
    reg: &DevelopmentRegistry,
    config: &DatasetConfig,
) -> Result<ReleaseDataset, DatasetError> {
    let mut stats = DatasetStats::default();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for req in docs.iter().flat_map(|d| d.requirements()) {
        let Some(resolved) = materialize(req, r, DeploymentScope::Both, reg)? else {
            continue;
        };
        stats.total += 1;
        if token_count(&resolved.text) < config.min_tokens {
            stats.dropped_headers += 1;
        } else if !seen.insert(resolved.text.clone()) {
            stats.dropped_duplicates += 1;
        } else {
            records.push(DatasetRecord { id: resolved.id, release: r, text: resolved.text });
        }
    }
    Ok(ReleaseDataset { release: r, records, stats })
}

/// One dataset per release of the universe, in release order.
pub fn extract_all(docs: &[SpecDocument], reg: &DevelopmentRegistry, config: &DatasetConfig) -> Result<Vec<ReleaseDataset>, DatasetError> {
    extract_all_with(docs, reg, config, Execution::default())
}

pub fn extract_all_with(
    docs: &[SpecDocument],
    reg: &DevelopmentRegistry,
    config: &DatasetConfig,
    exec: Execution,
) -> Result<Vec<ReleaseDataset>, DatasetError> {
    let universe = release_universe(docs, reg);
    exec.map(&universe, |&r| extract_unchecked(docs, r, reg, config)).into_iter().collect()
}

#[derive(Serialize)]
struct NaiveRecord<'a> {
    id: &'a str,
    first_release: ReleaseId,
    last_release: String,
    content: String,
}

/// Size in bytes of a JSON Lines dump of every version of every requirement
/// with its tags left in, which is what a dataset without release separation
/// would hold.
pub fn naive_dump_bytes(docs: &[SpecDocument]) -> usize {
    let mut total = 0;
    for req in docs.iter().flat_map(|d| d.requirements()) {
        for v in &req.versions {
            let rec = NaiveRecord {
                id: &req.id,
                first_release: v.first_release,
                last_release: v.last_release.to_string(),
                content: crate::parser::serialize_content(&v.content),
            };
            total += serde_json::to_string(&rec).expect("record serializes").len() + 1;
        }
    }
    total
}

#[derive(Serialize)]
struct StatsFile<'a> {
    naive_dump_bytes: usize,
    releases: Vec<ReleaseStats<'a>>,
}

#[derive(Serialize)]
struct ReleaseStats<'a> {
    release: ReleaseId,
    records: usize,
    bytes: usize,
    #[serde(flatten)]
    stats: &'a DatasetStats,
}

/// Writes `<out>/<release>.jsonl` for each dataset plus `<out>/stats.json`.
pub fn write_datasets(out: &Path, datasets: &[ReleaseDataset], docs: &[SpecDocument]) -> Result<(), DatasetError> {
    fs::create_dir_all(out)?;
    let mut releases = Vec::new();
    for ds in datasets {
        let body = ds.to_jsonl();
        fs::write(out.join(format!("{}.jsonl", ds.release)), &body)?;
        releases.push(ReleaseStats { release: ds.release, records: ds.records.len(), bytes: body.len(), stats: &ds.stats });
    }
    let stats = StatsFile { naive_dump_bytes: naive_dump_bytes(docs), releases };
    fs::write(out.join("stats.json"), serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n")?;
    Ok(())
}
