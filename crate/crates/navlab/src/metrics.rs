//! Per-episode metrics, the CSV format, and run aggregation.

use crate::env::StepEvent;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

/// Fixed metrics CSV header.
pub const CSV_HEADER: &str = "episode,cum_reward,steps,arrivals,event,wall_ms";

/// One finished episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub cum_reward: f64,
    pub steps: u32,
    pub arrivals: u32,
    /// Terminal event; always `Collided` or `Timeout`.
    pub event: StepEvent,
    /// Wall-clock duration. Written as 0 unless timing is enabled, so
    /// that metrics files are byte-reproducible by default.
    pub wall_ms: u64,
}

impl EpisodeRecord {
    /// An episode succeeds when it reached at least one target and did
    /// not end in a collision.
    pub fn success(&self) -> bool {
        self.arrivals >= 1 && self.event != StepEvent::Collided
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.episode, self.cum_reward, self.steps, self.arrivals, self.event, self.wall_ms
        )
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("metrics file {0} is empty")]
    Empty(String),
}

/// Incremental CSV writer: one flushed line per finished episode, so a
/// clean shutdown never leaves partial rows.
pub struct MetricsWriter {
    file: std::io::BufWriter<std::fs::File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self, MetricsError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "{CSV_HEADER}")?;
        file.flush()?;
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &EpisodeRecord) -> Result<(), MetricsError> {
        writeln!(self.file, "{}", record.to_csv_row())?;
        self.file.flush()?;
        Ok(())
    }
}

fn parse_event(s: &str) -> Option<StepEvent> {
    match s {
        "none" => Some(StepEvent::None),
        "arrived" => Some(StepEvent::Arrived),
        "collided" => Some(StepEvent::Collided),
        "timeout" => Some(StepEvent::Timeout),
        _ => None,
    }
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpisodeRecord>, MetricsError> {
    let content = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, other)) => {
            return Err(MetricsError::Parse {
                path: name,
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
        None => return Err(MetricsError::Empty(name)),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let err = |message: String| MetricsError::Parse {
            path: name.clone(),
            line: idx + 1,
            message,
        };
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        }
        records.push(EpisodeRecord {
            episode: fields[0].parse().map_err(|_| err("bad episode".into()))?,
            cum_reward: fields[1].parse().map_err(|_| err("bad cum_reward".into()))?,
            steps: fields[2].parse().map_err(|_| err("bad steps".into()))?,
            arrivals: fields[3].parse().map_err(|_| err("bad arrivals".into()))?,
            event: parse_event(fields[4]).ok_or_else(|| err("bad event".into()))?,
            wall_ms: fields[5].parse().map_err(|_| err("bad wall_ms".into()))?,
        });
    }
    if records.is_empty() {
        return Err(MetricsError::Empty(name));
    }
    Ok(records)
}

/// Aggregates over a set of episodes, in the layout of the comparison
/// tables: average cumulative reward, episode count, success percentage
/// and average steps per episode. `episodes_per_10k_steps` is the
/// alternative episode-count reading (episodes completed per fixed step
/// budget).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunReport {
    pub avg_reward: f64,
    pub episodes: usize,
    pub success_pct: f64,
    pub avg_steps: f64,
    pub episodes_per_10k_steps: f64,
}

pub fn aggregate(records: &[EpisodeRecord]) -> RunReport {
    assert!(!records.is_empty(), "cannot aggregate zero episodes");
    let n = records.len() as f64;
    let total_steps: u64 = records.iter().map(|r| r.steps as u64).sum();
    let successes = records.iter().filter(|r| r.success()).count();
    RunReport {
        avg_reward: records.iter().map(|r| r.cum_reward).sum::<f64>() / n,
        episodes: records.len(),
        success_pct: 100.0 * successes as f64 / n,
        avg_steps: total_steps as f64 / n,
        episodes_per_10k_steps: if total_steps == 0 {
            0.0
        } else {
            n * 10_000.0 / total_steps as f64
        },
    }
}

/// Render run reports as a markdown table sorted by success percentage
/// (descending; label breaks ties for a stable order).
pub fn compare_table(mut rows: Vec<(String, RunReport)>) -> String {
    rows.sort_by(|a, b| {
        b.1.success_pct
            .partial_cmp(&a.1.success_pct)
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut out = String::new();
    out.push_str("| Run | Avg. Reward | Episodes | Success % | Avg. Steps/Ep |\n");
    out.push_str("|---|---|---|---|---|\n");
    for (label, r) in rows {
        out.push_str(&format!(
            "| {} | {:.2} | {} | {:.2} | {:.2} |\n",
            label, r.avg_reward, r.episodes, r.success_pct, r.avg_steps
        ));
    }
    out
}
