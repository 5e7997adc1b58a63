use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::switching::{EpisodeRecord, TrainOutput};

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, HarnessError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Trailing moving average with window `width`.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let width = width.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= width {
            sum -= values[i - width];
        }
        out.push(sum / (i + 1).min(width) as f64);
    }
    out
}

/// One row of a bound report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub method: &'static str,
    pub k: u64,
    pub state_cell: String,
    pub fsa_state: usize,
    pub lb: f64,
}

pub fn write_bounds_csv(path: &Path, rows: &[BoundRow]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(["method", "k", "state_cell", "fsa_state", "lb"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.k.to_string(),
            r.state_cell.clone(),
            r.fsa_state.to_string(),
            r.lb.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Writes `episodes.csv`, `summary.csv`, `qtable.json` and
/// `switch_stats.json` for one training run.
pub fn write_run(dir: &Path, out: &TrainOutput, window: usize) -> Result<Vec<PathBuf>, HarnessError> {
    let episodes = dir.join("episodes.csv");
    let mut w = csv_writer(&episodes)?;
    w.write_record([
        "episode",
        "mode",
        "p0",
        "satisfied",
        "reward",
        "steps_to_accept",
        "explore_rate",
    ])?;
    for e in &out.episodes {
        w.write_record([
            e.episode.to_string(),
            e.mode.as_str().to_string(),
            e.p0.to_string(),
            u8::from(e.satisfied).to_string(),
            e.reward.to_string(),
            e.steps_to_accept.map_or(String::new(), |t| t.to_string()),
            e.explore_rate.to_string(),
        ])?;
    }
    drop(w);

    let summary = dir.join("summary.csv");
    let (reward, sat) = series(&out.episodes);
    let reward_avg = moving_average(&reward, window);
    let sat_avg = moving_average(&sat, window);
    let mut w = csv_writer(&summary)?;
    w.write_record(["episode", "reward_avg", "satisfaction_avg"])?;
    for i in 0..reward.len() {
        w.write_record([i.to_string(), reward_avg[i].to_string(), sat_avg[i].to_string()])?;
    }
    drop(w);

    let qtable = dir.join("qtable.json");
    write_json(&qtable, &out.qtable)?;
    let stats = dir.join("switch_stats.json");
    write_json(&stats, &out.stats)?;
    Ok(vec![episodes, summary, qtable, stats])
}

pub(crate) fn series(episodes: &[EpisodeRecord]) -> (Vec<f64>, Vec<f64>) {
    (
        episodes.iter().map(|e| e.reward).collect(),
        episodes
            .iter()
            .map(|e| if e.satisfied { 1.0 } else { 0.0 })
            .collect(),
    )
}

/// Per-episode min/mean/max of the moving averages across runs.
pub fn write_curves(path: &Path, runs: &[TrainOutput], window: usize) -> Result<(), HarnessError> {
    let per_run: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = runs
        .iter()
        .map(|r| {
            let (reward, sat) = series(&r.episodes);
            let go: Vec<f64> = r
                .episodes
                .iter()
                .map(|e| if e.mode == crate::switching::Mode::Go { 1.0 } else { 0.0 })
                .collect();
            (
                moving_average(&reward, window),
                moving_average(&sat, window),
                moving_average(&go, window),
            )
        })
        .collect();
    let len = per_run.iter().map(|r| r.0.len()).min().unwrap_or(0);
    let mut w = csv_writer(path)?;
    w.write_record([
        "episode",
        "reward_min",
        "reward_mean",
        "reward_max",
        "sat_min",
        "sat_mean",
        "sat_max",
        "go_fraction",
    ])?;
    let stat = |xs: &mut dyn Iterator<Item = f64>| {
        let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for x in xs {
            lo = lo.min(x);
            hi = hi.max(x);
            sum += x;
            n += 1;
        }
        (lo, sum / n as f64, hi)
    };
    for i in 0..len {
        let (rl, rm, rh) = stat(&mut per_run.iter().map(|r| r.0[i]));
        let (sl, sm, sh) = stat(&mut per_run.iter().map(|r| r.1[i]));
        let (_, gm, _) = stat(&mut per_run.iter().map(|r| r.2[i]));
        w.write_record([
            i.to_string(),
            rl.to_string(),
            rm.to_string(),
            rh.to_string(),
            sl.to_string(),
            sm.to_string(),
            sh.to_string(),
            gm.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Artifacts whose content depends on wall-clock measurements.
pub const TIMING_ARTIFACTS: [&str; 1] = ["timing.csv"];

/// Writes `MANIFEST` listing every artifact under `root` with its hash.
///
/// `failure` names the stage that failed, if any.
pub fn write_manifest(
    root: &Path,
    artifacts: &[PathBuf],
    failure: Option<(&str, &str)>,
) -> Result<PathBuf, HarnessError> {
    let mut rel: Vec<(String, PathBuf)> = artifacts
        .iter()
        .map(|p| {
            let r = p.strip_prefix(root).unwrap_or(p);
            (r.to_string_lossy().replace('\\', "/"), p.clone())
        })
        .collect();
    rel.sort();
    rel.dedup_by(|a, b| a.0 == b.0);
    let mut text = String::new();
    match failure {
        None => text.push_str("status: ok\n"),
        Some((stage, err)) => {
            text.push_str(&format!("status: failed at {stage}: {}\n", err.replace('\n', " ")))
        }
    }
    for (name, path) in rel {
        let hash = sha256_file(&path)?;
        let note = if TIMING_ARTIFACTS.contains(&name.as_str()) {
            "  (wall-clock, not reproducible)"
        } else {
            ""
        };
        text.push_str(&format!("{hash}  {name}{note}\n"));
    }
    let path = root.join("MANIFEST");
    write_text(&path, &text)?;
    Ok(path)
}
