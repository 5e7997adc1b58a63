use std::path::Path;
use std::time::{Duration, Instant};

use super::instance::Instance;
use super::report::csv_writer;
use super::HarnessError;

/// Wall-clock cost of both bounds on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub instance: String,
    pub fsa_states: usize,
    pub product_states: usize,
    pub horizon: u64,
    /// Number of `(p, k)` entries a full table covers.
    pub pairs: u64,
    /// `None` when the closed form is unavailable on this instance.
    pub closed_seconds: Option<f64>,
    pub recursive_seconds: f64,
}

const MIN_TOTAL: Duration = Duration::from_millis(30);
const MIN_REPEATS: u32 = 5;
const MAX_REPEATS: u32 = 2000;

/// Fastest of several repetitions, which is the least noisy estimate on a
/// shared machine.
pub fn time_min<T, E>(mut f: impl FnMut() -> Result<T, E>) -> Result<f64, E> {
    let started = Instant::now();
    let mut best = f64::INFINITY;
    let mut reps = 0;
    while reps < MIN_REPEATS || (started.elapsed() < MIN_TOTAL && reps < MAX_REPEATS) {
        let t = Instant::now();
        let out = f()?;
        best = best.min(t.elapsed().as_secs_f64());
        std::hint::black_box(out);
        reps += 1;
    }
    Ok(best)
}

pub fn time_instance(name: &str, inst: &Instance) -> Result<TimingRow, HarnessError> {
    let pm = &inst.product;
    let a = &inst.analysis;
    let closed_seconds = if a.delta_max.assumption_holds() {
        Some(time_min(|| a.closed_form(pm, inst.horizon))?)
    } else {
        None
    };
    let recursive_seconds = time_min(|| a.recursive(pm, inst.horizon))?;
    Ok(TimingRow {
        instance: name.to_string(),
        fsa_states: inst.fsa.num_states(),
        product_states: pm.num_states(),
        horizon: inst.horizon,
        pairs: (inst.horizon + 1) * pm.num_states() as u64,
        closed_seconds,
        recursive_seconds,
    })
}

/// Times every instance of a sweep in order.
pub fn bench_bounds<'a>(
    sweep: impl IntoIterator<Item = (&'a str, &'a Instance)>,
) -> Result<Vec<TimingRow>, HarnessError> {
    sweep
        .into_iter()
        .map(|(name, inst)| time_instance(name, inst))
        .collect()
}

pub fn write_timing_csv(path: &Path, rows: &[TimingRow]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "instance",
        "fsa_states",
        "product_states",
        "horizon",
        "pairs",
        "closed_seconds",
        "recursive_seconds",
    ])?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.fsa_states.to_string(),
            r.product_states.to_string(),
            r.horizon.to_string(),
            r.pairs.to_string(),
            r.closed_seconds.map_or("NA".to_string(), |s| format!("{s:.9}")),
            format!("{:.9}", r.recursive_seconds),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}
