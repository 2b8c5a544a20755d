//! The batch commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::{BenchReport, Machine, MethodHistograms, NeuronKs, Seeds, SimReport, Timings, REPORT_VERSION};
use super::CliError;
use crate::fpt::{dip_fpt_mc, FptTable};
use crate::mc::{euler_run, histogram, McConfig, Scheme};
use crate::models::{parse_network, NetworkSpec};
use crate::rng::{derive_seed, stream_rng};
use crate::sim::network::Dynamics;
use crate::sim::{simulate_ensemble, Ensemble, Network};
use crate::stats::ks_statistic;

const EULER_LABEL: u64 = 1;
const GOBET_LABEL: u64 = 2;
const TABLE_LABEL: u64 = 3;

/// Reads and validates a spec, optionally overriding its horizon.
pub fn load_spec(path: &Path, horizon: Option<f64>) -> Result<NetworkSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut spec = parse_network(&text)?;
    if let Some(h) = horizon {
        spec.horizon = h;
        spec.validate()?;
    }
    Ok(spec)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn check_runs(runs: usize) -> Result<(), CliError> {
    if runs == 0 {
        return Err(CliError::InvalidArgument("--runs must be >= 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub spec: PathBuf,
    pub seed: u64,
    pub runs: usize,
    pub out: PathBuf,
    pub horizon: Option<f64>,
    pub bin_width: f64,
}

/// Spike statistics of one neuron over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronSummary {
    pub neuron: usize,
    pub spikes: usize,
    pub spikes_per_run: f64,
    pub isi_count: usize,
    pub isi_mean: Option<f64>,
    pub isi_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub format_version: u32,
    pub spec_digest: String,
    pub seed: u64,
    pub runs: usize,
    pub horizon: f64,
    pub neurons: Vec<NeuronSummary>,
}

fn summarize(ensemble: &Ensemble) -> Vec<NeuronSummary> {
    let n = ensemble.neurons();
    let (mut sum, mut sum2, mut count) = (vec![0.0; n], vec![0.0; n], vec![0usize; n]);
    let mut last = vec![f64::NAN; n];
    for k in 0..ensemble.runs() {
        last.fill(f64::NAN);
        for (t, j) in ensemble.spikes(k) {
            if last[j].is_finite() {
                let d = t - last[j];
                sum[j] += d;
                sum2[j] += d * d;
                count[j] += 1;
            }
            last[j] = t;
        }
    }
    let spikes = ensemble.spike_counts();
    (0..n)
        .map(|j| {
            let c = count[j] as f64;
            let mean = (count[j] > 0).then(|| sum[j] / c);
            let sd = (count[j] > 1).then(|| ((sum2[j] - sum[j] * sum[j] / c) / (c - 1.0)).max(0.0).sqrt());
            NeuronSummary {
                neuron: j,
                spikes: spikes[j],
                spikes_per_run: spikes[j] as f64 / ensemble.runs() as f64,
                isi_count: count[j],
                isi_mean: mean,
                isi_sd: sd,
            }
        })
        .collect()
}

/// Event-based ensemble written to `out`: `spikes.csv` (`run,time,neuron_id`),
/// `histogram.csv` over `[0, horizon]` and `summary.json`.
pub fn cmd_simulate(opts: &SimulateOptions) -> Result<SimulateSummary, CliError> {
    check_runs(opts.runs)?;
    let spec = load_spec(&opts.spec, opts.horizon)?;
    let net = Network::compile(&spec)?;
    let ensemble = simulate_ensemble(&net, opts.seed, opts.runs, spec.horizon)?;
    prepare_dir(&opts.out)?;
    let mut csv = String::from("run,time,neuron_id\n");
    for k in 0..ensemble.runs() {
        for (t, j) in ensemble.spikes(k) {
            writeln!(csv, "{k},{t},{j}").expect("writing to a String");
        }
    }
    write(&opts.out.join("spikes.csv"), &csv)?;
    if ensemble.total_spikes() > 0 {
        let h = histogram(&ensemble, opts.bin_width, (0.0, spec.horizon))?;
        write(&opts.out.join("histogram.csv"), &h.to_csv())?;
    }
    let summary = SimulateSummary {
        format_version: REPORT_VERSION,
        spec_digest: spec.digest(),
        seed: opts.seed,
        runs: opts.runs,
        horizon: spec.horizon,
        neurons: summarize(&ensemble),
    };
    write(&opts.out.join("summary.json"), &serde_json::to_string_pretty(&summary).expect("summaries serialize"))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub spec: PathBuf,
    pub seed: u64,
    pub runs: usize,
    pub dt: f64,
    pub out: Option<PathBuf>,
    pub horizon: Option<f64>,
    pub bin_width: f64,
}

fn seeds(master: u64) -> Seeds {
    Seeds {
        master,
        event: master,
        euler: derive_seed(master, EULER_LABEL),
        euler_gobet: derive_seed(master, GOBET_LABEL),
    }
}

struct Ensembles {
    event: Ensemble,
    euler: Ensemble,
    gobet: Ensemble,
    timings: Timings,
}

fn timed<T>(f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, f64), CliError> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn run_all(spec: &NetworkSpec, s: Seeds, runs: usize, dt: f64) -> Result<Ensembles, CliError> {
    // Compilation (law tables) counts toward the event-based time.
    let (event, t_event) = timed(|| {
        let net = Network::compile(spec)?;
        Ok(simulate_ensemble(&net, s.event, runs, spec.horizon)?)
    })?;
    let mc = |scheme, seed| McConfig { dt, n_paths: runs, scheme, seed };
    let (euler, t_euler) = timed(|| Ok(euler_run(spec, None, &mc(Scheme::Euler, s.euler))?))?;
    let (gobet, t_gobet) = timed(|| Ok(euler_run(spec, None, &mc(Scheme::EulerGobet, s.euler_gobet))?))?;
    Ok(Ensembles { event, euler, gobet, timings: Timings { event: t_event, euler: t_euler, euler_gobet: t_gobet } })
}

/// KS distance of two pooled spike-time samples; 0 when both are empty and 1
/// when only one is.
fn ks_or_extreme(a: &[f64], b: &[f64]) -> Result<f64, CliError> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(1.0),
        _ => Ok(ks_statistic(a, b)?),
    }
}

fn window_times(e: &Ensemble, j: usize, window: (f64, f64)) -> Vec<f64> {
    e.spike_times(j).into_iter().filter(|&t| t >= window.0 && t <= window.1).collect()
}

fn per_neuron_ks(e: &Ensembles, n: usize, window: (f64, f64)) -> Result<Vec<NeuronKs>, CliError> {
    (0..n)
        .map(|j| {
            let (a, b, c) = (window_times(&e.event, j, window), window_times(&e.euler, j, window), window_times(&e.gobet, j, window));
            Ok(NeuronKs {
                neuron: j,
                event_vs_euler: ks_or_extreme(&a, &b)?,
                event_vs_euler_gobet: ks_or_extreme(&a, &c)?,
                euler_vs_euler_gobet: ks_or_extreme(&b, &c)?,
            })
        })
        .collect()
}

/// Event-based, Euler and EulerGobet ensembles of the same spec, compared by
/// per-neuron KS distance of spike times in `[0, horizon]`. With `out`, the
/// report and per-method histograms are written there.
pub fn cmd_compare(opts: &CompareOptions) -> Result<SimReport, CliError> {
    check_runs(opts.runs)?;
    let spec = load_spec(&opts.spec, opts.horizon)?;
    let s = seeds(opts.seed);
    let e = run_all(&spec, s, opts.runs, opts.dt)?;
    let window = (0.0, spec.horizon);
    let hist = |x: &Ensemble| -> Result<_, CliError> { Ok(histogram(x, opts.bin_width, window)?) };
    let report = SimReport {
        format_version: REPORT_VERSION,
        spec_digest: spec.digest(),
        seeds: s,
        runs: opts.runs,
        dt: opts.dt,
        window,
        bin_width: opts.bin_width,
        histograms: MethodHistograms { event: hist(&e.event)?, euler: hist(&e.euler)?, euler_gobet: hist(&e.gobet)? },
        ks: per_neuron_ks(&e, spec.neurons.len(), window)?,
        timings: e.timings,
        machine: Machine::current(),
    };
    if let Some(dir) = &opts.out {
        prepare_dir(dir)?;
        write(&dir.join("report.json"), &report.to_json())?;
        write(&dir.join("histogram_event.csv"), &report.histograms.event.to_csv())?;
        write(&dir.join("histogram_euler.csv"), &report.histograms.euler.to_csv())?;
        write(&dir.join("histogram_euler_gobet.csv"), &report.histograms.euler_gobet.to_csv())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub spec: PathBuf,
    pub seed: u64,
    pub runs: usize,
    pub dt: f64,
    pub out: Option<PathBuf>,
    pub horizon: Option<f64>,
}

/// Wall-clock time of the three methods at the same number of runs.
pub fn cmd_bench(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    check_runs(opts.runs)?;
    let spec = load_spec(&opts.spec, opts.horizon)?;
    let s = seeds(opts.seed);
    let e = run_all(&spec, s, opts.runs, opts.dt)?;
    let ks = per_neuron_ks(&e, spec.neurons.len(), (0.0, spec.horizon))?;
    let t = e.timings;
    let report = BenchReport {
        format_version: REPORT_VERSION,
        spec_digest: spec.digest(),
        seeds: s,
        runs: opts.runs,
        dt: opts.dt,
        timings: t,
        speedup_vs_euler: t.euler / t.event,
        speedup_vs_euler_gobet: t.euler_gobet / t.event,
        ks_event_vs_euler_gobet: ks.iter().map(|k| k.event_vs_euler_gobet).fold(0.0, f64::max),
        reference_stated_gain: 30.0,
        reference_timing_ratio: 716.68 / 2.46,
        machine: Machine::current(),
    };
    if let Some(dir) = &opts.out {
        prepare_dir(dir)?;
        write(&dir.join("bench.json"), &report.to_json())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FptTableOptions {
    pub spec: PathBuf,
    pub neuron: usize,
    /// Start value; defaults to the neuron's reset value.
    pub start: Option<f64>,
    /// Start current of exponential-synapse models.
    pub current: f64,
    pub horizon: Option<f64>,
    pub dt: f64,
    /// Paths of the Monte-Carlo table of exponential-synapse models.
    pub paths: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Free first-passage law of one neuron from a start value, tabulated on
/// `[0, horizon]` with step `dt` and written as CSV (`t,density,cdf`).
pub fn cmd_fpt_table(opts: &FptTableOptions) -> Result<FptTable, CliError> {
    let spec = load_spec(&opts.spec, opts.horizon)?;
    let n = spec
        .neurons
        .get(opts.neuron)
        .ok_or_else(|| CliError::InvalidArgument(format!("no neuron {}", opts.neuron)))?;
    if !(opts.dt > 0.0 && opts.dt < spec.horizon) {
        return Err(CliError::InvalidArgument(format!("--dt must be in (0, horizon), got {}", opts.dt)));
    }
    let x0 = opts.start.unwrap_or(n.v_reset);
    if !(x0 < n.theta) {
        return Err(CliError::InvalidArgument(format!("start {x0} is not below theta {}", n.theta)));
    }
    let net = Network::compile(&spec)?;
    let table = match &net.neurons[opts.neuron].dynamics {
        Dynamics::Instant { law } => {
            let steps = (spec.horizon / opts.dt).round() as usize;
            let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * spec.horizon / steps as f64).collect();
            let density = grid.iter().map(|&t| if t > 0.0 { law.log_density(x0, 0.0, t).exp() } else { 0.0 }).collect();
            FptTable::from_density(grid, density)?
        }
        Dynamics::ExpSynapse { process } => {
            let mut rng = stream_rng(derive_seed(opts.seed, TABLE_LABEL), 0);
            dip_fpt_mc(&mut rng, process, x0, opts.current, n.theta, opts.dt, spec.horizon, opts.paths)?
        }
    };
    write(&opts.out, &table.to_csv())?;
    Ok(table)
}
