//! Presets, parallel execution of trajectory sweeps, and checksummed CSV
//! output with an NDJSON manifest.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    default_cutoff, parse_config, parse_config_over, preset, ClassicalSection, DiagnosticsSection,
    InitialSection, IntegratorSection, ModelSection, OutputSection, ProtocolSection, RunConfig,
    SeedSection, PRESETS,
};
pub use output::{
    events_csv, fine_csv, report_csv, section_csv, sha256_hex, spectrum_csv, strobe_csv,
    table_csv, write_file, FileRecord, EVENTS_HEADER, FINE_HEADER, REPORT_HEADER,
    SECTION_HEADER, SPECTRUM_HEADER, STROBE_HEADER,
};

use crate::classical::{integrate, lyapunov, ClassicalState, LyapunovEstimate, Sampling};
use crate::diagnostics::{
    classical_series, detect_crossings, low_freq_rise, periodogram, spline_smooth,
    strobe_section, transition_report, tunneling_events, BetaSummary, EventList,
    TransitionReport,
};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, DEFAULT_COHERENT_TOLERANCE};
use crate::lindblad::{ensemble_reduce, evolve_density, DensityMatrix, EnsembleSummary, OracleSeries};
use crate::model::DuffingModel;
use crate::qsd::{evolve, FineSample, TrajectoryRecord};
use crate::Complex64;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST_FILE: &str = "manifest.ndjson";
pub const REPORT_FILE: &str = "transition_report.csv";
pub const ORACLE_FILE: &str = "oracle_check.csv";
/// Standard errors allowed between ensemble means and the oracle.
pub const ORACLE_Z_LIMIT: f64 = 3.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed of trajectory `trajectory` at β index `beta_index`.
pub fn trajectory_seed(base: u64, beta_index: usize, trajectory: usize) -> u64 {
    splitmix(splitmix(splitmix(base) ^ beta_index as u64) ^ trajectory as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Run,
    Sweep,
    Classical,
    OracleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Ok,
    Aborted,
}

/// Manifest line for one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobEntry {
    pub beta_index: usize,
    pub beta: f64,
    pub trajectory: usize,
    pub seed: u64,
    pub cutoff: usize,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub interwell_count: usize,
    pub tunneling_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_rms: Option<f64>,
    pub frame_moves: usize,
    pub files: Vec<FileRecord>,
    pub wall_seconds: f64,
}

/// Closing manifest line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestSummary {
    pub command: Command,
    pub code_version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub failures: usize,
    pub files: Vec<FileRecord>,
    #[serde(default)]
    pub results: serde_json::Map<String, serde_json::Value>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ManifestLine {
    Job(JobEntry),
    Summary(ManifestSummary),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub jobs: Vec<JobEntry>,
    pub summary: ManifestSummary,
}

impl RunManifest {
    pub fn to_ndjson(&self) -> Result<String> {
        let mut out = String::new();
        for j in &self.jobs {
            out.push_str(&serde_json::to_string(&ManifestLine::Job(j.clone()))?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&ManifestLine::Summary(self.summary.clone()))?);
        out.push('\n');
        Ok(out)
    }

    pub fn from_ndjson(text: &str) -> Result<Self> {
        let mut jobs = Vec::new();
        let mut summary = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str(line)? {
                ManifestLine::Job(j) => jobs.push(j),
                ManifestLine::Summary(s) => summary = Some(s),
            }
        }
        let summary =
            summary.ok_or_else(|| Error::Config("manifest has no summary line".into()))?;
        Ok(Self { jobs, summary })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ndjson(&std::fs::read_to_string(path)?)
    }

    /// Every output file with its checksum, jobs first.
    pub fn all_files(&self) -> Vec<FileRecord> {
        self.jobs
            .iter()
            .flat_map(|j| j.files.iter().cloned())
            .chain(self.summary.files.iter().cloned())
            .collect()
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n.max(1));
    }
    b.build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn beta_dir(beta: f64) -> String {
    format!("beta-{beta}")
}

/// Diagnostics of one trajectory, computed on the post-transient data.
#[derive(Clone, Debug)]
pub struct TrajectoryDiagnostics {
    pub r: Option<f64>,
    pub events: EventList,
    pub section_rms: Option<f64>,
    pub spectrum: Option<crate::diagnostics::PowerSpectrum>,
    pub warnings: Vec<String>,
}

fn post_transient_fine(record: &TrajectoryRecord) -> &[FineSample] {
    let skip = (record.transient_periods * record.fine_samples_per_period).min(record.fine.len());
    &record.fine[skip..]
}

/// Spectrum, `R`, interwell events and section dispersion of a record.
pub fn trajectory_diagnostics(record: &TrajectoryRecord, config: &RunConfig) -> TrajectoryDiagnostics {
    let d = &config.diagnostics;
    let mut warnings = Vec::new();
    let fine = post_transient_fine(record);
    let beta = record.params.beta;
    let events = detect_crossings(fine, beta, d.threshold_fraction);
    let section_rms = match strobe_section(record, record.transient_periods) {
        Ok(s) => Some(s.rms_dispersion()),
        Err(e) => {
            warnings.push(format!("section: {e}"));
            None
        }
    };
    let series: Vec<f64> = fine.iter().map(|s| s.q).collect();
    let spectrum = periodogram(&series, record.fine_interval())
        .and_then(|s| spline_smooth(&s, d.knot_count));
    let (spectrum, r) = match spectrum {
        Ok(s) => {
            let r = match low_freq_rise(&s, record.params.omega, &d.bands()) {
                Ok(r) => Some(r),
                Err(e) => {
                    warnings.push(format!("R: {e}"));
                    None
                }
            };
            (Some(s), r)
        }
        Err(e) => {
            warnings.push(format!("spectrum: {e}"));
            (None, None)
        }
    };
    TrajectoryDiagnostics {
        r,
        events,
        section_rms,
        spectrum,
        warnings,
    }
}

/// Integrates one trajectory of the configured protocol.
pub fn simulate(config: &RunConfig, beta: f64, seed: u64) -> Result<TrajectoryRecord> {
    let params = config.model_params(beta)?;
    let integ = config.integrator_config(beta);
    let model = DuffingModel::new(params, integ.cutoff)?;
    let alpha = Complex64::new(config.initial.alpha_re, config.initial.alpha_im);
    let (psi, _) = coherent_state(alpha, integ.cutoff, DEFAULT_COHERENT_TOLERANCE)?;
    evolve(
        &psi,
        &model,
        &integ,
        config.protocol.periods_total,
        config.protocol.transient_periods,
        seed,
    )
}

fn write_trajectory(
    out: &Path,
    record: &TrajectoryRecord,
    diag: &TrajectoryDiagnostics,
    trajectory: usize,
) -> Result<Vec<FileRecord>> {
    let beta = record.params.beta;
    let dir = format!("{}/traj-{trajectory:04}", beta_dir(beta));
    let rows: Vec<(usize, f64, f64)> = record
        .strobes
        .iter()
        .filter(|s| s.period > record.transient_periods)
        .map(|s| (s.period, s.q, s.p))
        .collect();
    let mut files = vec![
        write_file(out, &format!("{dir}/strobe.csv"), &strobe_csv(&record.strobes, beta)?)?,
        write_file(out, &format!("{dir}/fine.csv"), &fine_csv(&record.fine)?)?,
        write_file(out, &format!("{dir}/section.csv"), &section_csv(&rows, beta)?)?,
        write_file(out, &format!("{dir}/events.csv"), &events_csv(&diag.events)?)?,
    ];
    if let Some(s) = &diag.spectrum {
        files.push(write_file(out, &format!("{dir}/spectrum.csv"), &spectrum_csv(s)?)?);
    }
    Ok(files)
}

struct JobResult {
    entry: JobEntry,
    record: Option<TrajectoryRecord>,
}

fn run_job(
    config: &RunConfig,
    out: Option<&Path>,
    beta_index: usize,
    beta: f64,
    trajectory: usize,
) -> JobResult {
    let start = Instant::now();
    let seed = trajectory_seed(config.seeds.base, beta_index, trajectory);
    let mut entry = JobEntry {
        beta_index,
        beta,
        trajectory,
        seed,
        cutoff: config.cutoff(beta),
        status: JobStatus::Ok,
        cause: None,
        warnings: Vec::new(),
        r: None,
        interwell_count: 0,
        tunneling_count: 0,
        section_rms: None,
        frame_moves: 0,
        files: Vec::new(),
        wall_seconds: 0.0,
    };
    let outcome = simulate(config, beta, seed).and_then(|record| {
        let diag = trajectory_diagnostics(&record, config);
        let files = match out {
            Some(dir) => write_trajectory(dir, &record, &diag, trajectory)?,
            None => Vec::new(),
        };
        Ok((record, diag, files))
    });
    let record = match outcome {
        Ok((record, diag, files)) => {
            entry.r = diag.r;
            entry.interwell_count = diag.events.len();
            entry.tunneling_count = tunneling_events(&diag.events).len();
            entry.section_rms = diag.section_rms;
            entry.warnings = diag.warnings;
            entry.frame_moves = record.frames.len();
            entry.files = files;
            Some(record)
        }
        Err(e) => {
            entry.status = JobStatus::Aborted;
            entry.cause = Some(e.to_string());
            None
        }
    };
    entry.wall_seconds = start.elapsed().as_secs_f64();
    JobResult { entry, record }
}

fn run_jobs(
    config: &RunConfig,
    out: Option<&Path>,
    threads: Option<usize>,
) -> Result<Vec<JobResult>> {
    let jobs: Vec<(usize, f64, usize)> = config
        .betas()
        .into_iter()
        .enumerate()
        .flat_map(|(bi, b)| (0..config.seeds.trajectories).map(move |t| (bi, b, t)))
        .collect();
    let pool = thread_pool(threads)?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(bi, b, t)| run_job(config, out, bi, b, t))
            .collect()
    }))
}

/// Per-β rows averaged over the successful trajectories.
pub fn summarize(jobs: &[JobEntry]) -> Vec<BetaSummary> {
    let mut rows: Vec<BetaSummary> = Vec::new();
    let mut groups: Vec<(usize, f64, Vec<&JobEntry>)> = Vec::new();
    for j in jobs.iter().filter(|j| j.status == JobStatus::Ok) {
        match groups.iter_mut().find(|g| g.0 == j.beta_index) {
            Some(g) => g.2.push(j),
            None => groups.push((j.beta_index, j.beta, vec![j])),
        }
    }
    for (_, beta, js) in groups {
        let rs: Vec<f64> = js.iter().filter_map(|j| j.r).collect();
        let rms: Vec<f64> = js.iter().filter_map(|j| j.section_rms).collect();
        let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        rows.push(BetaSummary {
            beta,
            r: mean(&rs),
            interwell_count: js.iter().map(|j| j.interwell_count).sum(),
            tunneling_count: js.iter().map(|j| j.tunneling_count).sum(),
            section_rms: mean(&rms),
        });
    }
    rows
}

/// Result of `run`/`sweep`.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub report: TransitionReport,
    /// Records in job order; `None` for aborted trajectories.
    pub records: Vec<Option<TrajectoryRecord>>,
}

impl RunOutcome {
    pub fn failures(&self) -> usize {
        self.manifest.summary.failures
    }
}

fn finish_manifest(
    out: &Path,
    command: Command,
    config: &RunConfig,
    jobs: Vec<JobEntry>,
    files: Vec<FileRecord>,
    results: serde_json::Map<String, serde_json::Value>,
    start: Instant,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        summary: ManifestSummary {
            command,
            code_version: CODE_VERSION.to_string(),
            config: config.clone(),
            seeds: jobs.iter().map(|j| j.seed).collect(),
            failures: jobs.iter().filter(|j| j.status == JobStatus::Aborted).count(),
            files,
            results,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
        jobs,
    };
    std::fs::write(out.join(MANIFEST_FILE), manifest.to_ndjson()?)?;
    Ok(manifest)
}

/// Runs every `(β, trajectory)` job of `config`, writes per-trajectory CSVs,
/// the transition report and the manifest into `out`. Aborted trajectories
/// are recorded, not fatal.
pub fn run(config: &RunConfig, out: &Path, threads: Option<usize>) -> Result<RunOutcome> {
    run_command(Command::Run, config, out, threads)
}

/// [`run`] over a β list of at least two values.
pub fn sweep(config: &RunConfig, out: &Path, threads: Option<usize>) -> Result<RunOutcome> {
    if config.betas().len() < 2 {
        return Err(Error::Config("sweep needs at least two β values".into()));
    }
    run_command(Command::Sweep, config, out, threads)
}

fn run_command(
    command: Command,
    config: &RunConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunOutcome> {
    config.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let results = run_jobs(config, Some(out), threads)?;
    let (entries, records): (Vec<_>, Vec<_>) =
        results.into_iter().map(|r| (r.entry, r.record)).unzip();
    let report = transition_report(&summarize(&entries));
    let report_file = write_file(out, REPORT_FILE, &report_csv(&report)?)?;
    let mut extra = serde_json::Map::new();
    extra.insert("verdict".into(), report.verdict.as_str().into());
    let manifest = finish_manifest(out, command, config, entries, vec![report_file], extra, start)?;
    Ok(RunOutcome {
        manifest,
        report,
        records,
    })
}

/// Result of the `classical` subcommand.
#[derive(Clone, Debug)]
pub struct ClassicalOutcome {
    pub manifest: RunManifest,
    pub lyapunov: LyapunovEstimate,
    pub r: Option<f64>,
    pub events: EventList,
    pub section_rms: f64,
}

/// Classical initial condition from the coherent-state label:
/// `(q, p) = √2 (Re α, Im α)`.
pub fn classical_initial(config: &RunConfig) -> ClassicalState {
    let s = std::f64::consts::SQRT_2;
    ClassicalState::new(s * config.initial.alpha_re, s * config.initial.alpha_im)
}

/// Classical trajectory of the configured model (β-independent units):
/// section, events, spectrum and both Lyapunov exponents.
pub fn run_classical(config: &RunConfig, out: &Path) -> Result<ClassicalOutcome> {
    config.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let params = config.model_params(1.0)?;
    let c = &config.classical;
    let p = &config.protocol;
    if c.steps_per_period % p.fine_samples_per_period != 0 {
        return Err(Error::Config(
            "protocol.fine_samples_per_period must divide classical.steps_per_period".into(),
        ));
    }
    let s0 = classical_initial(config);
    let dt = params.period() / c.steps_per_period as f64;
    let traj = integrate(
        s0,
        &params,
        dt,
        p.periods_total as f64 * params.period(),
        Sampling::EveryStep,
    )?;
    let post = &traj.samples[p.transient_periods * c.steps_per_period..];
    let series = classical_series(post);
    let events = detect_crossings(&series, 1.0, config.diagnostics.threshold_fraction);

    let rows: Vec<(usize, f64, f64)> = traj
        .samples
        .iter()
        .enumerate()
        .filter(|(i, _)| i % c.steps_per_period == 0 && *i / c.steps_per_period > p.transient_periods)
        .map(|(i, s)| (i / c.steps_per_period, s.q, s.p))
        .collect();
    let section = crate::diagnostics::PoincareSection::from_points(
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| (r.1, r.2)).collect(),
        1.0,
        params.period(),
    )?;
    let stride = c.steps_per_period / p.fine_samples_per_period;
    let q: Vec<f64> = post.iter().step_by(stride).map(|s| s.q).collect();
    let spectrum = spline_smooth(&periodogram(&q, dt * stride as f64)?, config.diagnostics.knot_count)?;
    let r = low_freq_rise(&spectrum, params.omega, &config.diagnostics.bands()).ok();
    let lyap = lyapunov(&params, s0, &c.lyapunov())?;

    let lyap_csv = table_csv(
        &["lambda_max", "lambda_min", "total_periods", "transient_periods", "steps_per_period"],
        &[vec![
            output::fmt_num(lyap.lambda_max),
            output::fmt_num(lyap.lambda_min),
            c.lyapunov_periods.to_string(),
            c.lyapunov_transient.to_string(),
            c.steps_per_period.to_string(),
        ]],
    )?;
    let files = vec![
        write_file(out, "classical/section.csv", &section_csv(&rows, 1.0)?)?,
        write_file(out, "classical/events.csv", &events_csv(&events)?)?,
        write_file(out, "classical/spectrum.csv", &spectrum_csv(&spectrum)?)?,
        write_file(out, "classical/lyapunov.csv", &lyap_csv)?,
    ];
    let mut extra = serde_json::Map::new();
    extra.insert("lambda_max".into(), lyap.lambda_max.into());
    extra.insert("lambda_min".into(), lyap.lambda_min.into());
    extra.insert("interwell_count".into(), events.len().into());
    extra.insert("below_barrier_count".into(), tunneling_events(&events).len().into());
    if let Some(r) = r {
        extra.insert("R".into(), r.into());
    }
    let manifest = finish_manifest(out, Command::Classical, config, Vec::new(), files, extra, start)?;
    Ok(ClassicalOutcome {
        manifest,
        lyapunov: lyap,
        r,
        events,
        section_rms: section.rms_dispersion(),
    })
}

/// Result of the `oracle-check` subcommand.
#[derive(Clone, Debug)]
pub struct OracleCheckOutcome {
    pub manifest: RunManifest,
    pub ensemble: EnsembleSummary,
    pub oracle: OracleSeries,
    pub max_z: f64,
    pub pass: bool,
}

/// Compares the trajectory ensemble of the first configured β with the
/// master-equation oracle at every drive period.
pub fn oracle_check(config: &RunConfig, out: &Path, threads: Option<usize>) -> Result<OracleCheckOutcome> {
    config.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let beta = config.betas()[0];
    let mut single = config.clone();
    single.model.beta = Some(beta);
    single.model.beta_list = None;
    let results = run_jobs(&single, None, threads)?;
    let (entries, records): (Vec<_>, Vec<_>) =
        results.into_iter().map(|r| (r.entry, r.record)).unzip();
    let records: Vec<TrajectoryRecord> = records.into_iter().flatten().collect();
    if records.is_empty() {
        let cause = entries[0].cause.clone().unwrap_or_default();
        finish_manifest(out, Command::OracleCheck, &single, entries, Vec::new(), Default::default(), start)?;
        return Err(Error::InsufficientData(format!("every trajectory aborted, first cause: {cause}")));
    }

    let params = single.model_params(beta)?;
    let period = params.period();
    let checkpoints: Vec<f64> = (1..=single.protocol.periods_total)
        .map(|k| k as f64 * period)
        .collect();
    let ensemble = ensemble_reduce(&records, &checkpoints)?;

    let integ = single.integrator_config(beta);
    let model = DuffingModel::new(params, integ.cutoff)?;
    let alpha = Complex64::new(single.initial.alpha_re, single.initial.alpha_im);
    let (psi, _) = coherent_state(alpha, integ.cutoff, DEFAULT_COHERENT_TOLERANCE)?;
    let dt = period / integ.steps_per_period as f64;
    let oracle = evolve_density(&DensityMatrix::from_pure(&psi)?, &model, dt, &checkpoints)?;

    let mut rows = Vec::new();
    let mut max_z = 0.0f64;
    for (i, s) in oracle.samples.iter().enumerate() {
        for (name, mean, se, reference) in [
            ("q", ensemble.mean_q[i], ensemble.stderr_q[i], s.q),
            ("p", ensemble.mean_p[i], ensemble.stderr_p[i], s.p),
            ("energy", ensemble.mean_energy[i], ensemble.stderr_energy[i], s.energy),
        ] {
            let z = if mean == reference { 0.0 } else { (mean - reference).abs() / se };
            max_z = max_z.max(z);
            rows.push(vec![
                output::fmt_num(s.t),
                name.to_string(),
                output::fmt_num(mean),
                output::fmt_num(se),
                output::fmt_num(reference),
                output::fmt_num(z),
                (z < ORACLE_Z_LIMIT).to_string(),
            ]);
        }
    }
    let pass = max_z < ORACLE_Z_LIMIT;
    let file = write_file(
        out,
        ORACLE_FILE,
        &table_csv(&["t", "observable", "ensemble_mean", "stderr", "oracle", "z", "pass"], &rows)?,
    )?;
    let mut extra = serde_json::Map::new();
    extra.insert("trajectories".into(), ensemble.count.into());
    extra.insert("max_z".into(), max_z.into());
    extra.insert("pass".into(), pass.into());
    let manifest = finish_manifest(out, Command::OracleCheck, &single, entries, vec![file], extra, start)?;
    Ok(OracleCheckOutcome {
        manifest,
        ensemble,
        oracle,
        max_z,
        pass,
    })
}

/// Outcome of re-running a manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct FileCheck {
    pub path: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl FileCheck {
    pub fn matches(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

/// Re-runs the command recorded in `manifest_path` into `out` and compares
/// every output checksum.
pub fn verify_manifest(manifest_path: &Path, out: &Path, threads: Option<usize>) -> Result<Vec<FileCheck>> {
    let original = RunManifest::load(manifest_path)?;
    let config = &original.summary.config;
    let rerun = match original.summary.command {
        Command::Run => run(config, out, threads)?.manifest,
        Command::Sweep => sweep(config, out, threads)?.manifest,
        Command::Classical => run_classical(config, out)?.manifest,
        Command::OracleCheck => oracle_check(config, out, threads)?.manifest,
    };
    let fresh = rerun.all_files();
    Ok(original
        .all_files()
        .into_iter()
        .map(|f| FileCheck {
            actual: fresh.iter().find(|g| g.path == f.path).map(|g| g.sha256.clone()),
            path: f.path,
            expected: f.sha256,
        })
        .collect())
}

/// Output directory from the config, relative paths kept as given.
pub fn output_dir(config: &RunConfig) -> PathBuf {
    PathBuf::from(&config.outputs.directory)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut seen = std::collections::HashSet::new();
        for b in 0..4 {
            for t in 0..256 {
                assert!(seen.insert(trajectory_seed(1, b, t)));
            }
        }
        assert_eq!(trajectory_seed(1, 2, 3), trajectory_seed(1, 2, 3));
        assert_ne!(trajectory_seed(1, 0, 0), trajectory_seed(2, 0, 0));
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            jobs: vec![JobEntry {
                beta_index: 0,
                beta: 0.3,
                trajectory: 0,
                seed: 42,
                cutoff: 64,
                status: JobStatus::Aborted,
                cause: Some("leakage".into()),
                warnings: vec![],
                r: None,
                interwell_count: 0,
                tunneling_count: 0,
                section_rms: None,
                frame_moves: 3,
                files: vec![],
                wall_seconds: 1.5,
            }],
            summary: ManifestSummary {
                command: Command::Run,
                code_version: CODE_VERSION.into(),
                config: RunConfig::default(),
                seeds: vec![42],
                failures: 1,
                files: vec![FileRecord {
                    path: REPORT_FILE.into(),
                    sha256: "00".into(),
                }],
                results: serde_json::Map::new(),
                wall_seconds: 2.0,
            },
        };
        let text = m.to_ndjson().unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().contains("\"kind\":\"job\""));
        assert_eq!(RunManifest::from_ndjson(&text).unwrap(), m);
    }

    #[test]
    fn summarize_averages_successful_jobs() {
        let job = |bi: usize, beta: f64, r: f64, status: JobStatus| JobEntry {
            beta_index: bi,
            beta,
            trajectory: 0,
            seed: 0,
            cutoff: 8,
            status,
            cause: None,
            warnings: vec![],
            r: Some(r),
            interwell_count: 2,
            tunneling_count: 1,
            section_rms: Some(0.5),
            frame_moves: 0,
            files: vec![],
            wall_seconds: 0.0,
        };
        let rows = summarize(&[
            job(0, 0.1, 1.0, JobStatus::Ok),
            job(0, 0.1, 3.0, JobStatus::Ok),
            job(1, 0.3, 9.0, JobStatus::Aborted),
            job(2, 1.0, 0.5, JobStatus::Ok),
        ]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].r, 2.0);
        assert_eq!(rows[0].interwell_count, 4);
        assert_eq!(rows[1].beta, 1.0);
    }
}
