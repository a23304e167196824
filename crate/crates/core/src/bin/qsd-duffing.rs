use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsd_duffing::runner::{self, RunConfig};

#[derive(Parser)]
#[command(version, about = "QSD trajectories of the driven double-well Duffing oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trajectories for every configured β.
    Run(Common),
    /// Like `run`, requiring at least two β values.
    Sweep(Common),
    /// Classical reference trajectory and Lyapunov exponents.
    Classical(Common),
    /// Trajectory ensemble against the master equation.
    OracleCheck(Common),
    /// Re-run a manifest and compare checksums.
    Verify {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file applied over the preset (or the defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> qsd_duffing::Result<(RunConfig, PathBuf)> {
        let base = match &self.preset {
            Some(name) => runner::preset(name)?,
            None => RunConfig::default(),
        };
        let mut config = match &self.config {
            Some(path) => runner::parse_config_over(&std::fs::read_to_string(path)?, &base)?,
            None => base,
        };
        if let Some(s) = self.seed {
            config.seeds.base = s;
        }
        if let Some(m) = self.trajectories {
            config.seeds.trajectories = m;
        }
        if let Some(o) = &self.out {
            config.outputs.directory = o.display().to_string();
        }
        config.validate()?;
        let out = runner::output_dir(&config);
        Ok((config, out))
    }
}

fn execute(cmd: Cmd) -> qsd_duffing::Result<bool> {
    match cmd {
        Cmd::Run(c) => {
            let (config, out) = c.load()?;
            let o = runner::run(&config, &out, c.jobs)?;
            print_report(&o);
            Ok(o.failures() == 0)
        }
        Cmd::Sweep(c) => {
            let (config, out) = c.load()?;
            let o = runner::sweep(&config, &out, c.jobs)?;
            print_report(&o);
            Ok(o.failures() == 0)
        }
        Cmd::Classical(c) => {
            let (config, out) = c.load()?;
            let o = runner::run_classical(&config, &out)?;
            println!(
                "lambda_max {:.5}  lambda_min {:.5}  interwell {}  rms {:.4}",
                o.lyapunov.lambda_max,
                o.lyapunov.lambda_min,
                o.events.len(),
                o.section_rms
            );
            Ok(true)
        }
        Cmd::OracleCheck(c) => {
            let (config, out) = c.load()?;
            let o = runner::oracle_check(&config, &out, c.jobs)?;
            println!(
                "{} trajectories, max z {:.3}: {}",
                o.ensemble.count,
                o.max_z,
                if o.pass { "pass" } else { "FAIL" }
            );
            Ok(o.pass && o.manifest.summary.failures == 0)
        }
        Cmd::Verify { manifest, out, jobs } => {
            let checks = runner::verify_manifest(&manifest, &out, jobs)?;
            let bad: Vec<_> = checks.iter().filter(|c| !c.matches()).collect();
            for c in &bad {
                println!("mismatch {}", c.path);
            }
            println!("{} files, {} mismatched", checks.len(), bad.len());
            Ok(bad.is_empty())
        }
    }
}

fn print_report(o: &runner::RunOutcome) {
    for r in &o.report.rows {
        println!(
            "beta {:<6} R {:>8.3}  interwell {:>5}  tunneling {:>5}  rms {:.4}",
            r.beta, r.r, r.interwell_count, r.tunneling_count, r.section_rms
        );
    }
    println!("verdict {}", o.report.verdict);
    for j in o.manifest.jobs.iter().filter(|j| j.cause.is_some()) {
        eprintln!("beta {} traj {} aborted: {}", j.beta, j.trajectory, j.cause.as_deref().unwrap_or(""));
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
