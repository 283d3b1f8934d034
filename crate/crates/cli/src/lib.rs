//! Commands behind the `ctoq` binary.

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use ctoq::haarhp::{
    derived_quantities, epsilon_range, haar_mean_monte_carlo, haar_mean_pairwise_overlap, run_experiment, summarize,
    theorem3_bound, HpConfig, MonteCarlo, TrialOutcome, TrialResult,
};
use ctoq::suites::{run_suite, SuiteReport, SUITES};
use ctoq::Tolerances;

use config::{resolve_seed, RunConfig};

/// Per-trial bound violations below this count as failures.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "ctoq", version, about = "Verification suites and scrambling experiments for C-to-Q decoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a randomized property suite.
    Verify {
        /// One of thm1, cor1, eq78, appx_a, prop2, appx_b, eq18, ghz.
        suite: String,
        /// Instances (per dimension for thm1 and cor1).
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Hayden-Preskill trials for every configured radiation size.
    HpRun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write trials.csv.
        #[arg(long)]
        csv: bool,
        /// Ignore the qubit cap.
        #[arg(long)]
        allow_large: bool,
        /// Record wall-clock time in the manifest (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Compare the Haar-averaged pairwise overlap with its closed form.
    HaarMean {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_large: bool,
    },
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    let pool = b.build().context("building thread pool")?;
    Ok(pool.install(f))
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Verify { suite, instances, seed, threads, out } => {
            let seed = resolve_seed(seed, None)?;
            let report = with_threads(threads, || verify(&suite, instances, seed))??;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            eprintln!("{}", verify_line(&report));
            Ok(Outcome::from_ok(report.passed()))
        }
        Command::HpRun { config, out, seed, threads, csv, allow_large, timing } => {
            let cfg = RunConfig::load(&config)?;
            let opts = HpRunOptions { seed, csv, allow_large, timing };
            with_threads(threads, || hp_run(&cfg, &out, &opts))?
        }
        Command::HaarMean { config, samples, seed, threads, out, allow_large } => {
            let cfg = RunConfig::load(&config)?;
            let rows = with_threads(threads, || haar_mean(&cfg, samples, seed, allow_large))??;
            let mut text = String::new();
            for r in &rows {
                text += &serde_json::to_string(r)?;
                text.push('\n');
            }
            match out {
                Some(p) => fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            for r in &rows {
                eprintln!(
                    "ell={} closed_form={:.6} mc_mean={:.6} se={:.2e} z={:.2}",
                    r.ell, r.closed_form, r.monte_carlo.mean, r.monte_carlo.std_err, r.z_score
                );
            }
            Ok(Outcome::from_ok(rows.iter().all(|r| r.z_score.abs() <= 3.0)))
        }
    }
}

pub fn verify(suite: &str, instances: usize, seed: u64) -> Result<SuiteReport> {
    if !SUITES.contains(&suite) {
        anyhow::bail!("unknown suite '{suite}' (expected one of {})", SUITES.join(", "));
    }
    Ok(run_suite(suite, instances, seed, &Tolerances::default())?)
}

fn verify_line(r: &SuiteReport) -> String {
    let worst = r.checks.iter().map(|c| c.worst_slack).fold(f64::INFINITY, f64::min);
    format!(
        "{} {}: {} instances, {} skipped, {} violations, worst slack {:.3e}",
        if r.passed() { "PASS" } else { "FAIL" },
        r.suite,
        r.instances,
        r.skipped,
        r.violations(),
        worst
    )
}

#[derive(Clone, Debug, Default)]
pub struct HpRunOptions {
    pub seed: Option<u64>,
    pub csv: bool,
    pub allow_large: bool,
    pub timing: bool,
}

#[derive(Serialize)]
struct TrialRow<'a> {
    kind: &'static str,
    seed: u64,
    ell: usize,
    trial: usize,
    seed_stream: u64,
    delta_cl_x: f64,
    delta_cl_z: f64,
    delta_q: f64,
    lambda_min: f64,
    bounds: Value,
    flags: Value,
    detail: &'a TrialResult,
}

fn trial_row(seed: u64, r: &TrialResult) -> TrialRow<'_> {
    TrialRow {
        kind: "trial",
        seed,
        ell: r.ell,
        trial: r.trial,
        seed_stream: r.seed_stream,
        delta_cl_x: r.delta_cl_x,
        delta_cl_z: r.delta_cl_z,
        delta_q: r.delta_q_ctoq,
        lambda_min: r.lambda_w_min,
        bounds: json!({
            "prop2_x": r.x.prop2.sum_form,
            "prop2_z": r.z.prop2.sum_form,
            "appx_b_x": r.x.appx_b,
            "appx_b_z": r.z.appx_b,
            "cor1": r.cor1_bound,
        }),
        flags: json!({
            "prop2_vacuous_x": r.x.prop2.vacuous,
            "prop2_vacuous_z": r.z.prop2.vacuous,
            "ill_conditioned_x": r.x.prop2.ill_conditioned,
            "ill_conditioned_z": r.z.prop2.ill_conditioned,
        }),
        detail: r,
    }
}

/// Bound slacks of one trial: Prop. 2 and Appendix B in both bases, and Corollary 1.
pub fn trial_slacks(r: &TrialResult) -> [f64; 5] {
    [
        r.x.prop2.sum_form - r.x.delta_cl,
        r.z.prop2.sum_form - r.z.delta_cl,
        r.x.appx_b - r.x.delta_cl,
        r.z.appx_b - r.z.delta_cl,
        r.cor1_bound - r.delta_q_ctoq,
    ]
}

fn default_epsilon(cfg: &HpConfig) -> Option<f64> {
    let (lo, hi) = epsilon_range(&derived_quantities(cfg, &Tolerances::default()));
    (lo < hi).then(|| 0.5 * (lo + hi))
}

fn summary_row(cfg: &HpConfig, seed: u64, eps: Option<f64>, outcomes: &[TrialOutcome]) -> Value {
    let tol = Tolerances::default();
    let s = summarize(cfg, outcomes);
    let eps = eps.or_else(|| default_epsilon(cfg));
    let t3 = eps.and_then(|e| theorem3_bound(cfg, e, &tol).ok());
    let violations = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok())
        .filter(|r| trial_slacks(r).iter().any(|&x| !(x >= -BOUND_TOL)))
        .count();
    json!({
        "kind": "summary",
        "seed": seed,
        "ell": s.ell,
        "trials_ok": s.trials_ok,
        "trials_failed": s.trials_failed,
        "bound_violations": violations,
        "delta_cl_x": s.delta_cl_x,
        "delta_cl_z": s.delta_cl_z,
        "delta_q": s.delta_q,
        "pairwise_overlap": s.pairwise_overlap,
        "closed_form": s.closed_form,
        "z_score": s.z_score,
        "worst_prop2_slack": s.worst_prop2_slack,
        "worst_appx_b_slack": s.worst_appx_b_slack,
        "worst_cor1_slack": s.worst_cor1_slack,
        "ill_conditioned_trials": s.ill_conditioned_trials,
        "derived": derived_quantities(cfg, &tol),
        "epsilon": eps,
        "theorem3": t3,
    })
}

/// Runs every radiation size and writes results.jsonl, manifest.json and
/// optionally trials.csv into `out`.
pub fn hp_run(cfg: &RunConfig, out: &Path, opts: &HpRunOptions) -> Result<Outcome> {
    let start = Instant::now();
    let seed = resolve_seed(opts.seed, cfg.seed)?;
    let hps = cfg.hp_configs(seed, opts.allow_large)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let tol = Tolerances::default();
    let mut jsonl = BufWriter::new(File::create(out.join("results.jsonl"))?);
    let mut csv_w = if opts.csv { Some(csv::Writer::from_path(out.join("trials.csv"))?) } else { None };
    if let Some(w) = csv_w.as_mut() {
        w.write_record([
            "ell", "trial", "seed_stream", "delta_cl_x", "delta_cl_z", "delta_q", "lambda_min", "prop2_x", "prop2_z",
            "cor1_bound", "pairwise_overlap_z", "min_eig_s_in",
        ])?;
    }
    let mut summaries = Vec::new();
    let mut ok = true;
    for hp in &hps {
        let outcomes = run_experiment(hp, &tol)?;
        for o in &outcomes {
            match &o.result {
                Ok(r) => {
                    serde_json::to_writer(&mut jsonl, &trial_row(seed, r))?;
                    if let Some(w) = csv_w.as_mut() {
                        w.write_record(&[
                            r.ell.to_string(),
                            r.trial.to_string(),
                            r.seed_stream.to_string(),
                            r.delta_cl_x.to_string(),
                            r.delta_cl_z.to_string(),
                            r.delta_q_ctoq.to_string(),
                            r.lambda_w_min.to_string(),
                            r.x.prop2.sum_form.to_string(),
                            r.z.prop2.sum_form.to_string(),
                            r.cor1_bound.to_string(),
                            r.pairwise_overlap_z.to_string(),
                            r.min_eig_s_in.to_string(),
                        ])?;
                    }
                }
                Err(e) => serde_json::to_writer(
                    &mut jsonl,
                    &json!({"kind": "trial_error", "seed": seed, "ell": hp.n_qubits_rad, "trial": o.trial, "seed_stream": o.seed_stream, "error": e}),
                )?,
            }
            jsonl.write_all(b"\n")?;
        }
        let row = summary_row(hp, seed, cfg.epsilon, &outcomes);
        ok &= row["bound_violations"] == 0 && row["trials_failed"] == 0;
        serde_json::to_writer(&mut jsonl, &row)?;
        jsonl.write_all(b"\n")?;
        summaries.push(json!({
            "ell": hp.n_qubits_rad,
            "trials_ok": row["trials_ok"],
            "bound_violations": row["bound_violations"],
        }));
    }
    jsonl.flush()?;
    if let Some(mut w) = csv_w {
        w.flush()?;
    }
    let mut manifest = json!({
        "command": "hp-run",
        "version": ctoq::VERSION,
        "seed": seed,
        "config": cfg,
        "runs": summaries,
        "passed": ok,
    });
    if opts.timing {
        manifest["wall_clock_secs"] = json!(start.elapsed().as_secs_f64());
    }
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(Outcome::from_ok(ok))
}

#[derive(Clone, Debug, Serialize)]
pub struct HaarMeanRow {
    pub kind: &'static str,
    pub seed: u64,
    pub n_qubits_bh: usize,
    pub n_qubits_msg: usize,
    pub ell: usize,
    pub xi: String,
    pub closed_form: f64,
    pub monte_carlo: MonteCarlo,
    pub z_score: f64,
}

pub fn haar_mean(cfg: &RunConfig, samples: usize, seed: Option<u64>, allow_large: bool) -> Result<Vec<HaarMeanRow>> {
    if samples == 0 {
        anyhow::bail!("samples must be positive");
    }
    let seed = resolve_seed(seed, cfg.seed)?;
    let tol = Tolerances::default();
    cfg.hp_configs(seed, allow_large)?
        .iter()
        .map(|hp| {
            let closed = haar_mean_pairwise_overlap(hp);
            let mc = haar_mean_monte_carlo(hp, samples, seed, &tol)?;
            Ok(HaarMeanRow {
                kind: "haar_mean",
                seed,
                n_qubits_bh: hp.n_qubits_bh,
                n_qubits_msg: hp.n_qubits_msg,
                ell: hp.n_qubits_rad,
                xi: cfg.xi.label(),
                closed_form: closed,
                monte_carlo: mc,
                z_score: mc.z_score(closed),
            })
        })
        .collect()
}
