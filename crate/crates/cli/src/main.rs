use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qakit_cli::scenario::{Tolerances, WeightSpec, DEFAULT_ELLS, DEFAULT_M_MAX, DEFAULT_P_MAX};
use qakit_cli::{parse_scenario, resolve_out_dir, run_scenario, write_report, Report, Scenario, ScenarioKind};

#[derive(Parser)]
#[command(name = "qakit", version, about = "Quasiasymptotic experiments from scenario files")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output directory (overrides QAKIT_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-item pass tolerance, replacing the scenario's `tolerances.pass`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for ladder points; 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact combinatorial identities.
    Comb {
        #[command(subcommand)]
        action: CombAction,
    },
    /// Weight sequence conditions and tail estimates.
    Weights {
        #[command(subcommand)]
        action: WeightsAction,
    },
    /// Quasiasymptotic checks driven by a scenario file.
    Qa {
        #[command(subcommand)]
        action: QaAction,
    },
    /// Runs scenario files of any kind, in order.
    Run { scenarios: Vec<PathBuf> },
}

#[derive(Subcommand)]
enum CombAction {
    Verify {
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        m_max: usize,
    },
}

#[derive(Subcommand)]
enum WeightsAction {
    Verify {
        /// Gevrey orders; repeat for several.
        #[arg(long = "gevrey", default_values_t = [1.5, 2.0, 3.0])]
        gevrey: Vec<f64>,
        #[arg(long = "ell", default_values_t = DEFAULT_ELLS)]
        ell: Vec<f64>,
        #[arg(long, default_value_t = qakit_cli::run::DEFAULT_TAIL_P_MAX)]
        p_max: usize,
    },
}

#[derive(Subcommand)]
enum QaAction {
    Limit { scenario: PathBuf },
    Negint { scenario: PathBuf },
    Extend { scenario: PathBuf },
    Zlocal { scenario: PathBuf },
}

fn builtin(name: String, kind: ScenarioKind) -> Scenario {
    Scenario {
        name,
        kind,
        locus: None,
        svf: None,
        alpha: None,
        method: None,
        tolerances: Tolerances::default(),
        m_max: None,
        ells: None,
        p_max: None,
        c0_plus: None,
        c0_minus: None,
        c: None,
        n_cap: None,
        weight: None,
        ladder: None,
        extension: None,
        terms: Vec::new(),
        points: Vec::new(),
        test_functions: Vec::new(),
        limit: None,
    }
}

fn load(path: &Path, expected: Option<ScenarioKind>) -> Result<Scenario> {
    let s = parse_scenario(path)?;
    if let Some(kind) = expected {
        if s.kind != kind {
            bail!(
                "{}: scenario kind is `{}`, this command runs `{}`",
                path.display(),
                s.kind.name(),
                kind.name()
            );
        }
    }
    Ok(s)
}

fn scenarios(cmd: Command) -> Result<Vec<Scenario>> {
    Ok(match cmd {
        Command::Comb {
            action: CombAction::Verify { m_max },
        } => {
            let mut s = builtin("comb-verify".into(), ScenarioKind::CombVerify);
            s.m_max = Some(m_max);
            vec![s]
        }
        Command::Weights {
            action: WeightsAction::Verify { gevrey, ell, p_max },
        } => gevrey
            .into_iter()
            .map(|g| {
                let mut s = builtin(
                    format!("weights-gevrey-{g}").replace('.', "_"),
                    ScenarioKind::WeightsVerify,
                );
                s.weight = Some(WeightSpec {
                    gevrey: g,
                    p_max: DEFAULT_P_MAX.max(p_max),
                });
                s.ells = Some(ell.clone());
                s.p_max = Some(p_max);
                s.tolerances.quad = 1e-12;
                s
            })
            .collect(),
        Command::Qa { action } => {
            let (path, kind) = match action {
                QaAction::Limit { scenario } => (scenario, ScenarioKind::QuasiLimit),
                QaAction::Negint { scenario } => (scenario, ScenarioKind::NegintExpansion),
                QaAction::Extend { scenario } => (scenario, ScenarioKind::Extension),
                QaAction::Zlocal { scenario } => (scenario, ScenarioKind::Zlocality),
            };
            vec![load(&path, Some(kind))?]
        }
        Command::Run { scenarios } => {
            if scenarios.is_empty() {
                bail!("`run` needs at least one scenario file");
            }
            scenarios.iter().map(|p| load(p, None)).collect::<Result<_>>()?
        }
    })
}

fn summarize(report: &Report) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {} ({}, {:.2}s)",
        report.scenario.name,
        report.scenario.kind.name(),
        report.wall_clock_s
    );
    for item in &report.items {
        let mark = if item.pass { "ok  " } else { "FAIL" };
        match &item.error {
            Some(e) => println!("  {mark} {}: {e}", item.label),
            None => println!("  {mark} {}", item.label),
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(tol) = cli.global.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("--tol must be positive and finite, got {tol}");
        }
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs)
        .build_global()
        .context("configuring the worker pool")?;
    let out = resolve_out_dir(cli.global.out);
    // every scenario is parsed and validated before anything runs
    let mut all = scenarios(cli.command)?;
    if let Some(tol) = cli.global.tol {
        for s in &mut all {
            s.tolerances.pass = tol;
        }
    }
    let mut pass = true;
    for s in &all {
        let report = run_scenario(s);
        summarize(&report);
        let written = write_report(&report, &out)?;
        println!("  wrote {} file(s) to {}", written.len(), out.display());
        pass &= report.pass;
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
