use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use nbap::experiment::{run_experiment, ExperimentError, ExperimentResult, OutputOptions};
use nbap::field::ingest_field_grid;
use nbap::scenario::{explicit_scenario, load_scenario, preset, preset_names, ScenarioSpec};
use nbap::sim::{compute_metrics, MissionTrace};
use nbap::PlannerKind;

#[derive(Parser)]
#[command(
    name = "nbap",
    version,
    about = "Stochastic task allocation on aisle graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in scenario.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(preset_names()))]
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Turn a sensor grid into a mission scenario file.
    Ingest {
        grid: PathBuf,
        /// Desired reading; cells below it hold tasks.
        #[arg(long)]
        desired: f64,
        /// Comma-separated, strictly increasing shortfall thresholds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        bands: Vec<f64>,
        /// Scenario file to write; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics from a trace file.
    Replay { trace: PathBuf },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Planner(s) to run; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    planner: Vec<PlannerKind>,
    #[arg(long)]
    robots: Option<usize>,
    /// Output directory.
    #[arg(long, env = "NBAP_OUT_DIR", default_value = "results")]
    out: PathBuf,
    /// Also write one trace per run.
    #[arg(long)]
    traces: bool,
}

impl Overrides {
    fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if !self.planner.is_empty() {
            spec.planners = self.planner.clone();
        }
        if let Some(r) = self.robots {
            spec.robots = r;
        }
    }
}

fn report(result: &ExperimentResult, files: &[PathBuf]) {
    for a in &result.aggregates {
        println!(
            "{:<5} trials={} rv={:.4e}±{:.2e} wv={:.4e}±{:.2e} visited={:.1}±{:.1}",
            a.planner.name(),
            a.trials,
            a.rv_mean,
            a.rv_std,
            a.wv_mean,
            a.wv_std,
            a.visited_mean,
            a.visited_std
        );
    }
    for m in &result.marginals {
        println!(
            "mu=({}, {}) range over low-level ratio {:.4}, over high-level ratio {:.4}",
            m.mu_low, m.mu_high, m.range_low, m.range_high
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(mut spec: ScenarioSpec, o: &Overrides) -> anyhow::Result<ExitCode> {
    o.apply(&mut spec);
    match run_experiment(&spec, &o.out, OutputOptions { traces: o.traces }) {
        Ok((result, files)) => {
            report(&result, &files);
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ ExperimentError::Violation { .. }) => {
            eprintln!("invariant violation: {e}");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn replay(path: &Path) -> anyhow::Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let trace = MissionTrace::parse(&text)?;
    let m = compute_metrics(&trace);
    #[derive(serde::Serialize)]
    struct Row<'a> {
        planner: &'a str,
        rv: f64,
        wv: f64,
        visited: usize,
        waste: f64,
        path_length: f64,
        gain: f64,
        completed: usize,
        aborts: usize,
    }
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.serialize(Row {
        planner: &trace.header.planner,
        rv: m.rv_ratio,
        wv: m.wv_ratio,
        visited: m.visited,
        waste: m.total_waste,
        path_length: m.path_length,
        gain: m.gain,
        completed: m.completed,
        aborts: m.aborts,
    })?;
    w.flush()?;
    Ok(())
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            overrides,
        } => run(load_scenario(&scenario)?, &overrides),
        Command::Preset { name, overrides } => run(preset(&name)?, &overrides),
        Command::Ingest {
            grid,
            desired,
            bands,
            out,
        } => {
            let mission = ingest_field_grid(&grid, desired, &bands)?;
            let name = grid
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "field".into());
            let text = explicit_scenario(&name, &mission).to_toml();
            match out {
                Some(path) => {
                    std::fs::write(&path, text)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    eprintln!(
                        "{} tasks written to {}",
                        mission.tasks.len(),
                        path.display()
                    );
                }
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { trace } => replay(&trace).map(|_| ExitCode::SUCCESS),
    }
}
