//! `vqebench`: run optimizer benchmark experiments, emit presets, fit
//! scaling laws and query the cost model.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vqebench::costmodel::{
    cost_energy, cost_epoch, cost_fubini, cost_gradient, CostParams, GradientMethod, OptimizerKind,
    Timing,
};
use vqebench::harness::{
    classify, emit, fits_from_csv, preset, run_experiment, Backend, ExperimentSpec, FitFilter,
    OutputFormat, PRESET_NAMES,
};

#[derive(Parser)]
#[command(
    name = "vqebench",
    version,
    about = "Benchmark ADAM, BFGS and natural gradient on VQE problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment spec file.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print a named preset as a spec file, or run it with --run.
    Preset {
        #[arg(value_parser = PRESET_NAMES)]
        name: String,
        /// Execute the preset instead of printing it.
        #[arg(long)]
        run: bool,
        /// Write the spec to this path instead of stdout.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Fit `epochs ≈ a·N^b` to a runs CSV or a (size, mean_epochs) table.
    Fit {
        csv: PathBuf,
        /// Keep every point instead of dropping the epoch jump.
        #[arg(long)]
        no_filter: bool,
        /// Jump threshold relative to the extrapolated fit.
        #[arg(long, default_value_t = 10.0)]
        factor: f64,
    },
    /// Cost-model queries, in units of one energy evaluation.
    Cost(CostArgs),
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<u64>,
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_parser = ["auto", "freefermion", "statevector"])]
    backend: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', value_parser = ["csv", "json", "svg"])]
    format: Option<Vec<String>>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        if let Some(out) = &self.out {
            spec.output.dir = out.clone();
        }
        if let Some(s) = self.seeds {
            spec.seeds = s;
        }
        if let Some(s) = &self.sizes {
            spec.sizes = s.clone();
        }
        if let Some(b) = &self.backend {
            spec.backend = b.parse::<Backend>()?;
        }
        if let Some(w) = self.workers {
            spec.workers = w;
        }
        if let Some(f) = &self.format {
            spec.output.formats = f
                .iter()
                .map(|s| s.parse::<OutputFormat>())
                .collect::<Result<_, _>>()?;
        }
        spec.validate()?;
        Ok(())
    }
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value = "natgrad")]
    optimizer: String,
    #[arg(long, default_value = "analytic")]
    gradient: String,
    /// Number of circuit parameters.
    #[arg(long)]
    params: usize,
    /// Measurement bases of the Hamiltonian.
    #[arg(long, default_value_t = 1.0)]
    bases: f64,
    /// Mean Pauli generators per parameter.
    #[arg(long, default_value_t = 1.0)]
    generators: f64,
    /// Ratio of energy samples to metric samples.
    #[arg(long, default_value_t = 10.0)]
    sample_ratio: f64,
    /// Energy evaluations per BFGS line search.
    #[arg(long, default_value_t = 3.0)]
    line_search_evals: f64,
    #[arg(long)]
    depth: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t_gate: f64,
    #[arg(long, default_value_t = 0.0)]
    t_wrap: f64,
    /// Use `t_x = (d/x) t_gate + t_wrap` instead of equal time scales.
    #[arg(long)]
    depth_scaled: bool,
    /// Charge ADAM and NatGrad one energy evaluation per epoch for monitoring.
    #[arg(long)]
    monitoring: bool,
    /// Multiply the per-epoch cost by this epoch count.
    #[arg(long)]
    epochs: Option<usize>,
}

fn run_spec(spec: &ExperimentSpec) -> Result<()> {
    let records = run_experiment(spec)?;
    let files = emit(spec, &records, &spec.output.dir, &spec.output.formats)?;
    for ratio in classify(&records) {
        println!(
            "N={:<3} {:<18} success {}/{} ({:.2})",
            ratio.size, ratio.optimizer, ratio.successes, ratio.runs, ratio.ratio
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cost(args: &CostArgs) -> Result<()> {
    let optimizer: OptimizerKind = args.optimizer.parse()?;
    let method: GradientMethod = args.gradient.parse()?;
    let mut p = CostParams::defaults(args.params, args.bases);
    p.generators = args.generators;
    p.samples_metric = p.samples_energy / args.sample_ratio;
    p.line_search_evals = args.line_search_evals;
    p.depth = args.depth.unwrap_or(p.depth);
    p.t_gate = args.t_gate;
    p.t_wrap = args.t_wrap;
    p.timing = if args.depth_scaled {
        Timing::DepthScaled
    } else {
        Timing::Equal
    };
    p.monitoring = args.monitoring;
    p.validate()?;
    let unit = p.t_eval();
    let epoch = cost_epoch(&p, optimizer, method) / unit;
    let mut out = serde_json::json!({
        "unit": "t_eval",
        "energy": cost_energy(&p) / unit,
        "gradient": cost_gradient(&p, method) / unit,
        "fubini": cost_fubini(&p) / unit,
        "epoch": epoch,
    });
    if let Some(e) = args.epochs {
        out["runtime"] = serde_json::json!(epoch * e as f64);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, overrides } => {
            let mut s = ExperimentSpec::from_file(&spec)
                .with_context(|| format!("loading {}", spec.display()))?;
            overrides.apply(&mut s)?;
            run_spec(&s)
        }
        Command::Preset {
            name,
            run,
            spec,
            overrides,
        } => {
            let mut s = preset(&name)?;
            overrides.apply(&mut s)?;
            if run {
                if spec.is_some() {
                    bail!("--spec and --run cannot be combined for presets");
                }
                return run_spec(&s);
            }
            let text = s.to_toml_string()?;
            match spec {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Fit {
            csv,
            no_filter,
            factor,
        } => {
            let filter = if no_filter {
                FitFilter::None
            } else {
                FitFilter::Jump { factor }
            };
            let fits = fits_from_csv(&csv, filter)?;
            println!("{}", serde_json::to_string_pretty(&fits)?);
            Ok(())
        }
        Command::Cost(args) => cost(&args),
    }
}
