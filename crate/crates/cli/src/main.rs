use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use erosion_core::erosion::{apply_erosion, ErosionMethod, ErosionSpec, TargetSelector};
use erosion_core::harness::{
    detect_dropoff, iq_score, load_dataset, load_sweep, run_sweep, save_sweep, train_inline, write_report,
    IqSectionResult, SweepConfig, TrainFile,
};
use erosion_core::nn::{evaluate, load_model, save_model, Model};

#[derive(Parser)]
#[command(
    name = "neural-erosion",
    version,
    about = "Train, erode and sweep small text classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a baseline model and write a checkpoint.
    Train {
        /// TOML file with `architecture`, `[train]`, `[adam]` and `[data]`.
        #[arg(long)]
        config: PathBuf,
        /// `synthetic`, a Sentiment140 `.csv`, or a dataset cache file.
        #[arg(long)]
        data: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one erosion to a checkpoint.
    Erode {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        method: ErosionMethod,
        #[arg(long, default_value = "all")]
        select: TargetSelector,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a magnitude sweep; writes sweep.json, results.csv and accuracy.svg.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render CSV and SVG from a saved sweep.
    Report {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map verbal and quantitative section scores to an IQ-style number.
    IqScore {
        #[arg(long)]
        verbal: u32,
        #[arg(long)]
        quant: u32,
        /// Section weights as `wv,wq`.
        #[arg(long, value_parser = parse_weights)]
        weights: Option<(f64, f64)>,
        #[arg(long)]
        baseline: Option<f64>,
        #[arg(long)]
        slope: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, data, out } => train(&config, &data, &out),
        Command::Erode {
            ckpt,
            method,
            select,
            sigma,
            fraction,
            seed,
            out,
        } => {
            let spec = ErosionSpec {
                method,
                selector: select,
                sigma,
                fraction,
                seed,
            };
            erode(&ckpt, &spec, &out)
        }
        Command::Sweep { config, out } => {
            let config = SweepConfig::load(&config)?;
            let result = run_sweep(&config)?;
            save_sweep(&result, &out)?;
            let (csv, svg) = write_report(&result, &out)?;
            println!("baseline accuracy {:.4}", result.baseline_accuracy);
            for (m, acc) in result.mean_accuracy() {
                println!("magnitude {m:e}: mean accuracy {acc:.4}");
            }
            match detect_dropoff(&result) {
                Some(m) => println!("dropoff at {m:e}"),
                None => println!("no dropoff within the grid"),
            }
            println!("wrote {} and {}", csv.display(), svg.display());
            Ok(())
        }
        Command::Report { sweep, out } => {
            let result = load_sweep(&sweep)?;
            let (csv, svg) = write_report(&result, &out)?;
            println!("wrote {} and {}", csv.display(), svg.display());
            Ok(())
        }
        Command::IqScore {
            verbal,
            quant,
            weights,
            baseline,
            slope,
        } => {
            let mut r = IqSectionResult::new(verbal, quant);
            if let Some(w) = weights {
                r.weights = w;
            }
            if let Some(b) = baseline {
                r.baseline_iq = b;
            }
            if let Some(s) = slope {
                r.slope = s;
            }
            println!("{}", iq_score(&r)?);
            Ok(())
        }
    }
}

fn train(config: &Path, data: &str, out: &Path) -> Result<()> {
    let file = TrainFile::load(config)?;
    let dataset = file.data.dataset_ref(data);
    let (train_set, val_set) = load_dataset(&dataset).with_context(|| format!("loading data `{data}`"))?;
    let model = train_inline(&file.inline(), train_set.vocab.len(), &train_set.examples, None)?;
    let (acc, _) = evaluate(&model, &val_set.examples)?;
    save_model(&model, out)?;
    println!(
        "trained on {} examples, validation accuracy {acc:.4} on {}",
        train_set.examples.len(),
        val_set.examples.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn erode(ckpt: &Path, spec: &ErosionSpec, out: &Path) -> Result<()> {
    if spec.method == ErosionMethod::NoiseTrain {
        bail!("noise_train perturbs training updates; set `erosion_hook` in the train config instead");
    }
    let model: Model = load_model(ckpt)?;
    let (params, receipt) = apply_erosion(&model.params, spec)?;
    save_model(&model.with_params(params), out)?;
    println!("paths {}", receipt.affected_paths.join(","));
    println!(
        "perturbed {} zeroed {} deactivated {}",
        receipt.scalars_perturbed, receipt.scalars_zeroed, receipt.neurons_deactivated
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn parse_weights(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(',').context("expected `wv,wq`")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}
