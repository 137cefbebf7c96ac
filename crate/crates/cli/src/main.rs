use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lace_core::experiment::{
    cmd_compare, cmd_eval_loss, cmd_gradcheck, cmd_inspect_data, cmd_train, report, ExperimentConfig,
};
use lace_core::losses::gradcheck::{run_gradcheck_with, GradcheckConfig, GradcheckReport};
use lace_core::{LossKind, Result};

#[derive(Parser, Debug)]
#[command(name = "lace", version, about = "Cross entropy vs. linearly adaptive cross entropy")]
struct Cli {
    /// JSON experiment config; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// cross_entropy or adaptive.
    #[arg(long, global = true)]
    loss: Option<LossKind>,
    /// Output directory for CSVs and summaries.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one seeded run and write its per-epoch CSV.
    Train(RunArgs),
    /// Paired trials of both losses with a summary table.
    Compare(RunArgs),
    /// Finite-difference check of both loss gradients.
    Gradcheck(GradcheckArgs),
    /// Print both losses, their gradients and k(q_c) for one logit vector.
    EvalLoss(EvalArgs),
    /// Print split sizes and feature statistics of the configured dataset.
    InspectData,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Initial learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Layer widths, input to logits, e.g. 32,64,10.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    no_augment: bool,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,5,100")]
    classes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Add this offset to the first analytic gradient component (self-test
    /// of the checker).
    #[arg(long, hide = true)]
    corrupt: Option<f64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    logits: Vec<f64>,
    #[arg(long)]
    class: usize,
    #[arg(long)]
    json: bool,
}

fn load_config(cli: &Cli, run: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(loss) = cli.loss {
        cfg.loss = loss;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(v) = run.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = run.trials {
        cfg.trials = v;
    }
    if let Some(v) = run.threads {
        cfg.threads = v;
    }
    if let Some(v) = run.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = run.lr {
        cfg.sgd.lr0 = v;
    }
    if let Some(v) = &run.dims {
        cfg.dims = Some(v.clone());
    }
    if run.no_augment {
        cfg.augment = false;
    }
    Ok(cfg)
}

fn print_gradcheck(out: &mut String, reports: &[GradcheckReport]) -> bool {
    let mut ok = true;
    for r in reports {
        for c in &r.checks {
            let _ = writeln!(
                out,
                "{} C={:<4} samples={:<6} {:<14} max_rel={:.3e} max_abs_near_zero={:.3e} failures={}",
                if c.passed() { "ok  " } else { "FAIL" },
                r.classes,
                r.samples,
                c.loss.name(),
                c.max_rel_err,
                c.max_abs_err_near_zero,
                c.failures
            );
            ok &= c.passed();
        }
    }
    ok
}

fn run(cli: &Cli, out: &mut String) -> Result<ExitCode> {
    match &cli.command {
        Command::Train(args) => {
            let cfg = load_config(cli, args)?;
            let (report, path) = cmd_train(&cfg)?;
            if let Some(last) = report.records.last() {
                let _ = writeln!(
                    out,
                    "{} epoch {}: train loss {:.4}, top-1 {:.2}%, top-5 error {:.2}%",
                    report.loss,
                    last.epoch,
                    last.train_loss,
                    100.0 * last.test_top1_acc,
                    100.0 * last.test_top5_err
                );
            }
            let _ = writeln!(out, "wrote {}", path.display());
        }
        Command::Compare(args) => {
            let cfg = load_config(cli, args)?;
            let summary = cmd_compare(&cfg)?;
            out.push_str(&report::format_table(&summary));
            let _ = writeln!(out, "wrote {}", cfg.out.display());
        }
        Command::Gradcheck(args) => {
            let seed = cli.seed.unwrap_or(0);
            let reports = match args.corrupt {
                None => cmd_gradcheck(&args.classes, args.samples, seed)?,
                Some(offset) => args
                    .classes
                    .iter()
                    .map(|&c| {
                        run_gradcheck_with(&GradcheckConfig::new(c, args.samples, seed), |kind, z, class| {
                            let mut out = kind.evaluate(z, class)?;
                            out.grad_logits[0] += offset;
                            Ok(out)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            if !print_gradcheck(out, &reports) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::EvalLoss(args) => {
            let eval = cmd_eval_loss(&args.logits, args.class)?;
            if args.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&eval)?);
            } else {
                let _ = writeln!(out, "{eval}");
            }
        }
        Command::InspectData => {
            let cfg = load_config(cli, &RunArgs::default())?;
            for s in cmd_inspect_data(&cfg.dataset, cfg.seed)? {
                let _ = writeln!(
                    out,
                    "{:<5} n={:<6} classes={:<4} dim={:<5} image={} per-class {}..{} features [{:.3}, {:.3}] mean {:.4}",
                    s.split,
                    s.examples,
                    s.classes,
                    s.dim,
                    s.image,
                    s.min_class_count,
                    s.max_class_count,
                    s.feature_min,
                    s.feature_max,
                    s.feature_mean
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(&cli, &mut out);
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
