use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mf_infer_cli::commands::{analyze, run, sweep, tree};
use mf_infer_cli::{output, RunConfig};

#[derive(Parser)]
#[command(name = "mf-infer", version, about = "Multifidelity likelihood-free importance sampling")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "MF_INFER_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sampler and write its log, summary and schedule.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicated runs over several cost budgets.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated cost budgets.
        #[arg(long)]
        budget_list: String,
        #[arg(long)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Performance estimates from a sample log.
    Analyze {
        log: PathBuf,
        /// Escalation law of the run: poisson, geometric or binomial:MAX.
        #[arg(long, default_value = "poisson")]
        law: String,
        /// ν trace; defaults to nu_trace.csv next to the log when present.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a serialised mean function.
    Tree { file: PathBuf },
}

fn load(config: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    cfg.out = Some(out.clone());
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok((cfg, out))
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main_inner(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Run { config, seed, out } => {
            let (cfg, out) = load(&config, seed, out)?;
            let (result, files) = run::cmd_run(&cfg, &out)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", output::SUMMARY_COLUMNS);
            println!("{}", output::summary_line(&result.rows)?);
            if let Some(star) = &result.nu_star {
                eprintln!("estimated optimal nu: {star:?}");
            }
            eprintln!("wrote {}", files.samples.display());
        }
        Command::Sweep {
            config,
            budget_list,
            replicates,
            seed,
            out,
        } => {
            let (cfg, out) = load(&config, seed, out)?;
            let budgets = sweep::parse_budgets(&budget_list)?;
            let result = sweep::sweep(&cfg, cfg.seed, &budgets, replicates)?;
            sweep::write_sweep(&out, &output::header(&cfg.hash(), cfg.seed), &result)?;
            for (name, fit) in [("mean_mse_hat", result.fit_plugin), ("across_variance", result.fit_across)] {
                if let Some(f) = fit {
                    println!("slope {name} {:.4}", f.slope);
                }
            }
        }
        Command::Analyze { log, law, trace, out } => {
            let rows = analyze::parse_log(&read(&log)?).with_context(|| format!("in {}", log.display()))?;
            let law = analyze::parse_law(&law)?;
            let trace_path = trace.or_else(|| {
                let p = log.with_file_name("nu_trace.csv");
                p.exists().then_some(p)
            });
            let trace = match &trace_path {
                Some(p) => Some(analyze::parse_trace(&read(p)?).with_context(|| format!("in {}", p.display()))?),
                None => None,
            };
            let report = analyze::analyze(&rows, law, trace.as_deref())?.lines().join("\n");
            match out {
                Some(p) => std::fs::write(&p, report + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => println!("{report}"),
            }
        }
        Command::Tree { file } => {
            let text = read(&file)?;
            let rendered = tree::render_tree(&text).with_context(|| format!("in {}", file.display()))?;
            print!("{rendered}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
