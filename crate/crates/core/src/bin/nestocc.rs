use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nestocc::harness::{self, ExperimentConfig, SweepSection};
use nestocc::predictions::{self, PredictionInput};
use nestocc::spectral::RegimeLabel;
use nestocc::tree::WeightedTree;
use nestocc::Result;

#[derive(Parser)]
#[command(name = "nestocc", version, about = "Nested occupancy schemes in random environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; overrides `[output] path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `run.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the critical constants of the environment.
    Spectral(Common),
    /// Classify a density of balls.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: f64,
    },
    /// Run the experiment and write per-replica rows.
    Simulate(Common),
    /// Evaluate predictions on one tree without throwing balls.
    Predict(Common),
    /// Local limit discrepancies over independent trees.
    VerifyLlt(Common),
    /// Regimes and exponents over a grid of densities.
    Sweep(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.run.master_seed = s;
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| nestocc::Error::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn out_path(common: &Common, cfg: &ExperimentConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.path.clone())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Spectral(common) => {
            let cfg = load(&common)?;
            let profile = cfg.profile()?;
            let c = profile.critical_constants()?;
            let entries = c.entries();
            for (k, v) in &entries {
                writeln!(out, "{k:<14} {v}")?;
            }
            writeln!(out)?;
            for (k, v) in &entries {
                writeln!(out, "{k}={v}")?;
            }
        }
        Command::Classify { common, a } => {
            let cfg = load(&common)?;
            let profile = cfg.profile()?;
            let c = profile.critical_constants()?;
            writeln!(out, "{}", profile.classify_regime(&c, a)?)?;
        }
        Command::Simulate(common) => {
            let cfg = load(&common)?;
            let res = harness::run_experiment(&cfg)?;
            match out_path(&common, &cfg) {
                Some(p) => harness::write_csv(&res, BufWriter::new(File::create(&p)?))?,
                None if common.verbose => {}
                None => harness::write_csv(&res, &mut out)?,
            }
            if common.verbose || out_path(&common, &cfg).is_some() {
                harness::write_summary(&res, &mut out)?;
            }
            for r in res.rows.iter().filter(|r| r.failure.is_some()) {
                eprintln!("replica {} failed: {}", r.replica, r.failure.as_deref().unwrap_or(""));
            }
        }
        Command::Predict(common) => {
            let cfg = load(&common)?;
            cfg.validate()?;
            let env = cfg.env_spec()?;
            let profile = cfg.profile()?;
            let c = profile.critical_constants()?;
            let a = cfg
                .run
                .a
                .ok_or_else(|| nestocc::Error::Config("predict needs run.a".into()))?;
            let regime = match &cfg.run.regime {
                Some(name) => RegimeLabel::from_code(name)
                    .ok_or_else(|| nestocc::Error::Config(format!("unknown regime {name}")))?,
                None => {
                    let cls = profile.classify_regime(&c, a)?;
                    if cls.has(RegimeLabel::Freezing) { RegimeLabel::Freezing } else { cls.labels[0] }
                }
            };
            let depth = cfg.depth()?;
            let tree = WeightedTree::materialize(&env, depth, cfg.run.mass_floor, cfg.run.master_seed)?;
            writeln!(out, "n_or_t,j,b_realized,regime,form,predicted,theta,coefficient,gaussian,w_hat")?;
            for n in cfg.sizes() {
                for (j, b_real) in cfg.levels_for(n)? {
                    let mut input = PredictionInput {
                        a,
                        b: b_real.unwrap_or(cfg.run.b),
                        n,
                        j,
                        k: cfg.run.k,
                        regime,
                        w_hat: Vec::new(),
                        w_approximate: false,
                    };
                    if let Some(theta) = predictions::required_theta(&profile, &input) {
                        let m = tree.martingale(&profile, theta, depth);
                        input.w_hat.push((theta, m.value));
                        input.w_approximate = m.approximate;
                    }
                    let p = predictions::predict(&profile, &c, &input)?;
                    let bd = p.breakdown;
                    writeln!(
                        out,
                        "{n:.16e},{j},{:.16e},{regime},{:?},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        input.b, p.form, p.value, bd.theta, bd.coefficient, bd.gaussian, bd.w_hat
                    )?;
                }
            }
        }
        Command::VerifyLlt(common) => {
            let cfg = load(&common)?;
            let llt = cfg
                .llt
                .clone()
                .ok_or_else(|| nestocc::Error::Config("verify-llt needs an [llt] section".into()))?;
            let profile = cfg.profile()?;
            let c = profile.critical_constants()?;
            let rows = harness::verify_llt(&cfg.env_spec()?, &profile, &c, &llt, cfg.run.master_seed)?;
            writeln!(out, "j,median_sup_discrepancy")?;
            for (j, d) in rows {
                writeln!(out, "{j},{d:.16e}")?;
            }
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let profile = cfg.profile()?;
            let c = profile.critical_constants()?;
            let grid = cfg.sweep.clone().unwrap_or_else(SweepSection::default);
            let rows = harness::sweep(&profile, &c, &grid)?;
            let mut sink: Box<dyn Write> = match out_path(&common, &cfg) {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(out),
            };
            let f = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.16e}"));
            writeln!(sink, "a,regime,theta,alpha,legendre")?;
            for r in rows {
                writeln!(sink, "{:.16e},{},{},{},{}", r.a, r.labels, f(r.theta), f(r.alpha), f(r.legendre))?;
            }
            sink.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
