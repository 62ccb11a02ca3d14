use clap::{Parser, Subcommand};
use lizorkin::calculus::{faa_terms, MultiIndex};
use lizorkin::experiments::config::parse_number;
use lizorkin::experiments::{init_workers, run_study, Study, StudyConfig, SuiteFunction};
use lizorkin::extension::{extend, extension_covering};
use lizorkin::geometry::{Domain, WhitneyCovering, WhitneyOptions, DEFAULT_CW};
use lizorkin::spaces::{tl_norm, NormSpec, SampledFunction};
use lizorkin::{Error, Result};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

/// Whitney coverings, extension operators and Triebel-Lizorkin norms on
/// sampled domains.
#[derive(Parser)]
#[command(name = "lizorkin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Whitney covering and write it as line-delimited JSON.
    Whitney {
        /// Built-in domain name or signed-distance JSON file.
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = DEFAULT_CW)]
        cw: f64,
        #[arg(long = "max-gen", default_value_t = 7)]
        max_gen: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the Faa di Bruno terms of one derivative of `g o f`.
    Terms {
        /// Multi-index of the derivative, comma separated (its length is d).
        #[arg(long)]
        order: String,
        /// Number of components of the inner map.
        #[arg(long = "D", default_value_t = 1)]
        big_d: usize,
    },
    /// Print the norm of a sampled function and its split as JSON.
    Norm {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value = "1")]
        u: String,
        #[arg(long, default_value = "1")]
        rho: String,
    },
    /// Extend a sampled function across the boundary of its domain.
    Extend {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a suite function on a domain and write it to a file.
    Sample {
        /// Suite function, e.g. `sin`, `power(0.8)`, `critical(1.5)`.
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        domain: String,
        /// Grid spacing, e.g. `1/64`.
        #[arg(long)]
        h: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification study; exit code 0 iff every scored row passes.
    Verify {
        #[arg(long)]
        study: String,
        /// Flat `key = value` configuration (defaults when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report path prefix (overrides `out` in the configuration).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Whitney {
            domain,
            cw,
            max_gen,
            out,
        } => {
            let dom = Domain::resolve(&domain)?;
            let cov = WhitneyCovering::build(
                &dom,
                &WhitneyOptions {
                    cw,
                    max_generation: max_gen,
                    ..Default::default()
                },
            )?;
            cov.write_jsonl(BufWriter::new(File::create(&out)?))?;
            let summary = serde_json::json!({
                "domain": dom.name,
                "hash": cov.hash(),
                "interior_cubes": cov.interior.len(),
                "exterior_cubes": cov.exterior.len(),
                "dropped": cov.dropped,
                "uncovered_interior_volume": cov.uncovered.interior_volume,
                "uncovered_exterior_volume": cov.uncovered.exterior_volume,
                "l0": cov.l0,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Terms { order, big_d } => {
            let entries = order
                .split(',')
                .map(|v| v.trim().parse::<u32>().map_err(|_| Error::InvalidArgument(format!("order {order}"))))
                .collect::<Result<Vec<_>>>()?;
            let d = entries.len();
            let alpha = MultiIndex::new(entries);
            let terms = faa_terms(&alpha, d, big_d)?;
            for t in terms.iter() {
                let inner: Vec<String> = t
                    .inner
                    .iter()
                    .zip(&t.assignment)
                    .map(|(g, mu)| format!("D^{g} f_{mu}"))
                    .collect();
                println!("{} * D^{} g * {}", t.constant, t.outer, inner.join(" * "));
            }
            println!("{} terms", terms.len());
        }
        Command::Norm {
            function,
            s,
            p,
            q,
            u,
            rho,
        } => {
            let f = SampledFunction::load(&function)?;
            let spec = NormSpec::new(s, parse_number(&p)?, parse_number(&q)?, parse_number(&u)?, parse_number(&rho)?);
            let v = tl_norm(&f, &spec)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Command::Extend {
            function,
            k,
            domain,
            out,
        } => {
            let f = SampledFunction::load(&function)?;
            let dom = Domain::resolve(&domain)?;
            let cov = extension_covering(&dom, f.h(), &WhitneyOptions::default())?;
            let ext = extend(&f, k, &cov)?;
            ext.function.save(&out)?;
            println!("{}", serde_json::to_string_pretty(&ext.stats)?);
        }
        Command::Sample {
            function,
            domain,
            h,
            out,
        } => {
            let f = SuiteFunction::parse(&function)?;
            let dom = Domain::resolve(&domain)?;
            let s = SampledFunction::from_scalar(&dom, parse_number(&h)?, |x| f.eval(x))?;
            s.save(&out)?;
        }
        Command::Verify { study, config, out } => {
            let workers = init_workers();
            let study = Study::parse(&study)?;
            let mut cfg = match config {
                Some(path) => StudyConfig::parse_for(&std::fs::read_to_string(path)?, Some(study))?,
                None => StudyConfig::defaults(study),
            };
            if let Some(o) = out {
                cfg.out = Some(o.to_string_lossy().into_owned());
            }
            eprintln!("running {} with {workers} worker(s)", study.name());
            let report = run_study(&cfg)?;
            if let Some(prefix) = &cfg.out {
                for p in report.emit(std::path::Path::new(prefix))? {
                    eprintln!("wrote {}", p.display());
                }
            }
            println!("{}", report.summary());
            return Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
