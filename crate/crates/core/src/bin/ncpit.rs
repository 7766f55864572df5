use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncpit::cli::{self, CheckOptions, CliError, Mode};
use ncpit::field::PrimeField;
use ncpit::gen::{GenClass, GenConfig};
use ncpit::oracle::{Budget, DEFAULT_MAX_DEGREE, DEFAULT_MAX_TERMS};

#[derive(Parser)]
#[command(name = "ncpit", version, about = "Identity testing for noncommutative arithmetic circuits")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a circuit computes the zero polynomial; prints a JSON verdict.
    Check {
        file: String,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// Work over F_p instead of the field named in the file.
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Target error probability for the randomized tests.
        #[arg(long)]
        error: Option<f64>,
        #[arg(long, default_value_t = 4)]
        c_const: u64,
        /// Term budget for full expansion.
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        max_expand: usize,
    },
    /// Report which circuit classes the file belongs to.
    Classify {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Expand into monomials, one `coeff: word` line each.
    Expand {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        max_terms: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: u64,
    },
    /// Write a random circuit to stdout (or --out, with a .truth.json sidecar).
    Gen {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        fan_in: usize,
        #[arg(long, default_value_t = 101)]
        prime: u64,
        #[arg(long)]
        force_zero: bool,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ClassArg {
    Sps,
    PlusRegular,
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Check { file, mode, prime, seed, trials, error, c_const, max_expand } => {
            let opts = CheckOptions {
                mode,
                prime,
                seed,
                trials,
                error,
                c_const,
                max_expand,
                ..CheckOptions::default()
            };
            let verdict = cli::check(&cli::read_file(&file)?, &opts)?;
            println!("{}", verdict.to_json());
        }
        Command::Classify { file, prime, json } => {
            let report = cli::classify(&cli::read_file(&file)?, prime)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                println!("{}", report.summary());
            }
        }
        Command::Expand { file, prime, max_terms, max_degree } => {
            let budget = Budget { max_terms, max_degree };
            print!("{}", cli::expand_dump(&cli::read_file(&file)?, prime, budget)?);
        }
        Command::Gen { class, seed, n, layers, degree, fan_in, prime, force_zero, out } => {
            let class = match class {
                ClassArg::Sps => GenClass::Sps,
                ClassArg::PlusRegular => GenClass::PlusRegular,
            };
            let mut cfg = GenConfig::new(class, PrimeField::new(prime)?, seed);
            cfg.n = n;
            cfg.layers = layers;
            cfg.degree = degree;
            cfg.fan_in = fan_in;
            cfg.force_zero = force_zero;
            let (text, sidecar) = cli::gen(&cfg);
            match out {
                Some(path) => {
                    let write = |p: &str, s: &str| {
                        std::fs::write(p, s).map_err(|e| CliError::Io {
                            path: p.to_string(),
                            message: e.to_string(),
                        })
                    };
                    write(&path, &text)?;
                    let stem = path.strip_suffix(".ncc").unwrap_or(&path);
                    write(&format!("{stem}.truth.json"), &sidecar)?;
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncpit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
