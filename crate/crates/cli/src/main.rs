//! `recwkb`: batch driver writing JSON summaries and CSV tables.
//!
//! Exit status: 0 all checks pass, 2 usage / unknown preset, 3 spec parse error,
//! 4 a check failed, 5 I/O error, 6 numerical failure.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Parse(String),
    Check(String),
    Io(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Check(_) => 4,
            Failure::Io(_) => 5,
            Failure::Numeric(_) => 6,
        }
    }
}

impl From<recwkb::Error> for Failure {
    fn from(e: recwkb::Error) -> Self {
        match e {
            recwkb::Error::UnknownPreset(_) | recwkb::Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            recwkb::Error::ParseError { .. } => Failure::Parse(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "recwkb", version, about = "Discrete WKB analysis of linear recurrences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Quad,
}

#[derive(Args, Clone, Debug)]
#[group(skip)]
pub struct Source {
    /// Recurrence description file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in problem: euler, bessel, euler_scheme.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override the interval, e.g. `--interval=-0.5,0.5`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub interval: Option<(f64, f64)>,
}

#[derive(Args, Clone, Debug)]
pub struct Output {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for every randomised start vector.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Scalar type; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic-root branches, modulus regions and crossings.
    Roots {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// WKB phases of each branch and their formal residual orders.
    Expand {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long)]
        branch: Option<usize>,
        #[arg(long, value_parser = parse_eps_list, default_value = "1e-2,3e-3,1e-3,3e-4")]
        eps_list: EpsList,
    },
    /// Asymptoticity slopes and fundamental-system fits against exact iteration.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
        /// Inclusive range `a..b` or a single order.
        #[arg(long, value_parser = parse_orders, default_value = "0..3")]
        orders: (usize, usize),
        #[arg(long, value_parser = parse_eps_list, default_value = "1e-2,3e-3,1e-3,3e-4,1e-4")]
        eps_list: EpsList,
        /// Step used for the fundamental-system fit.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Turning-point analysis: Airy scale, interior profile, connection coefficients.
    Turning {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0.60)]
        alpha_int: f64,
        #[arg(long, default_value_t = 0.45)]
        beta_ext: f64,
        /// Interior expansion order.
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Regular expansion of an ODE difference scheme and its convergence order.
    Scheme {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_parser = parse_eps_list, default_value = "1e-2,5e-3,2.5e-3,1.25e-3")]
        eps_list: EpsList,
        /// Cauchy data `y(x0),y'(x0)`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,1")]
        cauchy: (f64, f64),
    },
    /// Worked examples with built-in checks.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Euler,
    Bessel,
    Ode,
}

/// Step sizes sorted in descending order.
#[derive(Clone, Debug)]
pub struct EpsList(pub Vec<f64>);

fn parse_eps_list(s: &str) -> Result<EpsList, String> {
    let mut v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err("step sizes must lie in (0, 1)".into());
    }
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v.dedup();
    Ok(EpsList(v))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    Ok((p(a)?, p(b)?))
}

fn parse_orders(s: &str) -> Result<(usize, usize), String> {
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not an order"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (p(a)?, p(b.trim_start_matches('='))?),
        None => (p(s)?, p(s)?),
    };
    if a > b {
        return Err("empty order range".into());
    }
    if b > recwkb::wkb::MAX_ORDER {
        return Err(format!("orders are capped at {}", recwkb::wkb::MAX_ORDER));
    }
    Ok((a, b))
}

fn run(cli: Cli) -> Result<commands::Summary, Failure> {
    use commands::*;
    match cli.command {
        Command::Roots { source, output, grid } => roots(&source, &output, grid),
        Command::Expand { source, output, order, branch, eps_list } => {
            expand(&source, &output, order, branch, &eps_list.0)
        }
        Command::Validate { source, output, orders, eps_list, eps } => {
            validate(&source, &output, orders, &eps_list.0, eps)
        }
        Command::Turning { source, output, eps, alpha_int, beta_ext, order } => {
            turning(&source, &output, eps, alpha_int, beta_ext, order)
        }
        Command::Scheme { source, output, order, eps_list, cauchy } => {
            scheme(&source, &output, order, &eps_list.0, cauchy)
        }
        Command::Demo { which, output } => demo(which, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            for p in &summary.written {
                println!("wrote {}", p.display());
            }
            for line in &summary.lines {
                println!("{line}");
            }
            match summary.failed_check {
                None => ExitCode::SUCCESS,
                Some(check) => {
                    eprintln!("check failed: {check}");
                    ExitCode::from(Failure::Check(check).code())
                }
            }
        }
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Parse(m) | Failure::Check(m) | Failure::Io(m) | Failure::Numeric(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_lists_are_sorted_descending() {
        let e = parse_eps_list("1e-3, 1e-2,3e-3").unwrap();
        assert_eq!(e.0, vec![1e-2, 3e-3, 1e-3]);
        assert!(parse_eps_list("1e-2,abc").is_err());
        assert!(parse_eps_list("2").is_err());
    }

    #[test]
    fn order_ranges() {
        assert_eq!(parse_orders("0..3").unwrap(), (0, 3));
        assert_eq!(parse_orders("1..=2").unwrap(), (1, 2));
        assert_eq!(parse_orders("2").unwrap(), (2, 2));
        assert!(parse_orders("3..1").is_err());
        assert!(parse_orders("0..99").is_err());
    }

    #[test]
    fn pairs_accept_negative_values() {
        assert_eq!(parse_pair("-0.5,0.5").unwrap(), (-0.5, 0.5));
        assert!(parse_pair("1").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
