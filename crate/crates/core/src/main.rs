//! Command-line surface: parse (r, s) expressions, run the pipelines,
//! emit JSON reports or SVG figures.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tropedwards::error::{Error, Result};
use tropedwards::pipeline;
use tropedwards::rational::{rat, Rat};
use tropedwards::report;
use tropedwards::svg;
use tropedwards::DEFAULT_HORIZON;

#[derive(Parser)]
#[command(
    name = "tropedwards",
    about = "Exact tropical geometry of a two-parameter family of plane Edwards curves",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Truncation horizon in q-exponent units (rational, e.g. 24 or 49/2).
    /// Defaults to TROPEDWARDS_HORIZON or 24.
    #[arg(long)]
    horizon: Option<String>,
    /// Force a ramification index on the parsed parameters (default:
    /// inferred from the exponents).
    #[arg(long)]
    ram: Option<i64>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the family coefficients d12..d8, their valuations and delta.
    Family {
        #[arg(allow_hyphen_values = true)]
        r_expr: String,
        #[arg(allow_hyphen_values = true)]
        s_expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Full cycle classification: curve, subdivision, both smoothness
    /// checkers, shape prediction.
    Classify {
        #[arg(allow_hyphen_values = true)]
        r_expr: String,
        #[arg(allow_hyphen_values = true)]
        s_expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the ultradiscrete-theta cycle parametrization and verify
    /// curve membership.
    Cycle {
        #[arg(allow_hyphen_values = true)]
        r_expr: String,
        #[arg(allow_hyphen_values = true)]
        s_expr: String,
        /// Sampling step 1/n (default 1/16).
        #[arg(long, default_value = "1/16")]
        step: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the exact identity suite (constant-term vanishing, theta shift
    /// identities, j-invariant expansion).
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Bruhat-Tits pipeline: theta-factor fit, divisors, subtree,
    /// quotients, isometry comparison with the tropical curve.
    Bt {
        #[arg(allow_hyphen_values = true)]
        r_expr: String,
        #[arg(allow_hyphen_values = true)]
        s_expr: String,
        /// Number of fitted q-coefficients for the units (default 8).
        #[arg(long, default_value_t = 8)]
        fit_order: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Render a report JSON produced by another command as SVG.
    Render {
        /// Input JSON file.
        input: std::path::PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: i64 = n.parse().map_err(|_| Error::Parse {
        pos: 0,
        msg: format!("bad rational '{s}'"),
    })?;
    let den: i64 = d.parse().map_err(|_| Error::Parse {
        pos: 0,
        msg: format!("bad rational '{s}'"),
    })?;
    if den == 0 {
        return Err(Error::Parse {
            pos: 0,
            msg: "zero denominator".into(),
        });
    }
    Ok(rat(num, den))
}

fn horizon_of(common: &Common) -> Result<Rat> {
    if let Some(h) = &common.horizon {
        return parse_rat(h);
    }
    if let Ok(h) = std::env::var("TROPEDWARDS_HORIZON") {
        return parse_rat(&h);
    }
    Ok(rat(DEFAULT_HORIZON, 1))
}

fn effective_horizon(common: &Common) -> Result<Rat> {
    let mut horizon = horizon_of(common)?;
    if let Some(rm) = common.ram {
        if rm < 1 {
            return Err(Error::Parse {
                pos: 0,
                msg: "ram must be positive".into(),
            });
        }
        // put the horizon onto the requested grid
        horizon = rat(*horizon.numer() * rm, *horizon.denom() * rm);
    }
    Ok(horizon)
}

fn emit(common: &Common, content: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::Parse {
            pos: 0,
            msg: format!("cannot write {}: {e}", path.display()),
        }),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| Error::Parse {
                pos: 0,
                msg: format!("stdout: {e}"),
            }),
    }
}

fn require_json(common: &Common) -> Result<()> {
    if common.format != "json" {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("format '{}' not supported for this command", common.format),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Family {
            r_expr,
            s_expr,
            common,
        } => {
            require_json(&common)?;
            let v = pipeline::family_json(&r_expr, &s_expr, effective_horizon(&common)?)?;
            emit(&common, &report::to_string_pretty(&v))
        }
        Command::Classify {
            r_expr,
            s_expr,
            common,
        } => {
            let cls = pipeline::classify_full(&r_expr, &s_expr, effective_horizon(&common)?)?;
            match common.format.as_str() {
                "json" => {
                    let v = report::classify_report(&cls);
                    emit(&common, &report::to_string_pretty(&v))
                }
                "svg" => emit(&common, &svg::svg_curve(&cls)),
                other => Err(Error::Parse {
                    pos: 0,
                    msg: format!("unknown format '{other}'"),
                }),
            }
        }
        Command::Cycle {
            r_expr,
            s_expr,
            step,
            common,
        } => {
            let step = parse_rat(&step)?;
            let (rep, predicted) =
                pipeline::cycle_full(&r_expr, &s_expr, effective_horizon(&common)?, step)?;
            match common.format.as_str() {
                "json" => {
                    let v = report::cycle_report(&rep, &predicted);
                    emit(&common, &report::to_string_pretty(&v))
                }
                "svg" => {
                    let samples: Vec<(Rat, Rat)> = rep.samples.iter().map(|(_, p)| *p).collect();
                    let title = format!("cycle locus, delta = {}", rep.cp.delta);
                    emit(&common, &svg::svg_cycle_figure(&samples, &rep.locus, &title))
                }
                other => Err(Error::Parse {
                    pos: 0,
                    msg: format!("unknown format '{other}'"),
                }),
            }
        }
        Command::Verify { common } => {
            require_json(&common)?;
            let v = pipeline::verify_json(horizon_of(&common)?)?;
            emit(&common, &report::to_string_pretty(&v))
        }
        Command::Bt {
            r_expr,
            s_expr,
            fit_order,
            common,
        } => {
            let out = pipeline::bt_full(&r_expr, &s_expr, effective_horizon(&common)?, fit_order)?;
            match common.format.as_str() {
                "json" => {
                    let v = pipeline::bt_json(&out);
                    emit(&common, &report::to_string_pretty(&v))
                }
                "svg" => emit(
                    &common,
                    &svg::svg_quotient_graph(&out.quotient, "mod-q^8 quotient graph"),
                ),
                other => Err(Error::Parse {
                    pos: 0,
                    msg: format!("unknown format '{other}'"),
                }),
            }
        }
        Command::Render { input, common } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Parse {
                pos: 0,
                msg: format!("cannot read {}: {e}", input.display()),
            })?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
                pos: 0,
                msg: format!("invalid JSON: {e}"),
            })?;
            let svg = svg::render_json(&v)?;
            emit(&common, &svg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
