use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use dirheat_core::series::{number_from_value, SeriesDocument};
use dirheat_core::numeric::fmt_f64;
use dirheat_core::uniqueness::ZERO_TEST_NODES;
use dirheat_core::{expand, is_identically_zero, peel_leading, DirichletSeries, SampledSignal, Term};

use crate::output::{apply_config, need, read_file, CliError, CliResult};
use crate::Context;

#[derive(Subcommand, Debug)]
pub enum SeriesCommand {
    /// Evaluate the series at t, with the tail's certified contribution
    Eval(EvalArgs),
    /// Taylor coefficients and their bounds around tau
    Expand(ExpandArgs),
    /// Measured and certified remainders for orders 1..=nmax at t
    Remainder(RemainderArgs),
    /// Shift exponents so the smallest equals 1
    Normalize(SourceArgs),
    /// Divide coefficients by lambda^k (k-fold antiderivative up to sign)
    Reduce(ReduceArgs),
    /// Decide whether the series vanishes on [0, T]
    ZeroTest(ZeroTestArgs),
    /// Recover leading coefficients of a sampled signal with known exponents
    Peel(PeelArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct SourceArgs {
    /// Series document ({"terms": [[alpha, lambda], ...], "tail": ...})
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Inline terms `alpha:lambda,alpha:lambda,...`
    #[arg(long, allow_hyphen_values = true)]
    pub terms: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ExpandArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct RemainderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ReduceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ZeroTestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: SourceArgs,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct PeelArgs {
    /// CSV of `t,value` samples
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Known exponents, increasing, comma separated
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Horizon of the signal; defaults to the last sample time
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
}

fn load_series(source: &SourceArgs) -> CliResult<DirichletSeries> {
    match (&source.series, &source.terms) {
        (Some(path), None) => Ok(DirichletSeries::from_json_str(&read_file(path)?)?),
        (None, Some(inline)) => parse_inline_terms(inline),
        _ => Err(CliError::Usage("give exactly one of --series or --terms".into())),
    }
}

fn parse_inline_terms(inline: &str) -> CliResult<DirichletSeries> {
    let number = |s: &str| number_from_value(&Value::String(s.trim().to_string()));
    let terms = inline
        .split(',')
        .map(|pair| {
            let (a, l) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("term `{pair}` is not of the form alpha:lambda")))?;
            Ok(Term::new(number(a)?, number(l)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DirichletSeries::new(terms)?)
}

fn parse_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| Ok(number_from_value(&Value::String(s.trim().to_string()))?))
        .collect()
}

#[derive(Serialize)]
struct Normalized {
    shift: f64,
    series: SeriesDocument,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ZeroVerdict {
    identically_zero: bool,
    #[serde(rename = "T")]
    horizon: f64,
    tol: f64,
    nodes: usize,
}

pub fn run(command: SeriesCommand, ctx: &Context) -> CliResult<()> {
    let config = ctx.config.as_deref();
    match command {
        SeriesCommand::Eval(args) => {
            let args = apply_config(args, config)?;
            let series = load_series(&args.source)?;
            ctx.sink("series eval", &args).json(&series.evaluate(need(&args.t, "t")?)?)
        }
        SeriesCommand::Expand(args) => {
            let args = apply_config(args, config)?;
            let series = load_series(&args.source)?;
            ctx.sink("series expand", &args)
                .json(&expand(&series, need(&args.tau, "tau")?, need(&args.order, "order")?)?)
        }
        SeriesCommand::Remainder(args) => {
            let args = apply_config(args, config)?;
            if args.nmax == 0 {
                return Err(CliError::Usage("--nmax must be at least 1".into()));
            }
            let (tau, t) = (need(&args.tau, "tau")?, need(&args.t, "t")?);
            let series = load_series(&args.source)?;
            let expansion = expand(&series, tau, args.nmax)?;
            let exact = series.evaluate(t)?.value;
            let rows = (1..=args.nmax)
                .map(|n| {
                    let cert = expansion.remainder_bound(n, t)?;
                    let measured = (exact - expansion.partial_sum(n, t)).abs();
                    Ok((n, measured, cert.bound))
                })
                .collect::<dirheat_core::Result<Vec<_>>>()?;
            ctx.sink("series remainder", &args).csv(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                let err = |e: csv::Error| dirheat_core::Error::Invalid(format!("csv write failed: {e}"));
                w.write_record(["n", "t", "measured", "certified"]).map_err(err)?;
                for (n, measured, certified) in rows {
                    w.write_record([n.to_string(), fmt_f64(t), fmt_f64(measured), fmt_f64(certified)])
                        .map_err(err)?;
                }
                w.flush()
                    .map_err(|e| dirheat_core::Error::Invalid(format!("csv write failed: {e}")))
            })
        }
        SeriesCommand::Normalize(args) => {
            let args = apply_config(args, config)?;
            let (series, shift) = load_series(&args)?.shift_normalize()?;
            ctx.sink("series normalize", &args).json(&Normalized {
                shift,
                series: series.to_document(),
            })
        }
        SeriesCommand::Reduce(args) => {
            let args = apply_config(args, config)?;
            let reduced = load_series(&args.source)?.antiderivative_reduce(need(&args.k, "k")?)?;
            ctx.sink("series reduce", &args).json(&reduced.to_document())
        }
        SeriesCommand::ZeroTest(args) => {
            let args = apply_config(args, config)?;
            let series = load_series(&args.source)?;
            let identically_zero = is_identically_zero(&series, args.horizon, args.tol)?;
            ctx.sink("series zero-test", &args).json(&ZeroVerdict {
                identically_zero,
                horizon: args.horizon,
                tol: args.tol,
                nodes: ZERO_TEST_NODES,
            })
        }
        SeriesCommand::Peel(args) => {
            let args = apply_config(args, config)?;
            let path = need(&args.signal, "signal")?;
            let file = std::fs::File::open(&path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let signal = SampledSignal::read_csv(file, args.horizon)?;
            let lambdas = parse_list(&need(&args.lambdas, "lambdas")?)?;
            ctx.sink("series peel", &args)
                .json(&peel_leading(&signal, &lambdas, need(&args.count, "count")?)?)
        }
    }
}
