mod analyze;
mod estimate;
mod fit;
mod scenario;
mod simulate;

use swarmcalc::io::CurveFile;
use swarmcalc::{DriftSpec, FeedbackProfile, PayoffProfile};

use crate::args::{Command, ProfileArgs, ProfileKind};
use crate::error::CliError;
use crate::manifest::Context;

pub fn run(command: &Command, ctx: &mut Context) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate::run(a, ctx),
        Command::Analyze(a) => analyze::run(a, ctx),
        Command::Fit(a) => fit::run(a, ctx),
        Command::Estimate(a) => estimate::run(a, ctx),
        Command::ScenarioDc(a) => scenario::run(a, ctx),
        Command::Replay(_) => unreachable!("replay is dispatched by main"),
    }
}

pub fn drift_spec(args: &ProfileArgs, ctx: &mut Context) -> Result<DriftSpec, CliError> {
    if args.n < 2 {
        return Err(CliError::usage(format!(
            "--n {} must be at least 2",
            args.n
        )));
    }
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| {
            CliError::usage(format!("--profile {:?} needs {flag}", args.profile).to_lowercase())
        })
    };
    let feedback = match args.profile {
        ProfileKind::Sine => FeedbackProfile::sine(need(args.phi, "--phi")?)?,
        ProfileKind::Quad => FeedbackProfile::quadratic(need(args.phi, "--phi")?)?,
        ProfileKind::Rational => {
            FeedbackProfile::rational(need(args.c1, "--c1")?, need(args.c2, "--c2")?)?
        }
        ProfileKind::TableFile => {
            let path = args
                .table
                .as_deref()
                .ok_or_else(|| CliError::usage("--profile table-file needs --table FILE"))?;
            let curve = ctx.parse_input(path, CurveFile::read)?;
            let points: Vec<(f64, f64)> = curve.rows.iter().map(|r| (r.x, r.y)).collect();
            FeedbackProfile::tabulated(&points)?
        }
    };
    Ok(DriftSpec::new(
        feedback,
        parse_payoff(&args.payoff)?,
        args.n,
    )?)
}

/// `constant:C`, `sine:C1,C2` or a bare constant.
pub fn parse_payoff(text: &str) -> Result<PayoffProfile, CliError> {
    let bad = || {
        CliError::usage(format!(
            "--payoff '{text}': expected constant:C or sine:C1,C2"
        ))
    };
    let (kind, rest) = text.split_once(':').unwrap_or(("constant", text));
    let nums: Vec<f64> = rest
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match (kind.trim(), nums.as_slice()) {
        ("constant", [c]) => Ok(PayoffProfile::constant(*c)?),
        ("sine", [c1, c2]) => Ok(PayoffProfile::sine(*c1, *c2)?),
        _ => Err(bad()),
    }
}

/// Splits `A:B[:C...]` into numbers.
pub fn parse_colon_list(flag: &str, text: &str, count: usize) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            CliError::usage(format!(
                "{flag} '{text}' is not a ':'-separated list of numbers"
            ))
        })?;
    if parts.len() != count {
        return Err(CliError::usage(format!(
            "{flag} '{text}' needs {count} ':'-separated values"
        )));
    }
    Ok(parts)
}
