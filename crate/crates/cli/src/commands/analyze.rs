use swarmcalc::io::CurveFile;
use swarmcalc::markov::{
    build_transition, mfpt, splitting_exact, splitting_probability, steady_state,
    steady_state_detailed_balance,
};

use super::drift_spec;
use crate::args::{AnalyzeCommand, SplittingMethod, SteadyMethod};
use crate::error::CliError;
use crate::manifest::Context;

pub fn run(command: &AnalyzeCommand, ctx: &mut Context) -> Result<(), CliError> {
    match command {
        AnalyzeCommand::SteadyState(a) => {
            let t = build_transition(&drift_spec(&a.profile, ctx)?)?;
            let pi = match a.method {
                SteadyMethod::Power => steady_state(&t)?,
                SteadyMethod::DetailedBalance => steady_state_detailed_balance(&t)?,
            };
            let curve = indexed(0, &pi.pi);
            ctx.emit_csv(a.out.as_deref(), |w| curve.write(w))
        }
        AnalyzeCommand::Splitting(a) => {
            if a.a >= a.b {
                return Err(CliError::usage(format!(
                    "--a {} must be below --b {}",
                    a.a, a.b
                )));
            }
            if a.b > a.profile.n {
                return Err(CliError::usage(format!(
                    "--b {} exceeds --n {}",
                    a.b, a.profile.n
                )));
            }
            let t = build_transition(&drift_spec(&a.profile, ctx)?)?;
            let sigma = match a.method {
                SplittingMethod::Exact => splitting_exact(&t, a.a, a.b)?,
                SplittingMethod::Formula => splitting_probability(&steady_state(&t)?, a.a, a.b)?,
            };
            let curve = indexed(a.a, &sigma.sigma);
            ctx.emit_csv(a.out.as_deref(), |w| curve.write(w))
        }
        AnalyzeCommand::Mfpt(a) => {
            if a.target > a.profile.n {
                return Err(CliError::usage(format!(
                    "--target {} exceeds --n {}",
                    a.target, a.profile.n
                )));
            }
            let t = build_transition(&drift_spec(&a.profile, ctx)?)?;
            let times = mfpt(&t, a.target)?;
            if let Some(x) = times.times.iter().position(|v| !v.is_finite()) {
                return Err(CliError::numerical(format!(
                    "target {} is unreachable from state {x}",
                    a.target
                )));
            }
            let curve = indexed(0, &times.times);
            ctx.emit_csv(a.out.as_deref(), |w| curve.write(w))
        }
    }
}

/// `x` = state, `y` = value.
fn indexed(first: usize, values: &[f64]) -> CurveFile {
    CurveFile::from_xy(
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ((first + i) as f64, v)),
    )
}
