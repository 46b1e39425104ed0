use swarmcalc::estimation::{
    default_pole_mask, estimate_feedback_with, fit_feedback_profile, predict_steady_state,
    ProfileFamily,
};
use swarmcalc::io::{estimate_curve, CurveFile, LogFile};

use super::parse_payoff;
use crate::args::{EstimateArgs, FamilyArg};
use crate::error::{summarize_fit_failure, CliError};
use crate::manifest::Context;

pub fn run(args: &EstimateArgs, ctx: &mut Context) -> Result<(), CliError> {
    let file = ctx.parse_input(&args.log, LogFile::read)?;
    let n = match args.n {
        Some(n) if n >= 2 => n,
        Some(n) => return Err(CliError::usage(format!("--n {n} must be at least 2"))),
        None => file.infer_n().ok_or_else(|| {
            CliError::Input(format!(
                "{}: cannot infer the urn size from s; pass --n",
                args.log.display()
            ))
        })?,
    };
    let log = file
        .to_revision_log(n)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.log.display())))?;
    let payoff = parse_payoff(&args.payoff)?;
    let mask = args.pole_mask.unwrap_or_else(|| default_pole_mask(n));
    let estimate = estimate_feedback_with(&log, mask);

    let curve = estimate_curve(&estimate);
    ctx.write_csv(&args.out.join("estimate.csv"), |w| curve.write(w))?;

    let usable = estimate.usable().count();
    if usable == 0 {
        return Err(CliError::numerical(
            "every state is masked or undefined; nothing to fit",
        ));
    }
    let family = match args.family {
        FamilyArg::Sine => ProfileFamily::Sine,
        FamilyArg::Quad => ProfileFamily::Quadratic,
        FamilyArg::Rational => ProfileFamily::Rational,
    };
    let (profile, fit) = fit_feedback_profile(&estimate, family).map_err(|e| {
        CliError::numerical(format!(
            "profile fit on {usable} usable states: {}",
            summarize_fit_failure(&e)
        ))
    })?;
    ctx.print(&fit.gnuplot_table());

    if args.predict_steady_state {
        let pi = predict_steady_state(&profile, &payoff, n)?;
        let curve = CurveFile::from_xy(pi.pi.iter().enumerate().map(|(b, &p)| (b as f64, p)));
        ctx.write_csv(&args.out.join("predicted.csv"), |w| curve.write(w))?;
    }
    Ok(())
}
