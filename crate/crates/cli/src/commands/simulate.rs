use swarmcalc::io::{CurveFile, HistFile, LogFile};
use swarmcalc::urn::{
    ensemble_histogram, final_states, record_revisions, run_replicate, Histogram, InitialState,
    SimConfig,
};

use super::{drift_spec, parse_colon_list};
use crate::args::SimulateArgs;
use crate::error::CliError;
use crate::manifest::Context;

pub fn run(args: &SimulateArgs, ctx: &mut Context) -> Result<(), CliError> {
    let spec = drift_spec(&args.profile, ctx)?;
    let seed = ctx.seed(args.seed)?;
    if args.stride == 0 {
        return Err(CliError::usage("--stride must be positive"));
    }
    let init = args
        .b0
        .map_or(InitialState::SymmetricPair, InitialState::Fixed);
    let config = SimConfig::new(spec, args.steps, seed, init, args.replicates)?;

    let trajectory = run_replicate(&config, 0);
    let last = trajectory.len() - 1;
    let curve = CurveFile::from_xy(
        trajectory
            .iter()
            .enumerate()
            .filter(|(t, _)| *t as u64 % args.stride == 0 || *t == last)
            .map(|(t, &b)| (t as f64, b as f64)),
    );
    ctx.write_csv(&args.out.join("trajectory.csv"), |w| curve.write(w))?;

    let histogram = match &args.phi_scan {
        Some(scan) => ensemble_histogram(&scan_values(scan)?, &config, ctx.exec)?,
        None => {
            let finals = final_states(&config, ctx.exec)?;
            let n = config.spec.n;
            let mut freq = vec![0.0; n + 1];
            finals.iter().for_each(|&b| freq[b] += 1.0);
            freq.iter_mut().for_each(|f| *f /= finals.len() as f64);
            let phi = match config.spec.feedback {
                swarmcalc::FeedbackProfile::Sine { phi }
                | swarmcalc::FeedbackProfile::Quadratic { phi } => phi,
                _ => f64::NAN,
            };
            Histogram {
                phis: vec![phi],
                n,
                freq: vec![freq],
            }
        }
    };
    let hist = HistFile::from(&histogram);
    ctx.write_csv(&args.out.join("hist.csv"), |w| hist.write(w))?;

    let log = LogFile::from_log(&record_revisions(&config, ctx.exec)?, None);
    ctx.write_csv(&args.out.join("log.csv"), |w| log.write(w))?;
    Ok(())
}

/// `LO:STEP:HI`, inclusive of `HI` up to rounding.
fn scan_values(text: &str) -> Result<Vec<f64>, CliError> {
    let v = parse_colon_list("--phi-scan", text, 3)?;
    let (lo, step, hi) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !(hi >= lo) {
        return Err(CliError::usage(format!(
            "--phi-scan '{text}' needs STEP > 0 and HI >= LO"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}
