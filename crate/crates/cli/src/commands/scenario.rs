use swarmcalc::estimation::{
    feedback_timeseries_with, fit_feedback_growth, DriftWindow, RowWeighting, SeriesOptions,
};
use swarmcalc::fitting::GrowthWeighting;
use swarmcalc::io::{write_series, CurveFile, LogFile};
use swarmcalc::scenario::{
    dc_batch, merge_windows, transient_steps, Mixing, RecognitionNoise, ScenarioConfig, WindowSpec,
};

use super::parse_colon_list;
use crate::args::{NoiseArg, ScenarioArgs, WeightingArg};
use crate::error::CliError;
use crate::manifest::Context;

pub fn run(args: &ScenarioArgs, ctx: &mut Context) -> Result<(), CliError> {
    let seed = ctx.seed(args.seed)?;
    if args.replicates == 0 {
        return Err(CliError::usage("--replicates must be at least 1"));
    }
    let config = ScenarioConfig {
        agents: args.agents,
        recognition: args.recognition,
        steps: args.steps,
        seed,
        mixing: parse_mixing(&args.mixing)?,
        s0: args.s0,
        windows: parse_windows(&args.windows)?,
        noise: match args.noise {
            NoiseArg::Drop => RecognitionNoise::Drop,
            NoiseArg::Misread => RecognitionNoise::Misread,
        },
        primed_memory: args.primed_memory,
        trajectory_stride: args.stride,
    };
    config.validate()?;
    let grid = s0_grid(args)?;
    let runs = dc_batch(&config, &grid, ctx.exec)?;

    let trajectory = CurveFile::from_xy(runs[0].trajectory.iter().map(|&(t, s)| (t as f64, s)));
    ctx.write_csv(&args.out_dir.join("trajectory.csv"), |w| {
        trajectory.write(w)
    })?;

    let windows = merge_windows(&runs);
    for (i, w) in windows.iter().enumerate() {
        let file = LogFile::from_log(&w.log, Some(w.end as f64));
        ctx.write_csv(
            &args.out_dir.join(format!("logs/window_{i:04}.csv")),
            |out| file.write(out),
        )?;
    }

    let tables: Vec<DriftWindow> = windows
        .iter()
        .map(|w| DriftWindow::from_log(w.end as f64, &w.log))
        .collect();
    let options = SeriesOptions {
        weighting: match args.weighting {
            WeightingArg::Uniform => RowWeighting::Uniform,
            WeightingArg::Counts => RowWeighting::Counts,
        },
        min_samples: args.min_samples,
    };
    let series = feedback_timeseries_with(&tables, &options, ctx.exec)?;
    ctx.write_csv(&args.out_dir.join("phi_series.csv"), |w| {
        write_series(&series, w)
    })?;
    ctx.print(&format!(
        "{} runs, {} windows, {} fitted, {} skipped",
        runs.len(),
        windows.len(),
        series.points.len(),
        series.skipped.len()
    ));

    if args.growth_fit {
        let transient = transient_steps(&config) as f64;
        let weighting = GrowthWeighting {
            zero_below: transient,
            double_from: 4.0 * transient,
            late_weight: 2.0,
        };
        let fit = fit_feedback_growth(&series, &weighting)?;
        ctx.print(&format!("transient {transient} steps"));
        ctx.print(&fit.gnuplot_table());
    }
    Ok(())
}

fn s0_grid(args: &ScenarioArgs) -> Result<Vec<f64>, CliError> {
    let Some(spread) = &args.s0_spread else {
        return Ok(vec![args.s0; args.replicates]);
    };
    let v = parse_colon_list("--s0-spread", spread, 3)?;
    let (lo, hi, k) = (v[0], v[1], v[2]);
    if !(k >= 2.0 && k.fract() == 0.0) {
        return Err(CliError::usage(format!(
            "--s0-spread '{spread}': K must be an integer of at least 2"
        )));
    }
    let k = k as usize;
    Ok((0..args.replicates)
        .map(|i| lo + (hi - lo) * (i % k) as f64 / (k - 1) as f64)
        .collect())
}

fn parse_windows(text: &str) -> Result<WindowSpec, CliError> {
    let bad = || {
        CliError::usage(format!(
            "--windows '{text}': expected uniform:W, doubling:F or explicit:E1,E2,..."
        ))
    };
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let nums: Vec<u64> = rest
        .split(',')
        .map(|v| v.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match (kind, nums.as_slice()) {
        ("uniform", [w]) => Ok(WindowSpec::Uniform { width: *w }),
        ("doubling", [f]) => Ok(WindowSpec::Doubling { first: *f }),
        ("explicit", ends) if !ends.is_empty() => Ok(WindowSpec::Explicit(ends.to_vec())),
        _ => Err(bad()),
    }
}

fn parse_mixing(text: &str) -> Result<Mixing, CliError> {
    if text == "well-mixed" {
        return Ok(Mixing::WellMixed);
    }
    let bad = || {
        CliError::usage(format!(
            "--mixing '{text}': expected well-mixed or grid:WxH:RADIUS"
        ))
    };
    let rest = text.strip_prefix("grid:").ok_or_else(bad)?;
    let (dims, radius) = rest.split_once(':').ok_or_else(bad)?;
    let (w, h) = dims.split_once('x').ok_or_else(bad)?;
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    Ok(Mixing::Grid {
        width: num(w)?,
        height: num(h)?,
        radius: num(radius)?,
    })
}
