use std::path::Path;

use swarmcalc::fitting::{
    fit_feedback_growth, fit_narrow, fit_staged, growth_spec, growth_weights, levenberg_marquardt,
    performance_spec, switch_time_spec, Dataset, FitResult, GrowthWeighting, InterferenceParams,
    LmOptions, ModelKind, ModelSpec, Row,
};
use swarmcalc::io::{fmt_float, CurveFile};

use super::parse_colon_list;
use crate::args::{FitCommand, FitCommon};
use crate::error::CliError;
use crate::manifest::Context;

pub fn run(command: &FitCommand, ctx: &mut Context) -> Result<(), CliError> {
    match command {
        FitCommand::Performance(c) => {
            let data = load(c, &c.data, ctx)?;
            let spec = apply_overrides(performance_spec(&data)?, c)?;
            finish(c, ctx, &data, ModelKind::Performance, run_lm(&spec, &data)?)
        }
        FitCommand::SwitchTimes(c) => {
            let data = load(c, &c.data, ctx)?;
            let spec = apply_overrides(switch_time_spec(&data)?, c)?;
            finish(c, ctx, &data, ModelKind::SwitchTime, run_lm(&spec, &data)?)
        }
        FitCommand::Staged(a) => {
            let c = &a.common;
            if !c.fix.is_empty() || !c.init.is_empty() {
                return Err(CliError::usage(
                    "fit staged takes no --fix or --init; use fit narrow to hold a2 and c",
                ));
            }
            let random = load(c, &a.random_data, ctx)?;
            let full = load(c, &c.data, ctx)?;
            let staged = fit_staged(&random, &full)?;
            print_fit(c, ctx, &staged.interference);
            finish(
                c,
                ctx,
                &full,
                ModelKind::StagedPerformance,
                staged.performance,
            )
        }
        FitCommand::Narrow(a) => {
            let c = &a.common;
            if !c.init.is_empty() {
                return Err(CliError::usage("fit narrow takes no --init"));
            }
            let range = parse_colon_list("--range", &a.range, 2)?;
            let fixed = parse_pairs(&c.fix)?;
            let get = |name: &str| fixed.iter().find(|(k, _)| k == name).map(|(_, v)| *v);
            if let Some((k, _)) = fixed
                .iter()
                .find(|(k, _)| !["a2", "c", "d"].contains(&k.as_str()))
            {
                return Err(CliError::usage(format!(
                    "fit narrow can only fix a2, c and d, not {k}"
                )));
            }
            let params = InterferenceParams {
                a2: get("a2").ok_or_else(|| CliError::usage("fit narrow needs --fix a2=VALUE"))?,
                c: get("c").ok_or_else(|| CliError::usage("fit narrow needs --fix c=VALUE"))?,
                d: get("d").unwrap_or(0.0),
            };
            let data = load(c, &c.data, ctx)?;
            let fit = fit_narrow(&data, (range[0], range[1]), params)?;
            finish(
                c,
                ctx,
                &data.restricted(range[0], range[1]),
                ModelKind::StagedPerformance,
                fit,
            )
        }
        FitCommand::FeedbackGrowth(a) => {
            let c = &a.common;
            let weighting = GrowthWeighting {
                zero_below: a.zero_below,
                double_from: a.double_from,
                late_weight: a.late_weight,
            };
            let data = if c.weights.is_some() {
                load(c, &c.data, ctx)?
            } else {
                let curve = ctx.parse_input(&c.data, CurveFile::read)?;
                let series: Vec<(f64, f64)> = curve.rows.iter().map(|r| (r.x, r.y)).collect();
                growth_weights(&series, &weighting)
            };
            let fit = if c.fix.is_empty() && c.init.is_empty() {
                fit_feedback_growth(&data)?
            } else {
                run_lm(&apply_overrides(growth_spec(&data)?, c)?, &data)?
            };
            finish(c, ctx, &data, ModelKind::Growth, fit)
        }
    }
}

fn run_lm(spec: &ModelSpec, data: &Dataset) -> Result<FitResult, CliError> {
    Ok(levenberg_marquardt(spec, data, &LmOptions::default())?)
}

/// Reads a CurveFile and weights its rows as `--weights` asks.
fn load(c: &FitCommon, path: &Path, ctx: &mut Context) -> Result<Dataset, CliError> {
    let curve = ctx.parse_input(path, CurveFile::read)?;
    let name = path.display().to_string();
    let has_yerr = curve.rows.iter().any(|r| r.yerr.is_some());
    match c.weights.as_deref() {
        None if has_yerr => Ok(curve.to_dataset_yerr(&name)),
        None | Some("unit") => Ok(curve.to_dataset(&name)),
        Some("yerr") if has_yerr => Ok(curve.to_dataset_yerr(&name)),
        Some("yerr") => Err(CliError::Input(format!(
            "{name}: --weights yerr but the file has no yerr column"
        ))),
        Some("relative") => {
            let rows = curve.rows.iter().map(|r| Row {
                x: r.x,
                y: r.y,
                w: if r.y != 0.0 { 1.0 / (r.y * r.y) } else { 0.0 },
            });
            Ok(Dataset::new(name, rows.collect()))
        }
        Some(file) => {
            let wpath = Path::new(file);
            let weights = ctx.parse_input(wpath, CurveFile::read)?;
            let rows = curve
                .rows
                .iter()
                .map(|r| {
                    let w = weights.rows.iter().find(|w| w.x == r.x).ok_or_else(|| {
                        CliError::Input(format!(
                            "{}: no weight for x = {}",
                            wpath.display(),
                            fmt_float(r.x)
                        ))
                    })?;
                    if !(w.y >= 0.0) {
                        return Err(CliError::Input(format!(
                            "{}: negative weight at x = {}",
                            wpath.display(),
                            fmt_float(r.x)
                        )));
                    }
                    Ok(Row {
                        x: r.x,
                        y: r.y,
                        w: w.y,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Dataset::new(name, rows))
        }
    }
}

fn parse_pairs(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("'{item}' is not NAME=VALUE")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("'{item}': value is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn apply_overrides(mut spec: ModelSpec, c: &FitCommon) -> Result<ModelSpec, CliError> {
    for (k, v) in parse_pairs(&c.init)? {
        spec = spec
            .with_init(&k, v)
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    for (k, v) in parse_pairs(&c.fix)? {
        spec = spec
            .fix(&k, v)
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(spec)
}

fn print_fit(c: &FitCommon, ctx: &mut Context, fit: &FitResult) {
    if c.gnuplot_table {
        ctx.print(&fit.gnuplot_table());
        ctx.print("");
        return;
    }
    let mut text = format!(
        "function,{}\ndof,{}\nrms,{}\nconverged,{}\n",
        fit.function,
        fit.dof,
        fmt_float(fit.rms),
        fit.converged
    );
    text.push_str("parameter,value,stderr,percent,fixed,at_bound\n");
    let pct = fit.percent_errors();
    for i in 0..fit.names.len() {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fit.names[i],
            fmt_float(fit.values[i]),
            fmt_float(fit.stderr[i]),
            fmt_float(pct[i]),
            fit.fixed[i],
            fit.at_bound[i]
        ));
    }
    ctx.print(&text);
}

fn finish(
    c: &FitCommon,
    ctx: &mut Context,
    data: &Dataset,
    kind: ModelKind,
    fit: FitResult,
) -> Result<(), CliError> {
    print_fit(c, ctx, &fit);
    if let Some(out) = &c.out {
        let curve =
            CurveFile::from_xy(data.rows.iter().map(|r| (r.x, kind.eval(r.x, &fit.values))));
        ctx.write_csv(out, |w| curve.write(w))?;
    }
    if !fit.converged {
        return Err(CliError::numerical(format!(
            "fit did not converge after {} iterations; chi2 trace ends at {}",
            fit.iterations,
            fit.trace.last().map_or("?".into(), |c| fmt_float(*c))
        )));
    }
    Ok(())
}
