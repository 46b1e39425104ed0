mod args;
mod commands;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use swarmcalc::Execution;

use args::{AnalyzeCommand, Cli, Command, FitCommand};
use error::CliError;
use manifest::{argv_with_seed, sha256_hex, Context, RunManifest};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let (result, stdout) = match &cli.command {
        Command::Replay(r) => replay(&r.manifest).unwrap_or_else(|e| (Err(e), String::new())),
        _ => match execute(&cli, &argv, false) {
            Ok(ctx) => (Ok(()), ctx.stdout),
            Err((e, out)) => (Err(e), out),
        },
    };
    print!("{stdout}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swarmcalc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Runs a parsed command and writes its manifest.
fn execute(cli: &Cli, argv: &[String], replaying: bool) -> Result<Context, (CliError, String)> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut ctx = Context::new(exec, replaying);
    let started = SystemTime::now();
    let clock = Instant::now();
    if let Err(e) = commands::run(&cli.command, &mut ctx) {
        return Err((e, ctx.stdout));
    }
    if replaying {
        return Ok(ctx);
    }
    if let Some(path) = manifest_path(cli) {
        let manifest = RunManifest {
            command: command_name(&cli.command),
            argv: argv_with_seed(argv, ctx.seeds.first().copied()),
            options: serde_json::to_value(cli).expect("options serialize"),
            seeds: ctx.seeds.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            cwd: std::env::current_dir().unwrap_or_default(),
            inputs: ctx.inputs.clone(),
            outputs: ctx.outputs.clone(),
            stdout_sha256: sha256_hex(ctx.stdout.as_bytes()),
            started_unix_seconds: started
                .duration_since(UNIX_EPOCH)
                .map_or(0.0, |d| d.as_secs_f64()),
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
        };
        if let Err(e) = manifest.save(&path) {
            return Err((e, ctx.stdout));
        }
    }
    Ok(ctx)
}

/// Re-runs the recorded command and compares every digest.
fn replay(path: &Path) -> Result<(Result<(), CliError>, String), CliError> {
    let manifest = RunManifest::load(path)?;
    std::env::set_current_dir(&manifest.cwd).map_err(|e| CliError::io(&manifest.cwd, e))?;
    for (input, digest) in &manifest.inputs {
        let bytes = std::fs::read(input).map_err(|e| CliError::io(Path::new(input), e))?;
        if &sha256_hex(&bytes) != digest {
            return Err(CliError::Input(format!(
                "{input}: input changed since the manifest was written"
            )));
        }
    }
    let cli = Cli::try_parse_from(
        std::iter::once("swarmcalc".to_string()).chain(manifest.argv.iter().cloned()),
    )
    .map_err(|e| {
        CliError::Input(format!(
            "{}: recorded arguments no longer parse: {e}",
            path.display()
        ))
    })?;
    let ctx = match execute(&cli, &manifest.argv, true) {
        Ok(ctx) => ctx,
        Err((e, out)) => return Ok((Err(e), out)),
    };
    let mut differing: Vec<String> = manifest
        .outputs
        .iter()
        .filter(|(k, v)| ctx.outputs.get(*k) != Some(v))
        .map(|(k, _)| k.clone())
        .collect();
    differing.extend(
        ctx.outputs
            .keys()
            .filter(|k| !manifest.outputs.contains_key(*k))
            .cloned(),
    );
    if sha256_hex(ctx.stdout.as_bytes()) != manifest.stdout_sha256 {
        differing.push("<stdout>".into());
    }
    if !differing.is_empty() {
        return Ok((
            Err(CliError::numerical(format!(
                "replay differs in {}",
                differing.join(", ")
            ))),
            String::new(),
        ));
    }
    Ok((
        Ok(()),
        format!(
            "replay: {} outputs and stdout identical\n",
            manifest.outputs.len()
        ),
    ))
}

fn manifest_path(cli: &Cli) -> Option<PathBuf> {
    if let Some(p) = &cli.manifest {
        return Some(p.clone());
    }
    let beside = |p: &Option<PathBuf>| {
        p.as_ref()
            .map(|p| PathBuf::from(format!("{}.manifest.json", p.display())))
    };
    match &cli.command {
        Command::Simulate(a) => Some(a.out.join("manifest.json")),
        Command::Estimate(a) => Some(a.out.join("manifest.json")),
        Command::ScenarioDc(a) => Some(a.out_dir.join("manifest.json")),
        Command::Analyze(AnalyzeCommand::SteadyState(a)) => beside(&a.out),
        Command::Analyze(AnalyzeCommand::Splitting(a)) => beside(&a.out),
        Command::Analyze(AnalyzeCommand::Mfpt(a)) => beside(&a.out),
        Command::Fit(f) => beside(&match f {
            FitCommand::Performance(c) | FitCommand::SwitchTimes(c) => c.out.clone(),
            FitCommand::Staged(a) => a.common.out.clone(),
            FitCommand::Narrow(a) => a.common.out.clone(),
            FitCommand::FeedbackGrowth(a) => a.common.out.clone(),
        }),
        Command::Replay(_) => None,
    }
}

fn command_name(command: &Command) -> String {
    match command {
        Command::Simulate(_) => "simulate".into(),
        Command::Analyze(AnalyzeCommand::SteadyState(_)) => "analyze steady-state".into(),
        Command::Analyze(AnalyzeCommand::Splitting(_)) => "analyze splitting".into(),
        Command::Analyze(AnalyzeCommand::Mfpt(_)) => "analyze mfpt".into(),
        Command::Fit(FitCommand::Performance(_)) => "fit performance".into(),
        Command::Fit(FitCommand::Staged(_)) => "fit staged".into(),
        Command::Fit(FitCommand::Narrow(_)) => "fit narrow".into(),
        Command::Fit(FitCommand::SwitchTimes(_)) => "fit switch-times".into(),
        Command::Fit(FitCommand::FeedbackGrowth(_)) => "fit feedback-growth".into(),
        Command::Estimate(_) => "estimate".into(),
        Command::ScenarioDc(_) => "scenario-dc".into(),
        Command::Replay(_) => "replay".into(),
    }
}
