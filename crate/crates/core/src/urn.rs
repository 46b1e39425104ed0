//! Stochastic simulation of the generalized urn.
//!
//! One round draws a marble with replacement, decides between positive and
//! negative feedback with probability `P(B/N)`, and with probability
//! `M(B/N)` replaces one marble:
//!
//! | drawn | feedback | change |
//! |-------|----------|--------|
//! | blue  | positive | red -> blue (+1) |
//! | blue  | negative | blue -> red (-1) |
//! | red   | positive | blue -> red (-1) |
//! | red   | negative | red -> blue (+1) |
//!
//! A replacement that would remove a color absent from the urn is a no-op.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::exec::{derive_seed, map_indexed, rng_for, Execution};
use crate::model::DriftSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UrnState {
    pub b: usize,
    pub n: usize,
}

impl UrnState {
    pub fn new(b: usize, n: usize) -> Result<Self, SimError> {
        if b > n {
            return Err(SimError::Config(format!(
                "blue count {b} exceeds urn size {n}"
            )));
        }
        Ok(UrnState { b, n })
    }

    pub fn consensus(&self) -> f64 {
        self.b as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub drawn: Color,
    pub feedback: Feedback,
    /// 0 or 1
    pub payoff: u8,
    pub delta: i8,
}

impl StepEvent {
    /// Change the four-case table asks for, before boundary clamping.
    pub fn intended_delta(&self) -> i8 {
        let sign = match (self.drawn, self.feedback) {
            (Color::Blue, Feedback::Positive) | (Color::Red, Feedback::Negative) => 1,
            _ => -1,
        };
        sign * self.payoff as i8
    }
}

/// One round of the urn.
pub fn step<R: Rng + ?Sized>(
    state: UrnState,
    spec: &DriftSpec,
    rng: &mut R,
) -> (UrnState, StepEvent) {
    let s = state.consensus();
    // three draws per round, always, so streams stay aligned across profiles
    let u_color: f64 = rng.random();
    let u_feedback: f64 = rng.random();
    let u_payoff: f64 = rng.random();

    let drawn = if u_color < s { Color::Blue } else { Color::Red };
    let feedback = if u_feedback < spec.feedback.prob(s) {
        Feedback::Positive
    } else {
        Feedback::Negative
    };
    let payoff = u8::from(u_payoff < spec.payoff.value(s));
    let mut event = StepEvent {
        drawn,
        feedback,
        payoff,
        delta: 0,
    };
    let wanted = event.intended_delta();
    let delta = match wanted {
        1 if state.b < state.n => 1,
        -1 if state.b > 0 => -1,
        _ => 0,
    };
    event.delta = delta;
    let b = (state.b as i64 + delta as i64) as usize;
    (UrnState { b, n: state.n }, event)
}

/// Initial blue count of each replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    Fixed(usize),
    /// Even replicates start at `n/2`, odd ones at `n/2 + 1`.
    SymmetricPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: DriftSpec,
    pub steps: u64,
    pub seed: u64,
    pub init: InitialState,
    pub replicates: usize,
}

pub const DEFAULT_HISTOGRAM_REPLICATES: usize = 10_000;

impl SimConfig {
    pub fn new(
        spec: DriftSpec,
        steps: u64,
        seed: u64,
        init: InitialState,
        replicates: usize,
    ) -> Result<Self, SimError> {
        let cfg = SimConfig {
            spec,
            steps,
            seed,
            init,
            replicates,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.spec.feedback.validate()?;
        self.spec.payoff.validate()?;
        if self.spec.n < 2 {
            return Err(SimError::Config(format!("urn size {} < 2", self.spec.n)));
        }
        let m = self.spec.payoff.max_value();
        if m > 1.0 {
            return Err(SimError::Config(format!(
                "payoff reaches {m} > 1; payoffs are probabilities of a unit change"
            )));
        }
        if let InitialState::Fixed(b) = self.init {
            if b > self.spec.n {
                return Err(SimError::Config(format!(
                    "initial blue count {b} exceeds {}",
                    self.spec.n
                )));
            }
        }
        if self.replicates == 0 {
            return Err(SimError::Config("need at least one replicate".into()));
        }
        Ok(())
    }

    pub fn initial_b(&self, replicate: usize) -> usize {
        match self.init {
            InitialState::Fixed(b) => b,
            InitialState::SymmetricPair => (self.spec.n / 2 + replicate % 2).min(self.spec.n),
        }
    }
}

/// Blue counts `B(0..=steps)` of one replicate.
pub fn run_replicate(config: &SimConfig, replicate: usize) -> Vec<usize> {
    let mut rng = rng_for(config.seed, replicate as u64);
    let mut state = UrnState {
        b: config.initial_b(replicate),
        n: config.spec.n,
    };
    let mut out = Vec::with_capacity(config.steps as usize + 1);
    out.push(state.b);
    for _ in 0..config.steps {
        state = step(state, &config.spec, &mut rng).0;
        out.push(state.b);
    }
    out
}

/// Trajectory of replicate 0.
pub fn run_trajectory(config: &SimConfig) -> Result<Vec<usize>, SimError> {
    config.validate()?;
    Ok(run_replicate(config, 0))
}

/// Final blue count of every replicate, in replicate order.
pub fn final_states(config: &SimConfig, exec: Execution) -> Result<Vec<usize>, SimError> {
    config.validate()?;
    Ok(map_indexed(config.replicates, exec, |i| {
        let mut rng = rng_for(config.seed, i as u64);
        let mut state = UrnState {
            b: config.initial_b(i),
            n: config.spec.n,
        };
        for _ in 0..config.steps {
            state = step(state, &config.spec, &mut rng).0;
        }
        state.b
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub s: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Empirical drift: `samples_per_state` independent rounds from every state.
///
/// State `B` draws from stream `B` of the config seed.
pub fn measure_drift(
    config: &SimConfig,
    samples_per_state: u64,
    exec: Execution,
) -> Result<Vec<DriftSample>, SimError> {
    config.validate()?;
    if samples_per_state == 0 {
        return Err(SimError::Config("samples_per_state must be >= 1".into()));
    }
    let n = config.spec.n;
    Ok(map_indexed(n + 1, exec, |b| {
        let mut rng = rng_for(config.seed, b as u64);
        let state = UrnState { b, n };
        let (mut sum, mut sum_sq) = (0i64, 0i64);
        for _ in 0..samples_per_state {
            let d = step(state, &config.spec, &mut rng).1.delta as i64;
            sum += d;
            sum_sq += d * d;
        }
        let k = samples_per_state as f64;
        let mean = sum as f64 / k;
        let var = if samples_per_state > 1 {
            (sum_sq as f64 - k * mean * mean).max(0.0) / (k - 1.0)
        } else {
            0.0
        };
        DriftSample {
            s: b as f64 / n as f64,
            mean,
            stderr: (var / k).sqrt(),
        }
    }))
}

/// Per-state counts of observed revisions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionLog {
    pub n: usize,
    /// red -> blue revisions observed at each state
    pub r_b: Vec<u64>,
    /// blue -> red revisions observed at each state
    pub r_r: Vec<u64>,
    pub visits: Vec<u64>,
}

impl RevisionLog {
    pub fn new(n: usize) -> Self {
        RevisionLog {
            n,
            r_b: vec![0; n + 1],
            r_r: vec![0; n + 1],
            visits: vec![0; n + 1],
        }
    }

    pub fn record(&mut self, b: usize, delta: i8) {
        self.visits[b] += 1;
        match delta {
            1 => self.r_b[b] += 1,
            -1 => self.r_r[b] += 1,
            _ => {}
        }
    }

    pub fn merge(&mut self, other: &RevisionLog) {
        assert_eq!(self.n, other.n, "merging logs of different sizes");
        for b in 0..=self.n {
            self.r_b[b] += other.r_b[b];
            self.r_r[b] += other.r_r[b];
            self.visits[b] += other.visits[b];
        }
    }

    pub fn total_revisions(&self) -> u64 {
        self.r_b.iter().sum::<u64>() + self.r_r.iter().sum::<u64>()
    }

    pub fn is_consistent(&self) -> bool {
        (0..=self.n).all(|b| self.r_b[b] + self.r_r[b] <= self.visits[b])
    }
}

/// Revisions along the trajectories of all replicates, merged in order.
pub fn record_revisions(config: &SimConfig, exec: Execution) -> Result<RevisionLog, SimError> {
    config.validate()?;
    let n = config.spec.n;
    let logs = map_indexed(config.replicates, exec, |i| {
        let mut rng = rng_for(config.seed, i as u64);
        let mut state = UrnState {
            b: config.initial_b(i),
            n,
        };
        let mut log = RevisionLog::new(n);
        for _ in 0..config.steps {
            let (next, ev) = step(state, &config.spec, &mut rng);
            log.record(state.b, ev.delta);
            state = next;
        }
        log
    });
    let mut total = RevisionLog::new(n);
    logs.iter().for_each(|l| total.merge(l));
    Ok(total)
}

/// Revisions from `samples_per_state` independent rounds at every state.
pub fn sample_revisions(
    spec: &DriftSpec,
    samples_per_state: u64,
    seed: u64,
    exec: Execution,
) -> RevisionLog {
    let n = spec.n;
    let logs = map_indexed(n + 1, exec, |b| {
        let mut rng = rng_for(seed, b as u64);
        let mut log = RevisionLog::new(n);
        let state = UrnState { b, n };
        for _ in 0..samples_per_state {
            log.record(b, step(state, spec, &mut rng).1.delta);
        }
        log
    });
    let mut total = RevisionLog::new(n);
    logs.iter().for_each(|l| total.merge(l));
    total
}

/// Final-state histograms over a grid of feedback intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub phis: Vec<f64>,
    pub n: usize,
    /// `freq[k][b]`: fraction of replicates ending at `b` for `phis[k]`
    pub freq: Vec<Vec<f64>>,
}

/// Column `k` uses the base config with the feedback intensity replaced by
/// `phis[k]` and seed `derive_seed(config.seed, k)`.
pub fn ensemble_histogram(
    phis: &[f64],
    config: &SimConfig,
    exec: Execution,
) -> Result<Histogram, SimError> {
    config.validate()?;
    let n = config.spec.n;
    let mut freq = Vec::with_capacity(phis.len());
    for (k, &phi) in phis.iter().enumerate() {
        let feedback = config.spec.feedback.with_phi(phi).ok_or_else(|| {
            SimError::Config(format!(
                "{} profile has no intensity",
                config.spec.feedback.family()
            ))
        })??;
        let column_cfg = SimConfig {
            spec: DriftSpec {
                feedback,
                ..config.spec.clone()
            },
            seed: derive_seed(config.seed, k as u64),
            ..config.clone()
        };
        let finals = final_states(&column_cfg, exec)?;
        let mut counts = vec![0u64; n + 1];
        finals.iter().for_each(|&b| counts[b] += 1);
        let total = finals.len() as f64;
        freq.push(counts.iter().map(|&c| c as f64 / total).collect());
    }
    Ok(Histogram {
        phis: phis.to_vec(),
        n,
        freq,
    })
}

/// Local maxima of a histogram column after a centered moving average of
/// half-width `smooth`. A peak must dominate `2 * smooth + 2` bins on each
/// side and reach a quarter of the tallest smoothed bin.
pub fn histogram_modes(column: &[f64], smooth: usize) -> Vec<usize> {
    let len = column.len();
    let smoothed: Vec<f64> = (0..len)
        .map(|i| {
            let lo = i.saturating_sub(smooth);
            let hi = (i + smooth).min(len - 1);
            column[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let top = smoothed.iter().cloned().fold(0.0, f64::max);
    let reach = 2 * smooth + 2;
    let mut modes = Vec::new();
    for i in 0..len {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(len - 1);
        let v = smoothed[i];
        // ties resolve to the leftmost bin
        let is_peak = (lo..=hi).all(|j| smoothed[j] < v || (smoothed[j] == v && j >= i));
        if is_peak && v >= 0.25 * top && v > 0.0 {
            modes.push(i);
        }
    }
    modes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingTime {
    /// Mean over uncensored replicates; a lower bound on the true mean.
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub censored: usize,
    pub completed: usize,
}

/// First hitting time of `round(s_to n)` from `round(s_from n)`, one
/// replicate per derived stream. Runs still going after `max_steps` are
/// censored and left out of the mean.
pub fn estimate_switching_time(
    spec: &DriftSpec,
    s_from: f64,
    s_to: f64,
    max_steps: u64,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<SwitchingTime, SimError> {
    let n = spec.n;
    let to_state = |s: f64| -> Result<usize, SimError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(SimError::Config(format!("consensus {s} outside [0, 1]")));
        }
        Ok((s * n as f64).round() as usize)
    };
    let (from, to) = (to_state(s_from)?, to_state(s_to)?);
    if replicates == 0 {
        return Err(SimError::Config("need at least one replicate".into()));
    }
    let times = map_indexed(replicates, exec, |i| {
        let mut rng = rng_for(seed, i as u64);
        let mut state = UrnState { b: from, n };
        let mut t = 0u64;
        while state.b != to {
            if t == max_steps {
                return None;
            }
            state = step(state, spec, &mut rng).0;
            t += 1;
        }
        Some(t)
    });
    let done: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    let censored = replicates - done.len();
    if done.is_empty() {
        return Err(SimError::AllCensored {
            replicates,
            max_steps,
        });
    }
    let k = done.len() as f64;
    let mean = done.iter().sum::<f64>() / k;
    let var = if done.len() > 1 {
        done.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(SwitchingTime {
        mean,
        std: var.sqrt(),
        stderr: (var / k).sqrt(),
        censored,
        completed: done.len(),
    })
}
