//! Agent simulation of the density-classification scenario.
//!
//! Agents are red or green and remember the colors of the agents they
//! meet. After five stored observations an agent adopts the majority color
//! and clears its memory. One encounter happens per step. The consensus
//! variable is the red fraction; a green-to-red change is logged as `r_b`
//! and a red-to-green change as `r_r`, both at the pre-revision red count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::estimation::{feedback_timeseries, DriftWindow, FeedbackTimeSeries};
use crate::exec::{derive_seed, map_indexed, rng_for, Execution, SimRng};
use crate::urn::RevisionLog;
use crate::FitError;

pub const MEMORY_CAPACITY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentColor {
    Red,
    Green,
}

impl AgentColor {
    fn flipped(self) -> Self {
        match self {
            AgentColor::Red => AgentColor::Green,
            AgentColor::Green => AgentColor::Red,
        }
    }
}

/// Ring buffer of observed colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Memory {
    seen: [AgentColor; MEMORY_CAPACITY],
    len: u8,
}

impl Default for Memory {
    fn default() -> Self {
        Memory {
            seen: [AgentColor::Red; MEMORY_CAPACITY],
            len: 0,
        }
    }
}

impl Memory {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == MEMORY_CAPACITY
    }

    pub fn seen(&self) -> &[AgentColor] {
        &self.seen[..self.len()]
    }

    /// Stores an observation; a full buffer drops its oldest entry.
    pub fn push(&mut self, c: AgentColor) {
        if self.is_full() {
            self.seen.copy_within(1.., 0);
            self.seen[MEMORY_CAPACITY - 1] = c;
        } else {
            self.seen[self.len()] = c;
            self.len += 1;
        }
    }

    /// Strict majority among the stored colors.
    pub fn majority(&self) -> Option<AgentColor> {
        let red = self
            .seen()
            .iter()
            .filter(|&&c| c == AgentColor::Red)
            .count();
        let green = self.len() - red;
        match red.cmp(&green) {
            std::cmp::Ordering::Greater => Some(AgentColor::Red),
            std::cmp::Ordering::Less => Some(AgentColor::Green),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn clear(&mut self) {
        self.len = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub color: AgentColor,
    pub memory: Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mixing {
    /// Partners drawn uniformly from all other agents.
    WellMixed,
    /// Torus random walk; partners within Chebyshev distance `radius`.
    Grid {
        width: u32,
        height: u32,
        radius: u32,
    },
}

/// What a failed recognition does to the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RecognitionNoise {
    /// The observation is discarded.
    #[default]
    Drop,
    /// The opposite color is stored.
    Misread,
}

/// Window layout over `[0, steps]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindowSpec {
    Uniform {
        width: u64,
    },
    /// Windows ending at `first, 2 first, 4 first, ...` and at `steps`.
    Doubling {
        first: u64,
    },
    /// Window end points, strictly increasing.
    Explicit(Vec<u64>),
}

impl WindowSpec {
    /// Window end points; the last one is always `steps`.
    pub fn ends(&self, steps: u64) -> Result<Vec<u64>, SimError> {
        let mut ends = Vec::new();
        match self {
            WindowSpec::Uniform { width } => {
                if *width == 0 {
                    return Err(SimError::Config("window width must be positive".into()));
                }
                let mut t = *width;
                while t < steps {
                    ends.push(t);
                    t += width;
                }
            }
            WindowSpec::Doubling { first } => {
                if *first == 0 {
                    return Err(SimError::Config("first window must be positive".into()));
                }
                let mut t = *first;
                while t < steps {
                    ends.push(t);
                    t = t.saturating_mul(2);
                }
            }
            WindowSpec::Explicit(list) => {
                if list.windows(2).any(|w| w[1] <= w[0]) || list.first() == Some(&0) {
                    return Err(SimError::Config(
                        "window ends must be positive and strictly increasing".into(),
                    ));
                }
                if list.last().is_some_and(|&t| t > steps) {
                    return Err(SimError::Config(format!("window end beyond {steps} steps")));
                }
                ends.extend(list.iter().copied().filter(|&t| t < steps));
            }
        }
        ends.push(steps);
        Ok(ends)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub agents: usize,
    pub recognition: f64,
    pub steps: u64,
    pub seed: u64,
    pub mixing: Mixing,
    /// Initial red fraction; `round(s0 agents)` agents start red.
    pub s0: f64,
    pub windows: WindowSpec,
    pub noise: RecognitionNoise,
    /// Observations of uniformly random color each agent starts with.
    pub primed_memory: usize,
    /// Record the red fraction every this many steps.
    pub trajectory_stride: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            agents: 64,
            recognition: 0.8,
            steps: 10_000,
            seed: 0,
            mixing: Mixing::WellMixed,
            s0: 0.5,
            windows: WindowSpec::Uniform { width: 1000 },
            noise: RecognitionNoise::Drop,
            primed_memory: 0,
            trajectory_stride: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.agents < 2 {
            return bad(format!("{} agents, need at least 2", self.agents));
        }
        if !(0.0..=1.0).contains(&self.recognition) {
            return bad(format!(
                "recognition rate {} outside [0, 1]",
                self.recognition
            ));
        }
        if !(0.0..=1.0).contains(&self.s0) {
            return bad(format!("initial red fraction {} outside [0, 1]", self.s0));
        }
        if self.primed_memory >= MEMORY_CAPACITY {
            return bad(format!(
                "primed memory {} must be below {MEMORY_CAPACITY}",
                self.primed_memory
            ));
        }
        if self.trajectory_stride == 0 {
            return bad("trajectory stride must be positive".into());
        }
        if let Mixing::Grid { width, height, .. } = self.mixing {
            if width == 0 || height == 0 {
                return bad("grid dimensions must be positive".into());
            }
        }
        self.windows.ends(self.steps)?;
        Ok(())
    }

    pub fn initial_red(&self) -> usize {
        (self.s0 * self.agents as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcState {
    pub agents: Vec<Agent>,
    pub red: usize,
    /// Grid positions, present only for grid mixing.
    pub positions: Option<Vec<(u32, u32)>>,
}

impl DcState {
    pub fn new<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Self, SimError> {
        config.validate()?;
        let red = config.initial_red();
        let agents = (0..config.agents)
            .map(|i| {
                let mut memory = Memory::default();
                for _ in 0..config.primed_memory {
                    memory.push(if rng.random::<bool>() {
                        AgentColor::Red
                    } else {
                        AgentColor::Green
                    });
                }
                Agent {
                    color: if i < red {
                        AgentColor::Red
                    } else {
                        AgentColor::Green
                    },
                    memory,
                }
            })
            .collect();
        let positions = match config.mixing {
            Mixing::WellMixed => None,
            Mixing::Grid { width, height, .. } => Some(
                (0..config.agents)
                    .map(|_| (rng.random_range(0..width), rng.random_range(0..height)))
                    .collect(),
            ),
        };
        Ok(DcState {
            agents,
            red,
            positions,
        })
    }

    pub fn red_fraction(&self) -> f64 {
        self.red as f64 / self.agents.len() as f64
    }
}

/// Steps after which, with probability 0.9, every agent has made at least
/// one revision decision on a memory filled only by its own observations.
///
/// Observations arrive as a Poisson stream of rate `r / agents` per agent
/// (`r` is 1 with misreads and the recognition rate with drops). Primed
/// agents first spend one decision on their random memory.
pub fn transient_steps(config: &ScenarioConfig) -> u64 {
    let k = config.primed_memory;
    let needed = if k > 0 {
        2 * MEMORY_CAPACITY - k
    } else {
        MEMORY_CAPACITY
    } as u32;
    let rate = match config.noise {
        RecognitionNoise::Misread => 1.0,
        RecognitionNoise::Drop => config.recognition,
    };
    if rate <= 0.0 {
        return u64::MAX;
    }
    let all_done = |lambda: f64| poisson_tail(lambda, needed).powi(config.agents as i32) >= 0.9;
    let (mut lo, mut hi) = (0.0, 1.0);
    while !all_done(hi) {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if all_done(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi * config.agents as f64 / rate).ceil() as u64
}

/// `P(X >= m)` for `X ~ Poisson(lambda)`.
fn poisson_tail(lambda: f64, m: u32) -> f64 {
    let mut term = (-lambda).exp();
    let mut below = 0.0;
    for j in 0..m {
        below += term;
        term *= lambda / f64::from(j + 1);
    }
    (1.0 - below).max(0.0)
}

/// A color change, at the red count before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub agent: usize,
    pub red_before: usize,
    /// `+1` green to red, `-1` red to green.
    pub delta: i8,
}

fn torus_gap(a: u32, b: u32, size: u32) -> u32 {
    let d = a.abs_diff(b);
    d.min(size - d)
}

fn pick_partner<R: Rng + ?Sized>(
    state: &mut DcState,
    config: &ScenarioConfig,
    observer: usize,
    rng: &mut R,
) -> Option<usize> {
    let n = state.agents.len();
    match (config.mixing, state.positions.as_mut()) {
        (
            Mixing::Grid {
                width,
                height,
                radius,
            },
            Some(pos),
        ) => {
            for p in pos.iter_mut() {
                match rng.random_range(0..4u8) {
                    0 => p.0 = (p.0 + 1) % width,
                    1 => p.0 = (p.0 + width - 1) % width,
                    2 => p.1 = (p.1 + 1) % height,
                    _ => p.1 = (p.1 + height - 1) % height,
                }
            }
            let (ox, oy) = pos[observer];
            let near: Vec<usize> = (0..n)
                .filter(|&j| {
                    j != observer
                        && torus_gap(pos[j].0, ox, width) <= radius
                        && torus_gap(pos[j].1, oy, height) <= radius
                })
                .collect();
            (!near.is_empty()).then(|| near[rng.random_range(0..near.len())])
        }
        _ => {
            let j = rng.random_range(0..n - 1);
            Some(if j >= observer { j + 1 } else { j })
        }
    }
}

/// One encounter; returns the revision it caused, if any.
pub fn dc_step<R: Rng + ?Sized>(
    state: &mut DcState,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Option<Revision> {
    let observer = rng.random_range(0..state.agents.len());
    let partner = pick_partner(state, config, observer, rng)?;
    let recognized = rng.random::<f64>() < config.recognition;
    let seen = match (recognized, config.noise) {
        (true, _) => state.agents[partner].color,
        (false, RecognitionNoise::Drop) => return None,
        (false, RecognitionNoise::Misread) => state.agents[partner].color.flipped(),
    };
    let agent = &mut state.agents[observer];
    agent.memory.push(seen);
    if !agent.memory.is_full() {
        return None;
    }
    let verdict = agent.memory.majority().expect("odd capacity has no ties");
    agent.memory.clear();
    if verdict == agent.color {
        return None;
    }
    agent.color = verdict;
    let red_before = state.red;
    let delta = if verdict == AgentColor::Red {
        state.red += 1;
        1
    } else {
        state.red -= 1;
        -1
    };
    Some(Revision {
        agent: observer,
        red_before,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowLog {
    /// Steps `start + 1 ..= end` belong to the window.
    pub start: u64,
    pub end: u64,
    pub log: RevisionLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcRun {
    /// `(t, red fraction after step t)`, starting at `t = 0`.
    pub trajectory: Vec<(u64, f64)>,
    pub windows: Vec<WindowLog>,
    pub revisions: u64,
    pub final_red: usize,
}

/// Runs the scenario from the RNG stream `rng_for(seed, 0)`.
pub fn dc_run(config: &ScenarioConfig) -> Result<DcRun, SimError> {
    dc_run_stream(config, 0)
}

fn dc_run_stream(config: &ScenarioConfig, stream: u64) -> Result<DcRun, SimError> {
    let mut rng: SimRng = rng_for(config.seed, stream);
    let mut state = DcState::new(config, &mut rng)?;
    let ends = config.windows.ends(config.steps)?;
    let n = config.agents;
    let mut windows = Vec::with_capacity(ends.len());
    let mut trajectory = vec![(0, state.red_fraction())];
    let mut revisions = 0;
    let mut start = 0;
    for &end in &ends {
        let mut log = RevisionLog::new(n);
        for t in start + 1..=end {
            let before = state.red;
            match dc_step(&mut state, config, &mut rng) {
                Some(rev) => {
                    log.record(rev.red_before, rev.delta);
                    revisions += 1;
                }
                None => log.record(before, 0),
            }
            if t % config.trajectory_stride == 0 || t == config.steps {
                trajectory.push((t, state.red_fraction()));
            }
        }
        windows.push(WindowLog { start, end, log });
        start = end;
    }
    Ok(DcRun {
        trajectory,
        windows,
        revisions,
        final_red: state.red,
    })
}

/// One run per initial fraction in `s0_grid`, each on its own stream
/// derived from `config.seed`.
pub fn dc_batch(
    config: &ScenarioConfig,
    s0_grid: &[f64],
    exec: Execution,
) -> Result<Vec<DcRun>, SimError> {
    config.validate()?;
    let configs: Vec<ScenarioConfig> = s0_grid
        .iter()
        .enumerate()
        .map(|(i, &s0)| ScenarioConfig {
            s0,
            seed: derive_seed(config.seed, i as u64),
            ..config.clone()
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    map_indexed(configs.len(), exec, |i| dc_run(&configs[i]))
        .into_iter()
        .collect()
}

/// Window-by-window sum of the logs of several runs with equal layout.
pub fn merge_windows(runs: &[DcRun]) -> Vec<WindowLog> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let mut merged = first.windows.clone();
    for run in &runs[1..] {
        for (m, w) in merged.iter_mut().zip(&run.windows) {
            m.log.merge(&w.log);
        }
    }
    merged
}

/// Fitted feedback intensity per window of merged logs.
pub fn phi_series(windows: &[WindowLog], exec: Execution) -> Result<FeedbackTimeSeries, FitError> {
    let tables: Vec<DriftWindow> = windows
        .iter()
        .map(|w| DriftWindow::from_log(w.end as f64, &w.log))
        .collect();
    feedback_timeseries(&tables, exec)
}
