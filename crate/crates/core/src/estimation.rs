//! From observed revision counts back to drift, feedback probability,
//! fitted profiles and predicted steady states.

use serde::{Deserialize, Serialize};

use crate::error::{FitError, MarkovError};
use crate::exec::{map_indexed, Execution};
use crate::fitting::{
    self, levenberg_marquardt, Dataset, FitResult, GrowthWeighting, LmOptions, ModelKind,
    ModelSpec, Row,
};
use crate::markov::{build_transition, steady_state, SteadyState};
use crate::model::{DriftSpec, FeedbackProfile, PayoffProfile};
use crate::urn::RevisionLog;

/// One row of a measured drift table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub s: f64,
    pub drift: f64,
    /// Revisions behind the estimate.
    pub samples: u64,
}

/// `2 r_b / (r_b + r_r) - 1` at every state with at least one revision.
pub fn revision_ratio_to_drift(log: &RevisionLog) -> Vec<DriftPoint> {
    (0..=log.n)
        .filter_map(|b| {
            let total = log.r_b[b] + log.r_r[b];
            (total > 0).then(|| DriftPoint {
                s: b as f64 / log.n as f64,
                drift: 2.0 * log.r_b[b] as f64 / total as f64 - 1.0,
                samples: total,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateMarker {
    UndefinedAtPole,
    /// The ratio implies a probability outside `[0, 1]`.
    OutOfDomain,
    InsufficientSamples,
    /// `s = 0` or `s = 1`, where only one revision direction exists.
    Boundary,
}

impl EstimateMarker {
    pub fn label(self) -> &'static str {
        match self {
            EstimateMarker::UndefinedAtPole => "undefined-at-pole",
            EstimateMarker::OutOfDomain => "out-of-domain",
            EstimateMarker::InsufficientSamples => "insufficient-samples",
            EstimateMarker::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatePoint {
    pub s: f64,
    /// `P(s)` when defined.
    pub value: Option<f64>,
    /// The unclamped inversion, kept for out-of-domain reporting.
    pub raw: Option<f64>,
    pub marker: Option<EstimateMarker>,
    /// Within the pole mask: defined but excluded from fits.
    pub high_variance: bool,
    pub samples: u64,
}

impl EstimatePoint {
    pub fn usable(&self) -> bool {
        self.value.is_some() && !self.high_variance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEstimate {
    pub n: usize,
    pub pole_mask: f64,
    pub points: Vec<EstimatePoint>,
}

impl FeedbackEstimate {
    pub fn usable(&self) -> impl Iterator<Item = &EstimatePoint> {
        self.points.iter().filter(|p| p.usable())
    }
}

/// Inverts `ratio = 1 - s - P + 2 s P` for `P`.
pub fn invert_ratio(ratio: f64, s: f64) -> f64 {
    (ratio - 1.0 + s) / (2.0 * s - 1.0)
}

/// Expected `r_b / (r_b + r_r)` under profile value `p` at consensus `s`.
pub fn expected_ratio(p: f64, s: f64) -> f64 {
    s * p + (1.0 - s) * (1.0 - p)
}

pub fn default_pole_mask(n: usize) -> f64 {
    1.5 / n as f64
}

pub fn estimate_feedback(log: &RevisionLog) -> FeedbackEstimate {
    estimate_feedback_with(log, default_pole_mask(log.n))
}

pub fn estimate_feedback_with(log: &RevisionLog, pole_mask: f64) -> FeedbackEstimate {
    let n = log.n;
    let points = (0..=n)
        .map(|b| {
            let s = b as f64 / n as f64;
            let samples = log.r_b[b] + log.r_r[b];
            let mut point = EstimatePoint {
                s,
                value: None,
                raw: None,
                marker: None,
                high_variance: false,
                samples,
            };
            if 2 * b == n {
                point.marker = Some(EstimateMarker::UndefinedAtPole);
            } else if b == 0 || b == n {
                point.marker = Some(EstimateMarker::Boundary);
            } else if samples == 0 {
                point.marker = Some(EstimateMarker::InsufficientSamples);
            } else {
                let ratio = log.r_b[b] as f64 / samples as f64;
                let p = invert_ratio(ratio, s);
                point.raw = Some(p);
                if (-1e-12..=1.0 + 1e-12).contains(&p) {
                    point.value = Some(p.clamp(0.0, 1.0));
                } else {
                    point.marker = Some(EstimateMarker::OutOfDomain);
                }
                point.high_variance = (s - 0.5).abs() <= pole_mask + 1e-12;
            }
            point
        })
        .collect();
    FeedbackEstimate {
        n,
        pole_mask,
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileFamily {
    Sine,
    Quadratic,
    Rational,
}

/// Least-squares fit of a profile family to the usable estimate points,
/// with parameters held in their valid ranges by clamp-and-refit.
pub fn fit_feedback_profile(
    estimate: &FeedbackEstimate,
    family: ProfileFamily,
) -> Result<(FeedbackProfile, FitResult), FitError> {
    let data = Dataset::from_xy(
        "feedback estimate",
        estimate.usable().map(|p| (p.s, p.value.unwrap_or(0.0))),
    );
    if data.len() < 3 {
        return Err(FitError::NoDegreesOfFreedom {
            rows: data.len(),
            free: 2,
        });
    }
    let ymax = data.max_y().clamp(0.0, 1.0);
    let spec = match family {
        ProfileFamily::Sine => {
            ModelSpec::new(ModelKind::SineFeedback, &[ymax])?.bound("phi", Some(0.0), Some(1.0))?
        }
        ProfileFamily::Quadratic => ModelSpec::new(ModelKind::QuadraticFeedback, &[ymax])?.bound(
            "phi",
            Some(0.0),
            Some(1.0),
        )?,
        ProfileFamily::Rational => ModelSpec::new(ModelKind::RationalFeedback, &[ymax, 10.0])?
            .bound("c1", Some(0.0), Some(1.0))?
            .bound("c2", Some(0.0), None)?,
    };
    let fit = levenberg_marquardt(&spec, &data, &LmOptions::default())?;
    let v = &fit.values;
    let profile = match family {
        ProfileFamily::Sine => FeedbackProfile::Sine { phi: v[0] },
        ProfileFamily::Quadratic => FeedbackProfile::Quadratic { phi: v[0] },
        ProfileFamily::Rational => FeedbackProfile::Rational { c1: v[0], c2: v[1] },
    };
    Ok((profile, fit))
}

pub fn predict_steady_state(
    profile: &FeedbackProfile,
    payoff: &PayoffProfile,
    n: usize,
) -> Result<SteadyState, MarkovError> {
    let spec = DriftSpec::new(profile.clone(), *payoff, n)
        .map_err(|e| MarkovError::Degenerate(e.to_string()))?;
    steady_state(&build_transition(&spec)?)
}

/// A drift table observed during one time window ending at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftWindow {
    pub t: f64,
    pub points: Vec<DriftPoint>,
}

impl DriftWindow {
    pub fn from_log(t: f64, log: &RevisionLog) -> Self {
        DriftWindow {
            t,
            points: revision_ratio_to_drift(log),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub phi: f64,
    pub phi_stderr: f64,
    pub c2: f64,
    pub rms: f64,
    pub dof: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackTimeSeries {
    pub points: Vec<SeriesPoint>,
    /// Windows whose fit failed, with the reason.
    pub skipped: Vec<(f64, String)>,
}

impl FeedbackTimeSeries {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.t, p.phi)).collect()
    }
}

/// How drift rows enter the per-window fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowWeighting {
    /// Every state counts once, as in a plain curve fit of the table.
    Uniform,
    /// Rows weighted by their revision counts.
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub weighting: RowWeighting,
    /// States with fewer revisions in a window are left out of its fit.
    pub min_samples: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            weighting: RowWeighting::Uniform,
            min_samples: 10,
        }
    }
}

/// Per window, fits `4 c2 (phi sin(pi s) - 0.5)(s - 0.5)` to the drift table
/// with `phi` held in `[0, 1]` and `c2 >= 0`.
pub fn feedback_timeseries(
    windows: &[DriftWindow],
    exec: Execution,
) -> Result<FeedbackTimeSeries, FitError> {
    feedback_timeseries_with(windows, &SeriesOptions::default(), exec)
}

pub fn feedback_timeseries_with(
    windows: &[DriftWindow],
    options: &SeriesOptions,
    exec: Execution,
) -> Result<FeedbackTimeSeries, FitError> {
    if windows.is_empty() {
        return Err(FitError::Setup("no windows".into()));
    }
    if windows.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(FitError::Setup(
            "window times must be strictly increasing".into(),
        ));
    }
    let fits = map_indexed(windows.len(), exec, |i| {
        fit_drift_window(&windows[i], options)
    });
    let mut series = FeedbackTimeSeries {
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for (w, fit) in windows.iter().zip(fits) {
        match fit {
            Ok(p) => series.points.push(p),
            Err(e) => series.skipped.push((w.t, e.to_string())),
        }
    }
    Ok(series)
}

pub fn fit_drift_window(
    window: &DriftWindow,
    options: &SeriesOptions,
) -> Result<SeriesPoint, FitError> {
    let rows: Vec<Row> = window
        .points
        .iter()
        .filter(|p| p.samples >= options.min_samples.max(1))
        .map(|p| {
            let w = match options.weighting {
                RowWeighting::Uniform => 1.0,
                RowWeighting::Counts => p.samples as f64,
            };
            Row {
                x: p.s,
                y: p.drift,
                w,
            }
        })
        .collect();
    let data = Dataset::new(format!("drift t={}", window.t), rows);
    let spec = ModelSpec::new(ModelKind::Drift, &[1.0, 0.5])?
        .bound("phi", Some(0.0), Some(1.0))?
        .bound("c2", Some(0.0), None)?;
    let fit = levenberg_marquardt(&spec, &data, &LmOptions::default())?;
    if fit.values[0] == 0.0 {
        return Err(FitError::Setup(
            "drift vanishes in this window, phi is not identifiable".into(),
        ));
    }
    Ok(SeriesPoint {
        t: window.t,
        phi: fit.values[1],
        phi_stderr: fit.stderr[1],
        c2: fit.values[0],
        rms: fit.rms,
        dof: fit.dof,
    })
}

/// Fits `phi(t) = a - exp(b t)` to a series under `weighting`.
pub fn fit_feedback_growth(
    series: &FeedbackTimeSeries,
    weighting: &GrowthWeighting,
) -> Result<FitResult, FitError> {
    fitting::fit_feedback_growth(&fitting::growth_weights(&series.pairs(), weighting))
}
