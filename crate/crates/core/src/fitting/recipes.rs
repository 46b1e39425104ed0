use serde::{Deserialize, Serialize};

use super::{levenberg_marquardt, Dataset, FitResult, LmOptions, ModelKind, ModelSpec, Row};
use crate::error::FitError;

/// `P(x) = A x^b exp(c x)` from the default start
/// `(max(y)/max(x), 1, -1/max(x))`, with `A >= 0`.
pub fn fit_performance(data: &Dataset) -> Result<FitResult, FitError> {
    levenberg_marquardt(&performance_spec(data)?, data, &LmOptions::default())
}

/// The model and start point [`fit_performance`] uses.
pub fn performance_spec(data: &Dataset) -> Result<ModelSpec, FitError> {
    check_rows(data, 4)?;
    let xmax = data.max_x();
    if !(xmax > 0.0) {
        return Err(FitError::Setup(
            "performance fits need positive x values".into(),
        ));
    }
    performance_spec_from([data.max_y() / xmax, 1.0, -1.0 / xmax])
}

fn performance_spec_from(init: [f64; 3]) -> Result<ModelSpec, FitError> {
    ModelSpec::new(ModelKind::Performance, &init)?.bound("a1a2", Some(0.0), None)
}

pub fn fit_performance_from(data: &Dataset, init: [f64; 3]) -> Result<FitResult, FitError> {
    check_rows(data, 4)?;
    levenberg_marquardt(&performance_spec_from(init)?, data, &LmOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    pub a2: f64,
    pub c: f64,
    pub d: f64,
}

impl InterferenceParams {
    pub fn from_fit(fit: &FitResult) -> Option<Self> {
        Some(InterferenceParams {
            a2: fit.get("a2")?,
            c: fit.get("c")?,
            d: fit.get("d")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedFit {
    pub interference: FitResult,
    pub performance: FitResult,
}

/// Fits `I(x) = a2 exp(c x) + d` to `random_data`, then the cooperation
/// factor `(a1, b)` of `a1 x^b a2 exp(c x)` to `full_data` with `a2, c` held.
pub fn fit_staged(random_data: &Dataset, full_data: &Dataset) -> Result<StagedFit, FitError> {
    let interference = fit_interference(random_data).map_err(|e| stage(1, e))?;
    let params =
        InterferenceParams::from_fit(&interference).expect("interference fit has a2, c, d");
    let performance = fit_cooperation(full_data, params, 4).map_err(|e| stage(2, e))?;
    Ok(StagedFit {
        interference,
        performance,
    })
}

/// Cooperation-only fit on `interval`, interference parameters held.
pub fn fit_narrow(
    data: &Dataset,
    interval: (f64, f64),
    fixed: InterferenceParams,
) -> Result<FitResult, FitError> {
    let (lo, hi) = interval;
    if !(lo <= hi) {
        return Err(FitError::Setup(format!("empty interval [{lo}, {hi}]")));
    }
    fit_cooperation(&data.restricted(lo, hi), fixed, 3)
}

pub fn fit_interference(data: &Dataset) -> Result<FitResult, FitError> {
    check_rows(data, 4)?;
    let ys = data.rows.iter().map(|r| r.y);
    let ymin = ys.clone().fold(f64::INFINITY, f64::min);
    let ymax = ys.fold(f64::NEG_INFINITY, f64::max);
    let xmean = data.rows.iter().map(|r| r.x).sum::<f64>() / data.len() as f64;
    let init = [
        (ymax - ymin).max(1e-12),
        -1.0 / xmean.abs().max(1e-12),
        ymin,
    ];
    let spec = ModelSpec::new(ModelKind::Interference, &init)?;
    levenberg_marquardt(&spec, data, &LmOptions::default())
}

fn fit_cooperation(
    data: &Dataset,
    fixed: InterferenceParams,
    min_rows: usize,
) -> Result<FitResult, FitError> {
    check_rows(data, min_rows)?;
    // start from the log-linear regression of y / (a2 e^{cx}) on x
    let pts: Vec<(f64, f64)> = data
        .rows
        .iter()
        .filter(|r| r.x > 0.0 && r.y > 0.0 && r.w > 0.0)
        .map(|r| (r.x.ln(), (r.y / (fixed.a2 * (fixed.c * r.x).exp())).ln()))
        .collect();
    let (a1, b) = match linear_regression(&pts) {
        Some((icpt, slope)) if icpt.is_finite() && slope.is_finite() => (icpt.exp(), slope),
        _ => (data.max_y() / fixed.a2, 1.0),
    };
    let spec = ModelSpec::new(ModelKind::StagedPerformance, &[a1, b, fixed.a2, fixed.c])?
        .fix("a2", fixed.a2)?
        .fix("c", fixed.c)?;
    levenberg_marquardt(&spec, data, &LmOptions::default())
}

/// `tau(N) = A N^b exp(c N)` with `c` free in sign, started from the
/// log-linear regression `ln tau = ln A + b ln N + c N`.
pub fn fit_switch_times(data: &Dataset) -> Result<FitResult, FitError> {
    levenberg_marquardt(&switch_time_spec(data)?, data, &LmOptions::default())
}

pub fn switch_time_spec(data: &Dataset) -> Result<ModelSpec, FitError> {
    check_rows(data, 4)?;
    let init = switch_time_init(data).unwrap_or([data.max_y() / data.max_x().max(1.0), 1.0, 0.0]);
    ModelSpec::new(ModelKind::SwitchTime, &init)
}

fn switch_time_init(data: &Dataset) -> Option<[f64; 3]> {
    let rows: Vec<&Row> = data
        .rows
        .iter()
        .filter(|r| r.x > 0.0 && r.y > 0.0 && r.w > 0.0)
        .collect();
    if rows.len() < 3 {
        return None;
    }
    // normal equations for the 3-column design [1, ln N, N]
    let mut a = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    for r in rows {
        let v = [1.0, r.x.ln(), r.x];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += v[i] * v[j];
            }
            g[i] += v[i] * r.y.ln();
        }
    }
    let a: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    let sol = super::linalg::solve_spd(&a, &g)?;
    let init = [sol[0].exp(), sol[1], sol[2]];
    init.iter().all(|v| v.is_finite()).then_some(init)
}

/// Weight thresholds for growth fits: weight 0 below `zero_below`,
/// `late_weight` from `double_from` on, 1 in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthWeighting {
    pub zero_below: f64,
    pub double_from: f64,
    pub late_weight: f64,
}

impl Default for GrowthWeighting {
    fn default() -> Self {
        GrowthWeighting {
            zero_below: 700.0,
            double_from: 3000.0,
            late_weight: 2.0,
        }
    }
}

impl GrowthWeighting {
    pub fn weight(&self, t: f64) -> f64 {
        if t < self.zero_below {
            0.0
        } else if t >= self.double_from {
            self.late_weight
        } else {
            1.0
        }
    }

    /// Rescales both thresholds, for time axes that differ by a constant factor.
    pub fn scaled(&self, factor: f64) -> Self {
        GrowthWeighting {
            zero_below: self.zero_below * factor,
            double_from: self.double_from * factor,
            ..*self
        }
    }
}

pub fn growth_weights(series: &[(f64, f64)], weighting: &GrowthWeighting) -> Dataset {
    Dataset::new(
        "feedback intensity",
        series
            .iter()
            .map(|&(t, y)| Row {
                x: t,
                y,
                w: weighting.weight(t),
            })
            .collect(),
    )
}

/// `phi(t) = a - exp(b t)` on a weighted series. The rate is started at
/// `-1 / t` for every weighted time `t` and the lowest chi-square is kept.
pub fn fit_feedback_growth(data: &Dataset) -> Result<FitResult, FitError> {
    check_rows(data, 3)?;
    let (a, times) = growth_starts(data);
    let mut best: Option<Result<FitResult, FitError>> = None;
    for t in times {
        let spec = ModelSpec::new(ModelKind::Growth, &[a, -1.0 / t])?;
        let fit = levenberg_marquardt(&spec, data, &LmOptions::default());
        let better = match (&best, &fit) {
            (None, _) => true,
            (Some(Err(_)), Ok(_)) => true,
            (Some(Ok(b)), Ok(f)) => (f.converged, -f.chi2) > (b.converged, -b.chi2),
            _ => false,
        };
        if better {
            best = Some(fit);
        }
    }
    best.expect("at least one start")
}

/// Single-start growth model, rate started at `-1 / t` for the latest
/// weighted time.
pub fn growth_spec(data: &Dataset) -> Result<ModelSpec, FitError> {
    check_rows(data, 3)?;
    let (a, times) = growth_starts(data);
    ModelSpec::new(ModelKind::Growth, &[a, -1.0 / times[times.len() - 1]])
}

fn growth_starts(data: &Dataset) -> (f64, Vec<f64>) {
    let active: Vec<&Row> = data.rows.iter().filter(|r| r.w > 0.0).collect();
    let a0 = active.iter().map(|r| r.y).fold(f64::NEG_INFINITY, f64::max);
    let a = if a0.is_finite() { a0 + 0.05 } else { 1.0 };
    let mut times: Vec<f64> = active
        .iter()
        .map(|r| r.x.abs())
        .filter(|t| *t > 0.0)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.is_empty() {
        times.push(1.0);
    }
    (a, times)
}

fn check_rows(data: &Dataset, min: usize) -> Result<(), FitError> {
    if data.effective_len() < min {
        return Err(FitError::NoDegreesOfFreedom {
            rows: data.effective_len(),
            free: min - 1,
        });
    }
    Ok(())
}

fn stage(n: usize, e: FitError) -> FitError {
    FitError::Stage {
        stage: n,
        source: Box::new(e),
    }
}

/// Ordinary least squares `y = icpt + slope x`.
fn linear_regression(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}
