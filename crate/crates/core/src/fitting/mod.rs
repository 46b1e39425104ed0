//! Weighted Levenberg–Marquardt least squares with fixed-parameter masks,
//! box bounds and asymptotic standard errors, plus the named fit recipes.

mod linalg;
mod models;
mod recipes;
mod report;

pub use models::ModelKind;
pub use recipes::{
    fit_feedback_growth, fit_interference, fit_narrow, fit_performance, fit_performance_from,
    fit_staged, fit_switch_times, growth_spec, growth_weights, performance_spec, switch_time_spec,
    GrowthWeighting, InterferenceParams, StagedFit,
};
pub use report::format_g;

use serde::{Deserialize, Serialize};

use crate::error::FitError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, rows: Vec<Row>) -> Self {
        Dataset {
            name: name.into(),
            rows,
        }
    }

    /// Unit weights.
    pub fn from_xy(name: impl Into<String>, xy: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Dataset::new(
            name,
            xy.into_iter().map(|(x, y)| Row { x, y, w: 1.0 }).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows with positive weight.
    pub fn effective_len(&self) -> usize {
        self.rows.iter().filter(|r| r.w > 0.0).count()
    }

    pub fn restricted(&self, lo: f64, hi: f64) -> Dataset {
        Dataset::new(
            format!("{} [{lo}, {hi}]", self.name),
            self.rows
                .iter()
                .copied()
                .filter(|r| r.x >= lo && r.x <= hi)
                .collect(),
        )
    }

    pub fn max_x(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.x)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_y(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.y)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    /// Initial value, or the held value when `fixed`.
    pub value: f64,
    pub fixed: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// A model family with its parameter vector, fixed mask and bounds.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: Vec<ParamSpec>,
}

impl ModelSpec {
    /// All parameters free and unbounded, starting from `init`.
    pub fn new(kind: ModelKind, init: &[f64]) -> Result<Self, FitError> {
        let names = kind.param_names();
        if names.len() != init.len() {
            return Err(FitError::Setup(format!(
                "{} expects {} parameters, got {}",
                kind.formula(),
                names.len(),
                init.len()
            )));
        }
        let params = names
            .into_iter()
            .zip(init)
            .map(|(name, &value)| ParamSpec {
                name,
                value,
                fixed: false,
                lower: None,
                upper: None,
            })
            .collect();
        Ok(ModelSpec { kind, params })
    }

    fn index(&self, name: &str) -> Result<usize, FitError> {
        self.params
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| {
                FitError::Setup(format!(
                    "unknown parameter {name:?} for {}",
                    self.kind.formula()
                ))
            })
    }

    pub fn fix(mut self, name: &str, value: f64) -> Result<Self, FitError> {
        let i = self.index(name)?;
        self.params[i].value = value;
        self.params[i].fixed = true;
        Ok(self)
    }

    pub fn with_init(mut self, name: &str, value: f64) -> Result<Self, FitError> {
        let i = self.index(name)?;
        self.params[i].value = value;
        Ok(self)
    }

    pub fn bound(
        mut self,
        name: &str,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Result<Self, FitError> {
        let i = self.index(name)?;
        self.params[i].lower = lower;
        self.params[i].upper = upper;
        Ok(self)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    pub fn free_count(&self) -> usize {
        self.params.iter().filter(|p| !p.fixed).count()
    }

    fn validate(&self) -> Result<(), FitError> {
        if self.free_count() == 0 {
            return Err(FitError::NothingToFit);
        }
        for p in &self.params {
            if let (Some(lo), Some(hi)) = (p.lower, p.upper) {
                if lo > hi {
                    return Err(FitError::Setup(format!(
                        "{}: lower bound {lo} above upper {hi}",
                        p.name
                    )));
                }
            }
            if !p.value.is_finite() {
                return Err(FitError::Setup(format!(
                    "{}: non-finite initial value",
                    p.name
                )));
            }
            if p.lower.is_some_and(|lo| p.value < lo) || p.upper.is_some_and(|hi| p.value > hi) {
                return Err(FitError::Setup(format!(
                    "{}: initial value {} outside its bounds",
                    p.name, p.value
                )));
            }
        }
        Ok(())
    }

    fn clamp(&self, i: usize, v: f64) -> f64 {
        let p = &self.params[i];
        let v = p.lower.map_or(v, |lo| v.max(lo));
        p.upper.map_or(v, |hi| v.min(hi))
    }

    pub fn eval(&self, x: f64, p: &[f64]) -> f64 {
        self.kind.eval(x, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub lambda0: f64,
    pub lambda_factor: f64,
    pub max_iter: usize,
    /// Relative chi-square decrease below which an accepted step ends the fit.
    pub rel_tol: f64,
    /// Largest damping tried before giving up on a step.
    pub lambda_max: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            lambda0: 1e-3,
            lambda_factor: 10.0,
            max_iter: 200,
            rel_tol: 1e-9,
            lambda_max: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub function: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub initial: Vec<f64>,
    /// Zero for parameters that were held fixed.
    pub stderr: Vec<f64>,
    pub fixed: Vec<bool>,
    /// Free parameters that ended clamped at a bound and were refit as fixed.
    pub at_bound: Vec<bool>,
    pub chi2: f64,
    /// `sqrt(chi2 / dof)`
    pub rms: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

impl FitResult {
    /// `100 stderr / |value|`
    pub fn percent_errors(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.stderr)
            .map(|(v, e)| {
                if *v == 0.0 {
                    f64::INFINITY
                } else {
                    100.0 * e / v.abs()
                }
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.stderr[i])
    }
}

pub(crate) fn chi2(model: &ModelSpec, data: &Dataset, p: &[f64]) -> f64 {
    data.rows
        .iter()
        .map(|r| {
            let d = r.y - model.eval(r.x, p);
            r.w * d * d
        })
        .sum()
}

/// Central-difference Jacobian over the free parameters, step
/// `1e-6 max(|p_j|, 1)`; `jac[row][k]` for the `k`-th free parameter.
pub fn jacobian(model: &ModelSpec, data: &Dataset, p: &[f64], free: &[usize]) -> Vec<Vec<f64>> {
    jacobian_with_step(model, data, p, free, 1e-6)
}

pub fn jacobian_with_step(
    model: &ModelSpec,
    data: &Dataset,
    p: &[f64],
    free: &[usize],
    rel: f64,
) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; free.len()]; data.rows.len()];
    let mut q = p.to_vec();
    for (k, &j) in free.iter().enumerate() {
        let h = rel * p[j].abs().max(1.0);
        q[j] = p[j] + h;
        let plus: Vec<f64> = data.rows.iter().map(|r| model.eval(r.x, &q)).collect();
        q[j] = p[j] - h;
        for (i, r) in data.rows.iter().enumerate() {
            jac[i][k] = (plus[i] - model.eval(r.x, &q)) / (2.0 * h);
        }
        q[j] = p[j];
    }
    jac
}

/// Asymptotic standard errors: `sqrt(diag((J^T W J)^-1) * chi2 / dof)`.
/// A singular normal matrix yields infinite errors rather than a failure.
pub fn asymptotic_stderr(
    jac: &[Vec<f64>],
    weights: &[f64],
    residuals: &[f64],
    dof: usize,
) -> Result<Vec<f64>, FitError> {
    let k = jac.first().map_or(0, |r| r.len());
    if dof < 1 {
        return Err(FitError::NoDegreesOfFreedom {
            rows: residuals.len(),
            free: k,
        });
    }
    let chi2: f64 = residuals.iter().zip(weights).map(|(r, w)| w * r * r).sum();
    let variance = chi2 / dof as f64;
    let normal = linalg::normal_matrix(jac, weights);
    Ok(match linalg::invert_spd(&normal) {
        Some(inv) => (0..k)
            .map(|i| (inv[i][i].max(0.0) * variance).sqrt())
            .collect(),
        None => vec![f64::INFINITY; k],
    })
}

/// Minimizes `sum w (y - f(x; p))^2` over the free parameters of `model`.
pub fn levenberg_marquardt(
    model: &ModelSpec,
    data: &Dataset,
    options: &LmOptions,
) -> Result<FitResult, FitError> {
    model.validate()?;
    // a canonical row order makes the result independent of input order
    let mut sorted = data.clone();
    sorted.rows.sort_by(|a, b| {
        a.x.total_cmp(&b.x)
            .then(a.y.total_cmp(&b.y))
            .then(a.w.total_cmp(&b.w))
    });
    let data = &sorted;
    let originally_fixed: Vec<bool> = model.params.iter().map(|p| p.fixed).collect();
    let initial = model.values();
    let mut model = model.clone();
    let mut at_bound = vec![false; model.params.len()];
    loop {
        let mut result = if model.free_count() > 0 {
            lm_core(&model, data, options)?
        } else {
            fixed_point(&model, data)?
        };
        // clamp-and-refit: a free parameter resting on a bound is held there
        let mut refit = false;
        for (i, p) in model.params.iter_mut().enumerate() {
            if p.fixed {
                continue;
            }
            let v = result.values[i];
            let on_bound = p.lower.is_some_and(|lo| v <= lo) || p.upper.is_some_and(|hi| v >= hi);
            if on_bound {
                p.fixed = true;
                p.value = v;
                at_bound[i] = true;
                refit = true;
            }
        }
        if refit {
            continue;
        }
        result.at_bound = at_bound;
        result.fixed = originally_fixed;
        result.initial = initial;
        return Ok(result);
    }
}

/// Every parameter pinned, at a bound or by the caller: report the point.
fn fixed_point(model: &ModelSpec, data: &Dataset) -> Result<FitResult, FitError> {
    let rows = data.effective_len();
    if rows == 0 {
        return Err(FitError::NoDegreesOfFreedom { rows, free: 0 });
    }
    let p = model.values();
    let c = chi2(model, data, &p);
    Ok(FitResult {
        function: model.kind.formula(),
        names: model.params.iter().map(|q| q.name.clone()).collect(),
        values: p.clone(),
        initial: p,
        stderr: vec![0.0; model.params.len()],
        fixed: vec![true; model.params.len()],
        at_bound: vec![false; model.params.len()],
        chi2: c,
        rms: (c / rows as f64).sqrt(),
        dof: rows,
        iterations: 0,
        converged: true,
        trace: vec![c],
    })
}

fn lm_core(model: &ModelSpec, data: &Dataset, options: &LmOptions) -> Result<FitResult, FitError> {
    let free: Vec<usize> = (0..model.params.len())
        .filter(|&i| !model.params[i].fixed)
        .collect();
    let rows = data.effective_len();
    if rows <= free.len() {
        return Err(FitError::NoDegreesOfFreedom {
            rows,
            free: free.len(),
        });
    }
    let dof = rows - free.len();
    let weights: Vec<f64> = data.rows.iter().map(|r| r.w).collect();

    let initial = model.values();
    let mut p = initial.clone();
    let mut current = chi2(model, data, &p);
    if !current.is_finite() {
        return Err(FitError::Setup(
            "model is not finite at the initial parameters".into(),
        ));
    }
    let mut lambda = options.lambda0;
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        iterations += 1;
        if current == 0.0 {
            converged = true;
            break;
        }
        let jac = jacobian(model, data, &p, &free);
        let resid: Vec<f64> = data
            .rows
            .iter()
            .map(|r| r.y - model.eval(r.x, &p))
            .collect();
        let a = linalg::normal_matrix(&jac, &weights);
        let g: Vec<f64> = (0..free.len())
            .map(|k| {
                (0..data.rows.len())
                    .map(|i| jac[i][k] * weights[i] * resid[i])
                    .sum()
            })
            .collect();

        let mut accepted = false;
        loop {
            let mut damped = a.clone();
            for k in 0..free.len() {
                let d = a[k][k];
                damped[k][k] = d + lambda * if d > 0.0 { d } else { 1.0 };
            }
            if let Some(delta) = linalg::solve_spd(&damped, &g) {
                let mut trial = p.clone();
                for (k, &j) in free.iter().enumerate() {
                    trial[j] = model.clamp(j, p[j] + delta[k]);
                }
                let next = chi2(model, data, &trial);
                if next.is_finite() && next <= current {
                    let rel = (current - next) / current.max(f64::MIN_POSITIVE);
                    p = trial;
                    current = next;
                    trace.push(current);
                    lambda = (lambda / options.lambda_factor).max(1e-15);
                    accepted = true;
                    if rel < options.rel_tol {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= options.lambda_factor;
            if lambda > options.lambda_max {
                break;
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // no damping level lowers chi2: either we sit at the minimum to
            // working precision or the normal equations are hopeless
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = a
                .iter()
                .enumerate()
                .map(|(k, r)| r[k])
                .fold(0.0, f64::max)
                .sqrt()
                * current.sqrt();
            if gnorm <= 1e-6 * scale.max(f64::MIN_POSITIVE) || trace.len() > 1 {
                converged = true;
                break;
            }
            return Err(FitError::NotConverged {
                reason: "damping exceeded its limit without lowering chi-square".into(),
                iterations,
                trace,
            });
        }
    }

    let jac = jacobian(model, data, &p, &free);
    let resid: Vec<f64> = data
        .rows
        .iter()
        .map(|r| r.y - model.eval(r.x, &p))
        .collect();
    let free_err = asymptotic_stderr(&jac, &weights, &resid, dof)?;
    let mut stderr = vec![0.0; p.len()];
    for (k, &j) in free.iter().enumerate() {
        stderr[j] = free_err[k];
    }
    Ok(FitResult {
        function: model.kind.formula(),
        names: model.params.iter().map(|q| q.name.clone()).collect(),
        values: p,
        initial,
        stderr,
        fixed: model.params.iter().map(|q| q.fixed).collect(),
        at_bound: vec![false; model.params.len()],
        chi2: current,
        rms: (current / dof as f64).sqrt(),
        dof,
        iterations,
        converged,
        trace,
    })
}
