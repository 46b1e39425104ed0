//! Birth–death Markov chain of the urn: transition matrix, stationary
//! distribution, splitting probabilities and mean first passage times.
//!
//! States are blue counts `0..=n`. The matrix is column-stochastic: column
//! `j` holds the outgoing probabilities of state `j`. Every step moves by
//! exactly one marble except at the two boundaries, which keep the remainder
//! as a self-loop.

use serde::{Deserialize, Serialize};

use crate::error::MarkovError;
use crate::model::DriftSpec;

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: usize,
    up: Vec<f64>,
    down: Vec<f64>,
    stay: Vec<f64>,
}

impl TransitionMatrix {
    /// Chain of the urn with up-probability `p(B) = (drift(B/n) + 1) / 2`.
    pub fn from_drift(spec: &DriftSpec) -> Result<Self, MarkovError> {
        let n = spec.n;
        let mut p = Vec::with_capacity(n + 1);
        for b in 0..=n {
            let d = spec.drift_at(b);
            if !(d.abs() <= 1.0 + STOCHASTIC_TOL) {
                return Err(MarkovError::DriftOutOfRange { state: b, drift: d });
            }
            p.push((0.5 * (d + 1.0)).clamp(0.0, 1.0));
        }
        let mut up = vec![0.0; n + 1];
        let mut down = vec![0.0; n + 1];
        let mut stay = vec![0.0; n + 1];
        up[0] = p[0];
        stay[0] = 1.0 - p[0];
        for b in 1..n {
            up[b] = p[b];
            down[b] = 1.0 - p[b];
        }
        down[n] = 1.0 - p[n];
        stay[n] = p[n];
        Ok(TransitionMatrix { n, up, down, stay })
    }

    /// General birth–death chain from per-state up and down probabilities;
    /// the remainder becomes the self-loop.
    pub fn from_rates(up: Vec<f64>, down: Vec<f64>) -> Result<Self, MarkovError> {
        if up.len() != down.len() || up.len() < 2 {
            return Err(MarkovError::Degenerate(
                "rate vectors must have equal length >= 2".into(),
            ));
        }
        let n = up.len() - 1;
        if up[n] != 0.0 || down[0] != 0.0 {
            return Err(MarkovError::Degenerate("chain would leave 0..=n".into()));
        }
        let mut stay = Vec::with_capacity(n + 1);
        for b in 0..=n {
            let (u, d) = (up[b], down[b]);
            if !(u >= 0.0 && d >= 0.0 && u + d <= 1.0 + STOCHASTIC_TOL) {
                return Err(MarkovError::Degenerate(format!(
                    "invalid rates ({u}, {d}) at state {b}"
                )));
            }
            stay.push((1.0 - u - d).max(0.0));
        }
        Ok(TransitionMatrix { n, up, down, stay })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of moving from `b` to `b + 1`.
    pub fn up(&self, b: usize) -> f64 {
        self.up[b]
    }

    /// Probability of moving from `b` to `b - 1`.
    pub fn down(&self, b: usize) -> f64 {
        self.down[b]
    }

    pub fn stay(&self, b: usize) -> f64 {
        self.stay[b]
    }

    /// Entry `T[to, from]`.
    pub fn get(&self, to: usize, from: usize) -> f64 {
        if to == from {
            self.stay[from]
        } else if to == from + 1 {
            self.up[from]
        } else if to + 1 == from {
            self.down[from]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..=self.n)
            .map(|i| (0..=self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `T v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..=n)
            .map(|i| {
                let mut x = self.stay[i] * v[i];
                if i > 0 {
                    x += self.up[i - 1] * v[i - 1];
                }
                if i < n {
                    x += self.down[i + 1] * v[i + 1];
                }
                x
            })
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|j| self.up[j] + self.down[j] + self.stay[j])
            .collect()
    }

    fn check_state(&self, b: usize) -> Result<(), MarkovError> {
        if b > self.n {
            Err(MarkovError::StateOutOfRange {
                state: b,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }
}

pub fn build_transition(spec: &DriftSpec) -> Result<TransitionMatrix, MarkovError> {
    TransitionMatrix::from_drift(spec)
}

/// Stationary distribution over the states `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub pi: Vec<f64>,
}

impl SteadyState {
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        0.5 * self
            .pi
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        self.pi
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// States that beat both neighbours (ties broken to the left).
    pub fn peaks(&self) -> Vec<usize> {
        let pi = &self.pi;
        let len = pi.len();
        (0..len)
            .filter(|&i| {
                let left_ok = i == 0 || pi[i] > pi[i - 1];
                let right_ok = i + 1 == len || pi[i] >= pi[i + 1];
                left_ok && right_ok && pi[i] > 0.0
            })
            .collect()
    }

    /// Peak state of the left and right half of the distribution.
    pub fn outer_peaks(&self) -> (usize, usize) {
        let n = self.pi.len() - 1;
        let argmax = |range: std::ops::RangeInclusive<usize>| {
            range.fold(None::<usize>, |best, i| match best {
                Some(j) if self.pi[j] >= self.pi[i] => Some(j),
                _ => Some(i),
            })
        };
        let left = argmax(0..=n / 2).unwrap_or(0);
        let right = argmax((n + 1) / 2..=n).unwrap_or(n);
        (left, right)
    }
}

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 1_000_000;

/// Eigenvector of `T` for eigenvalue 1 by power iteration.
///
/// Iterates the lazy chain `(I + T) / 2`, which has the same stationary
/// vector but no period, from the uniform distribution until successive
/// iterates differ by less than `1e-12` in sup norm.
pub fn steady_state(t: &TransitionMatrix) -> Result<SteadyState, MarkovError> {
    steady_state_with(t, POWER_TOL, POWER_MAX_ITER)
}

pub fn steady_state_with(
    t: &TransitionMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState, MarkovError> {
    let len = t.n + 1;
    let mut v = vec![1.0 / len as f64; len];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let tv = t.apply(&v);
        let mut next: Vec<f64> = v.iter().zip(&tv).map(|(a, b)| 0.5 * (a + b)).collect();
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= sum);
        change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if change < tol {
            // eigenvector sign is arbitrary in general; keep the nonnegative one
            v.iter_mut().for_each(|x| *x = x.max(0.0));
            let sum: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= sum);
            return Ok(SteadyState { pi: v });
        }
    }
    Err(MarkovError::NotConverged {
        iterations: max_iter,
        last_change: change,
    })
}

/// Stationary distribution from detailed balance,
/// `pi(B) ∝ prod_{k=1..B} p(k-1) / q(k)`, accumulated in log space.
pub fn steady_state_detailed_balance(t: &TransitionMatrix) -> Result<SteadyState, MarkovError> {
    let n = t.n;
    let mut log_w = vec![0.0; n + 1];
    for k in 1..=n {
        let q = t.down[k];
        if q <= 0.0 {
            return Err(MarkovError::Degenerate(format!(
                "no downward transition out of state {k}"
            )));
        }
        log_w[k] = log_w[k - 1] + t.up[k - 1].ln() - q.ln();
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = log_w.iter().map(|&l| (l - top).exp()).collect();
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= sum);
    Ok(SteadyState { pi })
}

/// Probability of reaching `b` before `a`, indexed `x = a..=b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingCurve {
    pub a: usize,
    pub b: usize,
    pub sigma: Vec<f64>,
}

impl SplittingCurve {
    pub fn at(&self, x: usize) -> f64 {
        self.sigma[x - self.a]
    }

    pub fn sup_distance(&self, other: &SplittingCurve) -> f64 {
        self.sigma
            .iter()
            .zip(&other.sigma)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Splitting probability from the stationary density,
/// `sigma(x) = int_a^x 1/pi / int_a^b 1/pi`, with the integrals taken by the
/// trapezoidal rule over the states.
pub fn splitting_probability(
    pi: &SteadyState,
    a: usize,
    b: usize,
) -> Result<SplittingCurve, MarkovError> {
    let n = pi.pi.len() - 1;
    if b > n {
        return Err(MarkovError::StateOutOfRange { state: b, n });
    }
    if a >= b {
        return Err(MarkovError::Degenerate(format!(
            "splitting interval needs a < b (got {a}, {b})"
        )));
    }
    if let Some(x) = (a..=b).find(|&x| !(pi.pi[x] > 0.0)) {
        return Err(MarkovError::Degenerate(format!(
            "zero stationary mass at state {x}"
        )));
    }
    let mut acc = vec![0.0];
    for x in a..b {
        let cell = 0.5 * (1.0 / pi.pi[x] + 1.0 / pi.pi[x + 1]);
        acc.push(acc.last().unwrap() + cell);
    }
    let total = *acc.last().unwrap();
    let mut sigma: Vec<f64> = acc.iter().map(|v| v / total).collect();
    *sigma.last_mut().unwrap() = 1.0;
    Ok(SplittingCurve { a, b, sigma })
}

/// Exact splitting probability by first-step analysis:
/// `sigma(x) = p(x) sigma(x+1) + q(x) sigma(x-1) + r(x) sigma(x)`,
/// `sigma(a) = 0`, `sigma(b) = 1`.
pub fn splitting_exact(
    t: &TransitionMatrix,
    a: usize,
    b: usize,
) -> Result<SplittingCurve, MarkovError> {
    t.check_state(b)?;
    if a >= b {
        return Err(MarkovError::Degenerate(format!(
            "splitting interval needs a < b (got {a}, {b})"
        )));
    }
    let len = b - a + 1;
    let mut sub = vec![0.0; len];
    let mut diag = vec![1.0; len];
    let mut sup = vec![0.0; len];
    let mut rhs = vec![0.0; len];
    rhs[len - 1] = 1.0;
    for k in 1..len - 1 {
        let x = a + k;
        sub[k] = -t.down[x];
        diag[k] = 1.0 - t.stay[x];
        sup[k] = -t.up[x];
    }
    let sigma = solve_tridiagonal(&sub, &diag, &sup, &rhs)
        .ok_or_else(|| MarkovError::Singular(format!("splitting system on [{a}, {b}]")))?;
    Ok(SplittingCurve { a, b, sigma })
}

/// Expected steps to first reach `target` from every state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfptVector {
    pub target: usize,
    pub times: Vec<f64>,
}

/// Makes `target` absorbing and solves `(I - Q) t = 1` over the transient
/// states; the system is tridiagonal, so no inverse is formed.
pub fn mfpt(t: &TransitionMatrix, target: usize) -> Result<MfptVector, MarkovError> {
    t.check_state(target)?;
    let len = t.n + 1;
    let mut sub = vec![0.0; len];
    let mut diag = vec![1.0; len];
    let mut sup = vec![0.0; len];
    let mut rhs = vec![1.0; len];
    for x in 0..len {
        if x == target {
            rhs[x] = 0.0;
            continue;
        }
        diag[x] = 1.0 - t.stay[x];
        if x > 0 && x - 1 != target {
            sub[x] = -t.down[x];
        }
        if x + 1 < len && x + 1 != target {
            sup[x] = -t.up[x];
        }
    }
    let times = solve_tridiagonal(&sub, &diag, &sup, &rhs)
        .filter(|v| v.iter().all(|x| x.is_finite() && *x >= 0.0))
        .ok_or_else(|| {
            MarkovError::Singular(format!("state {target} is not reachable from every state"))
        })?;
    Ok(MfptVector { target, times })
}

/// Thomas algorithm; `None` on a vanishing pivot.
pub(crate) fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let len = diag.len();
    let mut c = vec![0.0; len];
    let mut d = vec![0.0; len];
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let mut pivot = diag[0];
    if pivot.abs() <= 1e-14 * scale {
        return None;
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..len {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() <= 1e-14 * scale {
            return None;
        }
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; len];
    x[len - 1] = d[len - 1];
    for i in (0..len - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}
