//! Closed-form model functions: feedback and payoff profiles, the urn drift,
//! the swarm performance curves and the Ehrenfest mean trajectory.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::ModelError;

/// Positive-feedback probability `P(s)` as a function of the consensus `s`.
///
/// Every variant is symmetric, `P(s) == P(1 - s)`, and bounded to `[0, 1]`.
/// Use the checked constructors; [`FeedbackProfile::validate`] is run again
/// by [`DriftSpec::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeedbackProfile {
    /// `phi * sin(pi s)`
    Sine { phi: f64 },
    /// `phi * (1 - 4 (s - 0.5)^2)`
    Quadratic { phi: f64 },
    /// `c1 * (1 - 1 / (1 + c2 * min(s, 1 - s)))`
    Rational { c1: f64, c2: f64 },
    /// Piecewise-linear table, symmetrized on construction.
    Tabulated(TabulatedProfile),
}

impl FeedbackProfile {
    pub fn sine(phi: f64) -> Result<Self, ModelError> {
        let p = FeedbackProfile::Sine { phi };
        p.validate()?;
        Ok(p)
    }

    pub fn quadratic(phi: f64) -> Result<Self, ModelError> {
        let p = FeedbackProfile::Quadratic { phi };
        p.validate()?;
        Ok(p)
    }

    pub fn rational(c1: f64, c2: f64) -> Result<Self, ModelError> {
        let p = FeedbackProfile::Rational { c1, c2 };
        p.validate()?;
        Ok(p)
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        Ok(FeedbackProfile::Tabulated(TabulatedProfile::new(points)?))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            FeedbackProfile::Sine { phi } | FeedbackProfile::Quadratic { phi } => {
                if !(0.0..=1.0).contains(&phi) {
                    return Err(ModelError::Parameter(format!("phi = {phi} outside [0, 1]")));
                }
            }
            FeedbackProfile::Rational { c1, c2 } => {
                if !(c1 >= 0.0 && c2 >= 0.0) {
                    return Err(ModelError::Parameter(format!(
                        "rational profile needs c1, c2 >= 0 (got {c1}, {c2})"
                    )));
                }
                // maximum sits at s = 0.5
                let peak = self.prob(0.5);
                if peak > 1.0 {
                    return Err(ModelError::Parameter(format!(
                        "rational profile peaks at {peak} > 1"
                    )));
                }
            }
            FeedbackProfile::Tabulated(_) => {}
        }
        Ok(())
    }

    /// `P(s)`.
    pub fn prob(&self, s: f64) -> f64 {
        match self {
            FeedbackProfile::Sine { phi } => phi * (PI * s).sin(),
            FeedbackProfile::Quadratic { phi } => {
                let u = s - 0.5;
                phi * (1.0 - 4.0 * u * u)
            }
            FeedbackProfile::Rational { c1, c2 } => {
                let h = s.min(1.0 - s);
                c1 * (1.0 - 1.0 / (1.0 + c2 * h))
            }
            FeedbackProfile::Tabulated(t) => t.eval(s),
        }
    }

    /// Same family with intensity `phi`; `None` for families without one.
    pub fn with_phi(&self, phi: f64) -> Option<Result<Self, ModelError>> {
        match self {
            FeedbackProfile::Sine { .. } => Some(FeedbackProfile::sine(phi)),
            FeedbackProfile::Quadratic { .. } => Some(FeedbackProfile::quadratic(phi)),
            _ => None,
        }
    }

    /// Short name used in manifests and CSV headers.
    pub fn family(&self) -> &'static str {
        match self {
            FeedbackProfile::Sine { .. } => "sine",
            FeedbackProfile::Quadratic { .. } => "quadratic",
            FeedbackProfile::Rational { .. } => "rational",
            FeedbackProfile::Tabulated(_) => "tabulated",
        }
    }
}

/// Feedback probability given as a table of `(s, P)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedProfile {
    /// Builds a symmetric table: every grid point is mirrored to `1 - s` and
    /// the value there becomes the mean of the raw interpolant at `s` and `1 - s`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        if points.len() < 2 {
            return Err(ModelError::Parameter(
                "tabulated profile needs at least two points".into(),
            ));
        }
        for &(s, p) in points {
            if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&p) {
                return Err(ModelError::Parameter(format!(
                    "tabulated point ({s}, {p}) outside the unit square"
                )));
            }
        }
        let mut raw: Vec<(f64, f64)> = points.to_vec();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        raw.dedup_by(|a, b| a.0 == b.0);
        let raw = TabulatedProfile {
            grid: raw.iter().map(|p| p.0).collect(),
            values: raw.iter().map(|p| p.1).collect(),
        };

        let mut grid: Vec<f64> = raw.grid.iter().flat_map(|&s| [s, 1.0 - s]).collect();
        grid.sort_by(f64::total_cmp);
        // mirrored points can differ from existing ones by an ulp
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let values = grid
            .iter()
            .map(|&s| 0.5 * (raw.eval(s) + raw.eval(1.0 - s)))
            .collect();
        Ok(TabulatedProfile { grid, values })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }

    fn eval(&self, s: f64) -> f64 {
        let n = self.grid.len();
        if s <= self.grid[0] {
            return self.values[0];
        }
        if s >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.grid.partition_point(|&g| g <= s);
        let lo = hi - 1;
        let (x0, x1) = (self.grid[lo], self.grid[hi]);
        let w = (s - x0) / (x1 - x0);
        self.values[lo] * (1.0 - w) + self.values[hi] * w
    }
}

/// Expected payoff magnitude `M(s)` of a feedback event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PayoffProfile {
    Constant {
        c: f64,
    },
    /// `c1 * sin(pi s) + c2`
    Sine {
        c1: f64,
        c2: f64,
    },
}

impl Default for PayoffProfile {
    fn default() -> Self {
        PayoffProfile::Constant { c: 1.0 }
    }
}

impl PayoffProfile {
    pub fn constant(c: f64) -> Result<Self, ModelError> {
        let p = PayoffProfile::Constant { c };
        p.validate()?;
        Ok(p)
    }

    pub fn sine(c1: f64, c2: f64) -> Result<Self, ModelError> {
        let p = PayoffProfile::Sine { c1, c2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match *self {
            PayoffProfile::Constant { c } => c >= 0.0,
            // minimum over [0, 1] is at the ends (c1 >= 0) or at s = 0.5 (c1 < 0)
            PayoffProfile::Sine { c1, c2 } => c2 >= 0.0 && c1 + c2 >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::Parameter(format!(
                "payoff {self:?} is negative somewhere on [0, 1]"
            )))
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            PayoffProfile::Constant { c } => c,
            PayoffProfile::Sine { c1, c2 } => c1 * (PI * s).sin() + c2,
        }
    }

    /// Largest value over `[0, 1]`.
    pub fn max_value(&self) -> f64 {
        match *self {
            PayoffProfile::Constant { c } => c,
            PayoffProfile::Sine { c1, c2 } => c2 + c1.max(0.0),
        }
    }
}

/// Everything needed to evaluate the drift of an urn with `n` marbles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub feedback: FeedbackProfile,
    pub payoff: PayoffProfile,
    pub n: usize,
}

impl DriftSpec {
    pub fn new(
        feedback: FeedbackProfile,
        payoff: PayoffProfile,
        n: usize,
    ) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::Parameter(format!("urn size {n} < 2")));
        }
        feedback.validate()?;
        payoff.validate()?;
        Ok(DriftSpec {
            feedback,
            payoff,
            n,
        })
    }

    /// Sine feedback with unit payoff, the most common configuration.
    pub fn sine(phi: f64, n: usize) -> Result<Self, ModelError> {
        DriftSpec::new(FeedbackProfile::sine(phi)?, PayoffProfile::default(), n)
    }

    pub fn drift(&self, s: f64) -> f64 {
        drift(&self.feedback, &self.payoff, s)
    }

    /// Drift at the integer state `b`.
    pub fn drift_at(&self, b: usize) -> f64 {
        self.drift(b as f64 / self.n as f64)
    }
}

/// Expected change in blue marbles per round:
/// `4 M(s) (P(s) - 0.5) (s - 0.5)`.
pub fn drift(feedback: &FeedbackProfile, payoff: &PayoffProfile, s: f64) -> f64 {
    4.0 * payoff.value(s) * (feedback.prob(s) - 0.5) * (s - 0.5)
}

/// Sorted consensus values in `(0, 1)` where the drift vanishes.
///
/// Sine and quadratic profiles use closed forms; every other family is
/// scanned on `10 n` grid cells and bisected to `1e-10`. Zeros of the payoff
/// factor are not reported.
pub fn drift_roots(spec: &DriftSpec) -> Vec<f64> {
    let mut roots = vec![0.5];
    match spec.feedback {
        FeedbackProfile::Sine { phi } => {
            if phi > 0.5 {
                let s1 = (1.0 / (2.0 * phi)).asin() / PI;
                roots.extend([s1, 1.0 - s1]);
            }
        }
        FeedbackProfile::Quadratic { phi } => {
            if phi > 0.5 {
                let u = 0.5 * (1.0 - 1.0 / (2.0 * phi)).sqrt();
                roots.extend([0.5 - u, 0.5 + u]);
            }
        }
        _ => {
            let g = |s: f64| spec.feedback.prob(s) - 0.5;
            let cells = 10 * spec.n;
            let h = 1.0 / cells as f64;
            let mut left = g(0.0);
            for k in 0..cells {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                let right = g(b);
                if left == 0.0 && a > 0.0 {
                    roots.push(a);
                } else if left * right < 0.0 {
                    roots.push(bisect(&g, a, b, 1e-10));
                }
                left = right;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Parameters of the cooperation, interference and performance curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceParams {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PerformanceParams {
    pub fn new(a1: f64, a2: f64, b: f64, c: f64, d: f64) -> Result<Self, ModelError> {
        let p = PerformanceParams { a1, a2, b, c, d };
        if a1 > 0.0 && a2 > 0.0 && b > 0.0 && c < 0.0 && d >= 0.0 {
            Ok(p)
        } else {
            Err(ModelError::Parameter(format!(
                "performance parameters need a1, a2, b > 0, c < 0, d >= 0 (got {p:?})"
            )))
        }
    }

    /// `C(x) = a1 x^b`
    pub fn cooperation(&self, x: f64) -> f64 {
        self.a1 * x.powf(self.b)
    }

    /// `I(x) = a2 exp(c x) + d`
    pub fn interference(&self, x: f64) -> f64 {
        self.a2 * (self.c * x).exp() + self.d
    }

    /// `Pi(x) = C(x) (I(x) - d)`
    pub fn performance(&self, x: f64) -> f64 {
        self.a1 * x.powf(self.b) * self.a2 * (self.c * x).exp()
    }
}

/// Expected blue count after `t` Ehrenfest rounds from `b0` blue marbles out
/// of `n`: `n/2 + (b0 - n/2) (1 - 2/n)^t`.
pub fn ehrenfest_closed_form(t: u64, n: usize, b0: f64) -> f64 {
    let half = n as f64 / 2.0;
    let rate = 1.0 - 2.0 / n as f64;
    half + (b0 - half) * rate.powf(t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> PayoffProfile {
        PayoffProfile::default()
    }

    #[test]
    fn feedback_examples() {
        assert_abs_diff_eq!(
            FeedbackProfile::sine(0.75).unwrap().prob(0.5),
            0.75,
            epsilon = 1e-15
        );
        assert_eq!(FeedbackProfile::sine(0.5).unwrap().prob(0.0), 0.0);
        assert_abs_diff_eq!(
            FeedbackProfile::quadratic(0.5).unwrap().prob(0.25),
            0.375,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(FeedbackProfile::sine(1.2).is_err());
        assert!(FeedbackProfile::quadratic(-0.1).is_err());
        assert!(FeedbackProfile::rational(-1.0, 2.0).is_err());
        // c1 (1 - 1/(1 + c2/2)) = 2 * (1 - 1/2) = 1 is fine, 3 * 0.5 is not
        assert!(FeedbackProfile::rational(2.0, 2.0).is_ok());
        assert!(FeedbackProfile::rational(3.0, 2.0).is_err());
        assert!(FeedbackProfile::tabulated(&[(0.5, 0.2)]).is_err());
        assert!(FeedbackProfile::tabulated(&[(0.0, 0.2), (1.2, 0.1)]).is_err());
        assert!(PayoffProfile::constant(-0.1).is_err());
        assert!(PayoffProfile::sine(-0.5, 0.25).is_err());
        assert!(DriftSpec::sine(0.5, 1).is_err());
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(PayoffProfile::constant(1.0).unwrap().value(0.3), 1.0);
        let m = PayoffProfile::sine(0.5, 0.25).unwrap();
        assert_abs_diff_eq!(m.value(0.5), 0.75, epsilon = 1e-15);
        assert_eq!(m.value(0.0), 0.25);
        assert_eq!(m.max_value(), 0.75);
    }

    #[test]
    fn drift_examples() {
        let ehrenfest = DriftSpec::sine(0.0, 64).unwrap();
        assert_abs_diff_eq!(ehrenfest.drift_at(16), 0.5, epsilon = 1e-15);
        assert_eq!(DriftSpec::sine(0.3, 64).unwrap().drift(0.5), 0.0);
        // 4 (0.75 sin(pi/4) - 0.5)(-0.25)
        let expected = 4.0 * (0.75 * (PI / 4.0).sin() - 0.5) * -0.25;
        assert_abs_diff_eq!(expected, -0.030330085889910, epsilon = 1e-12);
        assert_abs_diff_eq!(
            DriftSpec::sine(0.75, 64).unwrap().drift(0.25),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ehrenfest_and_eigen_reductions() {
        let spec = DriftSpec::sine(0.0, 64).unwrap();
        for b in 0..=64 {
            let s = b as f64 / 64.0;
            assert_eq!(spec.drift(s), -2.0 * (s - 0.5));
        }
        let eigen = DriftSpec::new(
            FeedbackProfile::tabulated(&[(0.0, 1.0), (1.0, 1.0)]).unwrap(),
            unit(),
            64,
        )
        .unwrap();
        for b in 1..64 {
            let s = b as f64 / 64.0;
            assert_abs_diff_eq!(eigen.drift(s), 2.0 * s - 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sine_roots() {
        assert_eq!(drift_roots(&DriftSpec::sine(0.25, 64).unwrap()), vec![0.5]);
        assert_eq!(drift_roots(&DriftSpec::sine(0.5, 64).unwrap()), vec![0.5]);
        let r = drift_roots(&DriftSpec::sine(0.75, 64).unwrap());
        assert_eq!(r.len(), 3);
        // arcsin(2/3) / pi
        assert_abs_diff_eq!(r[0], 0.232_279_527_198_77, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], 1.0 - r[0], epsilon = 1e-15);
        assert!(r[0] > 0.23 && r[2] < 0.77);
    }

    #[test]
    fn quadratic_roots_solve_the_cubic() {
        // u (-2 + 4 phi - 16 phi u^2) = 0  =>  u^2 = 1/8 at phi = 1
        let r = drift_roots(
            &DriftSpec::new(FeedbackProfile::quadratic(1.0).unwrap(), unit(), 64).unwrap(),
        );
        let u = (1.0f64 / 8.0).sqrt();
        assert_eq!(r.len(), 3);
        assert_abs_diff_eq!(r[0], 0.5 - u, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], 0.5 + u, epsilon = 1e-12);
        let cubic = |s: f64| {
            let u = s - 0.5;
            -2.0 * u + 4.0 * u - 16.0 * u.powi(3)
        };
        for &x in &r {
            assert_abs_diff_eq!(cubic(x), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bisection_roots_for_rational_and_table() {
        // c1 (1 - 1/(1 + c2 h)) = 0.5  =>  h = 1 / (c2 (2 c1 - 1))
        let (c1, c2) = (0.679526, 11.9802);
        let spec = DriftSpec::new(FeedbackProfile::rational(c1, c2).unwrap(), unit(), 64).unwrap();
        let r = drift_roots(&spec);
        let h = 1.0 / (c2 * (2.0 * c1 - 1.0));
        assert_eq!(r.len(), 3);
        assert_abs_diff_eq!(r[0], h, epsilon = 1e-9);
        assert_abs_diff_eq!(r[2], 1.0 - h, epsilon = 1e-9);

        let table = FeedbackProfile::tabulated(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let spec = DriftSpec::new(table, unit(), 32).unwrap();
        let r = drift_roots(&spec);
        assert_eq!(r.len(), 3);
        assert_abs_diff_eq!(r[0], 0.25, epsilon = 1e-9);
    }

    #[test]
    fn tabulated_is_symmetrized() {
        let t = FeedbackProfile::tabulated(&[(0.0, 0.0), (0.2, 0.4), (1.0, 0.2)]).unwrap();
        assert_abs_diff_eq!(t.prob(0.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(t.prob(1.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(t.prob(0.3), t.prob(0.7), epsilon = 1e-12);
    }

    #[test]
    fn performance_examples() {
        let p = PerformanceParams::new(0.002, 1.0, 2.5, -0.12, 0.0).unwrap();
        let expected = 0.002 * 10f64.powf(2.5) * (-1.2f64).exp();
        assert_abs_diff_eq!(expected, 0.190_491_945_540_4, epsilon = 1e-12);
        assert_abs_diff_eq!(p.performance(10.0), expected, epsilon = 1e-15);
        assert_eq!(p.performance(0.0), 0.0);

        let t1 = PerformanceParams::new(0.00248537, 1.0, 1.23745, -0.199589, 0.0).unwrap();
        let brute = 0.00248537 * (1.23745 * 5f64.ln()).exp() * (-0.199589f64 * 5.0).exp();
        assert_abs_diff_eq!(t1.performance(5.0), brute, epsilon = 1e-15);

        let taxis = PerformanceParams::new(1.0, 0.213822, 1.0, -0.182333, 0.0750781).unwrap();
        assert_abs_diff_eq!(taxis.interference(1e4), 0.0750781, epsilon = 1e-15);
        let lin = PerformanceParams::new(1.0, 1.0, 1.0, -0.12, 0.0).unwrap();
        assert_eq!(lin.cooperation(7.0), 7.0);
        assert_eq!(lin.interference(0.0), 1.0);
        assert!(PerformanceParams::new(1.0, 1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn ehrenfest_examples() {
        assert_abs_diff_eq!(ehrenfest_closed_form(1, 64, 0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ehrenfest_closed_form(2, 64, 0.0), 1.96875, epsilon = 1e-12);
        assert_eq!(ehrenfest_closed_form(123, 64, 32.0), 32.0);
        // the geometric-sum form for b0 = 0
        let r: f64 = 62.0 / 64.0;
        for t in [1u64, 5, 50, 500] {
            let geometric = (1.0 - r.powi(t as i32)) / (1.0 - r);
            assert_abs_diff_eq!(ehrenfest_closed_form(t, 64, 0.0), geometric, epsilon = 1e-9);
        }
    }

    fn any_profile() -> impl Strategy<Value = FeedbackProfile> {
        prop_oneof![
            (0.0..=1.0f64).prop_map(|phi| FeedbackProfile::Sine { phi }),
            (0.0..=1.0f64).prop_map(|phi| FeedbackProfile::Quadratic { phi }),
            (0.0..=1.0f64, 0.0..40.0f64).prop_map(|(c1, c2)| FeedbackProfile::Rational { c1, c2 }),
            proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 2..8)
                .prop_map(|pts| FeedbackProfile::tabulated(&pts).unwrap()),
        ]
    }

    fn any_payoff() -> impl Strategy<Value = PayoffProfile> {
        prop_oneof![
            (0.0..=1.0f64).prop_map(|c| PayoffProfile::Constant { c }),
            (0.0..=0.5f64, 0.0..=0.5f64).prop_map(|(c1, c2)| PayoffProfile::Sine { c1, c2 }),
        ]
    }

    proptest! {
        #[test]
        fn profiles_are_symmetric_and_bounded(p in any_profile(), s in 0.0..=1.0f64) {
            let v = p.prob(s);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((v - p.prob(1.0 - s)).abs() <= 1e-12);
        }

        #[test]
        fn drift_is_antisymmetric(p in any_profile(), m in any_payoff(), s in 0.0..=1.0f64) {
            prop_assert!((drift(&p, &m, s) + drift(&p, &m, 1.0 - s)).abs() <= 1e-12);
        }

        #[test]
        fn drift_changes_sign_at_interior_roots(p in any_profile(), n in 2usize..100) {
            let spec = DriftSpec::new(p, PayoffProfile::default(), n).unwrap();
            for r in drift_roots(&spec) {
                let (lo, hi) = (spec.drift(r - 1e-6), spec.drift(r + 1e-6));
                prop_assert!(lo * hi <= 0.0, "no sign change at {r}: {lo} {hi}");
            }
        }

        #[test]
        fn performance_factorizes(a1 in 1e-3..10.0f64, a2 in 1e-3..10.0f64, b in 0.1..4.0f64,
                                  c in -2.0..-1e-3f64, d in 0.0..1.0f64, x in 0.0..60.0f64) {
            let p = PerformanceParams::new(a1, a2, b, c, d).unwrap();
            let lhs = p.performance(x);
            let rhs = p.cooperation(x) * (p.interference(x) - d);
            // (I - d) cancels up to d's rounding error
            let scale = lhs.abs() + p.cooperation(x) * d;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn closed_form_matches_mean_map(n in 2usize..200, frac in 0.0..=1.0f64, t in 0u64..=500) {
            let b0 = (frac * n as f64).round();
            let spec = DriftSpec::sine(0.0, n).unwrap();
            let mut b = b0;
            for _ in 0..t {
                b += spec.drift(b / n as f64);
            }
            let exact = ehrenfest_closed_form(t, n, b0);
            prop_assert!((b - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }
}
