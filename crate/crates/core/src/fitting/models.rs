use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Parametric model families with the parameter order each one expects.
#[derive(Clone)]
pub enum ModelKind {
    /// `A x^b exp(c x)` with `A = a1 a2`; parameters `[A, b, c]`.
    Performance,
    /// `a2 exp(c x) + d`; parameters `[a2, c, d]`.
    Interference,
    /// `a1 x^b a2 exp(c x)`; parameters `[a1, b, a2, c]`.
    StagedPerformance,
    /// `A N^b exp(c N)`, same form as [`ModelKind::Performance`] but with `c`
    /// free in sign; parameters `[A, b, c]`.
    SwitchTime,
    /// `a - exp(b t)`; parameters `[a, b]`.
    Growth,
    /// `4 c2 (phi sin(pi s) - 0.5)(s - 0.5)`; parameters `[c2, phi]`.
    Drift,
    /// `phi sin(pi s)`; parameters `[phi]`.
    SineFeedback,
    /// `phi (1 - 4 (s - 0.5)^2)`; parameters `[phi]`.
    QuadraticFeedback,
    /// `c1 (1 - 1 / (1 + c2 min(s, 1 - s)))`; parameters `[c1, c2]`.
    RationalFeedback,
    /// `p x`; parameters `[p]`.
    Linear,
    Custom {
        name: String,
        params: Vec<String>,
        f: Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.formula())
    }
}

impl ModelKind {
    pub fn eval(&self, x: f64, p: &[f64]) -> f64 {
        match self {
            ModelKind::Performance | ModelKind::SwitchTime => {
                p[0] * x.powf(p[1]) * (p[2] * x).exp()
            }
            ModelKind::Interference => p[0] * (p[1] * x).exp() + p[2],
            ModelKind::StagedPerformance => p[0] * x.powf(p[1]) * p[2] * (p[3] * x).exp(),
            ModelKind::Growth => p[0] - (p[1] * x).exp(),
            ModelKind::Drift => 4.0 * p[0] * (p[1] * (PI * x).sin() - 0.5) * (x - 0.5),
            ModelKind::SineFeedback => p[0] * (PI * x).sin(),
            ModelKind::QuadraticFeedback => p[0] * (1.0 - 4.0 * (x - 0.5).powi(2)),
            ModelKind::RationalFeedback => {
                let h = x.min(1.0 - x);
                p[0] * (1.0 - 1.0 / (1.0 + p[1] * h))
            }
            ModelKind::Linear => p[0] * x,
            ModelKind::Custom { f, .. } => f(x, p),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let names: &[&str] = match self {
            ModelKind::Performance | ModelKind::SwitchTime => &["a1a2", "b", "c"],
            ModelKind::Interference => &["a2", "c", "d"],
            ModelKind::StagedPerformance => &["a1", "b", "a2", "c"],
            ModelKind::Growth => &["a", "b"],
            ModelKind::Drift => &["c2", "phi"],
            ModelKind::SineFeedback | ModelKind::QuadraticFeedback => &["phi"],
            ModelKind::RationalFeedback => &["c1", "c2"],
            ModelKind::Linear => &["p"],
            ModelKind::Custom { params, .. } => return params.clone(),
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn formula(&self) -> String {
        match self {
            ModelKind::Performance => "P(x)=a1*x^b*a2*exp(c*x)".into(),
            ModelKind::SwitchTime => "tau(N)=a1*N^b*a2*exp(c*N)".into(),
            ModelKind::Interference => "I(x)=a2*exp(c*x)+d".into(),
            ModelKind::StagedPerformance => "P(x)=a1*x^b*a2*exp(c*x)".into(),
            ModelKind::Growth => "phi(t)=a-exp(b*t)".into(),
            ModelKind::Drift => "dB(s)=4*c2*(phi*sin(pi*s)-0.5)*(s-0.5)".into(),
            ModelKind::SineFeedback => "P(s)=phi*sin(pi*s)".into(),
            ModelKind::QuadraticFeedback => "P(s)=phi*(1-4*(s-0.5)^2)".into(),
            ModelKind::RationalFeedback => "P(s)=c1*(1-1/(1+c2*min(s,1-s)))".into(),
            ModelKind::Linear => "y=p*x".into(),
            ModelKind::Custom { name, .. } => name.clone(),
        }
    }
}
