use std::fmt;

use super::FitResult;

/// `%g`-style formatting with `sig` significant digits.
pub fn format_g(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sig = sig.max(1);
    let exp = x.abs().log10().floor() as i32;
    // rounding can bump the exponent (9.9999 -> 10.000)
    let rounded: f64 = format!("{:.*e}", sig - 1, x).parse().unwrap_or(x);
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) {
        exp + 1
    } else {
        exp
    };
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let e: i32 = e.parse().unwrap_or(0);
        let sign = if e < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), e.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl FitResult {
    /// The fit laid out as a gnuplot-style summary table.
    pub fn gnuplot_table(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32}{}", "function", self.function)?;
        writeln!(f, "{:<32}{}", "degrees of freedom", self.dof)?;
        writeln!(
            f,
            "{:<32}{}",
            "root mean square of residuals",
            format_g(self.rms, 6)
        )?;
        if !self.converged {
            writeln!(
                f,
                "{:<32}{} iterations",
                "NOT CONVERGED after", self.iterations
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<12}{:<16}{}",
            "parameter", "value", "asymptotic standard error"
        )?;
        for (i, name) in self.names.iter().enumerate() {
            if self.fixed[i] {
                continue;
            }
            let pct = self.percent_errors()[i];
            let note = if self.at_bound[i] { "  at bound" } else { "" };
            writeln!(
                f,
                "{:<12}{:<16}+/- {:<14}({}%){note}",
                name,
                format_g(self.values[i], 6),
                format_g(self.stderr[i], 4),
                format_g(pct, 4),
            )?;
        }
        Ok(())
    }
}
