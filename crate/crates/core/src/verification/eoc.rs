//! Experimental orders of convergence.

/// Order between two consecutive refinement levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eoc {
    Rate(f64),
    /// At least one error is zero or negative (below rounding), so no rate
    /// is defined.
    Exact,
}

impl Eoc {
    pub fn rate(&self) -> Option<f64> {
        match self {
            Eoc::Rate(r) => Some(*r),
            Eoc::Exact => None,
        }
    }
}

impl std::fmt::Display for Eoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Eoc::Rate(r) => write!(f, "{r:.3}"),
            Eoc::Exact => f.write_str("exact"),
        }
    }
}

/// `log(e_{i-1}/e_i) / log(s_{i-1}/s_i)` for consecutive pairs, where `s`
/// is the step size (τ or h).
pub fn eoc(errors: &[f64], steps: &[f64]) -> Vec<Eoc> {
    assert_eq!(errors.len(), steps.len(), "one step per error");
    errors
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, s)| {
            if !(e[0] > 0.0 && e[1] > 0.0) {
                Eoc::Exact
            } else {
                Eoc::Rate((e[0] / e[1]).ln() / (s[0] / s[1]).ln())
            }
        })
        .collect()
}
