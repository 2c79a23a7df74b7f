//! Run configuration: the free constants of the algorithms, with the
//! defaults used by the test corpus and the command-line tool.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Splitting accuracy; `None` resolves to 2^{-4M-2} once M is measured,
    /// which keeps the total recombination slack below 1.
    pub epsilon: Option<f64>,
    /// Cap on the subset size for connectedness testing (cost 3^m).
    pub m_cap: usize,
    /// Dilation search grid step over [1/2, 1].
    pub rho_grid: f64,
    /// Enumeration budget for subset scans.
    pub budget: u128,
    /// Seed for corpus generation; algorithm code paths are deterministic.
    pub seed: u64,
    pub float_eq: f64,
    pub psd_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: None,
            m_cap: 6,
            rho_grid: 1e-3,
            budget: 1 << 32,
            seed: 0,
            float_eq: 1e-9,
            psd_tol: 1e-12,
        }
    }
}

impl RunConfig {
    pub fn epsilon_for(&self, m: f64) -> f64 {
        self.epsilon
            .unwrap_or_else(|| 2f64.powf(-(4.0 * m.max(1.0) + 2.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_auto_scale() {
        let c = RunConfig::default();
        assert_eq!(c.epsilon_for(1.0), 2f64.powi(-6));
        assert_eq!(c.epsilon_for(3.0), 2f64.powi(-14));
        // 2^{4M-1} eps < 1 must hold for the recombination argument
        for m in 1..=5 {
            let eps = c.epsilon_for(m as f64);
            assert!(2f64.powi(4 * m - 1) * eps < 1.0);
        }
    }

    #[test]
    fn partial_json_merges_with_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"m_cap": 4}"#).unwrap();
        assert_eq!(c.m_cap, 4);
        assert_eq!(c.float_eq, 1e-9);
        assert!(c.epsilon.is_none());
    }
}
