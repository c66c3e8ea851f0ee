//! Closed-form MMSE channel-estimation quality.
//!
//! Uplink: each B-terminal sends an orthogonal pilot of `tau_pu` symbols at
//! SNR `rho_u`; the per-element variance of the MMSE estimate of a channel
//! with large-scale gain `beta` is
//!
//! ```text
//! gamma = tau_pu·rho_u·beta² / (1 + tau_pu·rho_u·beta)
//! ```
//!
//! and `beta - gamma` is the estimation-error variance. The error variance is
//! what leaks broadcast power into the beamformed links, so every rate
//! formula downstream is parameterized by `gamma`.
//!
//! Downlink: the O-terminal estimates its M'-dimensional effective channel
//! from `tau_po` pilot symbols at SNR `rho_o`; estimate and error variances
//! per element are `var_hat` and `var_tilde` below, and they always sum to
//! `beta_o` (MMSE orthogonality).

use serde::Serialize;

/// Per-terminal MMSE estimate variances for the uplink training phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationQuality {
    pub gamma: Vec<f64>,
}

/// MMSE estimate variance per element for a channel with gain `beta`,
/// trained with `tau_pu` pilot symbols at SNR `rho_u`.
pub fn gamma_k(beta: f64, rho_u: f64, tau_pu: usize) -> f64 {
    let t = tau_pu as f64 * rho_u * beta;
    t * beta / (1.0 + t)
}

/// Estimate variances for every terminal in a path-loss profile.
pub fn estimation_quality(beta: &[f64], rho_u: f64, tau_pu: usize) -> EstimationQuality {
    EstimationQuality {
        gamma: beta.iter().map(|&b| gamma_k(b, rho_u, tau_pu)).collect(),
    }
}

/// Estimate/error variances of the O-terminal's effective channel after the
/// downlink pilot phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OEstimationStats {
    /// Per-element variance of the estimate ĥ_e.
    pub var_hat: f64,
    /// Per-element variance of the error h̃_e.
    pub var_tilde: f64,
}

/// O-terminal MMSE estimation statistics for subspace dimension `mp`, gain
/// `beta_o`, pilot SNR `rho_o` and pilot length `tau_po`.
pub fn o_estimation_stats(mp: usize, beta_o: f64, rho_o: f64, tau_po: usize) -> OEstimationStats {
    let mpf = mp as f64;
    let t = tau_po as f64 * rho_o * beta_o;
    let denom = mpf + t;
    OEstimationStats {
        var_hat: t * beta_o / denom,
        var_tilde: mpf * beta_o / denom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_reference_point() {
        // tau_pu·rho_u·beta = 5 gives gamma = 5/6.
        assert_relative_eq!(gamma_k(1.0, 0.5, 10), 5.0 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn gamma_limits() {
        assert_eq!(gamma_k(1.0, 0.0, 10), 0.0);
        // Perfect CSI: gamma -> beta as pilot energy grows.
        assert_relative_eq!(gamma_k(2.0, 1e12, 100), 2.0, max_relative = 1e-9);
        assert!(gamma_k(1.0, 0.5, 10) < 1.0);
    }

    #[test]
    fn gamma_monotone_in_pilot_energy_and_gain() {
        let mut prev = 0.0;
        for tau in [1usize, 2, 5, 10, 50, 200] {
            let g = gamma_k(1.0, 0.3, tau);
            assert!(g > prev);
            prev = g;
        }
        prev = 0.0;
        for rho_u in [0.01, 0.1, 1.0, 10.0] {
            let g = gamma_k(1.0, rho_u, 10);
            assert!(g > prev);
            prev = g;
        }
        assert!(gamma_k(2.0, 0.5, 10) > gamma_k(1.0, 0.5, 10));
    }

    #[test]
    fn quality_maps_profile_elementwise() {
        let q = estimation_quality(&[1.0, 2.0], 0.5, 10);
        assert_relative_eq!(q.gamma[0], gamma_k(1.0, 0.5, 10));
        assert_relative_eq!(q.gamma[1], gamma_k(2.0, 0.5, 10));
    }

    #[test]
    fn o_stats_sum_to_beta() {
        for &(mp, beta, rho, tau) in &[(7usize, 1.0, 5.0119, 10usize), (2, 10.9282, 0.96, 10), (7, 0.1, 28.2, 10)] {
            let s = o_estimation_stats(mp, beta, rho, tau);
            assert_relative_eq!(s.var_hat + s.var_tilde, beta, max_relative = 1e-14);
            assert!(s.var_hat >= 0.0 && s.var_tilde > 0.0);
        }
    }

    #[test]
    fn o_stats_zero_pilot_power() {
        // No pilot energy: the estimate carries nothing, the error is the
        // full channel variance.
        let s = o_estimation_stats(7, 1.0, 0.0, 10);
        assert_eq!(s.var_hat, 0.0);
        assert_relative_eq!(s.var_tilde, 1.0);
    }

    #[test]
    fn o_error_variance_shrinks_with_pilot_energy() {
        let mut prev = f64::INFINITY;
        for rho in [0.1, 1.0, 10.0, 100.0] {
            let s = o_estimation_stats(7, 1.0, rho, 10);
            assert!(s.var_tilde < prev);
            prev = s.var_tilde;
        }
    }
}
