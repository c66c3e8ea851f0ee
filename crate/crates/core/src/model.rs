//! Configuration, geometry and operating-point types shared by every other
//! module, plus the dB conventions and TDD frame-budget arithmetic.
//!
//! Everything downstream computes in linear power units; decibels exist only
//! at I/O boundaries. The TDD frame splits a coherence interval of `tau_c`
//! symbols into `tau_pu` uplink pilots and a symmetric payload split
//! `tau_du = tau_dd = (tau_c - tau_pu)/2`, which is why odd remainders are
//! rejected instead of rounded: the prelog factors stay exact.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Converts a linear power ratio to decibels. Zero maps to `-inf`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("antenna count M must be at least 1")]
    NoAntennas,
    #[error("B-terminal count K={k} must be smaller than antenna count M={m}")]
    TooManyTerminals { m: usize, k: usize },
    #[error("broadcast subspace dimension M' must be at least 1")]
    EmptySubspace,
    #[error("M'={mp} does not fit in the nullspace: M-K={free} dimensions free")]
    SubspaceTooLarge { mp: usize, free: usize },
    #[error("uplink pilot length tau_pu={tau_pu} must lie in [K={k}, tau_c={tau_c}]")]
    BadUplinkPilots { tau_pu: usize, k: usize, tau_c: usize },
    #[error("O-pilot length tau_po={tau_po} must lie in [M'={mp}, tau_c={tau_c}]")]
    BadOPilots { tau_po: usize, mp: usize, tau_c: usize },
    #[error("tau_c-tau_pu = {rem} is odd; the payload split tau_du = tau_dd must be exact")]
    OddPayloadSplit { rem: usize },
    #[error("uplink SNR rho_u must be positive and finite, got {rho_u}")]
    BadUplinkSnr { rho_u: f64 },
    #[error("no downlink payload symbols remain: tau_po={tau_po} >= tau_dd={tau_dd}")]
    InfeasibleFrame { tau_po: usize, tau_dd: usize },
    #[error("path-loss gain must be strictly positive and finite, got {beta}")]
    BadGain { beta: f64 },
    #[error("cell geometry requires 0 < inner_radius < outer_radius")]
    BadGeometry,
}

/// Transmission scheme for an operating point.
///
/// `Jbb` broadcasts concurrently with beamforming over the whole downlink
/// payload; `JbbPrime` silences the beamformed signal during the O-terminal
/// pilot symbols (and boosts the payload power to `rho_b_prime` so the energy
/// per coherence interval is unchanged); `Oa` puts the two terminal classes
/// on disjoint fractions of the coherence intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Jbb,
    JbbPrime,
    Oa,
}

/// Linear precoder family for the B-terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precoder {
    Mr,
    Zf,
}

/// Antenna/terminal counts, broadcast subspace dimension, frame lengths and
/// uplink SNR. Validated on construction; all other modules assume a valid
/// config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base station antenna count M.
    pub m: usize,
    /// Number of B-terminals K (may be 0 for a broadcast-only system).
    pub k: usize,
    /// Broadcast subspace dimension M'.
    pub mp: usize,
    /// Coherence interval length in symbols.
    pub tau_c: usize,
    /// Uplink pilot symbols per coherence interval.
    pub tau_pu: usize,
    /// Downlink O-terminal pilot symbols per coherence interval.
    pub tau_po: usize,
    /// Uplink SNR (linear).
    pub rho_u: f64,
}

impl SystemConfig {
    pub fn new(
        m: usize,
        k: usize,
        mp: usize,
        tau_c: usize,
        tau_pu: usize,
        tau_po: usize,
        rho_u: f64,
    ) -> Result<Self, ModelError> {
        if m < 1 {
            return Err(ModelError::NoAntennas);
        }
        if k >= m {
            return Err(ModelError::TooManyTerminals { m, k });
        }
        if mp < 1 {
            return Err(ModelError::EmptySubspace);
        }
        if tau_pu < k || tau_pu > tau_c {
            return Err(ModelError::BadUplinkPilots { tau_pu, k, tau_c });
        }
        if tau_po < mp || tau_po > tau_c {
            return Err(ModelError::BadOPilots { tau_po, mp, tau_c });
        }
        if (tau_c - tau_pu) % 2 != 0 {
            return Err(ModelError::OddPayloadSplit { rem: tau_c - tau_pu });
        }
        if !(rho_u > 0.0 && rho_u.is_finite()) {
            return Err(ModelError::BadUplinkSnr { rho_u });
        }
        Ok(Self { m, k, mp, tau_c, tau_pu, tau_po, rho_u })
    }

    /// Checks that the broadcast subspace fits for the given scheme: inside
    /// the estimated-channel nullspace (M' <= M-K) for JBB/JBB', anywhere in
    /// the array (M' <= M) for OA.
    pub fn check_subspace(&self, scheme: Scheme) -> Result<(), ModelError> {
        let free = match scheme {
            Scheme::Jbb | Scheme::JbbPrime => self.m - self.k,
            Scheme::Oa => self.m,
        };
        if self.mp > free {
            return Err(ModelError::SubspaceTooLarge { mp: self.mp, free });
        }
        Ok(())
    }

    pub fn frame(&self) -> FrameBudget {
        let half = (self.tau_c - self.tau_pu) / 2;
        FrameBudget { tau_du: half, tau_dd: half }
    }

    /// Fraction of the frame carrying B payload under the given scheme, i.e.
    /// the prelog applied to a per-terminal per-interval B rate. Multiply by
    /// K for sum rates. JBB' loses `tau_po` payload symbols to silence; OA
    /// does not (its (1-eps) resource split is part of the per-interval rate).
    pub fn b_net_weight(&self, scheme: Scheme) -> f64 {
        let f = self.frame();
        match scheme {
            Scheme::Jbb | Scheme::Oa => f.tau_dd as f64 / self.tau_c as f64,
            Scheme::JbbPrime => (f.tau_dd as f64 - self.tau_po as f64) / self.tau_c as f64,
        }
    }

    /// Prelog applied to the O-terminal per-interval rate; the O-pilot cost
    /// is paid under JBB' and OA alike.
    pub fn o_net_weight(&self) -> f64 {
        let f = self.frame();
        (f.tau_dd as f64 - self.tau_po as f64) / self.tau_c as f64
    }
}

/// Symmetric uplink/downlink payload split of a coherence interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameBudget {
    pub tau_du: usize,
    pub tau_dd: usize,
}

/// Payload power boost that keeps the energy per coherence interval constant
/// when the beamformed signal is silenced during `tau_po` O-pilot symbols.
pub fn rho_b_prime(rho_b: f64, budget: FrameBudget, tau_po: usize) -> Result<f64, ModelError> {
    if tau_po >= budget.tau_dd {
        return Err(ModelError::InfeasibleFrame { tau_po, tau_dd: budget.tau_dd });
    }
    Ok(rho_b * budget.tau_dd as f64 / (budget.tau_dd - tau_po) as f64)
}

/// Large-scale gains for the K B-terminals and the single O-terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossProfile {
    pub beta: Vec<f64>,
    pub beta_o: f64,
}

impl PathLossProfile {
    pub fn new(beta: Vec<f64>, beta_o: f64) -> Result<Self, ModelError> {
        for &b in beta.iter().chain(std::iter::once(&beta_o)) {
            if !(b > 0.0 && b.is_finite()) {
                return Err(ModelError::BadGain { beta: b });
            }
        }
        Ok(Self { beta, beta_o })
    }

    /// Replaces the O-terminal gain, e.g. to apply a fading margin on top of
    /// the border value.
    pub fn with_beta_o(mut self, beta_o: f64) -> Result<Self, ModelError> {
        if !(beta_o > 0.0 && beta_o.is_finite()) {
            return Err(ModelError::BadGain { beta: beta_o });
        }
        self.beta_o = beta_o;
        Ok(self)
    }
}

/// Downlink power split with its scheme tag. Powers are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub rho_b: f64,
    pub rho_o: f64,
    pub scheme: Scheme,
}

impl OperatingPoint {
    /// Total downlink power rho_d = rho_b + rho_o.
    pub fn rho_d(&self) -> f64 {
        self.rho_b + self.rho_o
    }
}

/// Annulus cell with a distance-power path loss law. Distances are in units
/// of the outer cell radius in the standard normalization (outer radius 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub pathloss_exponent: f64,
}

impl CellGeometry {
    pub fn new(inner_radius: f64, outer_radius: f64, pathloss_exponent: f64) -> Result<Self, ModelError> {
        if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
            return Err(ModelError::BadGeometry);
        }
        Ok(Self { inner_radius, outer_radius, pathloss_exponent })
    }

    /// Large-scale gain at distance `d` from the base station, `d^-exponent`.
    pub fn gain_at(&self, d: f64) -> f64 {
        d.powf(-self.pathloss_exponent)
    }

    /// Distance halfway between the inner and outer radius.
    pub fn halfway(&self) -> f64 {
        (self.inner_radius + self.outer_radius) / 2.0
    }
}

/// Draws K terminal positions uniformly over the annulus area and returns
/// their large-scale gains. The O-terminal is placed at the cell border;
/// use [`PathLossProfile::with_beta_o`] to move it.
///
/// Uniform-over-area sampling uses the inverse CDF of the radial coordinate:
/// d = sqrt(u·(R_out² - R_in²) + R_in²) with u uniform on [0,1). The angular
/// coordinate does not influence the gain and is not drawn.
pub fn drop_terminals(geometry: CellGeometry, k: usize, seed: u64) -> PathLossProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2_in = geometry.inner_radius * geometry.inner_radius;
    let r2_out = geometry.outer_radius * geometry.outer_radius;
    let beta = (0..k)
        .map(|_| {
            let u: f64 = rng.gen();
            let d = (u * (r2_out - r2_in) + r2_in).sqrt();
            geometry.gain_at(d)
        })
        .collect();
    PathLossProfile { beta, beta_o: geometry.gain_at(geometry.outer_radius) }
}
