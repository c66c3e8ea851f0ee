//! Scenario files: JSON descriptions of a cell, its terminals, targets and
//! simulation budgets. Field names carry explicit units: anything ending in
//! `_db` is in decibels, bare power fields are linear. Validation happens
//! entirely at load time and errors name the offending field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use jbb_core::estimation::estimation_quality;
use jbb_core::model::{
    db_to_linear, CellGeometry, OperatingPoint, PathLossProfile, Precoder, Scheme, SystemConfig,
};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSystem {
    pub m: usize,
    pub k: usize,
    pub mp: usize,
    pub tau_c: usize,
    pub tau_pu: usize,
    pub tau_po: usize,
    pub rho_u_db: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGeometry {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub path_loss_exponent: f64,
}

/// Either an explicit path-loss list or a seeded uniform drop in the cell.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDrop {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomDrop>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDrop {
    pub count: usize,
    pub seed: u64,
}

/// O-terminal placement: a direct gain, a distance from the base station in
/// cell radii, or a dB margin relative to the cell border.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOTerminal {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTargets {
    /// Net B-terminal sum rate, b/s/Hz.
    pub net_b_sum: f64,
    /// Net O-terminal rate, b/s/Hz.
    pub net_o: f64,
}

/// Operating point in dB or linear form; exactly one form per component.
#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOperatingPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_o_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_o: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMc {
    pub channel_draws: usize,
    pub scalar_draws: usize,
    pub seed: u64,
    /// Test fixture: evaluate the leakage prediction with a deliberately
    /// wrong formula so the verification gate trips.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inject_leakage_error: bool,
}

impl Default for ScenarioMc {
    fn default() -> Self {
        ScenarioMc {
            channel_draws: 100_000,
            scalar_draws: 1_000_000,
            seed: 1,
            inject_leakage_error: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub ratio_lo_db: f64,
    pub ratio_hi_db: f64,
    pub points: usize,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        ScenarioGrid { ratio_lo_db: -10.0, ratio_hi_db: 20.0, points: 121 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSweep {
    pub rho_u_lo_db: f64,
    pub rho_u_hi_db: f64,
    pub points: usize,
    /// Fixed broadcast power during the sweep; omit for no broadcast.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_o_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: ScenarioSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<ScenarioGeometry>,
    pub drop: ScenarioDrop,
    pub o_terminal: ScenarioOTerminal,
    pub targets: ScenarioTargets,
    pub precoder: Precoder,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<ScenarioOperatingPoint>,
    #[serde(default)]
    pub mc: ScenarioMc,
    #[serde(default)]
    pub grid: ScenarioGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<ScenarioSweep>,
}

/// A scenario after validation: core-domain values, ready for any command.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub cfg: SystemConfig,
    pub profile: PathLossProfile,
    pub gamma: Vec<f64>,
    pub precoder: Precoder,
    pub scheme: Scheme,
    pub operating_point: Option<OperatingPoint>,
    pub ratio_grid: Vec<f64>,
    /// SHA-256 of the scenario file bytes, embedded in every output.
    pub hash: String,
    /// Effective Monte Carlo seed after any command-line override.
    pub seed: u64,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn load(path: &std::path::Path, seed_override: Option<u64>) -> Result<Prepared, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| invalid(format!("scenario: cannot read {}: {}", path.display(), e)))?;
    let hash = hex(&Sha256::digest(&bytes));
    let scenario: Scenario = serde_json::from_slice(&bytes)
        .map_err(|e| invalid(format!("scenario: malformed JSON: {}", e)))?;
    prepare(scenario, hash, seed_override)
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

pub fn prepare(
    scenario: Scenario,
    hash: String,
    seed_override: Option<u64>,
) -> Result<Prepared, CliError> {
    let s = &scenario.system;
    if s.rho_u_db.is_nan() {
        return Err(invalid("system.rho_u_db: must be a finite dB value"));
    }
    let cfg = SystemConfig::new(s.m, s.k, s.mp, s.tau_c, s.tau_pu, s.tau_po, db_to_linear(s.rho_u_db))
        .map_err(|e| invalid(format!("system: {}", e)))?;

    let geometry = match scenario.geometry {
        Some(g) => Some(
            CellGeometry::new(g.inner_radius, g.outer_radius, g.path_loss_exponent)
                .map_err(|e| invalid(format!("geometry: {}", e)))?,
        ),
        None => None,
    };

    let betas = match (&scenario.drop.betas, &scenario.drop.random) {
        (Some(b), None) => {
            if b.len() != cfg.k {
                return Err(invalid(format!(
                    "drop.betas: expected system.k = {} entries, got {}",
                    cfg.k,
                    b.len()
                )));
            }
            b.clone()
        }
        (None, Some(r)) => {
            if r.count != cfg.k {
                return Err(invalid(format!(
                    "drop.random.count: must equal system.k = {}, got {}",
                    cfg.k, r.count
                )));
            }
            let geometry = geometry
                .ok_or_else(|| invalid("geometry: required when drop.random is used"))?;
            jbb_core::model::drop_terminals(geometry, r.count, r.seed).beta
        }
        _ => {
            return Err(invalid(
                "drop: provide exactly one of drop.betas or drop.random",
            ))
        }
    };

    let o = &scenario.o_terminal;
    let beta_o = match (o.beta_o, o.distance, o.margin_db) {
        (Some(b), None, None) => b,
        (None, Some(d), None) => {
            let geometry = geometry
                .ok_or_else(|| invalid("geometry: required when o_terminal.distance is used"))?;
            if !(d >= geometry.inner_radius && d <= geometry.outer_radius) {
                return Err(invalid(format!(
                    "o_terminal.distance: must lie in [{}, {}] cell radii, got {}",
                    geometry.inner_radius, geometry.outer_radius, d
                )));
            }
            geometry.gain_at(d)
        }
        (None, None, Some(m)) => {
            let geometry = geometry
                .ok_or_else(|| invalid("geometry: required when o_terminal.margin_db is used"))?;
            geometry.gain_at(geometry.outer_radius) * db_to_linear(m)
        }
        _ => {
            return Err(invalid(
                "o_terminal: provide exactly one of beta_o, distance or margin_db",
            ))
        }
    };

    let profile = PathLossProfile::new(betas, beta_o)
        .map_err(|e| invalid(format!("drop/o_terminal: {}", e)))?;

    if !(scenario.targets.net_b_sum > 0.0) {
        return Err(invalid("targets.net_b_sum: must be positive"));
    }
    if !(scenario.targets.net_o > 0.0) {
        return Err(invalid("targets.net_o: must be positive"));
    }

    let operating_point = match &scenario.operating_point {
        Some(op) => {
            let rho_b = one_power("operating_point.rho_b", op.rho_b_db, op.rho_b)?;
            let rho_o = one_power("operating_point.rho_o", op.rho_o_db, op.rho_o)?;
            Some(OperatingPoint { rho_b, rho_o, scheme: scenario.scheme })
        }
        None => None,
    };

    let g = &scenario.grid;
    if g.points < 2 {
        return Err(invalid("grid.points: need at least 2 ratio samples"));
    }
    if !(g.ratio_hi_db > g.ratio_lo_db) {
        return Err(invalid("grid.ratio_hi_db: must exceed grid.ratio_lo_db"));
    }
    let ratio_grid = jbb_core::solver::log_ratio_grid(g.ratio_lo_db, g.ratio_hi_db, g.points);

    if let Some(sw) = &scenario.sweep {
        if sw.points < 1 {
            return Err(invalid("sweep.points: need at least 1"));
        }
        if sw.points > 1 && !(sw.rho_u_hi_db > sw.rho_u_lo_db) {
            return Err(invalid("sweep.rho_u_hi_db: must exceed sweep.rho_u_lo_db"));
        }
    }

    if scenario.mc.channel_draws < 10_000 {
        return Err(invalid("mc.channel_draws: verification needs at least 10000"));
    }
    if scenario.mc.scalar_draws < 10_000 {
        return Err(invalid("mc.scalar_draws: verification needs at least 10000"));
    }

    let gamma = estimation_quality(&profile.beta, cfg.rho_u, cfg.tau_pu).gamma;
    let seed = seed_override.unwrap_or(scenario.mc.seed);
    Ok(Prepared {
        precoder: scenario.precoder,
        scheme: scenario.scheme,
        cfg,
        profile,
        gamma,
        operating_point,
        ratio_grid,
        hash,
        seed,
        scenario,
    })
}

fn one_power(field: &str, db: Option<f64>, linear: Option<f64>) -> Result<f64, CliError> {
    match (db, linear) {
        (Some(d), None) => {
            if d.is_nan() {
                return Err(invalid(format!("{}_db: must not be NaN", field)));
            }
            Ok(db_to_linear(d))
        }
        (None, Some(l)) => {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(invalid(format!("{}: linear power must be finite and >= 0", field)));
            }
            Ok(l)
        }
        (None, None) => Err(invalid(format!("{}: missing (give {}_db or linear {})", field, field, field))),
        (Some(_), Some(_)) => {
            Err(invalid(format!("{}: give either the _db or the linear form, not both", field)))
        }
    }
}

/// The sweep's uplink-SNR grid in linear power, ascending.
pub fn sweep_grid(sw: &ScenarioSweep) -> Vec<f64> {
    if sw.points == 1 {
        return vec![db_to_linear(sw.rho_u_lo_db)];
    }
    let step = (sw.rho_u_hi_db - sw.rho_u_lo_db) / (sw.points - 1) as f64;
    (0..sw.points).map(|i| db_to_linear(sw.rho_u_lo_db + step * i as f64)).collect()
}
