//! Operating-point machinery built on the closed-form engine: traces the
//! constant-rate feasibility curves over the power ratio, matches OA
//! transmission to a JBB operating point under the equal-energy and
//! equal-B-rate constraints, optimizes the OA resource split, locates curve
//! intersections, and runs the uplink-SNR sweep.
//!
//! Coordinates: every curve is parameterized by the ratio r = rho_o/rho_b
//! and reports the total power rho_d = rho_b + rho_o at which the traced
//! scheme hits its target rate. OA points are expressed in the same JBB
//! coordinates as everything else; the matched OA powers (epsilon, rho_b_oa,
//! rho_o_oa) ride along as metadata. Powers are linear here, decibels only
//! at the presentation layer.

use serde::Serialize;

use crate::closedform::{
    b_net_sum_maxmin, maxmin_rate, o_rate_bound, o_rate_exact, oa_required_rho_b, RateError,
};
use crate::estimation::estimation_quality;
use crate::model::{rho_b_prime, OperatingPoint, PathLossProfile, Precoder, Scheme, SystemConfig};

/// Lower and upper bracket for every power bisection, in linear power.
const POWER_LO: f64 = 1e-6;
const POWER_HI: f64 = 1e6;

/// OA transmission matched to a JBB operating point: same total energy per
/// coherence interval, same per-interval B rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OAMatch {
    pub epsilon: f64,
    pub rho_b_oa: f64,
    pub rho_o_oa: f64,
    pub feasible: bool,
    /// Net OA O-terminal rate; zero when the match is infeasible.
    pub o_rate: f64,
}

impl OAMatch {
    fn infeasible(epsilon: f64) -> Self {
        OAMatch { epsilon, rho_b_oa: f64::NAN, rho_o_oa: f64::NAN, feasible: false, o_rate: 0.0 }
    }
}

/// Which O-rate formula a trace follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RateKind {
    Exact,
    Bound,
}

/// Identifies which constant-rate curve a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    BTargetJbbPrime,
    OTargetJbbPrime,
    OTargetOa,
    OTargetJbbPrimeBound,
    OTargetOaBound,
}

impl CurveKind {
    pub fn id(self) -> &'static str {
        match self {
            CurveKind::BTargetJbbPrime => "b_target_jbb_prime",
            CurveKind::OTargetJbbPrime => "o_target_jbb_prime",
            CurveKind::OTargetOa => "o_target_oa",
            CurveKind::OTargetJbbPrimeBound => "o_target_jbb_prime_bound",
            CurveKind::OTargetOaBound => "o_target_oa_bound",
        }
    }
}

/// One traced point: the total power at which the curve's scheme meets its
/// target at this power ratio.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub kind: CurveKind,
    /// rho_o / rho_b, linear.
    pub ratio: f64,
    /// rho_b + rho_o, linear; NaN when infeasible.
    pub rho_d: f64,
    pub feasible: bool,
    /// The rate actually achieved at the returned point.
    pub rate: f64,
    /// Matched OA transmission for OA curves.
    pub oa: Option<OAMatch>,
}

impl CurvePoint {
    pub fn rho_b(&self) -> f64 {
        self.rho_d / (1.0 + self.ratio)
    }

    pub fn rho_o(&self) -> f64 {
        self.rho_d * self.ratio / (1.0 + self.ratio)
    }
}

/// Log-spaced power-ratio grid, inclusive of both endpoints.
pub fn log_ratio_grid(lo_db: f64, hi_db: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let step = (hi_db - lo_db) / (points - 1) as f64;
    (0..points).map(|i| crate::model::db_to_linear(lo_db + step * i as f64)).collect()
}

/// Bisects rho on [1e-6, 1e6] for f(rho) = target, assuming f nondecreasing.
/// Returns (rho, f(rho)) or None when even the upper bracket cannot reach
/// the target (the rate saturates below it).
fn bisect_power(target: f64, f: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let tol = 1e-10 * target.abs().max(1.0);
    let hi_val = f(POWER_HI);
    if hi_val < target {
        return None;
    }
    let lo_val = f(POWER_LO);
    if lo_val >= target {
        return Some((POWER_LO, lo_val));
    }
    let (mut lo, mut hi) = (POWER_LO, POWER_HI);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let val = f(mid);
        if (val - target).abs() <= tol {
            return Some((mid, val));
        }
        if val < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo * hi).sqrt();
    Some((mid, f(mid)))
}

/// Matches OA to the JBB operating point (rho_b, rho_o) at the given
/// resource split: the OA B power comes from requiring the same per-interval
/// max-min rate the JBB' B-terminals get, and the OA broadcast power absorbs
/// the remaining energy of the interval. Infeasibility is a value: either no
/// power reaches the rate at this split, or the energy budget leaves a
/// negative broadcast power.
pub fn match_oa(
    point: OperatingPoint,
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    epsilon: f64,
) -> OAMatch {
    match_oa_kind(point, cfg, profile, gamma, precoder, epsilon, RateKind::Exact)
}

fn match_oa_kind(
    point: OperatingPoint,
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    epsilon: f64,
    kind: RateKind,
) -> OAMatch {
    debug_assert!(epsilon > 0.0 && epsilon < 1.0);
    let boosted = match rho_b_prime(point.rho_b, cfg.frame(), cfg.tau_po) {
        Ok(r) => r,
        Err(_) => return OAMatch::infeasible(epsilon),
    };
    let r_bar = maxmin_rate(cfg.m, boosted, point.rho_o, &profile.beta, gamma, precoder);
    let rho_b_oa = match oa_required_rho_b(cfg.m, &profile.beta, gamma, r_bar, epsilon, precoder) {
        Ok(r) => r,
        Err(RateError::InfeasibleTarget { .. }) => return OAMatch::infeasible(epsilon),
        Err(e) => unreachable!("OA power inversion failed structurally: {e}"),
    };
    let rho_d = point.rho_b + point.rho_o;
    let rho_o_oa = (rho_d - (1.0 - epsilon) * rho_b_oa) / epsilon;
    if rho_o_oa < 0.0 {
        return OAMatch::infeasible(epsilon);
    }
    let per_interval = match kind {
        RateKind::Exact => o_rate_exact(cfg, profile.beta_o, rho_o_oa, 0.0),
        RateKind::Bound => o_rate_bound(cfg, profile.beta_o, rho_o_oa, 0.0),
    }
    .expect("O-rate evaluation converges for nonnegative powers");
    OAMatch {
        epsilon,
        rho_b_oa,
        rho_o_oa,
        feasible: true,
        o_rate: cfg.o_net_weight() * epsilon * per_interval,
    }
}

/// Maximizes the matched OA net O-rate over the resource split: a 0.005-step
/// grid sweep over (0,1) followed by golden-section refinement of the best
/// cell down to 1e-4. All-infeasible sweeps come back flagged with zero rate.
pub fn optimize_epsilon(
    point: OperatingPoint,
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
) -> OAMatch {
    optimize_epsilon_kind(point, cfg, profile, gamma, precoder, RateKind::Exact)
}

fn optimize_epsilon_kind(
    point: OperatingPoint,
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    kind: RateKind,
) -> OAMatch {
    let eval = |eps: f64| match_oa_kind(point, cfg, profile, gamma, precoder, eps, kind);
    let mut best: Option<OAMatch> = None;
    let mut best_eps = f64::NAN;
    let mut i = 1;
    while (i as f64) * 0.005 < 1.0 {
        let eps = i as f64 * 0.005;
        let m = eval(eps);
        if m.feasible && best.as_ref().map_or(true, |b| m.o_rate > b.o_rate) {
            best_eps = eps;
            best = Some(m);
        }
        i += 1;
    }
    let Some(coarse) = best else {
        return OAMatch::infeasible(f64::NAN);
    };
    // Golden-section refinement inside the winning cell.
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = (best_eps - 0.005).max(1e-4);
    let mut b = (best_eps + 0.005).min(1.0 - 1e-4);
    let value = |m: &OAMatch| if m.feasible { m.o_rate } else { -1.0 };
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while b - a > 1e-4 {
        if value(&fc) >= value(&fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    let refined = if value(&fc) >= value(&fd) { fc } else { fd };
    if value(&refined) >= coarse.o_rate {
        refined
    } else {
        coarse
    }
}

fn map_grid<T: Send>(grid: &[f64], f: impl Fn(f64) -> T + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(|&r| f(r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(|&r| f(r)).collect()
    }
}

/// Traces the constant-net-B-rate curve of JBB': for each power ratio, the
/// total power at which the net max-min B sum rate equals the target.
pub fn trace_b_curve(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    target_net_b: f64,
    ratio_grid: &[f64],
) -> Vec<CurvePoint> {
    assert!(target_net_b > 0.0);
    map_grid(ratio_grid, |ratio| {
        let res = bisect_power(target_net_b, |rho_d| {
            let op = OperatingPoint {
                rho_b: rho_d / (1.0 + ratio),
                rho_o: rho_d * ratio / (1.0 + ratio),
                scheme: Scheme::JbbPrime,
            };
            b_net_sum_maxmin(cfg, &profile.beta, gamma, op, precoder)
                .expect("JBB' operating point evaluates on a validated config")
        });
        match res {
            Some((rho_d, rate)) => CurvePoint {
                kind: CurveKind::BTargetJbbPrime,
                ratio,
                rho_d,
                feasible: true,
                rate,
                oa: None,
            },
            None => CurvePoint {
                kind: CurveKind::BTargetJbbPrime,
                ratio,
                rho_d: f64::NAN,
                feasible: false,
                rate: 0.0,
                oa: None,
            },
        }
    })
}

/// The four constant-net-O-rate curves of the figure: exact and Jensen-bound
/// variants for JBB' and for energy/rate-matched OA. Bound curves are empty
/// when M' = 1, where the bound does not exist.
#[derive(Debug, Clone, Serialize)]
pub struct OCurves {
    pub jbb_prime: Vec<CurvePoint>,
    pub oa: Vec<CurvePoint>,
    pub jbb_prime_bound: Vec<CurvePoint>,
    pub oa_bound: Vec<CurvePoint>,
}

fn trace_o_jbb_prime(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    target_net_o: f64,
    ratio_grid: &[f64],
    kind: RateKind,
) -> Vec<CurvePoint> {
    let curve_kind = match kind {
        RateKind::Exact => CurveKind::OTargetJbbPrime,
        RateKind::Bound => CurveKind::OTargetJbbPrimeBound,
    };
    let _ = (gamma, precoder);
    map_grid(ratio_grid, |ratio| {
        let res = bisect_power(target_net_o, |rho_d| {
            let rho_b = rho_d / (1.0 + ratio);
            let rho_o = rho_d * ratio / (1.0 + ratio);
            let boosted = rho_b_prime(rho_b, cfg.frame(), cfg.tau_po)
                .expect("validated config has room for the payload boost");
            let per_interval = match kind {
                RateKind::Exact => o_rate_exact(cfg, profile.beta_o, rho_o, boosted),
                RateKind::Bound => o_rate_bound(cfg, profile.beta_o, rho_o, boosted),
            }
            .expect("O-rate evaluation converges for positive powers");
            cfg.o_net_weight() * per_interval
        });
        match res {
            Some((rho_d, rate)) => {
                CurvePoint { kind: curve_kind, ratio, rho_d, feasible: true, rate, oa: None }
            }
            None => CurvePoint {
                kind: curve_kind,
                ratio,
                rho_d: f64::NAN,
                feasible: false,
                rate: 0.0,
                oa: None,
            },
        }
    })
}

fn trace_o_oa(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    target_net_o: f64,
    ratio_grid: &[f64],
    kind: RateKind,
) -> Vec<CurvePoint> {
    let curve_kind = match kind {
        RateKind::Exact => CurveKind::OTargetOa,
        RateKind::Bound => CurveKind::OTargetOaBound,
    };
    map_grid(ratio_grid, |ratio| {
        let best = std::cell::Cell::new(None::<OAMatch>);
        let res = bisect_power(target_net_o, |rho_d| {
            let op = OperatingPoint {
                rho_b: rho_d / (1.0 + ratio),
                rho_o: rho_d * ratio / (1.0 + ratio),
                scheme: Scheme::JbbPrime,
            };
            let m = optimize_epsilon_kind(op, cfg, profile, gamma, precoder, kind);
            let rate = m.o_rate;
            best.set(Some(m));
            rate
        });
        match res {
            Some((rho_d, rate)) => CurvePoint {
                kind: curve_kind,
                ratio,
                rho_d,
                feasible: true,
                rate,
                oa: best.take(),
            },
            None => CurvePoint {
                kind: curve_kind,
                ratio,
                rho_d: f64::NAN,
                feasible: false,
                rate: 0.0,
                oa: None,
            },
        }
    })
}

/// Traces the JBB' and OA O-terminal curves (exact and bound variants) for a
/// common target on a common ratio grid.
pub fn trace_o_curves(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    gamma: &[f64],
    precoder: Precoder,
    target_net_o: f64,
    ratio_grid: &[f64],
) -> OCurves {
    assert!(target_net_o > 0.0);
    let bound_ok = cfg.mp >= 2;
    OCurves {
        jbb_prime: trace_o_jbb_prime(cfg, profile, gamma, precoder, target_net_o, ratio_grid, RateKind::Exact),
        oa: trace_o_oa(cfg, profile, gamma, precoder, target_net_o, ratio_grid, RateKind::Exact),
        jbb_prime_bound: if bound_ok {
            trace_o_jbb_prime(cfg, profile, gamma, precoder, target_net_o, ratio_grid, RateKind::Bound)
        } else {
            Vec::new()
        },
        oa_bound: if bound_ok {
            trace_o_oa(cfg, profile, gamma, precoder, target_net_o, ratio_grid, RateKind::Bound)
        } else {
            Vec::new()
        },
    }
}

/// Where two rho_d(ratio) traces cross.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Intersection {
    pub ratio: f64,
    pub rho_d: f64,
}

impl Intersection {
    pub fn rho_b(&self) -> f64 {
        self.rho_d / (1.0 + self.ratio)
    }

    pub fn rho_o(&self) -> f64 {
        self.rho_d * self.ratio / (1.0 + self.ratio)
    }
}

/// Locates the crossing of two curves sampled on the same ratio grid by sign
/// change of the rho_d gap in dB, with linear interpolation in (log ratio,
/// dB) coordinates. Returns None when the feasible overlap never crosses.
pub fn find_intersection(a: &[CurvePoint], b: &[CurvePoint]) -> Option<Intersection> {
    assert_eq!(a.len(), b.len(), "curves must share a ratio grid");
    let mut prev: Option<(f64, f64, f64)> = None;
    for (pa, pb) in a.iter().zip(b) {
        debug_assert!((pa.ratio - pb.ratio).abs() <= 1e-12 * pa.ratio.abs().max(1.0));
        if !pa.feasible || !pb.feasible {
            prev = None;
            continue;
        }
        let da = crate::model::linear_to_db(pa.rho_d);
        let db = crate::model::linear_to_db(pb.rho_d);
        let diff = da - db;
        if diff == 0.0 {
            return Some(Intersection { ratio: pa.ratio, rho_d: pa.rho_d });
        }
        if let Some((r0, d0, rho_db0)) = prev {
            if d0.signum() != diff.signum() {
                let t = d0 / (d0 - diff);
                let lr = r0.ln() + t * (pa.ratio.ln() - r0.ln());
                let rho_db = rho_db0 + t * (da - rho_db0);
                return Some(Intersection {
                    ratio: lr.exp(),
                    rho_d: crate::model::db_to_linear(rho_db),
                });
            }
        }
        prev = Some((pa.ratio, diff, da));
    }
    None
}

/// dB of extra total power the second intersection needs over the first;
/// positive when `costlier` sits above `cheaper`.
pub fn power_saving_db(cheaper: &Intersection, costlier: &Intersection) -> f64 {
    crate::model::linear_to_db(costlier.rho_d) - crate::model::linear_to_db(cheaper.rho_d)
}

/// One point of the uplink-SNR sweep: the B power needed to keep the net sum
/// rate at its target, or None where no power suffices.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub rho_u: f64,
    pub required_rho_b: Option<f64>,
}

/// For each uplink SNR, re-estimates the channels and bisects the B power
/// that holds the net max-min sum rate at the target, with the broadcast
/// power fixed.
pub fn sweep_uplink_snr(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    precoder: Precoder,
    scheme: Scheme,
    target_net_b_sum: f64,
    rho_o: f64,
    rho_u_grid: &[f64],
) -> Vec<SweepPoint> {
    assert!(target_net_b_sum > 0.0);
    map_grid(rho_u_grid, |rho_u| {
        let local = SystemConfig { rho_u, ..*cfg };
        let quality = estimation_quality(&profile.beta, rho_u, cfg.tau_pu);
        let res = bisect_power(target_net_b_sum, |rho_b| {
            let op = OperatingPoint { rho_b, rho_o, scheme };
            b_net_sum_maxmin(&local, &profile.beta, &quality.gamma, op, precoder)
                .expect("sweep operating point evaluates on a validated config")
        });
        SweepPoint { rho_u, required_rho_b: res.map(|(rho_b, _)| rho_b) }
    })
}
