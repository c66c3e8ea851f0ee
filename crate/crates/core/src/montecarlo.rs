//! The simulation oracle. Everything the closed-form engine predicts is
//! re-measured here from raw channel draws: fading realizations, uplink MMSE
//! estimation, MR/ZF precoders, the random broadcast basis, the downlink
//! O-pilot phase and the resulting payload SINRs. The two routes share no
//! formulas beyond the MMSE estimator scales, so agreement is evidence, not
//! tautology.
//!
//! Determinism: draws are split into fixed chunks of [`CHUNK`] realizations.
//! Chunk c of a measurement with seed s uses an independent ChaCha stream
//! derived from (s, domain, c), and partial sums are merged in chunk order
//! with compensated summation. Results are therefore bit-identical for any
//! worker count, with or without the `parallel` feature.
//!
//! Within one draw the RNG consumption order is fixed: channel matrix, pilot
//! noise, broadcast basis, O-channel, O-pilot noise, then any interfering
//! payload symbols. Keep it that way; reordering silently changes every
//! frozen statistic downstream.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::closedform::{maxmin_control, sinr_b_mr, sinr_b_zf, RateError};
use crate::estimation::{estimation_quality, o_estimation_stats};
use crate::linalg::{herm_dot, norm_sq, project_out, qr, rinv_herm_col, CMat, LinalgError, C64};
use crate::model::{rho_b_prime, ModelError, OperatingPoint, PathLossProfile, Precoder, Scheme, SystemConfig};

/// Fixed number of realizations per RNG chunk.
pub const CHUNK: usize = 1024;

const DOMAIN_B: u64 = 1;
const DOMAIN_O: u64 = 2;
const DOMAIN_JENSEN: u64 = 3;

#[derive(Debug, Error)]
pub enum McError {
    #[error("estimated channel matrix is numerically singular: {0}")]
    SingularChannel(#[from] LinalgError),
    #[error("broadcast subspace dimension {mp} exceeds the free dimensions {free}")]
    SubspaceTooLarge { mp: usize, free: usize },
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One fading realization with its uplink pilot estimate.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub g: CMat,
    pub g_hat: CMat,
    pub g_tilde: CMat,
}

impl ChannelRealization {
    /// Replaces the estimate by the true channel, zeroing the error. Used to
    /// check that interference terms caused purely by estimation error vanish.
    pub fn perfect_csi(&self) -> ChannelRealization {
        ChannelRealization {
            g: self.g.clone(),
            g_hat: self.g.clone(),
            g_tilde: CMat::zeros(self.g.rows(), self.g.cols()),
        }
    }
}

fn draw_cn(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * (var / 2.0).sqrt()
}

/// Draws one channel realization and forms its MMSE estimate from a
/// simulated orthogonal-pilot uplink observation at SNR rho_u.
pub fn draw_realization(cfg: &SystemConfig, profile: &PathLossProfile, rng: &mut ChaCha8Rng) -> ChannelRealization {
    let (m, k) = (cfg.m, cfg.k);
    let mut g = CMat::zeros(m, k);
    let mut g_hat = CMat::zeros(m, k);
    let mut g_tilde = CMat::zeros(m, k);
    let snr = (cfg.tau_pu as f64 * cfg.rho_u).sqrt();
    for j in 0..k {
        let beta = profile.beta[j];
        // After despreading the orthogonal pilots, the per-antenna
        // observation is y = sqrt(tau_pu rho_u) g + n with unit noise.
        let scale = snr * beta / (1.0 + cfg.tau_pu as f64 * cfg.rho_u * beta);
        for i in 0..m {
            let gi = draw_cn(rng, beta);
            let noise = draw_cn(rng, 1.0);
            let y = snr * gi + noise;
            let est = scale * y;
            g[(i, j)] = gi;
            g_hat[(i, j)] = est;
            g_tilde[(i, j)] = est - gi;
        }
    }
    ChannelRealization { g, g_hat, g_tilde }
}

/// Beamforming vectors for one realization, columns indexed by terminal.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub v: CMat,
    pub precoder: Precoder,
}

/// Builds MR or ZF beamformers from the estimated channels, scaled so that
/// the total radiated power is one on average over realizations.
pub fn build_precoders(
    cfg: &SystemConfig,
    real: &ChannelRealization,
    eta: &[f64],
    gamma: &[f64],
    precoder: Precoder,
) -> Result<PrecoderSet, McError> {
    let (m, k) = (cfg.m, cfg.k);
    let mut v = CMat::zeros(m, k);
    match precoder {
        Precoder::Mr => {
            for j in 0..k {
                let scale = (eta[j] / (m as f64 * gamma[j])).sqrt();
                for i in 0..m {
                    v[(i, j)] = scale * real.g_hat[(i, j)];
                }
            }
        }
        Precoder::Zf => {
            let f = qr(&real.g_hat)?;
            let ratio = f.diag_ratio();
            if ratio > 1e12 {
                return Err(McError::SingularChannel(LinalgError::IllConditioned { ratio }));
            }
            for j in 0..k {
                // Column j of G_hat (G_hat^H G_hat)^{-1} is Q R^{-H} e_j.
                let y = rinv_herm_col(&f.r, j);
                let col = f.q.apply(&y);
                let scale = (eta[j] * gamma[j] * (m - k) as f64).sqrt();
                for i in 0..m {
                    v[(i, j)] = scale * col[i];
                }
            }
        }
    }
    Ok(PrecoderSet { v, precoder })
}

/// Orthonormal broadcast basis living in the orthogonal complement of the
/// estimated B channels.
#[derive(Debug, Clone)]
pub struct NullBasis {
    pub u: CMat,
}

/// Draws a uniformly random M' frame orthogonal to span(g_hat). Passing a
/// zero-column matrix gives the OA case of an isotropic frame in the full
/// space.
///
/// Construction: i.i.d. complex Gaussian columns are projected onto the
/// complement and orthonormalized with the triangular diagonal kept positive
/// real, which makes the frame Haar distributed on the complement.
pub fn build_null_basis(g_hat: &CMat, mp: usize, rng: &mut ChaCha8Rng) -> Result<NullBasis, McError> {
    let m = g_hat.rows();
    let k = g_hat.cols();
    let free = m - k;
    if mp > free {
        return Err(McError::SubspaceTooLarge { mp, free });
    }
    let mut x = CMat::zeros(m, mp);
    for j in 0..mp {
        for i in 0..m {
            x[(i, j)] = draw_cn(rng, 1.0);
        }
    }
    if k > 0 {
        let f = qr(g_hat)?;
        for j in 0..mp {
            project_out(&f.q, x.col_mut(j));
        }
    }
    let f = qr(&x)?;
    Ok(NullBasis { u: f.q })
}

/// Neumaier compensated accumulator; the chunk-ordered merges run through
/// this so that long measurements keep full precision deterministically.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn stream_rng(seed: u64, domain: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) | chunk);
    rng
}

/// Runs `f` once per chunk and returns the partials in chunk order. With the
/// `parallel` feature the chunks are farmed out to rayon; order of the
/// returned vector is identical either way.
fn run_chunks<P, F>(n_draws: usize, seed: u64, domain: u64, f: F) -> Vec<P>
where
    P: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> P + Sync,
{
    let n_chunks = n_draws.div_ceil(CHUNK);
    let len = |c: usize| {
        if c + 1 == n_chunks && n_draws % CHUNK != 0 {
            n_draws % CHUNK
        } else {
            CHUNK
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_chunks)
            .into_par_iter()
            .map(|c| f(&mut stream_rng(seed, domain, c as u64), len(c)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_chunks).map(|c| f(&mut stream_rng(seed, domain, c as u64), len(c))).collect()
    }
}

/// Payload powers actually transmitted per scheme: JBB' boosts the B power
/// into the shortened payload, OA turns the broadcast off during B slots.
fn payload_powers(cfg: &SystemConfig, op: OperatingPoint) -> Result<(f64, f64), ModelError> {
    Ok(match op.scheme {
        Scheme::Jbb => (op.rho_b, op.rho_o),
        Scheme::JbbPrime => (rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po)?, op.rho_o),
        Scheme::Oa => (op.rho_b, 0.0),
    })
}

/// Empirical decomposition of one B-terminal's received power.
#[derive(Debug, Clone, Serialize)]
pub struct BTerminalTerms {
    /// Power of the deterministic useful part, rho_b |E[g^H v]|^2.
    pub useful_power: f64,
    /// Variance of the own-beam gain around its mean (contains the own
    /// estimation-error part).
    pub fluct_var: f64,
    /// Total estimation-error coupling rho_b E[sum_j |g_tilde^H v_j|^2],
    /// reported as a diagnostic; parts of it also live in fluct/intra.
    pub est_var: f64,
    /// Cross-beam interference rho_b E[sum_{j!=k} |g^H v_j|^2].
    pub intra_var: f64,
    /// Broadcast leakage rho_o E[|g^H U q|^2].
    pub leak_var: f64,
    /// useful / (fluct + intra + leak + 1).
    pub empirical_sinr: f64,
    /// The closed-form SINR at the same powers and weights.
    pub closed_sinr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BTermMeasurement {
    pub terms: Vec<BTerminalTerms>,
    /// Average total radiated beamforming power, must sit at 1.
    pub mean_sum_v_norm: f64,
    /// Standard error of that average.
    pub sum_v_norm_se: f64,
    pub n_draws: usize,
}

struct BPartial {
    c_re: Vec<f64>,
    c_im: Vec<f64>,
    abs2_c: Vec<f64>,
    cross: Vec<f64>,
    est: Vec<f64>,
    leak: Vec<f64>,
    v_norm: f64,
    v_norm_sq: f64,
}

/// Measures every term of the B-terminal signal decomposition by averaging
/// conditional variances over channel and basis draws (symbols are averaged
/// out analytically, which only removes noise from the estimate). Weights are
/// the max-min ones for the given operating point.
pub fn measure_b_terms(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    op: OperatingPoint,
    precoder: Precoder,
    n_draws: usize,
    seed: u64,
) -> Result<BTermMeasurement, McError> {
    let (rho_b, rho_o) = payload_powers(cfg, op)?;
    let k = cfg.k;
    let quality = estimation_quality(&profile.beta, cfg.rho_u, cfg.tau_pu);
    let (control, _) = maxmin_control(cfg.m, rho_b, rho_o, &profile.beta, &quality.gamma, precoder)?;
    let use_basis = rho_o > 0.0;

    let partials = run_chunks(n_draws, seed, DOMAIN_B, |rng, len| {
        let mut p = BPartial {
            c_re: vec![0.0; k],
            c_im: vec![0.0; k],
            abs2_c: vec![0.0; k],
            cross: vec![0.0; k],
            est: vec![0.0; k],
            leak: vec![0.0; k],
            v_norm: 0.0,
            v_norm_sq: 0.0,
        };
        for _ in 0..len {
            let real = draw_realization(cfg, profile, rng);
            let set = build_precoders(cfg, &real, &control.eta, &quality.gamma, precoder)
                .expect("per-draw channel matrix should be full rank");
            let basis = if use_basis {
                Some(build_null_basis(&real.g_hat, cfg.mp, rng).expect("subspace checked up front"))
            } else {
                None
            };
            let mut vn = 0.0;
            for j in 0..k {
                vn += norm_sq(set.v.col(j));
            }
            p.v_norm += vn;
            p.v_norm_sq += vn * vn;
            for t in 0..k {
                let gk = real.g.col(t);
                let c = herm_dot(gk, set.v.col(t));
                p.c_re[t] += c.re;
                p.c_im[t] += c.im;
                p.abs2_c[t] += c.norm_sqr();
                for j in 0..k {
                    let e = herm_dot(real.g_tilde.col(t), set.v.col(j));
                    p.est[t] += e.norm_sqr();
                    if j != t {
                        p.cross[t] += herm_dot(gk, set.v.col(j)).norm_sqr();
                    }
                }
                if let Some(b) = &basis {
                    // q ~ CN(0, I/M') makes the conditional leakage power
                    // ||U^H g||^2 / M'.
                    p.leak[t] += norm_sq(&b.u.herm_apply(gk)) / cfg.mp as f64;
                }
            }
        }
        p
    });

    let n = n_draws as f64;
    let mut v_norm = Neumaier::default();
    let mut v_norm_sq = Neumaier::default();
    let mut acc: Vec<[Neumaier; 6]> = vec![Default::default(); k];
    for p in partials {
        v_norm.add(p.v_norm);
        v_norm_sq.add(p.v_norm_sq);
        for t in 0..k {
            acc[t][0].add(p.c_re[t]);
            acc[t][1].add(p.c_im[t]);
            acc[t][2].add(p.abs2_c[t]);
            acc[t][3].add(p.cross[t]);
            acc[t][4].add(p.est[t]);
            acc[t][5].add(p.leak[t]);
        }
    }
    let terms = (0..k)
        .map(|t| {
            let c_mean = C64::new(acc[t][0].value() / n, acc[t][1].value() / n);
            let useful_power = rho_b * c_mean.norm_sqr();
            let fluct_var = rho_b * (acc[t][2].value() / n - c_mean.norm_sqr());
            let intra_var = rho_b * acc[t][3].value() / n;
            let est_var = rho_b * acc[t][4].value() / n;
            let leak_var = rho_o * acc[t][5].value() / n;
            let (beta, gamma, eta) = (profile.beta[t], quality.gamma[t], control.eta[t]);
            let closed_sinr = match precoder {
                Precoder::Mr => sinr_b_mr(cfg.m, rho_b, rho_o, beta, gamma, eta),
                Precoder::Zf => sinr_b_zf(cfg.m, cfg.k, rho_b, rho_o, beta, gamma, eta),
            };
            BTerminalTerms {
                useful_power,
                fluct_var,
                est_var,
                intra_var,
                leak_var,
                empirical_sinr: useful_power / (fluct_var + intra_var + leak_var + 1.0),
                closed_sinr,
            }
        })
        .collect();
    let mean_v = v_norm.value() / n;
    let var_v = (v_norm_sq.value() / n - mean_v * mean_v).max(0.0);
    Ok(BTermMeasurement { terms, mean_sum_v_norm: mean_v, sum_v_norm_se: (var_v / n).sqrt(), n_draws })
}

/// Empirical O-terminal statistics.
#[derive(Debug, Clone, Serialize)]
pub struct OMeasurement {
    /// Mean of log2(1+SINR) over draws, per payload interval.
    pub rate: f64,
    pub rate_std_err: f64,
    /// Mean estimated-channel energy ||h_hat_e||^2; converges to M' var_hat.
    pub mean_est_norm_sq: f64,
    /// Mean measured B-payload interference power (JBB/JBB' only).
    pub v2_mean: Option<f64>,
    /// OLS slope of the interference power on ||h_hat_e||^2 with its
    /// standard error; zero slope is the independence check.
    pub v2_slope: Option<f64>,
    pub v2_slope_se: Option<f64>,
    pub n_draws: usize,
}

struct OPartial {
    rate: f64,
    rate_sq: f64,
    x: f64,
    x_sq: f64,
    y: f64,
    y_sq: f64,
    xy: f64,
    err: f64,
    norms: Vec<f64>,
}

/// Simulates the downlink O-pilot phase and payload SINR draw by draw.
///
/// JBB' and OA receive clean pilots and are compared against the quadrature
/// rate. Plain JBB receives its pilots under the concurrent B payload; the
/// receiver de-noises with an LMMSE scale that treats that interference as
/// white noise of its average power, the empirical estimation-error variance
/// replaces the clean-pilot one in the SINR, and the resulting rate is
/// descriptive only.
pub fn measure_o_rate(
    cfg: &SystemConfig,
    profile: &PathLossProfile,
    beta_o: f64,
    op: OperatingPoint,
    precoder: Precoder,
    n_draws: usize,
    seed: u64,
) -> Result<OMeasurement, McError> {
    // During the O phase the broadcast always runs at rho_o; the concurrent
    // beamformed power is the scheme's payload power, or nothing under OA.
    let rho_o = op.rho_o;
    let rho_b = match op.scheme {
        Scheme::Jbb => op.rho_b,
        Scheme::JbbPrime => rho_b_prime(op.rho_b, cfg.frame(), cfg.tau_po)?,
        Scheme::Oa => 0.0,
    };
    let mp = cfg.mp;
    let mpf = mp as f64;
    let tau = cfg.tau_po;
    let with_b = op.scheme != Scheme::Oa;
    let pilot_interference = op.scheme == Scheme::Jbb;
    let quality = estimation_quality(&profile.beta, cfg.rho_u, cfg.tau_pu);
    let control = if with_b {
        let (c, _) = maxmin_control(cfg.m, rho_b, rho_o, &profile.beta, &quality.gamma, precoder)?;
        Some(c)
    } else {
        None
    };
    if !with_b && mp > cfg.m {
        return Err(McError::SubspaceTooLarge { mp, free: cfg.m });
    }

    // First M' columns of the tau_po-point DFT, scaled so the Gram matrix is
    // (tau_po/M') I as the pilot orthonormality condition requires.
    let pilots = CMat::from_fn(tau, mp, |t, j| {
        let phase = -2.0 * std::f64::consts::PI * (t * j % tau) as f64 / tau as f64;
        C64::from_polar(1.0 / mpf.sqrt(), phase)
    });

    let stats = o_estimation_stats(mp, beta_o, rho_o, tau);
    let pilot_noise_var = if pilot_interference { 1.0 + rho_b * beta_o } else { 1.0 };
    // Per-element LMMSE scale for w = sqrt(rho_o tau/M') h + n.
    let amp = (rho_o * tau as f64 / mpf).sqrt();
    let mmse_scale = amp * beta_o / (pilot_noise_var + amp * amp * beta_o);
    let keep_norms = pilot_interference;
    // Clean-pilot denominators; exact for JBB' and OA.
    let v1 = rho_o * stats.var_tilde;
    let v2_closed = rho_b * beta_o;
    let clean_denom = v1 + if with_b { v2_closed } else { 0.0 } + 1.0;

    let partials = run_chunks(n_draws, seed, DOMAIN_O, |rng, len| {
        let mut p = OPartial {
            rate: 0.0,
            rate_sq: 0.0,
            x: 0.0,
            x_sq: 0.0,
            y: 0.0,
            y_sq: 0.0,
            xy: 0.0,
            err: 0.0,
            norms: if keep_norms { Vec::with_capacity(len) } else { Vec::new() },
        };
        for _ in 0..len {
            let (g_hat, set) = if with_b {
                let real = draw_realization(cfg, profile, rng);
                let set = build_precoders(cfg, &real, &control.as_ref().unwrap().eta, &quality.gamma, precoder)
                    .expect("per-draw channel matrix should be full rank");
                (real.g_hat, Some(set))
            } else {
                (CMat::zeros(cfg.m, 0), None)
            };
            let basis = build_null_basis(&g_hat, mp, rng).expect("subspace checked up front");
            let mut h = vec![C64::new(0.0, 0.0); cfg.m];
            for hi in h.iter_mut() {
                *hi = draw_cn(rng, beta_o);
            }
            let h_e = basis.u.herm_apply(&h);

            // Pilot phase: y(t) = sqrt(rho_o) p(t)^T h_e + n(t), plus the
            // beamformed payload leaking through the full channel under JBB.
            let mut z = vec![C64::new(0.0, 0.0); mp];
            for t in 0..tau {
                let mut y = C64::new(0.0, 0.0);
                for j in 0..mp {
                    y += pilots[(t, j)] * h_e[j];
                }
                y *= rho_o.sqrt();
                y += draw_cn(rng, 1.0);
                if pilot_interference {
                    let set = set.as_ref().unwrap();
                    for j in 0..cfg.k {
                        let s = draw_cn(rng, 1.0);
                        y += rho_b.sqrt() * herm_dot(&h, set.v.col(j)).conj() * s;
                    }
                }
                for j in 0..mp {
                    z[j] += pilots[(t, j)].conj() * y;
                }
            }
            let norm = (mpf / tau as f64).sqrt();
            let mut est_norm_sq = 0.0;
            let mut err_sq = 0.0;
            for j in 0..mp {
                let w = z[j] * norm;
                let est = mmse_scale * w;
                est_norm_sq += est.norm_sqr();
                err_sq += (h_e[j] - est).norm_sqr();
            }
            p.x += est_norm_sq;
            p.x_sq += est_norm_sq * est_norm_sq;
            p.err += err_sq;
            if keep_norms {
                p.norms.push(est_norm_sq);
            } else {
                let sinr = (rho_o / mpf) * est_norm_sq / clean_denom;
                let r = sinr.ln_1p() / std::f64::consts::LN_2;
                p.rate += r;
                p.rate_sq += r * r;
            }
            if let Some(set) = &set {
                // Conditional B-interference power at this terminal.
                let mut iv = 0.0;
                for j in 0..cfg.k {
                    iv += herm_dot(&h, set.v.col(j)).norm_sqr();
                }
                iv *= rho_b;
                p.y += iv;
                p.y_sq += iv * iv;
                p.xy += iv * est_norm_sq;
            }
        }
        p
    });

    let n = n_draws as f64;
    let mut rate = Neumaier::default();
    let mut rate_sq = Neumaier::default();
    let mut sx = Neumaier::default();
    let mut sxx = Neumaier::default();
    let mut sy = Neumaier::default();
    let mut syy = Neumaier::default();
    let mut sxy = Neumaier::default();
    let mut serr = Neumaier::default();
    let mut norms: Vec<f64> = Vec::new();
    for p in &partials {
        rate.add(p.rate);
        rate_sq.add(p.rate_sq);
        sx.add(p.x);
        sxx.add(p.x_sq);
        sy.add(p.y);
        syy.add(p.y_sq);
        sxy.add(p.xy);
        serr.add(p.err);
    }
    if keep_norms {
        for p in &partials {
            norms.extend_from_slice(&p.norms);
        }
        // Second pass: the empirical error variance feeds the SINR denominator.
        let emp_var = serr.value() / (n * mpf);
        let denom = rho_o * emp_var + v2_closed + 1.0;
        for &x in &norms {
            let sinr = (rho_o / mpf) * x / denom;
            let r = sinr.ln_1p() / std::f64::consts::LN_2;
            rate.add(r);
            rate_sq.add(r * r);
        }
    }
    let mean_rate = rate.value() / n;
    let rate_var = (rate_sq.value() / n - mean_rate * mean_rate).max(0.0);
    let (v2_mean, v2_slope, v2_slope_se) = if with_b {
        let xm = sx.value() / n;
        let ym = sy.value() / n;
        let sxx_c = sxx.value() - n * xm * xm;
        let sxy_c = sxy.value() - n * xm * ym;
        let syy_c = syy.value() - n * ym * ym;
        let slope = sxy_c / sxx_c;
        let resid = (syy_c - slope * sxy_c).max(0.0) / (n - 2.0);
        (Some(ym), Some(slope), Some((resid / sxx_c).sqrt()))
    } else {
        (None, None, None)
    };
    Ok(OMeasurement {
        rate: mean_rate,
        rate_std_err: (rate_var / n).sqrt(),
        mean_est_norm_sq: sx.value() / n,
        v2_mean,
        v2_slope,
        v2_slope_se,
        n_draws,
    })
}

/// Sample mean and standard error of a statistic of ||psi||^2 with psi made
/// of M' independent CN(0,1) entries.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JensenStats {
    pub mean: f64,
    pub std_err: f64,
}

fn psi_statistic(mp: usize, n_draws: usize, seed: u64, f: impl Fn(f64) -> f64 + Sync) -> JensenStats {
    let partials = run_chunks(n_draws, seed, DOMAIN_JENSEN, |rng, len| {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..len {
            let mut nrm = 0.0;
            for _ in 0..mp {
                nrm += draw_cn(rng, 1.0).norm_sqr();
            }
            let v = f(nrm);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let mut s = Neumaier::default();
    let mut s2 = Neumaier::default();
    for (a, b) in partials {
        s.add(a);
        s2.add(b);
    }
    let n = n_draws as f64;
    let mean = s.value() / n;
    let var = (s2.value() / n - mean * mean).max(0.0);
    JensenStats { mean, std_err: (var / n).sqrt() }
}

/// Empirical E[1/||psi||^2], which the random matrix identity pins at
/// 1/(M'-1).
pub fn verify_jensen_constant(mp: usize, n_draws: usize, seed: u64) -> JensenStats {
    assert!(mp >= 2, "the inverse-norm mean diverges at M'=1");
    psi_statistic(mp, n_draws, seed, |nrm| 1.0 / nrm)
}

/// Empirical E[log2(1+alpha ||psi||^2)], the quantity the Jensen bound sits
/// under.
pub fn sample_log_rate(mp: usize, alpha: f64, n_draws: usize, seed: u64) -> JensenStats {
    psi_statistic(mp, n_draws, seed, |nrm| (alpha * nrm).ln_1p() / std::f64::consts::LN_2)
}
