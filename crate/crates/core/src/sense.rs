//! Pilot-based SNR sensing: pilot simulation, the closed-form SNR MLE, its
//! CRB, naive and bias-corrected attenuation estimators, and the sensing
//! sub-frame timing budget.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::link::LinkTable;
use crate::orbit::ShellConfig;

/// Cap reported when the estimator denominator degenerates (noise-free input).
pub const SNR_CAP: f64 = 1e9;

/// Relative guard on the estimator denominator.
const DEN_GUARD: f64 = 1e-12;

/// Pilot configuration. The presets use power-of-two pilot lengths.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PilotConfig {
    pub pilot_len: u32,
    pub feedback_len: u32,
}

impl PilotConfig {
    pub fn validate(&self) -> Result<(), crate::SimError> {
        if self.pilot_len < 4 {
            return Err(crate::SimError::Config(
                "pilot length must be at least 4 symbols".into(),
            ));
        }
        if self.feedback_len == 0 {
            return Err(crate::SimError::Config("feedback length must be positive".into()));
        }
        Ok(())
    }
}

/// How the satellites obtain channel state for the allocator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    /// Oracle CSI: the true SNR including rain attenuation.
    Perfect,
    /// Pilot-based sensing on K-band-and-above links.
    Sensed,
    /// No sensing: clear-sky SNR assumed everywhere (A = 1).
    None,
}

impl std::fmt::Display for CsiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Sensed => "sensed",
            CsiMode::None => "none",
        })
    }
}

/// BPSK pilot sequence of +/-1 symbols, deterministic per RNG stream.
pub fn pilot_sequence<R: Rng>(len: u32, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

/// Received pilot vector y_i = m_i sqrt(gamma) + z_i with unit-variance
/// circular complex noise (sigma^2 = 1; the estimator is scale invariant).
pub fn simulate_pilot_rx<R: Rng>(gamma: f64, pilots: &[f64], rng: &mut R) -> Vec<Complex64> {
    let amp = gamma.max(0.0).sqrt();
    pilots
        .iter()
        .map(|&m| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(m * amp + re / 2f64.sqrt(), im / 2f64.sqrt())
        })
        .collect()
}

/// Closed-form SNR estimate with guard flag.
#[derive(Debug, Clone, Copy)]
pub struct SnrEstimate {
    pub gamma: f64,
    pub valid: bool,
}

/// Closed-form SNR MLE from known unit-modulus pilots:
/// num = (L_p - 3/2) * (mean Re{y* m})^2,
/// den = sum |y|^2 - (sum Re{y* m})^2 / L_p.
/// A degenerate denominator (noise-free input) reports the capped estimate
/// with `valid = false`.
pub fn mle_snr(received: &[Complex64], pilots: &[f64]) -> SnrEstimate {
    assert_eq!(received.len(), pilots.len());
    let l = received.len() as f64;
    let corr: f64 = received.iter().zip(pilots).map(|(y, &m)| (y.conj() * m).re).sum();
    let energy: f64 = received.iter().map(|y| y.norm_sqr()).sum();
    mle_from_stats(corr, energy, l)
}

fn mle_from_stats(corr: f64, energy: f64, l: f64) -> SnrEstimate {
    let den = energy - corr * corr / l;
    if den <= DEN_GUARD * energy.max(f64::MIN_POSITIVE) {
        return SnrEstimate { gamma: SNR_CAP, valid: false };
    }
    let num = (l - 1.5) * (corr / l).powi(2);
    SnrEstimate { gamma: num / den, valid: true }
}

/// Draws one MLE outcome at true SNR `gamma` without materializing the
/// symbol vector, by sampling the sufficient statistics exactly:
/// corr = sqrt(gamma) L + A with A ~ N(0, L/2), and
/// energy = gamma L + 2 sqrt(gamma) A + A^2/L + chi2(L-1)/2 + chi2(L)/2.
/// Distribution-identical to `mle_snr(simulate_pilot_rx(..))`.
pub fn mle_snr_sampled<R: Rng>(gamma: f64, pilot_len: u32, rng: &mut R) -> SnrEstimate {
    let l = pilot_len as f64;
    let g = gamma.max(0.0);
    let z: f64 = StandardNormal.sample(rng);
    let a = z * (l / 2.0).sqrt();
    let q_res = 0.5 * ChiSquared::new(l - 1.0).expect("L_p >= 4").sample(rng);
    let b2 = 0.5 * ChiSquared::new(l).expect("L_p >= 4").sample(rng);
    let corr = g.sqrt() * l + a;
    let energy = g * l + 2.0 * g.sqrt() * a + a * a / l + q_res + b2;
    mle_from_stats(corr, energy, l)
}

/// First-order variance lower bound for the SNR estimator: 3 * gamma / L_p.
pub fn crb(gamma: f64, pilot_len: u32) -> f64 {
    3.0 * gamma / pilot_len as f64
}

/// Naive attenuation estimate A = gamma0 / gamma_hat (gamma0 is the
/// clear-sky SNR known from the ephemeris). Biased upward at second order.
pub fn attenuation_naive(gamma_hat: SnrEstimate, clear_sky_gamma: f64) -> SnrEstimate {
    SnrEstimate {
        gamma: clear_sky_gamma / gamma_hat.gamma,
        valid: gamma_hat.valid,
    }
}

/// Bias-corrected attenuation estimate A = gamma0 / (gamma_hat + 3/L_p).
/// The denominator is strictly positive so no guard is needed.
pub fn attenuation_corrected(gamma_hat: f64, clear_sky_gamma: f64, pilot_len: u32) -> f64 {
    clear_sky_gamma / (gamma_hat.max(0.0) + 3.0 / pilot_len as f64)
}

/// Sensing sub-frame timing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensingTiming {
    pub t_pilot_s: f64,
    pub t_feedback_s: f64,
    pub t_sensing_s: f64,
    pub n_sensing: u32,
}

/// Pilot and feedback sub-frame lengths, ceiled to whole OFDMA frames:
/// T_p = T ceil((t_eta + ceil(C_s/N_B) L_p/B_s) / T) and the symmetric
/// feedback expression.
pub fn sensing_timing(
    footprint_cells: u64,
    n_beams: u32,
    pilot: PilotConfig,
    bandwidth_hz: f64,
    t_eta_s: f64,
    t_s: f64,
) -> SensingTiming {
    let sweeps = footprint_cells.div_ceil(n_beams as u64) as f64;
    let t_pilot = t_s * ((t_eta_s + sweeps * pilot.pilot_len as f64 / bandwidth_hz) / t_s).ceil();
    let t_feedback =
        t_s * ((sweeps * pilot.feedback_len as f64 / bandwidth_hz + t_eta_s) / t_s).ceil();
    let t_sensing = t_pilot + t_feedback;
    SensingTiming {
        t_pilot_s: t_pilot,
        t_feedback_s: t_feedback,
        t_sensing_s: t_sensing,
        n_sensing: (t_sensing / t_s).round() as u32,
    }
}

/// One sensing outcome per (visible satellite, cell) pair of a link table.
#[derive(Debug, Clone, Copy)]
pub struct SensingReport {
    pub sat_id: u32,
    pub cell_id: usize,
    /// Believed SNR, linear.
    pub gamma_hat: f64,
    /// Believed rain attenuation (bias-corrected for sensed pairs), linear.
    pub att_hat: f64,
    pub valid: bool,
    /// True when the value comes from an actual pilot estimate.
    pub sensed: bool,
}

/// Runs the sensing phase over a link table. Sensing-capable shells estimate
/// SNR from pilots on in-range pairs; lower-band shells are unaffected by
/// water and assume their clear-sky SNR. `Perfect` copies the truth, `None`
/// assumes A = 1 everywhere.
pub fn run_sensing_phase<R: Rng>(
    table: &LinkTable,
    shells: &[ShellConfig],
    mode: CsiMode,
    pilot: PilotConfig,
    rng: &mut R,
) -> Vec<SensingReport> {
    let mut reports = Vec::with_capacity(table.links.len());
    for link in &table.links {
        let shell = &shells[link.shell_idx];
        let report = match mode {
            CsiMode::Perfect => SensingReport {
                sat_id: link.sat_id,
                cell_id: link.cell_id,
                gamma_hat: link.snr,
                att_hat: link.snr_clear_sky / link.snr,
                valid: true,
                sensed: false,
            },
            CsiMode::None => SensingReport {
                sat_id: link.sat_id,
                cell_id: link.cell_id,
                gamma_hat: link.snr_clear_sky,
                att_hat: 1.0,
                valid: true,
                sensed: false,
            },
            CsiMode::Sensed => {
                if shell.sensing_capable() && link.in_range {
                    let est = mle_snr_sampled(link.snr, pilot.pilot_len, rng);
                    let att = attenuation_corrected(est.gamma, link.snr_clear_sky, pilot.pilot_len);
                    SensingReport {
                        sat_id: link.sat_id,
                        cell_id: link.cell_id,
                        gamma_hat: est.gamma,
                        att_hat: att,
                        valid: est.valid,
                        sensed: true,
                    }
                } else {
                    // Lower bands see A = 1; out-of-range pairs are not
                    // sensed and keep the clear-sky assumption.
                    SensingReport {
                        sat_id: link.sat_id,
                        cell_id: link.cell_id,
                        gamma_hat: link.snr_clear_sky,
                        att_hat: 1.0,
                        valid: true,
                        sensed: false,
                    }
                }
            }
        };
        reports.push(report);
    }
    reports
}
