//! ISAC frame-budget arithmetic: frame partitioning, handover interruption
//! and the real-time resource-allocation deadline.

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Per-frame time budget. All sub-frame lengths are integer multiples of the
/// OFDMA frame T.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameBudget {
    /// OFDMA frame length, s.
    pub t_s: f64,
    /// System frame length T_F = N_T * T, s.
    pub t_frame_s: f64,
    pub n_total: u32,
    pub n_sensing: u32,
    pub n_comm: u32,
    /// Handover interruption, s.
    pub t_ho_s: f64,
    pub n_ho: u32,
    pub n_rtt: u32,
}

impl FrameBudget {
    pub fn new(t_s: f64, t_frame_s: f64, t_ho_s: f64, n_sensing: u32, n_rtt: u32) -> Result<Self, SimError> {
        let n_total = (t_frame_s / t_s).round() as u32;
        if ((n_total as f64) * t_s - t_frame_s).abs() > 1e-9 * t_frame_s.max(1.0) {
            return Err(SimError::Config(format!(
                "system frame {t_frame_s}s is not a multiple of the OFDMA frame {t_s}s"
            )));
        }
        let n_ho = (t_ho_s / t_s).round() as u32;
        if ((n_ho as f64) * t_s - t_ho_s).abs() > 1e-12 {
            return Err(SimError::Config(format!(
                "handover time {t_ho_s}s is not a multiple of the OFDMA frame {t_s}s"
            )));
        }
        if n_sensing >= n_total {
            return Err(SimError::Config(format!(
                "sensing takes {n_sensing} of {n_total} OFDMA frames; no communication frames left"
            )));
        }
        Ok(Self {
            t_s,
            t_frame_s,
            n_total,
            n_sensing,
            n_comm: n_total - n_sensing,
            t_ho_s,
            n_ho,
            n_rtt,
        })
    }

    /// Time available for the RA process: T_F - T_S - T_HO.
    pub fn ra_budget_s(&self) -> f64 {
        self.t_frame_s - self.n_sensing as f64 * self.t_s - self.t_ho_s
    }
}

/// Lower bound on the handover interruption: T * ceil(N_RTT * 2 t(eta) / T).
pub fn min_handover_time(t_eta_s: f64, t_s: f64, n_rtt: u32) -> f64 {
    if n_rtt == 0 {
        return 0.0;
    }
    t_s * (n_rtt as f64 * 2.0 * t_eta_s / t_s).ceil()
}

/// Handover cost H = T_HO * (1 - alpha_prev): full interruption unless the
/// same satellite served the cell in the previous frame. Frame 0 uses
/// alpha_prev = 0 for every pair (cold start).
pub fn handover_penalty(alpha_prev: bool, t_ho_s: f64) -> f64 {
    if alpha_prev {
        0.0
    } else {
        t_ho_s
    }
}

/// Real-time feasibility of the RA process: T_RA <= T_F - T_S - T_HO.
pub fn ra_deadline_check(t_ra_s: f64, budget: &FrameBudget) -> bool {
    t_ra_s <= budget.ra_budget_s() + 1e-12
}
