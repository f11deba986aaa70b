//! Scenario KPIs: Jain fairness, mean throughput, normalized estimation
//! error and handover counting.

/// Jain fairness index over per-entity throughputs. Returns 0 for an empty
/// slice or all-zero throughputs (degenerate case, no service at all).
pub fn jain_index(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if sq <= 0.0 {
        return 0.0;
    }
    sum * sum / (values.len() as f64 * sq)
}

/// User-weighted Jain index over per-user cell rates: cell c contributes
/// `users[c]` entries of value `rates[c]`, i.e.
/// (sum M_c R_c)^2 / ((sum M_c) * sum M_c R_c^2).
pub fn jain_index_weighted(rates: &[f64], users: &[u64]) -> f64 {
    assert_eq!(rates.len(), users.len());
    let m: f64 = users.iter().map(|&u| u as f64).sum();
    let num: f64 = rates.iter().zip(users).map(|(r, &u)| r * u as f64).sum();
    let den: f64 = rates.iter().zip(users).map(|(r, &u)| r * r * u as f64).sum();
    if m <= 0.0 || den <= 0.0 {
        return 0.0;
    }
    num * num / (m * den)
}

/// Mean over a slice; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Normalized mean squared error sum((est - truth)^2) / sum(truth^2).
/// Returns NaN when there are no samples or the truth is identically zero;
/// callers should treat NaN as "undefined this frame".
pub fn nmse(estimates: &[f64], truths: &[f64]) -> f64 {
    assert_eq!(estimates.len(), truths.len());
    let num: f64 = estimates.iter().zip(truths).map(|(e, t)| (e - t) * (e - t)).sum();
    let den: f64 = truths.iter().map(|t| t * t).sum();
    if truths.is_empty() || den <= 0.0 {
        return f64::NAN;
    }
    num / den
}

/// Streaming NMSE accumulator, used to split rain / no-rain populations.
#[derive(Debug, Default, Clone, Copy)]
pub struct NmseAccum {
    pub err_sq: f64,
    pub truth_sq: f64,
    pub count: u64,
}

impl NmseAccum {
    pub fn push(&mut self, estimate: f64, truth: f64) {
        self.err_sq += (estimate - truth) * (estimate - truth);
        self.truth_sq += truth * truth;
        self.count += 1;
    }

    pub fn value(&self) -> f64 {
        if self.count == 0 || self.truth_sq <= 0.0 {
            return f64::NAN;
        }
        self.err_sq / self.truth_sq
    }
}

/// Handovers in one frame: serving-satellite changes over cells served in
/// both frames plus newly served cells (cold start counts as a handover).
pub fn count_handovers(prev_serving: &[Option<u32>], serving: &[Option<u32>]) -> u64 {
    assert_eq!(prev_serving.len(), serving.len());
    serving
        .iter()
        .zip(prev_serving)
        .filter(|(now, before)| matches!(now, Some(s) if **before != Some(*s)))
        .count() as u64
}

/// Handover rate: frame handover count divided by the system frame length.
pub fn handovers_per_second(handovers: u64, t_frame_s: f64) -> f64 {
    handovers as f64 / t_frame_s
}

/// Frame-averaged aggregate throughput (1/K) sum_k sum_c sum_s R, bit/s.
/// `frame_totals` holds the per-frame aggregate sums.
pub fn mean_throughput(frame_totals: &[f64]) -> f64 {
    mean(frame_totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jain_weighted_reference() {
        // All per-user rates equal -> 1 regardless of weights.
        assert_relative_eq!(jain_index_weighted(&[3.0, 3.0], &[10, 90]), 1.0);
        // Two cells, equal M, rates (r, 0) -> 0.5.
        assert_relative_eq!(jain_index_weighted(&[4.0, 0.0], &[5, 5]), 0.5);
        // Weighted form equals the expanded multiset.
        let w = jain_index_weighted(&[1.0, 2.0], &[2, 1]);
        assert_relative_eq!(w, jain_index(&[1.0, 1.0, 2.0]), epsilon = 1e-15);
        assert_eq!(jain_index_weighted(&[0.0], &[3]), 0.0);
        assert_eq!(jain_index_weighted(&[], &[]), 0.0);
    }

    #[test]
    fn throughput_and_handover_rates() {
        assert_relative_eq!(mean_throughput(&[45_000.0]), 45_000.0);
        assert_relative_eq!(mean_throughput(&[10.0, 20.0]), 15.0);
        assert_relative_eq!(handovers_per_second(30, 10.0), 3.0);
        assert_relative_eq!(handovers_per_second(0, 10.0), 0.0);
    }

    #[test]
    fn jain_reference() {
        assert_relative_eq!(jain_index(&[5.0, 5.0, 5.0, 5.0]), 1.0);
        // One of n served: J = 1/n.
        assert_relative_eq!(jain_index(&[7.0, 0.0, 0.0, 0.0]), 0.25);
        assert_relative_eq!(jain_index(&[1.0, 2.0, 3.0]), 36.0 / (3.0 * 14.0));
        assert_eq!(jain_index(&[]), 0.0);
        assert_eq!(jain_index(&[0.0, 0.0]), 0.0);
        // Scale invariance.
        assert_relative_eq!(jain_index(&[1.0, 2.0, 3.0]), jain_index(&[10.0, 20.0, 30.0]));
    }

    #[test]
    fn nmse_reference() {
        assert_relative_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_relative_eq!(nmse(&[2.0], &[1.0]), 1.0);
        assert_relative_eq!(nmse(&[1.1, 2.2], &[1.0, 2.0]), 0.05 / 5.0);
        assert!(nmse(&[], &[]).is_nan());
        assert!(nmse(&[1.0], &[0.0]).is_nan());
    }

    #[test]
    fn nmse_accum_matches_batch() {
        let est = [1.1, 2.2, 2.9];
        let truth = [1.0, 2.0, 3.0];
        let mut acc = NmseAccum::default();
        for (e, t) in est.iter().zip(&truth) {
            acc.push(*e, *t);
        }
        assert_relative_eq!(acc.value(), nmse(&est, &truth), epsilon = 1e-15);
        assert!(NmseAccum::default().value().is_nan());
    }

    #[test]
    fn handover_counting() {
        let prev = [Some(1), Some(2), None, Some(4), None];
        let now = [Some(1), Some(3), Some(5), None, None];
        // cell 0 stays, cell 1 switches, cell 2 cold start, cell 3 dropped.
        assert_eq!(count_handovers(&prev, &now), 2);
        assert_eq!(count_handovers(&now, &now), 0);
    }
}
