//! Exhaustive-search oracle for the integer allocation problem on tiny
//! instances. Test-oracle quality, not performance.

use crate::error::SimError;

use super::{objective_p1, AllocationMatrix, RateInput};

/// Enumerates every feasible integer allocation (each cell unserved or given
/// x in 1..=N_C frames by exactly one satellite, per-satellite budgets
/// respected) and returns the maximizer of the proportional-fairness
/// objective. Refuses instances whose candidate count exceeds `cap`.
pub fn brute_force_p1(input: &RateInput, cap: u64) -> Result<(AllocationMatrix, f64), SimError> {
    input.validate()?;
    let sats = input.sats();
    let cells = input.cells();
    let per_cell = 1u64 + sats as u64 * input.n_comm as u64;
    let mut candidates = 1u64;
    for _ in 0..cells {
        candidates = candidates.saturating_mul(per_cell);
        if candidates > cap {
            return Err(SimError::OracleTooLarge { candidates, cap });
        }
    }

    let mut best = AllocationMatrix::zeros(sats, cells);
    let mut best_obj = f64::NEG_INFINITY;
    let mut current = AllocationMatrix::zeros(sats, cells);
    let mut remaining: Vec<u64> = vec![input.budget(); sats];

    fn recurse(
        c: usize,
        input: &RateInput,
        current: &mut AllocationMatrix,
        remaining: &mut [u64],
        best: &mut AllocationMatrix,
        best_obj: &mut f64,
    ) {
        if c == input.cells() {
            let obj = objective_p1(input, current);
            if obj > *best_obj {
                *best_obj = obj;
                best.x.copy_from_slice(&current.x);
            }
            return;
        }
        // Option: leave the cell unserved.
        recurse(c + 1, input, current, remaining, best, best_obj);
        for s in 0..input.sats() {
            for x in 1..=input.n_comm {
                if remaining[s] < x as u64 {
                    break;
                }
                current.x[s * input.cells() + c] = x;
                remaining[s] -= x as u64;
                recurse(c + 1, input, current, remaining, best, best_obj);
                remaining[s] += x as u64;
                current.x[s * input.cells() + c] = 0;
            }
        }
    }

    recurse(0, input, &mut current, &mut remaining, &mut best, &mut best_obj);
    Ok((best, best_obj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn input(_sats: usize, _cells: usize, rho: Vec<f64>, users: Vec<u64>, n_comm: u32, n_beams: u32) -> RateInput {
        RateInput {
            handover_s: vec![0.0; rho.len()],
            rho,
            users,
            t_s: 0.01,
            t_frame_s: 10.0,
            n_comm,
            n_beams,
        }
    }

    #[test]
    fn zero_rates_zero_objective() {
        let inp = input(2, 2, vec![0.0; 4], vec![10, 10], 2, 1);
        let (_, obj) = brute_force_p1(&inp, 1_000_000).unwrap();
        assert_eq!(obj, 0.0);
    }

    #[test]
    fn one_sat_two_cells_analytic() {
        // N_C = 2, N_B = 1: budget 2. Feasible splits (x0, x1) with
        // x0 + x1 <= 2. The best is all budget on the strictly better cell.
        let inp = input(1, 2, vec![1e8, 1e7], vec![10, 10], 2, 1);
        let (alloc, obj) = brute_force_p1(&inp, 1_000_000).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0u32, 0u32);
        for x0 in 0..=2u32 {
            for x1 in 0..=2u32 - x0 {
                let mut v = 0.0;
                for (x, rho) in [(x0, 1e8), (x1, 1e7)] {
                    let r = 0.01 * x as f64 * rho / (10.0 * 10.0);
                    v += 10.0 * (1.0 + r).ln();
                }
                if v > best {
                    best = v;
                    arg = (x0, x1);
                }
            }
        }
        assert_relative_eq!(obj, best, epsilon = 1e-12);
        assert_eq!((alloc.at(0, 0), alloc.at(0, 1)), arg);
    }

    #[test]
    fn refuses_large_instances() {
        let inp = input(4, 10, vec![1e8; 40], vec![10; 10], 100, 2);
        match brute_force_p1(&inp, 1_000_000) {
            Err(SimError::OracleTooLarge { .. }) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }
}
