//! Downlink resource allocation: the joint matching-and-allocation solver
//! (penalty/multiplier outer loop over a concave subproblem, then integer
//! rounding repair), the disjoint matching-then-allocation benchmark, and a
//! brute-force oracle for small instances.

mod oracle;
mod subproblem;

pub use oracle::brute_force_p1;
pub use subproblem::{project_row, solve_subproblem, SubproblemSolution};

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Which allocation framework to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    /// Joint matching and resource allocation.
    Jmra,
    /// Disjoint matching then per-satellite allocation benchmark.
    Dmrab,
}

impl std::fmt::Display for Framework {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Framework::Jmra => "jmra",
            Framework::Dmrab => "dmrab",
        })
    }
}

/// Solver knobs. Defaults follow the reference operating point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Smoothing offset in w = 1/(tau + x_hat); > 0.
    pub tau: f64,
    /// Outer convergence tolerance.
    pub theta: f64,
    /// Penalty growth factor; > 1.
    pub delta: f64,
    /// Initial penalty; > 0 (a zero penalty would never grow).
    pub p_init: f64,
    /// Outer iteration cap.
    pub n_iter: u32,
    /// Subproblem KKT residual tolerance.
    pub kkt_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { tau: 0.5, theta: 0.01, delta: 10.0, p_init: 1.0, n_iter: 50, kkt_tol: 1e-4 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tau > 0.0 && self.theta > 0.0 && self.delta > 1.0 && self.p_init > 0.0) {
            return Err(SimError::Config(
                "solver params require tau > 0, theta > 0, delta > 1, p_init > 0".into(),
            ));
        }
        if self.n_iter == 0 || !(self.kkt_tol > 0.0) {
            return Err(SimError::Config("solver params require n_iter >= 1, kkt_tol > 0".into()));
        }
        Ok(())
    }
}

/// Per-frame allocation problem over visible satellites (rows) and active
/// populated cells (columns).
#[derive(Debug, Clone)]
pub struct RateInput {
    /// Believed achievable rates, S x C row-major, bit/s.
    pub rho: Vec<f64>,
    /// Handover interruption per pair, s (0 for the incumbent satellite).
    pub handover_s: Vec<f64>,
    /// Active users per cell; all > 0.
    pub users: Vec<u64>,
    /// OFDMA frame length T, s.
    pub t_s: f64,
    /// System frame length T_F, s.
    pub t_frame_s: f64,
    /// Communication OFDMA frames N_C: per-pair allocation cap.
    pub n_comm: u32,
    /// Beams per satellite N_B.
    pub n_beams: u32,
}

impl RateInput {
    pub fn cells(&self) -> usize {
        self.users.len()
    }

    pub fn sats(&self) -> usize {
        if self.users.is_empty() { 0 } else { self.rho.len() / self.users.len() }
    }

    /// Per-satellite OFDMA-frame budget N_C * N_B.
    pub fn budget(&self) -> u64 {
        self.n_comm as u64 * self.n_beams as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.users.is_empty() || self.rho.len() % self.users.len() != 0 {
            return Err(SimError::Config("rate input shape mismatch".into()));
        }
        if self.rho.len() != self.handover_s.len() {
            return Err(SimError::Config("handover matrix shape mismatch".into()));
        }
        if self.users.iter().any(|&m| m == 0) {
            return Err(SimError::Config("cells without active users must be excluded".into()));
        }
        if self.rho.iter().any(|&r| r < 0.0) {
            return Err(SimError::Config("rates must be nonnegative".into()));
        }
        if self.n_comm == 0 || self.n_beams == 0 {
            return Err(SimError::Config("n_comm and n_beams must be positive".into()));
        }
        Ok(())
    }
}

/// Integer allocation, S x C row-major, entries in {0..N_C}. Feasible
/// matrices serve each cell from at most one satellite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrix {
    pub sats: usize,
    pub cells: usize,
    pub x: Vec<u32>,
}

impl AllocationMatrix {
    pub fn zeros(sats: usize, cells: usize) -> Self {
        Self { sats, cells, x: vec![0; sats * cells] }
    }

    pub fn at(&self, s: usize, c: usize) -> u32 {
        self.x[s * self.cells + c]
    }

    /// Row index of the serving satellite for a cell, if any. Feasible
    /// matrices have at most one; this returns the lowest row otherwise.
    pub fn serving(&self, c: usize) -> Option<usize> {
        (0..self.sats).find(|&s| self.at(s, c) > 0)
    }

    pub fn row_total(&self, s: usize) -> u64 {
        self.x[s * self.cells..(s + 1) * self.cells].iter().map(|&v| v as u64).sum()
    }

    /// Exact feasibility for the integer problem.
    pub fn is_feasible(&self, input: &RateInput) -> bool {
        self.x.iter().all(|&v| v <= input.n_comm)
            && (0..self.sats).all(|s| self.row_total(s) <= input.budget())
            && (0..self.cells).all(|c| (0..self.sats).filter(|&s| self.at(s, c) > 0).count() <= 1)
    }
}

/// Multiplier-loop state: adjacency weights w, multipliers lambda >= 0 and
/// penalties p > 0.
#[derive(Debug, Clone)]
pub struct LagrangianState {
    pub w: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
}

impl LagrangianState {
    /// Uniform prior: w = C / (N_C N_B S), equal resources to all cells.
    pub fn initial(input: &RateInput, p_init: f64) -> Self {
        let cells = input.cells();
        let w0 = cells as f64 / (input.budget() as f64 * input.sats() as f64);
        Self {
            w: vec![w0; input.sats() * cells],
            lambda: vec![0.0; cells],
            p: vec![p_init; cells],
        }
    }
}

/// Per-user throughput for one (satellite, cell) pair: (T x - H alpha) rho /
/// (T_F M_c) with alpha = 1 iff x > 0. Negative when T x < H, which a valid
/// allocation avoids; callers flag that case.
pub fn per_user_throughput(x: u32, handover_s: f64, rho: f64, users: u64, t_s: f64, t_frame_s: f64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    (t_s * x as f64 - handover_s) * rho / (t_frame_s * users as f64)
}

/// Proportional-fairness objective sum_c M_c log(1 + sum_s R_{s,c}).
pub fn objective_p1(input: &RateInput, alloc: &AllocationMatrix) -> f64 {
    let cells = input.cells();
    let mut obj = 0.0;
    for c in 0..cells {
        let mut rate = 0.0;
        for s in 0..input.sats() {
            let i = s * cells + c;
            rate += per_user_throughput(
                alloc.at(s, c),
                input.handover_s[i],
                input.rho[i],
                input.users[c],
                input.t_s,
                input.t_frame_s,
            );
        }
        obj += input.users[c] as f64 * (1.0 + rate).ln();
    }
    obj
}

/// Solver telemetry for one frame.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveTelemetry {
    pub outer_iterations: u32,
    pub converged: bool,
    pub kkt_residual: f64,
    pub relaxed_objective: f64,
    pub integer_objective: f64,
    pub max_violation: f64,
}

/// Half-away-from-zero rounding of the relaxed allocation.
fn round_alloc(x_hat: &[f64], n_comm: u32) -> Vec<u32> {
    x_hat.iter().map(|&v| (v.round().max(0.0) as u32).min(n_comm)).collect()
}

/// Joint matching and resource allocation. Runs the penalty/multiplier loop
/// over the relaxed subproblem, then rounds and repairs to a feasible
/// integer allocation.
pub fn jmra(
    input: &RateInput,
    params: &SolverParams,
) -> Result<(AllocationMatrix, SolveTelemetry), SimError> {
    input.validate()?;
    params.validate()?;
    let cells = input.cells();
    let mut state = LagrangianState::initial(input, params.p_init);
    let mut prev_x: Option<Vec<f64>> = None;
    let mut last = solve_subproblem(input, &state, params.kkt_tol, None)?;
    let mut converged = false;
    let mut outer = 1;
    let mut max_violation;

    loop {
        // Per-cell relaxed matching violations sum_s w x - 1, measured with
        // the refreshed linearization w = 1/(tau + x). For a single-served
        // cell this is -tau/(tau + x) < 0, so multipliers decay once the
        // matching is clean; stale weights would freeze them at zero.
        let mut violation = vec![-1.0; cells];
        for (i, &xi) in last.x_hat.iter().enumerate() {
            violation[i % cells] += xi / (params.tau + xi);
        }
        max_violation = violation.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let x_stable = prev_x
            .as_ref()
            .map(|p| p.iter().zip(&last.x_hat).all(|(a, b)| (a - b).abs() < params.theta))
            .unwrap_or(false);
        if max_violation <= params.theta && x_stable {
            converged = true;
            break;
        }
        if outer >= params.n_iter {
            break;
        }

        for (wi, &xi) in state.w.iter_mut().zip(&last.x_hat) {
            *wi = 1.0 / (params.tau + xi);
        }
        for c in 0..cells {
            if violation[c] > params.theta {
                state.p[c] *= params.delta;
            }
            state.lambda[c] = (state.lambda[c] + state.p[c] * violation[c]).max(0.0);
        }
        prev_x = Some(std::mem::take(&mut last.x_hat));
        last = solve_subproblem(input, &state, params.kkt_tol, prev_x.as_deref())?;
        outer += 1;
    }

    let rounded = AllocationMatrix {
        sats: input.sats(),
        cells,
        x: round_alloc(&last.x_hat, input.n_comm),
    };
    let repaired = polish_allocation(adjust_allocation(rounded, &last.x_hat, input), input);
    let telemetry = SolveTelemetry {
        outer_iterations: outer,
        converged,
        kkt_residual: last.kkt_residual,
        relaxed_objective: last.objective,
        integer_objective: objective_p1(input, &repaired),
        max_violation,
    };
    Ok((repaired, telemetry))
}

/// Rounding repair: enforce the single-serving-satellite rule by keeping the
/// highest-throughput match, then walk each satellite back under budget by
/// decrementing the largest rounding surplus x - x_hat. The result satisfies
/// every integer constraint exactly.
pub fn adjust_allocation(mut alloc: AllocationMatrix, x_hat: &[f64], input: &RateInput) -> AllocationMatrix {
    let cells = input.cells();
    let sats = input.sats();
    for v in alloc.x.iter_mut() {
        *v = (*v).min(input.n_comm);
    }

    for c in 0..cells {
        let servers: Vec<usize> = (0..sats).filter(|&s| alloc.at(s, c) > 0).collect();
        if servers.len() <= 1 {
            continue;
        }
        // Keep argmax_s R_{s,c}; ties go to the lowest satellite row.
        let mut best = servers[0];
        let mut best_r = f64::NEG_INFINITY;
        for &s in &servers {
            let i = s * cells + c;
            let r = per_user_throughput(
                alloc.at(s, c),
                input.handover_s[i],
                input.rho[i],
                input.users[c],
                input.t_s,
                input.t_frame_s,
            );
            if r > best_r {
                best_r = r;
                best = s;
            }
        }
        for &s in &servers {
            if s != best {
                alloc.x[s * cells + c] = 0;
            }
        }
    }

    for s in 0..sats {
        while alloc.row_total(s) > input.budget() {
            let mut target = None;
            let mut surplus = f64::NEG_INFINITY;
            for c in 0..cells {
                let i = s * cells + c;
                if alloc.x[i] == 0 {
                    continue;
                }
                let diff = alloc.x[i] as f64 - x_hat[i];
                if diff > surplus {
                    surplus = diff;
                    target = Some(i);
                }
            }
            let i = target.expect("over-budget row has a positive entry");
            alloc.x[i] -= 1;
        }
    }
    alloc
}

/// Integer finishing for the joint solver: greedy spare-budget fill plus a
/// within-satellite one-frame exchange pass. Every step strictly improves the
/// objective and preserves feasibility, so the polished point is never worse
/// than the plain rounding repair.
pub fn polish_allocation(mut alloc: AllocationMatrix, input: &RateInput) -> AllocationMatrix {
    let cells = input.cells();
    let sats = input.sats();

    // Rounding down can strand spare frames. Hand them back greedily to the
    // cell with the best marginal objective gain, restricted to cells this
    // satellite already serves or that nobody serves, so the single-serving
    // rule stays intact.
    let served_by_other = |alloc: &AllocationMatrix, s: usize, c: usize| {
        (0..sats).any(|o| o != s && alloc.at(o, c) > 0)
    };
    for s in 0..sats {
        let mut spare = input.budget().saturating_sub(alloc.row_total(s));
        while spare > 0 {
            let mut best = None;
            let mut best_gain = 1e-12;
            for c in 0..cells {
                let i = s * cells + c;
                if alloc.x[i] >= input.n_comm
                    || (alloc.x[i] == 0 && served_by_other(&alloc, s, c))
                {
                    continue;
                }
                let rate = |x: u32| {
                    per_user_throughput(
                        x,
                        input.handover_s[i],
                        input.rho[i],
                        input.users[c],
                        input.t_s,
                        input.t_frame_s,
                    )
                };
                let gain = input.users[c] as f64
                    * ((1.0 + rate(alloc.x[i] + 1)).ln() - (1.0 + rate(alloc.x[i])).ln());
                if gain > best_gain {
                    best_gain = gain;
                    best = Some(i);
                }
            }
            match best {
                Some(i) => alloc.x[i] += 1,
                None => break,
            }
            spare -= 1;
        }
    }

    // Within-satellite exchange polish: move single frames between cells of
    // the same satellite while that strictly improves the objective. Fixes
    // split errors like 2+2 where the optimum wants 1+3.
    let cell_gain = |alloc: &AllocationMatrix, s: usize, c: usize, delta: i64| {
        let i = s * cells + c;
        let rate = |x: u32| {
            per_user_throughput(
                x,
                input.handover_s[i],
                input.rho[i],
                input.users[c],
                input.t_s,
                input.t_frame_s,
            )
        };
        let x0 = alloc.x[i];
        let x1 = (x0 as i64 + delta) as u32;
        input.users[c] as f64 * ((1.0 + rate(x1)).ln() - (1.0 + rate(x0)).ln())
    };
    for s in 0..sats {
        let mut improved = true;
        let mut passes = 0;
        while improved && passes < 4 * cells {
            improved = false;
            passes += 1;
            for from in 0..cells {
                if alloc.at(s, from) == 0 {
                    continue;
                }
                let loss = cell_gain(&alloc, s, from, -1);
                let mut best = None;
                let mut best_gain = 1e-12;
                for to in 0..cells {
                    let i = s * cells + to;
                    if to == from
                        || alloc.x[i] >= input.n_comm
                        || (alloc.x[i] == 0 && served_by_other(&alloc, s, to))
                    {
                        continue;
                    }
                    let gain = cell_gain(&alloc, s, to, 1) + loss;
                    if gain > best_gain {
                        best_gain = gain;
                        best = Some(i);
                    }
                }
                if let Some(i) = best {
                    alloc.x[s * cells + from] -= 1;
                    alloc.x[i] += 1;
                    improved = true;
                }
            }
        }
    }
    alloc
}

/// Disjoint benchmark: match every cell to its best-rate satellite, then
/// solve the per-satellite concave allocation in closed form (water-filling
/// on the KKT multiplier), round, and repair the budget.
pub fn dmrab(
    input: &RateInput,
    _params: &SolverParams,
) -> Result<(AllocationMatrix, SolveTelemetry), SimError> {
    input.validate()?;
    let cells = input.cells();
    let sats = input.sats();

    // Stage 1: per-cell argmax_s rho, ties to the lowest satellite row.
    let mut matched: Vec<Option<usize>> = vec![None; cells];
    for c in 0..cells {
        let mut best = None;
        let mut best_rho = 0.0;
        for s in 0..sats {
            let r = input.rho[s * cells + c];
            if r > best_rho {
                best_rho = r;
                best = Some(s);
            }
        }
        matched[c] = best;
    }

    // Stage 2: per-satellite allocation over matched cells.
    let mut alloc = AllocationMatrix::zeros(sats, cells);
    let mut x_hat = vec![0.0; sats * cells];
    for s in 0..sats {
        let mine: Vec<usize> = (0..cells).filter(|&c| matched[c] == Some(s)).collect();
        if mine.is_empty() {
            continue;
        }
        // Linear payoff per cell: R = a x - b with alpha fixed to 1.
        let mut a = Vec::with_capacity(mine.len());
        let mut b = Vec::with_capacity(mine.len());
        for &c in &mine {
            let i = s * cells + c;
            let m = input.users[c] as f64;
            a.push(input.rho[i] * input.t_s / (input.t_frame_s * m));
            b.push(input.rho[i] * input.handover_s[i] / (input.t_frame_s * m));
        }
        let cap = input.n_comm as f64;
        // Minimum allocation keeping 1 + a x - b > 0 per cell; if those
        // minimums alone blow the budget the frame has no feasible point.
        let mut required = 0.0;
        for j in 0..mine.len() {
            if b[j] > 1.0 {
                if 1.0 + a[j] * cap - b[j] <= 0.0 {
                    return Err(SimError::DmrabInfeasible { sat_id: s as u32 });
                }
                required += (b[j] - 1.0) / a[j];
            }
        }
        let budget = input.budget() as f64;
        if required >= budget {
            return Err(SimError::DmrabInfeasible { sat_id: s as u32 });
        }

        let fill = |nu: f64, out: &mut Vec<f64>| {
            out.clear();
            for j in 0..mine.len() {
                let m = input.users[mine[j]] as f64;
                out.push((m / nu - (1.0 - b[j]) / a[j]).clamp(0.0, cap));
            }
        };
        let mut xs = Vec::with_capacity(mine.len());
        // All caps within budget: the objective is increasing, take them.
        if mine.len() as f64 * cap <= budget {
            xs = vec![cap; mine.len()];
        } else {
            let (mut lo, mut hi): (f64, f64) = (1e-18, 1e18);
            for _ in 0..200 {
                let nu = (lo * hi).sqrt();
                fill(nu, &mut xs);
                if xs.iter().sum::<f64>() > budget {
                    lo = nu;
                } else {
                    hi = nu;
                }
            }
            fill(hi, &mut xs);
        }
        for (j, &c) in mine.iter().enumerate() {
            let i = s * cells + c;
            x_hat[i] = xs[j];
            alloc.x[i] = (xs[j].round().max(0.0) as u32).min(input.n_comm);
        }
    }

    let repaired = adjust_allocation(alloc, &x_hat, input);
    let telemetry = SolveTelemetry {
        outer_iterations: 1,
        converged: true,
        kkt_residual: 0.0,
        relaxed_objective: f64::NAN,
        integer_objective: objective_p1(input, &repaired),
        max_violation: 0.0,
    };
    Ok((repaired, telemetry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn input(sats: usize, cells: usize, rho: Vec<f64>, users: Vec<u64>, n_comm: u32, n_beams: u32) -> RateInput {
        assert_eq!(rho.len(), sats * cells);
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
    fn per_user_throughput_reference() {
        // T = 10 ms, x = 50, H = 50 ms, rho = 100 Mbit/s, T_F = 10 s, M = 100.
        let r = per_user_throughput(50, 0.05, 1e8, 100, 0.01, 10.0);
        assert_relative_eq!(r, 45_000.0, epsilon = 1e-9);
        assert_eq!(per_user_throughput(0, 0.05, 1e8, 100, 0.01, 10.0), 0.0);
        // H = 0: linear in x.
        let r1 = per_user_throughput(10, 0.0, 1e8, 100, 0.01, 10.0);
        let r2 = per_user_throughput(20, 0.0, 1e8, 100, 0.01, 10.0);
        assert_relative_eq!(r2, 2.0 * r1);
    }

    #[test]
    fn objective_p1_cases() {
        let inp = input(1, 1, vec![1e8], vec![100], 50, 1);
        let zero = AllocationMatrix::zeros(1, 1);
        assert_eq!(objective_p1(&inp, &zero), 0.0);
        let one = AllocationMatrix { sats: 1, cells: 1, x: vec![10] };
        let r = per_user_throughput(10, 0.0, 1e8, 100, 0.01, 10.0);
        assert_relative_eq!(objective_p1(&inp, &one), 100.0 * (1.0 + r).ln());
    }

    #[test]
    fn adjust_is_idempotent_on_feasible() {
        let inp = input(2, 2, vec![1e8, 2e8, 3e8, 4e8], vec![10, 20], 4, 1);
        let x = AllocationMatrix { sats: 2, cells: 2, x: vec![2, 0, 0, 3] };
        let x_hat = vec![2.0, 0.0, 0.0, 3.0];
        let out = adjust_allocation(x.clone(), &x_hat, &inp);
        assert_eq!(out, x);
    }

    #[test]
    fn adjust_zeroes_weaker_duplicate_match() {
        // Cell 0 served by both satellites; row 0 has the higher rate.
        let inp = input(2, 1, vec![2e8, 1e8], vec![10], 4, 1);
        let x = AllocationMatrix { sats: 2, cells: 1, x: vec![2, 2] };
        let out = adjust_allocation(x, &[2.0, 2.0], &inp);
        assert_eq!(out.x, vec![2, 0]);
        // Equal rates: lowest satellite row wins.
        let inp = input(2, 1, vec![1e8, 1e8], vec![10], 4, 1);
        let x = AllocationMatrix { sats: 2, cells: 1, x: vec![2, 2] };
        let out = adjust_allocation(x, &[2.0, 2.0], &inp);
        assert_eq!(out.x, vec![2, 0]);
    }

    #[test]
    fn adjust_decrements_largest_surplus() {
        // One satellite, three cells, budget 6, rounded to 8: two decrements
        // at the largest rounding surplus.
        let inp = input(1, 3, vec![1e8, 1e8, 1e8], vec![10, 10, 10], 6, 1);
        let x = AllocationMatrix { sats: 1, cells: 3, x: vec![3, 3, 2] };
        let x_hat = vec![2.6, 2.51, 1.9];
        let out = adjust_allocation(x, &x_hat, &inp);
        // Surpluses 0.4, 0.49, 0.1: first decrement cell 1, then cell 0.
        assert_eq!(out.x, vec![2, 2, 2]);
        assert!(out.is_feasible(&inp));
    }

    #[test]
    fn jmra_meets_oracle_on_small_instance() {
        // 2 satellites, 3 cells, N_B = 1, N_C = 4, H = 0.
        let inp = input(
            2,
            3,
            vec![1e8, 6e7, 2e7, 3e7, 9e7, 8e7],
            vec![120, 40, 80],
            4,
            1,
        );
        let (alloc, tel) = jmra(&inp, &SolverParams::default()).unwrap();
        assert!(alloc.is_feasible(&inp));
        let (_, best) = brute_force_p1(&inp, 10_000_000).unwrap();
        assert!(
            tel.integer_objective >= 0.95 * best,
            "jmra {} vs oracle {}",
            tel.integer_objective,
            best
        );
    }

    #[test]
    fn single_satellite_jmra_matches_dmrab() {
        let inp = input(1, 3, vec![1e8, 5e7, 2e7], vec![50, 50, 100], 4, 1);
        let (a, ta) = jmra(&inp, &SolverParams::default()).unwrap();
        let (b, tb) = dmrab(&inp, &SolverParams::default()).unwrap();
        assert!(a.is_feasible(&inp) && b.is_feasible(&inp));
        assert_relative_eq!(ta.integer_objective, tb.integer_objective, max_relative = 0.02);
    }

    #[test]
    fn dmrab_tie_break_lowest_sat() {
        let inp = input(2, 1, vec![1e8, 1e8], vec![10], 4, 1);
        let (alloc, _) = dmrab(&inp, &SolverParams::default()).unwrap();
        assert!(alloc.at(0, 0) > 0);
        assert_eq!(alloc.at(1, 0), 0);
    }

    #[test]
    fn dmrab_starvation_loses_to_jmra() {
        // Satellite 0 is best for all four cells but has budget for little;
        // the joint solver offloads to satellite 1.
        let inp = input(
            2,
            4,
            vec![1e9, 1.1e9, 0.9e9, 1e9, 9e8, 9.5e8, 8.5e8, 9e8],
            vec![60, 50, 40, 30],
            4,
            1,
        );
        let (_, tj) = jmra(&inp, &SolverParams::default()).unwrap();
        let (_, td) = dmrab(&inp, &SolverParams::default()).unwrap();
        assert!(
            tj.integer_objective > td.integer_objective,
            "jmra {} dmrab {}",
            tj.integer_objective,
            td.integer_objective
        );
    }

    #[test]
    fn dmrab_infeasible_under_heavy_handover() {
        // Handover cost exceeds what a full allocation can repay: b > 1 and
        // 1 + a N_C - b <= 0 for the matched satellite.
        let mut inp = input(1, 1, vec![1e8], vec![1], 4, 1);
        inp.t_frame_s = 0.1;
        inp.handover_s = vec![0.09];
        // a = 1e8 * 0.01 / 0.1 = 1e7; b = 1e8 * 0.09 / 0.1 = 9e7 >> 1 + 4a.
        match dmrab(&inp, &SolverParams::default()) {
            Err(SimError::DmrabInfeasible { sat_id: 0 }) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn jmra_feasible_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let sats = rng.random_range(1..4usize);
            let cells = rng.random_range(1..5usize);
            let rho: Vec<f64> = (0..sats * cells).map(|_| rng.random_range(0.0..2e8)).collect();
            let users: Vec<u64> = (0..cells).map(|_| rng.random_range(1..200)).collect();
            let inp = input(sats, cells, rho, users, rng.random_range(1..5), rng.random_range(1..3));
            let (alloc, tel) = jmra(&inp, &SolverParams::default()).unwrap();
            assert!(alloc.is_feasible(&inp));
            // Oracle dominance.
            if let Ok((_, best)) = brute_force_p1(&inp, 2_000_000) {
                assert!(tel.integer_objective <= best + 1e-9);
            }
        }
    }

    #[test]
    fn larger_delta_converges_no_slower() {
        let iters = |delta: f64| -> f64 {
            let mut total = 0u32;
            let mut r = ChaCha12Rng::seed_from_u64(99);
            for _ in 0..15 {
                let sats = r.random_range(2..4usize);
                let cells = r.random_range(2..5usize);
                let rho: Vec<f64> = (0..sats * cells).map(|_| r.random_range(1e7..2e8)).collect();
                let users: Vec<u64> = (0..cells).map(|_| r.random_range(10..200)).collect();
                let inp = input(sats, cells, rho, users, 4, 1);
                let params = SolverParams { delta, ..SolverParams::default() };
                let (_, tel) = jmra(&inp, &params).unwrap();
                total += tel.outer_iterations;
            }
            total as f64
        };
        assert!(iters(10.0) <= iters(2.0), "delta=10 should not be slower");
    }
}
