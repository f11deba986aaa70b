//! Experiment orchestration: per-frame pipeline (rain step, geometry,
//! sensing, allocation, realized KPIs), CSV/manifest emission.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alloc::{
    dmrab, jmra, per_user_throughput, AllocationMatrix, Framework, RateInput, SolveTelemetry,
};
use crate::config::{RealizedRate, ScenarioConfig};
use crate::error::SimError;
use crate::frame::{handover_penalty, ra_deadline_check, FrameBudget};
use crate::ground::{active_users, build_grid, load_population, synth_population, CellGrid};
use crate::kpi::{jain_index_weighted, NmseAccum};
use crate::link::{achievable_rate, build_link_table, db_to_linear, LinkTable};
use crate::orbit::{propagate, visible_satellites, Constellation};
use crate::rain::{dtmc_probs, init_field, step, RainField};
use crate::sense::{run_sensing_phase, CsiMode, SensingReport};
use crate::{kpi, seed};

/// One CSV row. Field order matches the emitted header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KpiRecord {
    pub frame: u64,
    pub framework: Framework,
    pub csi: CsiMode,
    pub pilot_len: u32,
    /// Sum over cells of realized per-user throughput, bit/s.
    pub throughput_bps: f64,
    pub jain: f64,
    pub handovers: u64,
    pub nmse_gamma: f64,
    pub nmse_att: f64,
    pub solver_ms: f64,
    pub ts_ms: f64,
}

/// Per-run aggregate written next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub scenario: String,
    pub seed: u64,
    pub frames: u64,
    pub software_version: String,
    pub warnings: Vec<String>,
    pub ra_deadline: RaDeadlineReport,
    pub summary: RunSummary,
}

/// Solver wall time vs the real-time budget T_F - T_S - T_HO.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaDeadlineReport {
    pub budget_s: f64,
    pub max_solver_s: f64,
    pub mean_solver_s: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub framework: Framework,
    pub csi: CsiMode,
    /// Frame mean of the verbatim per-user throughput sum, bit/s.
    pub mean_throughput_bps: f64,
    /// User-weighted normalization sum(M_c R_c) / sum(M_c), frame mean.
    pub mean_per_user_throughput_bps: f64,
    pub mean_jain: f64,
    pub handovers_per_s: f64,
    /// NMSE over sensed pairs, split by rain state at the served cell.
    pub nmse_gamma_rain: f64,
    pub nmse_gamma_dry: f64,
    pub nmse_att_rain: f64,
    pub nmse_att_dry: f64,
    /// Frames the benchmark framework could not solve.
    pub solver_failures: u64,
    /// Frames where the joint solver hit its outer iteration cap.
    pub unconverged_frames: u64,
    pub converged_fraction: f64,
}

pub struct RunOutput {
    pub records: Vec<KpiRecord>,
    pub manifest: RunManifest,
}

/// Loads or synthesizes the population onto a fresh grid.
pub fn build_populated_grid(cfg: &ScenarioConfig) -> Result<CellGrid, SimError> {
    let mut grid = build_grid(cfg.ground.region, cfg.ground.active_fraction)?;
    if let Some(path) = &cfg.ground.population_file {
        let file = std::fs::File::open(path)?;
        load_population(&mut grid, std::io::BufReader::new(file))?;
    } else if let Some(synth) = cfg.ground.synth {
        let mut rng = seed::stream(cfg.run.seed, "population");
        synth_population(
            &mut grid,
            &mut rng,
            synth.mean_users,
            synth.dispersion,
            synth.zero_fraction,
        )?;
    }
    Ok(grid)
}

/// Believed SNR for one pair given the CSI mode. Sensed estimates are
/// expressed through the corrected attenuation, clamped so the belief never
/// exceeds clear sky, then backed off by the rate margin.
fn believed_snr(mode: CsiMode, link: &crate::link::LinkState, report: &SensingReport, margin: f64) -> f64 {
    match mode {
        CsiMode::Perfect => link.snr,
        CsiMode::None => link.snr_clear_sky,
        CsiMode::Sensed => {
            if report.sensed {
                (link.snr_clear_sky / report.att_hat).min(link.snr_clear_sky) * margin
            } else {
                link.snr_clear_sky
            }
        }
    }
}

struct FrameOutcome {
    throughput_bps: f64,
    jain: f64,
    per_user_weighted: f64,
    handovers: u64,
    serving: Vec<Option<u32>>,
}

/// Realized KPIs for one frame's allocation under the configured rate
/// mismatch rule.
#[allow(clippy::too_many_arguments)]
fn realize(
    alloc: &AllocationMatrix,
    table: &LinkTable,
    rho_belief: &[f64],
    handover_s: &[f64],
    users: &[u64],
    budget: &FrameBudget,
    rule: RealizedRate,
    prev_serving: &[Option<u32>],
) -> FrameOutcome {
    let cells = users.len();
    let mut per_user = vec![0.0; cells];
    let mut serving = vec![None; cells];
    for c in 0..cells {
        let Some(s) = alloc.serving(c) else { continue };
        serving[c] = Some(table.sat_ids[s]);
        let i = s * cells + c;
        let link = &table.links[i];
        let realized_rho = match rule {
            RealizedRate::Outage => {
                if rho_belief[i] > link.rate_bps * (1.0 + 1e-12) {
                    0.0
                } else {
                    rho_belief[i]
                }
            }
            RealizedRate::Capped => rho_belief[i].min(link.rate_bps),
        };
        per_user[c] = per_user_throughput(
            alloc.at(s, c),
            handover_s[i],
            realized_rho,
            users[c],
            budget.t_s,
            budget.t_frame_s,
        )
        .max(0.0);
    }
    let total_users: f64 = users.iter().map(|&m| m as f64).sum();
    let weighted: f64 =
        per_user.iter().zip(users).map(|(r, &m)| r * m as f64).sum::<f64>() / total_users.max(1.0);
    FrameOutcome {
        throughput_bps: per_user.iter().sum(),
        jain: jain_index_weighted(&per_user, users),
        per_user_weighted: weighted,
        handovers: kpi::count_handovers(prev_serving, &serving),
        serving,
    }
}

/// Runs the configured experiment. Deterministic for a given config+seed:
/// every stochastic subsystem draws from its own labeled stream.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut warnings = cfg.validate()?;
    let budget = cfg.frame_budget()?;
    let grid = build_populated_grid(cfg)?;

    // Allocator columns: active cells with population.
    let cell_ids = grid.active_cells();
    let users: Vec<u64> = cell_ids
        .iter()
        .map(|&c| active_users(grid.cells[c].population, cfg.ground.active_fraction))
        .collect();
    if cell_ids.is_empty() {
        warnings.push("no populated cells in region".into());
    }

    let constellation = Constellation { shells: cfg.shells.clone() };
    let probs = dtmc_probs(&cfg.rain, cfg.frame.t_frame_s);
    let mut rain: Option<RainField> = None;

    let mode = cfg.run.csi;
    let framework = cfg.run.framework;
    let margin = db_to_linear(-cfg.run.rate_margin_db);
    let ts_ms = budget.n_sensing as f64 * budget.t_s * 1000.0;

    let mut records = Vec::with_capacity(cfg.run.frames as usize);
    let mut prev_serving: Vec<Option<u32>> = vec![None; cell_ids.len()];
    let mut solver_times = Vec::new();
    let mut failures = 0u64;
    let mut unconverged = 0u64;
    let mut jmra_frames = 0u64;
    let (mut gamma_rain, mut gamma_dry) = (NmseAccum::default(), NmseAccum::default());
    let (mut att_rain, mut att_dry) = (NmseAccum::default(), NmseAccum::default());
    let mut per_user_means = Vec::new();

    for k in 0..cfg.run.frames {
        match rain.as_mut() {
            None => {
                let mut rng = seed::stream(cfg.run.seed, "rain-init");
                rain = Some(init_field(&grid, &cfg.rain, cfg.frame.t_frame_s, &mut rng));
            }
            Some(field) => {
                let mut rng = seed::frame_stream(cfg.run.seed, "rain", k);
                step(field, probs, &mut rng);
                field.frame = k;
            }
        }
        let field = rain.as_ref().unwrap();

        let states_k = propagate(&constellation, k, cfg.frame.t_frame_s);
        let states_k1 = propagate(&constellation, k + 1, cfg.frame.t_frame_s);
        let visible = visible_satellites(
            &states_k,
            &states_k1,
            &grid,
            &cfg.shells,
            cfg.ground.min_elevation_deg,
        );

        let mut record = KpiRecord {
            frame: k,
            framework,
            csi: mode,
            pilot_len: cfg.sensing.pilot_len,
            throughput_bps: 0.0,
            jain: 0.0,
            handovers: 0,
            nmse_gamma: f64::NAN,
            nmse_att: f64::NAN,
            solver_ms: 0.0,
            ts_ms,
        };

        if visible.is_empty() || cell_ids.is_empty() {
            prev_serving = vec![None; cell_ids.len()];
            per_user_means.push(0.0);
            records.push(record);
            continue;
        }

        let table = build_link_table(
            k,
            &states_k,
            &states_k1,
            &visible,
            &cfg.shells,
            &grid,
            &cell_ids,
            field,
            cfg.rain.rain_height_km,
            &cfg.noise,
            cfg.ground.min_elevation_deg,
        );

        let mut rng = seed::frame_stream(cfg.run.seed, "sense", k);
        let reports = run_sensing_phase(&table, &cfg.shells, mode, cfg.sensing, &mut rng);

        // Frame NMSE over sensing-capable in-range pairs.
        let (mut g_acc, mut a_acc) = (NmseAccum::default(), NmseAccum::default());
        for (link, report) in table.links.iter().zip(&reports) {
            if !cfg.shells[link.shell_idx].sensing_capable() || !link.in_range {
                continue;
            }
            let att_true = link.snr_clear_sky / link.snr;
            g_acc.push(report.gamma_hat, link.snr);
            a_acc.push(report.att_hat, att_true);
            let wet = field.any_rain(link.cell_id);
            let (g_split, a_split) = if wet {
                (&mut gamma_rain, &mut att_rain)
            } else {
                (&mut gamma_dry, &mut att_dry)
            };
            g_split.push(report.gamma_hat, link.snr);
            a_split.push(report.att_hat, att_true);
        }
        record.nmse_gamma = g_acc.value();
        record.nmse_att = a_acc.value();

        // Allocator inputs from the believed channel.
        let cells = cell_ids.len();
        let mut rho_belief = vec![0.0; table.links.len()];
        let mut handover_s = vec![0.0; table.links.len()];
        for (i, (link, report)) in table.links.iter().zip(&reports).enumerate() {
            let gamma = believed_snr(mode, link, report, margin);
            let bw = cfg.shells[link.shell_idx].bandwidth_hz;
            rho_belief[i] = achievable_rate(bw, gamma, link.in_range);
            let alpha_prev = prev_serving[i % cells] == Some(link.sat_id);
            handover_s[i] = handover_penalty(alpha_prev, cfg.frame.t_ho_s);
        }
        let input = RateInput {
            rho: rho_belief.clone(),
            handover_s: handover_s.clone(),
            users: users.clone(),
            t_s: budget.t_s,
            t_frame_s: budget.t_frame_s,
            n_comm: budget.n_comm,
            n_beams: cfg.ground.n_beams,
        };

        let start = Instant::now();
        let solved: Result<(AllocationMatrix, SolveTelemetry), SimError> = match framework {
            Framework::Jmra => jmra(&input, &cfg.solver),
            Framework::Dmrab => dmrab(&input, &cfg.solver),
        };
        let elapsed = start.elapsed().as_secs_f64();
        solver_times.push(elapsed);
        if cfg.run.emit_wall_time_in_csv {
            record.solver_ms = elapsed * 1000.0;
        }

        match solved {
            Ok((alloc, telemetry)) => {
                debug_assert!(alloc.is_feasible(&input));
                if framework == Framework::Jmra {
                    jmra_frames += 1;
                    if !telemetry.converged {
                        unconverged += 1;
                    }
                }
                let outcome = realize(
                    &alloc,
                    &table,
                    &rho_belief,
                    &handover_s,
                    &users,
                    &budget,
                    cfg.run.realized_rate,
                    &prev_serving,
                );
                record.throughput_bps = outcome.throughput_bps;
                record.jain = outcome.jain;
                record.handovers = outcome.handovers;
                per_user_means.push(outcome.per_user_weighted);
                prev_serving = outcome.serving;
            }
            Err(SimError::DmrabInfeasible { .. }) => {
                failures += 1;
                per_user_means.push(0.0);
                prev_serving = vec![None; cells];
            }
            Err(e) => return Err(e),
        }
        records.push(record);
    }

    let k = records.len().max(1) as f64;
    let mean_solver = kpi::mean(&solver_times);
    let max_solver = solver_times.iter().cloned().fold(0.0, f64::max);
    let ra_deadline = RaDeadlineReport {
        budget_s: budget.ra_budget_s(),
        max_solver_s: max_solver,
        mean_solver_s: mean_solver,
        within_budget: ra_deadline_check(max_solver, &budget),
    };
    let summary = RunSummary {
        framework,
        csi: mode,
        mean_throughput_bps: records.iter().map(|r| r.throughput_bps).sum::<f64>() / k,
        mean_per_user_throughput_bps: kpi::mean(&per_user_means),
        mean_jain: records.iter().map(|r| r.jain).sum::<f64>() / k,
        handovers_per_s: records.iter().map(|r| r.handovers).sum::<u64>() as f64
            / (k * cfg.frame.t_frame_s),
        nmse_gamma_rain: gamma_rain.value(),
        nmse_gamma_dry: gamma_dry.value(),
        nmse_att_rain: att_rain.value(),
        nmse_att_dry: att_dry.value(),
        solver_failures: failures,
        unconverged_frames: unconverged,
        converged_fraction: if jmra_frames > 0 {
            1.0 - unconverged as f64 / jmra_frames as f64
        } else {
            1.0
        },
    };
    let manifest = RunManifest {
        config_digest: cfg.digest(),
        scenario: cfg.name.clone(),
        seed: cfg.run.seed,
        frames: cfg.run.frames,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        warnings,
        ra_deadline,
        summary,
    };
    Ok(RunOutput { records, manifest })
}

/// Frame-0 allocation problem (cold start, fresh rain field), used by the
/// oracle comparison. `None` when no satellite sees a populated cell.
pub fn build_frame0_input(cfg: &ScenarioConfig) -> Result<Option<RateInput>, SimError> {
    cfg.validate()?;
    let budget = cfg.frame_budget()?;
    let grid = build_populated_grid(cfg)?;
    let cell_ids = grid.active_cells();
    let users: Vec<u64> = cell_ids
        .iter()
        .map(|&c| active_users(grid.cells[c].population, cfg.ground.active_fraction))
        .collect();
    let constellation = Constellation { shells: cfg.shells.clone() };
    let mut rng = seed::stream(cfg.run.seed, "rain-init");
    let field = init_field(&grid, &cfg.rain, cfg.frame.t_frame_s, &mut rng);
    let states_k = propagate(&constellation, 0, cfg.frame.t_frame_s);
    let states_k1 = propagate(&constellation, 1, cfg.frame.t_frame_s);
    let visible = visible_satellites(
        &states_k,
        &states_k1,
        &grid,
        &cfg.shells,
        cfg.ground.min_elevation_deg,
    );
    if visible.is_empty() || cell_ids.is_empty() {
        return Ok(None);
    }
    let table = build_link_table(
        0,
        &states_k,
        &states_k1,
        &visible,
        &cfg.shells,
        &grid,
        &cell_ids,
        &field,
        cfg.rain.rain_height_km,
        &cfg.noise,
        cfg.ground.min_elevation_deg,
    );
    let mut rng = seed::frame_stream(cfg.run.seed, "sense", 0);
    let reports = run_sensing_phase(&table, &cfg.shells, cfg.run.csi, cfg.sensing, &mut rng);
    let margin = db_to_linear(-cfg.run.rate_margin_db);
    let mut rho = vec![0.0; table.links.len()];
    for (i, (link, report)) in table.links.iter().zip(&reports).enumerate() {
        let gamma = believed_snr(cfg.run.csi, link, report, margin);
        rho[i] = achievable_rate(cfg.shells[link.shell_idx].bandwidth_hz, gamma, link.in_range);
    }
    Ok(Some(RateInput {
        handover_s: vec![cfg.frame.t_ho_s; rho.len()],
        rho,
        users,
        t_s: budget.t_s,
        t_frame_s: budget.t_frame_s,
        n_comm: budget.n_comm,
        n_beams: cfg.ground.n_beams,
    }))
}

/// Joint-solver objective vs the exhaustive optimum on the frame-0 problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub sats: usize,
    pub cells: usize,
    pub jmra_objective: f64,
    pub oracle_objective: f64,
    pub ratio: f64,
}

pub fn oracle_compare(cfg: &ScenarioConfig, cap: u64) -> Result<OracleReport, SimError> {
    let Some(input) = build_frame0_input(cfg)? else {
        return Err(SimError::Config("no visible satellites or populated cells at frame 0".into()));
    };
    let (_, telemetry) = jmra(&input, &cfg.solver)?;
    let (_, best) = crate::alloc::brute_force_p1(&input, cap)?;
    Ok(OracleReport {
        sats: input.sats(),
        cells: input.cells(),
        jmra_objective: telemetry.integer_objective,
        oracle_objective: best,
        ratio: if best != 0.0 { telemetry.integer_objective / best } else { 1.0 },
    })
}

/// CSV header, fixed.
pub const KPI_HEADER: &str =
    "frame,framework,csi,pilot_len,throughput_bps,jain,handovers,nmse_gamma,nmse_att,solver_ms,ts_ms";

/// Writes the KPI rows with the fixed header. Formatting is deterministic.
pub fn write_kpis_csv<W: Write>(mut w: W, records: &[KpiRecord]) -> Result<(), SimError> {
    writeln!(w, "{KPI_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{},{:.6e},{:.6e},{:.3},{:.3}",
            r.frame,
            r.framework,
            r.csi,
            r.pilot_len,
            r.throughput_bps,
            r.jain,
            r.handovers,
            r.nmse_gamma,
            r.nmse_att,
            r.solver_ms,
            r.ts_ms
        )?;
    }
    Ok(())
}

pub fn write_manifest<W: Write>(mut w: W, manifest: &RunManifest) -> Result<(), SimError> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| SimError::Config(format!("manifest serialization: {e}")))?;
    writeln!(w, "{text}")?;
    Ok(())
}
