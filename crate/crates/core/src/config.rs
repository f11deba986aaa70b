//! Scenario configuration: a hierarchical TOML document grouping the
//! constellation shells, ground segment, rain model, frame timing, sensing
//! and solver parameters, plus run-level options.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alloc::{Framework, SolverParams};
use crate::error::SimError;
use crate::frame::{min_handover_time, FrameBudget};
use crate::ground::Region;
use crate::link::NoiseModel;
use crate::orbit::{max_propagation_time, ShellConfig};
use crate::rain::RainParams;
use crate::sense::{sensing_timing, CsiMode, PilotConfig};

/// Ground segment: region grid, user activity and link geometry limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundConfig {
    pub region: Region,
    /// Fraction of the population active per frame, (0, 1].
    pub active_fraction: f64,
    /// Minimum elevation for service, deg.
    pub min_elevation_deg: f64,
    /// Beams per satellite.
    pub n_beams: u32,
    /// Population raster as `lat,lon,count` lines; resolved relative to the
    /// config file location when relative.
    #[serde(default)]
    pub population_file: Option<String>,
    /// Synthetic population fallback when no file is given.
    #[serde(default)]
    pub synth: Option<SynthPopulation>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SynthPopulation {
    pub mean_users: f64,
    pub dispersion: f64,
    pub zero_fraction: f64,
}

/// Frame timing parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrameConfig {
    /// OFDMA frame length T, s.
    pub t_s: f64,
    /// System frame length T_F, s.
    pub t_frame_s: f64,
    /// Handover interruption T_HO, s.
    pub t_ho_s: f64,
    /// Round trips required per handover.
    pub n_rtt: u32,
    /// Pins N_S instead of deriving it from the sensing timing. Lets long
    /// system frames keep a fixed sensing overhead.
    #[serde(default)]
    pub n_sensing_override: Option<u32>,
}

/// How rate mismatch between believed and true SNR is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizedRate {
    /// Transmission at a rate above the true Shannon rate fails: 0 bit.
    Outage,
    /// Believed rate capped at the true rate.
    Capped,
}

/// Run-level options; the CLI can override all of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub framework: Framework,
    pub csi: CsiMode,
    pub frames: u64,
    pub seed: u64,
    pub realized_rate: RealizedRate,
    /// When false (default) the per-frame CSV carries 0.0 for solver wall
    /// time so identical runs are byte-identical; measured times still go to
    /// the manifest.
    pub emit_wall_time_in_csv: bool,
    /// Link-adaptation back-off applied to pilot-estimated SNR before rate
    /// selection, dB. Keeps the overestimate-outage probability low without
    /// giving up much rate.
    pub rate_margin_db: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            framework: Framework::Jmra,
            csi: CsiMode::Sensed,
            frames: 100,
            seed: 0,
            realized_rate: RealizedRate::Outage,
            emit_wall_time_in_csv: false,
            rate_margin_db: 0.5,
        }
    }
}

/// Full scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub shells: Vec<ShellConfig>,
    pub ground: GroundConfig,
    pub rain: RainParams,
    pub noise: NoiseModel,
    pub frame: FrameConfig,
    pub sensing: PilotConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub run: RunOptions,
}

impl ScenarioConfig {
    pub fn from_str(text: &str) -> Result<Self, SimError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let mut cfg = Self::from_str(&std::fs::read_to_string(path)?)?;
        // Resolve the population file relative to the config location.
        if let (Some(pf), Some(dir)) = (&cfg.ground.population_file, path.parent()) {
            let p = Path::new(pf);
            if p.is_relative() {
                cfg.ground.population_file = Some(dir.join(p).to_string_lossy().into_owned());
            }
        }
        Ok(cfg)
    }

    /// Stable content digest over the canonical serialized form.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Derived frame budget: N_S from the sensing timing of the slowest
    /// sensing-capable shell (or the override), T quantized.
    pub fn frame_budget(&self) -> Result<FrameBudget, SimError> {
        let n_sensing = match self.frame.n_sensing_override {
            Some(n) => n,
            None => self.derived_sensing_frames()?,
        };
        FrameBudget::new(
            self.frame.t_s,
            self.frame.t_frame_s,
            self.frame.t_ho_s,
            n_sensing,
            self.frame.n_rtt,
        )
    }

    /// N_S derived from pilot sweeps over the whole grid on every
    /// sensing-capable shell; the slowest shell sets the sensing sub-frame.
    pub fn derived_sensing_frames(&self) -> Result<u32, SimError> {
        let grid_cells = (self.ground.region.rows() * self.ground.region.cols()) as u64;
        let mut worst = 0u32;
        for shell in &self.shells {
            if !shell.sensing_capable() {
                continue;
            }
            let t_eta = crate::orbit::max_propagation_time(
                std::slice::from_ref(shell),
                self.ground.min_elevation_deg,
            );
            let t = sensing_timing(
                grid_cells,
                self.ground.n_beams,
                self.sensing,
                shell.bandwidth_hz,
                t_eta,
                self.frame.t_s,
            );
            worst = worst.max(t.n_sensing);
        }
        Ok(worst)
    }

    /// Validates the whole scenario. Non-fatal findings (e.g. a handover
    /// time below the round-trip bound) come back as warnings for the run
    /// manifest.
    pub fn validate(&self) -> Result<Vec<String>, SimError> {
        if self.shells.is_empty() {
            return Err(SimError::Config("at least one shell is required".into()));
        }
        for shell in &self.shells {
            shell.validate()?;
        }
        {
            let mut ids: Vec<&str> = self.shells.iter().map(|s| s.id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != self.shells.len() {
                return Err(SimError::Config("shell ids must be unique".into()));
            }
        }
        self.ground.region.validate()?;
        if !(self.ground.active_fraction > 0.0 && self.ground.active_fraction <= 1.0) {
            return Err(SimError::Config("active_fraction must be in (0, 1]".into()));
        }
        if !(self.ground.min_elevation_deg > 0.0 && self.ground.min_elevation_deg < 90.0) {
            return Err(SimError::Config("min_elevation_deg must be in (0, 90)".into()));
        }
        if self.ground.n_beams == 0 {
            return Err(SimError::Config("n_beams must be positive".into()));
        }
        if self.ground.population_file.is_none() && self.ground.synth.is_none() {
            return Err(SimError::Config(
                "ground needs a population_file or a synth population".into(),
            ));
        }
        self.rain.validate()?;
        self.sensing.validate()?;
        self.solver.validate()?;
        let budget = self.frame_budget()?;
        if budget.n_comm == 0 {
            return Err(SimError::Config("no communication frames left after sensing".into()));
        }

        let mut warnings = Vec::new();
        let t_eta = max_propagation_time(&self.shells, self.ground.min_elevation_deg);
        let bound = min_handover_time(t_eta, self.frame.t_s, self.frame.n_rtt);
        if self.frame.t_ho_s < bound - 1e-12 {
            warnings.push(format!(
                "configured handover time {:.3} s is below the round-trip bound {:.3} s",
                self.frame.t_ho_s, bound
            ));
        }
        Ok(warnings)
    }
}
