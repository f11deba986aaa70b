use thiserror::Error;

/// Errors surfaced by configuration validation, ingestion and the solvers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("region spans must be integer multiples of the cell step: {0}")]
    BadGrid(String),

    #[error("population source: {0}")]
    Population(String),

    #[error("missing rain power-law coefficients for shell '{0}'")]
    MissingPowerLaw(String),

    #[error("subproblem solver did not reach KKT tolerance: residual {residual:.3e} after {iterations} iterations")]
    SolverNonConvergence { residual: f64, iterations: usize },

    #[error("disjoint benchmark infeasible: satellite {sat_id} cannot cover handover cost for its matched cells")]
    DmrabInfeasible { sat_id: u32 },

    #[error("brute-force oracle refused: {candidates:.3e} candidates exceeds cap {cap:.3e}")]
    OracleTooLarge { candidates: u64, cap: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}
