//! Helper constructors shared by the benchmark targets.

use rand::Rng;

use isac_core::alloc::RateInput;
use isac_core::seed;

/// Random allocation instance of the given size, deterministic per seed.
pub fn random_instance(master_seed: u64, sats: usize, cells: usize, n_comm: u32) -> RateInput {
    let mut rng = seed::stream(master_seed, "bench/instance");
    RateInput {
        rho: (0..sats * cells).map(|_| rng.random_range(1e6..1e9)).collect(),
        handover_s: (0..sats * cells)
            .map(|_| if rng.random_bool(0.2) { 0.1 } else { 0.0 })
            .collect(),
        users: (0..cells).map(|_| rng.random_range(1..5000)).collect(),
        t_s: 0.01,
        t_frame_s: 1.0,
        n_comm,
        n_beams: 19,
    }
}
