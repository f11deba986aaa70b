//! Discrete-frame simulator and optimization engine for sensing-assisted
//! downlink resource allocation in heterogeneous LEO satellite constellations.
//!
//! The pipeline per system frame is: rain field step -> orbit propagation and
//! link geometry -> link budgets -> pilot-based SNR/attenuation sensing ->
//! joint (or disjoint) satellite-to-cell matching and OFDMA-frame allocation
//! -> realized throughput, fairness and sensing-error KPIs.
//!
//! The crate is organized to mirror that pipeline:
//! [`orbit`], [`ground`], [`rain`], [`link`], [`sense`], [`frame`],
//! [`alloc`], [`kpi`], with [`harness`] orchestrating full experiments from a
//! [`config::ScenarioConfig`].

pub mod alloc;
pub mod config;
pub mod constants;
pub mod error;
pub mod frame;
pub mod geo;
pub mod ground;
pub mod harness;
pub mod kpi;
pub mod link;
pub mod orbit;
pub mod rain;
pub mod seed;
pub mod sense;

pub use error::SimError;
