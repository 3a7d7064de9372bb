//! Experiment drivers: sweeps, decay fits, the mountain-pass pipeline, the
//! command line and declarative config files.

pub mod cli;
pub mod config;
pub mod decay;
pub mod pass;
pub mod sweep;

pub use config::{run_config, Manifest};
pub use decay::{decay_fit, DecayFit};
pub use pass::{mountain_pass, PassInit, PassReport, PassSpec};
pub use sweep::{sweep, sweep_csv, workers, SweepReport, SweepRow, SweepSpec, Task, WORKERS_ENV};
