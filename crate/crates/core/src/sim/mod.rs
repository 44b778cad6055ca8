//! Monte Carlo simulation, experiment configuration and sweeps.

pub mod config;
pub mod montecarlo;
pub mod rng;
pub mod sweep;
pub mod validate;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use montecarlo::{
    pseudo_ml_histogram, simulate_scheme_a, simulate_scheme_b, simulate_uncoded, uncoded_coefficient, HdaSetup,
    McResult, Scheme,
};
pub use sweep::{run_sweep, write_csv, write_csv_file, SweepRow, CSV_HEADER};
pub use validate::{validate_point, Check, ValidationPoint};
