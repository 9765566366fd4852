//! Benchmark front end for the Volterra solvers: sweep experiments, CSV and
//! SVG artifacts, and the cost model behind the `vie-parareal` binary.

pub mod cli;
pub mod csvio;
pub mod experiment;
pub mod plot;
pub mod speedup;
pub mod sweep;

pub use csvio::{parse_csv, write_csv, ErrorRecord, CSV_HEADER};
pub use experiment::{
    fit_coarse_decay, run_experiment, sequential_fine_floor, ExperimentSpec, Family, SlopeFit,
};
pub use plot::{experiment_chart, semilog_svg, Series};
pub use speedup::{speedup_estimate, CostEstimate};
pub use sweep::parse_sweep;
