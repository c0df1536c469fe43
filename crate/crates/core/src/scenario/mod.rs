//! End-to-end scenario harness: TOML configs, experiment runs with the
//! message-passing oracle, CSV logs with exact replay, and equilibrium
//! certification for reduced scenarios.

pub mod certify;
pub mod config;
pub mod csvio;
pub mod experiment;
pub mod optimum;

pub use certify::{certify, Certificate, CERTIFY_EPSILONS};
pub use config::{compile, load_config, parse_config, CompiledScenario, ScenarioConfig};
pub use csvio::{read_run_csv, replay, write_run_csv};
pub use experiment::{run_experiment, ExchangeOracle, ExperimentOutcome, Summary};
pub use optimum::{regime_optima, RegimeOptimum};
