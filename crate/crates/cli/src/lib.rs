pub mod runner;
pub mod scenario;

pub use runner::{run_conditions, run_scenario, run_suite, ScenarioOutcome, SuiteSummary, Verdict};
pub use scenario::{Overrides, Scenario, ScenarioError};
