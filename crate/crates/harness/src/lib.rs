//! Command-line orchestration: generation, episodes, training, evaluation
//! campaigns, trace checking and equivalence suites.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod suites;

pub use campaign::{campaign_eval, CampaignReport};
pub use cli::{main_with, CliError};
pub use config::RunConfig;
pub use suites::{run_suite, FuzzParams, Suite, SuiteReport};
