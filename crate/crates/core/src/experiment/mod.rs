//! Seeded experiment runner behind the command-line tool.

mod config;
mod eval;
pub mod report;
mod runner;

pub use config::{DatasetConfig, ExperimentConfig, DEFAULT_HIDDEN};
pub use eval::{cmd_eval_loss, LossEvaluation};
pub use runner::{
    cmd_compare, cmd_inspect_data, cmd_train, csv_path, evaluate, load_raw, prepare, summarize, train_trial,
    CompareSummary, DataSummary, LossSummary, PreparedData,
};

use crate::error::Result;
use crate::losses::gradcheck::{run_gradcheck, GradcheckConfig, GradcheckReport};

/// Finite-difference check of both losses at each class count.
pub fn cmd_gradcheck(classes: &[usize], samples: usize, seed: u64) -> Result<Vec<GradcheckReport>> {
    classes
        .iter()
        .map(|&c| run_gradcheck(&GradcheckConfig::new(c, samples, seed)))
        .collect()
}
