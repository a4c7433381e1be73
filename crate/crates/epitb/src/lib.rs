//! File formats, scenario runner, verification suite and CLI support on top
//! of `epitb-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod series;
pub mod verify;

pub use config::Scenario;
pub use error::{CliError, Result};
pub use report::{Check, RunReport};
pub use run::{map, simulate, RunOutput};
pub use series::Series;
