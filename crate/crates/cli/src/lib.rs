//! Command-line front end: catalog ingestion and classification, profile
//! management, simulation and trace replay over a persisted data directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod store;

pub use error::{AppError, AppResult};
