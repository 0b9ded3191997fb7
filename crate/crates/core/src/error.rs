//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the numerical routines and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside a routine's documented validity window.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array or grid dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical procedure failed to reach its accuracy or stability
    /// contract (truncation not reached, overflow of conjugated entries,
    /// singular linear system, ...).
    #[error("numerics error: {0}")]
    Numerics(String),

    /// Invalid configuration file or command-line value.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading configuration or writing reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
