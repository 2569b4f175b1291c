//! Next-POI recommendation pipeline built around natural-language user
//! profiles.
//!
//! The crate turns raw location-based check-in logs into supervised
//! fine-tuning data for LLM recommenders:
//!
//! 1. [`ingest`] parses raw check-in files and applies geographic filters.
//! 2. [`sessionize`] groups check-ins into trajectories and produces
//!    chronological train/validation/test splits.
//! 3. [`profiler`] derives a structured natural-language profile per user
//!    from their training history, via a chat backend.
//! 4. [`judge`] scores generated profiles on four binary criteria.
//! 5. [`promptgen`] renders system prompts and QA-style training examples.
//! 6. [`eval`] parses model predictions and computes top-1 accuracy,
//!    cold-start breakdowns, and preference-shift deltas.
//! 7. [`trajsim`] measures trajectory similarity (DTW) and decides when a
//!    stored profile should be regenerated.
//!
//! [`pipeline`] wires the stages behind a TOML config, and [`service`]
//! exposes stores and predictions over HTTP. Every stage is deterministic
//! given a seed: two runs of the same config produce byte-identical
//! artifacts.
//!
//! See `examples/` for one runnable program per capability.

pub mod backend;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod judge;
pub mod pipeline;
pub mod profiler;
pub mod promptgen;
pub mod service;
pub mod sessionize;
pub mod synth;
pub mod trajsim;

pub use error::{BackendError, Error, Result};
