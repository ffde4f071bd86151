//! Core library of the emoflow toolkit.
//!
//! Provides the building blocks for studying how emotions travel through a
//! social graph: graph storage and tie-strength metrics ([`graph`]),
//! exposure-based contagion analytics over tweet streams ([`emotion`]),
//! a tie-strength-weighted SI diffusion model ([`sim`]), awakening/peak
//! detection on cumulative curves ([`burst`]), DTW-based parameter fitting
//! ([`fit`]), and deterministic synthetic data generators ([`synth`]).

pub mod burst;
pub mod emotion;
pub mod fit;
pub mod graph;
pub mod rng;
pub mod sim;
pub mod synth;

pub use emotion::Emotion;
pub use graph::NodeId;
