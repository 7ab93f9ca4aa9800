//! Articulatory movement simulation driven by gestural scores.
//!
//! A [`score::GestureScore`] is turned into first-order task-space
//! trajectories ([`taskgen`]), which are mapped frame by frame onto jaw, lip
//! and tongue positions with explicit lips-jaw and tongue-jaw load sharing
//! ([`articmap`]). Flesh-point trajectories ([`fleshpoints`]) can be windowed,
//! checked against the expected qualitative patterns, costed ([`effort`]),
//! exported as CSV ([`export`]) and drawn as SVG ([`plot`]).
//!
//! ```
//! use articulodyn::{articmap::SynergyConfig, pipeline::simulate_cv};
//!
//! let sim = simulate_cv("pa".parse().unwrap(), &SynergyConfig::default(), 1.0).unwrap();
//! assert_eq!(sim.frames.len(), 300);
//! ```

pub mod articmap;
pub mod effort;
pub mod export;
pub mod fleshpoints;
pub mod pipeline;
pub mod plot;
pub mod score;
pub mod taskgen;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Score(#[from] score::ScoreError),
    #[error(transparent)]
    TaskGen(#[from] taskgen::TaskGenError),
    #[error(transparent)]
    ArticMap(#[from] articmap::ArticMapError),
    #[error(transparent)]
    FleshPoint(#[from] fleshpoints::FleshPointError),
    #[error(transparent)]
    Effort(#[from] effort::EffortError),
    #[error(transparent)]
    Csv(#[from] export::CsvError),
}
