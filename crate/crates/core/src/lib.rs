//! Quantum-inspired fractals: Möbius boosts on the unit sphere driven by a
//! chaos game, plus the Pauli/SL(2,C) algebra they come from.

pub mod checks;
pub mod error;
pub mod ifs;
pub mod metrics;
pub mod mobius;
pub mod pauli;
pub mod raster;
pub mod render;

pub use error::{Error, Result};
pub use ifs::{run_chaos_game, ChaosGameConfig, Point2, PointSink, Preset, RunSummary};
pub use mobius::{BoostGenerator, GeneratorSystem, ProbabilityMode, UnitVec3};
pub use raster::{GrayImage, GridDomain, HistogramGrid, ToneMode};
