//! Load-redistribution attack tooling for DC power system models: grid case
//! handling, PTDF sensitivities, DC optimal power flow, the greedy
//! best-attack solver with an LP cross-check, and the NPDSB detection index
//! that separates structured attacks from measurement noise.
//!
//! Core math is generic over the scalar type; `f64` aliases are exported at
//! the crate root and are what the CLI uses.

pub mod attack;
pub mod dc;
pub mod detector;
pub mod dispatch;
pub mod fixtures;
pub mod grid;
pub mod linalg;
pub mod lp;
pub mod scalar;
pub mod scenario;
pub mod se;
pub mod synth;

pub use scalar::Scalar;

/// f64 aliases used by the CLI and most callers.
pub type GridCase = grid::GridCase<f64>;
pub type SusceptanceSystem = dc::SusceptanceSystem<f64>;
pub type PtdfMatrix = dc::PtdfMatrix<f64>;
pub type FlowSolution = dc::FlowSolution<f64>;
pub type MeasurementModel = se::MeasurementModel<f64>;
pub type LpProblem = lp::LpProblem<f64>;
pub type LpSolution = lp::LpSolution<f64>;
pub type DispatchSolution = dispatch::DispatchSolution<f64>;
pub type DeviationVector = attack::DeviationVector<f64>;
pub type AttackSpec = attack::AttackSpec<f64>;
pub type AssetProfile = detector::AssetProfile<f64>;
pub type DetectionVerdict = detector::DetectionVerdict<f64>;
