//! Interactive decomposition-based evolutionary multi-objective optimization.
//!
//! MOEA/D and NSGA-III drive a population toward a decision maker's region
//! of interest. Every few generations the decision maker scores a handful
//! of candidates; a radial-basis value function is fitted to all scores seen
//! so far and used to pull the reference points toward the preferred region.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, and the [`single`]
//! module repeats them for `f32`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod elicitation;
pub mod engine;
pub mod error;
pub mod learning;
pub mod linalg;
pub mod model;
pub mod moead;
pub mod nsga3;
pub mod optimizer;
pub mod oracle;
pub mod problems;
pub mod refpoints;
pub mod scalar;
pub mod variation;

pub use config::{ConfigFile, PreferenceSource, RunConfig};
pub use elicitation::GuardMode;
pub use engine::{run_simulated, run_single, RunObserver, RunResult, Silent};
pub use error::{Error, Result};
pub use learning::{ConsultationSchedule, KernelForm, ValueModel};
pub use oracle::DmOracle;
pub use optimizer::{Algorithm, EngineRng, Optimizer};
pub use problems::{NoiseSpec, ProblemId, ProblemSpec, Roi};
pub use refpoints::LatticeSpec;
pub use scalar::Scalar;
pub use variation::{MutationGate, VariationParams};

pub type Solution = model::Solution<f64>;
pub type Population = model::Population<f64>;
pub type IdealPoint = model::IdealPoint<f64>;
pub type GoldenSpec = problems::GoldenSpec<f64>;
pub type ReferenceSet = refpoints::ReferenceSet<f64>;
pub type AvfModel = learning::AvfModel<f64>;
pub type ScoredRecord = learning::ScoredRecord<f64>;
pub type ConsultationRequest = oracle::ConsultationRequest<f64>;
pub type SimulatedOracle = oracle::SimulatedOracle<f64>;
pub type MoeadState = moead::MoeadState<f64>;
pub type Nsga3State = nsga3::Nsga3State<f64>;

/// Single-precision aliases.
pub mod single {
    pub type Solution = crate::model::Solution<f32>;
    pub type Population = crate::model::Population<f32>;
    pub type IdealPoint = crate::model::IdealPoint<f32>;
    pub type GoldenSpec = crate::problems::GoldenSpec<f32>;
    pub type ReferenceSet = crate::refpoints::ReferenceSet<f32>;
    pub type AvfModel = crate::learning::AvfModel<f32>;
    pub type ScoredRecord = crate::learning::ScoredRecord<f32>;
    pub type ConsultationRequest = crate::oracle::ConsultationRequest<f32>;
    pub type SimulatedOracle = crate::oracle::SimulatedOracle<f32>;
    pub type MoeadState = crate::moead::MoeadState<f32>;
    pub type Nsga3State = crate::nsga3::Nsga3State<f32>;
}
