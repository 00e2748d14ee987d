//! Type-2 fuzzy noise modelling, a bacterial foraging optimizer and Pareto
//! frontier tooling for a solar-powered irrigation design problem.
//!
//! Everything numeric is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below fix it to `f64`.

pub mod bfa;
pub mod climate;
pub mod fuzzy;
pub mod irrigation;
pub mod pareto;
pub mod scalar;

pub use scalar::{Interval as GenericInterval, Scalar};

pub type Real = f64;

pub type Interval = scalar::Interval<Real>;
pub type ClimateTable = climate::ClimateTable<Real>;
pub type MonthlyClimateRecord = climate::MonthlyClimateRecord<Real>;
pub type SCurveParams = fuzzy::SCurveParams<Real>;
pub type ScurveShape = fuzzy::ScurveShape<Real>;
pub type Type2FuzzyVariable = fuzzy::Type2FuzzyVariable<Real>;
pub type AlphaPlane = fuzzy::AlphaPlane<Real>;
pub type DesignVector = irrigation::DesignVector<Real>;
pub type NoiseVector = irrigation::NoiseVector<Real>;
pub type ObjectiveTriple = irrigation::ObjectiveTriple<Real>;
pub type WeightVector = irrigation::WeightVector<Real>;
pub type ProblemSpec = irrigation::ProblemSpec<Real>;
pub type GradeContext = irrigation::GradeContext<Real>;
pub type IrrigationProblem = irrigation::IrrigationProblem<Real>;
pub type SolutionPoint = pareto::SolutionPoint<Real>;
pub type Frontier = pareto::Frontier<Real>;
pub type SigmaVector = pareto::SigmaVector<Real>;
pub type FrontierMetrics = pareto::FrontierMetrics<Real>;
pub type RunTrace = bfa::RunTrace<Real>;
