//! Synthetic ensembles and their population oracles.

pub mod generators;
pub mod population;
pub mod rank_two;
pub mod simulation;

pub use generators::{
    cartel_columns, cartel_ensemble, feasible_errors, generate_truth, independent_columns, independent_ensemble,
    nearest_feasible_pi, rdfba, sample_population, CartelColumns, Columns, Detector, Targeting,
};
pub use population::{population_covariance, rank_one_lambda, rank_one_vector, signed_accuracies};
pub use rank_two::{rank_two_spectrum, RankTwoSpectrum};
pub use simulation::{simulate, CartelConfig, Simulation, SimulationConfig, DEFAULT_POOL};
