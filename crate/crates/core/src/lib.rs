//! Numerical laboratory for Kac-scaled lattice fermions: exact
//! diagonalization of finite boxes, mean-field pressures from the
//! thermodynamic game, and order-of-limits Kac sweeps.

pub mod error;
pub mod fock;
pub mod game;
pub mod io;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod quasifree;
pub mod scalar;
pub mod selftest;
pub mod sweep;

pub use error::{KacError, Result};
pub use scalar::Real;

pub type PairPotential64 = potential::PairPotential<f64>;
pub type PairPotential32 = potential::PairPotential<f32>;
pub type HoppingKernel64 = lattice::HoppingKernel<f64>;
pub type HoppingKernel32 = lattice::HoppingKernel<f32>;
pub type ModelParams64 = lattice::ModelParams<f64>;
pub type ModelParams32 = lattice::ModelParams<f32>;
pub type MeanFieldParams64 = lattice::MeanFieldParams<f64>;
pub type MeanFieldParams32 = lattice::MeanFieldParams<f32>;
pub type FockOperator64 = fock::FockOperator<f64>;
pub type FockOperator32 = fock::FockOperator<f32>;
pub type Game64 = game::Game<f64>;
pub type GameResult64 = game::GameResult<f64>;
pub type SweepPlan64 = sweep::SweepPlan<f64>;
