//! Quick oracle checks run by `kaclab selftest`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fock::{build_approximating_hamiltonian, FockBasis, OperatorBuilder, Conservation};
use crate::game::{solve_game, OptimizerSpec};
use crate::lattice::{Boundary, HoppingKernel, LatticeBox, MeanFieldParams};
use crate::potential::{poisson_sum, PairPotential, Role, TruncationSpec};
use crate::quasifree::{finite_grid_pressure, per_k_log_trace, BdGBlock, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed discrepancy.
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }
}

fn car_defect() -> Result<f64> {
    let b = FockBasis::with_cap(2, 16)?;
    let dim = b.dimension();
    let id = nalgebra::DMatrix::<f64>::identity(dim, dim);
    let mut worst: f64 = 0.0;
    for i in 0..b.modes() {
        for j in 0..b.modes() {
            let (ai, aj) = (b.annihilation::<f64>(i), b.annihilation::<f64>(j));
            let aj_dag = aj.transpose();
            let mut anti = &ai * &aj_dag + &aj_dag * &ai;
            if i == j {
                anti -= &id;
            }
            worst = worst.max(anti.abs().max());
            worst = worst.max((&ai * &aj + &aj * &ai).abs().max());
        }
    }
    Ok(worst)
}

fn two_mode_defect(rng: &mut ChaCha8Rng) -> Result<f64> {
    let site = LatticeBox::new(1, 0, Boundary::Periodic)?;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let eps: f64 = rng.random_range(-3.0..3.0);
        let g = Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let beta: f64 = rng.random_range(0.1..20.0);
        let mf = MeanFieldParams::new(beta, HoppingKernel::onsite(1, eps), 0.0, 1.0)?;
        let h = build_approximating_hamiltonian(&mf, g, Complex::new(0.0, 0.0), &site)?;
        let ed = beta * h.pressure(beta)?;
        let closed = per_k_log_trace(&BdGBlock::new(vec![0.0], eps, g), beta);
        worst = worst.max((ed - closed).abs() / closed.abs().max(1.0));
    }
    Ok(worst)
}

fn duality_defect(rng: &mut ChaCha8Rng) -> Result<f64> {
    let lbox = LatticeBox::new(1, 1, Boundary::Periodic)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let beta: f64 = rng.random_range(0.2..5.0);
        let mf = MeanFieldParams::<f64>::new(
            beta,
            HoppingKernel::laplacian(1),
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..2.0),
        )?;
        let cm = Complex::new(rng.random_range(0.0..1.5), 0.0);
        let cp = Complex::new(rng.random_range(0.0..1.5), 0.0);
        let ed = build_approximating_hamiltonian(&mf, cm, cp, &lbox)?.pressure(beta)?;
        let grid = finite_grid_pressure(&mf, cm, cp, 1)?;
        worst = worst.max((ed - grid).abs());
    }
    Ok(worst)
}

fn poisson_defect() -> Result<f64> {
    let g = PairPotential::plain_gaussian(1.0, 1, Role::Repulsive)?;
    let mut worst: f64 = 0.0;
    for gamma in [1.0, 0.5, 0.25] {
        for a in [0.0, 1.0] {
            let s = poisson_sum::<f64>(&g, gamma, &[a], &TruncationSpec::default())?;
            worst = worst.max((s.lhs - s.rhs).abs());
        }
    }
    Ok(worst)
}

/// Most negative second difference of `λ ↦ ln Tr e^{−β(H₀+λH₁)}`.
fn convexity_defect(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let random_op = |rng: &mut ChaCha8Rng| -> Result<_> {
            let mut b = OperatorBuilder::new(FockBasis::with_cap(2, 16)?, Conservation::Spin);
            let mut t = nalgebra::DMatrix::<f64>::zeros(2, 2);
            for i in 0..2 {
                for j in i..2 {
                    let v = rng.random_range(-1.0..1.0);
                    t[(i, j)] = v;
                    t[(j, i)] = v;
                }
            }
            b.add_one_body(&t);
            let mut v = nalgebra::DMatrix::<f64>::zeros(2, 2);
            for i in 0..2 {
                for j in i..2 {
                    let w = rng.random_range(-1.0..1.0);
                    v[(i, j)] = w;
                    v[(j, i)] = w;
                }
            }
            b.add_density_density(&v);
            b.add_pair_hopping(&v, rng.random_range(-1.0..1.0));
            b.build()
        };
        let h0 = random_op(rng)?;
        let h1 = random_op(rng)?;
        let beta = rng.random_range(0.2..3.0);
        let step = 0.5;
        let f = |lambda: f64| -> Result<f64> {
            Ok(2.0 * beta * h0.add_scaled(&h1, lambda)?.pressure(beta)?)
        };
        let vals: Vec<f64> = (-2..=2)
            .map(|i| f(step * i as f64))
            .collect::<Result<_>>()?;
        for w in vals.windows(3) {
            worst = worst.max(-(w[0] - 2.0 * w[1] + w[2]));
        }
    }
    Ok(worst)
}

fn game_residual() -> Result<f64> {
    let mf = MeanFieldParams::<f64>::new(2.0, HoppingKernel::laplacian(1), 0.5, 1.5)?;
    let r = solve_game(&mf, &QuadratureSpec::default_for(1), &OptimizerSpec::default())?;
    Ok(r.gap_residual_sharp.max(r.gap_residual_flat))
}

/// Runs every check. Errors inside a check count as failures.
pub fn run_selftest(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name, r: Result<f64>, tol| {
        out.push(Check::new(name, r.unwrap_or(f64::INFINITY), tol));
    };
    push("car_relations", car_defect(), 1e-14);
    push("two_mode_trace", two_mode_defect(&mut rng), 1e-12);
    push("ed_momentum_duality", duality_defect(&mut rng), 1e-10);
    push("poisson_summation", poisson_defect(), 1e-10);
    push("pressure_convexity", convexity_defect(&mut rng), 1e-9);
    push("game_gap_residual", game_residual(), 1e-7);
    out
}
