use num_complex::Complex;

use kaclab::fock::build_kac_hamiltonian;
use kaclab::lattice::{Boundary, KacImages, LatticeBox};
use kaclab::potential::Role;
use kaclab::quasifree::{quasifree_pressure, QuadratureSpec};
use kaclab::{HoppingKernel32, MeanFieldParams32, ModelParams32, MeanFieldParams64, PairPotential32};

#[test]
fn quasifree_pressure_in_f32_tracks_f64() {
    let quad = QuadratureSpec::default_for(1).without_check();
    let mf32 = MeanFieldParams32::new(2.0, HoppingKernel32::laplacian(1), 0.5, 1.5).unwrap();
    let mf64 = MeanFieldParams64::new(2.0, kaclab::HoppingKernel64::laplacian(1), 0.5, 1.5).unwrap();
    let p32 = quasifree_pressure(&mf32, Complex::new(0.4f32, 0.0), Complex::new(0.3, 0.0), &quad).unwrap();
    let p64 = quasifree_pressure(&mf64, Complex::new(0.4f64, 0.0), Complex::new(0.3, 0.0), &quad).unwrap();
    assert!((p32 as f64 - p64).abs() < 1e-5);
}

#[test]
fn kac_pressure_in_f32() {
    let mp = ModelParams32 {
        beta: 1.0,
        hopping: HoppingKernel32::laplacian(1),
        f_plus: PairPotential32::plain_gaussian(1.0, 1, Role::Repulsive).unwrap(),
        f_minus: PairPotential32::plain_gaussian(1.0, 1, Role::Attractive).unwrap(),
        gamma_plus: 0.5,
        gamma_minus: 0.5,
        include_onsite_correction: false,
        kac_images: KacImages::Full,
    };
    let lbox = LatticeBox::new(1, 1, Boundary::Periodic).unwrap();
    let p = build_kac_hamiltonian(&mp, &lbox).unwrap().pressure(1.0).unwrap();
    assert!(p.is_finite());
}
