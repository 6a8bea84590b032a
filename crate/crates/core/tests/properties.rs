use num_complex::Complex;
use proptest::prelude::*;

use kaclab::fock::{build_approximating_hamiltonian, build_kac_hamiltonian, build_meanfield_hamiltonian, Conservation, FockBasis};
use kaclab::lattice::{kac_coupling_matrix, Boundary, HoppingKernel, KacImages, LatticeBox, MeanFieldParams, ModelParams};
use kaclab::potential::{lattice_sum, PairPotential, Role, TruncationSpec};
use kaclab::quasifree::{per_k_moments, quasifree_pressure, BdGBlock, QuadratureSpec};

fn gaussian(width: f64, d: usize, role: Role) -> PairPotential<f64> {
    PairPotential::plain_gaussian(width, d, role).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn couplings_are_translation_covariant(gamma in 0.05f64..0.95, width in 0.3f64..3.0, l in 1usize..4, shift in 1i64..7) {
        let lbox = LatticeBox::new(1, l, Boundary::Periodic).unwrap();
        let v = kac_coupling_matrix(&gaussian(width, 1, Role::Repulsive), gamma, &lbox, KacImages::Full).unwrap();
        let n = lbox.len();
        let moved = |x: usize| {
            let mut p = lbox.sites()[x].clone();
            p[0] += shift;
            // wrap back into {-l..l}
            let side = n as i64;
            p[0] = (p[0] + l as i64).rem_euclid(side) - l as i64;
            lbox.index_of(&p).unwrap()
        };
        for x in 0..n {
            for y in 0..n {
                prop_assert!((v[(x, y)] - v[(moved(x), moved(y))]).abs() < 1e-14);
                prop_assert!((v[(x, y)] - v[(y, x)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pressure_is_gauge_invariant(theta in 0.0f64..6.3, re in 0.0f64..1.5, cp in 0.0f64..1.5, beta in 0.2f64..6.0, em in 0.0f64..2.0, ep in 0.0f64..2.0) {
        let mf = MeanFieldParams::new(beta, HoppingKernel::laplacian(1), ep, em).unwrap();
        let quad = QuadratureSpec::default_for(1);
        let a = quasifree_pressure(&mf, Complex::new(re, 0.0), Complex::new(cp, 0.0), &quad).unwrap();
        let b = quasifree_pressure(&mf, Complex::from_polar(re, theta), Complex::new(cp, 0.0), &quad).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let lbox = LatticeBox::new(1, 1, Boundary::Periodic).unwrap();
        let ea = build_approximating_hamiltonian(&mf, Complex::new(re, 0.0), Complex::new(cp, 0.0), &lbox).unwrap().pressure(beta).unwrap();
        let eb = build_approximating_hamiltonian(&mf, Complex::from_polar(re, theta), Complex::new(cp, 0.0), &lbox).unwrap().pressure(beta).unwrap();
        prop_assert!((ea - eb).abs() < 1e-12);
    }

    #[test]
    fn pair_amplitude_grows_with_the_gap(eps in -3.0f64..3.0, g in 0.0f64..3.0, dg in 1e-3f64..1.0, beta in 0.1f64..20.0) {
        let amp = |x: f64| per_k_moments(&BdGBlock::new(vec![0.0], eps, Complex::new(x, 0.0)), beta).2.norm();
        prop_assert!(amp(g + dg) >= amp(g) - 1e-15);
    }

    #[test]
    fn pressure_is_convex_in_the_fields(c0 in 0.0f64..1.5, h in 0.01f64..0.3, beta in 0.2f64..6.0, em in 0.1f64..2.0, ep in 0.1f64..2.0) {
        let mf = MeanFieldParams::new(beta, HoppingKernel::laplacian(1), ep, em).unwrap();
        let quad = QuadratureSpec::default_for(1);
        let p = |a: f64, b: f64| quasifree_pressure(&mf, Complex::new(a, 0.0), Complex::new(b, 0.0), &quad).unwrap();
        prop_assert!(p(c0 - h, 0.5) - 2.0 * p(c0, 0.5) + p(c0 + h, 0.5) >= -1e-12);
        prop_assert!(p(0.5, c0 - h) - 2.0 * p(0.5, c0) + p(0.5, c0 + h) >= -1e-12);
    }

    #[test]
    fn sectors_partition_the_basis(sites in 1usize..5) {
        let basis = FockBasis::with_cap(sites, 1 << 10).unwrap();
        for c in [Conservation::NumberAndSpin, Conservation::Spin] {
            let mut all: Vec<u64> = basis.sectors(c).into_iter().flat_map(|(_, s)| s).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..basis.dimension() as u64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn kac_matches_mean_field_on_one_site(gp in 0.05f64..0.95, gm in 0.05f64..0.95, wp in 0.3f64..3.0, wm in 0.3f64..3.0, beta in 0.2f64..5.0, mu in -2.0f64..2.0) {
        let site = LatticeBox::new(1, 0, Boundary::Periodic).unwrap();
        let f_plus = gaussian(wp, 1, Role::Repulsive);
        let f_minus = gaussian(wm, 1, Role::Attractive);
        let mp = ModelParams {
            beta,
            hopping: HoppingKernel::onsite(1, mu),
            f_plus: f_plus.clone(),
            f_minus: f_minus.clone(),
            gamma_plus: gp,
            gamma_minus: gm,
            include_onsite_correction: false,
            kac_images: KacImages::Full,
        };
        // on one periodic site every image collapses onto the same coupling
        let trunc = TruncationSpec::default();
        let eta_plus = lattice_sum(&f_plus, gp, &[0.0], &trunc).unwrap();
        let eta_minus = lattice_sum(&f_minus, gm, &[0.0], &trunc).unwrap();
        let mf = MeanFieldParams::new(beta, HoppingKernel::onsite(1, mu), eta_plus, eta_minus).unwrap();
        let a = build_kac_hamiltonian(&mp, &site).unwrap().pressure(beta).unwrap();
        let b = build_meanfield_hamiltonian(&mf, &site).unwrap().pressure(beta).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }
}
