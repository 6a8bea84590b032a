use serde::Serialize;

use super::{Family, PairPotential};
use crate::error::Result;
use crate::scalar::{cnt, lit, Real};

/// Scaling factors probed by the scaling-monotonicity test.
pub const SCALING_FACTORS: [f64; 3] = [0.5, 0.25, 0.1];

/// Tensor grid `[-radius, radius]^d` with `points` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub radius: T,
    pub points: usize,
    pub tol_pd: T,
    pub tol_sm: T,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec {
            radius: lit(20.0),
            points: 101,
            tol_pd: lit(1e-9),
            tol_sm: lit(1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport<T> {
    pub positive_definite: bool,
    pub scaling_monotone: bool,
    pub min_fourier_value: T,
    pub monotonicity_violation: T,
    pub grid_radius: T,
    pub grid_points: usize,
    /// Tabulated potentials are sampled, never certified.
    pub certified: bool,
}

/// Samples `f̂` on the grid and tests positivity and `f̂(k/γ) ≤ f̂(k)`.
pub fn cone_check<T: Real>(p: &PairPotential<T>, grid: &GridSpec<T>) -> Result<ConeReport<T>> {
    assert!(grid.points >= 2 && grid.radius > T::zero(), "grid must be non-degenerate");
    let d = p.dim();
    let step = lit::<T>(2.0) * grid.radius / cnt(grid.points - 1);
    let axis: Vec<T> = (0..grid.points)
        .map(|i| -grid.radius + step * cnt(i))
        .collect();
    let total = grid.points.pow(d as u32);
    let mut k = vec![T::zero(); d];
    let mut scaled = vec![T::zero(); d];
    let mut min_value = T::infinity();
    let mut violation = T::zero();
    for flat in 0..total {
        let mut rest = flat;
        for kj in k.iter_mut() {
            *kj = axis[rest % grid.points];
            rest /= grid.points;
        }
        let base = p.fourier(&k)?;
        min_value = min_value.min(base);
        for gamma in SCALING_FACTORS {
            let inv = T::one() / lit::<T>(gamma);
            for (s, kj) in scaled.iter_mut().zip(&k) {
                *s = *kj * inv;
            }
            let v = p.fourier(&scaled)?;
            violation = violation.max(v - base);
        }
    }
    Ok(ConeReport {
        positive_definite: min_value >= -grid.tol_pd,
        scaling_monotone: violation <= grid.tol_sm,
        min_fourier_value: min_value,
        monotonicity_violation: violation.max(T::zero()),
        grid_radius: grid.radius,
        grid_points: grid.points,
        certified: !matches!(p.family(), Family::TableSpline(_)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Role;

    #[test]
    fn yukawa_is_in_the_scaling_monotone_cone() {
        let y = PairPotential::yukawa(1.0, 1.0, 1.0, 1, Role::Attractive).unwrap();
        let r = cone_check(&y, &GridSpec::default()).unwrap();
        assert!(r.positive_definite && r.scaling_monotone && r.certified);
        assert!(r.min_fourier_value >= 0.0);
    }

    #[test]
    fn zero_potential_passes_trivially() {
        let z = PairPotential::<f64>::zero(1, Role::Repulsive);
        let r = cone_check(&z, &GridSpec::default()).unwrap();
        assert!(r.positive_definite && r.scaling_monotone);
        assert_eq!(r.min_fourier_value, 0.0);
        assert_eq!(r.monotonicity_violation, 0.0);
    }

    #[test]
    fn modulated_gaussian_has_negative_lobe() {
        // f(x) = exp(-x²) (cos 3x - 1/2): f̂(0) = √π (e^{-9/4} - 1/2) < 0
        let radii: Vec<f64> = (0..=700).map(|i| i as f64 * 0.01).collect();
        let vals: Vec<f64> = radii
            .iter()
            .map(|r| (-r * r).exp() * ((3.0 * r).cos() - 0.5))
            .collect();
        let t = PairPotential::table(radii, vals, 1, Role::Repulsive).unwrap();
        let grid = GridSpec {
            points: 41,
            ..GridSpec::default()
        };
        let r = cone_check(&t, &grid).unwrap();
        assert!(!r.positive_definite);
        assert!(r.min_fourier_value < 0.0);
        assert!(!r.certified);
    }

    #[test]
    fn two_dimensional_gaussian() {
        let g = PairPotential::plain_gaussian(1.0, 2, Role::Repulsive).unwrap();
        let grid = GridSpec {
            points: 21,
            ..GridSpec::default()
        };
        let r = cone_check(&g, &grid).unwrap();
        assert!(r.positive_definite && r.scaling_monotone);
    }
}
