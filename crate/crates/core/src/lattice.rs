//! Cubic boxes, hopping kernels and the parameter sets of the short-range,
//! mean-field and approximating Hamiltonians.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{KacError, Result};
use crate::potential::{lattice_sum, PairPotential, Role, TruncationSpec};
use crate::scalar::{cnt, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

/// How Kac couplings see the periodic images of a site.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum KacImages {
    /// Only the minimum-image displacement.
    MinimumImage,
    /// Sum over all periodic images.
    #[default]
    Full,
}

/// The box `{-L..L}^d` with lexicographically ordered sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    dim: usize,
    half_width: usize,
    sites: Vec<Vec<i64>>,
    boundary: Boundary,
}

impl LatticeBox {
    pub fn new(dim: usize, half_width: usize, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(KacError::domain("dimension must be positive"));
        }
        let side = 2 * half_width + 1;
        let count = side
            .checked_pow(dim as u32)
            .ok_or_else(|| KacError::domain("box too large"))?;
        let l = half_width as i64;
        let sites = (0..count)
            .map(|flat| {
                let mut rest = flat;
                let mut x = vec![0i64; dim];
                for j in (0..dim).rev() {
                    x[j] = (rest % side) as i64 - l;
                    rest /= side;
                }
                x
            })
            .collect();
        Ok(LatticeBox {
            dim,
            half_width,
            sites,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn wrap(&self, v: i64) -> i64 {
        let n = self.side() as i64;
        let l = self.half_width as i64;
        (v + l).rem_euclid(n) - l
    }

    /// Site index of a point, wrapping under periodic boundary.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let side = self.side() as i64;
        let l = self.half_width as i64;
        let mut idx = 0i64;
        for &v in x {
            let v = match self.boundary {
                Boundary::Open if v.abs() > l => return None,
                Boundary::Open => v,
                Boundary::Periodic => self.wrap(v),
            };
            idx = idx * side + (v + l);
        }
        Some(idx as usize)
    }

    /// `x - y` for open boxes, the minimum-image displacement for periodic ones.
    pub fn displacement(&self, x: usize, y: usize) -> Vec<i64> {
        self.sites[x]
            .iter()
            .zip(&self.sites[y])
            .map(|(a, b)| match self.boundary {
                Boundary::Open => a - b,
                Boundary::Periodic => self.wrap(a - b),
            })
            .collect()
    }
}

/// Finitely supported, reflection-symmetric hopping `h : ℤ^d → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingKernel<T> {
    dim: usize,
    entries: BTreeMap<Vec<i64>, T>,
}

impl<T: Real> HoppingKernel<T> {
    /// Builds a kernel, rejecting input with `h(-z) ≠ h(z)`. Repeated offsets add up.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (Vec<i64>, T)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, T> = BTreeMap::new();
        for (z, v) in entries {
            if z.len() != dim {
                return Err(KacError::config(format!(
                    "hopping offset {z:?} does not have dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(KacError::config("hopping value must be finite"));
            }
            *map.entry(z).or_insert(T::zero()) += v;
        }
        map.retain(|_, v| *v != T::zero());
        for (z, v) in &map {
            let neg: Vec<i64> = z.iter().map(|c| -c).collect();
            if map.get(&neg) != Some(v) {
                return Err(KacError::config(format!(
                    "hopping kernel not reflection-symmetric at offset {z:?}"
                )));
            }
        }
        Ok(HoppingKernel { dim, entries: map })
    }

    /// Discrete Laplacian: `2d` on site, `-1` to nearest neighbours.
    pub fn laplacian(dim: usize) -> Self {
        let mut entries = vec![(vec![0i64; dim], cnt::<T>(2 * dim))];
        for j in 0..dim {
            for s in [-1i64, 1] {
                let mut z = vec![0i64; dim];
                z[j] = s;
                entries.push((z, -T::one()));
            }
        }
        Self::new(dim, entries).expect("laplacian is symmetric")
    }

    /// Constant on-site term `h(0) = μ`.
    pub fn onsite(dim: usize, mu: T) -> Self {
        Self::new(dim, [(vec![0i64; dim], mu)]).expect("on-site kernel is symmetric")
    }

    pub fn zero(dim: usize) -> Self {
        HoppingKernel {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, &T)> {
        self.entries.iter()
    }

    pub fn support_radius(&self) -> usize {
        self.entries
            .keys()
            .flat_map(|z| z.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    /// Returns a kernel with `shift` added to `h(0)`.
    pub fn shifted(&self, shift: T) -> Self {
        let mut entries: Vec<(Vec<i64>, T)> =
            self.entries.iter().map(|(z, v)| (z.clone(), *v)).collect();
        entries.push((vec![0; self.dim], shift));
        Self::new(self.dim, entries).expect("shift keeps symmetry")
    }

    /// `ĥ(k) = Σ_z h(z) cos(k·z)`.
    pub fn dispersion(&self, k: &[T]) -> T {
        self.entries
            .iter()
            .map(|(z, v)| {
                let phase: T = z
                    .iter()
                    .zip(k)
                    .map(|(zj, kj)| lit::<T>(*zj as f64) * *kj)
                    .sum();
                *v * phase.cos()
            })
            .sum()
    }

    /// One-particle matrix `t[x][y]` of `Σ h(x-y) a†_x a_y` on the box; under
    /// periodic boundary all images of an offset contribute.
    pub fn one_body_matrix(&self, lbox: &LatticeBox) -> DMatrix<T> {
        let n = lbox.len();
        let mut t = DMatrix::zeros(n, n);
        for (x, site) in lbox.sites().iter().enumerate() {
            for (z, v) in &self.entries {
                let target: Vec<i64> = site.iter().zip(z).map(|(a, b)| a - b).collect();
                if let Some(y) = lbox.index_of(&target) {
                    t[(x, y)] += *v;
                }
            }
        }
        t
    }
}

/// `V[x][y] = γ^d f(γ·δ(x, y))`; periodic boxes use either the minimum-image
/// displacement or the full image sum.
pub fn kac_coupling_matrix<T: Real>(
    p: &PairPotential<T>,
    gamma: T,
    lbox: &LatticeBox,
    images: KacImages,
) -> Result<DMatrix<T>> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(KacError::domain("gamma must lie in (0, 1)"));
    }
    if p.dim() != lbox.dim() {
        return Err(KacError::domain("potential and box dimensions differ"));
    }
    let n = lbox.len();
    let mut v = DMatrix::zeros(n, n);
    if p.is_zero() {
        return Ok(v);
    }
    let gd = gamma.powi(lbox.dim() as i32);
    let side: T = cnt(lbox.side());
    let full = lbox.boundary() == Boundary::Periodic && images == KacImages::Full;
    let trunc = TruncationSpec::default();
    let mut cache: BTreeMap<Vec<i64>, T> = BTreeMap::new();
    for x in 0..n {
        for y in 0..=x {
            let delta = lbox.displacement(x, y);
            let value = match cache.get(&delta) {
                Some(val) => *val,
                None => {
                    let val = if full {
                        // Σ_w γ^d f(γ(δ + n w)) = n^{-d} Σ_w (γn)^d f(γn(w + δ/n))
                        let shift: Vec<T> =
                            delta.iter().map(|c| lit::<T>(*c as f64) / side).collect();
                        lattice_sum(p, gamma * side, &shift, &trunc)?
                            / side.powi(lbox.dim() as i32)
                    } else {
                        let point: Vec<T> =
                            delta.iter().map(|c| gamma * lit(*c as f64)).collect();
                        gd * p.eval(&point)?
                    };
                    cache.insert(delta, val);
                    val
                }
            };
            v[(x, y)] = value;
            v[(y, x)] = value;
        }
    }
    Ok(v)
}

/// Parameters of the short-range Kac model `T - H₋ + H₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub beta: T,
    pub hopping: HoppingKernel<T>,
    pub f_plus: PairPotential<T>,
    pub f_minus: PairPotential<T>,
    pub gamma_plus: T,
    pub gamma_minus: T,
    pub include_onsite_correction: bool,
    pub kac_images: KacImages,
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.beta > T::zero() && self.beta.is_finite()) {
            errors.push("beta must be positive".to_string());
        }
        for (name, g) in [
            ("gamma_plus", self.gamma_plus),
            ("gamma_minus", self.gamma_minus),
        ] {
            if !(g > T::zero() && g < T::one()) {
                errors.push(format!("{name} must lie in the open interval (0, 1)"));
            }
        }
        if self.f_plus.role() != Role::Repulsive || self.f_minus.role() != Role::Attractive {
            errors.push("f_plus must be repulsive and f_minus attractive".to_string());
        }
        let d = self.hopping.dim();
        if self.f_plus.dim() != d || self.f_minus.dim() != d {
            errors.push("hopping and potentials must share the dimension".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(KacError::Config(errors))
        }
    }

    /// Mean-field couplings `η± = f̂±(0)` reached in the Kac limit.
    pub fn born_couplings(&self) -> Result<MeanFieldParams<T>> {
        Ok(MeanFieldParams {
            beta: self.beta,
            hopping: self.hopping.clone(),
            eta_plus: self.f_plus.born_zero()?,
            eta_minus: self.f_minus.born_zero()?,
        })
    }
}

/// Parameters of the mean-field model and its approximating Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldParams<T> {
    pub beta: T,
    pub hopping: HoppingKernel<T>,
    pub eta_plus: T,
    pub eta_minus: T,
}

impl<T: Real> MeanFieldParams<T> {
    pub fn new(beta: T, hopping: HoppingKernel<T>, eta_plus: T, eta_minus: T) -> Result<Self> {
        let mf = MeanFieldParams {
            beta,
            hopping,
            eta_plus,
            eta_minus,
        };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.beta > T::zero() && self.beta.is_finite()) {
            errors.push("beta must be positive".to_string());
        }
        if !(self.eta_plus >= T::zero() && self.eta_plus.is_finite()) {
            errors.push("eta_plus must be nonnegative".to_string());
        }
        if !(self.eta_minus >= T::zero() && self.eta_minus.is_finite()) {
            errors.push("eta_minus must be nonnegative".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(KacError::Config(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn box_sites_are_lexicographic() {
        let b = LatticeBox::new(2, 1, Boundary::Open).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.sites()[0], vec![-1, -1]);
        assert_eq!(b.sites()[1], vec![-1, 0]);
        assert_eq!(b.sites()[8], vec![1, 1]);
        let mut sorted = b.sites().to_vec();
        sorted.sort();
        assert_eq!(sorted, b.sites());
        assert_eq!(LatticeBox::new(3, 2, Boundary::Periodic).unwrap().len(), 125);
    }

    #[test]
    fn laplacian_dispersion() {
        let h = HoppingKernel::<f64>::laplacian(1);
        assert!(h.dispersion(&[0.0]).abs() < 1e-15);
        assert!((h.dispersion(&[PI]) - 4.0).abs() < 1e-15);
        assert_eq!(h.support_radius(), 1);
        let mu = HoppingKernel::onsite(2, 0.7);
        assert_eq!(mu.dispersion(&[0.3, -2.0]), 0.7);
    }

    #[test]
    fn asymmetric_kernel_rejected() {
        let err = HoppingKernel::new(1, [(vec![1], -1.0), (vec![-1], -0.5)]).unwrap_err();
        assert!(err
            .to_string()
            .contains("hopping kernel not reflection-symmetric"));
    }

    #[test]
    fn periodic_hopping_sums_images() {
        let h = HoppingKernel::<f64>::laplacian(1);
        let single = LatticeBox::new(1, 0, Boundary::Periodic).unwrap();
        assert_eq!(h.one_body_matrix(&single)[(0, 0)], 0.0);
        let ring = LatticeBox::new(1, 1, Boundary::Periodic).unwrap();
        let t = h.one_body_matrix(&ring);
        assert_eq!(t[(0, 2)], -1.0);
        assert_eq!(t[(0, 0)], 2.0);
        let open = LatticeBox::new(1, 1, Boundary::Open).unwrap();
        assert_eq!(h.one_body_matrix(&open)[(0, 2)], 0.0);
    }

    #[test]
    fn kac_matrix_examples() {
        let g = PairPotential::plain_gaussian(1.0, 1, Role::Repulsive).unwrap();
        let b = LatticeBox::new(1, 1, Boundary::Open).unwrap();
        let v = kac_coupling_matrix(&g, 0.5, &b, KacImages::Full).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let d = x as f64 - y as f64;
                assert!((v[(x, y)] - 0.5 * (-0.25 * d * d).exp()).abs() < 1e-15);
            }
        }
        let single = LatticeBox::new(1, 0, Boundary::Open).unwrap();
        let v = kac_coupling_matrix(&g, 0.3, &single, KacImages::Full).unwrap();
        assert_eq!(v[(0, 0)], 0.3);
        let z = PairPotential::zero(1, Role::Repulsive);
        assert!(kac_coupling_matrix(&z, 0.3, &b, KacImages::Full)
            .unwrap()
            .iter()
            .all(|x| *x == 0.0));
        assert!(kac_coupling_matrix(&g, 1.0, &b, KacImages::Full).is_err());
    }

    #[test]
    fn periodic_image_sum_is_circulant_and_approaches_mean_field() {
        let g = PairPotential::<f64>::plain_gaussian(1.0, 1, Role::Repulsive).unwrap();
        let ring = LatticeBox::new(1, 2, Boundary::Periodic).unwrap();
        let v = kac_coupling_matrix(&g, 0.02, &ring, KacImages::Full).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                assert!((v[(x, y)] - v[((x + 1) % 5, (y + 1) % 5)]).abs() < 1e-14);
                assert!((v[(x, y)] - PI.sqrt() / 5.0).abs() < 1e-12);
            }
        }
        let mi = kac_coupling_matrix(&g, 0.02, &ring, KacImages::MinimumImage).unwrap();
        assert!((mi[(0, 1)] - 0.02 * (-0.0004f64).exp()).abs() < 1e-15);
    }
}
