//! Pair potentials `f : ℝ^d → ℝ` used as Kac interactions, with their Fourier
//! transforms, cone diagnostics and the lattice series identities they obey.

mod cone;
pub mod radial;
mod series;
mod spline;

pub use cone::{cone_check, ConeReport, GridSpec, SCALING_FACTORS};
pub use series::{
    fourier_lattice_tail, lattice_abs_sum, lattice_sum, poisson_sum, series_tail_bound,
    PoissonSides, TruncationSpec,
};
pub use spline::RadialSpline;

use crate::error::{KacError, Result};
use crate::scalar::{lit, Real};

/// Which side of the model a potential plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Density–density repulsion `f₊`.
    Repulsive,
    /// Cooper-pair hopping `f₋`.
    Attractive,
}

/// One product-Gaussian term `w · ∏_j exp(-s_j x_j²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm<T> {
    pub weight: T,
    pub scales: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// Defined through `f̂(k) = c0 · exp(-c2 |k|²) / (|k|² + c1)`.
    Yukawa { c0: T, c1: T, c2: T },
    GaussianMixture(Vec<GaussianTerm<T>>),
    /// `f(x) = exp(-|x|² / width²)`.
    PlainGaussian { width: T },
    /// Radial cubic spline, zero beyond the last sample.
    TableSpline(RadialSpline<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential<T> {
    family: Family<T>,
    dim: usize,
    role: Role,
}

/// Radially decreasing majorant `g(|x|) ≥ |f(x)|`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Majorant<T> {
    Zero,
    /// `Σ a_i exp(-b_i r²)`
    Gaussians(Vec<(T, T)>),
    /// `a exp(-b r)`
    Exponential(T, T),
    /// The potential itself along the first axis (positive and radially decreasing).
    SelfRadial,
    /// Suffix maxima of `|f|` over a fine radial grid.
    Table { radii: Vec<T>, suffix_max: Vec<T> },
}

impl<T: Real> PairPotential<T> {
    pub fn new(family: Family<T>, dim: usize, role: Role) -> Result<Self> {
        if dim == 0 {
            return Err(KacError::domain("dimension must be positive"));
        }
        let positive = |v: T, name: &str| -> Result<()> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(KacError::domain(format!("{name} must be finite and positive")))
            }
        };
        match &family {
            Family::Yukawa { c0, c1, c2 } => {
                positive(*c0, "yukawa c0")?;
                positive(*c1, "yukawa c1")?;
                if !(c2.is_finite() && *c2 >= T::zero()) {
                    return Err(KacError::domain("yukawa c2 must be finite and nonnegative"));
                }
            }
            Family::GaussianMixture(terms) => {
                for t in terms {
                    positive(t.weight, "mixture weight")?;
                    if t.scales.len() != dim {
                        return Err(KacError::domain(format!(
                            "mixture term has {} scales for dimension {dim}",
                            t.scales.len()
                        )));
                    }
                    for s in &t.scales {
                        positive(*s, "mixture scale")?;
                    }
                }
            }
            Family::PlainGaussian { width } => positive(*width, "gaussian width")?,
            Family::TableSpline(_) => {
                if dim > 3 {
                    return Err(KacError::Unsupported(
                        "tabulated potentials support d <= 3".into(),
                    ));
                }
            }
        }
        Ok(PairPotential { family, dim, role })
    }

    /// The identically vanishing potential.
    pub fn zero(dim: usize, role: Role) -> Self {
        PairPotential {
            family: Family::GaussianMixture(Vec::new()),
            dim,
            role,
        }
    }

    pub fn plain_gaussian(width: T, dim: usize, role: Role) -> Result<Self> {
        Self::new(Family::PlainGaussian { width }, dim, role)
    }

    pub fn yukawa(c0: T, c1: T, c2: T, dim: usize, role: Role) -> Result<Self> {
        Self::new(Family::Yukawa { c0, c1, c2 }, dim, role)
    }

    pub fn table(radii: Vec<T>, values: Vec<T>, dim: usize, role: Role) -> Result<Self> {
        Self::new(Family::TableSpline(RadialSpline::new(radii, values)?), dim, role)
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.family, Family::GaussianMixture(t) if t.is_empty())
    }

    /// Whether the potential depends on `x` only through `|x|`.
    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::GaussianMixture(terms) => terms
                .iter()
                .all(|t| t.scales.iter().all(|s| *s == t.scales[0])),
            _ => true,
        }
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(KacError::domain(format!(
                "point has {} coordinates, potential has dimension {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(KacError::domain("non-finite point"));
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        let r2: T = x.iter().map(|v| *v * *v).sum();
        match &self.family {
            Family::PlainGaussian { width } => Ok((-r2 / (*width * *width)).exp()),
            Family::GaussianMixture(terms) => Ok(terms
                .iter()
                .map(|t| {
                    let e: T = t.scales.iter().zip(x).map(|(s, v)| *s * *v * *v).sum();
                    t.weight * (-e).exp()
                })
                .sum()),
            Family::TableSpline(s) => Ok(s.eval(r2.sqrt())),
            Family::Yukawa { c0, c1, c2 } => yukawa_real_space(*c0, *c1, *c2, self.dim, r2.sqrt()),
        }
    }

    /// Evaluates at `r e₁`.
    pub fn eval_radial(&self, r: T) -> Result<T> {
        let mut x = vec![T::zero(); self.dim];
        x[0] = r;
        self.eval(&x)
    }

    /// `f̂(k) = ∫ f(x) e^{-ik·x} dx`.
    pub fn fourier(&self, k: &[T]) -> Result<T> {
        self.check_point(k)?;
        let k2: T = k.iter().map(|v| *v * *v).sum();
        let d = self.dim as i32;
        match &self.family {
            Family::PlainGaussian { width } => {
                let w2 = *width * *width;
                Ok((T::PI() * w2).powf(lit::<T>(0.5) * lit(d as f64)) * (-w2 * k2 / lit(4.0)).exp())
            }
            Family::GaussianMixture(terms) => Ok(terms
                .iter()
                .map(|t| {
                    t.scales
                        .iter()
                        .zip(k)
                        .fold(t.weight, |acc, (s, kj)| {
                            acc * (T::PI() / *s).sqrt() * (-*kj * *kj / (lit::<T>(4.0) * *s)).exp()
                        })
                })
                .sum()),
            Family::Yukawa { c0, c1, c2 } => Ok(*c0 * (-*c2 * k2).exp() / (k2 + *c1)),
            Family::TableSpline(s) => {
                radial::forward_radial(|r| s.eval(r), self.dim, k2.sqrt(), s.radii())
            }
        }
    }

    /// `f̂` along the first axis.
    pub fn fourier_radial(&self, k: T) -> Result<T> {
        let mut v = vec![T::zero(); self.dim];
        v[0] = k;
        self.fourier(&v)
    }

    /// `f̂(0) = ∫ f`, the first Born approximation and the mean-field coupling.
    pub fn born_zero(&self) -> Result<T> {
        self.fourier(&vec![T::zero(); self.dim])
    }

    pub(crate) fn majorant(&self) -> Result<Majorant<T>> {
        Ok(match &self.family {
            Family::GaussianMixture(terms) if terms.is_empty() => Majorant::Zero,
            Family::PlainGaussian { width } => {
                Majorant::Gaussians(vec![(T::one(), T::one() / (*width * *width))])
            }
            Family::GaussianMixture(terms) => Majorant::Gaussians(
                terms
                    .iter()
                    .map(|t| {
                        let smin = t.scales.iter().copied().fold(T::infinity(), T::min);
                        (t.weight, smin)
                    })
                    .collect(),
            ),
            Family::Yukawa { c0, c1, c2 } => {
                if self.dim == 1 && *c2 == T::zero() {
                    let a = c1.sqrt();
                    Majorant::Exponential(*c0 / (lit::<T>(2.0) * a), a)
                } else {
                    // Gaussian-smeared Yukawa kernels are positive and radially decreasing
                    yukawa_real_space(*c0, *c1, *c2, self.dim, T::zero())?;
                    Majorant::SelfRadial
                }
            }
            Family::TableSpline(s) => {
                let sub = 8usize;
                let mut radii = Vec::new();
                for w in s.radii().windows(2) {
                    for j in 0..sub {
                        radii.push(w[0] + (w[1] - w[0]) * lit(j as f64 / sub as f64));
                    }
                }
                radii.push(s.radius());
                let mut suffix_max: Vec<T> = radii.iter().map(|r| s.eval(*r).abs()).collect();
                for i in (0..suffix_max.len() - 1).rev() {
                    suffix_max[i] = suffix_max[i].max(suffix_max[i + 1]);
                }
                Majorant::Table { radii, suffix_max }
            }
        })
    }

    pub(crate) fn majorant_at(&self, m: &Majorant<T>, r: T) -> Result<T> {
        let r = r.max(T::zero());
        Ok(match m {
            Majorant::Zero => T::zero(),
            Majorant::Gaussians(terms) => terms.iter().map(|(a, b)| *a * (-*b * r * r).exp()).sum(),
            Majorant::Exponential(a, b) => *a * (-*b * r).exp(),
            Majorant::SelfRadial => self.eval_radial(r)?.abs(),
            Majorant::Table { radii, suffix_max } => {
                if r > *radii.last().expect("non-empty") {
                    T::zero()
                } else {
                    let i = radii.partition_point(|x| *x <= r).saturating_sub(1);
                    suffix_max[i]
                }
            }
        })
    }

    /// Radially decreasing majorant of `|f̂|`, when one is known in closed form.
    pub(crate) fn fourier_majorant(&self, k: T) -> Result<T> {
        let k = k.abs();
        match &self.family {
            Family::GaussianMixture(terms) => Ok(terms
                .iter()
                .map(|t| {
                    let smax = t.scales.iter().copied().fold(T::zero(), T::max);
                    let amp = t
                        .scales
                        .iter()
                        .fold(t.weight, |acc, s| acc * (T::PI() / *s).sqrt());
                    amp * (-k * k / (lit::<T>(4.0) * smax)).exp()
                })
                .sum()),
            Family::PlainGaussian { .. } | Family::Yukawa { .. } => self.fourier_radial(k),
            Family::TableSpline(_) => Err(KacError::Unsupported(
                "no certified Fourier majorant for tabulated potentials".into(),
            )),
        }
    }
}

/// Real-space Yukawa kernel: closed form in `d = 1`, numerical radial inverse
/// transform otherwise.
fn yukawa_real_space<T: Real>(c0: T, c1: T, c2: T, dim: usize, r: T) -> Result<T> {
    let a = c1.sqrt();
    if dim == 1 {
        if c2 == T::zero() {
            return Ok(c0 * (-a * r).exp() / (lit::<T>(2.0) * a));
        }
        // convolution of exp(-a|x|)/(2a) with a centred normal of variance 2 c2
        let sigma = (lit::<T>(2.0) * c2).sqrt();
        let root2 = lit::<T>(2.0).sqrt();
        let side = |x: T| -> T {
            let u = (a * sigma * sigma + x) / (sigma * root2);
            if u >= T::zero() {
                (-x * x / (lit::<T>(2.0) * sigma * sigma)).exp() * erfcx(u)
            } else {
                (a * a * sigma * sigma / lit(2.0) + a * x).exp() * u.erfc()
            }
        };
        let value = lit::<T>(0.5) * (side(r) + side(-r));
        return Ok(c0 * value / (lit::<T>(2.0) * a));
    }
    if c2 == T::zero() {
        return Err(KacError::Unsupported(format!(
            "Yukawa potential with c2 = 0 is unbounded at the origin in d = {dim}"
        )));
    }
    // exp(-c2 k²) < 1e-20 beyond k_max
    let k_max = (lit::<T>(46.0) / c2).sqrt();
    radial::inverse_radial(|k| c0 * (-c2 * k * k).exp() / (k * k + c1), dim, r, k_max)
}

/// Scaled complementary error function `e^{u²} erfc(u)` for `u ≥ 0`.
fn erfcx<T: Real>(u: T) -> T {
    if u < lit(25.0) {
        (u * u).exp() * u.erfc()
    } else {
        let inv = T::one() / (u * u);
        let series = T::one() - inv * lit(0.5) + inv * inv * lit(0.75) - inv * inv * inv * lit(1.875)
            + inv * inv * inv * inv * lit(6.5625);
        series / (u * T::PI().sqrt())
    }
}
