//! Thermodynamic-limit pressure of the quadratic approximating Hamiltonian,
//! computed momentum by momentum from the two-mode blocks `(k↑, −k↓)`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{KacError, Result};
use crate::lattice::MeanFieldParams;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cnt, lit, Real};

/// One Bogoliubov block.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGBlock<T> {
    pub k: Vec<T>,
    pub epsilon_tilde: T,
    pub gap: Complex<T>,
    pub energy: T,
}

impl<T: Real> BdGBlock<T> {
    pub fn new(k: Vec<T>, epsilon_tilde: T, gap: Complex<T>) -> Self {
        let energy = epsilon_tilde.hypot(gap.norm());
        BdGBlock {
            k,
            epsilon_tilde,
            gap,
            energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadScheme {
    MidpointTensor,
    GaussLegendreTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadScheme,
    pub points_per_axis: usize,
    /// Recompute at doubled resolution and fail when the two disagree.
    pub refinement_check: bool,
    pub tolerance: f64,
}

impl QuadratureSpec {
    /// 64 points per axis in d = 1 and 48 otherwise. The integrand is periodic
    /// and analytic, so the midpoint rule converges geometrically; Gauss–Legendre
    /// ignores the periodicity and needs several times more nodes at low temperature.
    pub fn default_for(d: usize) -> Self {
        QuadratureSpec {
            scheme: QuadScheme::MidpointTensor,
            points_per_axis: if d <= 1 { 64 } else { 48 },
            refinement_check: true,
            tolerance: 1e-10,
        }
    }

    pub fn without_check(mut self) -> Self {
        self.refinement_check = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 2 {
            return Err(KacError::config("quadrature needs at least 2 points per axis"));
        }
        if !(self.tolerance > 0.0) {
            return Err(KacError::config("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// `ln Tr e^{-βH_k}` for `H_k = ε̃(n₁+n₂) − (ḡ a†₁a†₂ + g a₂a₁)`, i.e.
/// `−βε̃ + 2 ln(2 cosh(βE/2))`.
pub fn per_k_log_trace<T: Real>(block: &BdGBlock<T>, beta: T) -> T {
    let y = beta * block.energy * lit(0.5);
    -beta * block.epsilon_tilde + lit::<T>(2.0) * ln_two_cosh(y)
}

fn ln_two_cosh<T: Real>(y: T) -> T {
    let a = y.abs();
    a + (-lit::<T>(2.0) * a).exp().ln_1p()
}

/// `tanh(βE/2)/E`, continued to `β/2` at `E = 0`.
fn tanh_ratio<T: Real>(beta: T, e: T) -> T {
    let half_beta = beta * lit(0.5);
    let y = half_beta * e;
    if y < lit(1e-3) {
        let y2 = y * y;
        half_beta * (T::one() - y2 / lit(3.0) + y2 * y2 * lit(2.0 / 15.0))
    } else {
        y.tanh() / e
    }
}

/// Per-momentum Gibbs data of one block: `(ln trace, ⟨n₁+n₂⟩, ⟨a₂a₁⟩)`.
pub fn per_k_moments<T: Real>(block: &BdGBlock<T>, beta: T) -> (T, T, Complex<T>) {
    let t = tanh_ratio(beta, block.energy);
    let density = T::one() - block.epsilon_tilde * t;
    let pair = block.gap.conj() * (t * lit(0.5));
    (per_k_log_trace(block, beta), density, pair)
}

/// Pressure, density and pair amplitude per site of the approximating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasifreeMoments<T> {
    pub pressure: T,
    pub density: T,
    pub pair_amplitude: Complex<T>,
}

/// Nodes and weights on `[−π, π)^d`, normalized to total weight one.
#[derive(Debug, Clone)]
pub struct BzRule<T> {
    dim: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> BzRule<T> {
    pub fn new(scheme: QuadScheme, points: usize, dim: usize) -> Self {
        let pi = T::PI();
        let (nodes, weights) = match scheme {
            QuadScheme::MidpointTensor => {
                let h = lit::<T>(2.0) * pi / cnt(points);
                let w = T::one() / cnt(points);
                (
                    (0..points)
                        .map(|j| -pi + h * (cnt::<T>(j) + lit(0.5)))
                        .collect(),
                    vec![w; points],
                )
            }
            QuadScheme::GaussLegendreTensor => {
                let gl = GaussLegendre::<T>::new(points);
                (
                    gl.nodes.iter().map(|x| *x * pi).collect(),
                    gl.weights.iter().map(|w| *w * lit(0.5)).collect(),
                )
            }
        };
        BzRule {
            dim,
            nodes,
            weights,
        }
    }

    /// The momentum grid `2π/(2L+1)·{−L..L}^d` with equal weights.
    pub fn finite_grid(half_width: usize, dim: usize) -> Self {
        let side = 2 * half_width + 1;
        let step = lit::<T>(2.0) * T::PI() / cnt(side);
        let l = half_width as i64;
        BzRule {
            dim,
            nodes: (-l..=l).map(|j| step * lit(j as f64)).collect(),
            weights: vec![T::one() / cnt(side); side],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weighted average of `f` over the tensor grid, summed in a fixed order.
    pub fn average<F, const N: usize>(&self, f: F) -> [T; N]
    where
        F: Fn(&[T]) -> [T; N] + Sync,
    {
        let n = self.nodes.len();
        let total = self.len();
        let eval = |flat: usize| {
            let mut k = vec![T::zero(); self.dim];
            let mut w = T::one();
            let mut rest = flat;
            for j in (0..self.dim).rev() {
                let i = rest % n;
                rest /= n;
                k[j] = self.nodes[i];
                w *= self.weights[i];
            }
            let v = f(&k);
            let mut out = [T::zero(); N];
            for (o, x) in out.iter_mut().zip(v) {
                *o = w * x;
            }
            out
        };
        let values: Vec<[T; N]> = if total > 4096 {
            (0..total).into_par_iter().map(eval).collect()
        } else {
            (0..total).map(eval).collect()
        };
        let mut acc = [T::zero(); N];
        for v in values {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        acc
    }

    /// Momentum average of the approximating model's per-k data.
    pub fn moments(
        &self,
        mf: &MeanFieldParams<T>,
        c_minus: Complex<T>,
        c_plus: Complex<T>,
    ) -> QuasifreeMoments<T> {
        let shift = lit::<T>(2.0) * mf.eta_plus.sqrt() * c_plus.re;
        let gap = c_minus * mf.eta_minus.sqrt();
        let beta = mf.beta;
        let [lt, n, pr, pi] = self.average(|k| {
            let block = BdGBlock::new(k.to_vec(), mf.hopping.dispersion(k) + shift, gap);
            let (lt, n, p) = per_k_moments(&block, beta);
            [lt, n, p.re, p.im]
        });
        QuasifreeMoments {
            pressure: lt / beta,
            density: n,
            pair_amplitude: Complex::new(pr, pi),
        }
    }

    /// Momentum average of `ln Tr e^{−βH_k}` divided by `β`.
    pub fn pressure(&self, mf: &MeanFieldParams<T>, c_minus: Complex<T>, c_plus: Complex<T>) -> T {
        let shift = lit::<T>(2.0) * mf.eta_plus.sqrt() * c_plus.re;
        let gap = c_minus * mf.eta_minus.sqrt();
        let beta = mf.beta;
        let [lt] = self.average(|k| {
            let eps = mf.hopping.dispersion(k) + shift;
            let e = eps.hypot(gap.norm());
            [-beta * eps + lit::<T>(2.0) * ln_two_cosh(beta * e * lit(0.5))]
        });
        lt / beta
    }
}

/// Prepared quadrature plus its optional refinement.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    spec: QuadratureSpec,
    rule: BzRule<T>,
    refined: Option<BzRule<T>>,
}

impl<T: Real> Quadrature<T> {
    pub fn new(spec: QuadratureSpec, dim: usize) -> Result<Self> {
        spec.validate()?;
        Ok(Quadrature {
            spec,
            rule: BzRule::new(spec.scheme, spec.points_per_axis, dim),
            refined: spec
                .refinement_check
                .then(|| BzRule::new(spec.scheme, 2 * spec.points_per_axis, dim)),
        })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Pressure on the configured rule, without the refinement check.
    pub fn pressure_unchecked(
        &self,
        mf: &MeanFieldParams<T>,
        c_minus: Complex<T>,
        c_plus: Complex<T>,
    ) -> T {
        self.rule.pressure(mf, c_minus, c_plus)
    }

    /// Pressure on the configured rule; with the refinement check enabled the
    /// doubled rule must agree within the tolerance.
    pub fn pressure(
        &self,
        mf: &MeanFieldParams<T>,
        c_minus: Complex<T>,
        c_plus: Complex<T>,
    ) -> Result<T> {
        let p = self.rule.pressure(mf, c_minus, c_plus);
        if let Some(fine) = &self.refined {
            let q = fine.pressure(mf, c_minus, c_plus);
            self.compare(p, q)?;
        }
        Ok(p)
    }

    pub fn moments_unchecked(
        &self,
        mf: &MeanFieldParams<T>,
        c_minus: Complex<T>,
        c_plus: Complex<T>,
    ) -> QuasifreeMoments<T> {
        self.rule.moments(mf, c_minus, c_plus)
    }

    pub fn moments(
        &self,
        mf: &MeanFieldParams<T>,
        c_minus: Complex<T>,
        c_plus: Complex<T>,
    ) -> Result<QuasifreeMoments<T>> {
        let m = self.rule.moments(mf, c_minus, c_plus);
        if let Some(fine) = &self.refined {
            let f = fine.moments(mf, c_minus, c_plus);
            self.compare(m.pressure, f.pressure)?;
            self.compare(m.density, f.density)?;
            self.compare(m.pair_amplitude.re, f.pair_amplitude.re)?;
        }
        Ok(m)
    }

    fn compare(&self, coarse: T, fine: T) -> Result<()> {
        let diff = (coarse - fine).abs().to_f64().unwrap_or(f64::NAN);
        let scale = 1.0 + fine.abs().to_f64().unwrap_or(0.0);
        if diff <= self.spec.tolerance * scale {
            Ok(())
        } else {
            Err(KacError::Accuracy {
                message: format!(
                    "Brillouin-zone quadrature not converged: {coarse:e} with {} points, {fine:e} with {}",
                    self.spec.points_per_axis,
                    2 * self.spec.points_per_axis
                ),
                estimate: diff,
                tolerance: self.spec.tolerance,
            })
        }
    }
}

/// `(1/β)(2π)^{−d} ∫ ln Tr e^{−βH_k} dk` by the configured quadrature.
pub fn quasifree_pressure<T: Real>(
    mf: &MeanFieldParams<T>,
    c_minus: Complex<T>,
    c_plus: Complex<T>,
    quad: &QuadratureSpec,
) -> Result<T> {
    mf.validate()?;
    Quadrature::new(*quad, mf.hopping.dim())?.pressure(mf, c_minus, c_plus)
}

/// Density and pair amplitude of the approximating model in the thermodynamic limit.
pub fn quasifree_moments<T: Real>(
    mf: &MeanFieldParams<T>,
    c_minus: Complex<T>,
    c_plus: Complex<T>,
    quad: &QuadratureSpec,
) -> Result<QuasifreeMoments<T>> {
    mf.validate()?;
    Quadrature::new(*quad, mf.hopping.dim())?.moments(mf, c_minus, c_plus)
}

/// Pressure of the approximating model on the periodic box `{−L..L}^d`.
pub fn finite_grid_pressure<T: Real>(
    mf: &MeanFieldParams<T>,
    c_minus: Complex<T>,
    c_plus: Complex<T>,
    half_width: usize,
) -> Result<T> {
    mf.validate()?;
    Ok(BzRule::finite_grid(half_width, mf.hopping.dim()).pressure(mf, c_minus, c_plus))
}
