//! Lattice series over `ℤ^d` with certified truncation, the Poisson summation
//! identity, and the integral-test bounds on absolute lattice sums.

use super::{Majorant, PairPotential};
use crate::error::{KacError, Result};
use crate::quadrature::{integrate_half_line, GaussLegendre};
use crate::scalar::{cnt, lit, Real};

/// Truncation of series over `ℤ^d` to the cube `|z|_∞ ≤ R`, with `R` chosen so
/// the majorant tail stays below `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec<T> {
    pub tol: T,
    pub max_radius: usize,
}

impl<T: Real> Default for TruncationSpec<T> {
    fn default() -> Self {
        TruncationSpec {
            tol: lit(1e-12),
            max_radius: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSides<T> {
    /// `Σ_z γ^d f(γa + γz)`
    pub lhs: T,
    /// `Σ_z f̂(2πz/γ) cos(2π z·a)`
    pub rhs: T,
}

/// Number of points of `ℤ^d` with `|z|_∞ = m`.
fn shell_count(d: usize, m: usize) -> usize {
    if m == 0 {
        1
    } else {
        (2 * m + 1).pow(d as u32) - (2 * m - 1).pow(d as u32)
    }
}

/// Calls `f` on every `z ∈ ℤ^d` with `|z|_∞ = m`.
fn for_each_in_shell<F: FnMut(&[i64])>(d: usize, m: usize, mut f: F) {
    let m = m as i64;
    let mut z = vec![0i64; d];
    if m == 0 {
        f(&z);
        return;
    }
    // the first axis reaching |z_j| = m is `lead`
    for lead in 0..d {
        for sign in [-m, m] {
            let free = d - 1;
            let mut idx = vec![0usize; free];
            loop {
                let mut slot = 0;
                for (j, zj) in z.iter_mut().enumerate() {
                    if j == lead {
                        *zj = sign;
                        continue;
                    }
                    let width = if j < lead { 2 * m - 1 } else { 2 * m + 1 };
                    let lo = if j < lead { -m + 1 } else { -m };
                    *zj = lo + (idx[slot] as i64 % width);
                    slot += 1;
                }
                f(&z);
                // odometer
                let mut carry = 0;
                while carry < free {
                    let j = if carry < lead { carry } else { carry + 1 };
                    let width = if j < lead { 2 * m - 1 } else { 2 * m + 1 } as usize;
                    idx[carry] += 1;
                    if idx[carry] < width {
                        break;
                    }
                    idx[carry] = 0;
                    carry += 1;
                }
                if carry == free {
                    break;
                }
            }
        }
    }
}

/// Smallest radius `R` with `Σ_{m>R} bound(m) ≤ tol`, where `bound(m)` bounds the
/// absolute contribution of shell `m`.
fn certified_radius<T: Real, B: Fn(T) -> Result<T>>(bound: B, tol: T, max_radius: usize) -> Result<usize> {
    let rule = GaussLegendre::<T>::new(16);
    let small = tol * lit(1e-3);
    let mut shells: Vec<T> = Vec::new();
    let tail;
    let mut m = 1usize;
    loop {
        let b = bound(cnt(m))?;
        shells.push(b);
        let decreasing = shells.len() < 2 || b <= shells[shells.len() - 2];
        if b <= small && decreasing {
            let start: T = cnt(m);
            let mut err = None;
            let t = integrate_half_line(&rule, T::one(), lit(1e-6), 100_000, |u| match bound(start + u) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    T::zero()
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            if t <= small {
                tail = t;
                break;
            }
        }
        if m >= max_radius {
            return Err(KacError::Accuracy {
                message: format!("lattice series not converged within radius {max_radius}"),
                estimate: b.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        m += 1;
    }
    let mut suffix = tail;
    let mut radius = shells.len();
    for (i, b) in shells.iter().enumerate().rev() {
        if suffix + *b > tol {
            break;
        }
        suffix += *b;
        radius = i; // shells[i] belongs to m = i + 1
    }
    Ok(radius)
}

fn reduce_shift<T: Real>(shift: &[T]) -> (Vec<T>, T) {
    let b: Vec<T> = shift.iter().map(|a| *a - a.round()).collect();
    let norm = b.iter().map(|v| *v * *v).sum::<T>().sqrt();
    (b, norm)
}

fn real_space_sum<T: Real>(
    p: &PairPotential<T>,
    gamma: T,
    shift: &[T],
    trunc: &TruncationSpec<T>,
    absolute: bool,
) -> Result<T> {
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(KacError::domain("gamma must be positive"));
    }
    if shift.len() != p.dim() {
        return Err(KacError::domain("shift dimension mismatch"));
    }
    if p.is_zero() {
        return Ok(T::zero());
    }
    let d = p.dim();
    let (b, bnorm) = reduce_shift(shift);
    let majorant = p.majorant()?;
    let gd = gamma.powi(d as i32);
    let radius = certified_radius(
        |m| {
            let count: T = cnt(shell_count(d, m.to_usize().unwrap_or(0)).max(1));
            // continuous extension of the shell count
            let count = count.max(lit::<T>(2.0 * d as f64) * (lit::<T>(2.0) * m + T::one()).powi(d as i32 - 1));
            Ok(count * gd * p.majorant_at(&majorant, gamma * (m - bnorm))?)
        },
        trunc.tol,
        trunc.max_radius,
    )?;
    let mut total = T::zero();
    let mut point = vec![T::zero(); d];
    let mut err = None;
    for m in 0..=radius {
        for_each_in_shell(d, m, |z| {
            for ((x, zj), bj) in point.iter_mut().zip(z).zip(&b) {
                *x = gamma * (lit::<T>(*zj as f64) + *bj);
            }
            match p.eval(&point) {
                Ok(v) => total += if absolute { v.abs() } else { v },
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(gd * total),
    }
}

/// `Σ_{z∈ℤ^d} γ^d f(γ(z + a))`.
pub fn lattice_sum<T: Real>(p: &PairPotential<T>, gamma: T, shift: &[T], trunc: &TruncationSpec<T>) -> Result<T> {
    real_space_sum(p, gamma, shift, trunc, false)
}

/// `Σ_{z∈ℤ^d} |γ^d f(γ(z + a))|`.
pub fn lattice_abs_sum<T: Real>(
    p: &PairPotential<T>,
    gamma: T,
    shift: &[T],
    trunc: &TruncationSpec<T>,
) -> Result<T> {
    real_space_sum(p, gamma, shift, trunc, true)
}

/// Both sides of the Poisson summation identity
/// `Σ_z γ^d f(γa + γz) = Σ_z f̂(2πz/γ) e^{2πi z·a}` (real parts).
pub fn poisson_sum<T: Real>(
    p: &PairPotential<T>,
    gamma: T,
    a: &[T],
    trunc: &TruncationSpec<T>,
) -> Result<PoissonSides<T>> {
    let lhs = lattice_sum(p, gamma, a, trunc)?;
    if p.is_zero() {
        return Ok(PoissonSides { lhs, rhs: T::zero() });
    }
    let d = p.dim();
    let two_pi = lit::<T>(2.0) * T::PI();
    let radius = certified_radius(
        |m| {
            let count = lit::<T>(2.0 * d as f64) * (lit::<T>(2.0) * m + T::one()).powi(d as i32 - 1);
            Ok(count * p.fourier_majorant(two_pi * m / gamma)?)
        },
        trunc.tol,
        trunc.max_radius,
    )?;
    let mut rhs = T::zero();
    let mut k = vec![T::zero(); d];
    let mut err = None;
    for m in 0..=radius {
        for_each_in_shell(d, m, |z| {
            let mut phase = T::zero();
            for ((kj, zj), aj) in k.iter_mut().zip(z).zip(a) {
                let zf = lit::<T>(*zj as f64);
                *kj = two_pi * zf / gamma;
                phase += two_pi * zf * *aj;
            }
            match p.fourier(&k) {
                Ok(v) => rhs += v * phase.cos(),
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(PoissonSides { lhs, rhs }),
    }
}

/// `Σ_{k∈ℤ^d∖{0}} |f̂(k/γ)|`, which decays like `γ²` for regular potentials.
pub fn fourier_lattice_tail<T: Real>(p: &PairPotential<T>, gamma: T, trunc: &TruncationSpec<T>) -> Result<T> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(KacError::domain("gamma must lie in (0, 1)"));
    }
    if p.is_zero() {
        return Ok(T::zero());
    }
    let d = p.dim();
    let radius = certified_radius(
        |m| {
            let count = lit::<T>(2.0 * d as f64) * (lit::<T>(2.0) * m + T::one()).powi(d as i32 - 1);
            Ok(count * p.fourier_majorant(m / gamma)?)
        },
        trunc.tol,
        trunc.max_radius,
    )?;
    let mut total = T::zero();
    let mut k = vec![T::zero(); d];
    let mut err = None;
    for m in 1..=radius {
        for_each_in_shell(d, m, |z| {
            for (kj, zj) in k.iter_mut().zip(z) {
                *kj = lit::<T>(*zj as f64) / gamma;
            }
            match p.fourier(&k) {
                Ok(v) => total += v.abs(),
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `Γ(n/2)` for positive integers `n`.
fn gamma_half<T: Real>(n: usize) -> T {
    let mut value: T = if n % 2 == 0 { T::one() } else { T::PI().sqrt() };
    let mut x: T = if n % 2 == 0 { T::one() } else { lit(0.5) };
    let target: T = lit(n as f64 / 2.0);
    while x < target {
        value *= x;
        x += T::one();
    }
    value
}

fn binomial<T: Real>(n: usize, k: usize) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * cnt(n - i) / cnt(i + 1);
    }
    acc
}

/// `∫_0^∞ g(u) u^k du` for the potential's majorant.
fn majorant_moment<T: Real>(p: &PairPotential<T>, m: &Majorant<T>, k: usize) -> Result<T> {
    let kf: T = cnt(k);
    Ok(match m {
        Majorant::Zero => T::zero(),
        Majorant::Gaussians(terms) => terms
            .iter()
            .map(|(a, b)| *a * gamma_half::<T>(k + 1) / (lit::<T>(2.0) * b.powf((kf + T::one()) / lit(2.0))))
            .sum(),
        Majorant::Exponential(a, b) => {
            let fact: T = (1..=k).fold(T::one(), |acc, i| acc * cnt(i));
            *a * fact / b.powi(k as i32 + 1)
        }
        Majorant::Table { radii, suffix_max } => {
            let mut acc = T::zero();
            for (i, w) in radii.windows(2).enumerate() {
                acc += suffix_max[i] * (w[1].powi(k as i32 + 1) - w[0].powi(k as i32 + 1)) / (kf + T::one());
            }
            acc
        }
        Majorant::SelfRadial => {
            let rule = GaussLegendre::<T>::new(16);
            let mut err = None;
            let v = integrate_half_line(&rule, lit(0.5), lit(1e-16), 1_000_000, |u| {
                match p.majorant_at(m, u) {
                    Ok(g) => g * u.powi(k as i32),
                    Err(e) => {
                        err = Some(e);
                        T::zero()
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            v
        }
    })
}

/// Explicit constant bounding `Σ_z |γ^d f(γz + a)|` uniformly in the shift,
/// assembled from `g(0)` and the moments `∫ g(u) u^k du` of a radially
/// decreasing majorant `g ≥ |f|`. For `γ < 1` this is the `γ`-independent
/// constant; for `γ ≥ 1` the `γ`-dependent form of the same estimate is returned.
pub fn series_tail_bound<T: Real>(p: &PairPotential<T>, gamma: T) -> Result<T> {
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(KacError::domain("gamma must be positive"));
    }
    if p.is_zero() {
        return Ok(T::zero());
    }
    let d = p.dim();
    let m = p.majorant()?;
    let g0 = p.majorant_at(&m, T::zero())?;
    let half_diag = cnt::<T>(d).sqrt() / lit(2.0);
    let moments: Vec<T> = (0..d).map(|k| majorant_moment(p, &m, k)).collect::<Result<_>>()?;
    let uniform = gamma < T::one();
    let gpow = |e: i32| if uniform { T::one() } else { gamma.powi(e) };
    let di = d as i32;
    let mut total = gpow(di) * g0;
    for n in 1..=d {
        let sphere = lit::<T>(2.0) * T::PI().powf(cnt::<T>(n) / lit(2.0)) / gamma_half::<T>(n);
        let mut inner = gpow(di) * half_diag.powi(n as i32) * g0;
        for (k, mu) in moments.iter().enumerate().take(n) {
            inner += binomial::<T>(n - 1, k)
                * gpow(di - (k as i32 + 1))
                * half_diag.powi(n as i32 - (k as i32 + 1))
                * *mu;
        }
        total += binomial::<T>(d, n) * sphere * inner;
    }
    Ok(total)
}
