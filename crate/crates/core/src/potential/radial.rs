//! Fourier transforms of radial functions in dimensions 1, 2 and 3.
//!
//! Convention: `f̂(k) = ∫ f(x) e^{-ik·x} dx`, `f(x) = (2π)^{-d} ∫ f̂(k) e^{ik·x} dk`.

use crate::error::{KacError, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cnt, lit, Real};

/// Bessel function `J₀` from the trapezoidal rule on `(2π)⁻¹ ∫ cos(z sin θ) dθ`,
/// which is exact up to `J_{2N}(z)` for `N` nodes.
pub fn bessel_j0<T: Real>(z: T) -> T {
    let za = z.abs();
    let n = 32 + za.to_f64().unwrap_or(0.0).ceil() as usize;
    let h = lit::<T>(2.0) * T::PI() / cnt(n);
    let mut acc = T::zero();
    for i in 0..n {
        acc += (za * (h * cnt(i)).sin()).cos();
    }
    acc / cnt(n)
}

/// Kernel relating a radial function to its transform: for `d = 1, 2, 3`
/// returns the angular average of `e^{ik·x}` at `|k||x| = t`.
fn angular_kernel<T: Real>(d: usize, t: T) -> T {
    match d {
        1 => t.cos(),
        2 => bessel_j0(t),
        _ => {
            if t.abs() < lit(1e-4) {
                let t2 = t * t;
                T::one() - t2 / lit(6.0) + t2 * t2 / lit(120.0)
            } else {
                t.sin() / t
            }
        }
    }
}

/// Surface area of the unit sphere in `ℝ^d`, with the `d = 1` convention `2`.
fn sphere_area<T: Real>(d: usize) -> T {
    match d {
        1 => lit(2.0),
        2 => lit::<T>(2.0) * T::PI(),
        _ => lit::<T>(4.0) * T::PI(),
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(KacError::Unsupported(format!(
            "radial transforms are implemented for d = 1, 2, 3 (got d = {d})"
        )))
    }
}

/// Inverse transform `f(r)` of a radial `f̂`, integrated over `|k| ≤ k_max`.
pub fn inverse_radial<T: Real, F: Fn(T) -> T>(fhat: F, d: usize, r: T, k_max: T) -> Result<T> {
    check_dim(d)?;
    let rule = GaussLegendre::<T>::new(16);
    // panels narrow enough to resolve the oscillation of the kernel
    let width = (lit::<T>(0.5)).min(T::one() / (r.abs() + T::one()));
    let panels = (k_max / width).ceil().to_usize().unwrap_or(1).max(1);
    let integral = rule.integrate_composite(T::zero(), k_max, panels, |k| {
        fhat(k) * k.powi(d as i32 - 1) * angular_kernel(d, k * r)
    });
    let two_pi = lit::<T>(2.0) * T::PI();
    Ok(integral * sphere_area::<T>(d) / two_pi.powi(d as i32))
}

/// Forward transform `f̂(k)` of a radial `f` supported on `|x| ≤ radius`;
/// `knots` are breakpoints at which the integrand may lose smoothness.
pub fn forward_radial<T: Real, F: Fn(T) -> T>(f: F, d: usize, k: T, knots: &[T]) -> Result<T> {
    check_dim(d)?;
    let rule = GaussLegendre::<T>::new(8);
    let k = k.abs();
    let mut acc = T::zero();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = ((k * (b - a)).ceil().to_usize().unwrap_or(0) + 1).max(1);
        acc += rule.integrate_composite(a, b, panels, |r| {
            f(r) * r.powi(d as i32 - 1) * angular_kernel(d, k * r)
        });
    }
    Ok(acc * sphere_area::<T>(d))
}
