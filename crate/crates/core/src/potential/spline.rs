//! Natural cubic spline over radial samples.

use crate::error::{KacError, Result};
use crate::scalar::{lit, Real};

/// Radial profile `r ↦ f(r)` given by samples on increasing radii starting at 0.
/// Values beyond the last radius are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpline<T> {
    radii: Vec<T>,
    values: Vec<T>,
    // second derivatives at the knots
    curvature: Vec<T>,
}

impl<T: Real> RadialSpline<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(KacError::domain("spline radii and values differ in length"));
        }
        if radii.len() < 2 {
            return Err(KacError::domain("spline needs at least two samples"));
        }
        if radii[0] != T::zero() {
            return Err(KacError::domain("spline radii must start at 0"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KacError::domain("spline radii must be strictly increasing"));
        }
        if radii.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(KacError::domain("spline samples must be finite"));
        }
        let curvature = natural_curvature(&radii, &values);
        Ok(RadialSpline {
            radii,
            values,
            curvature,
        })
    }

    pub fn radius(&self) -> T {
        *self.radii.last().expect("non-empty")
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, r: T) -> T {
        let r = r.abs();
        if r > self.radius() {
            return T::zero();
        }
        let i = match self
            .radii
            .binary_search_by(|x| x.partial_cmp(&r).expect("finite radius"))
        {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let h = x1 - x0;
        let a = (x1 - r) / h;
        let b = (r - x0) / h;
        let six: T = lit(6.0);
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.curvature[i] + (b * b * b - b) * self.curvature[i + 1]) * h * h
                / six
    }
}

/// Knot curvatures with zero slope at the origin (even profile) and a natural
/// end at the outer radius.
fn natural_curvature<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let two: T = lit(2.0);
    let six: T = lit(6.0);
    let mut sub = vec![T::zero(); n];
    let mut diag = vec![T::one(); n];
    let mut sup = vec![T::zero(); n];
    let mut rhs = vec![T::zero(); n];
    let h0 = x[1] - x[0];
    diag[0] = two * h0;
    sup[0] = h0;
    rhs[0] = six * (y[1] - y[0]) / h0;
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        sub[i] = hl;
        diag[i] = two * (hl + hr);
        sup[i] = hr;
        rhs[i] = six * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
    }
    // last row stays m_{n-1} = 0
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        let prev = rhs[i - 1];
        rhs[i] -= w * prev;
    }
    let mut m = vec![T::zero(); n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_zero_beyond() {
        let r: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = r.iter().map(|x| (-x * x).exp()).collect();
        let s = RadialSpline::new(r.clone(), v.clone()).unwrap();
        for (x, y) in r.iter().zip(&v) {
            assert_eq!(s.eval(*x), *y);
        }
        assert_eq!(s.eval(5.01), 0.0);
        assert_eq!(s.eval(-1.0), s.eval(1.0));
    }

    #[test]
    fn cubic_accuracy_on_smooth_profile() {
        let r: Vec<f64> = (0..401).map(|i| i as f64 * 0.02).collect();
        let v: Vec<f64> = r.iter().map(|x| (-x * x).exp()).collect();
        let s = RadialSpline::new(r, v).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..700 {
            let x = 0.3 + i as f64 * 0.01013;
            worst = worst.max((s.eval(x) - (-x * x).exp()).abs());
        }
        assert!(worst < 1e-7, "worst {worst}");
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(RadialSpline::new(vec![0.0_f64, 1.0], vec![1.0]).is_err());
        assert!(RadialSpline::new(vec![0.1_f64, 1.0], vec![1.0, 0.0]).is_err());
        assert!(RadialSpline::new(vec![0.0_f64, 1.0, 1.0], vec![1.0, 0.5, 0.0]).is_err());
    }
}
