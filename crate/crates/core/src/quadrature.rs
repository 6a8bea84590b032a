//! One-dimensional Gauss–Legendre rules and composite integration helpers.

use crate::scalar::{cnt, lit, Real};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the rule by Newton iteration on the Legendre polynomial roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf: T = cnt(n);
        let half = (n + 1) / 2;
        for i in 0..half {
            // Tricomi initial guess
            let theta = T::PI() * (cnt::<T>(i) + lit(0.75)) / (nf + lit(0.5));
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * lit(0.5);
        let mid = (b + a) * lit(0.5);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }

    /// Composite integration of `f` over `[a, b]` split into `panels` equal pieces.
    pub fn integrate_composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let panels = panels.max(1);
        let h = (b - a) / cnt(panels);
        (0..panels)
            .map(|p| {
                let lo = a + h * cnt(p);
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf: T = cnt(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf: T = cnt(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Integrates `f` over `[0, ∞)` for a function that decays monotonically past
/// some point: panels of width `panel` are added until a panel contributes less
/// than `rel_tol` of the running total (checked on two consecutive panels).
pub fn integrate_half_line<T: Real, F: FnMut(T) -> T>(
    rule: &GaussLegendre<T>,
    panel: T,
    rel_tol: T,
    max_panels: usize,
    mut f: F,
) -> T {
    let mut total = T::zero();
    let mut quiet = 0;
    for p in 0..max_panels {
        let lo = panel * cnt(p);
        let piece = rule.integrate(lo, lo + panel, &mut f);
        total += piece;
        if piece.abs() <= rel_tol * total.abs().max(T::min_positive_value()) {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}
