//! The thermodynamic game with payoff `h(c₋, c₊) = −c₊² + c₋² − P̃(c₋, c₊)`,
//! its two values `P♯ = −inf_{c₋} sup_{c₊} h` and `P♭ = −sup_{c₊} inf_{c₋} h`,
//! and the gap equations.
//!
//! Strategies are gauge fixed: `c₋ ≥ 0` real and `c₊` real. Differentiating the
//! closed-form pressure gives
//! `∂h/∂c₋ = 2(c₋ − √η₋ Re⟨a↓a↑⟩)` and `∂h/∂c₊ = −2(c₊ − √η₊ ⟨n↑+n↓⟩)`,
//! so the gap map is `(c₋, c₊) ↦ (√η₋ Re⟨a↓a↑⟩, √η₊ ⟨n↑+n↓⟩)` and a point is
//! stationary exactly when its residual vanishes.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{KacError, Result};
use crate::lattice::MeanFieldParams;
use crate::quasifree::{Quadrature, QuadratureSpec, QuasifreeMoments};
use crate::scalar::{cnt, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GamePoint<T> {
    pub c_minus: T,
    pub c_plus: T,
}

impl<T: Real> GamePoint<T> {
    pub fn new(c_minus: T, c_plus: T) -> Self {
        GamePoint { c_minus, c_plus }
    }

    pub fn origin() -> Self {
        GamePoint::new(T::zero(), T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSpec {
    pub grid_points: usize,
    pub x_tol: f64,
    pub max_iter: usize,
    pub degeneracy_window: f64,
    pub tol_gap: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec {
            grid_points: 33,
            x_tol: 1e-10,
            max_iter: 500,
            degeneracy_window: 1e-6,
            tol_gap: 1e-9,
        }
    }
}

impl OptimizerSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.grid_points < 3 {
            errors.push("optimizer grid_points must be at least 3".to_string());
        }
        for (name, v) in [
            ("x_tol", self.x_tol),
            ("degeneracy_window", self.degeneracy_window),
            ("tol_gap", self.tol_gap),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("optimizer {name} must be positive"));
            }
        }
        if self.max_iter == 0 {
            errors.push("optimizer max_iter must be positive".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(KacError::Config(errors))
        }
    }
}

/// Inner maximizer `r₊(c₋)` together with its payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision<T> {
    pub c_plus: T,
    pub payoff: T,
    /// The maximizer sits on the upper edge of the search box.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameResult<T> {
    pub p_sharp: T,
    pub p_flat: T,
    pub argmin_sharp: GamePoint<T>,
    /// Every local minimizer of the outer problem within the degeneracy window.
    pub sharp_optima: Vec<GamePoint<T>>,
    pub argmax_flat: GamePoint<T>,
    pub flat_optima: Vec<GamePoint<T>>,
    pub gap_residual_sharp: T,
    pub gap_residual_flat: T,
    pub saddle_gap: T,
    pub boundary_hit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSolution<T> {
    pub c_minus: T,
    pub c_plus: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Payoff sampled on a rectangular strategy grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffGrid<T> {
    pub c_minus: Vec<T>,
    pub c_plus: Vec<T>,
    /// `values[i][j]` is the payoff at `(c_minus[i], c_plus[j])`.
    pub values: Vec<Vec<T>>,
}

/// Sampled free energy `c₋ ↦ h(c₋, c₊)` and whether its sublevel sets are intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiConvexity<T> {
    pub c_plus: T,
    pub c_minus: Vec<T>,
    pub values: Vec<T>,
    pub quasi_convex: bool,
}

/// A mean-field model with a prepared quadrature and optimizer settings.
#[derive(Debug, Clone)]
pub struct Game<T> {
    mf: MeanFieldParams<T>,
    quad: Quadrature<T>,
    opt: OptimizerSpec,
    box_minus: T,
    box_plus: T,
}

impl<T: Real> Game<T> {
    pub fn new(mf: MeanFieldParams<T>, quad: QuadratureSpec, opt: OptimizerSpec) -> Result<Self> {
        mf.validate()?;
        opt.validate()?;
        let quad = Quadrature::new(quad, mf.hopping.dim())?;
        // |⟨a↓a↑⟩| ≤ 1/2 and ⟨n↑+n↓⟩ ≤ 2 bound every self-consistent point
        let box_minus = T::one().max(mf.eta_minus.sqrt());
        let box_plus = lit::<T>(2.0).max(lit::<T>(2.0) * mf.eta_plus.sqrt());
        Ok(Game {
            mf,
            quad,
            opt,
            box_minus,
            box_plus,
        })
    }

    pub fn params(&self) -> &MeanFieldParams<T> {
        &self.mf
    }

    /// Upper edges of the `c₋` and `c₊` search intervals.
    pub fn search_box(&self) -> (T, T) {
        (self.box_minus, self.box_plus)
    }

    fn pressure(&self, g: GamePoint<T>) -> T {
        self.quad.pressure_unchecked(
            &self.mf,
            Complex::new(g.c_minus, T::zero()),
            Complex::new(g.c_plus, T::zero()),
        )
    }

    fn moments(&self, g: GamePoint<T>) -> QuasifreeMoments<T> {
        self.quad.moments_unchecked(
            &self.mf,
            Complex::new(g.c_minus, T::zero()),
            Complex::new(g.c_plus, T::zero()),
        )
    }

    fn payoff_fast(&self, g: GamePoint<T>) -> T {
        -g.c_plus * g.c_plus + g.c_minus * g.c_minus - self.pressure(g)
    }

    /// `−c₊² + c₋² − P̃(c₋, c₊)` with the quadrature refinement check.
    pub fn payoff(&self, g: GamePoint<T>) -> Result<T> {
        let p = self.quad.pressure(
            &self.mf,
            Complex::new(g.c_minus, T::zero()),
            Complex::new(g.c_plus, T::zero()),
        )?;
        Ok(-g.c_plus * g.c_plus + g.c_minus * g.c_minus - p)
    }

    fn rhs_fast(&self, g: GamePoint<T>) -> GamePoint<T> {
        let m = self.moments(g);
        GamePoint::new(
            self.mf.eta_minus.sqrt() * m.pair_amplitude.re,
            self.mf.eta_plus.sqrt() * m.density,
        )
    }

    /// Right-hand side of the gap equations, with the refinement check.
    pub fn gap_map(&self, g: GamePoint<T>) -> Result<GamePoint<T>> {
        let m = self.quad.moments(
            &self.mf,
            Complex::new(g.c_minus, T::zero()),
            Complex::new(g.c_plus, T::zero()),
        )?;
        Ok(GamePoint::new(
            self.mf.eta_minus.sqrt() * m.pair_amplitude.re,
            self.mf.eta_plus.sqrt() * m.density,
        ))
    }

    /// Euclidean distance between a point and its gap-map image.
    pub fn gap_residual(&self, g: GamePoint<T>) -> Result<T> {
        let r = self.gap_map(g)?;
        Ok((g.c_minus - r.c_minus).hypot(g.c_plus - r.c_plus))
    }

    fn residual_fast(&self, g: GamePoint<T>) -> T {
        let r = self.rhs_fast(g);
        (g.c_minus - r.c_minus).hypot(g.c_plus - r.c_plus)
    }

    /// The unique maximizer of the payoff over `c₊` at fixed `c₋`.
    pub fn decision_rule(&self, c_minus: T) -> Result<Decision<T>> {
        if self.mf.eta_plus == T::zero() {
            let g = GamePoint::new(c_minus, T::zero());
            return Ok(Decision {
                c_plus: T::zero(),
                payoff: self.payoff_fast(g),
                at_boundary: false,
            });
        }
        let f = |cp: T| self.payoff_fast(GamePoint::new(c_minus, cp));
        let (lo, hi) = golden_section(
            |x| -f(x),
            T::zero(),
            self.box_plus,
            lit(1e-6),
            self.opt.max_iter,
        )?;
        // c₊ − √η₊ n(c₊) is strictly increasing, so polish on it
        let sq = self.mf.eta_plus.sqrt();
        let stationarity =
            |cp: T| cp - sq * self.moments(GamePoint::new(c_minus, cp)).density;
        let (a, b) = widen_bracket(&stationarity, lo, hi, T::zero(), self.box_plus);
        let c_plus = match find_root(&stationarity, a, b, lit(self.opt.x_tol), self.opt.max_iter) {
            Some(x) => x,
            None => {
                let mid = (lo + hi) * lit(0.5);
                if stationarity(T::zero()) > T::zero() {
                    T::zero()
                } else {
                    mid
                }
            }
        };
        let edge = lit::<T>(self.opt.x_tol) * lit(10.0);
        Ok(Decision {
            c_plus,
            payoff: f(c_plus),
            at_boundary: c_plus >= self.box_plus - edge,
        })
    }

    /// Minimizes `h(·, c₊)` over `[0, box₋]`; all near-optimal local minima.
    fn inner_minima(&self, c_plus: T) -> Result<Vec<(T, T)>> {
        if self.mf.eta_minus == T::zero() {
            let g = GamePoint::new(T::zero(), c_plus);
            return Ok(vec![(T::zero(), self.payoff_fast(g))]);
        }
        let sq = self.mf.eta_minus.sqrt();
        global_minima(
            |cm| self.payoff_fast(GamePoint::new(cm, c_plus)),
            |cm| cm - sq * self.moments(GamePoint::new(cm, c_plus)).pair_amplitude.re,
            self.box_minus,
            &self.opt,
        )
    }

    /// Solves both orders of play.
    pub fn solve(&self) -> Result<GameResult<T>> {
        let window: T = lit(self.opt.degeneracy_window);
        let mut boundary_hit = false;

        // P♯: minimize V(c₋) = max_{c₊} h
        let sharp: Vec<(T, T)> = if self.mf.eta_minus == T::zero() {
            let d = self.decision_rule(T::zero())?;
            vec![(T::zero(), d.payoff)]
        } else {
            let sq = self.mf.eta_minus.sqrt();
            global_minima(
                |cm| {
                    self.decision_rule(cm)
                        .map(|d| d.payoff)
                        .unwrap_or_else(|_| T::infinity())
                },
                |cm| {
                    let cp = self
                        .decision_rule(cm)
                        .map(|d| d.c_plus)
                        .unwrap_or_else(|_| T::zero());
                    cm - sq * self.moments(GamePoint::new(cm, cp)).pair_amplitude.re
                },
                self.box_minus,
                &self.opt,
            )?
        };
        let best_sharp = sharp[0].1;
        let mut sharp_optima = Vec::new();
        for (cm, v) in &sharp {
            if *v > best_sharp + window {
                continue;
            }
            let d = self.decision_rule(*cm)?;
            boundary_hit |= d.at_boundary;
            sharp_optima.push(self.polish(GamePoint::new(*cm, d.c_plus)));
        }
        let argmin_sharp = sharp_optima[0];

        // P♭: maximize W(c₊) = min_{c₋} h
        let flat = if self.mf.eta_plus == T::zero() {
            let inner = self.inner_minima(T::zero())?;
            vec![(T::zero(), inner[0].1)]
        } else {
            let sq = self.mf.eta_plus.sqrt();
            let neg = global_minima(
                |cp| {
                    self.inner_minima(cp)
                        .map(|m| -m[0].1)
                        .unwrap_or_else(|_| T::infinity())
                },
                |cp| {
                    let cm = self
                        .inner_minima(cp)
                        .map(|m| m[0].0)
                        .unwrap_or_else(|_| T::zero());
                    sq * self.moments(GamePoint::new(cm, cp)).density - cp
                },
                self.box_plus,
                &self.opt,
            )?;
            neg.into_iter().map(|(x, v)| (x, -v)).collect()
        };
        let best_flat = flat[0].1;
        let mut flat_optima = Vec::new();
        for (cp, v) in &flat {
            if *v < best_flat - window {
                continue;
            }
            let inner = self.inner_minima(*cp)?;
            flat_optima.push(self.polish(GamePoint::new(inner[0].0, *cp)));
        }
        let argmax_flat = flat_optima[0];
        let edge = lit::<T>(1e-8);
        boundary_hit |= [argmin_sharp, argmax_flat]
            .iter()
            .any(|g| g.c_minus >= self.box_minus - edge || g.c_plus >= self.box_plus - edge);

        let p_sharp = -self.payoff(argmin_sharp)?;
        let p_flat = -self.payoff(argmax_flat)?;
        Ok(GameResult {
            p_sharp,
            p_flat,
            argmin_sharp,
            sharp_optima,
            argmax_flat,
            flat_optima,
            gap_residual_sharp: self.gap_residual(argmin_sharp)?,
            gap_residual_flat: self.gap_residual(argmax_flat)?,
            saddle_gap: p_flat - p_sharp,
            boundary_hit,
        })
    }

    /// Newton steps on the gap residual from an optimizer found by bracketing;
    /// kept only when they stay close and actually reduce the residual.
    fn polish(&self, start: GamePoint<T>) -> GamePoint<T> {
        let r0 = self.residual_fast(start);
        let mut g = start;
        let h: T = lit(1e-6);
        let active_minus = self.mf.eta_minus > T::zero() && start.c_minus > h;
        let active_plus = self.mf.eta_plus > T::zero() && start.c_plus > h;
        for _ in 0..8 {
            let f = |p: GamePoint<T>| {
                let r = self.rhs_fast(p);
                (p.c_minus - r.c_minus, p.c_plus - r.c_plus)
            };
            let (f1, f2) = f(g);
            if f1.hypot(f2) <= lit(1e-14) {
                break;
            }
            let d_minus = |p: GamePoint<T>, s: T| GamePoint::new(p.c_minus + s, p.c_plus);
            let d_plus = |p: GamePoint<T>, s: T| GamePoint::new(p.c_minus, p.c_plus + s);
            let (a11, a21) = if active_minus {
                let (u1, u2) = f(d_minus(g, h));
                let (l1, l2) = f(d_minus(g, -h));
                ((u1 - l1) / (h + h), (u2 - l2) / (h + h))
            } else {
                (T::one(), T::zero())
            };
            let (a12, a22) = if active_plus {
                let (u1, u2) = f(d_plus(g, h));
                let (l1, l2) = f(d_plus(g, -h));
                ((u1 - l1) / (h + h), (u2 - l2) / (h + h))
            } else {
                (T::zero(), T::one())
            };
            let (f1, f2) = (
                if active_minus { f1 } else { T::zero() },
                if active_plus { f2 } else { T::zero() },
            );
            let det = a11 * a22 - a12 * a21;
            if det.abs() < lit(1e-14) {
                break;
            }
            let s1 = (a22 * f1 - a12 * f2) / det;
            let s2 = (a11 * f2 - a21 * f1) / det;
            g = GamePoint::new(g.c_minus - s1, g.c_plus - s2);
        }
        let moved = (g.c_minus - start.c_minus).hypot(g.c_plus - start.c_plus);
        let ok = g.c_minus >= T::zero()
            && g.c_plus >= T::zero()
            && moved <= lit(1e-5)
            && self.residual_fast(g) < r0;
        if ok {
            g
        } else {
            start
        }
    }

    /// Damped iteration `g ← (1−λ)g + λ·RHS(g)`.
    pub fn solve_gap_fixed_point(&self, start: GamePoint<T>, damping: T) -> Result<GapSolution<T>> {
        if !(damping > T::zero() && damping <= T::one()) {
            return Err(KacError::domain("damping must lie in (0, 1]"));
        }
        let tol: T = lit(self.opt.tol_gap);
        let mut g = start;
        let mut best = (T::infinity(), g, 0usize);
        for iter in 0..=self.opt.max_iter {
            let r = self.rhs_fast(g);
            let residual = (g.c_minus - r.c_minus).hypot(g.c_plus - r.c_plus);
            if residual < best.0 {
                best = (residual, g, iter);
            }
            if residual <= tol || !residual.is_finite() || iter == self.opt.max_iter {
                break;
            }
            let keep = T::one() - damping;
            g = GamePoint::new(
                keep * g.c_minus + damping * r.c_minus,
                keep * g.c_plus + damping * r.c_plus,
            );
        }
        let (residual, g, iterations) = best;
        Ok(GapSolution {
            c_minus: g.c_minus,
            c_plus: g.c_plus,
            residual,
            iterations,
            converged: residual <= tol,
        })
    }

    /// Payoff on an `n₋ × n₊` grid covering the search box.
    pub fn payoff_grid(&self, n_minus: usize, n_plus: usize) -> PayoffGrid<T> {
        let cm = linspace(T::zero(), self.box_minus, n_minus.max(2));
        let cp = linspace(T::zero(), self.box_plus, n_plus.max(2));
        let values = cm
            .iter()
            .map(|a| {
                cp.iter()
                    .map(|b| self.payoff_fast(GamePoint::new(*a, *b)))
                    .collect()
            })
            .collect();
        PayoffGrid {
            c_minus: cm,
            c_plus: cp,
            values,
        }
    }

    /// Samples `c₋ ↦ h(c₋, c₊)` and tests unimodality, which on an interval is
    /// the same as convexity of every sublevel set.
    pub fn quasi_convexity(&self, c_plus: T, samples: usize) -> QuasiConvexity<T> {
        let cm = linspace(T::zero(), self.box_minus, samples.max(3));
        let values: Vec<T> = cm
            .iter()
            .map(|a| self.payoff_fast(GamePoint::new(*a, c_plus)))
            .collect();
        let tol: T = lit(1e-12);
        let argmin = values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v < values[best] { i } else { best });
        let descending = values[..=argmin].windows(2).all(|w| w[1] <= w[0] + tol);
        let ascending = values[argmin..].windows(2).all(|w| w[1] + tol >= w[0]);
        QuasiConvexity {
            c_plus,
            c_minus: cm,
            values,
            quasi_convex: descending && ascending,
        }
    }
}

/// Stand-alone payoff with a freshly prepared quadrature.
pub fn payoff<T: Real>(mf: &MeanFieldParams<T>, g: GamePoint<T>, quad: &QuadratureSpec) -> Result<T> {
    Game::new(mf.clone(), *quad, OptimizerSpec::default())?.payoff(g)
}

pub fn decision_rule<T: Real>(
    mf: &MeanFieldParams<T>,
    c_minus: T,
    quad: &QuadratureSpec,
    opt: &OptimizerSpec,
) -> Result<Decision<T>> {
    Game::new(mf.clone(), *quad, *opt)?.decision_rule(c_minus)
}

pub fn solve_game<T: Real>(
    mf: &MeanFieldParams<T>,
    quad: &QuadratureSpec,
    opt: &OptimizerSpec,
) -> Result<GameResult<T>> {
    Game::new(mf.clone(), *quad, *opt)?.solve()
}

pub fn gap_residual<T: Real>(mf: &MeanFieldParams<T>, g: GamePoint<T>, quad: &QuadratureSpec) -> Result<T> {
    Game::new(mf.clone(), *quad, OptimizerSpec::default())?.gap_residual(g)
}

pub fn solve_gap_fixed_point<T: Real>(
    mf: &MeanFieldParams<T>,
    start: GamePoint<T>,
    quad: &QuadratureSpec,
    damping: T,
) -> Result<GapSolution<T>> {
    Game::new(mf.clone(), *quad, OptimizerSpec::default())?.solve_gap_fixed_point(start, damping)
}

fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let step = (b - a) / cnt(n - 1);
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + step * cnt(i) })
        .collect()
}

/// Golden-section search for a minimum of `f` on `[a, b]`; returns the final bracket.
fn golden_section<T: Real, F: Fn(T) -> T>(
    f: F,
    mut a: T,
    mut b: T,
    tol: T,
    max_iter: usize,
) -> Result<(T, T)> {
    let invphi: T = (lit::<T>(5.0).sqrt() - T::one()) * lit(0.5);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            return Ok((a, b));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    let (x, v) = if fc <= fd { (c, fc) } else { (d, fd) };
    Err(KacError::NonConvergence {
        message: "golden-section search exhausted its iterations".into(),
        best_value: v.to_f64().unwrap_or(f64::NAN),
        best_point: vec![x.to_f64().unwrap_or(f64::NAN)],
    })
}

/// Grows `[lo, hi]` inside `[min, max]` until `g` changes sign across it.
fn widen_bracket<T: Real, G: Fn(T) -> T>(g: &G, lo: T, hi: T, min: T, max: T) -> (T, T) {
    let (mut a, mut b) = (lo, hi);
    let mut step = (hi - lo).max(lit(1e-8));
    for _ in 0..60 {
        if g(a) * g(b) <= T::zero() {
            break;
        }
        a = (a - step).max(min);
        b = (b + step).min(max);
        step = step + step;
    }
    (a, b)
}

/// Illinois regula falsi for a sign change of `g` on `[a, b]`.
fn find_root<T: Real, G: Fn(T) -> T>(g: &G, mut a: T, mut b: T, tol: T, max_iter: usize) -> Option<T> {
    let mut fa = g(a);
    let mut fb = g(b);
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if fa * fb > T::zero() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) {
            c
        } else {
            (a + b) * lit(0.5)
        };
        let fc = g(c);
        if fc == T::zero() || (b - a).abs() <= tol {
            return Some(c);
        }
        if fc * fb < T::zero() {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa * lit(0.5);
            }
            side = 1;
        }
        if (b - a).abs() <= tol * (T::one() + b.abs()) {
            return Some(b);
        }
    }
    Some(b)
}

/// Local minima of `f` on `[0, upper]`: uniform grid, golden refinement of each
/// discrete minimum, then a root polish of `grad` (a positive multiple of `f'`)
/// when it brackets. Sorted by value.
fn global_minima<T: Real, F: Fn(T) -> T, G: Fn(T) -> T>(
    f: F,
    grad: G,
    upper: T,
    opt: &OptimizerSpec,
) -> Result<Vec<(T, T)>> {
    let xs = linspace(T::zero(), upper, opt.grid_points);
    let fs: Vec<T> = xs.iter().map(|x| f(*x)).collect();
    let n = xs.len();
    let mut found: Vec<(T, T)> = Vec::new();
    for i in 0..n {
        let left = i == 0 || fs[i] <= fs[i - 1];
        let right = i + 1 == n || fs[i] <= fs[i + 1];
        // plateaus count once
        if !(left && right) || (i > 0 && fs[i] == fs[i - 1]) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let (lo, hi) = golden_section(&f, a, b, lit(1e-7), opt.max_iter)?;
        let mut x = (lo + hi) * lit(0.5);
        let (ra, rb) = widen_bracket(&grad, lo, hi, a, b);
        if let Some(root) = find_root(&grad, ra, rb, lit(opt.x_tol), opt.max_iter) {
            if f(root) <= f(x) + lit(1e-15) {
                x = root;
            }
        }
        let candidates = [x, xs[i]];
        let (x, v) = candidates
            .iter()
            .map(|c| (*c, f(*c)))
            .fold((x, T::infinity()), |acc, c| if c.1 < acc.1 { c } else { acc });
        if !v.is_finite() {
            return Err(KacError::NonConvergence {
                message: "payoff not finite on the search grid".into(),
                best_value: v.to_f64().unwrap_or(f64::NAN),
                best_point: vec![x.to_f64().unwrap_or(f64::NAN)],
            });
        }
        if !found.iter().any(|(y, _)| (*y - x).abs() < lit(1e-7)) {
            found.push((x, v));
        }
    }
    found.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite payoff"));
    if found.is_empty() {
        return Err(KacError::NonConvergence {
            message: "no local minimum located".into(),
            best_value: f64::NAN,
            best_point: vec![],
        });
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::HoppingKernel;

    fn game(beta: f64, hop: HoppingKernel<f64>, ep: f64, em: f64) -> Game<f64> {
        Game::new(
            MeanFieldParams::new(beta, hop, ep, em).unwrap(),
            QuadratureSpec::default_for(1),
            OptimizerSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn root_and_golden_helpers() {
        let (a, b) = golden_section(|x: f64| (x - 0.3).powi(2), 0.0, 1.0, 1e-10, 500).unwrap();
        assert!(((a + b) / 2.0 - 0.3).abs() < 1e-9);
        let r = find_root(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 500).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(golden_section(|x: f64| x, 0.0, 1.0, 1e-10, 3).is_err());
    }

    #[test]
    fn origin_payoff_is_minus_free_pressure() {
        let g = game(1.3, HoppingKernel::laplacian(1), 0.4, 0.7);
        let p = crate::quasifree::quasifree_pressure(
            g.params(),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            &QuadratureSpec::default_for(1),
        )
        .unwrap();
        assert_eq!(g.payoff(GamePoint::origin()).unwrap(), -p);
    }

    #[test]
    fn one_site_payoff_closed_form() {
        let g = game(1.0, HoppingKernel::zero(1), 0.0, 1.0);
        for cm in [0.0, 0.2, 0.5, 0.9] {
            let expect = cm * cm - (4.0 * (cm / 2.0f64).cosh().powi(2)).ln();
            assert!((g.payoff(GamePoint::new(cm, 0.0)).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn decision_rule_stationarity() {
        let g = game(2.0, HoppingKernel::zero(1), 0.8, 0.0);
        assert_eq!(
            game(2.0, HoppingKernel::zero(1), 0.0, 0.5)
                .decision_rule(0.3)
                .unwrap()
                .c_plus,
            0.0
        );
        let d = g.decision_rule(0.0).unwrap();
        let h = 1e-5;
        let p = |cp: f64| g.payoff(GamePoint::new(0.0, cp)).unwrap() + cp * cp;
        // p = −P̃, and stationarity reads 2c₊ = −∂P̃/∂c₊
        let dp = -(p(d.c_plus + h) - p(d.c_plus - h)) / (2.0 * h);
        assert!((2.0 * d.c_plus + dp).abs() < 1e-8, "{} {}", d.c_plus, dp);
        for delta in [1e-3, 1e-2] {
            assert!(d.payoff >= g.payoff(GamePoint::new(0.0, d.c_plus + delta)).unwrap());
            assert!(d.payoff >= g.payoff(GamePoint::new(0.0, d.c_plus - delta)).unwrap());
        }
    }

    #[test]
    fn trivial_game() {
        let g = game(1.0, HoppingKernel::laplacian(1), 0.0, 0.0);
        let r = g.solve().unwrap();
        assert_eq!(r.argmin_sharp, GamePoint::origin());
        assert_eq!(r.argmax_flat, GamePoint::origin());
        assert_eq!(r.p_sharp, r.p_flat);
    }

    #[test]
    fn strong_coupling_bcs_breaks_symmetry() {
        let g = game(10.0, HoppingKernel::zero(1), 0.0, 1.0);
        let r = g.solve().unwrap();
        let cm = r.argmin_sharp.c_minus;
        assert!(cm > 0.1);
        // c₋ = tanh(βc₋/2)/2 at h = 0
        assert!((cm - (5.0 * cm).tanh() / 2.0).abs() < 1e-10);
        assert!(g.payoff(r.argmin_sharp).unwrap() < g.payoff(GamePoint::origin()).unwrap());
        assert!(r.gap_residual_sharp < 1e-9);
        assert!((r.p_sharp - r.p_flat).abs() < 1e-10);
    }

    #[test]
    fn fixed_point_trivial_and_normal_phase() {
        let g = game(1.0, HoppingKernel::laplacian(1), 0.0, 0.0);
        let s = g.solve_gap_fixed_point(GamePoint::new(0.3, 0.4), 1.0).unwrap();
        assert!(s.converged && s.c_minus == 0.0 && s.c_plus == 0.0);
        let g = game(0.2, HoppingKernel::laplacian(1), 0.0, 1.0);
        let s = g.solve_gap_fixed_point(GamePoint::new(0.4, 0.0), 0.5).unwrap();
        assert!(s.converged && s.c_minus.abs() < 1e-8);
        assert!(g.solve_gap_fixed_point(GamePoint::origin(), 0.0).is_err());
    }

    #[test]
    fn quasi_convexity_diagnostic() {
        let g = game(1.0, HoppingKernel::laplacian(1), 0.0, 0.5);
        assert!(g.quasi_convexity(0.0, 41).quasi_convex);
    }
}
