//! Order-of-limits experiments: finite-volume pressures of the Kac model along
//! γ schedules, their extrapolation, and the comparison with `P♯` and `P♭`.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KacError, Result};
use crate::fock::build_kac_hamiltonian_with_cap;
use crate::game::GameResult;
use crate::lattice::{Boundary, LatticeBox, ModelParams};
use crate::potential::{lattice_sum, series_tail_bound, PairPotential, TruncationSpec};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// For each γ₊, the full γ₋ schedule: γ₋ → 0 first.
    MinusFirst,
    /// For each γ₋, the full γ₊ schedule.
    PlusFirst,
    /// Paired sequences `(γ₋[i], γ₊[i])`.
    Diagonal,
}

impl SweepOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepOrder::MinusFirst => "minus_first",
            SweepOrder::PlusFirst => "plus_first",
            SweepOrder::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan<T> {
    /// Template; its γ values are replaced along the schedules.
    pub model: ModelParams<T>,
    pub dim: usize,
    pub l_list: Vec<usize>,
    pub gamma_minus_schedule: Vec<T>,
    pub gamma_plus_schedule: Vec<T>,
    pub orders: Vec<SweepOrder>,
    pub beta: T,
    pub boundary: Boundary,
    pub dimension_cap: usize,
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub beta: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub boundary: Boundary,
    pub pressure: f64,
    pub density: f64,
    pub runtime_ms: u64,
    pub config_hash: String,
}

impl SweepRecord {
    /// Identity of a record for deduplication and resumption.
    pub fn key(&self) -> (String, usize, usize, u64, u64, u64, Boundary) {
        (
            self.config_hash.clone(),
            self.d,
            self.l,
            self.beta.to_bits(),
            self.gamma_minus.to_bits(),
            self.gamma_plus.to_bits(),
            self.boundary,
        )
    }

    /// Equality ignoring the wall-clock column.
    pub fn same_result(&self, other: &SweepRecord) -> bool {
        SweepRecord {
            runtime_ms: 0,
            ..self.clone()
        } == SweepRecord {
            runtime_ms: 0,
            ..other.clone()
        }
    }
}

/// A record that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub l: usize,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    /// Records taken over from the previous run instead of being recomputed.
    pub reused: usize,
}

fn strictly_decreasing<T: Real>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

impl<T: Real> SweepPlan<T> {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.l_list.is_empty() {
            errors.push("L list is empty".to_string());
        }
        for (name, s) in [
            ("gamma_minus", &self.gamma_minus_schedule),
            ("gamma_plus", &self.gamma_plus_schedule),
        ] {
            if s.is_empty() {
                errors.push(format!("{name} schedule is empty"));
            }
            if !strictly_decreasing(s) {
                errors.push(format!("{name} schedule must be strictly decreasing"));
            }
            if s.iter().any(|g| !(*g > T::zero() && *g < T::one())) {
                errors.push(format!("{name} values must lie in the open interval (0, 1)"));
            }
        }
        if self.orders.contains(&SweepOrder::Diagonal)
            && self.gamma_minus_schedule.len() != self.gamma_plus_schedule.len()
        {
            errors.push("diagonal order needs schedules of equal length".to_string());
        }
        if self.orders.is_empty() {
            errors.push("no order of limits selected".to_string());
        }
        if !(self.beta > T::zero() && self.beta.is_finite()) {
            errors.push("beta must be positive".to_string());
        }
        if self.model.hopping.dim() != self.dim {
            errors.push("model dimension differs from plan dimension".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(KacError::Config(errors))
        }
    }

    /// `(γ₋, γ₊)` pairs of one protocol, in schedule order.
    pub fn pairs(&self, order: SweepOrder) -> Vec<(T, T)> {
        let (gm, gp) = (&self.gamma_minus_schedule, &self.gamma_plus_schedule);
        match order {
            SweepOrder::MinusFirst => gp
                .iter()
                .flat_map(|p| gm.iter().map(move |m| (*m, *p)))
                .collect(),
            SweepOrder::PlusFirst => gm
                .iter()
                .flat_map(|m| gp.iter().map(move |p| (*m, *p)))
                .collect(),
            SweepOrder::Diagonal => gm.iter().copied().zip(gp.iter().copied()).collect(),
        }
    }

    /// Every distinct `(L, γ₋, γ₊)` task, L outermost, first-seen order within L.
    pub fn tasks(&self) -> Vec<(usize, T, T)> {
        let mut out = Vec::new();
        for &l in &self.l_list {
            let mut seen = Vec::new();
            for order in &self.orders {
                for pair in self.pairs(*order) {
                    if !seen.contains(&pair) {
                        seen.push(pair);
                        out.push((l, pair.0, pair.1));
                    }
                }
            }
        }
        out
    }

    fn model_at(&self, gm: T, gp: T) -> ModelParams<T> {
        ModelParams {
            beta: self.beta,
            gamma_minus: gm,
            gamma_plus: gp,
            ..self.model.clone()
        }
    }
}

fn compute_record<T: Real>(plan: &SweepPlan<T>, l: usize, gm: T, gp: T, hash: &str) -> Result<SweepRecord> {
    let start = Instant::now();
    let lbox = LatticeBox::new(plan.dim, l, plan.boundary)?;
    let h = build_kac_hamiltonian_with_cap(&plan.model_at(gm, gp), &lbox, plan.dimension_cap)?;
    let obs = h.gibbs_observables(plan.beta)?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    if !obs.pressure.is_finite() {
        return Err(KacError::domain("pressure is not finite"));
    }
    Ok(SweepRecord {
        d: plan.dim,
        l,
        beta: f(plan.beta),
        gamma_minus: f(gm),
        gamma_plus: f(gp),
        boundary: plan.boundary,
        pressure: f(obs.pressure),
        density: f(obs.density),
        runtime_ms: start.elapsed().as_millis() as u64,
        config_hash: hash.to_string(),
    })
}

/// Runs every task of the plan. Records already present in `existing` with the
/// same key are reused. `sink` receives each new record in deterministic order,
/// one box size at a time, so partial progress can be persisted.
pub fn run_sweep<T: Real>(
    plan: &SweepPlan<T>,
    config_hash: &str,
    existing: &[SweepRecord],
    mut sink: impl FnMut(&SweepRecord) -> Result<()>,
) -> Result<SweepOutcome> {
    plan.validate()?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let known: BTreeMap<_, &SweepRecord> = existing.iter().map(|r| (r.key(), r)).collect();
    let mut outcome = SweepOutcome::default();
    for &l in &plan.l_list {
        let tasks: Vec<(usize, T, T)> = plan.tasks().into_iter().filter(|t| t.0 == l).collect();
        let results: Vec<(usize, T, T, Option<SweepRecord>, Option<Result<SweepRecord>>)> = tasks
            .into_par_iter()
            .map(|(l, gm, gp)| {
                let key = (
                    config_hash.to_string(),
                    plan.dim,
                    l,
                    f(plan.beta).to_bits(),
                    f(gm).to_bits(),
                    f(gp).to_bits(),
                    plan.boundary,
                );
                match known.get(&key) {
                    Some(r) => (l, gm, gp, Some((*r).clone()), None),
                    None => (l, gm, gp, None, Some(compute_record(plan, l, gm, gp, config_hash))),
                }
            })
            .collect();
        for (l, gm, gp, reused, fresh) in results {
            match (reused, fresh) {
                (Some(r), _) => {
                    outcome.reused += 1;
                    outcome.records.push(r);
                }
                (None, Some(Ok(r))) => {
                    sink(&r)?;
                    outcome.records.push(r);
                }
                (None, Some(Err(e))) => {
                    log::debug!("record L={l} failed: {e}");
                    outcome.failures.push(SweepFailure {
                        l,
                        gamma_minus: f(gm),
                        gamma_plus: f(gp),
                        error: e.to_string(),
                    });
                }
                (None, None) => unreachable!("every task yields a record or an error"),
            }
        }
    }
    Ok(outcome)
}

/// Convenience wrapper without persistence.
pub fn run_sweep_in_memory<T: Real>(plan: &SweepPlan<T>, config_hash: &str) -> Result<SweepOutcome> {
    run_sweep(plan, config_hash, &[], |_| Ok(()))
}

/// Energy density of the repulsive term in the translation-invariant product
/// state where each spin mode is occupied independently with probability `n`:
/// `γ^d f(0)⟨N₀²⟩ + (2n)² Σ_{z≠0} γ^d f(γz)` with `⟨N₀²⟩ = 4n² + 2n(1−n)`.
pub fn product_state_energy_density<T: Real>(
    p: &PairPotential<T>,
    gamma: T,
    n: T,
    trunc: &TruncationSpec<T>,
) -> Result<T> {
    if !(n >= T::zero() && n <= T::one()) {
        return Err(KacError::domain("density per spin must lie in [0, 1]"));
    }
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(KacError::domain("gamma must lie in (0, 1)"));
    }
    if p.is_zero() || n == T::zero() {
        return Ok(T::zero());
    }
    let d = p.dim();
    // the lattice series must be absolutely summable within the declared bound
    let bound = series_tail_bound(p, gamma)?;
    if !bound.is_finite() {
        return Err(KacError::Accuracy {
            message: "lattice series bound is not finite".into(),
            estimate: f64::INFINITY,
            tolerance: trunc.tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let zero = vec![T::zero(); d];
    let total = lattice_sum(p, gamma, &zero, trunc)?;
    let onsite = gamma.powi(d as i32) * p.eval(&zero)?;
    let two_n = lit::<T>(2.0) * n;
    let second_moment = two_n * two_n + two_n * (T::one() - n);
    Ok(onsite * second_moment + two_n * two_n * (total - onsite))
}

/// Pressure trend of one protocol at the largest box and its comparison with
/// the mean-field game values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub order: SweepOrder,
    pub l_max: usize,
    pub l_prev: usize,
    /// `(γ₋, γ₊, pressure)` at `l_max` in schedule order.
    pub trend: Vec<(f64, f64, f64)>,
    pub last_value: f64,
    pub extrapolated: f64,
    pub p_sharp: f64,
    pub p_flat: f64,
    pub distance_sharp: f64,
    pub distance_flat: f64,
    /// Largest `|p(l_max) − p(l_prev)|` over the matching schedule points.
    pub delta_fs: f64,
    pub inside: bool,
}

/// Least-squares line in `γ²` through the last three points, evaluated at 0.
pub fn extrapolate_gamma_squared(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(KacError::InsufficientData(format!(
            "extrapolation needs 3 schedule points, got {}",
            points.len()
        )));
    }
    let tail = &points[points.len() - 3..];
    let xs: Vec<f64> = tail.iter().map(|(g, _)| g * g).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, p)| *p).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Ok(my);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(my - sxy / sxx * mx)
}

/// Builds the report for one protocol. The iterated limit is extrapolated in
/// the inner variable for each outer value and then along the outer schedule.
pub fn limit_report<T: Real>(
    plan: &SweepPlan<T>,
    records: &[SweepRecord],
    order: SweepOrder,
    game: &GameResult<T>,
) -> Result<LimitReport> {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut ls: Vec<usize> = records.iter().map(|r| r.l).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 2 {
        return Err(KacError::InsufficientData(
            "the finite-size budget needs records at two box sizes".into(),
        ));
    }
    let l_max = ls[ls.len() - 1];
    let l_prev = ls[ls.len() - 2];
    let lookup = |l: usize, gm: f64, gp: f64| -> Result<f64> {
        records
            .iter()
            .find(|r| {
                r.l == l
                    && r.gamma_minus.to_bits() == gm.to_bits()
                    && r.gamma_plus.to_bits() == gp.to_bits()
            })
            .map(|r| r.pressure)
            .ok_or_else(|| {
                KacError::MissingRecords(format!("no record for L={l}, γ₋={gm}, γ₊={gp}"))
            })
    };
    let pairs: Vec<(f64, f64)> = plan
        .pairs(order)
        .into_iter()
        .map(|(a, b)| (f(a), f(b)))
        .collect();
    let mut trend = Vec::with_capacity(pairs.len());
    let mut delta_fs: f64 = 0.0;
    for (gm, gp) in &pairs {
        let p = lookup(l_max, *gm, *gp)?;
        let q = lookup(l_prev, *gm, *gp)?;
        delta_fs = delta_fs.max((p - q).abs());
        trend.push((*gm, *gp, p));
    }
    let gm: Vec<f64> = plan.gamma_minus_schedule.iter().map(|x| f(*x)).collect();
    let gp: Vec<f64> = plan.gamma_plus_schedule.iter().map(|x| f(*x)).collect();
    let extrapolated = match order {
        SweepOrder::Diagonal => {
            // along the diagonal γ₋ and γ₊ shrink together; use γ₋ as the abscissa
            let pts: Vec<(f64, f64)> = trend.iter().map(|(a, _, p)| (*a, *p)).collect();
            extrapolate_gamma_squared(&pts)?
        }
        SweepOrder::MinusFirst | SweepOrder::PlusFirst => {
            let (outer, inner) = if order == SweepOrder::MinusFirst {
                (&gp, &gm)
            } else {
                (&gm, &gp)
            };
            let mut limits = Vec::with_capacity(outer.len());
            for o in outer {
                let pts: Vec<(f64, f64)> = inner
                    .iter()
                    .map(|i| {
                        let (m, p) = if order == SweepOrder::MinusFirst {
                            (*i, *o)
                        } else {
                            (*o, *i)
                        };
                        lookup(l_max, m, p).map(|v| (*i, v))
                    })
                    .collect::<Result<_>>()?;
                limits.push((*o, extrapolate_gamma_squared(&pts)?));
            }
            extrapolate_gamma_squared(&limits)?
        }
    };
    let last_value = trend.last().map(|t| t.2).unwrap_or(f64::NAN);
    let (ps, pf) = (f(game.p_sharp), f(game.p_flat));
    let inside = extrapolated >= ps - delta_fs && extrapolated <= pf + delta_fs;
    Ok(LimitReport {
        order,
        l_max,
        l_prev,
        trend,
        last_value,
        extrapolated,
        p_sharp: ps,
        p_flat: pf,
        distance_sharp: extrapolated - ps,
        distance_flat: extrapolated - pf,
        delta_fs,
        inside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_DIMENSION_CAP;
    use crate::lattice::{HoppingKernel, KacImages};
    use crate::potential::Role;

    fn plan(f_plus: PairPotential<f64>, f_minus: PairPotential<f64>) -> SweepPlan<f64> {
        SweepPlan {
            model: ModelParams {
                beta: 1.0,
                hopping: HoppingKernel::laplacian(1),
                f_plus,
                f_minus,
                gamma_plus: 0.5,
                gamma_minus: 0.5,
                include_onsite_correction: false,
                kac_images: KacImages::Full,
            },
            dim: 1,
            l_list: vec![0, 1],
            gamma_minus_schedule: vec![0.4, 0.2, 0.1],
            gamma_plus_schedule: vec![0.4, 0.2, 0.1],
            orders: vec![SweepOrder::MinusFirst, SweepOrder::PlusFirst],
            beta: 1.0,
            boundary: Boundary::Periodic,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }

    #[test]
    fn pairs_follow_protocols() {
        let z = PairPotential::zero(1, Role::Repulsive);
        let p = plan(z.clone(), z.with_role(Role::Attractive));
        let mf = p.pairs(SweepOrder::MinusFirst);
        assert_eq!(mf[0], (0.4, 0.4));
        assert_eq!(mf[1], (0.2, 0.4));
        let pf = p.pairs(SweepOrder::PlusFirst);
        assert_eq!(pf[1], (0.4, 0.2));
        assert_eq!(p.tasks().len(), 18);
    }

    #[test]
    fn zero_potentials_give_hopping_pressure() {
        let z = PairPotential::zero(1, Role::Repulsive);
        let p = plan(z.clone(), z.with_role(Role::Attractive));
        let out = run_sweep_in_memory(&p, "h").unwrap();
        assert!(out.failures.is_empty());
        for r in &out.records {
            let same_l: Vec<f64> = out
                .records
                .iter()
                .filter(|s| s.l == r.l)
                .map(|s| s.pressure)
                .collect();
            assert!(same_l.iter().all(|v| *v == r.pressure));
        }
        // L = 0 periodic Laplacian has no net on-site energy
        let r0 = out.records.iter().find(|r| r.l == 0).unwrap();
        assert!((r0.pressure - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn resumption_reuses_records() {
        let z = PairPotential::zero(1, Role::Repulsive);
        let p = plan(z.clone(), z.with_role(Role::Attractive));
        let first = run_sweep_in_memory(&p, "h").unwrap();
        let mut fresh = 0;
        let second = run_sweep(&p, "h", &first.records, |_| {
            fresh += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(fresh, 0);
        assert_eq!(second.reused, first.records.len());
    }

    #[test]
    fn capacity_failure_is_per_record() {
        let z = PairPotential::zero(1, Role::Repulsive);
        let mut p = plan(z.clone(), z.with_role(Role::Attractive));
        p.l_list = vec![0, 5];
        let out = run_sweep_in_memory(&p, "h").unwrap();
        assert_eq!(out.records.len(), 9);
        assert_eq!(out.failures.len(), 9);
        assert!(out.failures[0].error.contains("capacity"));
    }

    #[test]
    fn product_state_examples() {
        let g = PairPotential::plain_gaussian(1.0, 1, Role::Repulsive).unwrap();
        let t = TruncationSpec::default();
        assert_eq!(product_state_energy_density(&g, 0.3, 0.0, &t).unwrap(), 0.0);
        let z = PairPotential::<f64>::zero(1, Role::Repulsive);
        assert_eq!(product_state_energy_density(&z, 0.3, 0.5, &t).unwrap(), 0.0);
        // completely filled modes have no on-site fluctuation
        let full = product_state_energy_density(&g, 0.1, 1.0, &t).unwrap();
        assert!((full - 4.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn extrapolation_is_exact_on_lines() {
        let pts: Vec<(f64, f64)> = [0.4, 0.2, 0.1]
            .iter()
            .map(|g| (*g, 1.5 - 2.0 * g * g))
            .collect();
        assert!((extrapolate_gamma_squared(&pts).unwrap() - 1.5).abs() < 1e-14);
        assert!(extrapolate_gamma_squared(&pts[..2]).is_err());
    }
}
