//! Exact diagonalization on the spin-1/2 fermionic Fock space of a box.
//!
//! Modes are numbered with all spin-up modes first (`site`) followed by all
//! spin-down modes (`sites + site`); a basis state is the occupation bitstring
//! and the Jordan–Wigner sign of `a_j` is `(-1)^{#occupied modes below j}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{KacError, Result};
use crate::lattice::{kac_coupling_matrix, LatticeBox, MeanFieldParams, ModelParams};
use crate::scalar::{cnt, lit, Real};

pub const DEFAULT_DIMENSION_CAP: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

/// Quantity used to split an operator into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conservation {
    /// `N↑` and `N↓` separately, equivalently `(N, S_z)`.
    NumberAndSpin,
    /// `N↑ - N↓` only; pairing terms move `N` by two.
    Spin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectorKey {
    Number { up: u32, down: u32 },
    Spin { sz: i32 },
}

/// Occupation-number basis of `4^{|Λ|}` states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    sites: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(lbox: &LatticeBox) -> Result<Self> {
        Self::with_cap(lbox.len(), DEFAULT_DIMENSION_CAP)
    }

    /// Basis for `sites` sites, refusing dimensions above `cap`.
    pub fn with_cap(sites: usize, cap: usize) -> Result<Self> {
        let dim = 4usize
            .checked_pow(sites as u32)
            .filter(|_| 2 * sites < 63)
            .unwrap_or(usize::MAX);
        if dim > cap {
            return Err(KacError::Capacity {
                dimension: dim,
                cap,
            });
        }
        Ok(FockBasis { sites, dim })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn modes(&self) -> usize {
        2 * self.sites
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        match spin {
            Spin::Up => site,
            Spin::Down => self.sites + site,
        }
    }

    fn spin_counts(&self, state: u64) -> (u32, u32) {
        let up_mask = (1u64 << self.sites) - 1;
        (
            (state & up_mask).count_ones(),
            (state >> self.sites).count_ones(),
        )
    }

    pub fn sector_key(&self, state: u64, conservation: Conservation) -> SectorKey {
        let (up, down) = self.spin_counts(state);
        match conservation {
            Conservation::NumberAndSpin => SectorKey::Number { up, down },
            Conservation::Spin => SectorKey::Spin {
                sz: up as i32 - down as i32,
            },
        }
    }

    /// Sectors in key order, each listing its basis states in increasing order.
    pub fn sectors(&self, conservation: Conservation) -> Vec<(SectorKey, Vec<u64>)> {
        let mut map: BTreeMap<SectorKey, Vec<u64>> = BTreeMap::new();
        for s in 0..self.dim as u64 {
            map.entry(self.sector_key(s, conservation))
                .or_default()
                .push(s);
        }
        map.into_iter().collect()
    }

    pub fn particle_number(&self, state: u64) -> u32 {
        state.count_ones()
    }

    /// Dense matrix of `a_mode` on the full space.
    pub fn annihilation<T: Real>(&self, mode: usize) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for s in 0..self.dim as u64 {
            if let Some((sign, t)) = apply_ladder(&[Ladder::annihilate(mode)], s) {
                m[(t as usize, s as usize)] = sign_value(sign);
            }
        }
        m
    }

    /// Dense matrix of `a†_mode` on the full space.
    pub fn creation<T: Real>(&self, mode: usize) -> DMatrix<T> {
        self.annihilation::<T>(mode).transpose()
    }
}

/// One creation or annihilation operator in a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }
}

/// Applies `ops[0] ops[1] … ops[n-1]` to a basis state (rightmost first).
/// Returns `(negative, image)` or `None` when the product annihilates it.
pub fn apply_ladder(ops: &[Ladder], mut state: u64) -> Option<(bool, u64)> {
    let mut negative = false;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.mode;
        let occupied = state & bit != 0;
        if op.dagger == occupied {
            return None;
        }
        if (state & (bit - 1)).count_ones() % 2 == 1 {
            negative = !negative;
        }
        state ^= bit;
    }
    Some((negative, state))
}

fn sign_value<T: Real>(negative: bool) -> T {
    if negative {
        -T::one()
    } else {
        T::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Term<T> {
    coef: Complex<T>,
    ops: Vec<Ladder>,
}

/// Collects a Hamiltonian as a diagonal part plus ladder-operator products.
#[derive(Debug, Clone)]
pub struct OperatorBuilder<T> {
    basis: FockBasis,
    conservation: Conservation,
    diagonal: Vec<T>,
    terms: Vec<Term<T>>,
}

impl<T: Real> OperatorBuilder<T> {
    pub fn new(basis: FockBasis, conservation: Conservation) -> Self {
        let dim = basis.dimension();
        OperatorBuilder {
            basis,
            conservation,
            diagonal: vec![T::zero(); dim],
            terms: Vec::new(),
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Adds `f(state)` to every diagonal entry.
    pub fn add_diagonal<F: Fn(u64) -> T>(&mut self, f: F) {
        for (s, d) in self.diagonal.iter_mut().enumerate() {
            *d += f(s as u64);
        }
    }

    /// Adds `coef · ops[0] ops[1] …`. Zero coefficients are dropped.
    pub fn add_term(&mut self, coef: Complex<T>, ops: Vec<Ladder>) {
        if coef != Complex::new(T::zero(), T::zero()) {
            self.terms.push(Term { coef, ops });
        }
    }

    pub fn add_real_term(&mut self, coef: T, ops: Vec<Ladder>) {
        self.add_term(Complex::new(coef, T::zero()), ops);
    }

    /// `Σ_{x,y,s} t[x][y] a†_{x,s} a_{y,s}`.
    pub fn add_one_body(&mut self, t: &DMatrix<T>) {
        let n = self.basis.sites();
        for x in 0..n {
            for y in 0..n {
                let v = t[(x, y)];
                if v == T::zero() {
                    continue;
                }
                if x == y {
                    self.add_diagonal(|s| {
                        let up = (s >> x) & 1;
                        let down = (s >> (n + x)) & 1;
                        v * cnt((up + down) as usize)
                    });
                    continue;
                }
                for spin in [Spin::Up, Spin::Down] {
                    let (mx, my) = (self.basis.mode(x, spin), self.basis.mode(y, spin));
                    self.add_real_term(v, vec![Ladder::create(mx), Ladder::annihilate(my)]);
                }
            }
        }
    }

    /// `Σ_{x,y} v[x][y] N_y N_x` with `N_x = n_{x↑} + n_{x↓}`.
    pub fn add_density_density(&mut self, v: &DMatrix<T>) {
        let n = self.basis.sites();
        self.add_diagonal(|s| {
            let occ: Vec<T> = (0..n)
                .map(|x| cnt((((s >> x) & 1) + ((s >> (n + x)) & 1)) as usize))
                .collect();
            let mut e = T::zero();
            for x in 0..n {
                if occ[x] == T::zero() {
                    continue;
                }
                for y in 0..n {
                    e += v[(x, y)] * occ[x] * occ[y];
                }
            }
            e
        });
    }

    /// `scale · Σ_{x,y} v[x][y] a†_{y↑} a†_{y↓} a_{x↓} a_{x↑}`.
    pub fn add_pair_hopping(&mut self, v: &DMatrix<T>, scale: T) {
        let n = self.basis.sites();
        for x in 0..n {
            for y in 0..n {
                let c = scale * v[(x, y)];
                if c == T::zero() {
                    continue;
                }
                if x == y {
                    // a†↑a†↓a↓a↑ = n↑n↓ on one site
                    self.add_diagonal(|s| {
                        if (s >> x) & 1 == 1 && (s >> (n + x)) & 1 == 1 {
                            c
                        } else {
                            T::zero()
                        }
                    });
                    continue;
                }
                self.add_real_term(
                    c,
                    vec![
                        Ladder::create(self.basis.mode(y, Spin::Up)),
                        Ladder::create(self.basis.mode(y, Spin::Down)),
                        Ladder::annihilate(self.basis.mode(x, Spin::Down)),
                        Ladder::annihilate(self.basis.mode(x, Spin::Up)),
                    ],
                );
            }
        }
    }

    /// Assembles the block matrices.
    pub fn build(self) -> Result<FockOperator<T>> {
        let complex = self.terms.iter().any(|t| t.coef.im != T::zero());
        let sectors = self.basis.sectors(self.conservation);
        let mut position = vec![0usize; self.basis.dimension()];
        for (_, states) in &sectors {
            for (i, s) in states.iter().enumerate() {
                position[*s as usize] = i;
            }
        }
        let mut blocks = Vec::with_capacity(sectors.len());
        for (key, states) in sectors {
            let n = states.len();
            let mut m = DMatrix::<Complex<T>>::zeros(n, n);
            for (col, &s) in states.iter().enumerate() {
                m[(col, col)].re += self.diagonal[s as usize];
                for term in &self.terms {
                    if let Some((negative, t)) = apply_ladder(&term.ops, s) {
                        if self.basis.sector_key(t, self.conservation) != key {
                            return Err(KacError::domain(
                                "term does not conserve the declared quantum numbers",
                            ));
                        }
                        let row = position[t as usize];
                        let c = if negative { -term.coef } else { term.coef };
                        m[(row, col)] += c;
                    }
                }
            }
            let matrix = if complex {
                BlockMatrix::Complex(m)
            } else {
                BlockMatrix::Real(m.map(|z| z.re))
            };
            blocks.push(Block {
                key,
                states,
                matrix,
            });
        }
        FockOperator::from_blocks(self.basis, self.conservation, blocks)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockMatrix<T: Real> {
    Real(DMatrix<T>),
    Complex(DMatrix<Complex<T>>),
}

impl<T: Real> BlockMatrix<T> {
    fn to_complex(&self) -> DMatrix<Complex<T>> {
        match self {
            BlockMatrix::Real(m) => m.map(|x| Complex::new(x, T::zero())),
            BlockMatrix::Complex(m) => m.clone(),
        }
    }

    fn hermiticity_defect(&self) -> T {
        let n = match self {
            BlockMatrix::Real(m) => m.nrows(),
            BlockMatrix::Complex(m) => m.nrows(),
        };
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..=i {
                let d = match self {
                    BlockMatrix::Real(m) => (m[(i, j)] - m[(j, i)]).abs(),
                    BlockMatrix::Complex(m) => (m[(i, j)] - m[(j, i)].conj()).norm(),
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    fn eigenvalues(&self) -> Vec<T> {
        match self {
            BlockMatrix::Real(m) => T::eigvals_symmetric(m.clone()),
            BlockMatrix::Complex(m) => T::eigvals_hermitian(m.clone()),
        }
    }

    fn eigh(&self) -> (Vec<T>, DMatrix<Complex<T>>) {
        match self {
            BlockMatrix::Real(m) => {
                let (v, u) = T::eigh_symmetric(m.clone());
                (v, u.map(|x| Complex::new(x, T::zero())))
            }
            BlockMatrix::Complex(m) => T::eigh_hermitian(m.clone()),
        }
    }
}

/// One symmetry sector of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Block<T: Real> {
    pub key: SectorKey,
    pub states: Vec<u64>,
    pub matrix: BlockMatrix<T>,
}

/// Block-diagonal operator on a Fock space; immutable once assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T: Real> {
    basis: FockBasis,
    conservation: Conservation,
    blocks: Vec<Block<T>>,
    hermitian: bool,
}

/// Thermal expectations per site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsObservables<T> {
    pub pressure: T,
    pub density: T,
    pub pair_amplitude: Complex<T>,
    pub energy_per_site: T,
}

impl<T: Real> FockOperator<T> {
    fn from_blocks(
        basis: FockBasis,
        conservation: Conservation,
        blocks: Vec<Block<T>>,
    ) -> Result<Self> {
        let mut op = FockOperator {
            basis,
            conservation,
            blocks,
            hermitian: false,
        };
        op.hermitian = op.hermiticity_defect() <= lit::<T>(1e-14) * (T::one() + op.max_abs());
        Ok(op)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn conservation(&self) -> Conservation {
        self.conservation
    }

    pub fn blocks(&self) -> &[Block<T>] {
        &self.blocks
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_defect(&self) -> T {
        self.blocks
            .iter()
            .map(|b| b.matrix.hermiticity_defect())
            .fold(T::zero(), T::max)
    }

    fn max_abs(&self) -> T {
        self.blocks
            .iter()
            .map(|b| match &b.matrix {
                BlockMatrix::Real(m) => m.iter().fold(T::zero(), |a, x| a.max(x.abs())),
                BlockMatrix::Complex(m) => m.iter().fold(T::zero(), |a, x| a.max(x.norm())),
            })
            .fold(T::zero(), T::max)
    }

    /// Sum of the block dimensions; always the Fock dimension.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.states.len()).sum()
    }

    /// Dense matrix on the full space in basis-state order.
    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let dim = self.basis.dimension();
        let mut full = DMatrix::zeros(dim, dim);
        for b in &self.blocks {
            let m = b.matrix.to_complex();
            for (i, si) in b.states.iter().enumerate() {
                for (j, sj) in b.states.iter().enumerate() {
                    full[(*si as usize, *sj as usize)] = m[(i, j)];
                }
            }
        }
        full
    }

    /// `self + lambda · other` for operators sharing basis and blocking.
    pub fn add_scaled(&self, other: &FockOperator<T>, lambda: T) -> Result<Self> {
        if self.basis != other.basis || self.conservation != other.conservation {
            return Err(KacError::domain("operators live on different block structures"));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let matrix = match (&a.matrix, &b.matrix) {
                    (BlockMatrix::Real(x), BlockMatrix::Real(y)) => {
                        BlockMatrix::Real(x + y * lambda)
                    }
                    _ => BlockMatrix::Complex(
                        a.matrix.to_complex()
                            + b.matrix.to_complex() * Complex::new(lambda, T::zero()),
                    ),
                };
                Block {
                    key: a.key,
                    states: a.states.clone(),
                    matrix,
                }
            })
            .collect();
        Self::from_blocks(self.basis.clone(), self.conservation, blocks)
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            Err(KacError::domain(format!(
                "operator is not Hermitian (defect {:e})",
                self.hermiticity_defect()
            )))
        }
    }

    /// All eigenvalues, ascending within each block, blocks in key order.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        self.require_hermitian()?;
        let per_block: Vec<Vec<T>> = self
            .blocks
            .par_iter()
            .map(|b| b.matrix.eigenvalues())
            .collect();
        Ok(per_block.into_iter().flatten().collect())
    }

    /// `(1/(β|Λ|)) ln Tr e^{-βH}`.
    pub fn pressure(&self, beta: T) -> Result<T> {
        check_beta(beta)?;
        let e = self.eigenvalues()?;
        Ok(log_sum_exp(e.iter().map(|x| -beta * *x)) / (beta * cnt(self.basis.sites())))
    }

    /// Pressure, density, pair amplitude and energy per site of the Gibbs state.
    pub fn gibbs_observables(&self, beta: T) -> Result<GibbsObservables<T>> {
        check_beta(beta)?;
        self.require_hermitian()?;
        let n = self.basis.sites();
        let pairs = self.conservation == Conservation::Spin;
        let spectra: Vec<(Vec<T>, Option<DMatrix<Complex<T>>>)> = self
            .blocks
            .par_iter()
            .map(|b| {
                if pairs {
                    let (v, u) = b.matrix.eigh();
                    (v, Some(u))
                } else {
                    (b.matrix.eigenvalues(), None)
                }
            })
            .collect();
        let lse = log_sum_exp(
            spectra
                .iter()
                .flat_map(|(v, _)| v.iter().map(|x| -beta * *x)),
        );
        let sites: T = cnt(n);
        let mut energy = T::zero();
        let mut number = T::zero();
        let mut pair = Complex::new(T::zero(), T::zero());
        for (block, (values, vectors)) in self.blocks.iter().zip(&spectra) {
            let weights: Vec<T> = values.iter().map(|e| (-beta * *e - lse).exp()).collect();
            for (w, e) in weights.iter().zip(values) {
                energy += *w * *e;
            }
            match vectors {
                None => {
                    let count = cnt::<T>(self.basis.particle_number(block.states[0]) as usize);
                    number += weights.iter().copied().sum::<T>() * count;
                }
                Some(u) => {
                    let counts: Vec<T> = block
                        .states
                        .iter()
                        .map(|s| cnt(self.basis.particle_number(*s) as usize))
                        .collect();
                    let pair_op = self.pair_block(block);
                    for (i, w) in weights.iter().enumerate() {
                        if *w == T::zero() {
                            continue;
                        }
                        let col = u.column(i);
                        let mut nbar = T::zero();
                        for (c, z) in counts.iter().zip(col.iter()) {
                            nbar += *c * z.norm_sqr();
                        }
                        number += *w * nbar;
                        let image = &pair_op * col;
                        let amp: Complex<T> =
                            col.iter().zip(image.iter()).map(|(a, b)| a.conj() * *b).sum();
                        pair += amp * *w;
                    }
                }
            }
        }
        Ok(GibbsObservables {
            pressure: lse / (beta * sites),
            density: number / sites,
            pair_amplitude: pair / sites,
            energy_per_site: energy / sites,
        })
    }

    /// `Σ_x a_{x↓} a_{x↑}` restricted to a spin block.
    fn pair_block(&self, block: &Block<T>) -> DMatrix<Complex<T>> {
        let n = block.states.len();
        let index: BTreeMap<u64, usize> =
            block.states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut m = DMatrix::zeros(n, n);
        for (col, s) in block.states.iter().enumerate() {
            for x in 0..self.basis.sites() {
                let ops = [
                    Ladder::annihilate(self.basis.mode(x, Spin::Down)),
                    Ladder::annihilate(self.basis.mode(x, Spin::Up)),
                ];
                if let Some((negative, t)) = apply_ladder(&ops, *s) {
                    if let Some(row) = index.get(&t) {
                        m[(*row, col)] += Complex::new(sign_value::<T>(negative), T::zero());
                    }
                }
            }
        }
        m
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta > T::zero() && beta.is_finite() {
        Ok(())
    } else {
        Err(KacError::domain("beta must be positive"))
    }
}

/// `ln Σ e^{x_i}` without overflow.
pub fn log_sum_exp<T: Real, I: Iterator<Item = T> + Clone>(xs: I) -> T {
    let max = xs.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<T>().ln()
}

/// `T − H₋ + H₊` on a box.
pub fn build_kac_hamiltonian<T: Real>(
    mp: &ModelParams<T>,
    lbox: &LatticeBox,
) -> Result<FockOperator<T>> {
    build_kac_hamiltonian_with_cap(mp, lbox, DEFAULT_DIMENSION_CAP)
}

pub fn build_kac_hamiltonian_with_cap<T: Real>(
    mp: &ModelParams<T>,
    lbox: &LatticeBox,
    cap: usize,
) -> Result<FockOperator<T>> {
    mp.validate()?;
    let basis = FockBasis::with_cap(lbox.len(), cap)?;
    let mut b = OperatorBuilder::new(basis, Conservation::NumberAndSpin);
    b.add_one_body(&mp.hopping.one_body_matrix(lbox));
    let v_plus = kac_coupling_matrix(&mp.f_plus, mp.gamma_plus, lbox, mp.kac_images)?;
    let v_minus = kac_coupling_matrix(&mp.f_minus, mp.gamma_minus, lbox, mp.kac_images)?;
    b.add_density_density(&v_plus);
    b.add_pair_hopping(&v_minus, -T::one());
    if mp.include_onsite_correction {
        let d = lbox.dim() as i32;
        let zero = vec![T::zero(); lbox.dim()];
        let half: T = lit(0.5);
        let mu = -half * mp.gamma_plus.powi(d) * mp.f_plus.eval(&zero)?;
        let u = half * mp.gamma_minus.powi(d) * mp.f_minus.eval(&zero)?;
        let n = lbox.len();
        b.add_diagonal(|s| {
            let mut e = T::zero();
            for x in 0..n {
                let up = (s >> x) & 1;
                let down = (s >> (n + x)) & 1;
                e += mu * cnt((up + down) as usize);
                if up == 1 && down == 1 {
                    e += u;
                }
            }
            e
        });
    }
    b.build()
}

/// `T + (η₊/|Λ|) Σ N_y N_x − (η₋/|Λ|) Σ a†_{y↑}a†_{y↓}a_{x↓}a_{x↑}`.
pub fn build_meanfield_hamiltonian<T: Real>(
    mf: &MeanFieldParams<T>,
    lbox: &LatticeBox,
) -> Result<FockOperator<T>> {
    mf.validate()?;
    let basis = FockBasis::new(lbox)?;
    let n = lbox.len();
    let sites: T = cnt(n);
    let mut b = OperatorBuilder::new(basis, Conservation::NumberAndSpin);
    b.add_one_body(&mf.hopping.one_body_matrix(lbox));
    b.add_density_density(&DMatrix::from_element(n, n, mf.eta_plus / sites));
    b.add_pair_hopping(&DMatrix::from_element(n, n, mf.eta_minus / sites), -T::one());
    b.build()
}

/// `T + η₊^{1/2}(c̄₊+c₊) Σ N_x − η₋^{1/2} Σ_x (c̄₋ a†_{x↑}a†_{x↓} + c₋ a_{x↓}a_{x↑})`.
pub fn build_approximating_hamiltonian<T: Real>(
    mf: &MeanFieldParams<T>,
    c_minus: Complex<T>,
    c_plus: Complex<T>,
    lbox: &LatticeBox,
) -> Result<FockOperator<T>> {
    mf.validate()?;
    let basis = FockBasis::new(lbox)?;
    let n = lbox.len();
    let mut b = OperatorBuilder::new(basis, Conservation::Spin);
    let mut t = mf.hopping.one_body_matrix(lbox);
    let shift = mf.eta_plus.sqrt() * lit::<T>(2.0) * c_plus.re;
    for x in 0..n {
        t[(x, x)] += shift;
    }
    b.add_one_body(&t);
    let g = c_minus * mf.eta_minus.sqrt();
    for x in 0..n {
        let up = b.basis().mode(x, Spin::Up);
        let down = b.basis().mode(x, Spin::Down);
        b.add_term(-g.conj(), vec![Ladder::create(up), Ladder::create(down)]);
        b.add_term(-g, vec![Ladder::annihilate(down), Ladder::annihilate(up)]);
    }
    b.build()
}
