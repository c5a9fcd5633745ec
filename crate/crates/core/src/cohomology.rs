//! First and second cohomology of a point group with coefficients in its
//! lattice `M = ℤ^d` and in `M/qM`.
//!
//! A 1-cocycle is stored by its values on the generators, as one vector of
//! length `k·d` (generator `i` occupies entries `i·d .. (i+1)·d`). The values
//! extend to all of `G` through `ζ(gh) = ζ(g) + g·ζ(h)` and
//! `ζ(x⁻¹) = −x⁻¹·ζ(x)`; a tuple is a cocycle iff this extension kills every
//! relator. Each cohomology group is then a quotient of two full-rank
//! lattices in `ℤ^{kd}`:
//!
//! * `H¹(G, M/q) = Z¹_q / (B¹ + qℤ^{kd})`,
//! * `H²(G, M) = Z¹_q / (B¹ + Z¹(G, M) + qℤ^{kd})` whenever the exponent of
//!   `H²(G, M)` divides `q`,
//!
//! where `Z¹_q` is the preimage of `Z¹(G, M/q)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::groups::{GroupError, PointGroup, Word};
use crate::linalg::{
    diagonalize_mod, invariant_factors_of, kernel_basis, lattice_membership, snf, FiniteQuotient, IntMatrix,
    LinalgError, ModMatrix,
};

/// Default bound on the number of matrix entries of the bar-cochain system.
pub const DEFAULT_BAR_BUDGET: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("modulus {0} is too small")]
    InvalidModulus(u64),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("matrix does not normalise the group modulo {0}")]
    DoesNotNormalize(u64),
    #[error("matrix is not invertible modulo {0}")]
    NotInvertible(u64),
    #[error("bar-cochain system needs {entries} entries, over the budget of {budget}")]
    BudgetExceeded { entries: u128, budget: usize },
    #[error("the cohomology group is trivial")]
    Trivial,
    #[error("cocycle has length {found}, expected {expected}")]
    CocycleLength { expected: usize, found: usize },
}

/// The working modulus used for H² when none is specified: `|G|`, or 4 when
/// `|G| ≤ 2` so that reduction stays faithful.
pub fn default_modulus(g: &PointGroup) -> u64 {
    if g.order() <= 2 {
        4
    } else {
        g.order() as u64
    }
}

/// A finitely presented group acting on `ℤ^d` through integer matrices
/// that satisfy its relators.
pub trait LatticeAction {
    fn dim(&self) -> usize;
    fn generators(&self) -> &[IntMatrix];
    fn generator_inverses(&self) -> &[IntMatrix];
    fn relators(&self) -> &[Word];
}

impl LatticeAction for PointGroup {
    fn dim(&self) -> usize {
        PointGroup::dim(self)
    }

    fn generators(&self) -> &[IntMatrix] {
        PointGroup::generators(self)
    }

    fn generator_inverses(&self) -> &[IntMatrix] {
        PointGroup::generator_inverses(self)
    }

    fn relators(&self) -> &[Word] {
        PointGroup::relators(self)
    }
}

/// An explicit lattice module: generator matrices, their inverses and the
/// relators they satisfy.
#[derive(Clone, Debug)]
pub struct LatticeModule {
    dim: usize,
    generators: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
    relators: Vec<Word>,
}

impl LatticeAction for LatticeModule {
    fn dim(&self) -> usize {
        self.dim
    }

    fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    fn generator_inverses(&self) -> &[IntMatrix] {
        &self.inverses
    }

    fn relators(&self) -> &[Word] {
        &self.relators
    }
}

impl LatticeModule {
    /// The cokernel `M'` of `M → ℤG ⊗ M`, `m ↦ Σ_h h ⊗ h⁻¹m`, written in the
    /// basis `h ⊗ e_i` with `h ≠ 1`. The middle term is induced, so
    /// `Hⁿ⁺¹(G, M) ≅ Hⁿ(G, M')` for `n ≥ 1`.
    pub fn dimension_shift(g: &PointGroup) -> Self {
        let n = g.order();
        let d = PointGroup::dim(g);
        let t = g.table();
        let elements = g.elements();
        let rank = d * (n - 1);
        let act = |x: usize| {
            let mut m = IntMatrix::zeros(rank, rank);
            for h in 1..n {
                let xh = t.mul(x, h);
                for i in 0..d {
                    let col = (h - 1) * d + i;
                    if xh == 0 {
                        for h2 in 1..n {
                            let back = &elements[t.inv(h2)];
                            for r in 0..d {
                                m[((h2 - 1) * d + r, col)] = -back[(r, i)].clone();
                            }
                        }
                    } else {
                        m[((xh - 1) * d + i, col)] = BigInt::one();
                    }
                }
            }
            m
        };
        let gens: Vec<usize> = (0..PointGroup::generators(g).len()).map(|i| g.generator_index(i)).collect();
        LatticeModule {
            dim: rank,
            generators: gens.iter().map(|&x| act(x)).collect(),
            inverses: gens.iter().map(|&x| act(t.inv(x))).collect(),
            relators: PointGroup::relators(g).to_vec(),
        }
    }
}

/// The `d × kd` integer matrix `C_w` with `ζ(w) = C_w·ζ` for every cocycle
/// `ζ` given by generator values (free differential of `w`).
pub fn word_differential<A: LatticeAction + ?Sized>(g: &A, w: &Word) -> IntMatrix {
    let d = g.dim();
    let k = g.generators().len();
    let mut out = IntMatrix::zeros(d, k * d);
    let mut prefix = IntMatrix::identity(d);
    for l in w.letters() {
        let gen = &g.generators()[l.generator];
        let coeff = if l.inverse {
            let inv = &g.generator_inverses()[l.generator];
            (&prefix * inv).neg()
        } else {
            prefix.clone()
        };
        for r in 0..d {
            for c in 0..d {
                out[(r, l.generator * d + c)] += &coeff[(r, c)];
            }
        }
        prefix = if l.inverse { &prefix * &g.generator_inverses()[l.generator] } else { &prefix * gen };
    }
    out
}

/// Stacked free differentials of the relators; its kernel mod `q` is
/// `Z¹(G, M/q)` and its integer kernel is `Z¹(G, M)`.
pub fn relator_matrix<A: LatticeAction + ?Sized>(g: &A) -> IntMatrix {
    let d = g.dim();
    let n = g.generators().len() * d;
    let blocks: Vec<IntMatrix> = g.relators().iter().map(|r| word_differential(g, r)).collect();
    if blocks.is_empty() {
        return IntMatrix::zeros(0, n);
    }
    IntMatrix::vstack(&blocks).expect("equal widths")
}

/// The `kd × d` matrix with blocks `g_i − I`, whose columns span `B¹`.
pub fn coboundary_matrix<A: LatticeAction + ?Sized>(g: &A) -> IntMatrix {
    let d = g.dim();
    let blocks: Vec<IntMatrix> =
        g.generators().iter().map(|x| x.sub(&IntMatrix::identity(d))).collect();
    if blocks.is_empty() {
        return IntMatrix::zeros(0, d);
    }
    IntMatrix::vstack(&blocks).expect("equal widths")
}

/// A subgroup of `(ℤ/q)^{kd}` of generator-value tuples, represented by its
/// full-rank preimage lattice in `ℤ^{kd}` (which contains `qℤ^{kd}`).
#[derive(Clone, Debug)]
pub struct CocycleSpace {
    modulus: u64,
    dim: usize,
    generator_count: usize,
    lattice: IntMatrix,
    relations: IntMatrix,
}

impl CocycleSpace {
    fn from_generators<A: LatticeAction + ?Sized>(g: &A, q: u64, gens: &IntMatrix) -> Self {
        let n = g.generators().len() * g.dim();
        let mut cols: Vec<IntMatrix> = Vec::new();
        if gens.cols() > 0 {
            cols.push(gens.clone());
        }
        cols.push(IntMatrix::identity(n).scale(&BigInt::from(q)));
        CocycleSpace {
            modulus: q,
            dim: g.dim(),
            generator_count: g.generators().len(),
            lattice: IntMatrix::hstack(&cols).expect("equal heights"),
            relations: relator_matrix(g),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim * self.generator_count
    }

    /// The relator equations the cocycles satisfy.
    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    /// Generating columns of the preimage lattice.
    pub fn lattice(&self) -> &IntMatrix {
        &self.lattice
    }

    /// Number of elements.
    pub fn size(&self) -> BigInt {
        let n = self.ambient_dim();
        if n == 0 {
            return BigInt::one();
        }
        let index: BigInt = snf(&self.lattice).invariant_factors().iter().product();
        num_traits::pow(BigInt::from(self.modulus), n) / index
    }

    /// Generators of the space, reduced mod `q`, zero vectors dropped.
    pub fn basis(&self) -> Vec<Vec<u64>> {
        let s = snf(&self.lattice);
        let n = self.ambient_dim();
        let mut out: Vec<Vec<u64>> = Vec::new();
        for j in 0..s.rank {
            let mut col: Vec<BigInt> = s.p.column(j);
            for x in col.iter_mut() {
                *x *= &s.s[(j, j)];
            }
            let v: Vec<u64> = col.iter().map(|x| reduce(x, self.modulus)).collect();
            if v.iter().any(|&x| x != 0) {
                out.push(v);
            }
        }
        debug_assert!(out.iter().all(|v| v.len() == n));
        out
    }

    pub fn contains(&self, z: &[u64]) -> bool {
        if z.len() != self.ambient_dim() {
            return false;
        }
        let x: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
        lattice_membership(&self.lattice, &x).is_some()
    }
}

fn reduce(x: &BigInt, q: u64) -> u64 {
    x.mod_floor(&BigInt::from(q)).to_u64().expect("residue")
}

fn check_modulus(q: u64, min: u64) -> Result<(), CohomologyError> {
    if q < min {
        return Err(CohomologyError::InvalidModulus(q));
    }
    Ok(())
}

/// Preimage generators of `Z¹(G, M/q)`: from `R = P·S·Q`, the solutions of
/// `R·z ≡ 0` are `Q⁻¹·y` with `y_i ∈ (q/gcd(d_i, q))ℤ` for `i < rank` and
/// `y_i` free beyond.
fn z1_mod_lattice<A: LatticeAction + ?Sized>(g: &A, q: u64) -> IntMatrix {
    let r = relator_matrix(g);
    let n = r.cols();
    let s = snf(&r);
    let qb = BigInt::from(q);
    let cols: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let step = if i < s.rank { &qb / s.s[(i, i)].gcd(&qb) } else { BigInt::one() };
            s.q_inv.column(i).into_iter().map(|x| x * &step).collect()
        })
        .collect();
    IntMatrix::from_columns(n, &cols)
}

pub fn z1_mod(g: &PointGroup, q: u64) -> Result<CocycleSpace, CohomologyError> {
    check_modulus(q, 2)?;
    Ok(CocycleSpace::from_generators(g, q, &z1_mod_lattice(g, q)))
}

pub fn b1_mod(g: &PointGroup, q: u64) -> Result<CocycleSpace, CohomologyError> {
    check_modulus(q, 2)?;
    Ok(CocycleSpace::from_generators(g, q, &coboundary_matrix(g)))
}

/// Reduction mod `q` of the integral cocycles `Z¹(G, M)`.
pub fn z1_integral_reduced(g: &PointGroup, q: u64) -> Result<CocycleSpace, CohomologyError> {
    check_modulus(q, 2)?;
    Ok(CocycleSpace::from_generators(g, q, &kernel_basis(&relator_matrix(g))))
}

/// A finite abelian cohomology group with, when it arises from 1-cocycles,
/// the means to move between classes and representative cocycles.
#[derive(Clone, Debug)]
pub struct CohomologyGroup {
    invariant_factors: Vec<u64>,
    modulus: u64,
    representatives: Vec<Vec<u64>>,
    quotient: Option<Arc<FiniteQuotient>>,
}

impl CohomologyGroup {
    fn from_quotient(quotient: FiniteQuotient, modulus: u64) -> Self {
        let invariant_factors = quotient.invariant_factors().iter().map(|d| d.to_u64().expect("small")).collect();
        let representatives =
            quotient.representatives().iter().map(|v| v.iter().map(|x| reduce(x, modulus)).collect()).collect();
        CohomologyGroup { invariant_factors, modulus, representatives, quotient: Some(Arc::new(quotient)) }
    }

    /// A group known only through its structure.
    pub fn from_invariants(orders: &[u64], modulus: u64) -> Self {
        CohomologyGroup {
            invariant_factors: invariant_factors_of(orders),
            modulus,
            representatives: Vec::new(),
            quotient: None,
        }
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }

    pub fn exponent(&self) -> u64 {
        self.invariant_factors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// One cocycle per invariant factor (empty for groups computed from
    /// bar cochains).
    pub fn representatives(&self) -> &[Vec<u64>] {
        &self.representatives
    }

    pub fn has_cocycles(&self) -> bool {
        self.quotient.is_some()
    }

    /// Coordinates of the class of a cocycle mod `q`, each reduced modulo its
    /// invariant factor; `None` if the tuple is not a cocycle.
    pub fn class_of(&self, cocycle: &[u64]) -> Option<Vec<u64>> {
        let quotient = self.quotient.as_ref()?;
        if cocycle.len() != quotient.ambient_dim() {
            return None;
        }
        let x: Vec<BigInt> = cocycle.iter().map(|&v| BigInt::from(v)).collect();
        quotient.coordinates(&x).map(|c| c.iter().map(|v| v.to_u64().expect("reduced")).collect())
    }

    /// `Σ cᵢ·repᵢ (mod q)`.
    pub fn cocycle_of(&self, coords: &[u64]) -> Vec<u64> {
        let n = self.quotient.as_ref().map_or(0, |q| q.ambient_dim());
        let mut out = vec![0u64; n];
        for (c, rep) in coords.iter().zip(&self.representatives) {
            for (o, r) in out.iter_mut().zip(rep) {
                *o = ((*o as u128 + *c as u128 * *r as u128) % self.modulus as u128) as u64;
            }
        }
        out
    }
}

fn quotient_of<A: LatticeAction + ?Sized>(g: &A, big: IntMatrix, small: &[IntMatrix], q: u64) -> Result<CohomologyGroup, CohomologyError> {
    let n = g.generators().len() * g.dim();
    if n == 0 {
        return Ok(CohomologyGroup::from_invariants(&[], q));
    }
    let mut cols: Vec<IntMatrix> = small.iter().filter(|m| m.cols() > 0).cloned().collect();
    cols.push(IntMatrix::identity(n).scale(&BigInt::from(q)));
    let small = IntMatrix::hstack(&cols)?;
    Ok(CohomologyGroup::from_quotient(FiniteQuotient::new(&big, &small)?, q))
}

/// `H¹(G, M/q) = Z¹(G, M/q) / B¹(G, M/q)`.
pub fn h1_mod(g: &PointGroup, q: u64) -> Result<CohomologyGroup, CohomologyError> {
    check_modulus(q, 2)?;
    quotient_of(g, z1_mod_lattice(g, q), &[coboundary_matrix(g)], q)
}

/// `H²(G, M)` as `Z¹(G, M/q) / (Z¹(G, M) + B¹(G, M/q))`, valid when the
/// exponent of `H²(G, M)` divides `q` (always so for multiples of `|G|`).
pub fn h2_lattice(g: &PointGroup, q: u64) -> Result<CohomologyGroup, CohomologyError> {
    check_modulus(q, 3)?;
    let integral = kernel_basis(&relator_matrix(g));
    quotient_of(g, z1_mod_lattice(g, q), &[coboundary_matrix(g), integral], q)
}

/// `H³(G, M)`, computed as `H²(G, M')` for the dimension-shifted module;
/// `q` must be a multiple of the exponent of `H³(G, M)` (such as `|G|`).
pub fn h3_lattice(g: &PointGroup, q: u64) -> Result<CohomologyGroup, CohomologyError> {
    check_modulus(q, 3)?;
    if g.order() <= 1 {
        return Ok(CohomologyGroup::from_invariants(&[], q));
    }
    let m = LatticeModule::dimension_shift(g);
    let integral = kernel_basis(&relator_matrix(&m));
    let h = quotient_of(&m, z1_mod_lattice(&m, q), &[coboundary_matrix(&m), integral], q)?;
    Ok(CohomologyGroup::from_invariants(h.invariant_factors(), q))
}

/// Invariant factors of `H²(G, M/q)` from the exact sequence
/// `0 → H²(G, M)/q → H²(G, M/q) → H³(G, M)[q] → 0`.
///
/// Only the order is canonical; the returned structure is that of the
/// direct sum of the outer terms.
pub fn h2_finite_coeffs_sequence(g: &PointGroup, q: u64) -> Result<CohomologyGroup, CohomologyError> {
    check_modulus(q, 2)?;
    let big = default_modulus(g).lcm(&q);
    let h2 = h2_lattice(g, big)?;
    let h3 = h3_lattice(g, big)?;
    let orders: Vec<u64> =
        h2.invariant_factors().iter().chain(h3.invariant_factors()).map(|&x| x.gcd(&q)).filter(|&x| x > 1).collect();
    Ok(CohomologyGroup::from_invariants(&orders, q))
}

/// `H²(G, M/q)` from normalised bar cochains on `(G∖{1})²`.
pub fn h2_finite_coeffs(g: &PointGroup, q: u64, budget: usize) -> Result<CohomologyGroup, CohomologyError> {
    check_modulus(q, 2)?;
    let n = g.order();
    let d = g.dim();
    if n <= 1 || d == 0 {
        return Ok(CohomologyGroup::from_invariants(&[], q));
    }
    let m = n - 1;
    let vars = m * m * d;
    let eqs = m * m * m * d;
    let entries = vars as u128 * eqs as u128;
    if entries > budget as u128 {
        return Err(CohomologyError::BudgetExceeded { entries, budget });
    }
    let t = g.table();
    let mats: Vec<Vec<u64>> = g
        .elements()
        .iter()
        .map(|x| x.entries().iter().map(|v| reduce(v, q)).collect())
        .collect();
    // element indices 1..n are the non-identity elements (identity is first)
    let var = |a: usize, b: usize, r: usize| ((a - 1) * m + (b - 1)) * d + r;
    let add = |row: &mut [u64], col: usize, v: u64| row[col] = (row[col] + v) % q;
    let neg = |v: u64| (q - v % q) % q;

    // δf(a, b, c) = a·f(b, c) − f(ab, c) + f(a, bc) − f(a, b)
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(eqs);
    for a in 1..n {
        for b in 1..n {
            for c in 1..n {
                let ab = t.mul(a, b);
                let bc = t.mul(b, c);
                for r in 0..d {
                    let mut row = vec![0u64; vars];
                    for s in 0..d {
                        add(&mut row, var(b, c, s), mats[a][r * d + s]);
                    }
                    if ab != 0 {
                        add(&mut row, var(ab, c, r), neg(1));
                    }
                    if bc != 0 {
                        add(&mut row, var(a, bc, r), 1);
                    }
                    add(&mut row, var(a, b, r), neg(1));
                    if row.iter().any(|&x| x != 0) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let z2 = diagonalize_mod(rows, vars, q, true);
    let v_inv = z2.v_inv.as_ref().expect("tracked");
    let orders = z2.kernel_orders();

    // coordinates of coboundaries δu for u = e_(h, s)
    // (δu)(a, b) = a·u(b) − u(ab) + u(a)
    let kept: Vec<usize> = (0..vars).filter(|&k| orders[k] > 1).collect();
    let mut rel_rows: Vec<Vec<u64>> = kept
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut row = vec![0u64; kept.len() + m * d];
            row[i] = orders[k] % q;
            row
        })
        .collect();
    for h in 1..n {
        for s in 0..d {
            let mut x = vec![0u64; vars];
            for a in 1..n {
                for b in 1..n {
                    if b == h {
                        for r in 0..d {
                            add(&mut x, var(a, b, r), mats[a][r * d + s]);
                        }
                    }
                    if t.mul(a, b) == h {
                        add(&mut x, var(a, b, s), neg(1));
                    }
                    if a == h {
                        add(&mut x, var(a, b, s), 1);
                    }
                }
            }
            let col = kept.len() + (h - 1) * d + s;
            for (i, &k) in kept.iter().enumerate() {
                let y = v_inv[k].iter().zip(&x).fold(0u128, |acc, (&a, &b)| (acc + a as u128 * b as u128) % q as u128);
                let step = q / orders[k];
                debug_assert_eq!(y as u64 % step, 0, "coboundary outside the cocycle space");
                rel_rows[i][col] = (y as u64 / step) % q;
            }
        }
    }
    let cols = kept.len() + m * d;
    let quotient = diagonalize_mod(rel_rows, cols, q, false);
    Ok(CohomologyGroup::from_invariants(&quotient.cokernel_orders(), q))
}

/// The modulus `e` used for the normaliser action: the exponent of `H`, or 4
/// when that exponent is 2.
pub fn exponent_modulus(h: &CohomologyGroup) -> Result<u64, CohomologyError> {
    match h.exponent() {
        1 => Err(CohomologyError::Trivial),
        2 => Ok(4),
        e => Ok(e),
    }
}

/// Free differentials `C_g` of every element, for evaluating cocycles at
/// arbitrary group elements.
#[derive(Clone, Debug)]
pub struct ElementDifferentials {
    dim: usize,
    width: usize,
    mats: Vec<IntMatrix>,
}

impl ElementDifferentials {
    pub fn new(g: &PointGroup) -> Self {
        let mats = g.words().iter().map(|w| word_differential(g, w)).collect();
        ElementDifferentials { dim: g.dim(), width: g.generators().len() * g.dim(), mats }
    }

    pub fn get(&self, element: usize) -> &IntMatrix {
        &self.mats[element]
    }

    /// `ζ(g)` for the element with the given index.
    pub fn evaluate(&self, element: usize, zeta: &[u64], q: u64) -> Vec<u64> {
        let c = &self.mats[element];
        (0..self.dim)
            .map(|r| {
                let acc: BigInt = (0..self.width).map(|j| &c[(r, j)] * BigInt::from(zeta[j])).sum();
                reduce(&acc, q)
            })
            .collect()
    }
}

/// The matrix of `ζ ↦ φ·ζ` on generator-value tuples mod `e`:
/// `(φ·ζ)(g_i) = φ·ζ(φ⁻¹g_iφ)`.
pub fn action_matrix(
    phi: &ModMatrix,
    g: &PointGroup,
    diffs: &ElementDifferentials,
    reduction: &std::collections::HashMap<ModMatrix, usize>,
) -> Result<ModMatrix, CohomologyError> {
    let e = phi.modulus();
    let d = g.dim();
    let k = g.generators().len();
    let phi_inv = phi.inverse().ok_or(CohomologyError::NotInvertible(e))?;
    let mut data = vec![0u64; k * d * k * d];
    for (i, gen) in g.generators().iter().enumerate() {
        let conj = &(&phi_inv * &gen.reduce_mod(e)) * phi;
        let h = *reduction.get(&conj).ok_or(CohomologyError::DoesNotNormalize(e))?;
        let block = &ModMatrix::from_int(&phi.to_int(), e) * &ModMatrix::from_int(diffs.get(h), e);
        for r in 0..d {
            for c in 0..k * d {
                data[(i * d + r) * k * d + c] = block.get(r, c);
            }
        }
    }
    Ok(ModMatrix::new(e, k * d, k * d, data)?)
}

/// `φ·ζ` for a single cocycle.
pub fn cocycle_action(phi: &ModMatrix, zeta: &[u64], g: &PointGroup) -> Result<Vec<u64>, CohomologyError> {
    let n = g.generators().len() * g.dim();
    if zeta.len() != n {
        return Err(CohomologyError::CocycleLength { expected: n, found: zeta.len() });
    }
    let reduction = g.reduction_index(phi.modulus())?;
    let diffs = ElementDifferentials::new(g);
    Ok(action_matrix(phi, g, &diffs, &reduction)?.mul_vec(zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group(gens: Vec<IntMatrix>, rels: &[&str]) -> PointGroup {
        let d = gens[0].rows();
        PointGroup::new(d, gens, rels.iter().map(|r| Word::parse(r).unwrap()).collect(), 1000).unwrap()
    }

    fn minus_i() -> PointGroup {
        group(vec![IntMatrix::diag(&[-1, -1])], &["x1^2"])
    }

    fn mirror() -> PointGroup {
        group(vec![IntMatrix::diag(&[1, -1])], &["x1^2"])
    }

    fn swap() -> PointGroup {
        group(vec![IntMatrix::from_rows(&[[0, 1], [1, 0]])], &["x1^2"])
    }

    fn trivial() -> PointGroup {
        group(vec![IntMatrix::identity(2)], &["x1"])
    }

    /// Brute-force `Z¹` and `B¹` sizes for a cyclic group over `(ℤ/q)^d`.
    fn enumerate_z1_b1(g: &PointGroup, q: u64) -> (usize, usize) {
        let d = g.dim();
        let gen = g.generators()[0].reduce_mod(q);
        let order = g.order() as u64;
        let all: Vec<Vec<u64>> = (0..q.pow(d as u32))
            .map(|code| (0..d).map(|k| code / q.pow(k as u32) % q).collect())
            .collect();
        let norm = (0..order).fold(ModMatrix::from_signed(q, d, d, &vec![0; d * d]).unwrap(), |acc, k| {
            acc.add(&gen.pow(k)).unwrap()
        });
        let z1 = all.iter().filter(|v| norm.mul_vec(v).iter().all(|&x| x == 0)).count();
        let minus_one = gen.sub(&ModMatrix::identity(d, q)).unwrap();
        let b1: std::collections::HashSet<Vec<u64>> = all.iter().map(|v| minus_one.mul_vec(v)).collect();
        (z1, b1.len())
    }

    #[test]
    fn z1_and_b1_examples() {
        assert_eq!(z1_mod(&minus_i(), 4).unwrap().size(), BigInt::from(16));
        assert_eq!(z1_mod(&mirror(), 4).unwrap().size(), BigInt::from(8));
        assert_eq!(z1_mod(&trivial(), 4).unwrap().size(), BigInt::from(1));
        assert_eq!(b1_mod(&minus_i(), 4).unwrap().size(), BigInt::from(4));
        assert_eq!(b1_mod(&mirror(), 4).unwrap().size(), BigInt::from(2));
        assert_eq!(b1_mod(&trivial(), 4).unwrap().size(), BigInt::from(1));
        for g in [minus_i(), mirror(), swap()] {
            let (z1, b1) = enumerate_z1_b1(&g, 4);
            assert_eq!(z1_mod(&g, 4).unwrap().size(), BigInt::from(z1));
            assert_eq!(b1_mod(&g, 4).unwrap().size(), BigInt::from(b1));
        }
    }

    #[test]
    fn integral_cocycles_reduced() {
        // (1 + σ) vanishes for σ = −I, so every integer tuple is a cocycle
        assert_eq!(z1_integral_reduced(&minus_i(), 4).unwrap().size(), BigInt::from(16));
        let z = z1_integral_reduced(&mirror(), 4).unwrap();
        assert_eq!(z.size(), BigInt::from(4));
        assert!(z.contains(&[0, 3]));
        assert!(!z.contains(&[2, 0]));
        assert_eq!(z1_integral_reduced(&trivial(), 4).unwrap().size(), BigInt::from(1));
    }

    #[test]
    fn h1_examples() {
        let h = h1_mod(&minus_i(), 4).unwrap();
        assert_eq!(h.invariant_factors(), &[2, 2]);
        assert!(h1_mod(&swap(), 4).unwrap().is_trivial());
        assert!(h1_mod(&trivial(), 4).unwrap().is_trivial());
        assert_eq!(h1_mod(&mirror(), 4).unwrap().order(), 4);
    }

    #[test]
    fn h2_lattice_examples() {
        assert!(h2_lattice(&minus_i(), 4).unwrap().is_trivial());
        let h = h2_lattice(&mirror(), 4).unwrap();
        assert_eq!(h.invariant_factors(), &[2]);
        assert!(h2_lattice(&trivial(), 4).unwrap().is_trivial());
        assert!(h2_lattice(&swap(), 4).unwrap().is_trivial());
        assert!(matches!(h2_lattice(&mirror(), 2), Err(CohomologyError::InvalidModulus(2))));
    }

    #[test]
    fn h2_bar_examples() {
        assert!(h2_finite_coeffs(&trivial(), 4, DEFAULT_BAR_BUDGET).unwrap().is_trivial());
        assert_eq!(h2_finite_coeffs(&minus_i(), 4, DEFAULT_BAR_BUDGET).unwrap().order(), 4);
        assert_eq!(h2_finite_coeffs(&mirror(), 4, DEFAULT_BAR_BUDGET).unwrap().order(), 4);
        assert!(matches!(h2_finite_coeffs(&minus_i(), 4, 1), Err(CohomologyError::BudgetExceeded { .. })));
    }

    #[test]
    fn exponent_modulus_examples() {
        assert_eq!(exponent_modulus(&CohomologyGroup::from_invariants(&[2], 4)), Ok(4));
        assert_eq!(exponent_modulus(&CohomologyGroup::from_invariants(&[6], 6)), Ok(6));
        assert_eq!(exponent_modulus(&CohomologyGroup::from_invariants(&[3, 3], 3)), Ok(3));
        assert_eq!(exponent_modulus(&CohomologyGroup::from_invariants(&[], 4)), Err(CohomologyError::Trivial));
    }

    #[test]
    fn action_examples() {
        let g = mirror();
        let zeta = vec![0, 1];
        let phi = ModMatrix::from_signed(4, 2, 2, &[3, 0, 0, 1]).unwrap();
        assert_eq!(cocycle_action(&phi, &zeta, &g).unwrap(), vec![0, 1]);
        let phi = ModMatrix::from_signed(4, 2, 2, &[1, 0, 0, 3]).unwrap();
        assert_eq!(cocycle_action(&phi, &zeta, &g).unwrap(), vec![0, 3]);
        assert_eq!(cocycle_action(&ModMatrix::identity(2, 4), &zeta, &g).unwrap(), zeta);
        let phi = ModMatrix::from_signed(4, 2, 2, &[1, 1, 0, 1]).unwrap();
        assert_eq!(cocycle_action(&phi, &zeta, &g), Err(CohomologyError::DoesNotNormalize(4)));
    }

    #[test]
    fn classes_round_trip() {
        let h = h2_lattice(&mirror(), 4).unwrap();
        let rep = &h.representatives()[0];
        assert_eq!(h.class_of(rep), Some(vec![1]));
        assert_eq!(h.class_of(&[0, 0]), Some(vec![0]));
        assert_eq!(h.cocycle_of(&[1]), *rep);
        // (0, 2) is a coboundary
        assert_eq!(h.class_of(&[0, 2]), Some(vec![0]));
    }

    fn dihedral4() -> PointGroup {
        group(
            vec![IntMatrix::from_rows(&[[0, -1], [1, 0]]), IntMatrix::diag(&[1, -1])],
            &["x1^4", "x2^2", "(x1 x2)^2"],
        )
    }

    #[test]
    fn word_extension_is_well_defined() {
        // every relator kills every cocycle, so two words for one element agree
        for g in [dihedral4(), minus_i(), mirror()] {
            let q = 8;
            let z1 = z1_mod(&g, q).unwrap();
            let diffs = ElementDifferentials::new(&g);
            for zeta in z1.basis() {
                for (i, x) in g.elements().iter().enumerate() {
                    for (j, y) in g.elements().iter().enumerate() {
                        let xy = g.index_of(&(x * y)).unwrap();
                        let lhs = diffs.evaluate(xy, &zeta, q);
                        let zx = diffs.evaluate(i, &zeta, q);
                        let zy = ModMatrix::from_int(x, q).mul_vec(&diffs.evaluate(j, &zeta, q));
                        let rhs: Vec<u64> = zx.iter().zip(&zy).map(|(a, b)| (a + b) % q).collect();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn cyclic_h3_is_the_norm_kernel_quotient() {
        // H³(⟨−I⟩, ℤ²) = Ĥ¹ = ker(1 + σ) / (σ − 1)ℤ² = ℤ² / 2ℤ²
        assert_eq!(h3_lattice(&minus_i(), 4).unwrap().invariant_factors(), &[2, 2]);
        // for a reflection both H² and H³ are ℤ/2
        assert_eq!(h3_lattice(&mirror(), 4).unwrap().invariant_factors(), &[2]);
        assert!(h3_lattice(&trivial(), 4).unwrap().is_trivial());
    }

    #[test]
    fn exact_sequence_matches_bar_cochains() {
        let catalog = crate::catalog::dimension2();
        for entry in catalog.entries() {
            let g = entry.point_group(1000).unwrap();
            for q in [2, 3, 4, default_modulus(&g)] {
                let bar = h2_finite_coeffs(&g, q, DEFAULT_BAR_BUDGET).unwrap();
                let seq = h2_finite_coeffs_sequence(&g, q).unwrap();
                assert_eq!(bar.order(), seq.order(), "{} q={}", entry.label, q);
            }
        }
    }

    #[test]
    fn h2_is_stable_under_multiples_of_the_order() {
        for g in [dihedral4(), mirror(), minus_i()] {
            let base = h2_lattice(&g, default_modulus(&g)).unwrap();
            for mult in 2..=4 {
                let q = default_modulus(&g) * mult;
                assert_eq!(h2_lattice(&g, q).unwrap().invariant_factors(), base.invariant_factors());
            }
        }
    }

    /// `H²` of a cyclic group `⟨σ⟩` of order `n` is `M^σ / N·M` with
    /// `N = 1 + σ + … + σ^{n−1}`.
    fn cyclic_h2_oracle(sigma: &IntMatrix, n: u32) -> Vec<u64> {
        let d = sigma.rows();
        let fixed = kernel_basis(&sigma.sub(&IntMatrix::identity(d)));
        if fixed.cols() == 0 {
            return Vec::new();
        }
        let norm = (0..n).fold(IntMatrix::zeros(d, d), |acc, k| acc.add(&sigma.pow(k)));
        let coords: Vec<Vec<BigInt>> =
            (0..d).map(|j| lattice_membership(&fixed, &norm.column(j)).expect("norm lands in fixed points")).collect();
        let rel = IntMatrix::from_columns(fixed.cols(), &coords);
        let s = snf(&rel);
        let mut orders: Vec<u64> =
            s.invariant_factors().iter().map(|x| x.to_u64().unwrap()).filter(|&x| x > 1).collect();
        assert_eq!(s.rank, fixed.cols(), "quotient is finite");
        orders.sort_unstable();
        invariant_factors_of(&orders)
    }

    #[test]
    fn cyclic_groups_match_the_norm_oracle() {
        let cases: Vec<(IntMatrix, u32)> = vec![
            (IntMatrix::diag(&[-1, -1]), 2),
            (IntMatrix::diag(&[1, -1]), 2),
            (IntMatrix::from_rows(&[[0, 1], [1, 0]]), 2),
            (IntMatrix::from_rows(&[[0, -1], [1, -1]]), 3),
            (IntMatrix::from_rows(&[[0, -1], [1, 0]]), 4),
            (IntMatrix::from_rows(&[[1, -1], [1, 0]]), 6),
            (IntMatrix::diag(&[1, 1, -1]), 2),
            (IntMatrix::from_rows(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]]), 3),
            (IntMatrix::from_rows(&[[0, -1, 0], [1, 0, 0], [0, 0, 1]]), 4),
            (IntMatrix::from_rows(&[[0, -1, 0], [1, -1, 0], [0, 0, 1]]), 3),
        ];
        for (sigma, n) in cases {
            let g = group(vec![sigma.clone()], &[&format!("x1^{n}")]);
            let h = h2_lattice(&g, default_modulus(&g)).unwrap();
            assert_eq!(h.invariant_factors(), cyclic_h2_oracle(&sigma, n).as_slice(), "{sigma}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn action_is_a_group_action(a in 0usize..16, b in 0usize..16, c0 in 0u64..4, c1 in 0u64..4) {
            // D4 normalises itself; its elements mod 4 act on Z¹
            let g = dihedral4();
            let e = 4;
            let elems: Vec<ModMatrix> = g.elements().iter().map(|x| x.reduce_mod(e)).collect();
            let phi = &elems[a % elems.len()];
            let psi = &elems[b % elems.len()];
            let z1 = z1_mod(&g, e).unwrap();
            let basis = z1.basis();
            let zeta: Vec<u64> = basis[0].iter().zip(&basis[basis.len() - 1])
                .map(|(x, y)| (c0 * x + c1 * y) % e).collect();
            let lhs = cocycle_action(&(phi * psi), &zeta, &g).unwrap();
            let rhs = cocycle_action(phi, &cocycle_action(psi, &zeta, &g).unwrap(), &g).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(z1.contains(&cocycle_action(phi, &zeta, &g).unwrap()));
        }
    }
}
