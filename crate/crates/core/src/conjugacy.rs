//! Simultaneous conjugacy of matrix tuples over ℤ[π] = ∏_{p∈π} ℤ_p.
//!
//! For tuples `A = (A₁,…,A_k)` and `B = (B₁,…,B_k)` the intertwiners
//! `{X : A_iX = XB_i}` are the kernel of the linear map `T_{A,B}`. Over each
//! ℤ_p this kernel is the p-adic completion of the integer kernel, so a
//! residue class modulo `p^k` contains a p-adic intertwiner exactly when it
//! is the reduction of an integer kernel vector. Conjugacy over ℤ[π] splits
//! prime by prime, and the per-prime answers glue by the Chinese remainder
//! theorem into one integer intertwiner whose determinant is prime to π.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::groups::PointGroup;
use crate::linalg::lattice::{integral_membership_with, kernel_basis_from, solve_mod_with};
use crate::linalg::primes::prime_factors_big;
use crate::linalg::{crt_combine, snf, IntMatrix, LinalgError, ModMatrix, PrimeSet, SnfResult};

/// Default bound on the number of residue candidates visited by one search.
pub const DEFAULT_CANDIDATE_CAP: u64 = 1 << 20;

const RANDOM_PROBES: usize = 32;
const PROBE_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConjugacyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("tuples must be non-empty, of equal length, and consist of square matrices of one size")]
    BadShape,
    #[error("no primes given")]
    EmptyPrimeSet,
    #[error("constraint modulus {0} has a prime factor outside π")]
    ConstraintOutsidePi(u64),
    #[error("{count} candidates modulo {modulus} exceed the enumeration cap {cap}")]
    CapExceeded { modulus: u64, count: u128, cap: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Tuples `A`, `B`, a prime set π, and optionally a residue `n (mod e)` that
/// the conjugator must reduce to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyProblem {
    pub a: Vec<IntMatrix>,
    pub b: Vec<IntMatrix>,
    pub primes: PrimeSet,
    pub constraint: Option<ModMatrix>,
}

impl ConjugacyProblem {
    pub fn new(a: Vec<IntMatrix>, b: Vec<IntMatrix>, primes: PrimeSet) -> Result<Self, ConjugacyError> {
        tuple_dim(&a, &b)?;
        Ok(ConjugacyProblem { a, b, primes, constraint: None })
    }

    /// Requires the conjugator to be congruent to `target` modulo its modulus.
    pub fn with_constraint(mut self, target: ModMatrix) -> Result<Self, ConjugacyError> {
        let d = self.dim();
        if target.rows() != d || target.cols() != d {
            return Err(ConjugacyError::BadShape);
        }
        if !PrimeSet::dividing(target.modulus()).is_subset(&self.primes) {
            return Err(ConjugacyError::ConstraintOutsidePi(target.modulus()));
        }
        self.constraint = Some(target);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a[0].rows()
    }
}

fn tuple_dim(a: &[IntMatrix], b: &[IntMatrix]) -> Result<usize, ConjugacyError> {
    let d = a.first().ok_or(ConjugacyError::BadShape)?.rows();
    if a.len() != b.len() || a.iter().chain(b).any(|m| m.rows() != d || m.cols() != d) {
        return Err(ConjugacyError::BadShape);
    }
    Ok(d)
}

/// A matrix `W` with `A_iW = WB_i` for every `i`. `W / scale` is invertible
/// over ℤ[π] (both `det W` and `scale` are prime to π) and, under a
/// constraint `n (mod e)`, `W ≡ scale·n (mod e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyWitness {
    pub matrix: IntMatrix,
    pub scale: BigInt,
    /// Modulus at which the residue search was carried out.
    pub modulus: u64,
}

impl ConjugacyWitness {
    /// Re-checks the certificate with exact arithmetic.
    pub fn verify(&self, problem: &ConjugacyProblem) -> bool {
        let w = &self.matrix;
        if w.rows() != problem.dim() || !w.is_square() {
            return false;
        }
        let intertwines = problem.a.iter().zip(&problem.b).all(|(a, b)| (a * w) == (w * b));
        let unit = problem.primes.coprime_to(&w.det()) && problem.primes.coprime_to(&self.scale);
        let congruent = problem.constraint.as_ref().is_none_or(|n| {
            let scaled = n.to_int().scale(&self.scale);
            w.reduce_mod(n.modulus()) == scaled.reduce_mod(n.modulus())
        });
        intertwines && unit && congruent
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjugacyVerdict {
    /// No invertible solution exists modulo this modulus.
    NotConjugateMod(u64),
    /// Solutions exist modulo every tested modulus, but none lifts over the
    /// p-adic integers for the primes listed.
    NotConjugateOver(PrimeSet),
    Conjugate(ConjugacyWitness),
}

impl ConjugacyVerdict {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, ConjugacyVerdict::Conjugate(_))
    }
}

/// The `kd² × d²` matrix of `X ↦ (A_iX − XB_i)_i` with `X` flattened row by
/// row: row `i·d² + r·d + c` holds the `(r, c)` entry of the `i`-th block.
pub fn build_t_matrix(a: &[IntMatrix], b: &[IntMatrix]) -> Result<IntMatrix, ConjugacyError> {
    let d = tuple_dim(a, b)?;
    let d2 = d * d;
    let mut t = IntMatrix::zeros(a.len() * d2, d2);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        for r in 0..d {
            for c in 0..d {
                let row = i * d2 + r * d + c;
                for s in 0..d {
                    t[(row, s * d + c)] += &ai[(r, s)];
                    t[(row, r * d + s)] -= &bi[(s, c)];
                }
            }
        }
    }
    Ok(t)
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

fn unit_mod(det: u64, m: u64) -> bool {
    det.gcd(&m) == 1
}

/// The intertwiner space of a fixed pair of tuples, with its Smith data
/// computed once so that many primes and constraints can be queried.
#[derive(Debug)]
pub struct IntertwinerSpace {
    dim: usize,
    t: IntMatrix,
    t_snf: SnfResult,
    kernel: IntMatrix,
    kernel_snf: OnceLock<SnfResult>,
}

impl IntertwinerSpace {
    pub fn new(a: &[IntMatrix], b: &[IntMatrix]) -> Result<Self, ConjugacyError> {
        let dim = tuple_dim(a, b)?;
        let t = build_t_matrix(a, b)?;
        let t_snf = snf(&t);
        let kernel = kernel_basis_from(&t_snf, dim * dim);
        Ok(IntertwinerSpace { dim, t, t_snf, kernel, kernel_snf: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_matrix(&self) -> &IntMatrix {
        &self.t
    }

    pub fn t_snf(&self) -> &SnfResult {
        &self.t_snf
    }

    /// Columns form a ℤ-basis of the integer intertwiners (flattened).
    pub fn kernel_basis(&self) -> &IntMatrix {
        &self.kernel
    }

    fn kernel_snf(&self) -> &SnfResult {
        self.kernel_snf.get_or_init(|| snf(&self.kernel))
    }

    /// Primes dividing some invariant factor of `T`.
    pub fn exceptional_primes(&self) -> PrimeSet {
        let ps = self.t_snf.invariant_factors().iter().flat_map(prime_factors_big).collect::<Vec<_>>();
        PrimeSet::new(ps).expect("prime factors")
    }

    /// Solutions of `T·x ≡ 0 (mod m)`, optionally with `x ≡ n (mod e)` for
    /// `e | m`. The congruence is folded into the system as
    /// `(m/e)·x ≡ (m/e)·n (mod m)`.
    fn residue_solutions(
        &self,
        m: u64,
        constraint: Option<&ModMatrix>,
    ) -> Result<Option<crate::linalg::AffineSolutionMod>, ConjugacyError> {
        let d2 = self.dim * self.dim;
        match constraint {
            None => Ok(solve_mod_with(&self.t_snf, d2, &vec![BigInt::zero(); self.t.rows()], m)),
            Some(n) => {
                let e = n.modulus();
                if !m.is_multiple_of(e) {
                    return Err(ConjugacyError::Precondition(format!("constraint modulus {e} does not divide {m}")));
                }
                let f = BigInt::from(m / e);
                let stacked = IntMatrix::vstack(&[self.t.clone(), IntMatrix::identity(d2).scale(&f)])?;
                let mut rhs = vec![BigInt::zero(); self.t.rows()];
                rhs.extend(n.entries().iter().map(|&x| BigInt::from(x) * &f));
                Ok(solve_mod_with(&snf(&stacked), d2, &rhs, m))
            }
        }
    }

    /// Every `X ∈ GL(d, ℤ/m)` with `A_iX ≡ XB_i (mod m)` satisfying the
    /// constraint, in enumeration order. Fails rather than truncating when
    /// more than `cap` residues would have to be visited.
    pub fn solutions_mod(
        &self,
        m: u64,
        constraint: Option<&ModMatrix>,
        cap: u64,
    ) -> Result<Vec<ModMatrix>, ConjugacyError> {
        let Some(sol) = self.residue_solutions(m, constraint)? else {
            return Ok(Vec::new());
        };
        let count = sol.count().unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(ConjugacyError::CapExceeded { modulus: m, count, cap });
        }
        Ok(sol
            .iter()
            .map(|x| ModMatrix::new(m, self.dim, self.dim, x).expect("square"))
            .filter(|x| unit_mod(x.det(), m))
            .collect())
    }

    /// Whether some invertible residue modulo `m` intertwines the tuples.
    pub fn has_invertible_mod(&self, m: u64, constraint: Option<&ModMatrix>, cap: u64) -> Result<bool, ConjugacyError> {
        let Some(sol) = self.residue_solutions(m, constraint)? else {
            return Ok(false);
        };
        let count = sol.count().unwrap_or(u128::MAX);
        for (visited, x) in sol.iter().enumerate() {
            if visited as u64 >= cap {
                return Err(ConjugacyError::CapExceeded { modulus: m, count, cap });
            }
            if unit_mod(ModMatrix::new(m, self.dim, self.dim, x).expect("square").det(), m) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Coefficients `c` (modulo `p^max(1, v)`, where `v` is the valuation of
    /// the constraint modulus at `p`) of an integer intertwiner `K·c` that is
    /// invertible modulo `p` and meets the constraint modulo `p^v`. Such a
    /// vector exists iff the tuples are conjugate over ℤ_p.
    pub fn local_coefficients(
        &self,
        p: u64,
        constraint: Option<&ModMatrix>,
        cap: u64,
    ) -> Result<Option<(u64, Vec<u64>)>, ConjugacyError> {
        let s = self.kernel.cols();
        if s == 0 {
            return Ok(None);
        }
        let v = constraint.map_or(0, |n| valuation(n.modulus(), p));
        let m = p.pow(v.max(1));
        let kmod = ModMatrix::from_int(&self.kernel, m);
        let invertible = |c: &[u64]| {
            let x = ModMatrix::new(p, self.dim, self.dim, kmod.mul_vec(c)).expect("square");
            x.det() != 0
        };

        let sol = if v == 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED ^ p);
            for _ in 0..RANDOM_PROBES {
                let c: Vec<u64> = (0..s).map(|_| rng.gen_range(0..p)).collect();
                if invertible(&c) {
                    return Ok(Some((m, c)));
                }
            }
            crate::linalg::AffineSolutionMod {
                modulus: p,
                particular: vec![0; s],
                kernel: (0..s)
                    .map(|j| {
                        let mut e = vec![0; s];
                        e[j] = 1;
                        (e, p)
                    })
                    .collect(),
            }
        } else {
            let n = constraint.expect("v > 0 only with a constraint").reduce(m)?;
            let rhs: Vec<BigInt> = n.entries().iter().map(|&x| BigInt::from(x)).collect();
            match solve_mod_with(self.kernel_snf(), s, &rhs, m) {
                Some(sol) => sol,
                None => return Ok(None),
            }
        };
        let count = sol.count().unwrap_or(u128::MAX);
        for (visited, c) in sol.iter().enumerate() {
            if visited as u64 >= cap {
                return Err(ConjugacyError::CapExceeded { modulus: m, count, cap });
            }
            if invertible(&c) {
                return Ok(Some((m, c)));
            }
        }
        Ok(None)
    }

    pub fn is_locally_conjugate(&self, p: u64, constraint: Option<&ModMatrix>, cap: u64) -> Result<bool, ConjugacyError> {
        Ok(self.local_coefficients(p, constraint, cap)?.is_some())
    }

    /// Integer intertwiner `K·c` with the coefficient vector read as its
    /// balanced representative modulo `modulus`.
    fn kernel_element(&self, c: &[u64], modulus: u64) -> IntMatrix {
        let half = modulus / 2;
        let coeffs: Vec<BigInt> = c
            .iter()
            .map(|&x| if x > half { BigInt::from(x) - BigInt::from(modulus) } else { BigInt::from(x) })
            .collect();
        IntMatrix::unflatten(self.dim, &self.kernel.mul_vec(&coeffs))
    }

    /// Decides conjugacy over ℤ[π] under an optional constraint. All residue
    /// tests run before any lifting test so that a modular obstruction is
    /// always reported as such.
    pub fn decide(
        &self,
        primes: &PrimeSet,
        constraint: Option<&ModMatrix>,
        cap: u64,
    ) -> Result<ConjugacyVerdict, ConjugacyError> {
        if primes.is_empty() {
            return Err(ConjugacyError::EmptyPrimeSet);
        }
        if let Some(n) = constraint {
            if !PrimeSet::dividing(n.modulus()).is_subset(primes) {
                return Err(ConjugacyError::ConstraintOutsidePi(n.modulus()));
            }
        }
        let local: Vec<(u64, Option<ModMatrix>)> = primes
            .iter()
            .map(|p| {
                let v = constraint.map_or(0, |n| valuation(n.modulus(), p));
                let n = match (v, constraint) {
                    (0, _) | (_, None) => None,
                    (v, Some(n)) => Some(n.reduce(p.pow(v))?),
                };
                Ok((p, n))
            })
            .collect::<Result<_, LinalgError>>()?;

        for (p, n) in &local {
            let m = n.as_ref().map_or(*p, ModMatrix::modulus);
            if !self.has_invertible_mod(m, n.as_ref(), cap)? {
                return Ok(ConjugacyVerdict::NotConjugateMod(m));
            }
        }
        let mut parts = Vec::with_capacity(local.len());
        for (p, n) in &local {
            match self.local_coefficients(*p, n.as_ref(), cap)? {
                Some((m, c)) => parts.push(ModMatrix::new(m, 1, c.len(), c)?),
                None => return Ok(ConjugacyVerdict::NotConjugateOver(PrimeSet::single(*p))),
            }
        }
        let combined = crt_combine(&parts)?;
        let w = self.kernel_element(combined.entries(), combined.modulus());
        Ok(ConjugacyVerdict::Conjugate(ConjugacyWitness { matrix: w, scale: BigInt::one(), modulus: combined.modulus() }))
    }

    /// Attempts to lift a residue solution `X₀ (mod m)` to a ℤ[π]-conjugator,
    /// π being the primes of `m`. With `E = T(X₀)/m`, a lift `X₀ + mY`
    /// exists iff `−E` lies in the ℤ[π]-image of `T`; the returned witness
    /// clears the denominators of `Y`, which are prime to π.
    pub fn lift(&self, x0: &IntMatrix, m: u64) -> Result<Option<ConjugacyWitness>, ConjugacyError> {
        let d = self.dim;
        if x0.rows() != d || x0.cols() != d {
            return Err(ConjugacyError::BadShape);
        }
        let primes = PrimeSet::dividing(m);
        if primes.is_empty() {
            return Err(ConjugacyError::Linalg(LinalgError::InvalidModulus(m)));
        }
        let big_m = BigInt::from(m);
        let image = self.t.mul_vec(&x0.flatten());
        if image.iter().any(|x| !x.is_multiple_of(&big_m)) {
            return Err(ConjugacyError::Precondition(format!("X₀ does not intertwine modulo {m}")));
        }
        if !primes.coprime_to(&x0.det()) {
            return Err(ConjugacyError::Precondition(format!("X₀ is not invertible modulo {m}")));
        }
        let minus_e: Vec<BigInt> = image.iter().map(|x| -(x / &big_m)).collect();
        let Some(y) = integral_membership_with(&self.t_snf, d * d, &minus_e, &primes) else {
            return Ok(None);
        };
        // T·Q⁻¹w = P·S·w, so w_i = y_i·d̄_i/d_i = y_i/e_i solves T(Q⁻¹w) = P·S̄·y.
        let cofactors: Vec<BigInt> = (0..self.t_snf.rank)
            .map(|i| {
                let di = &self.t_snf.s[(i, i)];
                di / crate::linalg::pi_part(di, &primes)
            })
            .collect();
        let scale = cofactors.iter().fold(BigInt::one(), |acc, e| acc.lcm(e));
        let mut w = vec![BigInt::zero(); d * d];
        for (i, e) in cofactors.iter().enumerate() {
            w[i] = &y[i] * (&scale / e);
        }
        let y_scaled = self.t_snf.q_inv.mul_vec(&w);
        let x0_scaled = x0.scale(&scale).flatten();
        let witness: Vec<BigInt> = x0_scaled.iter().zip(&y_scaled).map(|(a, b)| a + &big_m * b).collect();
        Ok(Some(ConjugacyWitness { matrix: IntMatrix::unflatten(d, &witness), scale, modulus: m }))
    }

    /// A rational intertwiner of nonzero determinant, if one exists.
    pub fn rational_witness(&self) -> Option<IntMatrix> {
        let s = self.kernel.cols();
        if s == 0 {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        for round in 0..RANDOM_PROBES {
            let bound: i64 = if round < 4 { 3 } else { 1 << 20 };
            let c: Vec<BigInt> = (0..s).map(|_| BigInt::from(rng.gen_range(-bound..=bound))).collect();
            let x = IntMatrix::unflatten(self.dim, &self.kernel.mul_vec(&c));
            if !x.det().is_zero() {
                return Some(x);
            }
        }
        // The determinant is a polynomial of degree ≤ d in each coefficient;
        // if it is not identically zero it is nonzero somewhere on {0..d}^s.
        if determinant_polynomial(&self.kernel, self.dim).is_empty() {
            return None;
        }
        let mut c = vec![0u64; s];
        loop {
            let cb: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            let x = IntMatrix::unflatten(self.dim, &self.kernel.mul_vec(&cb));
            if !x.det().is_zero() {
                return Some(x);
            }
            let mut k = 0;
            loop {
                if k == s {
                    unreachable!("nonzero polynomial vanished on the whole grid");
                }
                c[k] += 1;
                if c[k] <= self.dim as u64 {
                    break;
                }
                c[k] = 0;
                k += 1;
            }
        }
    }
}

type Monomial = Vec<u8>;

/// `det(Σ c_j K_j)` as a polynomial in the `c_j`, with zero coefficients
/// dropped. The columns of `kernel` are the flattened `K_j`.
pub fn determinant_polynomial(kernel: &IntMatrix, dim: usize) -> HashMap<Monomial, BigInt> {
    let s = kernel.cols();
    let linear = |r: usize, c: usize| -> Vec<(usize, BigInt)> {
        (0..s)
            .filter(|&j| !kernel[(r * dim + c, j)].is_zero())
            .map(|j| (j, kernel[(r * dim + c, j)].clone()))
            .collect()
    };
    // Expand along rows, keeping one partial product per set of used columns.
    let mut partial: HashMap<u64, HashMap<Monomial, BigInt>> = HashMap::new();
    partial.insert(0, HashMap::from([(vec![0u8; s], BigInt::one())]));
    for r in 0..dim {
        let mut next: HashMap<u64, HashMap<Monomial, BigInt>> = HashMap::new();
        for (used, poly) in &partial {
            for c in (0..dim).filter(|c| used & (1 << c) == 0) {
                let form = linear(r, c);
                if form.is_empty() {
                    continue;
                }
                // sign of inserting column c after the columns already used
                let inversions = (used >> (c + 1)).count_ones();
                let target = next.entry(used | (1 << c)).or_default();
                for (mono, coeff) in poly {
                    for (j, a) in &form {
                        let mut m = mono.clone();
                        m[*j] += 1;
                        let term = coeff * a;
                        let slot = target.entry(m).or_insert_with(BigInt::zero);
                        if inversions % 2 == 0 {
                            *slot += term;
                        } else {
                            *slot -= term;
                        }
                    }
                }
            }
        }
        for poly in next.values_mut() {
            poly.retain(|_, v| !v.is_zero());
        }
        partial = next;
    }
    let full = if dim == 0 { 0 } else { (1u64 << dim) - 1 };
    partial.remove(&full).unwrap_or_default()
}

/// Every invertible residue solution modulo `m` (with the problem's
/// constraint, which must have modulus dividing `m`).
pub fn solutions_mod(problem: &ConjugacyProblem, m: u64, cap: u64) -> Result<Vec<ModMatrix>, ConjugacyError> {
    IntertwinerSpace::new(&problem.a, &problem.b)?.solutions_mod(m, problem.constraint.as_ref(), cap)
}

/// Lifts a residue solution `X₀ (mod m)` to a ℤ[π]-conjugator for the primes
/// of `m`, or reports that it has no such lift.
pub fn lift_solution(
    problem: &ConjugacyProblem,
    x0: &IntMatrix,
    m: u64,
) -> Result<Option<ConjugacyWitness>, ConjugacyError> {
    IntertwinerSpace::new(&problem.a, &problem.b)?.lift(x0, m)
}

pub fn conjugate_over_zpi(problem: &ConjugacyProblem) -> Result<ConjugacyVerdict, ConjugacyError> {
    conjugate_over_zpi_with_cap(problem, DEFAULT_CANDIDATE_CAP)
}

pub fn conjugate_over_zpi_with_cap(problem: &ConjugacyProblem, cap: u64) -> Result<ConjugacyVerdict, ConjugacyError> {
    IntertwinerSpace::new(&problem.a, &problem.b)?.decide(&problem.primes, problem.constraint.as_ref(), cap)
}

/// Simultaneous conjugacy over ℚ.
pub fn q_conjugacy_precheck(a: &[IntMatrix], b: &[IntMatrix]) -> Result<bool, ConjugacyError> {
    Ok(IntertwinerSpace::new(a, b)?.rational_witness().is_some())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertificateOutcome {
    /// `witness` conjugates over ℤ[p] for every prime outside `exceptional`
    /// (it is invertible there, and `T` has unit invariant factors off
    /// `certified`); the exceptional primes were each checked separately.
    Certified { witness: IntMatrix, certified: PrimeSet, exceptional: PrimeSet },
    /// Not conjugate over ℚ.
    NotRationallyConjugate,
    /// Not conjugate over ℤ_p for this prime.
    Refuted { prime: u64, verdict: ConjugacyVerdict },
}

/// Reduces conjugacy at all primes to finitely many local checks.
pub fn conjugacy_certificate(a: &[IntMatrix], b: &[IntMatrix], cap: u64) -> Result<CertificateOutcome, ConjugacyError> {
    let space = IntertwinerSpace::new(a, b)?;
    let Some(rational) = space.rational_witness() else {
        return Ok(CertificateOutcome::NotRationallyConjugate);
    };
    let certified = space.exceptional_primes();
    let witness = if certified.is_empty() {
        rational
    } else {
        match space.decide(&certified, None, cap)? {
            ConjugacyVerdict::Conjugate(w) => w.matrix,
            verdict => {
                let prime = match &verdict {
                    ConjugacyVerdict::NotConjugateMod(m) => crate::linalg::prime_factors(*m)[0],
                    ConjugacyVerdict::NotConjugateOver(ps) => ps.as_slice()[0],
                    ConjugacyVerdict::Conjugate(_) => unreachable!(),
                };
                return Ok(CertificateOutcome::Refuted { prime, verdict });
            }
        }
    };
    let residual: Vec<u64> =
        prime_factors_big(&witness.det()).into_iter().filter(|p| !certified.contains(*p)).collect();
    for &p in &residual {
        let verdict = space.decide(&PrimeSet::single(p), None, cap)?;
        if !verdict.is_conjugate() {
            return Ok(CertificateOutcome::Refuted { prime: p, verdict });
        }
    }
    Ok(CertificateOutcome::Certified {
        witness,
        certified,
        exceptional: PrimeSet::new(residual).expect("primes"),
    })
}

/// The local test that first told two point groups apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalTest {
    Mod(u64),
    Padic(u64),
    Combined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairConjugacy {
    pub conjugate: bool,
    pub separated_by: Option<LocalTest>,
    /// Index into the automorphism images of a tuple conjugate over every
    /// prime of π at once, when one exists.
    pub witness_image: Option<usize>,
}

/// Runs the tests `mod p`, `ℤ_p` for each `p ∈ π` in increasing order and
/// then all of π together, each across every automorphism image of the
/// second group's generators, stopping at the first test that fails for all
/// images.
pub fn zclass_pair_profinite_conjugate(
    g1: &PointGroup,
    g2: &PointGroup,
    primes: &PrimeSet,
    cap: u64,
) -> Result<PairConjugacy, ConjugacyError> {
    if g1.relators() != g2.relators() || g1.generators().len() != g2.generators().len() || g1.order() != g2.order() {
        return Err(ConjugacyError::Precondition("point groups do not share a presentation".into()));
    }
    let spaces: Vec<IntertwinerSpace> = g2
        .automorphism_images()
        .iter()
        .map(|img| IntertwinerSpace::new(g1.generators(), img))
        .collect::<Result<_, _>>()?;
    let mut local = vec![vec![false; primes.len()]; spaces.len()];
    for (k, p) in primes.iter().enumerate() {
        let mut any_mod = false;
        for (i, sp) in spaces.iter().enumerate() {
            if sp.has_invertible_mod(p, None, cap)? {
                any_mod = true;
                local[i][k] = true;
            }
        }
        if !any_mod {
            return Ok(PairConjugacy { conjugate: false, separated_by: Some(LocalTest::Mod(p)), witness_image: None });
        }
        let mut any_local = false;
        for (i, sp) in spaces.iter().enumerate() {
            if local[i][k] {
                local[i][k] = sp.is_locally_conjugate(p, None, cap)?;
                any_local |= local[i][k];
            }
        }
        if !any_local {
            return Ok(PairConjugacy { conjugate: false, separated_by: Some(LocalTest::Padic(p)), witness_image: None });
        }
    }
    match local.iter().position(|row| row.iter().all(|&x| x)) {
        Some(i) => Ok(PairConjugacy { conjugate: true, separated_by: None, witness_image: Some(i) }),
        None => Ok(PairConjugacy { conjugate: false, separated_by: Some(LocalTest::Combined), witness_image: None }),
    }
}

/// Exhaustive search for an invertible residue intertwiner modulo `m`;
/// only sensible for tiny `d` and `m`.
pub fn brute_force_conjugate_mod(a: &[IntMatrix], b: &[IntMatrix], m: u64) -> Option<ModMatrix> {
    let d = a.first()?.rows();
    let am: Vec<ModMatrix> = a.iter().map(|x| x.reduce_mod(m)).collect();
    let bm: Vec<ModMatrix> = b.iter().map(|x| x.reduce_mod(m)).collect();
    let total = m.checked_pow((d * d) as u32)?;
    (0..total).find_map(|mut code| {
        let data: Vec<u64> = (0..d * d)
            .map(|_| {
                let x = code % m;
                code /= m;
                x
            })
            .collect();
        let x = ModMatrix::new(m, d, d, data).ok()?;
        (unit_mod(x.det(), m) && am.iter().zip(&bm).all(|(a, b)| (a * &x) == (&x * b))).then_some(x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Word;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn m(rows: &[[i64; 2]; 2]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn swap() -> IntMatrix {
        m(&[[0, 1], [1, 0]])
    }

    fn mirror() -> IntMatrix {
        IntMatrix::diag(&[1, -1])
    }

    fn rot3() -> IntMatrix {
        m(&[[0, -1], [1, -1]])
    }

    fn problem(a: Vec<IntMatrix>, b: Vec<IntMatrix>, primes: &str) -> ConjugacyProblem {
        ConjugacyProblem::new(a, b, primes.parse().unwrap()).unwrap()
    }

    #[test]
    fn t_matrix_examples() {
        let t = build_t_matrix(&[IntMatrix::diag(&[5])], &[IntMatrix::diag(&[3])]).unwrap();
        assert_eq!(t, IntMatrix::diag(&[2]));
        let t = build_t_matrix(&[IntMatrix::identity(2)], &[IntMatrix::identity(2)]).unwrap();
        assert!(t.is_zero());
        let t = build_t_matrix(&[mirror()], &[mirror()]).unwrap();
        assert_eq!(crate::linalg::kernel_basis(&t).cols(), 2);
        assert_eq!(t.rows(), 4);
    }

    #[test]
    fn t_matrix_applies_the_commutator() {
        let a = m(&[[1, 2], [3, 4]]);
        let b = m(&[[0, -1], [5, 2]]);
        let x = m(&[[7, -3], [2, 9]]);
        let t = build_t_matrix(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        let lhs = IntMatrix::unflatten(2, &t.mul_vec(&x.flatten()));
        assert_eq!(lhs, (&a * &x).sub(&(&x * &b)));
    }

    #[test]
    fn solutions_mod_examples() {
        let p = problem(vec![IntMatrix::diag(&[-1, -1])], vec![IntMatrix::diag(&[-1, -1])], "2");
        assert_eq!(solutions_mod(&p, 2, 1000).unwrap().len(), 6);

        let p = problem(vec![swap()], vec![mirror()], "2");
        assert!(solutions_mod(&p, 2, 1000).unwrap().is_empty());

        let target = ModMatrix::from_signed(4, 2, 2, &[1, 2, 2, 1]).unwrap();
        let p = problem(vec![mirror()], vec![mirror()], "2").with_constraint(target.clone()).unwrap();
        let sols = solutions_mod(&p, 4, 1000).unwrap();
        assert_eq!(sols, vec![target]);
    }

    #[test]
    fn solutions_mod_refuses_to_truncate() {
        let p = problem(vec![IntMatrix::identity(3)], vec![IntMatrix::identity(3)], "3");
        assert!(matches!(solutions_mod(&p, 3, 100), Err(ConjugacyError::CapExceeded { .. })));
    }

    #[test]
    fn lift_examples() {
        let p = problem(vec![rot3(), mirror()], vec![rot3(), mirror()], "2,3");
        let w = lift_solution(&p, &IntMatrix::identity(2), 6).unwrap().unwrap();
        assert!(w.verify(&p));

        let shear = m(&[[1, 1], [0, 1]]);
        let p = problem(vec![shear.clone()], vec![shear.clone()], "2");
        let w = lift_solution(&p, &shear, 2).unwrap().unwrap();
        assert!(w.verify(&p));

        let target = ModMatrix::from_signed(4, 2, 2, &[1, 2, 2, 1]).unwrap();
        let p = problem(vec![mirror()], vec![mirror()], "2").with_constraint(target.clone()).unwrap();
        assert_eq!(lift_solution(&p, &target.to_int(), 4).unwrap(), None);
        assert_eq!(conjugate_over_zpi(&p).unwrap(), ConjugacyVerdict::NotConjugateOver(PrimeSet::single(2)));
    }

    #[test]
    fn lift_rejects_non_solutions() {
        let p = problem(vec![swap()], vec![mirror()], "2");
        assert!(matches!(lift_solution(&p, &IntMatrix::identity(2), 2), Err(ConjugacyError::Precondition(_))));
    }

    #[test]
    fn verdict_examples() {
        let p = problem(vec![rot3()], vec![rot3()], "3");
        let ConjugacyVerdict::Conjugate(w) = conjugate_over_zpi(&p).unwrap() else { panic!() };
        assert!(w.verify(&p));

        let p = problem(vec![swap()], vec![mirror()], "2");
        assert_eq!(conjugate_over_zpi(&p).unwrap(), ConjugacyVerdict::NotConjugateMod(2));

        let p = problem(vec![swap()], vec![mirror()], "3");
        let ConjugacyVerdict::Conjugate(w) = conjugate_over_zpi(&p).unwrap() else { panic!() };
        assert!(w.verify(&p));
        let known = m(&[[1, 1], [1, -1]]);
        assert_eq!(known.det(), BigInt::from(-2));
        assert_eq!(&swap() * &known, &known * &mirror());
        assert!(ConjugacyWitness { matrix: known, scale: BigInt::one(), modulus: 3 }.verify(&p));
    }

    #[test]
    fn constraint_outside_pi_is_rejected() {
        let target = ModMatrix::identity(2, 3);
        let err = problem(vec![mirror()], vec![mirror()], "2").with_constraint(target).unwrap_err();
        assert_eq!(err, ConjugacyError::ConstraintOutsidePi(3));
    }

    #[test]
    fn precheck_examples() {
        assert!(q_conjugacy_precheck(&[rot3()], &[rot3()]).unwrap());
        assert!(!q_conjugacy_precheck(&[IntMatrix::diag(&[2])], &[IntMatrix::diag(&[3])]).unwrap());
        assert!(q_conjugacy_precheck(&[swap()], &[mirror()]).unwrap());
        assert!(!q_conjugacy_precheck(&[IntMatrix::diag(&[1, 1])], &[mirror()]).unwrap());
    }

    #[test]
    fn determinant_polynomial_of_full_space() {
        // K = all of M_2: det = c0 c3 − c1 c2
        let poly = determinant_polynomial(&IntMatrix::identity(4), 2);
        assert_eq!(poly.len(), 2);
        assert_eq!(poly[&vec![1, 0, 0, 1]], BigInt::from(1));
        assert_eq!(poly[&vec![0, 1, 1, 0]], BigInt::from(-1));
        // singular pencil: only diag(c, 0)
        let k = IntMatrix::from_columns(4, &[vec![1.into(), 0.into(), 0.into(), 0.into()]]);
        assert!(determinant_polynomial(&k, 2).is_empty());
    }

    #[test]
    fn certificate_examples() {
        let out = conjugacy_certificate(&[mirror()], &[mirror()], DEFAULT_CANDIDATE_CAP).unwrap();
        let CertificateOutcome::Certified { witness, exceptional, .. } = out else { panic!("{out:?}") };
        assert!(witness.det().abs().is_one());
        assert!(exceptional.is_empty());

        let out = conjugacy_certificate(&[swap()], &[mirror()], DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(matches!(out, CertificateOutcome::Refuted { prime: 2, .. }));

        let r2 = &rot3() * &rot3();
        let out = conjugacy_certificate(&[rot3()], std::slice::from_ref(&r2), DEFAULT_CANDIDATE_CAP).unwrap();
        let CertificateOutcome::Certified { witness, .. } = out else { panic!("{out:?}") };
        assert_eq!(&rot3() * &witness, &witness * &r2);
        assert!(!witness.det().is_zero());
        // oracle: a GL(2, ℤ) conjugator exists among small matrices
        let small = (0..81i64).map(|code| {
            let e: Vec<i64> = (0..4).map(|k| (code / 3i64.pow(k)) % 3 - 1).collect();
            IntMatrix::from_i64(2, 2, &e).unwrap()
        });
        assert!(small.into_iter().any(|x| x.det().abs().is_one() && &rot3() * &x == &x * &r2));

        let out = conjugacy_certificate(&[IntMatrix::diag(&[2])], &[IntMatrix::diag(&[3])], 10).unwrap();
        assert_eq!(out, CertificateOutcome::NotRationallyConjugate);
    }

    fn cyclic(g: IntMatrix, order: u32) -> PointGroup {
        let d = g.rows();
        PointGroup::new(d, vec![g], vec![Word::parse(&format!("x1^{order}")).unwrap()], 100).unwrap()
    }

    #[test]
    fn pair_examples() {
        let g1 = cyclic(swap(), 2);
        let g2 = cyclic(mirror(), 2);
        let two = PrimeSet::single(2);
        let three = PrimeSet::single(3);
        let same = zclass_pair_profinite_conjugate(&g1, &g1, &two, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(same.conjugate);
        let r = zclass_pair_profinite_conjugate(&g1, &g2, &two, DEFAULT_CANDIDATE_CAP).unwrap();
        assert_eq!(r, PairConjugacy { conjugate: false, separated_by: Some(LocalTest::Mod(2)), witness_image: None });
        let r = zclass_pair_profinite_conjugate(&g1, &g2, &three, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(r.conjugate);
    }

    #[test]
    fn brute_force_matches_examples() {
        assert!(brute_force_conjugate_mod(&[swap()], &[mirror()], 2).is_none());
        assert!(brute_force_conjugate_mod(&[swap()], &[mirror()], 3).is_some());
    }

    fn finite_order_2x2() -> impl Strategy<Value = IntMatrix> {
        let pool: Vec<IntMatrix> = (0..81i64)
            .map(|code| {
                let e: Vec<i64> = (0..4).map(|k| (code / 3i64.pow(k)) % 3 - 1).collect();
                IntMatrix::from_i64(2, 2, &e).unwrap()
            })
            .filter(|x| x.det().abs().is_one() && (1..=6).any(|k| x.pow(k).is_identity()))
            .collect();
        proptest::sample::select(pool)
    }

    /// Exhaustive oracle: some residue solution mod m lifts.
    fn lifts_by_enumeration(a: &IntMatrix, b: &IntMatrix, m: u64) -> bool {
        let p = problem(vec![a.clone()], vec![b.clone()], PrimeSet::dividing(m).to_string().trim_matches(|c| c == '{' || c == '}'));
        let space = IntertwinerSpace::new(&p.a, &p.b).unwrap();
        space
            .solutions_mod(m, None, 1 << 12)
            .unwrap()
            .iter()
            .any(|x| space.lift(&x.to_int(), m).unwrap().is_some_and(|w| w.verify(&p)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn kernel_search_agrees_with_residue_lifting(a in finite_order_2x2(), b in finite_order_2x2(), p in prop_oneof![Just(2u64), Just(3u64)]) {
            let pr = problem(vec![a.clone()], vec![b.clone()], &p.to_string());
            let verdict = conjugate_over_zpi(&pr).unwrap();
            prop_assert_eq!(verdict.is_conjugate(), lifts_by_enumeration(&a, &b, p));
            if let ConjugacyVerdict::Conjugate(w) = &verdict {
                prop_assert!(w.verify(&pr));
                prop_assert!(brute_force_conjugate_mod(std::slice::from_ref(&a), std::slice::from_ref(&b), p * p).is_some());
            }
            if let ConjugacyVerdict::NotConjugateMod(m) = verdict {
                prop_assert!(brute_force_conjugate_mod(&[a], &[b], m).is_none());
            }
        }

        #[test]
        fn conjugacy_is_symmetric(a in finite_order_2x2(), b in finite_order_2x2()) {
            let two: PrimeSet = PrimeSet::single(2);
            let ab = conjugate_over_zpi(&ConjugacyProblem::new(vec![a.clone()], vec![b.clone()], two.clone()).unwrap()).unwrap();
            let ba = conjugate_over_zpi(&ConjugacyProblem::new(vec![b.clone()], vec![a.clone()], two).unwrap()).unwrap();
            prop_assert_eq!(ab.is_conjugate(), ba.is_conjugate());
            if !q_conjugacy_precheck(&[a], &[b]).unwrap() {
                prop_assert!(!ab.is_conjugate());
            }
        }

        #[test]
        fn local_conjugacy_implies_residue_solutions(a in finite_order_2x2(), b in finite_order_2x2(), p in prop_oneof![Just(2u64), Just(3u64)]) {
            let space = IntertwinerSpace::new(&[a], &[b]).unwrap();
            if space.is_locally_conjugate(p, None, 1 << 16).unwrap() {
                prop_assert!(space.has_invertible_mod(p, None, 1 << 16).unwrap());
                prop_assert!(space.has_invertible_mod(p * p, None, 1 << 16).unwrap());
            }
        }
    }
}
