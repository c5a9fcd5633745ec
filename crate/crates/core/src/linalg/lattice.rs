use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::modular::{inv_mod, reduce_big};
use super::{snf, IntMatrix, LinalgError, PrimeSet, SnfResult};

/// Integer basis (as columns) of the kernel of `m` over ℤ. The basis spans a
/// saturated sublattice, so it reduces to a basis of the kernel image modulo
/// any integer.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let s = snf(m);
    kernel_basis_from(&s, m.cols())
}

pub(crate) fn kernel_basis_from(s: &SnfResult, cols: usize) -> IntMatrix {
    let columns: Vec<Vec<BigInt>> = (s.rank..cols).map(|j| s.q_inv.column(j)).collect();
    IntMatrix::from_columns(cols, &columns)
}

/// The largest divisor of `n` supported on π.
pub fn pi_part(n: &BigInt, primes: &PrimeSet) -> BigInt {
    assert!(!n.is_zero(), "π-part of zero");
    let mut rest = n.abs();
    let mut part = BigInt::one();
    for p in primes.iter() {
        let p = BigInt::from(p);
        while rest.is_multiple_of(&p) {
            rest /= &p;
            part *= &p;
        }
    }
    part
}

/// Solutions of `M·x ≡ b (mod m)` as a particular solution plus kernel
/// generators with their additive orders. Every solution is hit exactly once
/// by `particular + Σ cᵢ·genᵢ` with `0 ≤ cᵢ < orderᵢ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolutionMod {
    pub modulus: u64,
    pub particular: Vec<u64>,
    pub kernel: Vec<(Vec<u64>, u64)>,
}

impl AffineSolutionMod {
    /// Number of solutions, or `None` on overflow.
    pub fn count(&self) -> Option<u128> {
        self.kernel.iter().try_fold(1u128, |acc, (_, o)| acc.checked_mul(*o as u128))
    }

    /// Visits every solution exactly once, in odometer order.
    pub fn iter(&self) -> SolutionIter<'_> {
        SolutionIter { sol: self, digits: vec![0; self.kernel.len()], current: Some(self.particular.clone()) }
    }
}

pub struct SolutionIter<'a> {
    sol: &'a AffineSolutionMod,
    digits: Vec<u64>,
    current: Option<Vec<u64>>,
}

impl Iterator for SolutionIter<'_> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.take()?;
        let m = self.sol.modulus;
        let mut next = out.clone();
        let mut advanced = false;
        for (k, (gen, order)) in self.sol.kernel.iter().enumerate() {
            for (x, g) in next.iter_mut().zip(gen) {
                *x = (*x + g) % m;
            }
            self.digits[k] += 1;
            if self.digits[k] < *order {
                advanced = true;
                break;
            }
            // order·gen ≡ 0, so the vector is back where this digit started
            self.digits[k] = 0;
        }
        if advanced {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Solves `M·x ≡ b (mod m)` through the integer Smith form of `M`, so prime,
/// prime-power and composite moduli share one code path. Returns `None` when
/// the system is inconsistent.
pub fn solve_mod(m: &IntMatrix, b: &[BigInt], modulus: u64) -> Result<Option<AffineSolutionMod>, LinalgError> {
    if modulus < 2 {
        return Err(LinalgError::InvalidModulus(modulus));
    }
    if b.len() != m.rows() {
        return Err(LinalgError::ShapeMismatch {
            expected: format!("right-hand side of length {}", m.rows()),
            found: format!("length {}", b.len()),
        });
    }
    Ok(solve_mod_with(&snf(m), m.cols(), b, modulus))
}

pub(crate) fn solve_mod_with(s: &SnfResult, cols: usize, b: &[BigInt], modulus: u64) -> Option<AffineSolutionMod> {
    let rows = s.s.rows();
    let c: Vec<u64> = s.p_inv.mul_vec(b).iter().map(|x| reduce_big(x, modulus)).collect();
    let mut y0 = vec![0u64; cols];
    // (index in y, step, order)
    let mut free: Vec<(usize, u64, u64)> = Vec::new();
    for i in 0..s.rank {
        let d = reduce_big(&s.s[(i, i)], modulus);
        let g = d.gcd(&modulus);
        if !c[i].is_multiple_of(g) {
            return None;
        }
        let step = modulus / g;
        if step > 1 {
            let inv = inv_mod((d / g) % step, step).expect("coprime after dividing by gcd");
            y0[i] = ((c[i] / g) as u128 * inv as u128 % step as u128) as u64;
        }
        if g > 1 {
            free.push((i, step, g));
        }
    }
    if c[s.rank..rows].iter().any(|&x| x != 0) {
        return None;
    }
    for i in s.rank..cols {
        free.push((i, 1, modulus));
    }
    let to_x = |y: &[u64]| -> Vec<u64> {
        let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
        s.q_inv.mul_vec(&yb).iter().map(|x| reduce_big(x, modulus)).collect()
    };
    let particular = to_x(&y0);
    let kernel = free
        .into_iter()
        .map(|(i, step, order)| {
            let mut e = vec![0u64; cols];
            e[i] = step;
            (to_x(&e), order)
        })
        .collect();
    Some(AffineSolutionMod { modulus, particular, kernel })
}

/// The matrix `P·S̄` whose integer column span is exactly the set of integer
/// points in the image of `M` over ℤ[π]. `S̄` replaces every invariant factor
/// of `M` by its π-part.
pub fn integral_image_basis(m: &IntMatrix, primes: &PrimeSet) -> IntMatrix {
    let s = snf(m);
    integral_image_basis_from(&s, primes)
}

pub(crate) fn integral_image_basis_from(s: &SnfResult, primes: &PrimeSet) -> IntMatrix {
    let mut sbar = s.s.clone();
    for i in 0..s.rank {
        sbar[(i, i)] = pi_part(&s.s[(i, i)], primes);
    }
    &s.p * &sbar
}

/// Decides whether `x` is an integer point of the ℤ[π]-image of `M`, that
/// is, whether it lies in the integer column span of `P·S̄`. On success the
/// returned `y` satisfies `(P·S̄)·y = x`.
pub fn integral_membership(m: &IntMatrix, x: &[BigInt], primes: &PrimeSet) -> Result<Option<Vec<BigInt>>, LinalgError> {
    if x.len() != m.rows() {
        return Err(LinalgError::ShapeMismatch {
            expected: format!("vector of length {}", m.rows()),
            found: format!("length {}", x.len()),
        });
    }
    Ok(integral_membership_with(&snf(m), m.cols(), x, primes))
}

pub(crate) fn integral_membership_with(
    s: &SnfResult,
    cols: usize,
    x: &[BigInt],
    primes: &PrimeSet,
) -> Option<Vec<BigInt>> {
    let z = s.p_inv.mul_vec(x);
    let mut y = vec![BigInt::zero(); cols];
    for (i, zi) in z.iter().enumerate() {
        if i < s.rank {
            let dbar = pi_part(&s.s[(i, i)], primes);
            let (q, r) = zi.div_rem(&dbar);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !zi.is_zero() {
            return None;
        }
    }
    Some(y)
}

/// Integer coordinates `y` with `gens·y = x`, when `x` lies in the lattice
/// spanned by the columns of `gens`.
pub fn lattice_membership(gens: &IntMatrix, x: &[BigInt]) -> Option<Vec<BigInt>> {
    if x.len() != gens.rows() {
        return None;
    }
    let s = snf(gens);
    let z = s.p_inv.mul_vec(x);
    let mut y = vec![BigInt::zero(); gens.cols()];
    for (i, zi) in z.iter().enumerate() {
        if i < s.rank {
            let (q, r) = zi.div_rem(&s.s[(i, i)]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !zi.is_zero() {
            return None;
        }
    }
    Some(s.q_inv.mul_vec(&y))
}

/// The finite abelian group `L_big / L_small` for full-rank lattices
/// `L_small ⊆ L_big ⊆ ℤⁿ`, each given by generating columns.
///
/// Structure comes from two Smith forms: one to get a basis of `L_big`, one
/// for the relation matrix expressing `L_small` in that basis.
#[derive(Clone, Debug)]
pub struct FiniteQuotient {
    n: usize,
    big_p_inv: IntMatrix,
    big_diag: Vec<BigInt>,
    rel_p_inv: IntMatrix,
    kept: Vec<usize>,
    invariant_factors: Vec<BigInt>,
    representatives: Vec<Vec<BigInt>>,
}

impl FiniteQuotient {
    pub fn new(big: &IntMatrix, small: &IntMatrix) -> Result<Self, LinalgError> {
        let n = big.rows();
        if small.rows() != n {
            return Err(LinalgError::ShapeMismatch {
                expected: format!("{n} rows"),
                found: format!("{} rows", small.rows()),
            });
        }
        let sb = snf(big);
        if sb.rank != n {
            return Err(LinalgError::Singular);
        }
        let big_diag: Vec<BigInt> = sb.invariant_factors();
        // basis of L_big: columns of P·diag(d)
        let mut basis = sb.p.clone();
        for (j, d) in big_diag.iter().enumerate() {
            for i in 0..n {
                basis[(i, j)] *= d;
            }
        }
        let mut this = FiniteQuotient {
            n,
            big_p_inv: sb.p_inv,
            big_diag,
            rel_p_inv: IntMatrix::identity(n),
            kept: Vec::new(),
            invariant_factors: Vec::new(),
            representatives: Vec::new(),
        };
        let mut rel_cols = Vec::with_capacity(small.cols());
        for j in 0..small.cols() {
            let c = this.big_coordinates(&small.column(j)).ok_or(LinalgError::ShapeMismatch {
                expected: "sublattice generators".into(),
                found: format!("column {j} outside the ambient lattice"),
            })?;
            rel_cols.push(c);
        }
        let rel = IntMatrix::from_columns(n, &rel_cols);
        let sr = snf(&rel);
        if sr.rank != n {
            return Err(LinalgError::Singular);
        }
        let rep_basis = &basis * &sr.p;
        for i in 0..n {
            let d = &sr.s[(i, i)];
            if !d.is_one() {
                this.kept.push(i);
                this.invariant_factors.push(d.clone());
                this.representatives.push(rep_basis.column(i));
            }
        }
        this.rel_p_inv = sr.p_inv;
        Ok(this)
    }

    fn big_coordinates(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut u = self.big_p_inv.mul_vec(x);
        for (ui, d) in u.iter_mut().zip(&self.big_diag) {
            let (q, r) = ui.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            *ui = q;
        }
        Some(u)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Invariant factors `> 1`, each dividing the next; empty for the trivial
    /// group.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn representatives(&self) -> &[Vec<BigInt>] {
        &self.representatives
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn exponent(&self) -> BigInt {
        self.invariant_factors.last().cloned().unwrap_or_else(BigInt::one)
    }

    /// Coordinates of the class of `x` (which must lie in `L_big`), reduced
    /// modulo the invariant factors.
    pub fn coordinates(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        let u = self.big_coordinates(x)?;
        let w = self.rel_p_inv.mul_vec(&u);
        Some(self.kept.iter().zip(&self.invariant_factors).map(|(&i, d)| w[i].mod_floor(d)).collect())
    }

    /// `Σ cᵢ·repᵢ`
    pub fn element(&self, coords: &[BigInt]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.n];
        for (c, rep) in coords.iter().zip(&self.representatives) {
            for (vi, ri) in v.iter_mut().zip(rep) {
                *vi += c * ri;
            }
        }
        v
    }
}
