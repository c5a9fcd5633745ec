use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{IntMatrix, LinalgError};

/// A matrix over ℤ/mℤ. Entries are kept in `[0, m)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ModMatrix {
    modulus: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

pub(crate) fn reduce_big(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

impl ModMatrix {
    pub fn new(modulus: u64, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self, LinalgError> {
        if modulus < 2 {
            return Err(LinalgError::InvalidModulus(modulus));
        }
        if rows * cols != data.len() {
            return Err(LinalgError::EntryCount { rows, cols, count: data.len() });
        }
        let data = data.into_iter().map(|x| x % modulus).collect();
        Ok(ModMatrix { modulus, rows, cols, data })
    }

    pub fn from_signed(modulus: u64, rows: usize, cols: usize, entries: &[i64]) -> Result<Self, LinalgError> {
        let data = entries.iter().map(|&x| x.rem_euclid(modulus as i64) as u64).collect();
        Self::new(modulus, rows, cols, data)
    }

    pub fn from_int(m: &IntMatrix, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let data = m.entries().iter().map(|x| reduce_big(x, modulus)).collect();
        ModMatrix { modulus, rows: m.rows(), cols: m.cols(), data }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        ModMatrix { modulus, rows: n, cols: n, data }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.data.iter().enumerate().all(|(k, &x)| x == u64::from(k / self.cols == k % self.cols))
    }

    pub fn try_mul(&self, rhs: &ModMatrix) -> Result<ModMatrix, LinalgError> {
        if self.modulus != rhs.modulus {
            return Err(LinalgError::MixedModulus(self.modulus, rhs.modulus));
        }
        if self.cols != rhs.rows {
            return Err(LinalgError::ShapeMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", rhs.rows),
            });
        }
        let m = self.modulus;
        let mut data = vec![0u64; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] as u128 * rhs.data[k * rhs.cols + j] as u128;
                }
                data[i * rhs.cols + j] = (acc % m as u128) as u64;
            }
        }
        Ok(ModMatrix { modulus: m, rows: self.rows, cols: rhs.cols, data })
    }

    pub fn add(&self, rhs: &ModMatrix) -> Result<ModMatrix, LinalgError> {
        self.zip_with(rhs, |a, b, m| (a + b) % m)
    }

    pub fn sub(&self, rhs: &ModMatrix) -> Result<ModMatrix, LinalgError> {
        self.zip_with(rhs, |a, b, m| (a + m - b) % m)
    }

    fn zip_with(&self, rhs: &ModMatrix, f: impl Fn(u64, u64, u64) -> u64) -> Result<ModMatrix, LinalgError> {
        if self.modulus != rhs.modulus {
            return Err(LinalgError::MixedModulus(self.modulus, rhs.modulus));
        }
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(LinalgError::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b, self.modulus)).collect();
        Ok(ModMatrix { modulus: self.modulus, rows: self.rows, cols: self.cols, data })
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let acc: u128 =
                    (0..self.cols).map(|k| self.data[i * self.cols + k] as u128 * v[k] as u128).sum();
                (acc % self.modulus as u128) as u64
            })
            .collect()
    }

    /// Determinant as a residue.
    pub fn det(&self) -> u64 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        if self.rows <= 5 {
            let idx: Vec<usize> = (0..self.rows).collect();
            det_laplace(&self.data, self.cols, 0, &idx, self.modulus)
        } else {
            reduce_big(&self.to_int().det(), self.modulus)
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.det().gcd(&self.modulus) == 1
    }

    /// Inverse via the adjugate, when the determinant is a unit.
    pub fn inverse(&self) -> Option<ModMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let m = self.modulus;
        let dinv = inv_mod(self.det(), m)?;
        if n == 1 {
            return Some(ModMatrix { modulus: m, rows: 1, cols: 1, data: vec![dinv] });
        }
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                // cofactor C_{ij}, stored transposed
                let minor: Vec<u64> = (0..n)
                    .filter(|&r| r != i)
                    .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| self.data[r * n + c])
                    .collect();
                let md = ModMatrix { modulus: m, rows: n - 1, cols: n - 1, data: minor }.det();
                let c = if (i + j) % 2 == 0 { md } else { (m - md) % m };
                data[j * n + i] = mul_mod(c, dinv, m);
            }
        }
        Some(ModMatrix { modulus: m, rows: n, cols: n, data })
    }

    /// Canonical lift with entries in `[0, m)`.
    pub fn to_int(&self) -> IntMatrix {
        IntMatrix::new(self.rows, self.cols, self.data.iter().map(|&x| BigInt::from(x)).collect())
            .expect("shape")
    }

    /// Reduction to a modulus dividing the current one.
    pub fn reduce(&self, modulus: u64) -> Result<ModMatrix, LinalgError> {
        if modulus < 2 {
            return Err(LinalgError::InvalidModulus(modulus));
        }
        if !self.modulus.is_multiple_of(modulus) {
            return Err(LinalgError::NotCoprime(self.modulus, modulus));
        }
        Ok(ModMatrix {
            modulus,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x % modulus).collect(),
        })
    }

    pub fn pow(&self, mut e: u64) -> ModMatrix {
        let mut base = self.clone();
        let mut acc = ModMatrix::identity(self.rows, self.modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

fn det_laplace(a: &[u64], n: usize, row: usize, cols: &[usize], m: u64) -> u64 {
    if cols.is_empty() {
        return 1 % m;
    }
    if cols.len() == 1 {
        return a[row * n + cols[0]] % m;
    }
    let mut acc = 0u64;
    for (k, &c) in cols.iter().enumerate() {
        let x = a[row * n + c];
        if x == 0 {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let term = mul_mod(x, det_laplace(a, n, row + 1, &rest, m), m);
        acc = if k % 2 == 0 { (acc + term) % m } else { (acc + m - term) % m };
    }
    acc
}

impl Mul for &ModMatrix {
    type Output = ModMatrix;

    fn mul(self, rhs: &ModMatrix) -> ModMatrix {
        self.try_mul(rhs).expect("modular product")
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                write!(f, " / ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, " (mod {})", self.modulus)
    }
}

/// Entrywise Chinese remaindering of equally shaped matrices whose moduli are
/// pairwise coprime. The result lives modulo the product of the moduli.
pub fn crt_combine(parts: &[ModMatrix]) -> Result<ModMatrix, LinalgError> {
    let first = parts.first().ok_or(LinalgError::Empty)?;
    let mut acc = first.clone();
    for part in &parts[1..] {
        if (part.rows, part.cols) != (acc.rows, acc.cols) {
            return Err(LinalgError::ShapeMismatch {
                expected: format!("{}x{}", acc.rows, acc.cols),
                found: format!("{}x{}", part.rows, part.cols),
            });
        }
        let (m1, m2) = (acc.modulus, part.modulus);
        let Some(inv) = inv_mod(m1 % m2, m2) else {
            return Err(LinalgError::NotCoprime(m1, m2));
        };
        let m = m1.checked_mul(m2).expect("combined modulus overflows u64");
        let data = acc
            .data
            .iter()
            .zip(&part.data)
            .map(|(&a, &b)| {
                let diff = (b + m2 - a % m2) % m2;
                let t = mul_mod(diff, inv, m2);
                (a as u128 + m1 as u128 * t as u128) as u64 % m
            })
            .collect();
        acc = ModMatrix { modulus: m, rows: acc.rows, cols: acc.cols, data };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: u64, m: u64) -> ModMatrix {
        ModMatrix::new(m, 1, 1, vec![x]).unwrap()
    }

    #[test]
    fn crt_scalars() {
        let c = crt_combine(&[scalar(1, 2), scalar(2, 3)]).unwrap();
        assert_eq!(c, scalar(5, 6));
        assert_eq!(crt_combine(&[scalar(1, 2)]).unwrap(), scalar(1, 2));
        let c = crt_combine(&[ModMatrix::identity(2, 2), ModMatrix::identity(2, 3)]).unwrap();
        assert_eq!(c, ModMatrix::identity(2, 6));
    }

    #[test]
    fn crt_errors() {
        assert_eq!(crt_combine(&[scalar(1, 2), scalar(1, 4)]), Err(LinalgError::NotCoprime(2, 4)));
        assert!(crt_combine(&[scalar(1, 2), ModMatrix::identity(2, 3)]).is_err());
        assert_eq!(crt_combine(&[]), Err(LinalgError::Empty));
    }

    #[test]
    fn mixed_modulus_is_rejected() {
        let a = ModMatrix::identity(2, 4);
        let b = ModMatrix::identity(2, 6);
        assert_eq!(a.try_mul(&b), Err(LinalgError::MixedModulus(4, 6)));
    }

    #[test]
    fn inverse_and_det() {
        let a = ModMatrix::from_signed(4, 2, 2, &[1, 2, 2, 1]).unwrap();
        assert_eq!(a.det(), (1 + 4 - 4));
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).is_identity());
        let sing = ModMatrix::from_signed(4, 2, 2, &[2, 0, 0, 1]).unwrap();
        assert!(sing.inverse().is_none());
        let big = ModMatrix::from_signed(7, 3, 3, &[1, 2, 3, 0, 1, 4, 5, 6, 0]).unwrap();
        assert!((&big * &big.inverse().unwrap()).is_identity());
    }

    #[test]
    fn det_agrees_with_integer_det() {
        let m = IntMatrix::from_rows(&[[3, -1, 2, 0], [1, 1, 0, 5], [-2, 4, 1, 1], [0, 2, -3, 1]]);
        for modulus in [2u64, 3, 4, 6, 12, 97] {
            assert_eq!(m.reduce_mod(modulus).det(), reduce_big(&m.det(), modulus));
        }
    }
}
