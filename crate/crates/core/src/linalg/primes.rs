use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::LinalgError;

/// A finite, sorted set of primes π.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PrimeSet(Vec<u64>);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeSet {
    pub fn new<I: IntoIterator<Item = u64>>(primes: I) -> Result<Self, LinalgError> {
        let mut v: Vec<u64> = primes.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&p| !is_prime(p)) {
            return Err(LinalgError::NotPrime(bad));
        }
        v.sort_unstable();
        v.dedup();
        Ok(PrimeSet(v))
    }

    pub fn single(p: u64) -> Self {
        Self::new([p]).expect("prime")
    }

    /// Primes dividing `n` (`n ≥ 1`).
    pub fn dividing(n: u64) -> Self {
        PrimeSet(prime_factors(n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// The squarefree product ∏ p.
    pub fn product(&self) -> u64 {
        self.0.iter().product()
    }

    pub fn union(&self, other: &PrimeSet) -> PrimeSet {
        PrimeSet::new(self.iter().chain(other.iter())).expect("primes")
    }

    pub fn is_subset(&self, other: &PrimeSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    /// True when `n` has no prime factor in the set.
    pub fn coprime_to(&self, n: &BigInt) -> bool {
        self.iter().all(|p| !(n % BigInt::from(p)).is_zero())
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for PrimeSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            v.push(part.parse::<u64>().map_err(|e| format!("bad prime {part:?}: {e}"))?);
        }
        PrimeSet::new(v).map_err(|e| e.to_string())
    }
}

/// Distinct prime factors of `n`, ascending. `n = 0` and `n = 1` have none.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while n > 1 && d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Distinct prime factors of a big integer. Only used on Smith invariants and
/// determinants of small matrices, which fit comfortably in 64 bits.
pub(crate) fn prime_factors_big(n: &BigInt) -> Vec<u64> {
    let n = n.abs();
    if n.is_zero() {
        return Vec::new();
    }
    prime_factors(n.to_u64().expect("integer too large to factor"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_parsing() {
        let p: PrimeSet = "3, 2,3".parse().unwrap();
        assert_eq!(p.as_slice(), &[2, 3]);
        assert_eq!(p.product(), 6);
        assert!("2,4".parse::<PrimeSet>().is_err());
        assert_eq!(PrimeSet::dividing(48).as_slice(), &[2, 3]);
        assert_eq!(p.to_string(), "{2,3}");
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_factors(1), Vec::<u64>::new());
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(prime_factors(97), vec![97]);
    }
}
