use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// A Smith decomposition `M = P · S · Q`.
///
/// `P` and `Q` are unimodular; their inverses are kept alongside because
/// nearly every caller needs one of them (`P⁻¹` to transform right-hand
/// sides, `Q⁻¹` for kernel bases).
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub p: IntMatrix,
    pub s: IntMatrix,
    pub q: IntMatrix,
    pub p_inv: IntMatrix,
    pub q_inv: IntMatrix,
    pub rank: usize,
}

impl SnfResult {
    /// The non-zero diagonal entries d₁ | d₂ | … | d_r.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s[(i, i)].clone()).collect()
    }
}

struct Reducer {
    a: IntMatrix,
    // u·M·v = a and M = p·a·q throughout.
    u: IntMatrix,
    p: IntMatrix,
    v: IntMatrix,
    q: IntMatrix,
}

impl Reducer {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.p.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.q.swap_rows(i, j);
    }

    /// row[dst] += c · row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.a.add_row_multiple(dst, src, c);
        self.u.add_row_multiple(dst, src, c);
        self.p.add_col_multiple(src, dst, &-c);
    }

    /// col[dst] += c · col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.a.add_col_multiple(dst, src, c);
        self.v.add_col_multiple(dst, src, c);
        self.q.add_row_multiple(src, dst, &-c);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.p.negate_col(i);
    }

    fn smallest_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.a.rows() {
            for j in t..self.a.cols() {
                let x = &self.a[(i, j)];
                if x.is_zero() {
                    continue;
                }
                let ax = x.abs();
                if best.as_ref().is_none_or(|(_, _, b)| ax < *b) {
                    best = Some((i, j, ax));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }
}

/// Smith normal form with unimodular transforms.
///
/// Pivoting picks the entry of least absolute value in the remaining block,
/// clears its row and column by floor division, and restarts whenever a
/// smaller remainder appears. The divisibility chain is enforced by folding
/// any row containing a non-multiple of the pivot back into the pivot row.
pub fn snf(m: &IntMatrix) -> SnfResult {
    let (n, k) = (m.rows(), m.cols());
    let mut r = Reducer {
        a: m.clone(),
        u: IntMatrix::identity(n),
        p: IntMatrix::identity(n),
        v: IntMatrix::identity(k),
        q: IntMatrix::identity(k),
    };
    let mut rank = 0;
    for t in 0..n.min(k) {
        let Some((pi, pj)) = r.smallest_pivot(t) else { break };
        r.swap_rows(t, pi);
        r.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..n {
                if r.a[(i, t)].is_zero() {
                    continue;
                }
                let qt = r.a[(i, t)].div_floor(&r.a[(t, t)]);
                r.add_row(i, t, &-qt);
                dirty |= !r.a[(i, t)].is_zero();
            }
            for j in t + 1..k {
                if r.a[(t, j)].is_zero() {
                    continue;
                }
                let qt = r.a[(t, j)].div_floor(&r.a[(t, t)]);
                r.add_col(j, t, &-qt);
                dirty |= !r.a[(t, j)].is_zero();
            }
            if dirty {
                let (pi, pj) = r.smallest_pivot(t).expect("non-zero block");
                r.swap_rows(t, pi);
                r.swap_cols(t, pj);
                continue;
            }
            let pivot = r.a[(t, t)].clone();
            let offender = (t + 1..n).find(|&i| {
                (t + 1..k).any(|j| !r.a[(i, j)].is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => r.add_row(t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if r.a[(t, t)].is_negative() {
            r.negate_row(t);
        }
        rank = t + 1;
    }
    SnfResult { p: r.p, s: r.a, q: r.q, p_inv: r.u, q_inv: r.v, rank }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    /// Determinantal-divisor oracle: the k-th invariant factor is
    /// D_k / D_{k-1} where D_k is the gcd of all k×k minors.
    pub(crate) fn invariant_factors_by_minors(m: &IntMatrix) -> Vec<BigInt> {
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if cur.len() == k {
                    out.push(cur.clone());
                    return;
                }
                for i in start..n {
                    cur.push(i);
                    rec(i + 1, n, k, cur, out);
                    cur.pop();
                }
            }
            rec(0, n, k, &mut cur, &mut out);
            out
        }
        let mut factors = Vec::new();
        let mut prev = BigInt::one();
        for size in 1..=m.rows().min(m.cols()) {
            let mut g = BigInt::zero();
            for rs in subsets(m.rows(), size) {
                for cs in subsets(m.cols(), size) {
                    let data: Vec<BigInt> =
                        rs.iter().flat_map(|&i| cs.iter().map(move |&j| (i, j))).map(|ij| m[ij].clone()).collect();
                    let minor = IntMatrix::new(size, size, data).unwrap().det();
                    g = g.gcd(&minor);
                }
            }
            if g.is_zero() {
                break;
            }
            factors.push(&g / &prev);
            prev = g;
        }
        factors
    }

    pub(crate) fn check_snf_invariants(m: &IntMatrix, s: &SnfResult) {
        assert_eq!(&(&s.p * &s.s) * &s.q, *m, "P·S·Q = M");
        assert!(s.p.det().abs().is_one());
        assert!(s.q.det().abs().is_one());
        assert!((&s.p * &s.p_inv).is_identity());
        assert!((&s.q * &s.q_inv).is_identity());
        for i in 0..s.s.rows() {
            for j in 0..s.s.cols() {
                if i != j || i >= s.rank {
                    assert!(s.s[(i, j)].is_zero(), "off-diagonal or trailing entry");
                }
            }
        }
        for i in 0..s.rank {
            assert!(s.s[(i, i)].is_positive());
            if i + 1 < s.rank {
                assert!(s.s[(i + 1, i + 1)].is_multiple_of(&s.s[(i, i)]));
            }
        }
    }

    #[test]
    fn identity() {
        let s = snf(&IntMatrix::identity(3));
        assert!(s.p.is_identity() && s.q.is_identity() && s.s.is_identity());
        assert_eq!(s.rank, 3);
    }

    #[test]
    fn two_by_two_examples() {
        let m = IntMatrix::from_rows(&[[2, 4], [6, 8]]);
        let s = snf(&m);
        check_snf_invariants(&m, &s);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(invariant_factors_by_minors(&m), s.invariant_factors());

        let m = IntMatrix::diag(&[2, 3]);
        let s = snf(&m);
        check_snf_invariants(&m, &s);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn zero_and_rectangular() {
        let z = IntMatrix::zeros(2, 3);
        let s = snf(&z);
        check_snf_invariants(&z, &s);
        assert_eq!(s.rank, 0);
        let m = IntMatrix::from_rows(&[[4, 6, 10]]);
        let s = snf(&m);
        check_snf_invariants(&m, &s);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2)]);
        let empty = IntMatrix::zeros(0, 2);
        assert_eq!(snf(&empty).rank, 0);
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-9i64..=9, r * c)
                .prop_map(move |v| IntMatrix::from_i64(r, c, &v).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_determinantal_divisors(m in small_matrix()) {
            let s = snf(&m);
            check_snf_invariants(&m, &s);
            prop_assert_eq!(s.invariant_factors(), invariant_factors_by_minors(&m));
        }
    }
}
