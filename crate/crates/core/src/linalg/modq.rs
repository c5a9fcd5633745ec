//! Diagonalisation over ℤ/qℤ with machine-word entries, for systems too large
//! for the exact Smith form (bar-resolution cochains).
//!
//! Row and column operations are unimodular over ℤ and therefore invertible
//! over ℤ/q; the diagonal `d_k` obtained this way determines the module
//! structure: the kernel is `⊕ ann(d_k) ⊕ (ℤ/q)^{free}` and the cokernel is
//! `⊕ ℤ/gcd(d_k, q)`.

use num_integer::Integer;

/// Result of [`diagonalize_mod`].
#[derive(Clone, Debug)]
pub struct ModDiagonal {
    pub modulus: u64,
    pub rows: usize,
    pub cols: usize,
    /// Non-zero diagonal entries in `[1, q)`, one per pivot.
    pub diag: Vec<u64>,
    /// `V⁻¹` (cols × cols) with `U·M·V = D`, when requested.
    pub v_inv: Option<Vec<Vec<u64>>>,
}

impl ModDiagonal {
    /// Additive orders of the kernel coordinates `y = V⁻¹x`: position `k`
    /// ranges over multiples of `q / order_k`.
    pub fn kernel_orders(&self) -> Vec<u64> {
        let q = self.modulus;
        let mut out: Vec<u64> = self.diag.iter().map(|&d| d.gcd(&q)).collect();
        out.extend(std::iter::repeat_n(q, self.cols - self.diag.len()));
        out
    }

    /// `|ker M|` over ℤ/q, or `None` on overflow.
    pub fn kernel_size(&self) -> Option<u128> {
        self.kernel_orders().iter().try_fold(1u128, |acc, &o| acc.checked_mul(o as u128))
    }

    /// Orders of the cyclic summands of the cokernel `(ℤ/q)^rows / im M`
    /// (summands of order 1 omitted).
    pub fn cokernel_orders(&self) -> Vec<u64> {
        let q = self.modulus;
        let mut out: Vec<u64> = self.diag.iter().map(|&d| d.gcd(&q)).filter(|&o| o > 1).collect();
        out.extend(std::iter::repeat_n(q, self.rows - self.diag.len()));
        out
    }
}

fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// `(g, s, t)` with `g = gcd(a, b) = s·a + t·b`, for `a, b > 0`.
fn ext_gcd(a: u64, b: u64) -> (u64, i128, i128) {
    let e = (a as i128).extended_gcd(&(b as i128));
    (e.gcd as u64, e.x, e.y)
}

fn to_res(x: i128, q: u64) -> u64 {
    x.rem_euclid(q as i128) as u64
}

/// Replaces rows (or columns) `x, y` by `s·x + t·y` and `−(b/g)·x + (a/g)·y`.
fn combine(x: &mut [u64], y: &mut [u64], c: [u64; 4], q: u64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let nx = (mulmod(c[0], *xi, q) + mulmod(c[1], *yi, q)) % q;
        let ny = (mulmod(c[2], *xi, q) + mulmod(c[3], *yi, q)) % q;
        *xi = nx;
        *yi = ny;
    }
}

fn two_rows<T>(v: &mut [Vec<T>], i: usize, j: usize) -> (&mut Vec<T>, &mut Vec<T>) {
    assert!(i < j);
    let (lo, hi) = v.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}

/// Diagonalises `m` (given by rows, entries already reduced mod `q`) over
/// ℤ/qℤ. When `track` is set, the inverse column transform is returned.
pub fn diagonalize_mod(mut m: Vec<Vec<u64>>, cols: usize, q: u64, track: bool) -> ModDiagonal {
    assert!(q >= 2, "modulus must be at least 2");
    let rows = m.len();
    let mut v_inv: Option<Vec<Vec<u64>>> = track.then(|| {
        (0..cols)
            .map(|i| {
                let mut r = vec![0; cols];
                r[i] = 1;
                r
            })
            .collect()
    });
    let mut diag = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        // pivot: smallest gcd with q, stopping early at a unit
        let mut best: Option<(u64, usize, usize)> = None;
        'search: for (i, row) in m.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if x != 0 {
                    let g = x.gcd(&q);
                    if best.is_none_or(|b| g < b.0) {
                        best = Some((g, i, j));
                        if g == 1 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        m.swap(k, pi);
        if pj != k {
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            if let Some(v) = v_inv.as_mut() {
                v.swap(k, pj);
            }
        }
        loop {
            let mut dirty = false;
            // clear column k below the pivot with row operations
            for i in k + 1..rows {
                let b = m[i][k];
                if b == 0 {
                    continue;
                }
                let a = m[k][k];
                let c = bezout_coeffs(a, b, q);
                let (rk, ri) = two_rows(&mut m, k, i);
                combine(rk, ri, c, q);
            }
            // clear row k right of the pivot with column operations
            for j in k + 1..cols {
                let b = m[k][j];
                if b == 0 {
                    continue;
                }
                let a = m[k][k];
                let c = bezout_coeffs(a, b, q);
                for row in m.iter_mut() {
                    let (x, y) = (row[k], row[j]);
                    row[k] = (mulmod(c[0], x, q) + mulmod(c[1], y, q)) % q;
                    row[j] = (mulmod(c[2], x, q) + mulmod(c[3], y, q)) % q;
                }
                if let Some(v) = v_inv.as_mut() {
                    // new columns = old·E with E = [[s, −b/g], [t, a/g]];
                    // V⁻¹ ← E⁻¹·V⁻¹ with E⁻¹ = [[a/g, b/g], [−t, s]]
                    let inv = [c[3], (q - c[2]) % q, (q - c[1]) % q, c[0]];
                    let (rk, rj) = two_rows(v, k, j);
                    combine(rk, rj, inv, q);
                }
                if (k + 1..rows).any(|i| m[i][k] != 0) {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        diag.push(m[k][k]);
        k += 1;
    }
    ModDiagonal { modulus: q, rows, cols, diag, v_inv }
}

/// Coefficients `[s, t, −b/g, a/g]` reduced mod `q`. When `b` is already a
/// multiple of `a` in ℤ/q the pivot is kept and only `b` is eliminated, so
/// the pivot value strictly decreases whenever it changes.
fn bezout_coeffs(a: u64, b: u64, q: u64) -> [u64; 4] {
    let ga = a.gcd(&q);
    if b.is_multiple_of(ga) {
        let step = q / ga;
        let inv = super::modular::inv_mod((a / ga) % step, step).unwrap_or(0);
        let t = mulmod(b / ga, inv, step.max(1));
        return [1, 0, (q - t % q) % q, 1];
    }
    let (g, s, t) = ext_gcd(a, b);
    [to_res(s, q), to_res(t, q), to_res(-((b / g) as i128), q), (a / g) % q]
}

/// Canonical invariant factors (each dividing the next, all `> 1`) of a
/// direct sum of cyclic groups of the given orders.
pub fn invariant_factors_of(orders: &[u64]) -> Vec<u64> {
    use std::collections::BTreeMap;
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &o in orders {
        let mut n = o;
        for p in super::prime_factors(o) {
            let mut pp = 1;
            while n % p == 0 {
                n /= p;
                pp *= p;
            }
            by_prime.entry(p).or_default().push(pp);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for powers in by_prime.values_mut() {
        powers.sort_unstable();
        // largest powers go to the last factors
        for (slot, pp) in out.iter_mut().rev().zip(powers.iter().rev()) {
            *slot *= pp;
        }
    }
    out
}
