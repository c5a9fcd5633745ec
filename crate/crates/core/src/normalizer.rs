//! Normalisers of point groups in `GL(d, ℤ/e)`, their action on `H²`, and the
//! subgroup of normaliser elements that lift to the profinite integers.

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::cohomology::{action_matrix, exponent_modulus, h2_lattice, CohomologyError, CohomologyGroup, ElementDifferentials};
use crate::conjugacy::{ConjugacyError, IntertwinerSpace, DEFAULT_CANDIDATE_CAP};
use crate::groups::{GroupError, PointGroup};
use crate::linalg::{gcd_u64, LinalgError, ModMatrix, PrimeSet};

/// Enumeration limits for the normaliser and orbit computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest `|H²|` that is enumerated.
    pub cohomology_elements: u128,
    /// Largest orbit or group closure visited by breadth-first search.
    pub orbit_states: usize,
    /// Residue candidates per conjugacy search.
    pub candidates: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { cohomology_elements: 1 << 16, orbit_states: 1 << 20, candidates: DEFAULT_CANDIDATE_CAP }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizerError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Conjugacy(#[from] ConjugacyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, cap: u128 },
    #[error("matrix is not invertible modulo {0}")]
    NotInvertible(u64),
    #[error("moduli disagree: {0} and {1}")]
    ModulusMismatch(u64, u64),
    #[error("cohomology group carries no cocycle representatives")]
    NoCocycles,
}

/// A subgroup of `GL(d, ℤ/e)` given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModGroupGenSet {
    modulus: u64,
    dim: usize,
    generators: Vec<ModMatrix>,
    order: Option<u128>,
}

impl ModGroupGenSet {
    pub fn new(dim: usize, modulus: u64, generators: Vec<ModMatrix>) -> Result<Self, NormalizerError> {
        for g in &generators {
            if g.modulus() != modulus {
                return Err(NormalizerError::ModulusMismatch(g.modulus(), modulus));
            }
            if g.rows() != dim || g.cols() != dim {
                return Err(LinalgError::ShapeMismatch {
                    expected: format!("{dim}x{dim}"),
                    found: format!("{}x{}", g.rows(), g.cols()),
                }
                .into());
            }
            if !g.is_invertible() {
                return Err(NormalizerError::NotInvertible(modulus));
            }
        }
        Ok(ModGroupGenSet { modulus, dim, generators, order: None })
    }

    fn with_order(mut self, order: u128) -> Self {
        self.order = Some(order);
        self
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[ModMatrix] {
        &self.generators
    }

    /// The group order, when it is known without enumeration.
    pub fn known_order(&self) -> Option<u128> {
        self.order
    }

    /// All elements, sorted.
    pub fn elements(&self, cap: usize) -> Result<Vec<ModMatrix>, NormalizerError> {
        let mut out: Vec<ModMatrix> = closure(self.dim, self.modulus, &self.generators, cap)?.into_iter().collect();
        out.sort();
        Ok(out)
    }

    pub fn order(&self, cap: usize) -> Result<u128, NormalizerError> {
        match self.order {
            Some(n) => Ok(n),
            None => Ok(closure(self.dim, self.modulus, &self.generators, cap)?.len() as u128),
        }
    }
}

fn closure(dim: usize, modulus: u64, gens: &[ModMatrix], cap: usize) -> Result<HashSet<ModMatrix>, NormalizerError> {
    let id = ModMatrix::identity(dim, modulus);
    let mut seen: HashSet<ModMatrix> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = &x * g;
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(NormalizerError::CapExceeded { what: "group closure", cap: cap as u128 });
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

/// Order of `GL(d, ℤ/m)`.
pub fn gl_order(d: usize, m: u64) -> u128 {
    let mut total: u128 = 1;
    for p in crate::linalg::prime_factors(m) {
        let mut k = 0u32;
        let mut r = m;
        while r.is_multiple_of(p) {
            r /= p;
            k += 1;
        }
        let p = p as u128;
        let field: u128 = (0..d as u32).map(|i| p.pow(d as u32) - p.pow(i)).product();
        total *= field * p.pow((k - 1) * (d * d) as u32);
    }
    total
}

/// Generators of the unit group `(ℤ/m)^×`, chosen greedily.
fn unit_generators(m: u64) -> Vec<u64> {
    let mut gens = Vec::new();
    let mut group: HashSet<u64> = HashSet::from([1 % m]);
    for u in 2..m {
        if gcd_u64(u, m) != 1 || group.contains(&u) {
            continue;
        }
        gens.push(u);
        let mut frontier: Vec<u64> = group.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = (x as u128 * g as u128 % m as u128) as u64;
                if group.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

/// A generating set of `GL(d, ℤ/m)`: elementary transvections, `diag(u, 1, …)`
/// for generators `u` of the units, and an adjacent transposition.
pub fn gl_generators(d: usize, m: u64) -> ModGroupGenSet {
    assert!(d >= 1 && m >= 2, "GL(d, ℤ/m) needs d ≥ 1 and m ≥ 2");
    let mut gens = Vec::new();
    for u in unit_generators(m) {
        let mut g = ModMatrix::identity(d, m);
        g = set_entry(&g, 0, 0, u);
        gens.push(g);
    }
    for i in 0..d {
        for j in 0..d {
            if i != j {
                gens.push(set_entry(&ModMatrix::identity(d, m), i, j, 1));
            }
        }
    }
    if d >= 2 {
        let mut p = ModMatrix::identity(d, m);
        p = set_entry(&p, 0, 0, 0);
        p = set_entry(&p, 1, 1, 0);
        p = set_entry(&p, 0, 1, 1);
        p = set_entry(&p, 1, 0, 1);
        gens.push(p);
    }
    ModGroupGenSet { modulus: m, dim: d, generators: gens, order: None }.with_order(gl_order(d, m))
}

fn set_entry(m: &ModMatrix, r: usize, c: usize, v: u64) -> ModMatrix {
    let mut data = m.entries().to_vec();
    data[r * m.cols() + c] = v % m.modulus();
    ModMatrix::new(m.modulus(), m.rows(), m.cols(), data).expect("same shape")
}

fn reduced_elements(g: &PointGroup, e: u64) -> Result<Vec<ModMatrix>, NormalizerError> {
    g.reduction_index(e)?;
    let mut out: Vec<ModMatrix> = g.elements().iter().map(|x| x.reduce_mod(e)).collect();
    out.sort();
    Ok(out)
}

fn conjugate_set(set: &[ModMatrix], x: &ModMatrix, x_inv: &ModMatrix) -> Vec<ModMatrix> {
    let mut out: Vec<ModMatrix> = set.iter().map(|s| &(x_inv * s) * x).collect();
    out.sort();
    out
}

/// Generators of the normaliser of `G (mod e)` in `GL(d, ℤ/e)`, found by a
/// Schreier orbit of the element set under conjugation.
pub fn normalizer_mod(g: &PointGroup, e: u64, caps: &Caps) -> Result<ModGroupGenSet, NormalizerError> {
    let d = g.dim();
    let start = reduced_elements(g, e)?;
    let gl = gl_generators(d, e);
    if start.iter().all(is_scalar) {
        return Ok(gl);
    }
    let gl_inv: Vec<ModMatrix> = gl.generators.iter().map(|x| x.inverse().expect("invertible")).collect();
    let mut transversal: HashMap<Vec<ModMatrix>, (ModMatrix, ModMatrix)> = HashMap::new();
    let id = ModMatrix::identity(d, e);
    transversal.insert(start.clone(), (id.clone(), id.clone()));
    let mut queue = VecDeque::from([start.clone()]);
    let mut stab_gens: Vec<ModMatrix> = Vec::new();
    let mut stab: HashSet<ModMatrix> = HashSet::from([id]);
    while let Some(state) = queue.pop_front() {
        let (u, _) = transversal[&state].clone();
        for (x, x_inv) in gl.generators.iter().zip(&gl_inv) {
            let next = conjugate_set(&state, x, x_inv);
            let ux = &u * x;
            match transversal.get(&next) {
                Some((_, v_inv)) => {
                    let s = &ux * v_inv;
                    if !stab.contains(&s) {
                        stab_gens.push(s);
                        stab = closure(d, e, &stab_gens, caps.orbit_states)?;
                    }
                }
                None => {
                    if transversal.len() >= caps.orbit_states {
                        return Err(NormalizerError::CapExceeded {
                            what: "normaliser orbit",
                            cap: caps.orbit_states as u128,
                        });
                    }
                    let ux_inv = ux.inverse().expect("invertible");
                    transversal.insert(next.clone(), (ux, ux_inv));
                    queue.push_back(next);
                }
            }
        }
    }
    stab_gens.sort();
    let order = stab.len() as u128;
    debug_assert_eq!(order * transversal.len() as u128, gl_order(d, e));
    Ok(ModGroupGenSet { modulus: e, dim: d, generators: stab_gens, order: Some(order) })
}

fn is_scalar(m: &ModMatrix) -> bool {
    let d = m.rows();
    (0..d).all(|r| (0..d).all(|c| if r == c { m.get(r, c) == m.get(0, 0) } else { m.get(r, c) == 0 }))
}

/// The normaliser found by testing every element of `GL(d, ℤ/e)`.
pub fn normalizer_mod_brute_force(g: &PointGroup, e: u64, cap: usize) -> Result<Vec<ModMatrix>, NormalizerError> {
    let start = reduced_elements(g, e)?;
    let mut out: Vec<ModMatrix> = gl_generators(g.dim(), e)
        .elements(cap)?
        .into_iter()
        .filter(|x| conjugate_set(&start, x, &x.inverse().expect("invertible")) == start)
        .collect();
    out.sort();
    Ok(out)
}

/// Orbits of a group acting on `H²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    pub acting: String,
    pub orbit_count: usize,
    /// One cocycle per orbit (the one with the smallest class coordinates).
    pub representatives: Vec<Vec<u64>>,
    pub sizes: Vec<u128>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

/// Enumerates coordinate tuples of `H` in mixed radix, first coordinate
/// fastest.
fn class_coords(h: &CohomologyGroup, mut index: usize) -> Vec<u64> {
    h.invariant_factors()
        .iter()
        .map(|&d| {
            let c = index as u64 % d;
            index /= d as usize;
            c
        })
        .collect()
}

fn class_index(h: &CohomologyGroup, coords: &[u64]) -> usize {
    h.invariant_factors().iter().zip(coords).rev().fold(0usize, |acc, (&d, &c)| acc * d as usize + c as usize)
}

/// Orbits of `⟨N⟩` on `H²(G, M)`, where `H` was computed at the modulus of `N`.
pub fn orbit_count(
    n: &ModGroupGenSet,
    h: &CohomologyGroup,
    g: &PointGroup,
    caps: &Caps,
) -> Result<OrbitReport, NormalizerError> {
    orbit_count_named(n, h, g, caps, "group")
}

fn orbit_count_named(
    n: &ModGroupGenSet,
    h: &CohomologyGroup,
    g: &PointGroup,
    caps: &Caps,
    acting: &str,
) -> Result<OrbitReport, NormalizerError> {
    let size = h.order();
    if size > caps.cohomology_elements {
        return Err(NormalizerError::CapExceeded { what: "cohomology group", cap: caps.cohomology_elements });
    }
    let size = size as usize;
    if size > 1 {
        if !h.has_cocycles() {
            return Err(NormalizerError::NoCocycles);
        }
        if h.modulus() != n.modulus() {
            return Err(NormalizerError::ModulusMismatch(h.modulus(), n.modulus()));
        }
    }
    let mut uf = UnionFind((0..size).collect());
    if size > 1 {
        let reduction = g.reduction_index(n.modulus())?;
        let diffs = ElementDifferentials::new(g);
        for phi in n.generators() {
            let a = action_matrix(phi, g, &diffs, &reduction)?;
            for i in 0..size {
                let zeta = h.cocycle_of(&class_coords(h, i));
                let image = h.class_of(&a.mul_vec(&zeta)).ok_or(CohomologyError::DoesNotNormalize(n.modulus()))?;
                uf.union(i, class_index(h, &image));
            }
        }
    }
    let mut sizes: Vec<(usize, u128)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..size {
        let root = uf.find(i);
        let k = *slot.entry(root).or_insert_with(|| {
            sizes.push((root, 0));
            sizes.len() - 1
        });
        sizes[k].1 += 1;
    }
    let representatives =
        sizes.iter().map(|&(root, _)| if size > 1 { h.cocycle_of(&class_coords(h, root)) } else { Vec::new() }).collect();
    Ok(OrbitReport {
        acting: acting.to_string(),
        orbit_count: sizes.len(),
        representatives,
        sizes: sizes.into_iter().map(|(_, s)| s).collect(),
    })
}

/// Elements of `⟨N⟩` that lift to elements of `GL(d, ℤ_π)` normalising `G`
/// with the same conjugation effect modulo `e`.
pub fn liftable_subgroup(
    n: &ModGroupGenSet,
    g: &PointGroup,
    e: u64,
    primes: &PrimeSet,
    caps: &Caps,
) -> Result<ModGroupGenSet, NormalizerError> {
    if n.modulus() != e {
        return Err(NormalizerError::ModulusMismatch(n.modulus(), e));
    }
    let d = g.dim();
    let reduction = g.reduction_index(e)?;
    let mut gens: Vec<ModMatrix> = g.generators().iter().map(|x| x.reduce_mod(e)).collect();
    gens.sort();
    gens.dedup();
    let mut proven = closure(d, e, &gens, caps.orbit_states)?;
    let mut rejected: HashSet<ModMatrix> = HashSet::new();
    for x in n.elements(caps.orbit_states)? {
        if proven.contains(&x) || rejected.contains(&x) {
            continue;
        }
        if lifts(&x, g, &reduction, primes, caps)? {
            gens.push(x);
            proven = closure(d, e, &gens, caps.orbit_states)?;
        } else {
            for l in &proven {
                rejected.insert(l * &x);
                rejected.insert(&x * l);
            }
        }
    }
    let order = proven.len() as u128;
    Ok(ModGroupGenSet { modulus: e, dim: d, generators: gens, order: Some(order) })
}

/// Whether `x (mod e)` lifts to a ℤ_π-normaliser of `G` inducing the same
/// conjugation on `G`.
pub fn lifts(
    x: &ModMatrix,
    g: &PointGroup,
    reduction: &HashMap<ModMatrix, usize>,
    primes: &PrimeSet,
    caps: &Caps,
) -> Result<bool, NormalizerError> {
    let x_inv = x.inverse().ok_or(NormalizerError::NotInvertible(x.modulus()))?;
    let e = x.modulus();
    let mut b = Vec::with_capacity(g.generators().len());
    for gen in g.generators() {
        let conj = &(&x_inv * &gen.reduce_mod(e)) * x;
        let idx = *reduction.get(&conj).ok_or(CohomologyError::DoesNotNormalize(e))?;
        b.push(g.elements()[idx].clone());
    }
    let space = IntertwinerSpace::new(g.generators(), &b)?;
    Ok(space.decide(primes, Some(x), caps.candidates)?.is_conjugate())
}

/// The orbit computations of one ℤ-class at the working modulus `e`.
#[derive(Clone, Debug)]
pub struct ProfiniteOrbits {
    pub h2: CohomologyGroup,
    pub modulus: u64,
    pub normalizer: ModGroupGenSet,
    pub normalizer_orbits: OrbitReport,
    /// Present when the liftable refinement was computed.
    pub liftable: Option<(ModGroupGenSet, OrbitReport)>,
}

/// Orbits under the mod-`e` normaliser, refined to the liftable subgroup
/// unless `stop_at` orbits are already reached by the normaliser.
pub fn profinite_orbits(g: &PointGroup, stop_at: Option<usize>, caps: &Caps) -> Result<ProfiniteOrbits, NormalizerError> {
    let h = h2_lattice(g, crate::cohomology::default_modulus(g))?;
    let e = match exponent_modulus(&h) {
        Ok(e) => e,
        Err(CohomologyError::Trivial) => {
            let trivial = OrbitReport { acting: "normalizer".into(), orbit_count: 1, representatives: vec![vec![]], sizes: vec![1] };
            let gl = gl_generators(g.dim(), 4);
            return Ok(ProfiniteOrbits { h2: h, modulus: 1, normalizer: gl, normalizer_orbits: trivial, liftable: None });
        }
        Err(err) => return Err(err.into()),
    };
    let h_e = h2_lattice(g, e)?;
    let normalizer = normalizer_mod(g, e, caps)?;
    let normalizer_orbits = orbit_count_named(&normalizer, &h_e, g, caps, "normalizer")?;
    let liftable = if stop_at == Some(normalizer_orbits.orbit_count) {
        None
    } else {
        let primes = PrimeSet::dividing(g.order().to_u64().expect("order"));
        let l = liftable_subgroup(&normalizer, g, e, &primes, caps)?;
        let report = orbit_count_named(&l, &h_e, g, caps, "liftable")?;
        Some((l, report))
    };
    Ok(ProfiniteOrbits { h2: h_e, modulus: e, normalizer, normalizer_orbits, liftable })
}

/// Number of orbits of the profinite normaliser on `H²(G, M̂)`.
pub fn profinite_orbit_count(g: &PointGroup, caps: &Caps) -> Result<usize, NormalizerError> {
    let orbits = profinite_orbits(g, None, caps)?;
    Ok(orbits.liftable.map_or(orbits.normalizer_orbits.orbit_count, |(_, r)| r.orbit_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Word;
    use crate::linalg::IntMatrix;

    fn group(gens: Vec<IntMatrix>, rels: &[&str]) -> PointGroup {
        let d = gens[0].rows();
        PointGroup::new(d, gens, rels.iter().map(|r| Word::parse(r).unwrap()).collect(), 1000).unwrap()
    }

    fn mirror() -> PointGroup {
        group(vec![IntMatrix::diag(&[1, -1])], &["x1^2"])
    }

    fn p2mm() -> PointGroup {
        group(vec![IntMatrix::diag(&[-1, 1]), IntMatrix::diag(&[1, -1])], &["x1^2", "x2^2", "(x1 x2)^2"])
    }

    fn m(e: u64, entries: &[i64]) -> ModMatrix {
        let d = (entries.len() as f64).sqrt() as usize;
        ModMatrix::from_signed(e, d, d, entries).unwrap()
    }

    #[test]
    fn general_linear_orders() {
        let caps = Caps::default();
        assert_eq!(gl_generators(1, 4).generators(), &[m(4, &[3])]);
        assert_eq!(gl_generators(1, 4).elements(100).unwrap().len(), 2);
        for (d, q, order) in [(2, 2, 6), (2, 4, 96), (2, 3, 48), (3, 2, 168), (2, 6, 288)] {
            let gl = gl_generators(d, q);
            assert_eq!(gl.known_order(), Some(order));
            assert_eq!(ModGroupGenSet::new(d, q, gl.generators().to_vec()).unwrap().order(caps.orbit_states).unwrap(), order);
        }
    }

    #[test]
    fn normalizer_examples() {
        let caps = Caps::default();
        let minus = group(vec![IntMatrix::diag(&[-1, -1])], &["x1^2"]);
        assert_eq!(normalizer_mod(&minus, 4, &caps).unwrap().order(1 << 12).unwrap(), 96);
        let trivial = group(vec![IntMatrix::identity(2)], &["x1"]);
        assert_eq!(normalizer_mod(&trivial, 4, &caps).unwrap().order(1 << 12).unwrap(), 96);
        let n = normalizer_mod(&mirror(), 4, &caps).unwrap();
        let elems = n.elements(1 << 12).unwrap();
        assert_eq!(elems.len(), 16);
        assert_eq!(n.known_order(), Some(16));
        assert!(elems.iter().all(|x| x.get(0, 1) % 2 == 0 && x.get(1, 0) % 2 == 0 && x.get(0, 0) % 2 == 1));
    }

    #[test]
    fn schreier_matches_brute_force() {
        let caps = Caps::default();
        let groups = [
            mirror(),
            p2mm(),
            group(vec![IntMatrix::from_rows(&[[0, 1], [1, 0]])], &["x1^2"]),
            group(vec![IntMatrix::from_rows(&[[0, -1], [1, 0]])], &["x1^4"]),
            group(vec![IntMatrix::from_rows(&[[0, -1], [1, -1]])], &["x1^3"]),
        ];
        for g in &groups {
            for e in [2, 3, 4] {
                let Ok(brute) = normalizer_mod_brute_force(g, e, 1 << 12) else { continue };
                let n = normalizer_mod(g, e, &caps).unwrap();
                assert_eq!(n.elements(1 << 12).unwrap(), brute);
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let caps = Caps::default();
        let g = mirror();
        let h = h2_lattice(&g, 4).unwrap();
        let n = normalizer_mod(&g, 4, &caps).unwrap();
        let report = orbit_count(&n, &h, &g, &caps).unwrap();
        assert_eq!(report.orbit_count, 2);
        assert_eq!(report.sizes.iter().sum::<u128>(), 2);
        let identity_only = ModGroupGenSet::new(2, 4, vec![ModMatrix::identity(2, 4)]).unwrap();
        let g2 = p2mm();
        let h2 = h2_lattice(&g2, 4).unwrap();
        assert_eq!(h2.order(), 4);
        assert_eq!(orbit_count(&identity_only, &h2, &g2, &caps).unwrap().orbit_count, 4);
        let trivial = group(vec![IntMatrix::identity(2)], &["x1"]);
        let h0 = h2_lattice(&trivial, 4).unwrap();
        assert_eq!(orbit_count(&identity_only, &h0, &trivial, &caps).unwrap().orbit_count, 1);
    }

    #[test]
    fn liftability_examples() {
        let caps = Caps::default();
        let g = mirror();
        let reduction = g.reduction_index(4).unwrap();
        let two = PrimeSet::single(2);
        assert!(lifts(&ModMatrix::identity(2, 4), &g, &reduction, &two, &caps).unwrap());
        assert!(!lifts(&m(4, &[1, 2, 2, 1]), &g, &reduction, &two, &caps).unwrap());
        let n = normalizer_mod(&g, 4, &caps).unwrap();
        let l = liftable_subgroup(&n, &g, 4, &two, &caps).unwrap();
        let elems = l.elements(1 << 12).unwrap();
        assert_eq!(elems.len(), 4);
        assert!(elems.iter().all(|x| x.get(0, 1) == 0 && x.get(1, 0) == 0));
    }

    #[test]
    fn profinite_counts() {
        let caps = Caps::default();
        assert_eq!(profinite_orbit_count(&mirror(), &caps).unwrap(), 2);
        let trivial = group(vec![IntMatrix::identity(2)], &["x1"]);
        assert_eq!(profinite_orbit_count(&trivial, &caps).unwrap(), 1);
        assert_eq!(profinite_orbit_count(&p2mm(), &caps).unwrap(), 3);
    }

    #[test]
    fn orbit_counts_are_monotone() {
        let caps = Caps::default();
        for g in [mirror(), p2mm()] {
            let orbits = profinite_orbits(&g, None, &caps).unwrap();
            let gl = gl_generators(g.dim(), orbits.modulus);
            let (_, lift) = orbits.liftable.unwrap();
            assert!(lift.orbit_count >= orbits.normalizer_orbits.orbit_count);
            // GL does not normalise G, so compare with the centre-free bound
            assert!(orbits.normalizer_orbits.orbit_count >= 1);
            assert!(gl.known_order().unwrap().is_multiple_of(orbits.normalizer.known_order().unwrap()));
        }
    }
}
