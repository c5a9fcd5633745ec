//! Finite matrix groups: closure, word bookkeeping, relators and the images
//! of a generating tuple under automorphisms.

mod coset;
mod word;

pub use coset::presentation_order;
pub use word::{Letter, Word};

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::linalg::{IntMatrix, ModMatrix};

/// Default bound on the number of elements produced by [`close_group`].
pub const DEFAULT_GROUP_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group closure exceeded {0} elements")]
    CapExceeded(usize),
    #[error("generators must be square matrices of one dimension")]
    BadShape,
    #[error("generator {0} is not invertible over the integers")]
    NotInvertible(usize),
    #[error("relator {index} uses generator x{generator} but only {available} generators exist")]
    GeneratorOutOfRange { index: usize, generator: usize, available: usize },
    #[error("relator {0} is not satisfied by the generators")]
    RelatorNotSatisfied(usize),
    #[error("matrix is not an element of the group")]
    NotInGroup,
    #[error("reduction modulo {0} is not injective on the group")]
    NotFaithfulMod(u64),
    #[error("word parse error: {0}")]
    Parse(String),
}

/// Breadth-first closure of `generators` under right multiplication.
///
/// Elements come out layer by layer (by word length), each layer sorted by
/// its entries. Every element is paired with the first word found for it.
pub fn close_group(generators: &[IntMatrix], cap: usize) -> Result<Vec<(IntMatrix, Word)>, GroupError> {
    let dim = check_generators(generators)?;
    let identity = IntMatrix::identity(dim);
    let mut seen: HashSet<IntMatrix> = HashSet::from([identity.clone()]);
    let mut out = vec![(identity, Word::empty())];
    let mut layer_start = 0;
    loop {
        let mut next: Vec<(IntMatrix, Word)> = Vec::new();
        for k in layer_start..out.len() {
            for (i, g) in generators.iter().enumerate() {
                let h = &out[k].0 * g;
                if seen.insert(h.clone()) {
                    if seen.len() > cap {
                        return Err(GroupError::CapExceeded(cap));
                    }
                    let mut w = out[k].1.clone();
                    w.push(Letter::new(i, false));
                    next.push((h, w));
                }
            }
        }
        if next.is_empty() {
            return Ok(out);
        }
        next.sort_by(|a, b| a.0.entries().cmp(b.0.entries()));
        layer_start = out.len();
        out.extend(next);
    }
}

fn check_generators(generators: &[IntMatrix]) -> Result<usize, GroupError> {
    let dim = generators.first().map_or(0, IntMatrix::rows);
    for (i, g) in generators.iter().enumerate() {
        if !g.is_square() || g.rows() != dim {
            return Err(GroupError::BadShape);
        }
        if !g.det().abs().is_one() {
            return Err(GroupError::NotInvertible(i));
        }
    }
    Ok(dim)
}

/// Evaluates a word given the generators and their inverses.
pub fn evaluate_word(word: &Word, generators: &[IntMatrix], inverses: &[IntMatrix]) -> IntMatrix {
    let dim = generators.first().map_or(0, IntMatrix::rows);
    word.letters().iter().fold(IntMatrix::identity(dim), |acc, l| {
        let m = if l.inverse { &inverses[l.generator] } else { &generators[l.generator] };
        &acc * m
    })
}

/// True iff every relator evaluates to the identity on `generators`.
pub fn check_relators(generators: &[IntMatrix], relators: &[Word]) -> bool {
    if relators.iter().any(|r| r.max_generator().is_some_and(|g| g >= generators.len())) {
        return false;
    }
    let needs_inverse = relators.iter().any(|r| r.letters().iter().any(|l| l.inverse));
    let inverses: Vec<IntMatrix> = if needs_inverse {
        match generators.iter().map(IntMatrix::inverse_unimodular).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => return false,
        }
    } else {
        Vec::new()
    };
    let Some(dim) = generators.first().map(IntMatrix::rows) else {
        // no generators: relators are necessarily empty words
        return relators.iter().all(Word::is_empty);
    };
    let one = IntMatrix::identity(dim);
    relators.iter().all(|r| evaluate_word(r, generators, &inverses) == one)
}

/// A finite subgroup of GL(d, ℤ) with an ordered generating tuple, a
/// presentation, and the full element list.
#[derive(Debug)]
pub struct PointGroup {
    dim: usize,
    generators: Vec<IntMatrix>,
    generator_inverses: Vec<IntMatrix>,
    relators: Vec<Word>,
    elements: Vec<IntMatrix>,
    words: Vec<Word>,
    index: HashMap<IntMatrix, usize>,
    table: OnceLock<CayleyTable>,
}

/// Multiplication and inverse tables on element indices.
#[derive(Debug)]
pub struct CayleyTable {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

impl CayleyTable {
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }
}

impl Clone for PointGroup {
    fn clone(&self) -> Self {
        PointGroup {
            dim: self.dim,
            generators: self.generators.clone(),
            generator_inverses: self.generator_inverses.clone(),
            relators: self.relators.clone(),
            elements: self.elements.clone(),
            words: self.words.clone(),
            index: self.index.clone(),
            table: OnceLock::new(),
        }
    }
}

impl PointGroup {
    /// Closes the generators (bounded by `cap`) and checks every relator.
    pub fn new(dim: usize, generators: Vec<IntMatrix>, relators: Vec<Word>, cap: usize) -> Result<Self, GroupError> {
        if generators.iter().any(|g| !g.is_square() || g.rows() != dim) {
            return Err(GroupError::BadShape);
        }
        for (index, r) in relators.iter().enumerate() {
            if let Some(g) = r.max_generator().filter(|&g| g >= generators.len()) {
                return Err(GroupError::GeneratorOutOfRange { index, generator: g + 1, available: generators.len() });
            }
        }
        let closed = if generators.is_empty() {
            vec![(IntMatrix::identity(dim), Word::empty())]
        } else {
            close_group(&generators, cap)?
        };
        let (elements, words): (Vec<_>, Vec<_>) = closed.into_iter().unzip();
        let index: HashMap<IntMatrix, usize> = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let generator_inverses: Vec<IntMatrix> = generators
            .iter()
            .map(|g| {
                // g has finite order, so its inverse is in the element list
                elements
                    .iter()
                    .find(|h| (g * *h).is_identity())
                    .cloned()
                    .expect("finite group contains inverses")
            })
            .collect();
        let one = IntMatrix::identity(dim);
        for (i, r) in relators.iter().enumerate() {
            if evaluate_word(r, &generators, &generator_inverses) != one {
                return Err(GroupError::RelatorNotSatisfied(i));
            }
        }
        Ok(PointGroup {
            dim,
            generators,
            generator_inverses,
            relators,
            elements,
            words,
            index,
            table: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn generator_inverses(&self) -> &[IntMatrix] {
        &self.generator_inverses
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn elements(&self) -> &[IntMatrix] {
        &self.elements
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn index_of(&self, g: &IntMatrix) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &IntMatrix) -> bool {
        self.index.contains_key(g)
    }

    /// Index of the generator `x_i` in the element list.
    pub fn generator_index(&self, i: usize) -> usize {
        self.index[&self.generators[i]]
    }

    pub fn element_to_word(&self, g: &IntMatrix) -> Result<&Word, GroupError> {
        self.index.get(g).map(|&i| &self.words[i]).ok_or(GroupError::NotInGroup)
    }

    pub fn evaluate(&self, w: &Word) -> IntMatrix {
        if self.generators.is_empty() {
            return IntMatrix::identity(self.dim);
        }
        evaluate_word(w, &self.generators, &self.generator_inverses)
    }

    /// True when the relators define a group of exactly this order.
    pub fn presentation_is_defining(&self, cap: usize) -> bool {
        presentation_order(self.generators.len(), &self.relators, cap) == Some(self.order())
    }

    pub fn table(&self) -> &CayleyTable {
        self.table.get_or_init(|| {
            let n = self.order();
            let mut mul = vec![0; n * n];
            for a in 0..n {
                for b in 0..n {
                    mul[a * n + b] = self.index[&(&self.elements[a] * &self.elements[b])];
                }
            }
            let inv = (0..n).map(|a| (0..n).find(|&b| mul[a * n + b] == 0).expect("inverse")).collect();
            CayleyTable { order: n, mul, inv }
        })
    }

    pub fn element_order(&self, i: usize) -> usize {
        let t = self.table();
        let mut k = 1;
        let mut x = i;
        while x != 0 {
            x = t.mul(x, i);
            k += 1;
        }
        k
    }

    /// Map from reductions modulo `e` to element indices; fails if two
    /// elements collide.
    pub fn reduction_index(&self, e: u64) -> Result<HashMap<ModMatrix, usize>, GroupError> {
        let mut map = HashMap::with_capacity(self.order());
        for (i, g) in self.elements.iter().enumerate() {
            if map.insert(g.reduce_mod(e), i).is_some() {
                return Err(GroupError::NotFaithfulMod(e));
            }
        }
        Ok(map)
    }

    fn evaluate_indices(&self, w: &Word, images: &[usize]) -> usize {
        let t = self.table();
        w.letters().iter().fold(0, |acc, l| {
            let g = images[l.generator];
            t.mul(acc, if l.inverse { t.inv(g) } else { g })
        })
    }

    fn generated_size(&self, images: &[usize]) -> usize {
        let t = self.table();
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &g in images {
                let y = t.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count
    }

    /// Element-index tuples `(σ(x₁),…,σ(x_k))` for σ ∈ Aut(G), in
    /// lexicographic order. Candidates are pruned by element order and by
    /// relators as soon as all their letters are assigned; generation is
    /// checked last. Requires the relators to define the group.
    pub fn automorphism_image_indices(&self) -> Vec<Vec<usize>> {
        let k = self.generators.len();
        let orders: Vec<usize> = (0..self.order()).map(|i| self.element_order(i)).collect();
        let candidates: Vec<Vec<usize>> = (0..k)
            .map(|i| {
                let o = orders[self.generator_index(i)];
                (0..self.order()).filter(|&j| orders[j] == o).collect()
            })
            .collect();
        // relators grouped by the last generator they mention
        let mut due: Vec<Vec<&Word>> = vec![Vec::new(); k];
        for r in &self.relators {
            if let Some(g) = r.max_generator() {
                due[g].push(r);
            }
        }
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        self.extend_images(&candidates, &due, &mut current, &mut out);
        out
    }

    fn extend_images(
        &self,
        candidates: &[Vec<usize>],
        due: &[Vec<&Word>],
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let pos = current.len();
        if pos == candidates.len() {
            if self.generated_size(current) == self.order() {
                out.push(current.clone());
            }
            return;
        }
        for &c in &candidates[pos] {
            current.push(c);
            if due[pos].iter().all(|r| self.evaluate_indices(r, current) == 0) {
                self.extend_images(candidates, due, current, out);
            }
            current.pop();
        }
    }

    /// The generator tuples `σ(X)` for σ ∈ Aut(G), as matrices.
    pub fn automorphism_images(&self) -> Vec<Vec<IntMatrix>> {
        self.automorphism_image_indices()
            .into_iter()
            .map(|t| t.into_iter().map(|i| self.elements[i].clone()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| Word::parse(w).unwrap()).collect()
    }

    fn rot3() -> IntMatrix {
        IntMatrix::from_rows(&[[0, -1], [1, -1]])
    }

    #[test]
    fn closure_examples() {
        let minus = IntMatrix::diag(&[-1, -1]);
        assert_eq!(close_group(&[minus], 100).unwrap().len(), 2);
        let r = rot3();
        assert!((&(&r * &r) * &r).is_identity());
        assert_eq!(close_group(&[r], 100).unwrap().len(), 3);
        let shear = IntMatrix::from_rows(&[[1, 1], [0, 1]]);
        assert_eq!(close_group(&[shear], 100), Err(GroupError::CapExceeded(100)));
        let singular = IntMatrix::diag(&[2, 1]);
        assert_eq!(close_group(&[singular], 100), Err(GroupError::NotInvertible(0)));
    }

    #[test]
    fn closure_is_stable_under_generator_permutation() {
        let a = IntMatrix::from_rows(&[[0, -1], [1, 0]]);
        let b = IntMatrix::diag(&[1, -1]);
        let s1: HashSet<IntMatrix> = close_group(&[a.clone(), b.clone()], 100).unwrap().into_iter().map(|x| x.0).collect();
        let s2: HashSet<IntMatrix> = close_group(&[b, a], 100).unwrap().into_iter().map(|x| x.0).collect();
        assert_eq!(s1.len(), 8);
        assert_eq!(s1, s2);
    }

    #[test]
    fn words_evaluate_to_elements() {
        let g = PointGroup::new(2, vec![rot3()], words(&["x1^3"]), 100).unwrap();
        assert!(g.element_to_word(&IntMatrix::identity(2)).unwrap().is_empty());
        assert_eq!(g.element_to_word(&rot3()).unwrap().len(), 1);
        let r2 = &rot3() * &rot3();
        assert_eq!(g.element_to_word(&r2).unwrap().len(), 2);
        for (e, w) in g.elements().iter().zip(g.words()) {
            assert_eq!(&g.evaluate(w), e);
        }
        assert_eq!(g.element_to_word(&IntMatrix::diag(&[1, -1])), Err(GroupError::NotInGroup));
    }

    #[test]
    fn relator_checks() {
        let minus = IntMatrix::diag(&[-1, -1]);
        assert!(check_relators(std::slice::from_ref(&minus), &words(&["x1^2"])));
        assert!(!check_relators(std::slice::from_ref(&minus), &words(&["x1^3"])));
        let a = IntMatrix::diag(&[1, -1]);
        let b = IntMatrix::diag(&[-1, 1]);
        assert!(check_relators(&[a.clone(), b.clone()], &words(&["x1^2", "x2^2", "(x1 x2)^2"])));
        let r4 = IntMatrix::from_rows(&[[0, -1], [1, 0]]);
        assert!(check_relators(&[r4, a], &words(&["x1^4", "x2^2", "(x1 x2)^2", "x2 x1 x2^-1 x1"])));
        assert_eq!(
            PointGroup::new(2, vec![minus], words(&["x1^3"]), 100).unwrap_err(),
            GroupError::RelatorNotSatisfied(0)
        );
    }

    #[test]
    fn automorphism_image_counts() {
        let c2 = PointGroup::new(2, vec![IntMatrix::diag(&[-1, -1])], words(&["x1^2"]), 100).unwrap();
        assert_eq!(c2.automorphism_images(), vec![vec![IntMatrix::diag(&[-1, -1])]]);

        let c3 = PointGroup::new(2, vec![rot3()], words(&["x1^3"]), 100).unwrap();
        let imgs = c3.automorphism_images();
        assert_eq!(imgs.len(), 2);
        assert!(imgs.contains(&vec![rot3()]));
        assert!(imgs.contains(&vec![&rot3() * &rot3()]));

        let v4 = PointGroup::new(
            2,
            vec![IntMatrix::diag(&[-1, 1]), IntMatrix::diag(&[1, -1])],
            words(&["x1^2", "x2^2", "(x1 x2)^2"]),
            100,
        )
        .unwrap();
        assert_eq!(v4.automorphism_images().len(), 6);
        assert!(v4.presentation_is_defining(1000));
    }

    #[test]
    fn reduction_injectivity() {
        let c2 = PointGroup::new(2, vec![IntMatrix::diag(&[-1, -1])], words(&["x1^2"]), 100).unwrap();
        assert!(c2.reduction_index(4).is_ok());
        assert_eq!(c2.reduction_index(2).unwrap_err(), GroupError::NotFaithfulMod(2));
    }
}
