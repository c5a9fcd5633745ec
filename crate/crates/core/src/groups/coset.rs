//! Todd–Coxeter enumeration of the cosets of the trivial subgroup, used to
//! confirm that a presentation defines a group of the expected order.

use super::{Letter, Word};

struct CosetTable {
    cols: usize,
    table: Vec<Vec<Option<usize>>>,
    parent: Vec<usize>,
    queue: Vec<usize>,
    cap: usize,
    overflow: bool,
}

fn col(l: Letter) -> usize {
    2 * l.generator + usize::from(l.inverse)
}

fn inv_col(c: usize) -> usize {
    c ^ 1
}

impl CosetTable {
    fn rep(&mut self, mut c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[c] != root {
            let next = self.parent[c];
            self.parent[c] = root;
            c = next;
        }
        root
    }

    fn alive(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn define(&mut self, c: usize, x: usize) {
        if self.table.len() >= self.cap {
            self.overflow = true;
            return;
        }
        let n = self.table.len();
        self.table.push(vec![None; self.cols]);
        self.parent.push(n);
        self.table[c][x] = Some(n);
        self.table[n][inv_col(x)] = Some(c);
    }

    fn merge(&mut self, k: usize, l: usize) {
        let (k, l) = (self.rep(k), self.rep(l));
        if k == l {
            return;
        }
        let (m, n) = (k.min(l), k.max(l));
        self.parent[n] = m;
        self.queue.push(n);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        self.queue.clear();
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let e = self.queue[i];
            i += 1;
            for x in 0..self.cols {
                let Some(f) = self.table[e][x] else { continue };
                self.table[f][inv_col(x)] = None;
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                if let Some(t) = self.table[e1][x] {
                    self.merge(f1, t);
                } else if let Some(t) = self.table[f1][inv_col(x)] {
                    self.merge(e1, t);
                } else {
                    self.table[e1][x] = Some(f1);
                    self.table[f1][inv_col(x)] = Some(e1);
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: usize, w: &[usize]) {
        if w.is_empty() {
            return;
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = w.len() - 1;
        loop {
            while i <= j {
                match self.table[f][w[i]] {
                    Some(n) => {
                        f = n;
                        i += 1;
                    }
                    None => break,
                }
            }
            if i > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return;
            }
            while j >= i {
                match self.table[b][inv_col(w[j])] {
                    Some(n) => {
                        b = n;
                        if j == 0 {
                            // whole word scanned backwards
                            self.coincidence(f, b);
                            return;
                        }
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j < i {
                self.coincidence(f, b);
                return;
            } else if i == j {
                self.table[f][w[i]] = Some(b);
                self.table[b][inv_col(w[i])] = Some(f);
                return;
            } else {
                self.define(f, w[i]);
                if self.overflow {
                    return;
                }
            }
        }
    }
}

/// Order of the group `⟨x₁,…,x_k | relators⟩`, or `None` if the enumeration
/// needs more than `cap` cosets (infinite or simply too large).
pub fn presentation_order(generators: usize, relators: &[Word], cap: usize) -> Option<usize> {
    let cols = 2 * generators;
    let rels: Vec<Vec<usize>> = relators.iter().map(|r| r.letters().iter().map(|&l| col(l)).collect()).collect();
    let mut t = CosetTable {
        cols,
        table: vec![vec![None; cols]],
        parent: vec![0],
        queue: Vec::new(),
        cap,
        overflow: false,
    };
    let mut c = 0;
    while c < t.table.len() {
        if t.alive(c) {
            for r in &rels {
                if !t.alive(c) {
                    break;
                }
                t.scan_and_fill(c, r);
                if t.overflow {
                    return None;
                }
            }
            for x in 0..cols {
                if !t.alive(c) {
                    break;
                }
                if t.table[c][x].is_none() {
                    t.define(c, x);
                    if t.overflow {
                        return None;
                    }
                }
            }
        }
        c += 1;
    }
    Some((0..t.table.len()).filter(|&c| t.alive(c)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rels(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| Word::parse(w).unwrap()).collect()
    }

    #[test]
    fn small_presentations() {
        assert_eq!(presentation_order(1, &rels(&["x1^6"]), 1000), Some(6));
        assert_eq!(presentation_order(2, &rels(&["x1^2", "x2^2", "(x1 x2)^2"]), 1000), Some(4));
        assert_eq!(presentation_order(2, &rels(&["x1^4", "x2^2", "(x1 x2)^2"]), 1000), Some(8));
        assert_eq!(presentation_order(2, &rels(&["x1^6", "x2^2", "(x1 x2)^2"]), 1000), Some(12));
        // binary octahedral-free check: S4 as ⟨a, b | a², b³, (ab)⁴⟩
        assert_eq!(presentation_order(2, &rels(&["x1^2", "x2^3", "(x1 x2)^4"]), 10000), Some(24));
        assert_eq!(presentation_order(1, &rels(&["x1"]), 10), Some(1));
        assert_eq!(presentation_order(0, &[], 10), Some(1));
    }

    #[test]
    fn infinite_group_hits_cap() {
        assert_eq!(presentation_order(2, &rels(&["x1^2", "x2^2"]), 500), None);
    }
}
