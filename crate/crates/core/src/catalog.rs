//! The catalog of arithmetic classes: a line-oriented text format listing,
//! for every ℚ-class, a shared presentation and the integral generators and
//! space-group counts of its ℤ-classes.
//!
//! ```text
//! dimension 2
//! qclass 3
//!   relators: x1^2
//!   zclass 1 label "p1m1" spacegroups 2
//!     gen 1 0 / 0 -1
//!   zclass 2 label "c1m1" spacegroups 1
//!     gen 0 1 / 1 0
//! ```

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::conjugacy::q_conjugacy_precheck;
use crate::groups::{presentation_order, GroupError, PointGroup, Word, DEFAULT_GROUP_CAP};
use crate::linalg::IntMatrix;

const DIM2: &str = include_str!("../data/dim2.catalog");

/// The shipped dimension-2 catalog (13 arithmetic classes).
pub fn dimension2() -> Catalog {
    parse_catalog(DIM2).expect("shipped catalog parses")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected a {expected}x{expected} matrix, found {found}")]
    Dimension { line: usize, expected: usize, found: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZClassId {
    pub dim: usize,
    pub qclass: usize,
    pub zclass: usize,
}

impl fmt::Display for ZClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.qclass, self.zclass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZClassEntry {
    pub id: ZClassId,
    pub label: String,
    pub generators: Vec<IntMatrix>,
    pub relators: Vec<Word>,
    pub space_group_count: usize,
}

impl ZClassEntry {
    /// The point group, closed and checked against the relators.
    pub fn point_group(&self, cap: usize) -> Result<PointGroup, GroupError> {
        PointGroup::new(self.id.dim, self.generators.clone(), self.relators.clone(), cap)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QClass {
    pub index: usize,
    pub relators: Vec<Word>,
    pub entries: Vec<ZClassEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    pub dimension: usize,
    pub qclasses: Vec<QClass>,
}

impl Catalog {
    pub fn entries(&self) -> impl Iterator<Item = &ZClassEntry> {
        self.qclasses.iter().flat_map(|q| &q.entries)
    }

    pub fn entry(&self, id: ZClassId) -> Option<&ZClassEntry> {
        self.entries().find(|e| e.id == id)
    }

    pub fn zclass_count(&self) -> usize {
        self.qclasses.iter().map(|q| q.entries.len()).sum()
    }

    pub fn space_group_total(&self) -> usize {
        self.entries().map(|e| e.space_group_count).sum()
    }
}

fn syntax(line: usize, message: impl Into<String>) -> CatalogError {
    CatalogError::Syntax { line, message: message.into() }
}

fn parse_int(tok: Option<&str>, line: usize, what: &str) -> Result<usize, CatalogError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} {tok:?}")))
}

fn parse_matrix(text: &str, dim: usize, line: usize) -> Result<IntMatrix, CatalogError> {
    let rows: Vec<Vec<i64>> = text
        .split('/')
        .map(|row| {
            row.split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| syntax(line, format!("bad matrix entry {t:?}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let shape = format!("{} rows of lengths {:?}", rows.len(), rows.iter().map(Vec::len).collect::<Vec<_>>());
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CatalogError::Dimension { line, expected: dim, found: shape });
    }
    Ok(IntMatrix::from_rows(&rows))
}

/// `zclass <n> label "<text>" spacegroups <n>`
fn parse_zclass_header(rest: &str, line: usize) -> Result<(usize, String, usize), CatalogError> {
    let (index, rest) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| syntax(line, "incomplete zclass line"))?;
    let index = parse_int(Some(index), line, "zclass index")?;
    let rest = rest.trim_start().strip_prefix("label").ok_or_else(|| syntax(line, "expected `label`"))?.trim_start();
    let rest = rest.strip_prefix('"').ok_or_else(|| syntax(line, "label must be quoted"))?;
    let (label, rest) = rest.split_once('"').ok_or_else(|| syntax(line, "unterminated label"))?;
    let mut toks = rest.split_whitespace();
    if toks.next() != Some("spacegroups") {
        return Err(syntax(line, "expected `spacegroups`"));
    }
    let count = parse_int(toks.next(), line, "space-group count")?;
    if let Some(t) = toks.next() {
        return Err(syntax(line, format!("unexpected {t:?}")));
    }
    Ok((index, label.to_string(), count))
}

/// Parses the catalog format. Only the syntax and matrix shapes are checked.
pub fn parse_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let mut catalog = Catalog::default();
    let mut have_dimension = false;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        match keyword {
            "dimension" => {
                if have_dimension {
                    return Err(syntax(line, "repeated dimension"));
                }
                catalog.dimension = parse_int(rest.split_whitespace().next(), line, "dimension")?;
                if catalog.dimension == 0 {
                    return Err(syntax(line, "dimension must be positive"));
                }
                have_dimension = true;
            }
            "qclass" => {
                if !have_dimension {
                    return Err(syntax(line, "qclass before dimension"));
                }
                let index = parse_int(rest.split_whitespace().next(), line, "qclass index")?;
                catalog.qclasses.push(QClass { index, relators: Vec::new(), entries: Vec::new() });
            }
            "relators:" => {
                let q = catalog.qclasses.last_mut().ok_or_else(|| syntax(line, "relators outside a qclass"))?;
                q.relators = rest
                    .split(';')
                    .map(|w| Word::parse(w.trim()).map_err(|e| syntax(line, e.to_string())))
                    .collect::<Result<_, _>>()?;
            }
            "zclass" => {
                let dim = catalog.dimension;
                let q = catalog.qclasses.last_mut().ok_or_else(|| syntax(line, "zclass outside a qclass"))?;
                let (index, label, count) = parse_zclass_header(rest, line)?;
                q.entries.push(ZClassEntry {
                    id: ZClassId { dim, qclass: q.index, zclass: index },
                    label,
                    generators: Vec::new(),
                    relators: q.relators.clone(),
                    space_group_count: count,
                });
            }
            "gen" => {
                let dim = catalog.dimension;
                let entry = catalog
                    .qclasses
                    .last_mut()
                    .and_then(|q| q.entries.last_mut())
                    .ok_or_else(|| syntax(line, "gen outside a zclass"))?;
                entry.generators.push(parse_matrix(rest, dim, line)?);
            }
            other => return Err(syntax(line, format!("unknown keyword {other:?}"))),
        }
    }
    Ok(catalog)
}

/// Writes the catalog in the format read by [`parse_catalog`].
pub fn serialize_catalog(c: &Catalog) -> String {
    let mut out = String::new();
    if c.dimension == 0 && c.qclasses.is_empty() {
        return out;
    }
    out.push_str(&format!("dimension {}\n", c.dimension));
    for q in &c.qclasses {
        out.push_str(&format!("qclass {}\n", q.index));
        if !q.relators.is_empty() {
            let words: Vec<String> = q.relators.iter().map(Word::to_string).collect();
            out.push_str(&format!("  relators: {}\n", words.join(" ; ")));
        }
        for e in &q.entries {
            out.push_str(&format!(
                "  zclass {} label \"{}\" spacegroups {}\n",
                e.id.zclass, e.label, e.space_group_count
            ));
            for g in &e.generators {
                let rows: Vec<String> = (0..g.rows())
                    .map(|r| g.row(r).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                out.push_str(&format!("    gen {}\n", rows.join(" / ")));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub id: Option<ZClassId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            Some(id) => write!(f, "{id}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub qclass_count: usize,
    pub zclass_count: usize,
    pub space_group_total: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every entry (presentation, finiteness, order, counts) and every
/// ℚ-class (shared presentation, equal orders, rational conjugacy).
pub fn validate_catalog(c: &Catalog) -> ValidationReport {
    validate_catalog_with_cap(c, DEFAULT_GROUP_CAP)
}

pub fn validate_catalog_with_cap(c: &Catalog, cap: usize) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |id: Option<ZClassId>, message: String| violations.push(Violation { id, message });
    let mut seen_q = HashSet::new();
    for q in &c.qclasses {
        if !seen_q.insert(q.index) {
            push(None, format!("qclass {} appears twice", q.index));
        }
        if q.relators.is_empty() {
            push(None, format!("qclass {} has no relators", q.index));
        }
        let alphabet = q.relators.iter().filter_map(Word::max_generator).max().map_or(0, |g| g + 1);
        let mut seen_z = HashSet::new();
        let mut groups: Vec<(&ZClassEntry, PointGroup)> = Vec::new();
        for e in &q.entries {
            let id = Some(e.id);
            if !seen_z.insert(e.id.zclass) {
                push(id, "zclass index appears twice".into());
            }
            if e.space_group_count == 0 {
                push(id, "space-group count must be at least 1".into());
            }
            if e.generators.len() != alphabet {
                push(id, format!("{} generators for a presentation on {alphabet}", e.generators.len()));
                continue;
            }
            match e.point_group(cap) {
                Ok(g) => {
                    match presentation_order(alphabet, &e.relators, cap) {
                        Some(n) if n == g.order() => {}
                        Some(n) => push(id, format!("group order {} differs from presentation order {n}", g.order())),
                        None => push(id, "presentation order not determined within cap".into()),
                    }
                    groups.push((e, g));
                }
                Err(GroupError::RelatorNotSatisfied(i)) => push(id, format!("relator not satisfied: {}", e.relators[i])),
                Err(GroupError::CapExceeded(n)) => push(id, format!("group not finite within cap {n}")),
                Err(err) => push(id, err.to_string()),
            }
        }
        if let Some((first, g0)) = groups.first() {
            for (e, g) in &groups[1..] {
                if g.order() != g0.order() {
                    push(Some(e.id), format!("order {} differs from {} in {}", g.order(), g0.order(), first.id));
                    continue;
                }
                let rational = g.automorphism_images().iter().any(|img| {
                    q_conjugacy_precheck(&first.generators, img).unwrap_or(false)
                });
                if !rational {
                    push(Some(e.id), format!("not rationally conjugate to {}", first.id));
                }
            }
        }
    }
    ValidationReport {
        qclass_count: c.qclasses.len(),
        zclass_count: c.zclass_count(),
        space_group_total: c.space_group_total(),
        violations,
    }
}

/// All unordered pairs of distinct ℤ-classes sharing a ℚ-class, in file order.
pub fn zclass_pairs(c: &Catalog) -> Vec<(&ZClassEntry, &ZClassEntry)> {
    let mut out = Vec::new();
    for q in &c.qclasses {
        for (i, a) in q.entries.iter().enumerate() {
            for b in &q.entries[i + 1..] {
                out.push((a, b));
            }
        }
    }
    out
}
