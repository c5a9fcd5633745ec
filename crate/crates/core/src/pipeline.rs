//! The two verification phases run over a whole catalog: separating the
//! ℤ-classes of every ℚ-class from each other, and checking that the
//! profinite normaliser has as many orbits on `H²` as there are space-group
//! types in each ℤ-class.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::catalog::{zclass_pairs, Catalog, ZClassEntry, ZClassId};
use crate::cohomology::{default_modulus, h1_mod, h2_finite_coeffs, h2_lattice, CohomologyError, DEFAULT_BAR_BUDGET};
use crate::conjugacy::{zclass_pair_profinite_conjugate, LocalTest};
use crate::groups::{PointGroup, DEFAULT_GROUP_CAP};
use crate::linalg::PrimeSet;
use crate::normalizer::{profinite_orbits, Caps};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub primes: PrimeSet,
    pub caps: Caps,
    pub group_cap: usize,
    /// Also compare `|H²(G, M/q)|` from bar cochains in the cohomology test.
    pub bar_cochains: bool,
    pub bar_budget: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Record elapsed milliseconds (makes reports run-dependent).
    pub timings: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            primes: PrimeSet::new([2, 3, 5]).expect("primes"),
            caps: Caps::default(),
            group_cap: DEFAULT_GROUP_CAP,
            bar_cochains: false,
            bar_budget: DEFAULT_BAR_BUDGET,
            threads: None,
            timings: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeparationMethod {
    CohomologySize,
    Mod(u64),
    Padic(u64),
    CombinedPi,
}

impl fmt::Display for SeparationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparationMethod::CohomologySize => write!(f, "cohomology-size"),
            SeparationMethod::Mod(p) => write!(f, "mod-{p}"),
            SeparationMethod::Padic(p) => write!(f, "zp-{p}"),
            SeparationMethod::CombinedPi => write!(f, "combined-pi"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparationOutcome {
    Separated(SeparationMethod),
    NotSeparated,
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationResult {
    pub a: ZClassId,
    pub b: ZClassId,
    pub outcome: SeparationOutcome,
    pub millis: Option<u128>,
}

impl SeparationResult {
    pub fn method(&self) -> Option<SeparationMethod> {
        match self.outcome {
            SeparationOutcome::Separated(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stage {
    One,
    Four,
    Five,
    Failed,
    Skipped(String),
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::One => write!(f, "1"),
            Stage::Four => write!(f, "4"),
            Stage::Five => write!(f, "5"),
            Stage::Failed => write!(f, "failed"),
            Stage::Skipped(_) => write!(f, "skipped"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationResult {
    pub id: ZClassId,
    pub label: String,
    pub stage: Stage,
    /// Orbits of the acting group that decided the stage (none at stage 1).
    pub orbit_count: Option<usize>,
    pub space_group_count: usize,
    pub millis: Option<u128>,
}

fn timed<T>(timings: bool, f: impl FnOnce() -> T) -> (T, Option<u128>) {
    let start = Instant::now();
    let out = f();
    (out, timings.then(|| start.elapsed().as_millis()))
}

fn cohomology_sizes(g: &PointGroup, options: &PipelineOptions) -> Result<Vec<u128>, CohomologyError> {
    let q = default_modulus(g);
    let mut sizes = vec![h1_mod(g, q)?.order(), h2_lattice(g, q)?.order()];
    if options.bar_cochains {
        sizes.push(h2_finite_coeffs(g, q, options.bar_budget)?.order());
    }
    Ok(sizes)
}

fn separate(e1: &ZClassEntry, e2: &ZClassEntry, options: &PipelineOptions) -> Result<SeparationOutcome, String> {
    let g1 = e1.point_group(options.group_cap).map_err(|e| e.to_string())?;
    let g2 = e2.point_group(options.group_cap).map_err(|e| e.to_string())?;
    if cohomology_sizes(&g1, options).map_err(|e| e.to_string())?
        != cohomology_sizes(&g2, options).map_err(|e| e.to_string())?
    {
        return Ok(SeparationOutcome::Separated(SeparationMethod::CohomologySize));
    }
    let verdict = zclass_pair_profinite_conjugate(&g1, &g2, &options.primes, options.caps.candidates)
        .map_err(|e| e.to_string())?;
    Ok(match verdict.separated_by {
        None => SeparationOutcome::NotSeparated,
        Some(LocalTest::Mod(p)) => SeparationOutcome::Separated(SeparationMethod::Mod(p)),
        Some(LocalTest::Padic(p)) => SeparationOutcome::Separated(SeparationMethod::Padic(p)),
        Some(LocalTest::Combined) => SeparationOutcome::Separated(SeparationMethod::CombinedPi),
    })
}

/// Tries, in order, the cohomology sizes and then conjugacy modulo `p` and
/// over `ℤ_p` for each prime, and finally over all primes together.
pub fn separate_pair(e1: &ZClassEntry, e2: &ZClassEntry, options: &PipelineOptions) -> SeparationResult {
    let (outcome, millis) = timed(options.timings, || separate(e1, e2, options).unwrap_or_else(SeparationOutcome::Skipped));
    SeparationResult { a: e1.id, b: e2.id, outcome, millis }
}

fn verify(e: &ZClassEntry, options: &PipelineOptions) -> Result<(Stage, Option<usize>), String> {
    let sg = e.space_group_count;
    if sg <= 2 {
        return Ok((Stage::One, None));
    }
    let g = e.point_group(options.group_cap).map_err(|e| e.to_string())?;
    let orbits = profinite_orbits(&g, Some(sg), &options.caps).map_err(|e| e.to_string())?;
    let n = orbits.normalizer_orbits.orbit_count;
    if n == sg {
        return Ok((Stage::Four, Some(n)));
    }
    match orbits.liftable {
        Some((_, report)) if report.orbit_count == sg => Ok((Stage::Five, Some(sg))),
        Some((_, report)) => Ok((Stage::Failed, Some(report.orbit_count))),
        None => Ok((Stage::Failed, Some(n))),
    }
}

/// Stage 1 when the class has at most two space-group types; stage 4 when
/// the mod-`e` normaliser already has that many orbits on `H²`; stage 5
/// when the liftable subgroup does; failed otherwise.
pub fn verify_zclass(e: &ZClassEntry, options: &PipelineOptions) -> VerificationResult {
    let ((stage, orbit_count), millis) =
        timed(options.timings, || verify(e, options).unwrap_or_else(|msg| (Stage::Skipped(msg), None)));
    VerificationResult {
        id: e.id,
        label: e.label.clone(),
        stage,
        orbit_count,
        space_group_count: e.space_group_count,
        millis,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub dimension: usize,
    pub pairs: Vec<SeparationResult>,
    pub zclasses: Vec<VerificationResult>,
}

/// One line of the machine-readable report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub kind: &'static str,
    pub dim: usize,
    pub qclass: usize,
    pub zclass_a: usize,
    pub zclass_b: Option<usize>,
    pub outcome: String,
    pub method_or_stage: String,
    pub orbit_count: Option<usize>,
    pub spacegroup_count: Option<usize>,
    pub millis: Option<u128>,
}

impl ReportRow {
    pub const HEADER: [&'static str; 10] = [
        "kind",
        "dim",
        "qclass",
        "zclass_a",
        "zclass_b",
        "outcome",
        "method_or_stage",
        "orbit_count",
        "spacegroup_count",
        "millis",
    ];

    pub fn fields(&self) -> [String; 10] {
        let opt = |x: Option<String>| x.unwrap_or_default();
        [
            self.kind.to_string(),
            self.dim.to_string(),
            self.qclass.to_string(),
            self.zclass_a.to_string(),
            opt(self.zclass_b.map(|z| z.to_string())),
            self.outcome.clone(),
            self.method_or_stage.clone(),
            opt(self.orbit_count.map(|z| z.to_string())),
            opt(self.spacegroup_count.map(|z| z.to_string())),
            opt(self.millis.map(|z| z.to_string())),
        ]
    }
}

const PAIR_BUCKETS: [SeparationMethod; 8] = [
    SeparationMethod::CohomologySize,
    SeparationMethod::Mod(2),
    SeparationMethod::Padic(2),
    SeparationMethod::Mod(3),
    SeparationMethod::Padic(3),
    SeparationMethod::Mod(5),
    SeparationMethod::Padic(5),
    SeparationMethod::CombinedPi,
];

impl RunReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let pairs = self.pairs.iter().map(|p| {
            let (outcome, method) = match &p.outcome {
                SeparationOutcome::Separated(m) => ("separated", m.to_string()),
                SeparationOutcome::NotSeparated => ("not-separated", String::new()),
                SeparationOutcome::Skipped(msg) => ("skipped", msg.clone()),
            };
            ReportRow {
                kind: "pair",
                dim: self.dimension,
                qclass: p.a.qclass,
                zclass_a: p.a.zclass,
                zclass_b: Some(p.b.zclass),
                outcome: outcome.into(),
                method_or_stage: method,
                orbit_count: None,
                spacegroup_count: None,
                millis: p.millis,
            }
        });
        let entries = self.zclasses.iter().map(|z| {
            let (outcome, stage) = match &z.stage {
                Stage::Failed => ("failed".to_string(), z.stage.to_string()),
                Stage::Skipped(msg) => ("skipped".to_string(), msg.clone()),
                s => ("verified".to_string(), s.to_string()),
            };
            ReportRow {
                kind: "zclass",
                dim: self.dimension,
                qclass: z.id.qclass,
                zclass_a: z.id.zclass,
                zclass_b: None,
                outcome,
                method_or_stage: stage,
                orbit_count: z.orbit_count,
                spacegroup_count: Some(z.space_group_count),
                millis: z.millis,
            }
        });
        pairs.chain(entries).collect()
    }

    /// Pair counts per separating test, in the order the tests are applied.
    pub fn method_histogram(&self) -> Vec<(SeparationMethod, usize)> {
        let mut buckets: Vec<SeparationMethod> = PAIR_BUCKETS.to_vec();
        for m in self.pairs.iter().filter_map(SeparationResult::method) {
            if !buckets.contains(&m) {
                buckets.push(m);
            }
        }
        buckets
            .into_iter()
            .map(|m| (m, self.pairs.iter().filter(|p| p.method() == Some(m)).count()))
            .collect()
    }

    /// Counts at stages 1, 4 and 5.
    pub fn stage_histogram(&self) -> [usize; 3] {
        let count = |s: Stage| self.zclasses.iter().filter(|z| z.stage == s).count();
        [count(Stage::One), count(Stage::Four), count(Stage::Five)]
    }

    pub fn unseparated(&self) -> usize {
        self.pairs.iter().filter(|p| p.outcome == SeparationOutcome::NotSeparated).count()
    }

    pub fn failed(&self) -> usize {
        self.zclasses.iter().filter(|z| z.stage == Stage::Failed).count()
    }

    pub fn skipped(&self) -> usize {
        self.pairs.iter().filter(|p| matches!(p.outcome, SeparationOutcome::Skipped(_))).count()
            + self.zclasses.iter().filter(|z| matches!(z.stage, Stage::Skipped(_))).count()
    }

    pub fn is_success(&self) -> bool {
        self.unseparated() == 0 && self.failed() == 0 && self.skipped() == 0
    }

    /// 0 on full success, 2 for an unseparated pair or an orbit deficit,
    /// 3 when items were skipped.
    pub fn exit_code(&self) -> i32 {
        if self.unseparated() > 0 || self.failed() > 0 {
            2
        } else if self.skipped() > 0 {
            3
        } else {
            0
        }
    }

    /// Human-readable tables of separating tests and verification stages.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dimension {}\n\n", self.dimension));
        out.push_str("test applied                 pairs separated\n");
        for (m, n) in self.method_histogram() {
            out.push_str(&format!("  {:<27}{n:>6}\n", m.to_string()));
        }
        out.push_str(&format!("  {:<27}{:>6}\n", "not separated", self.unseparated()));
        let pair_skips = self.pairs.iter().filter(|p| matches!(p.outcome, SeparationOutcome::Skipped(_))).count();
        out.push_str(&format!("  {:<27}{pair_skips:>6}\n", "skipped"));
        out.push_str(&format!("total pairs tested           {:>6}\n\n", self.pairs.len()));

        let [one, four, five] = self.stage_histogram();
        out.push_str("stage                        zclasses verified\n");
        out.push_str(&format!("  {:<27}{one:>6}\n", "1"));
        out.push_str(&format!("  {:<27}{four:>6}\n", "4"));
        out.push_str(&format!("  {:<27}{five:>6}\n", "5"));
        out.push_str(&format!("  {:<27}{:>6}\n", "failed", self.failed()));
        let entry_skips = self.zclasses.iter().filter(|z| matches!(z.stage, Stage::Skipped(_))).count();
        out.push_str(&format!("  {:<27}{entry_skips:>6}\n", "skipped"));
        out.push_str(&format!("total zclasses               {:>6}\n\n", self.zclasses.len()));

        for p in &self.pairs {
            match &p.outcome {
                SeparationOutcome::NotSeparated => out.push_str(&format!("not separated: {} / {}\n", p.a, p.b)),
                SeparationOutcome::Skipped(msg) => out.push_str(&format!("skipped pair {} / {}: {msg}\n", p.a, p.b)),
                SeparationOutcome::Separated(_) => {}
            }
        }
        for z in &self.zclasses {
            match &z.stage {
                Stage::Failed => out.push_str(&format!(
                    "orbit deficit: {} ({}) has {} orbits for {} space groups\n",
                    z.id,
                    z.label,
                    z.orbit_count.unwrap_or(0),
                    z.space_group_count
                )),
                Stage::Skipped(msg) => out.push_str(&format!("skipped zclass {} ({}): {msg}\n", z.id, z.label)),
                _ => {}
            }
        }
        if self.is_success() {
            out.push_str(&format!(
                "every pair separated and every zclass verified: in dimension {}, space groups with isomorphic \
                 profinite completions are isomorphic\n",
                self.dimension
            ));
        }
        out
    }
}

/// Runs both phases on every pair and every entry of the catalog.
pub fn run_dimension(catalog: &Catalog, options: &PipelineOptions) -> RunReport {
    let work = || {
        let mut pairs: Vec<SeparationResult> =
            zclass_pairs(catalog).par_iter().map(|(a, b)| separate_pair(a, b, options)).collect();
        let entries: Vec<&ZClassEntry> = catalog.entries().collect();
        let mut zclasses: Vec<VerificationResult> = entries.par_iter().map(|e| verify_zclass(e, options)).collect();
        pairs.sort_by_key(|p| (p.a, p.b));
        zclasses.sort_by_key(|z| z.id);
        RunReport { dimension: catalog.dimension, pairs, zclasses }
    };
    match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(work),
        None => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::dimension2;

    #[test]
    fn reflection_pair_is_separated_by_cohomology() {
        let c = dimension2();
        let pm = c.entry(ZClassId { dim: 2, qclass: 3, zclass: 1 }).unwrap();
        let cm = c.entry(ZClassId { dim: 2, qclass: 3, zclass: 2 }).unwrap();
        let options = PipelineOptions::default();
        let r = separate_pair(pm, cm, &options);
        assert_eq!(r.outcome, SeparationOutcome::Separated(SeparationMethod::CohomologySize));
        assert_eq!(separate_pair(pm, pm, &options).outcome, SeparationOutcome::NotSeparated);
    }

    #[test]
    fn stages_of_small_classes() {
        let c = dimension2();
        let options = PipelineOptions::default();
        for e in c.entries() {
            let r = verify_zclass(e, &options);
            if e.space_group_count <= 2 {
                assert_eq!(r.stage, Stage::One);
            } else {
                assert_eq!(r.stage, Stage::Four, "{}", e.label);
                assert_eq!(r.orbit_count, Some(3));
            }
        }
    }

    #[test]
    fn dimension_two_run() {
        let report = run_dimension(&dimension2(), &PipelineOptions::default());
        assert!(report.is_success(), "{}", report.summary());
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.method_histogram()[0], (SeparationMethod::CohomologySize, 3));
        assert_eq!(report.stage_histogram(), [12, 1, 0]);
        assert_eq!(report.rows().len(), 16);
        let single = run_dimension(&dimension2(), &PipelineOptions { threads: Some(1), ..PipelineOptions::default() });
        assert_eq!(single.summary(), report.summary());
    }

    #[test]
    fn bar_cochains_keep_the_attribution() {
        let options = PipelineOptions { bar_cochains: true, ..PipelineOptions::default() };
        let report = run_dimension(&dimension2(), &options);
        assert_eq!(report.method_histogram()[0], (SeparationMethod::CohomologySize, 3));
    }
}
