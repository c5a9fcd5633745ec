use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zhat_core::catalog::{self, parse_catalog, validate_catalog_with_cap, zclass_pairs, Catalog, ZClassId};
use zhat_core::conjugacy::{conjugate_over_zpi_with_cap, ConjugacyProblem, ConjugacyVerdict};
use zhat_core::normalizer::Caps;
use zhat_core::pipeline::{run_dimension, separate_pair, verify_zclass, PipelineOptions, RunReport, SeparationOutcome, Stage};
use zhat_core::{IntMatrix, ModMatrix, PrimeSet};

const EXIT_FAILURE: u8 = 2;
const EXIT_BAD_CATALOG: u8 = 4;

/// Profinite rigidity checks for crystallographic groups.
#[derive(Parser)]
#[command(name = "zhat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog utilities.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Separate pairs of ℤ-classes within their ℚ-classes.
    Separate {
        /// Catalog file, or `builtin:2` for the shipped dimension-2 catalog.
        file: String,
        /// Only this pair, given as two ids `Q.Z`.
        #[arg(long, num_args = 2, value_names = ["Q.Z1", "Q.Z2"])]
        pair: Option<Vec<String>>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Verify ℤ-classes against their space-group counts.
    Verify {
        file: String,
        /// Only this ℤ-class, given as `Q.Z`.
        #[arg(long, value_name = "Q.Z")]
        zclass: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Full run over a catalog.
    Run {
        file: String,
        /// Expected catalog dimension.
        #[arg(long)]
        dimension: usize,
        /// Write the per-pair and per-class CSV report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decide conjugacy of two matrix tuples over ℤ[π].
    Conjugacy {
        /// Matrices separated by `;`, rows by `/`, e.g. `0 1 / 1 0`.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, value_delimiter = ',', required = true)]
        pi: Vec<u64>,
        /// Require the conjugator to reduce to this matrix modulo `--modulus`.
        #[arg(long, allow_hyphen_values = true, requires = "modulus")]
        constraint: Option<String>,
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long, default_value_t = Caps::default().candidates)]
        max_candidates: u64,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Parse and validate a catalog file.
    Validate {
        file: String,
        #[arg(long, default_value_t = zhat_core::groups::DEFAULT_GROUP_CAP)]
        group_cap: usize,
    },
    /// Print the shipped dimension-2 catalog.
    Builtin,
}

#[derive(Args)]
struct CommonArgs {
    /// Primes for the local conjugacy tests.
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    primes: Vec<u64>,
    /// Also compare H² with finite coefficients from bar cochains.
    #[arg(long)]
    h2_bar_cochains: bool,
    /// Record elapsed milliseconds in reports.
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value_t = Caps::default().cohomology_elements)]
    max_h2: u128,
    #[arg(long, default_value_t = Caps::default().orbit_states)]
    max_orbit: usize,
    #[arg(long, default_value_t = Caps::default().candidates)]
    max_candidates: u64,
    #[arg(long, default_value_t = zhat_core::groups::DEFAULT_GROUP_CAP)]
    group_cap: usize,
}

impl CommonArgs {
    fn options(&self, threads: Option<usize>) -> Result<PipelineOptions, String> {
        Ok(PipelineOptions {
            primes: PrimeSet::new(self.primes.iter().copied()).map_err(|e| e.to_string())?,
            caps: Caps { cohomology_elements: self.max_h2, orbit_states: self.max_orbit, candidates: self.max_candidates },
            group_cap: self.group_cap,
            bar_cochains: self.h2_bar_cochains,
            threads,
            timings: self.timings,
            ..PipelineOptions::default()
        })
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    BadCatalog(String),
}

fn load(file: &str, group_cap: usize) -> Result<Catalog, Failure> {
    let c = if file == "builtin:2" {
        catalog::dimension2()
    } else {
        let text = fs::read_to_string(file).map_err(|e| Failure::Usage(format!("cannot read {file}: {e}")))?;
        parse_catalog(&text).map_err(|e| Failure::BadCatalog(format!("{file}: {e}")))?
    };
    let report = validate_catalog_with_cap(&c, group_cap);
    if !report.is_valid() {
        let lines: Vec<String> = report.violations.iter().map(|v| format!("  {v}")).collect();
        return Err(Failure::BadCatalog(format!("{file} is invalid:\n{}", lines.join("\n"))));
    }
    Ok(c)
}

fn parse_id(text: &str, dim: usize) -> Result<ZClassId, Failure> {
    let bad = || Failure::Usage(format!("bad ℤ-class id {text:?}, expected Q.Z"));
    let (q, z) = text.split_once('.').ok_or_else(bad)?;
    Ok(ZClassId { dim, qclass: q.parse().map_err(|_| bad())?, zclass: z.parse().map_err(|_| bad())? })
}

fn parse_matrices(text: &str) -> Result<Vec<IntMatrix>, Failure> {
    text.split(';')
        .map(|m| {
            let rows: Vec<Vec<i64>> = m
                .split('/')
                .map(|r| r.split_whitespace().map(|t| t.parse::<i64>()).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Usage(format!("bad matrix {m:?}: {e}")))?;
            if rows.iter().any(|r| r.len() != rows.len()) {
                return Err(Failure::Usage(format!("matrix {m:?} is not square")));
            }
            Ok(IntMatrix::from_rows(&rows))
        })
        .collect()
}

fn write_report(path: &Path, report: &RunReport) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    w.write_record(zhat_core::pipeline::ReportRow::HEADER).map_err(|e| e.to_string())?;
    for row in report.rows() {
        w.write_record(row.fields()).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn exit_for(report: &RunReport) -> u8 {
    report.exit_code() as u8
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Catalog { action: CatalogAction::Builtin } => {
            print!("{}", catalog::serialize_catalog(&catalog::dimension2()));
            Ok(0)
        }
        Command::Catalog { action: CatalogAction::Validate { file, group_cap } } => {
            let c = load(&file, group_cap)?;
            println!(
                "valid: dimension {}, {} ℚ-classes, {} ℤ-classes, {} space-group types, {} pairs",
                c.dimension,
                c.qclasses.len(),
                c.zclass_count(),
                c.space_group_total(),
                zclass_pairs(&c).len()
            );
            Ok(0)
        }
        Command::Separate { file, pair, common } => {
            let options = common.options(None).map_err(Failure::Usage)?;
            let c = load(&file, options.group_cap)?;
            let pairs = match pair {
                Some(ids) => {
                    let a = parse_id(&ids[0], c.dimension)?;
                    let b = parse_id(&ids[1], c.dimension)?;
                    let ea = c.entry(a).ok_or_else(|| Failure::Usage(format!("no ℤ-class {a}")))?;
                    let eb = c.entry(b).ok_or_else(|| Failure::Usage(format!("no ℤ-class {b}")))?;
                    if a.qclass != b.qclass {
                        return Err(Failure::Usage(format!("{a} and {b} lie in different ℚ-classes")));
                    }
                    vec![(ea, eb)]
                }
                None => zclass_pairs(&c),
            };
            let results: Vec<_> = pairs.iter().map(|(a, b)| separate_pair(a, b, &options)).collect();
            for r in &results {
                let text = match &r.outcome {
                    SeparationOutcome::Separated(m) => format!("separated by {m}"),
                    SeparationOutcome::NotSeparated => "not separated".to_string(),
                    SeparationOutcome::Skipped(msg) => format!("skipped: {msg}"),
                };
                println!("{} {}: {text}", r.a, r.b);
            }
            let report = RunReport { dimension: c.dimension, pairs: results, zclasses: Vec::new() };
            Ok(exit_for(&report))
        }
        Command::Verify { file, zclass, common } => {
            let options = common.options(None).map_err(Failure::Usage)?;
            let c = load(&file, options.group_cap)?;
            let entries: Vec<_> = match zclass {
                Some(id) => {
                    let id = parse_id(&id, c.dimension)?;
                    vec![c.entry(id).ok_or_else(|| Failure::Usage(format!("no ℤ-class {id}")))?]
                }
                None => c.entries().collect(),
            };
            let results: Vec<_> = entries.iter().map(|e| verify_zclass(e, &options)).collect();
            for r in &results {
                let detail = match (&r.stage, r.orbit_count) {
                    (Stage::Skipped(msg), _) => format!("skipped: {msg}"),
                    (s, Some(n)) => format!("stage {s}, {n} orbits"),
                    (s, None) => format!("stage {s}"),
                };
                println!("{} {} ({} space groups): {detail}", r.id, r.label, r.space_group_count);
            }
            let report = RunReport { dimension: c.dimension, pairs: Vec::new(), zclasses: results };
            Ok(exit_for(&report))
        }
        Command::Run { file, dimension, report, threads, common } => {
            let options = common.options(threads).map_err(Failure::Usage)?;
            let c = load(&file, options.group_cap)?;
            if c.dimension != dimension {
                return Err(Failure::BadCatalog(format!("{file} has dimension {}, not {dimension}", c.dimension)));
            }
            let result = run_dimension(&c, &options);
            print!("{}", result.summary());
            if let Some(path) = report {
                write_report(&path, &result).map_err(|e| Failure::Usage(format!("cannot write report: {e}")))?;
            }
            Ok(exit_for(&result))
        }
        Command::Conjugacy { a, b, pi, constraint, modulus, max_candidates } => {
            let a = parse_matrices(&a)?;
            let b = parse_matrices(&b)?;
            let primes = PrimeSet::new(pi).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut problem = ConjugacyProblem::new(a, b, primes).map_err(|e| Failure::Usage(e.to_string()))?;
            if let (Some(text), Some(m)) = (constraint, modulus) {
                let n = parse_matrices(&text)?.pop().ok_or_else(|| Failure::Usage("empty constraint".into()))?;
                problem = problem
                    .with_constraint(ModMatrix::from_int(&n, m))
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            match conjugate_over_zpi_with_cap(&problem, max_candidates).map_err(|e| Failure::Usage(e.to_string()))? {
                ConjugacyVerdict::Conjugate(w) => {
                    println!("conjugate");
                    println!("witness {}", w.matrix);
                    println!("determinant {}", w.matrix.det());
                    if w.scale != 1.into() {
                        println!("scale {}", w.scale);
                    }
                    println!("verified {}", w.verify(&problem));
                    Ok(0)
                }
                ConjugacyVerdict::NotConjugateMod(m) => {
                    println!("not conjugate: no invertible intertwiner modulo {m}");
                    Ok(EXIT_FAILURE)
                }
                ConjugacyVerdict::NotConjugateOver(p) => {
                    println!("not conjugate over the {:?}-adic integers", p.as_slice());
                    Ok(EXIT_FAILURE)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
        Err(Failure::BadCatalog(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BAD_CATALOG)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_lists() {
        let m = parse_matrices("0 1 / 1 0 ; -1 0 / 0 1").unwrap();
        assert_eq!(m, vec![IntMatrix::from_rows(&[[0, 1], [1, 0]]), IntMatrix::diag(&[-1, 1])]);
        assert!(parse_matrices("1 0 / 0").is_err());
    }

    #[test]
    fn ids() {
        assert_eq!(parse_id("4.2", 2).ok(), Some(ZClassId { dim: 2, qclass: 4, zclass: 2 }));
        assert!(parse_id("42", 2).is_err());
    }
}
