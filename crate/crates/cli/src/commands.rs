use std::collections::BTreeMap;
use std::fmt::Write as _;

use levels_core::dsl::{self, ParseDiagnostic};
use levels_core::montecarlo::{self, FrequencyRecord, Seed};
use levels_core::probability::{self, Probability};
use levels_core::{format_significant, ElementRef, ProbabilityValue, StructureOfLevels};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{CliError, Format};

const DIGITS: usize = 12;
const BUILTIN_PREFIX: &str = "builtin:";

fn sig(x: f64) -> String {
    format_significant(x, DIGITS)
}

/// `x` rounded to 12 significant digits, for JSON numbers.
fn sig_number(x: f64) -> f64 {
    sig(x).parse().unwrap_or(x)
}

pub fn read_source(path: &str) -> Result<String, CliError> {
    if let Some(name) = path.strip_prefix(BUILTIN_PREFIX) {
        return levels_core::builtin::source(name)
            .map(str::to_string)
            .ok_or_else(|| CliError::Io(format!("{path}: no such builtin example")));
    }
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    String::from_utf8(bytes).map_err(|e| {
        // let the parser locate the bad byte
        let out = dsl::parse_bytes(e.as_bytes());
        CliError::Domain(render_diagnostics(path, &out.diagnostics))
    })
}

fn render_diagnostics(path: &str, diagnostics: &[ParseDiagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("{path}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses and validates `path`; warnings are echoed to standard error.
fn load(path: &str) -> Result<Vec<StructureOfLevels>, CliError> {
    let source = read_source(path)?;
    let output = dsl::parse_with_warnings(&source);
    if output.has_errors() {
        return Err(CliError::Domain(render_diagnostics(path, &output.diagnostics)));
    }
    for d in &output.diagnostics {
        eprintln!("{path}:{d}");
    }
    Ok(output.structures)
}

pub fn validate(path: &str) -> Result<String, CliError> {
    let structures = load(path)?;
    let mut out = String::new();
    for s in &structures {
        let c = s.classify()?;
        if c.is_certain() {
            writeln!(out, "{}: certain", s.name()).unwrap();
            continue;
        }
        // opaque relationship at level j hides level j+1
        let mut by_level: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for id in &c.opaque_elements {
            let level = s.relationship(id.as_str()).map_or(0, |r| r.level);
            by_level.entry(level + 1).or_default().push(id.as_str());
        }
        let parts: Vec<String> = by_level
            .iter()
            .map(|(level, ids)| format!("level-{level} subrelationships of {}", ids.join(", ")))
            .collect();
        writeln!(out, "{}: uncertain (opaque: {})", s.name(), parts.join("; ")).unwrap();
    }
    Ok(out)
}

#[derive(Serialize)]
struct ProbReport<'a> {
    target: &'a str,
    structure: &'a str,
    probability: Option<String>,
    decimal: Option<f64>,
    unknown: bool,
    via: &'static str,
    manifest: &'a RunManifest,
}

pub fn prob(path: &str, target: &str, format: Format) -> Result<String, CliError> {
    let structures = load(path)?;
    let (wanted_structure, name) = match target.split_once('.') {
        Some((s, n)) => (Some(s), n),
        None => (None, target),
    };
    let matches: Vec<&StructureOfLevels> = structures
        .iter()
        .filter(|s| wanted_structure.is_none_or(|w| s.name() == w))
        .filter(|s| s.element(name).is_some())
        .collect();
    let s = match matches.as_slice() {
        [] => return Err(CliError::Domain(format!("element {target} not found"))),
        [s] => *s,
        _ => {
            return Err(CliError::Domain(format!(
                "{target} appears in several structures; qualify it as STRUCTURE.{name}"
            )))
        }
    };
    let (value, via) = match s.element(name).expect("matched above") {
        ElementRef::Entity(_) => (probability::probability_of_outcome(s, name)?, "denotation"),
        ElementRef::Relationship(_) => (probability::probability_of(s, name)?, "direct"),
    };
    let manifest = RunManifest::new("prob", 0)
        .param("file", path)
        .param("target", target)
        .param("format", format.as_str());
    let known = value.known();
    let report = ProbReport {
        target,
        structure: s.name().as_str(),
        probability: known.map(ProbabilityValue::to_string),
        decimal: known.map(|p| sig_number(p.to_f64())),
        unknown: matches!(value, Probability::Unknown),
        via,
        manifest: &manifest,
    };
    Ok(match format {
        Format::Json => json_line(&report),
        Format::Csv => {
            let mut out = manifest.csv_line();
            out.push_str("target,structure,probability,decimal,unknown,via\n");
            writeln!(
                out,
                "{},{},{},{},{},{}",
                report.target,
                report.structure,
                report.probability.as_deref().unwrap_or(""),
                known.map(|p| sig(p.to_f64())).unwrap_or_default(),
                report.unknown,
                report.via
            )
            .unwrap();
            out
        }
    })
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string(value).expect("report serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct Rows<'a, T> {
    manifest: &'a RunManifest,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct BertrandRow {
    method: &'static str,
    estimate: f64,
    expected: f64,
    abs_error: f64,
}

pub fn bertrand(trials: u64, format: Format, seed: u64, workers: usize) -> Result<String, CliError> {
    let seed_value = Seed(seed);
    let (parallel, endpoint) = montecarlo::with_workers(workers, || {
        (
            montecarlo::bertrand_parallel(trials, seed_value),
            montecarlo::bertrand_endpoint(trials, seed_value),
        )
    });
    let rows = [
        ("parallel", parallel?, 0.5),
        ("endpoint", endpoint?, 1.0 / 3.0),
    ];
    let manifest = RunManifest::new("bertrand", seed)
        .param("trials", trials)
        .param("format", format.as_str());
    Ok(match format {
        Format::Csv => {
            let mut out = manifest.csv_line();
            out.push_str("method,estimate,expected,abs_error\n");
            for (method, record, expected) in &rows {
                writeln!(
                    out,
                    "{method},{},{},{}",
                    sig(record.relative),
                    sig(*expected),
                    sig((record.relative - expected).abs())
                )
                .unwrap();
            }
            out
        }
        Format::Json => json_line(&Rows {
            manifest: &manifest,
            rows: rows
                .iter()
                .map(|(method, record, expected)| BertrandRow {
                    method,
                    estimate: sig_number(record.relative),
                    expected: sig_number(*expected),
                    abs_error: sig_number((record.relative - expected).abs()),
                })
                .collect(),
        }),
    })
}

#[derive(Serialize)]
struct FrequencyRow<'a> {
    relation: &'a str,
    trials: u64,
    occurrences: u64,
    relative: f64,
}

pub fn simulate(
    path: &str,
    group: &str,
    trials: u64,
    format: Format,
    seed: u64,
    workers: usize,
) -> Result<String, CliError> {
    let structures = load(path)?;
    let owners: Vec<&StructureOfLevels> = structures
        .iter()
        .filter(|s| !s.alt_group_members(group).is_empty())
        .collect();
    let s = match owners.as_slice() {
        [s] => *s,
        [] => return Err(CliError::Domain(format!("unknown alternative group {group}"))),
        _ => {
            return Err(CliError::Domain(format!(
                "group {group} appears in several structures"
            )))
        }
    };
    let records: Vec<FrequencyRecord> =
        montecarlo::with_workers(workers, || montecarlo::simulate_group(s, group, trials, Seed(seed)))?;
    let manifest = RunManifest::new("simulate", seed)
        .param("file", path)
        .param("group", group)
        .param("trials", trials)
        .param("format", format.as_str());
    Ok(match format {
        Format::Csv => {
            let mut out = manifest.csv_line();
            out.push_str("relation,trials,occurrences,relative\n");
            for r in &records {
                writeln!(out, "{},{},{},{}", r.relation, r.trials, r.occurrences, sig(r.relative))
                    .unwrap();
            }
            out
        }
        Format::Json => json_line(&Rows {
            manifest: &manifest,
            rows: records
                .iter()
                .map(|r| FrequencyRow {
                    relation: r.relation.as_str(),
                    trials: r.trials,
                    occurrences: r.occurrences,
                    relative: sig_number(r.relative),
                })
                .collect(),
        }),
    })
}

#[derive(Serialize)]
struct ConvergenceRow {
    sample_size: u64,
    mean_abs_deviation: f64,
}

pub fn converge(
    p: &ProbabilityValue,
    sizes: &[u64],
    reps: u32,
    format: Format,
    seed: u64,
    workers: usize,
) -> Result<String, CliError> {
    let report = montecarlo::with_workers(workers, || {
        montecarlo::convergence_study(p, sizes, reps, Seed(seed))
    })?;
    let sizes_text = sizes
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let manifest = RunManifest::new("converge", seed)
        .param("p", p)
        .param("sizes", sizes_text)
        .param("reps", reps)
        .param("format", format.as_str());
    Ok(match format {
        Format::Csv => {
            let mut out = manifest.csv_line();
            out.push_str("sample_size,mean_abs_deviation\n");
            for size in &report.sample_sizes {
                let dev = report.deviation(*size).expect("every size reported");
                writeln!(out, "{size},{}", sig(dev)).unwrap();
            }
            out
        }
        Format::Json => json_line(&Rows {
            manifest: &manifest,
            rows: report
                .sample_sizes
                .iter()
                .map(|size| ConvergenceRow {
                    sample_size: *size,
                    mean_abs_deviation: sig_number(report.deviation(*size).unwrap_or(f64::NAN)),
                })
                .collect(),
        }),
    })
}
