use crate::args::{DiagnoseArgs, Format};
use crate::error::CliResult;
use crate::io::{self, SCHEMA_VERSION};
use pointsource_core::identify1d::{alternation_diagnostic, AlternationViolation};
use pointsource_core::identifynd::{build_a0, condition_d_check, sufficiency_check, A0Matrix, ConditionD};
use pointsource_core::model::{validate_scenario, Coefficients, DriftFieldND, Violation};
use pointsource_core::Point;
use serde::Serialize;

#[derive(Serialize)]
struct Alternation {
    passed: bool,
    violations: Vec<AlternationViolation>,
}

#[derive(Serialize)]
struct AmplitudeCheck {
    passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<A0Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Sufficiency {
    passed: bool,
    max_sources: usize,
    sensors: usize,
    required: usize,
}

#[derive(Serialize, Default)]
struct Checks {
    #[serde(skip_serializing_if = "Option::is_none")]
    alternation: Option<Alternation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition_d: Option<ConditionD>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a0: Option<AmplitudeCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sufficiency: Option<Sufficiency>,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    command: &'static str,
    dimension: usize,
    sources: usize,
    sensors: usize,
    validation: Vec<Violation>,
    checks: Checks,
    notes: Vec<String>,
    identifiable: bool,
    verdict: String,
}

pub fn run(args: &DiagnoseArgs) -> CliResult<()> {
    let scenario = io::read_scenario(&args.scenario)?;
    let n = scenario.domain.dim();
    let sources: Vec<Point> = scenario.sources.iter().map(|s| s.location).collect();
    let sensors = &scenario.sensors;
    let mut checks = Checks::default();
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    let dims_ok = sources.iter().chain(sensors).all(|p| p.dim() == n);
    if !dims_ok {
        notes.push(format!("points with dimension other than {n}; geometric checks skipped"));
    } else if n == 1 {
        let xs: Vec<f64> = sources.iter().map(|p| p.x()).collect();
        let bs: Vec<f64> = sensors.iter().map(|p| p.x()).collect();
        let violations = alternation_diagnostic(&xs, &bs);
        if !violations.is_empty() {
            let mut conds: Vec<u8> = violations.iter().map(|v| v.condition()).collect();
            conds.dedup();
            let list: Vec<String> = conds.iter().map(|c| c.to_string()).collect();
            let word = if conds.len() == 1 { "condition" } else { "conditions" };
            failures.push(format!("non-unique (alternation {word} {})", list.join(", ")));
        }
        checks.alternation = Some(Alternation { passed: violations.is_empty(), violations });
    } else {
        let cd = condition_d_check(sensors, n);
        if !cd.holds {
            let w = cd.witness.clone().unwrap_or_default();
            failures.push(format!("non-unique: condition (D) violated by sensors {w:?}"));
        }
        checks.condition_d = Some(cd);

        if sources.is_empty() {
            notes.push("no candidate sources; amplitude matrix skipped".into());
        } else {
            let drift = match &scenario.coefficients {
                Coefficients::Drift(d) => d.clone(),
                _ => DriftFieldND::Zero { dim: n },
            };
            checks.a0 = Some(match build_a0(&sources, sensors, &drift) {
                Ok(m) => {
                    if m.singular == Some(true) {
                        failures.push("non-unique: amplitude matrix A0 is singular".into());
                    }
                    if m.singular.is_none() {
                        notes.push(format!(
                            "A0 is {}x{}; determinant needs a square matrix",
                            sensors.len(),
                            sources.len()
                        ));
                    }
                    AmplitudeCheck { passed: m.singular.map(|s| !s), matrix: Some(m), error: None }
                }
                Err(e) => AmplitudeCheck { passed: None, matrix: None, error: Some(e.to_string()) },
            });
        }

        let r = args.max_sources.unwrap_or(sources.len());
        match sufficiency_check(r, sensors.len(), n) {
            Ok(passed) => {
                let required = if n == 2 { 2 * r + 1 } else { 3 * r + 1 };
                if !passed {
                    failures.push(format!(
                        "insufficient sensors: s = {} but r = {r} sources in {n}D need s >= {required}",
                        sensors.len()
                    ));
                }
                checks.sufficiency = Some(Sufficiency { passed, max_sources: r, sensors: sensors.len(), required });
            }
            Err(e) => notes.push(format!("sufficiency check skipped: {e}")),
        }
    }

    let identifiable = failures.is_empty();
    let verdict = if identifiable { "identifiable (all checks pass)".to_string() } else { failures.join("; ") };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "diagnose",
        dimension: n,
        sources: sources.len(),
        sensors: sensors.len(),
        validation: validate_scenario(&scenario),
        checks,
        notes,
        identifiable,
        verdict,
    };

    io::ensure_dir(&args.out)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => io::write_json(&args.out.join("diagnostics.json"), &report)?,
        Format::Csv => {
            let flag = |p: Option<bool>| p.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into());
            let c = &report.checks;
            let mut rows = Vec::new();
            if let Some(a) = &c.alternation {
                let conds: Vec<String> = a.violations.iter().map(|v| v.condition().to_string()).collect();
                rows.push(vec!["alternation".into(), a.passed.to_string(), conds.join(" ")]);
            }
            if let Some(d) = &c.condition_d {
                rows.push(vec![
                    "condition_d".into(),
                    d.holds.to_string(),
                    format!("{:?}", d.witness.clone().unwrap_or_default()),
                ]);
            }
            if let Some(a) = &c.a0 {
                let det = a.matrix.as_ref().and_then(|m| m.determinant).map(|d| d.to_string()).unwrap_or_default();
                rows.push(vec!["a0".into(), flag(a.passed), det]);
            }
            if let Some(s) = &c.sufficiency {
                rows.push(vec![
                    "sufficiency".into(),
                    s.passed.to_string(),
                    format!("s={} r={} required={}", s.sensors, s.max_sources, s.required),
                ]);
            }
            rows.push(vec!["verdict".into(), report.identifiable.to_string(), report.verdict.clone()]);
            io::write_rows(&args.out.join("diagnostics.csv"), &["check", "passed", "detail"].map(String::from), &rows)?;
        }
    }
    println!("{}", report.verdict);
    Ok(())
}
