use crate::args::{Format, ReproduceArgs};
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt_f64, SCHEMA_VERSION};
use pointsource_core::identifynd::examples::{axis_probes, bisector_probes, example1, example2, OracleTable};
use pointsource_core::Point;
use serde::Serialize;

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    example: u8,
    max_discrepancy: f64,
    max_relative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra_probe_discrepancy: Option<f64>,
    table: OracleTable,
}

fn oracle(stage: &'static str) -> impl Fn(pointsource_core::Error) -> CliError {
    move |e| CliError::validation(stage, e)
}

pub fn run(args: &ReproduceArgs) -> CliResult<()> {
    let (table, extra) = match args.which {
        1 => {
            let lambdas = if args.lambdas.is_empty() { vec![1.0, 10.0, 100.0] } else { args.lambdas.clone() };
            let probes = bisector_probes(args.dim, args.probes, args.radius).map_err(oracle("probes"))?;
            (example1(args.dim, args.a, 1.0, &probes, &lambdas).map_err(oracle("example 1"))?, None)
        }
        _ => {
            let lambdas = if args.lambdas.is_empty() { vec![10.0] } else { args.lambdas.clone() };
            let extra = if args.extra_probe.is_empty() { vec![1.0, 2.0, 0.0] } else { args.extra_probe.clone() };
            let extra = Point::new(&extra).map_err(oracle("extra probe"))?;
            let mut probes = axis_probes(args.m);
            probes.push(extra);
            let mut table = example2(args.a, &probes, &lambdas).map_err(oracle("example 2"))?;
            let tail = table.rows.split_off(6 * lambdas.len());
            (table, Some(OracleTable { rows: tail }))
        }
    };

    io::ensure_dir(&args.out)?;
    let name = format!("example{}", args.which);
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let dim = table.rows.first().map_or(args.dim, |r| r.probe.dim());
            let mut header = vec!["probe".to_string()];
            header.extend(["x", "y", "z"].iter().take(dim).map(|s| s.to_string()));
            header.extend(["lambda", "discrepancy", "scale", "relative"].map(String::from));
            let all = table.rows.iter().chain(extra.iter().flat_map(|t| &t.rows));
            let per_probe = table.rows.iter().filter(|r| r.probe == table.rows[0].probe).count().max(1);
            let rows: Vec<Vec<String>> = all
                .enumerate()
                .map(|(k, r)| {
                    let mut row = vec![(k / per_probe + 1).to_string()];
                    row.extend(r.probe.coords().iter().map(|c| fmt_f64(*c)));
                    row.extend([r.lambda, r.discrepancy, r.scale, r.discrepancy / r.scale].map(fmt_f64));
                    row
                })
                .collect();
            io::write_rows(&args.out.join(format!("{name}.csv")), &header, &rows)?;
        }
        Format::Json => {
            let mut full = table.clone();
            if let Some(t) = &extra {
                full.rows.extend(t.rows.iter().copied());
            }
            let summary = Summary {
                schema_version: SCHEMA_VERSION,
                example: args.which,
                max_discrepancy: table.max_discrepancy(),
                max_relative: table.max_relative(),
                extra_probe_discrepancy: extra.as_ref().map(|t| t.max_discrepancy()),
                table: full,
            };
            io::write_json(&args.out.join(format!("{name}.json")), &summary)?;
        }
    }

    print!(
        "example {}: {} rows, max discrepancy {:.3e}, max relative {:.3e}",
        args.which,
        table.rows.len(),
        table.max_discrepancy(),
        table.max_relative()
    );
    if let Some(t) = &extra {
        print!("; extra probe discrepancy {:.3e}", t.max_discrepancy());
    }
    println!();
    Ok(())
}
