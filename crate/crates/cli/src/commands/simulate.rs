use crate::args::{Format, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt_f64, SensorFile, SensorSeries, SCHEMA_VERSION};
use crate::noise::add_noise;
use pointsource_core::forward::{crank_nicolson_1d, free_space_response_in, CnOptions, CnSolution, FreeSpaceMedium};
use pointsource_core::model::{Coefficients, NoiseSpec, PointSource, Scenario, SpatialDomain};
use pointsource_core::TimeGrid;
use serde::{Deserialize, Serialize};

/// Ground-truth sidecar written next to simulated data.
#[derive(Serialize, Deserialize)]
pub struct Truth {
    pub schema_version: u32,
    pub grid: TimeGrid,
    pub noise: NoiseSpec,
    pub sources: Vec<PointSource>,
}

/// Noiseless sensor traces of `scenario`, plus the interval field when
/// `field_stride` is set.
pub fn forward_traces(
    scenario: &Scenario,
    field_stride: Option<usize>,
) -> CliResult<(Vec<Vec<f64>>, Option<CnSolution>)> {
    match &scenario.domain {
        SpatialDomain::FreeSpace { dim, reaction, diffusivity } => {
            if let Coefficients::Drift(d) = &scenario.coefficients {
                if !d.is_zero() {
                    return Err(CliError::validation(
                        "forward model",
                        "the free-space solver has no drift term; drift is only used by diagnose",
                    ));
                }
            }
            if field_stride.is_some() {
                return Err(CliError::validation("forward model", "field snapshots need an interval domain"));
            }
            let medium = FreeSpaceMedium { dim: *dim, reaction: *reaction, diffusivity: *diffusivity };
            let traces = scenario
                .sensors
                .iter()
                .map(|b| free_space_response_in(&scenario.sources, b, &scenario.grid, &medium))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::solver("free-space forward model", e))?;
            Ok((traces, None))
        }
        SpatialDomain::Interval { .. } => {
            let stride = field_stride.unwrap_or(scenario.grid.steps).max(1);
            let options = CnOptions { snapshot_stride: stride, ..CnOptions::default() };
            let sol =
                crank_nicolson_1d(scenario, &options).map_err(|e| CliError::solver("finite-difference solver", e))?;
            let traces = sol.traces.clone();
            Ok((traces, field_stride.map(|_| sol)))
        }
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let mut scenario = io::read_scenario(&args.scenario)?;
    if let Some(sigma) = args.noise {
        scenario.noise.sigma = sigma;
    }
    if let Some(seed) = args.seed {
        scenario.noise.seed = seed;
    }
    io::check_scenario(&scenario)?;
    if args.field_stride == Some(0) {
        return Err(CliError::validation("arguments", "--field-stride must be positive"));
    }

    let (mut traces, field) = forward_traces(&scenario, args.field_stride)?;
    add_noise(&mut traces, scenario.noise.sigma, scenario.noise.seed)?;

    io::ensure_dir(&args.out)?;
    let data_path = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let p = args.out.join("sensors.csv");
            io::write_series_csv(&p, &scenario.grid, &traces, "psi")?;
            p
        }
        Format::Json => {
            let p = args.out.join("sensors.json");
            let file = SensorFile {
                schema_version: SCHEMA_VERSION,
                grid: scenario.grid,
                sensors: scenario
                    .sensors
                    .iter()
                    .zip(traces)
                    .map(|(b, samples)| SensorSeries { location: *b, samples })
                    .collect(),
            };
            io::write_json(&p, &file)?;
            p
        }
    };
    let truth = Truth {
        schema_version: SCHEMA_VERSION,
        grid: scenario.grid,
        noise: scenario.noise,
        sources: scenario.sources.clone(),
    };
    io::write_json(&args.out.join("truth.json"), &truth)?;

    if let Some(sol) = field {
        let header = ["t", "x", "u"].map(String::from);
        let mut rows = Vec::new();
        for (snap, &k) in sol.snapshot_steps.iter().enumerate() {
            let t = fmt_f64(scenario.grid.time(k));
            for (x, u) in sol.nodes.iter().zip(&sol.field[snap]) {
                rows.push(vec![t.clone(), fmt_f64(*x), fmt_f64(*u)]);
            }
        }
        io::write_rows(&args.out.join("field.csv"), &header, &rows)?;
    }

    println!(
        "simulated {} sensors x {} samples (noise sigma {}, seed {}) -> {}",
        scenario.sensors.len(),
        scenario.grid.len(),
        scenario.noise.sigma,
        scenario.noise.seed,
        data_path.display()
    );
    Ok(())
}
