use std::path::Path;

use qmeas::experiment::{fit_noise_measurements, point_seed, run_measurement, ExperimentConfig, Mode};
use qmeas::families::{default_grid, sweep_family, uniform_grid, DiagonalFamily};
use qmeas::{
    compile_angles, BoundReport, ExperimentResult, FamilyId, InfoTriple, Measurement,
    MeasurementFile, OutcomeAngles, SweepRow,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{fmt_bool, fmt_g, write_csv, write_json};
use crate::{Cli, Command, CompileArgs, FamilyArgs, Format, SimulateArgs, SweepArgs, VerifyArgs};

/// Completeness tolerance for user-supplied measurement files.
pub const FILE_TOLERANCE: f64 = 1e-6;

const SWEEP_COLUMNS: [&str; 13] = [
    "t", "p", "G", "F", "R", "gap_global", "gap_GF", "gap_GR", "gap_FR", "sat_global", "sat_GF",
    "sat_GR", "sat_FR",
];

pub fn run(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Sweep(args) => sweep(args, cli.format.unwrap_or(Format::Csv), out),
        Command::Verify(args) => verify(args, cli.format.unwrap_or(Format::Json), out),
        Command::Simulate(args) => simulate(args, cli.seed, cli.format.unwrap_or(Format::Csv), out),
        Command::Compile(args) => compile(args, cli.format.unwrap_or(Format::Csv), out),
    }
}

/// Parses `start:end:count`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::config(format!("--grid: expected start:end:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let end: f64 = end.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    if count == 1 && start != end {
        return Err(CliError::config("--grid: a single point needs start == end"));
    }
    Ok(uniform_grid(start, end, count))
}

fn load_family(args: &FamilyArgs) -> CliResult<(FamilyId, DiagonalFamily)> {
    match (&args.family, &args.family_file) {
        (Some(t), None) => {
            let id = FamilyId::new(*t).map_err(|e| CliError::from(e).context("--family"))?;
            Ok((id, id.builtin()))
        }
        (None, Some(path)) => {
            let text = read(path, "--family-file")?;
            let fam = DiagonalFamily::from_json(&text)
                .map_err(|e| CliError::from(e).context("--family-file"))?;
            let id = FamilyId::new(fam.t).map_err(|e| CliError::from(e).context("--family-file"))?;
            Ok((id, fam))
        }
        _ => Err(CliError::config("--family: exactly one of --family or --family-file is required")),
    }
}

fn read(path: &Path, what: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{what} {}: {e}", path.display())))
}

fn load_measurement(path: &Path) -> CliResult<Measurement> {
    let text = read(path, "measurement")?;
    let file: MeasurementFile = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("measurement {}: malformed JSON: {e}", path.display())))?;
    let dim = file.dim;
    let m = Measurement::from_file(file)?;
    debug_assert_eq!(m.dim(), dim);
    Measurement::checked(m.kraus().to_vec(), FILE_TOLERANCE).map_err(CliError::from)
}

fn grid_for(fam: &DiagonalFamily, id: FamilyId, grid: Option<&str>) -> CliResult<Vec<f64>> {
    let ps = match grid {
        Some(spec) => parse_grid(spec)?,
        None if *fam == id.builtin() => default_grid(id),
        None => uniform_grid(fam.domain[0], fam.domain[1], qmeas::families::DEFAULT_GRID_POINTS),
    };
    // Surface domain violations before any work, naming the option.
    for &p in &ps {
        fam.singular_table::<f64>(p)
            .map_err(|e| CliError::from(e).context(if grid.is_some() { "--grid" } else { "--family" }))?;
    }
    Ok(ps)
}

#[derive(Serialize)]
struct BoundRecord {
    t: u8,
    p: f64,
    #[serde(flatten)]
    report: BoundReport,
}

fn report_cells(report: &BoundReport) -> Vec<String> {
    let mut row: Vec<String> = [report.triple.g, report.triple.f, report.triple.r]
        .into_iter()
        .chain(report.gaps())
        .map(fmt_g)
        .collect();
    row.extend(
        [report.sat_global, report.sat_gf, report.sat_gr, report.sat_fr]
            .into_iter()
            .map(|b| fmt_bool(b).to_string()),
    );
    row
}

fn sweep_row_cells(row: &SweepRow) -> Vec<String> {
    let mut cells = vec![row.t.to_string(), fmt_g(row.p)];
    cells.extend(report_cells(&row.report));
    cells
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn sweep(args: &SweepArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let (id, fam) = load_family(&args.family)?;
    let grid = grid_for(&fam, id, args.grid.as_deref())?;
    let rows = sweep_family(&fam, id, &grid)?;
    match format {
        Format::Csv => write_csv(
            out,
            &header(&SWEEP_COLUMNS),
            &rows.iter().map(sweep_row_cells).collect::<Vec<_>>(),
        ),
        Format::Json => {
            let records: Vec<BoundRecord> = rows
                .iter()
                .map(|r| BoundRecord {
                    t: r.t.index(),
                    p: r.p,
                    report: r.report,
                })
                .collect();
            write_json(out, &records)
        }
    }
}

fn verify(args: &VerifyArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let m = load_measurement(&args.measurement)?;
    let report = BoundReport::for_measurement(&m)?;
    match format {
        Format::Json => write_json(out, &report),
        Format::Csv => {
            let mut row = vec![report.dim.to_string()];
            row.extend(report_cells(&report));
            write_csv(out, &header(&["dim"]).into_iter().chain(header(&SWEEP_COLUMNS[2..])).collect::<Vec<_>>(), &[row])
        }
    }
}

fn simulate(args: &SimulateArgs, seed: u64, format: Format, out: Option<&Path>) -> CliResult<()> {
    let (id, fam) = load_family(&args.family)?;
    let grid = match args.p {
        Some(p) => {
            fam.singular_table::<f64>(p).map_err(|e| CliError::from(e).context("--p"))?;
            vec![p]
        }
        None => grid_for(&fam, id, args.grid.as_deref())?,
    };
    if !(0.0..=1.0).contains(&args.e) {
        return Err(CliError::config(format!("--e: {} outside [0, 1]", args.e)));
    }
    if args.shots == 0 {
        return Err(CliError::config("--shots: must be at least 1"));
    }
    if args.runs == 0 {
        return Err(CliError::config("--runs: must be at least 1"));
    }
    let mode = if args.exact { Mode::Exact } else { Mode::Sampled };

    let mut measurements = Vec::with_capacity(grid.len());
    let mut results: Vec<ExperimentResult> = Vec::with_capacity(grid.len());
    for (i, &p) in grid.iter().enumerate() {
        let m = fam.measurement(p)?;
        let config = ExperimentConfig {
            shots: args.shots,
            runs: args.runs,
            seed: point_seed(seed, i),
            mode,
        };
        let mut res = run_measurement(&m, args.e, &config)?;
        res.t = Some(id);
        res.p = Some(p);
        measurements.push(m);
        results.push(res);
    }

    if args.fit_e {
        let points: Vec<(Measurement, InfoTriple)> = if results.len() >= 3 {
            measurements.iter().cloned().zip(results.iter().map(|r| r.triple())).collect()
        } else {
            // A single strength: every Monte-Carlo run is a data point.
            measurements
                .iter()
                .zip(&results)
                .flat_map(|(m, r)| r.per_run.iter().map(move |run| (m.clone(), run.triple)))
                .collect()
        };
        let e_hat = fit_noise_measurements(&points).map_err(|e| CliError::from(e).context("--fit-e"))?;
        for r in &mut results {
            r.e_fitted = Some(e_hat);
        }
    }

    match format {
        Format::Json if results.len() == 1 => write_json(out, &results[0]),
        Format::Json => write_json(out, &results),
        Format::Csv => {
            let mut cols = header(&SWEEP_COLUMNS);
            cols.extend(header(&["sigma_G", "sigma_F", "sigma_R"]));
            if args.fit_e {
                cols.push("e_fitted".into());
            }
            let rows = results
                .iter()
                .map(|res| simulate_cells(res, id))
                .collect::<Vec<_>>();
            write_csv(out, &cols, &rows)
        }
    }
}

fn simulate_cells(res: &ExperimentResult, id: FamilyId) -> Vec<String> {
    let triple = res.triple();
    let mut cells = vec![id.to_string(), fmt_g(res.p.unwrap_or(f64::NAN))];
    match BoundReport::new(triple, 3) {
        Ok(report) => cells.extend(report_cells(&report)),
        // Sampling noise can push an estimate outside the realizable region.
        Err(_) => {
            cells.extend([triple.g, triple.f, triple.r].map(fmt_g));
            cells.extend(["nan"; 4].map(String::from));
            cells.extend(["0"; 4].map(String::from));
        }
    }
    cells.extend([res.sigma_G, res.sigma_F, res.sigma_R].map(fmt_g));
    if let Some(e) = res.e_fitted {
        cells.push(fmt_g(e));
    }
    cells
}

#[derive(Serialize)]
struct AngleRecord<'a> {
    outcome: usize,
    theta_deg: &'a [f64],
    rev_theta_deg: &'a [f64],
}

fn compile(args: &CompileArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let m = match (&args.measurement, args.p) {
        (Some(path), None) => load_measurement(path)?,
        (Some(_), Some(_)) => return Err(CliError::config("--p: only valid together with --family")),
        (None, Some(p)) => {
            let (_, fam) = load_family(&args.family)?;
            fam.measurement(p).map_err(|e| CliError::from(e).context("--p"))?
        }
        (None, None) => {
            return Err(CliError::config(
                "measurement: give a measurement file or --family with --p",
            ))
        }
    };
    let angles: Vec<OutcomeAngles> = compile_angles(&m)?;
    match format {
        Format::Json => {
            let records: Vec<AngleRecord> = angles
                .iter()
                .map(|a| AngleRecord {
                    outcome: a.outcome,
                    theta_deg: &a.theta_deg,
                    rev_theta_deg: &a.reversal_deg,
                })
                .collect();
            write_json(out, &records)
        }
        Format::Csv => {
            let d = m.dim();
            let mut cols = vec!["outcome".to_string()];
            cols.extend((0..d).map(|i| format!("theta{i}_deg")));
            cols.extend((0..d).map(|i| format!("rev_theta{i}_deg")));
            let rows = angles
                .iter()
                .map(|a| {
                    std::iter::once(a.outcome.to_string())
                        .chain(a.theta_deg.iter().chain(&a.reversal_deg).map(|x| format!("{x:.6}")))
                        .collect()
                })
                .collect::<Vec<Vec<String>>>();
            write_csv(out, &cols, &rows)
        }
    }
}
