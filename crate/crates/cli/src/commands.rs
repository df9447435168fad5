use std::error::Error as StdError;
use std::path::Path;
use std::time::Instant;

use hwe_equiv::datasets::{builtin, builtin_counts, parse_dataset, BUILTINS};
use hwe_equiv::simulation::{boundary_study, power_grid, sensitivity_study, StudyConfig};
use hwe_equiv::stats::{asymptotic_sigma, min_epsilon, observed_distance};
use hwe_equiv::{
    bootstrap_sigma, from_counts, l2_distance, project_to_hwe, run_asymptotic_test,
    run_bootstrap_test, BootstrapOptions, CalibrationKind, GenotypeCounts, ProjectionOptions,
    TestSpec,
};

use crate::report::{MinEpsReport, MinEpsRow, RunReport};
use crate::{BoundaryArgs, Command, DataArgs, MinEpsArgs, PowerArgs, StudyArgs, TestArgs};

pub type CmdResult<T> = std::result::Result<T, Box<dyn StdError>>;

const THREADS_VAR: &str = "HWE_EQUIV_THREADS";

/// Sizes the global worker pool from `HWE_EQUIV_THREADS`, if set.
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Returns the process exit code on success.
pub fn run(command: Command) -> CmdResult<u8> {
    match command {
        Command::Test(args) => cmd_test(args),
        Command::MinEps(args) => cmd_min_eps(args).map(|_| 0),
        Command::Power(args) => cmd_power(args).map(|_| 0),
        Command::Boundary(args) => cmd_boundary(args).map(|_| 0),
        Command::Datasets { id } => cmd_datasets(id).map(|_| 0),
    }
}

/// Resolves `--data` to a label for CSV output and the counts.
fn load(data: &str) -> CmdResult<(String, GenotypeCounts)> {
    if let Some(id) = data.strip_prefix("builtin:") {
        let counts = id
            .parse()
            .ok()
            .and_then(builtin_counts)
            .ok_or_else(|| format!("unknown built-in data set {id:?}; expected 1, 2 or 3"))?;
        return Ok((id.to_string(), counts));
    }
    let path = Path::new(data);
    let text = std::fs::read_to_string(path).map_err(|e| format!("{data}: {e}"))?;
    let counts = parse_dataset(&text).map_err(|e| format!("{data}: {e}"))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().replace(',', "_"))
        .unwrap_or_else(|| "data".into());
    Ok((label, counts))
}

fn cmd_test(args: TestArgs) -> CmdResult<u8> {
    let start = Instant::now();
    let DataArgs { data, alpha, seed } = &args.data;
    let (_, counts) = load(data)?;
    let p = from_counts(&counts)?;
    let n = counts.n();

    let mut results = Vec::new();
    for kind in args.kind.kinds() {
        for calib in args.calib.calibrations() {
            let r = match calib {
                CalibrationKind::Asymptotic => run_asymptotic_test(&p, n, args.eps, *alpha, kind)?,
                CalibrationKind::Bootstrap => {
                    let opts = BootstrapOptions::new(kind, args.b, *seed);
                    run_bootstrap_test(&p, n, args.eps, *alpha, &opts)?
                }
            };
            results.push(r);
        }
    }
    let code = if results[0].reject { 0 } else { 1 };

    let l2 = l2_distance(&p, &p.hwe())?;
    let d = project_to_hwe(&p, &ProjectionOptions::default())?.distance;
    let report = RunReport::new(
        data,
        &counts,
        &p,
        args.eps,
        *alpha,
        *seed,
        args.b,
        l2,
        d,
        &results,
        start.elapsed(),
    );
    print!("{}", report.render(args.format.format())?);
    Ok(code)
}

fn cmd_min_eps(args: MinEpsArgs) -> CmdResult<()> {
    let start = Instant::now();
    let DataArgs { data, alpha, seed } = &args.data;
    let (label, counts) = load(data)?;
    let p = from_counts(&counts)?;
    let n = counts.n();

    let mut rows = Vec::new();
    let mut l2 = 0.0;
    let mut d = 0.0;
    for kind in hwe_equiv::TestKind::ALL {
        let observed = observed_distance(&p, kind, &ProjectionOptions::default())?;
        match kind {
            hwe_equiv::TestKind::Conditional => l2 = observed.distance,
            hwe_equiv::TestKind::MinimumDistance => d = observed.distance,
        }
        let asym = asymptotic_sigma(&p, &observed)?;
        let boot = bootstrap_sigma(&p, n, &BootstrapOptions::new(kind, args.b, *seed))?;
        for (calibration, sigma) in [
            (CalibrationKind::Asymptotic, asym),
            (CalibrationKind::Bootstrap, boot),
        ] {
            rows.push(MinEpsRow {
                test: TestSpec::new(kind, calibration),
                sigma,
                min_eps: min_epsilon(observed.distance, n, *alpha, sigma)?,
            });
        }
    }
    let report = MinEpsReport::new(
        data,
        label,
        &counts,
        *alpha,
        *seed,
        args.b,
        l2,
        d,
        rows,
        start.elapsed(),
    );
    print!("{}", report.render(args.format.format())?);
    Ok(())
}

fn study_config(args: &StudyArgs, epsilon: f64, points: usize) -> CmdResult<StudyConfig> {
    let (label, counts) = load(&args.data.data)?;
    let mut config = StudyConfig::new(label, counts, epsilon);
    config.alpha = args.data.alpha;
    config.seed = args.data.seed;
    config.replications = args.reps;
    config.eval_points = points;
    config.bootstrap_replicates = args.b;
    config.tests = args
        .kind
        .kinds()
        .into_iter()
        .flat_map(|k| {
            args.calib
                .calibrations()
                .into_iter()
                .map(move |c| TestSpec::new(k, c))
        })
        .collect();
    Ok(config)
}

fn cmd_power(args: PowerArgs) -> CmdResult<()> {
    if args.eps_list.is_empty() {
        let eps = args.eps.ok_or("either --eps or --eps-list is required")?;
        let config = study_config(&args.study, eps, args.points)?;
        print!("{}", sensitivity_study(&config)?.to_csv());
    } else {
        let config = study_config(&args.study, args.eps_list[0], args.points)?;
        print!("{}", power_grid(&args.eps_list, &config)?.to_csv());
    }
    Ok(())
}

fn cmd_boundary(args: BoundaryArgs) -> CmdResult<()> {
    let config = study_config(&args.study, args.eps, args.points)?;
    print!("{}", boundary_study(&config)?.to_csv());
    Ok(())
}

fn cmd_datasets(id: Option<u8>) -> CmdResult<()> {
    match id {
        Some(id) => {
            let b = builtin(id).ok_or_else(|| format!("unknown built-in data set {id}"))?;
            print!("{}", b.text);
        }
        None => {
            for b in &BUILTINS {
                let counts = parse_dataset(b.text)?;
                println!("# builtin:{}  k = {}  n = {}", b.id, counts.k(), counts.n());
                println!("# {}", b.source);
                print!("{}", hwe_equiv::datasets::serialize_dataset(&counts));
                println!();
            }
        }
    }
    Ok(())
}
