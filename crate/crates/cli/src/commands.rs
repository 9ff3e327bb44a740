//! Command execution. Every run is a pure function of its [`RunConfig`]:
//! fixed flags and seed produce byte-identical output, file or stdout.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use walkline_core::bridge::{height_marginal, BridgeSampler, BridgeSystem};
use walkline_core::io::{kernel_to_json, sos_to_json};
use walkline_core::phase::{phase_scan, scan_point, ScanOptions, ScanPoint, ScanRow};
use walkline_core::presets::{
    double_step, geometric_step, log_potential, nearest_neighbor_sos, power_tail_phi, square_well,
};
use walkline_core::rw_to_sos::{
    general_metropolis_kernel, kernel_from_phi, metropolis_full_kernel, metropolis_reflect_kernel,
    sos_from_general, sos_from_metropolis, sos_from_phi,
};
use walkline_core::sos_to_rw::{continued_fraction_invert, kernel_from_sos, perron_ground_state};
use walkline_core::verify::{run_all, Tolerances};
use walkline_core::{Error, Result, SosModel, WalkKernel, WallMode};

use crate::args::{
    parse_lambda, Command, Fig1Args, GlobalArgs, LambdaChoice, MarginalArgs, ResolvedPreset,
    RunConfig, SampleArgs, ScanArgs, TranslateArgs, VerifyArgs,
};

/// Run one parsed invocation; the returned code is the process exit code.
pub fn dispatch(config: &RunConfig) -> Result<i32> {
    match &config.command {
        Command::Translate(a) => run_translate(&config.global, a).map(|()| 0),
        Command::Sample(a) => run_sample(&config.global, a).map(|()| 0),
        Command::Scan(a) => run_scan(&config.global, a).map(|()| 0),
        Command::Verify(a) => run_verify(&config.global, a),
        Command::Fig1(a) => run_fig1(&config.global, a).map(|()| 0),
        Command::Marginal(a) => run_marginal(&config.global, a).map(|()| 0),
    }
}

/// Fixed decimal format for every float column: 17 significant digits, so
/// readers in any language reconstruct the exact double.
fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stream_error(path: Option<&Path>, e: std::io::Error) -> Error {
    match path {
        Some(p) => Error::InvalidInput(format!("{}: {e}", p.display())),
        None => Error::InvalidInput(format!("stdout: {e}")),
    }
}

const DEFAULT_CUTOFF: usize = 512;

/// Line-side model of a preset.
fn build_sos(preset: ResolvedPreset, m: usize, theta: f64, wall: WallMode) -> Result<SosModel> {
    match preset {
        ResolvedPreset::PowerTail { delta, gamma } => Ok(sos_from_phi(&power_tail_phi(delta, gamma, m))),
        ResolvedPreset::SquareWell { v0 } => nearest_neighbor_sos(square_well(v0, m)),
        ResolvedPreset::DoubleStep { v0, v1 } => nearest_neighbor_sos(double_step(v0, v1, m)),
        ResolvedPreset::LogPotential { delta } => {
            sos_from_metropolis(&log_potential(delta, m), wall, theta)
        }
        ResolvedPreset::GeometricStep { j, delta, band } => {
            sos_from_general(&geometric_step(j, band)?, &log_potential(delta, m))
        }
    }
}

/// Walk-side kernel of a preset. Wall-well presets are line models, so they
/// are inverted first: tilt by lambda, run the downward recursion, and read
/// the +-1 kernel off the recovered coupling.
fn build_walk_kernel(
    preset: ResolvedPreset,
    m: usize,
    theta: f64,
    wall: WallMode,
    lambda: LambdaChoice,
) -> Result<WalkKernel> {
    match preset {
        ResolvedPreset::PowerTail { delta, gamma } => {
            Ok(kernel_from_phi(&power_tail_phi(delta, gamma, m)))
        }
        ResolvedPreset::LogPotential { delta } => {
            let u = log_potential(delta, m);
            match wall {
                WallMode::Reflect => metropolis_reflect_kernel(&u, theta),
                WallMode::MetropolisWall => metropolis_full_kernel(&u, theta),
            }
        }
        ResolvedPreset::GeometricStep { j, delta, band } => {
            general_metropolis_kernel(&geometric_step(j, band)?, &log_potential(delta, m))
        }
        ResolvedPreset::SquareWell { .. } | ResolvedPreset::DoubleStep { .. } => {
            let sos = build_sos(preset, m, theta, wall)?;
            invert_to_kernel(&sos, lambda)
        }
    }
}

/// Invert a line model into a walk kernel. With "auto" the spectral pair is
/// already in hand, and reading rates off eigenvector component ratios is
/// numerically stable deep into a pinned phase; the raw downward recursion
/// amplifies noise by (1/a^2)^X there, so it serves the explicit-lambda
/// strategies, where it is the defining object.
fn invert_to_kernel(sos: &SosModel, lambda: LambdaChoice) -> Result<WalkKernel> {
    match lambda {
        LambdaChoice::Auto => {
            let g = perron_ground_state(sos)?;
            Ok(kernel_from_sos(sos, &g)?.kernel)
        }
        LambdaChoice::Rho1 | LambdaChoice::Fixed(_) => {
            let tilt = lambda_value(lambda, sos)?;
            let inversion = continued_fraction_invert(sos.potential(), tilt)?;
            Ok(kernel_from_phi(&inversion.phi))
        }
    }
}

fn lambda_value(choice: LambdaChoice, m: &SosModel) -> Result<f64> {
    match choice {
        LambdaChoice::Auto => Ok(perron_ground_state(m)?.rho.ln()),
        LambdaChoice::Rho1 => Ok(0.0),
        LambdaChoice::Fixed(x) => Ok(x),
    }
}

fn run_translate(global: &GlobalArgs, args: &TranslateArgs) -> Result<()> {
    let preset = args.preset.resolve()?;
    let m = global.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let theta = args.preset.theta;
    let wall: WallMode = args.preset.wall.into();
    match args.direction {
        crate::args::Direction::Rw2Sos => {
            if args.sos_out.is_some() {
                return Err(Error::InvalidInput("--sos-out applies to sos2rw".into()));
            }
            if matches!(
                preset,
                ResolvedPreset::SquareWell { .. } | ResolvedPreset::DoubleStep { .. }
            ) {
                return Err(Error::InvalidInput(
                    "wall wells are line-side presets; translate sos2rw instead".into(),
                ));
            }
            let sos = build_sos(preset, m, theta, wall)?;
            write_output(&global.out, &sos_to_json(&sos))?;
            if let Some(path) = &args.kernel_out {
                let kernel =
                    build_walk_kernel(preset, m, theta, wall, LambdaChoice::Auto)?;
                write_output(&Some(path.clone()), &kernel_to_json(&kernel))?;
            }
            Ok(())
        }
        crate::args::Direction::Sos2Rw => {
            if args.kernel_out.is_some() {
                return Err(Error::InvalidInput(
                    "--kernel-out applies to rw2sos; sos2rw already emits the kernel".into(),
                ));
            }
            if matches!(
                preset,
                ResolvedPreset::LogPotential { .. } | ResolvedPreset::GeometricStep { .. }
            ) {
                return Err(Error::InvalidInput(
                    "acceptance-walk presets are walk-side; translate rw2sos instead".into(),
                ));
            }
            let sos = build_sos(preset, m, theta, wall)?;
            let kernel = invert_to_kernel(&sos, parse_lambda(&args.lambda)?)?;
            write_output(&global.out, &kernel_to_json(&kernel))?;
            if let Some(path) = &args.sos_out {
                write_output(&Some(path.clone()), &sos_to_json(&sos))?;
            }
            Ok(())
        }
    }
}

fn run_sample(global: &GlobalArgs, args: &SampleArgs) -> Result<()> {
    let preset = args.preset.resolve()?;
    let m = global.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let kernel = build_walk_kernel(
        preset,
        m,
        args.preset.theta,
        args.preset.wall.into(),
        parse_lambda(&args.lambda)?,
    )?;
    let sampler = BridgeSampler::new(&kernel, args.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(global.seed);

    let path = global.out.as_deref();
    let mut sink: BufWriter<Box<dyn Write>> = match path {
        Some(p) => BufWriter::new(Box::new(
            File::create(p).map_err(|e| stream_error(Some(p), e))?,
        )),
        None => BufWriter::new(Box::new(std::io::stdout())),
    };
    writeln!(sink, "sample_id,n,x_n").map_err(|e| stream_error(path, e))?;
    for id in 0..args.samples {
        let bridge = sampler.sample(&mut rng);
        for (site, &height) in bridge.heights().iter().enumerate() {
            writeln!(sink, "{id},{site},{height}").map_err(|e| stream_error(path, e))?;
        }
    }
    sink.flush().map_err(|e| stream_error(path, e))
}

fn scan_header(first: &ScanPoint) -> &'static str {
    match first {
        ScanPoint::PowerTail { .. } => "delta,gamma",
        ScanPoint::SquareWell { .. } => "v0",
        ScanPoint::DoubleStep { .. } => "v0,v1",
    }
}

fn scan_params(point: &ScanPoint) -> String {
    match *point {
        ScanPoint::PowerTail { delta, gamma } => {
            format!("{},{}", csv_float(delta), csv_float(gamma))
        }
        ScanPoint::SquareWell { v0 } => csv_float(v0),
        ScanPoint::DoubleStep { v0, v1 } => format!("{},{}", csv_float(v0), csv_float(v1)),
    }
}

fn run_scan(global: &GlobalArgs, args: &ScanArgs) -> Result<()> {
    let points = args.preset.resolve_grid()?;
    let mut opts = ScanOptions::default();
    if let Some(m) = global.cutoff {
        opts.cutoff = m;
    }
    let rows: Vec<ScanRow> = if global.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(global.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        // Indexed parallel collect keeps grid order, so the merged CSV is
        // identical to the sequential one.
        pool.install(|| points.par_iter().map(|&p| scan_point(p, &opts)).collect::<Result<_>>())?
    } else {
        phase_scan(&points, &opts)?
    };

    let mut text = format!(
        "{},closed_form_regime,boundary_distance,numeric_regime,growth_ratio,agreement\n",
        scan_header(&points[0])
    );
    for row in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            scan_params(&row.point),
            row.closed_form,
            csv_float(row.boundary_distance),
            row.diagnostic.verdict,
            csv_float(row.diagnostic.growth_ratio),
            row.agreement
        ));
    }
    write_output(&global.out, &text)
}

fn run_verify(global: &GlobalArgs, args: &VerifyArgs) -> Result<i32> {
    if let Some(n) = args.n {
        log::debug!("verify runs its pinned sizes; --N {n} is informational");
    }
    let mut tol = Tolerances::default();
    global.tol.apply(&mut tol);
    let results = run_all(&tol, args.only.as_deref());
    if results.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no criterion matches {:?}",
            args.only.as_deref().unwrap_or("")
        )));
    }
    let mut text = String::new();
    for r in &results {
        text.push_str(&r.line());
        text.push('\n');
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} of {} criteria passed\n", results.len() - failed, results.len()));
    write_output(&global.out, &text)?;
    Ok(if failed == 0 { 0 } else { 1 })
}

fn run_fig1(global: &GlobalArgs, args: &Fig1Args) -> Result<()> {
    if args.deltas.is_empty() {
        return Err(Error::InvalidInput("fig1 needs at least one delta".into()));
    }
    let m = global.cutoff.unwrap_or(args.xmax + 2);
    if m <= args.xmax {
        return Err(Error::InvalidInput(format!(
            "cutoff {m} truncates the table; need M > xmax = {}",
            args.xmax
        )));
    }
    let columns: Vec<Vec<f64>> = args
        .deltas
        .iter()
        .map(|&delta| sos_from_phi(&power_tail_phi(delta, args.gamma, m)).potential().to_vec())
        .collect();
    let mut text = String::from("X");
    for delta in &args.deltas {
        text.push_str(&format!(",V_{delta}"));
    }
    text.push('\n');
    for x in 0..=args.xmax {
        text.push_str(&x.to_string());
        for col in &columns {
            text.push(',');
            text.push_str(&csv_float(col[x]));
        }
        text.push('\n');
    }
    write_output(&global.out, &text)
}

fn run_marginal(global: &GlobalArgs, args: &MarginalArgs) -> Result<()> {
    let preset = args.preset.resolve()?;
    let m = global.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let kernel = build_walk_kernel(
        preset,
        m,
        args.preset.theta,
        args.preset.wall.into(),
        parse_lambda(&args.lambda)?,
    )?;
    let t = args.t.unwrap_or(args.n / 2);
    if t > args.n {
        return Err(Error::InvalidInput(format!("slice {t} lies outside the bridge 0..={}", args.n)));
    }
    let marginal = height_marginal(&BridgeSystem::Walk(&kernel), args.n, t)?;
    let mut text = String::from("x,probability\n");
    for (x, &p) in marginal.iter().enumerate() {
        text.push_str(&format!("{x},{}\n", csv_float(p)));
    }
    write_output(&global.out, &text)
}
