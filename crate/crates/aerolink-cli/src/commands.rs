//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use aerolink_core::dispersion;
use aerolink_core::eulerian::{self, GridSolverConfig, SolverBoundary};
use aerolink_core::grid::{masked_rmse, Axis, ConcentrationField, GridSpec};
use aerolink_core::lagrangian::{self, Boundary};
use aerolink_core::medium::{Emission, Point3, Probe, SourceSpec};
use aerolink_core::receiver::{self, Hypotheses, ObservationModel};
use aerolink_core::rng;
use aerolink_core::scenario;

use aerolink_cli::config::{
    self, CompareConfig, DetectConfig, EulerConfig, LagrangianConfig, MediumConfig, NoiseConfig,
    PlumeConfig, PolicyConfig, PuffConfig, RocConfig, RunConfig, ScenarioRun,
};
use aerolink_cli::{output, CliError};

use crate::{
    BoundaryArg, Cli, Command, CompareArgs, DetectArgs, EulerArgs, LagrangianArgs, NoiseArg,
    PlumeArgs, PuffArgs, RocArgs, ScenarioArgs, SolverBoundaryArg,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(&cli);
    match &cli.command {
        Command::Puff(args) => cmd_puff(&cli, args, &out_dir),
        Command::Plume(args) => cmd_plume(&cli, args, &out_dir),
        Command::Lagrangian(args) => cmd_lagrangian(&cli, args, &out_dir),
        Command::Euler(args) => cmd_euler(&cli, args, &out_dir),
        Command::Detect(args) => cmd_detect(&cli, args, &out_dir),
        Command::Roc(args) => cmd_roc(&cli, args, &out_dir),
        Command::Scenario(args) => cmd_scenario(&cli, args, &out_dir),
        Command::Compare(args) => cmd_compare(&cli, args, &out_dir),
    }
}

fn resolve_out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os("AEROLINK_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_seed(explicit: Option<u64>) -> u64 {
    match explicit {
        Some(s) => s,
        None => {
            let now = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or_default();
            let seed = (now.as_nanos() as u64) ^ ((std::process::id() as u64) << 32);
            eprintln!("seed: {seed} (auto-selected; pass --seed to reproduce)");
            seed
        }
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::from)
}

fn dump(config: &RunConfig) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(config)?);
    Ok(())
}

fn parse_plane(plane: &str, height: f64) -> Result<f64, CliError> {
    let rest = plane.strip_prefix("z=").ok_or_else(|| {
        CliError::Config(format!("invalid plane `{plane}`: expected z=H or z=<m>"))
    })?;
    if rest == "H" {
        Ok(height)
    } else {
        rest.parse::<f64>()
            .map_err(|_| CliError::Config(format!("invalid plane height `{rest}`")))
    }
}

fn medium_config(u: f64, k: f64, reflect: bool) -> MediumConfig {
    MediumConfig {
        wind_u: u,
        diffusivity_k: k,
        reflect_ground: reflect,
    }
}

// ---------------------------------------------------------------------------
// puff / plume
// ---------------------------------------------------------------------------

fn cmd_puff(cli: &Cli, args: &PuffArgs, out_dir: &Path) -> Result<(), CliError> {
    if args.times.is_empty() {
        return Err(CliError::Config(
            "at least one snapshot time required".into(),
        ));
    }
    for &t in &args.times {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Config(format!(
                "snapshot time {t} invalid: puff requires t > 0"
            )));
        }
    }
    let plane_z = parse_plane(&args.plane, args.height)?;
    let med_cfg = medium_config(args.u, args.k, args.reflect);
    let med = med_cfg.build()?;
    let t_max = args.times.iter().copied().fold(0.0f64, f64::max);
    let sigma_max = (2.0 * args.k * t_max).sqrt();
    let x_lo = args.x_min.unwrap_or(-6.0 * sigma_max);
    let x_hi = args.x_max.unwrap_or(args.u * t_max + 6.0 * sigma_max);
    let y_lo = args.y_min.unwrap_or(-6.0 * sigma_max);
    let y_hi = args.y_max.unwrap_or(6.0 * sigma_max);

    let cfg = RunConfig::Puff(PuffConfig {
        q: args.q,
        medium: med_cfg,
        height: args.height,
        times: args.times.clone(),
        plane_z,
        x_range: [x_lo, x_hi],
        y_range: [y_lo, y_hi],
        dx: args.dx,
        pgm: args.pgm,
        probe: args.probe.as_ref().map(|p| [p[0], p[1], p[2]]),
        probe_dt: args.probe_dt,
        probe_t_end: args.probe_t_end,
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let src = SourceSpec::impulse_at((0.0, 0.0), args.height, "aerosol", args.q)?;
    let grid = GridSpec::new(
        Axis::covering(x_lo, x_hi, args.dx)?,
        Axis::covering(y_lo, y_hi, args.dx)?,
        Axis::pinned(plane_z, args.dx)?,
    )?;
    for (i, &t) in args.times.iter().enumerate() {
        let field = dispersion::field_snapshot(&src, &med, &grid, t)?;
        let csv = out_dir.join(format!("puff_{i:02}_t{t}s.csv"));
        output::write_field_csv(&csv, &field)?;
        if args.pgm {
            output::write_pgm(&out_dir.join(format!("puff_{i:02}_t{t}s.pgm")), &field, 0)?;
        }
        match field.peak() {
            Some((peak, (px, py, _))) => println!(
                "t={t} s: peak {peak:e} particles/m^3 at x={px} m, y={py} m -> {}",
                csv.display()
            ),
            None => println!("t={t} s: empty grid -> {}", csv.display()),
        }
    }
    if let Some(pos) = &args.probe {
        let probe = Probe::linspace(
            Point3::new(pos[0], pos[1], pos[2]),
            args.probe_dt,
            args.probe_t_end,
            (args.probe_t_end / args.probe_dt).round() as usize,
        )?;
        let series = dispersion::impulse_response(&src, &med, &probe)?;
        let path = out_dir.join("puff_series.csv");
        output::write_series_csv(&path, &series)?;
        let peak_idx = series.argmax().unwrap_or(0);
        println!(
            "probe series: peak {:e} particles/m^3 at t={} s -> {}",
            series.values[peak_idx],
            series.times[peak_idx],
            path.display()
        );
    }
    Ok(())
}

fn cmd_plume(cli: &Cli, args: &PlumeArgs, out_dir: &Path) -> Result<(), CliError> {
    if args.u.is_nan() || args.u <= 0.0 {
        return Err(CliError::Config(
            "plume model requires wind speed u > 0".into(),
        ));
    }
    let plane_z = parse_plane(&args.plane, args.height)?;
    let med_cfg = medium_config(args.u, args.k, args.reflect);
    let med = med_cfg.build()?;
    if args.x_max <= args.dx {
        return Err(CliError::Config(
            "x-max must exceed one cell width (the plume exists only downwind)".into(),
        ));
    }
    let sigma_max = (2.0 * args.k * args.x_max / args.u.max(1e-12)).sqrt();
    let y_lo = args.y_min.unwrap_or(-4.0 * sigma_max);
    let y_hi = args.y_max.unwrap_or(4.0 * sigma_max);

    let cfg = RunConfig::Plume(PlumeConfig {
        qdot: args.qdot,
        medium: med_cfg,
        height: args.height,
        plane_z,
        x_range: [args.dx, args.x_max],
        y_range: [y_lo, y_hi],
        dx: args.dx,
        pgm: args.pgm,
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let src = SourceSpec::new(
        (0.0, 0.0),
        args.height,
        "aerosol",
        Emission::Continuous { qdot: args.qdot },
    )?;
    // Cells start one step downwind of the source; the slender-plume form is
    // undefined at and upwind of x = 0.
    let grid = GridSpec::new(
        Axis::covering(args.dx, args.x_max, args.dx)?,
        Axis::covering(y_lo, y_hi, args.dx)?,
        Axis::pinned(plane_z, args.dx)?,
    )?;
    let field = dispersion::field_snapshot(&src, &med, &grid, 0.0)?;
    let csv = out_dir.join("plume.csv");
    output::write_steady_field_csv(&csv, &field)?;
    if args.pgm {
        output::write_pgm(&out_dir.join("plume.pgm"), &field, 0)?;
    }
    if let Some((peak, (px, py, _))) = field.peak() {
        println!(
            "steady plume: peak {peak:e} particles/m^3 at x={px} m, y={py} m -> {}",
            csv.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lagrangian / euler
// ---------------------------------------------------------------------------

fn boundary_name(b: BoundaryArg) -> &'static str {
    match b {
        BoundaryArg::None => "none",
        BoundaryArg::Reflect => "reflect",
        BoundaryArg::Absorb => "absorb",
    }
}

fn cmd_lagrangian(cli: &Cli, args: &LagrangianArgs, out_dir: &Path) -> Result<(), CliError> {
    let seed = resolve_seed(cli.seed);
    let med_cfg = medium_config(args.u, args.k, false);
    let med = med_cfg.build()?;
    let cfg = RunConfig::Lagrangian(LagrangianConfig {
        q: args.q,
        medium: med_cfg,
        height: args.height,
        n_particles: args.n,
        dt: args.dt,
        t_end: args.t_end,
        boundary: boundary_name(args.boundary).into(),
        bin: args.bin,
        seed,
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let boundary = match args.boundary {
        BoundaryArg::None => Boundary::None,
        BoundaryArg::Reflect => Boundary::ReflectGround,
        BoundaryArg::Absorb => Boundary::AbsorbGround,
    };
    let src = SourceSpec::impulse_at((0.0, 0.0), args.height, "aerosol", args.q)?;
    let ens = lagrangian::simulate(&src, &med, args.n, seed, args.dt, args.t_end, boundary)?;

    // Bin around the transported center, padded to the 6-sigma support.
    let sigma = (2.0 * args.k * args.t_end).sqrt();
    let pad = 6.0 * sigma;
    let cx = args.u * args.t_end;
    let grid = GridSpec::new(
        Axis::covering(cx - pad, cx + pad, args.bin)?,
        Axis::covering(-pad, pad, args.bin)?,
        Axis::covering(args.height - pad, args.height + pad, args.bin)?,
    )?;
    let (field, outside) = lagrangian::bin_concentration(&ens, &grid, args.q)?;
    output::write_field_csv(&out_dir.join("lagrangian_field.csv"), &field)?;

    let analytic = dispersion::field_snapshot(&src, &med, &grid, ens.sim_time)?;
    let (rmse, cells) = masked_rmse(&analytic, &field, 0.01)?;
    let report = vec![
        ("n_particles".to_string(), args.n.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("sim_time_s".to_string(), ens.sim_time.to_string()),
        ("alive".to_string(), ens.alive_count().to_string()),
        ("outside_grid".to_string(), outside.to_string()),
        (
            "analytic_peak_per_m3".to_string(),
            analytic.peak().map(|p| p.0).unwrap_or(0.0).to_string(),
        ),
        (
            "binned_peak_per_m3".to_string(),
            field.peak().map(|p| p.0).unwrap_or(0.0).to_string(),
        ),
        ("rmse_rel_peak".to_string(), rmse.to_string()),
        ("rmse_cells".to_string(), cells.to_string()),
    ];
    output::write_report_csv(&out_dir.join("lagrangian_report.csv"), &report)?;
    println!(
        "lagrangian: N={} t={} s alive={} outside={} rmse(rel peak)={rmse:.4}",
        args.n,
        ens.sim_time,
        ens.alive_count(),
        outside
    );
    Ok(())
}

fn cmd_euler(cli: &Cli, args: &EulerArgs, out_dir: &Path) -> Result<(), CliError> {
    let med_cfg = medium_config(args.u, args.k, false);
    let med = med_cfg.build()?;
    let cfg = RunConfig::Euler(EulerConfig {
        q: args.q,
        medium: med_cfg,
        height: args.height,
        dx: args.dx,
        dt: args.dt,
        t0: args.t0,
        t_end: args.t_end,
        boundary: match args.boundary {
            SolverBoundaryArg::Open => "open",
            SolverBoundaryArg::Reflect => "reflect",
            SolverBoundaryArg::Closed => "closed",
        }
        .into(),
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let boundary = match args.boundary {
        SolverBoundaryArg::Open => SolverBoundary::Open,
        SolverBoundaryArg::Reflect => SolverBoundary::ReflectGround,
        SolverBoundaryArg::Closed => SolverBoundary::Closed,
    };
    let src = SourceSpec::impulse_at((0.0, 0.0), args.height, "aerosol", args.q)?;
    let grid = eulerian::puff_domain(&src, &med, args.t0, args.t_end, args.dx)?;
    let dt = args
        .dt
        .unwrap_or_else(|| eulerian::stable_dt(&med, &grid, 0.9));
    let solver = GridSolverConfig::new(grid, dt, med, boundary)?;
    let initial = dispersion::field_snapshot(&src, &med, &grid, args.t0)?;
    let out = eulerian::solve(&initial, &solver, args.t_end)?;
    output::write_field_csv(&out_dir.join("euler_field.csv"), &out.field)?;

    let analytic = dispersion::field_snapshot(&src, &med, &grid, args.t_end)?;
    let l2 = aerolink_core::grid::l2_relative_error(&out.field, &analytic)?;
    let (rmse, cells) = masked_rmse(&analytic, &out.field, 0.01)?;
    let report = vec![
        ("dx_m".to_string(), args.dx.to_string()),
        ("dt_s".to_string(), dt.to_string()),
        ("steps".to_string(), out.steps.to_string()),
        ("cells".to_string(), grid.cell_count().to_string()),
        ("domain_warning".to_string(), out.domain_warning.to_string()),
        ("l2_rel_error_vs_analytic".to_string(), l2.to_string()),
        ("rmse_rel_peak".to_string(), rmse.to_string()),
        ("rmse_cells".to_string(), cells.to_string()),
    ];
    output::write_report_csv(&out_dir.join("euler_report.csv"), &report)?;
    println!(
        "euler: dx={} dt={dt:.3e} steps={} L2={l2:.4} rmse(rel peak)={rmse:.4}{}",
        args.dx,
        out.steps,
        if out.domain_warning {
            " [domain warning]"
        } else {
            ""
        }
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// detect / roc
// ---------------------------------------------------------------------------

fn noise_config(noise: NoiseArg, sigma: f64) -> NoiseConfig {
    match noise {
        NoiseArg::Poisson => NoiseConfig::Poisson,
        NoiseArg::Gaussian => NoiseConfig::Gaussian { sigma },
    }
}

fn observation_model(noise: NoiseArg, gain: f64, sigma: f64) -> ObservationModel {
    match noise {
        NoiseArg::Poisson => ObservationModel::Poisson,
        NoiseArg::Gaussian => ObservationModel::Gaussian { gain, sigma },
    }
}

fn cmd_detect(cli: &Cli, args: &DetectArgs, out_dir: &Path) -> Result<(), CliError> {
    let policy = match (args.tau, args.target_pfa) {
        (Some(tau), None) => PolicyConfig::Fixed(tau),
        (None, Some(a)) => PolicyConfig::TargetFalseAlarm(a),
        (None, None) => {
            return Err(CliError::Config(
                "one of --tau or --target-pfa is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let seed = args.observation.is_none().then(|| resolve_seed(cli.seed));
    let cfg = RunConfig::Detect(DetectConfig {
        lambda0: args.lambda0,
        lambda1: args.lambda1,
        policy,
        noise: noise_config(args.noise, args.sigma),
        gain: args.gain,
        observation: args.observation,
        seed,
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let hyp = Hypotheses {
        lambda0: args.lambda0,
        lambda1: args.lambda1,
    };
    let model = observation_model(args.noise, args.gain, args.sigma);
    let observed = match args.observation {
        Some(o) => o,
        None => {
            let mut stream = rng::stream(seed.expect("seed resolved above"), 0);
            receiver::sample_count(args.lambda1, &model, &mut stream)?
        }
    };
    let report = receiver::detect(observed, &hyp, policy.to_policy(), &model, 0)?;
    let decision = match report.decision {
        receiver::Decision::Present => "present",
        receiver::Decision::Absent => "absent",
    };
    let json = serde_json::json!({
        "lambda0": args.lambda0,
        "lambda1": args.lambda1,
        "observed": report.observed,
        "threshold": report.threshold,
        "decision": decision,
        "p_fa": report.p_fa,
        "p_md": report.p_md,
    });
    output::write_json(&out_dir.join("detect.json"), &json)?;
    println!(
        "detect: observed={} threshold={} decision={decision} p_fa={:e} p_md={:e}",
        report.observed, report.threshold, report.p_fa, report.p_md
    );
    Ok(())
}

fn cmd_roc(cli: &Cli, args: &RocArgs, out_dir: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::Roc(RocConfig {
        lambda0: args.lambda0,
        lambda1: args.lambda1,
        noise: noise_config(args.noise, args.sigma),
        gain: args.gain,
        taus: args.taus.clone(),
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;
    let hyp = Hypotheses {
        lambda0: args.lambda0,
        lambda1: args.lambda1,
    };
    let model = observation_model(args.noise, args.gain, args.sigma);
    let curve = receiver::roc_curve(&hyp, &model, args.taus.as_deref())?;
    let path = out_dir.join("roc.csv");
    output::write_roc_csv(&path, &curve)?;
    println!("roc: {} thresholds -> {}", curve.len(), path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

fn cmd_scenario(cli: &Cli, args: &ScenarioArgs, out_dir: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut file_cfg: config::ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(off) = args.sync_offset {
        file_cfg.sync_offset = off;
    }
    let seed = resolve_seed(cli.seed.or(file_cfg.seed));
    file_cfg.seed = Some(seed);

    let cfg = RunConfig::Scenario(ScenarioRun {
        scenario: file_cfg.clone(),
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let spec = file_cfg.build(seed)?;
    let result = scenario::run_scenario(&spec)?;

    let bits_string =
        |bits: &[bool]| -> String { bits.iter().map(|&b| if b { '1' } else { '0' }).collect() };
    let json = serde_json::json!({
        "seed": seed,
        "n_windows": result.windows.len(),
        "window_duration_s": result.window_duration,
        "sync_offset_s": result.sync_offset,
        "threshold": result.threshold,
        "lambda1": result.lambda1_used,
        "transmitted": bits_string(&result.transmitted),
        "decoded": bits_string(&result.decoded),
        "bit_errors": result.bit_errors,
        "isi": result.isi.map(|isi| serde_json::json!({
            "tail_fraction": isi.tail_fraction,
            "delay_spread_s": isi.delay_spread,
            "peak_time_s": isi.peak_time,
            "horizon_s": isi.horizon,
            "horizon_warning": isi.horizon_warning,
        })),
    });
    output::write_json(&out_dir.join("scenario_report.json"), &json)?;

    let mut w = String::from(
        "window,t_start_s,t_end_s,lambda,observed,threshold,decision,p_fa,p_md,transmitted_bit,decoded_bit\n",
    );
    for (k, rep) in result.windows.iter().enumerate() {
        let start = result.sync_offset + result.window_duration * k as f64;
        let end = start + result.window_duration;
        let decision = match rep.decision {
            receiver::Decision::Present => "present",
            receiver::Decision::Absent => "absent",
        };
        w.push_str(&format!(
            "{k},{start},{end},{},{},{},{decision},{},{},{},{}\n",
            result.lambdas[k],
            rep.observed,
            rep.threshold,
            rep.p_fa,
            rep.p_md,
            u8::from(result.transmitted[k]),
            u8::from(result.decoded[k]),
        ));
    }
    fs::write(out_dir.join("scenario_windows.csv"), w)?;
    println!(
        "scenario: {} windows, {} bit errors (tx {}, rx {})",
        result.windows.len(),
        result.bit_errors,
        bits_string(&result.transmitted),
        bits_string(&result.decoded),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

/// RMSE between `a` and `b` over cells where `mask_field ≥ fraction · peak`,
/// normalized by the mask field's peak.
fn rmse_over_mask(
    mask_field: &ConcentrationField,
    a: &ConcentrationField,
    b: &ConcentrationField,
    fraction: f64,
) -> Result<(f64, usize), CliError> {
    if mask_field.grid != a.grid || mask_field.grid != b.grid {
        return Err(CliError::Config(
            "comparison fields must share one grid".into(),
        ));
    }
    let peak = mask_field.values.iter().copied().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(CliError::Config("mask field is identically zero".into()));
    }
    let floor = peak * fraction;
    let mut acc = 0.0;
    let mut n = 0usize;
    for ((m, x), y) in mask_field.values.iter().zip(&a.values).zip(&b.values) {
        if *m >= floor {
            acc += (x - y) * (x - y);
            n += 1;
        }
    }
    Ok(((acc / n as f64).sqrt() / peak, n))
}

fn cmd_compare(cli: &Cli, args: &CompareArgs, out_dir: &Path) -> Result<(), CliError> {
    let seed = resolve_seed(cli.seed);
    let med_cfg = medium_config(args.u, args.k, false);
    let med = med_cfg.build()?;
    let cfg = RunConfig::Compare(CompareConfig {
        q: args.q,
        medium: med_cfg,
        height: args.height,
        t0: args.t0,
        t_end: args.t_end,
        n_particles: args.n,
        lagrangian_dt: args.lagrangian_dt,
        euler_dx: args.euler_dx,
        bin: args.bin,
        mask_fraction: args.mask,
        seed,
    });
    if cli.dump_config {
        return dump(&cfg);
    }
    ensure_out_dir(out_dir)?;

    let factor_f = args.bin / args.euler_dx;
    let factor = factor_f.round() as usize;
    if factor == 0 || (factor_f - factor as f64).abs() > 1e-9 {
        return Err(CliError::Config(
            "bin width must be an integer multiple of euler-dx".into(),
        ));
    }

    let src = SourceSpec::impulse_at((0.0, 0.0), args.height, "aerosol", args.q)?;
    // One domain for all three legs: puff support at t_end padded to 6 sigma.
    let sigma = (2.0 * args.k * args.t_end).sqrt();
    let pad = 6.0 * sigma;
    let cx = args.u * args.t_end;
    let bin_grid = GridSpec::new(
        Axis::covering(cx - pad, cx + pad, args.bin)?,
        Axis::covering(-pad, pad, args.bin)?,
        Axis::covering(args.height - pad, args.height + pad, args.bin)?,
    )?;
    let fine_grid = GridSpec::new(
        Axis::new(bin_grid.x.min, args.euler_dx, bin_grid.x.n * factor)?,
        Axis::new(bin_grid.y.min, args.euler_dx, bin_grid.y.n * factor)?,
        Axis::new(bin_grid.z.min, args.euler_dx, bin_grid.z.n * factor)?,
    )?;

    let analytic = dispersion::field_snapshot(&src, &med, &bin_grid, args.t_end)?;

    let ens = lagrangian::simulate(
        &src,
        &med,
        args.n,
        seed,
        args.lagrangian_dt,
        args.t_end,
        Boundary::None,
    )?;
    let (binned, outside) = lagrangian::bin_concentration(&ens, &bin_grid, args.q)?;

    let dt = eulerian::stable_dt(&med, &fine_grid, 0.9);
    let solver = GridSolverConfig::new(fine_grid, dt, med, SolverBoundary::Open)?;
    let initial = dispersion::field_snapshot(&src, &med, &fine_grid, args.t0)?;
    let euler_fine = eulerian::solve(&initial, &solver, args.t_end)?;
    let euler = euler_fine.field.block_average(factor)?;

    let (al, cells) = rmse_over_mask(&analytic, &analytic, &binned, args.mask)?;
    let (ae, _) = rmse_over_mask(&analytic, &analytic, &euler, args.mask)?;
    let (le, _) = rmse_over_mask(&analytic, &binned, &euler, args.mask)?;

    let mut csv = String::from("pair,rmse_rel_peak,cells\n");
    csv.push_str(&format!("analytic_vs_lagrangian,{al},{cells}\n"));
    csv.push_str(&format!("analytic_vs_euler,{ae},{cells}\n"));
    csv.push_str(&format!("lagrangian_vs_euler,{le},{cells}\n"));
    fs::write(out_dir.join("compare.csv"), csv)?;

    println!(
        "compare @ t={} s over {cells} cells (mask {}% of peak, {} particles outside):",
        args.t_end,
        args.mask * 100.0,
        outside
    );
    println!("  analytic vs lagrangian: rmse(rel peak) = {al:.4}");
    println!("  analytic vs euler:      rmse(rel peak) = {ae:.4}");
    println!("  lagrangian vs euler:    rmse(rel peak) = {le:.4}");
    Ok(())
}
