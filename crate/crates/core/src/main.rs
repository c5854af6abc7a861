use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use weyl_abc::config::{parse_config, preset, RunConfig};
use weyl_abc::error::{Error, Result};
use weyl_abc::freq_solver::{run_frequency_method, DtnProvider, ExactDtn, RationalPair};
use weyl_abc::mesh::{gaussian_beam, Mesh, WaveField};
use weyl_abc::mfunction::{m_contour, m_diagnostics, uniform_f_grid, Side};
use weyl_abc::output;
use weyl_abc::potential::Potential;
use weyl_abc::rational::{fit_boundary, RationalDtN};
use weyl_abc::reference::{exact_free, reference_solution, relative_l2_error, relative_l2_error_to, ErrorSeries};
use weyl_abc::time_solver::{run_time_method, BoundaryCondition};

/// Schrödinger solver with m-function absorbing boundary conditions.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named configuration; a --config file takes precedence.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (overrides outputs.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for per-frequency work.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample both boundary m-functions along the fitting contour.
    Mfunc,
    /// Fit pole–residue approximants at both boundaries.
    Fit,
    /// Frequency-domain method with exact boundary m-functions.
    SolveFreq {
        /// Use fitted approximants from a poles.json file instead.
        #[arg(long)]
        poles: Option<PathBuf>,
        /// Skip the error series.
        #[arg(long)]
        no_errors: bool,
    },
    /// Time-domain method with pole–residue boundary conditions.
    SolveTime {
        /// Reuse approximants from a poles.json file instead of fitting.
        #[arg(long)]
        poles: Option<PathBuf>,
        #[arg(long)]
        no_errors: bool,
    },
    /// Large-domain reference solution sampled on the interior mesh.
    Reference,
    /// Relative errors between two directories of snapshots.
    Compare { a: PathBuf, b: PathBuf },
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    csv: bool,
    json: bool,
}

impl Ctx {
    fn write(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.out.join(name), text)?;
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => parse_config(&fs::read_to_string(path)?),
        (None, Some(name)) => preset(name),
        (None, None) => Ok(RunConfig::default()),
    }
}

fn is_free(p: &Potential) -> bool {
    matches!(p, Potential::Constant { v0 } if *v0 == 0.0)
}

fn fit_both(cfg: &RunConfig, mesh: &Mesh) -> Result<(RationalDtN, RationalDtN)> {
    let (l, r) = rayon::join(
        || fit_boundary(&cfg.potential, mesh.x_minus(), Side::Left, &cfg.abc, &cfg.riccati),
        || fit_boundary(&cfg.potential, mesh.x_plus(), Side::Right, &cfg.abc, &cfg.riccati),
    );
    Ok((l?, r?))
}

/// Errors of `snaps` against the closed form (free potential) or a
/// large-domain reference run.
fn error_series(cfg: &RunConfig, mesh: &Mesh, snaps: &[WaveField]) -> Result<ErrorSeries> {
    let mut series = ErrorSeries::default();
    if is_free(&cfg.potential) {
        for s in snaps {
            series.push(s.time, relative_l2_error_to(s, mesh, |x| exact_free(x, s.time))?);
        }
        return Ok(series);
    }
    let times: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let r = reference_solution(&cfg.potential, mesh, gaussian_beam, &cfg.reference, cfg.time.dt, &times)?;
    if !r.trusted {
        log::warn!("reference solution is untrusted");
    }
    for (s, rs) in snaps.iter().zip(&r.snapshots) {
        series.push(s.time, relative_l2_error(s, rs, mesh)?);
    }
    Ok(series)
}

fn write_snapshots(ctx: &Ctx, mesh: &Mesh, snaps: &[WaveField], comment: &str) -> Result<()> {
    if ctx.csv {
        for s in snaps {
            ctx.write(&output::snapshot_file_name(s.time), &output::snapshot_csv(s, mesh, comment)?)?;
        }
    }
    Ok(())
}

fn write_errors(ctx: &Ctx, series: &ErrorSeries) -> Result<()> {
    if ctx.csv {
        ctx.write("errors.csv", &series.to_csv())?;
    }
    Ok(())
}

fn cmd_mfunc(ctx: &Ctx, mesh: &Mesh) -> Result<String> {
    let cfg = &ctx.cfg;
    let f = uniform_f_grid(cfg.abc.f_cutoff, cfg.abc.contour_points);
    let mut samples = Vec::new();
    let mut violations = 0;
    for (side, x) in [(Side::Left, mesh.x_minus()), (Side::Right, mesh.x_plus())] {
        let s = m_contour(&cfg.potential, x, side, cfg.abc.contour_sigma, &f, &cfg.riccati)?;
        violations += m_diagnostics(&s, None).herglotz_violations;
        samples.extend(s);
    }
    if ctx.csv {
        ctx.write("mfunc.csv", &output::mfunc_csv(&samples))?;
    }
    Ok(format!("samples={} herglotz_violations={violations}", samples.len()))
}

fn cmd_fit(ctx: &Ctx, mesh: &Mesh) -> Result<String> {
    let (l, r) = fit_both(&ctx.cfg, mesh)?;
    if ctx.json {
        ctx.write("poles.json", &output::poles_json(&[&l, &r])?)?;
    }
    Ok(format!(
        "poles={}/{} eps={:.3e}/{:.3e} converged={}",
        l.degree,
        r.degree,
        l.fit_error,
        r.fit_error,
        l.converged && r.converged
    ))
}

fn cmd_solve_freq(ctx: &Ctx, mesh: &Mesh, poles: Option<&Path>, no_errors: bool) -> Result<String> {
    let cfg = &ctx.cfg;
    let fcfg = cfg.freq_resolved();
    let u0 = WaveField::from_fn(mesh, 0.0, gaussian_beam);
    let exact;
    let pair;
    let (dtn, label): (&dyn DtnProvider, String) = match poles {
        Some(p) => {
            let (left, right) = output::read_poles_json(&fs::read_to_string(p)?)?;
            let label = format!("poles={}/{}", left.degree, right.degree);
            pair = RationalPair { left, right };
            (&pair, label)
        }
        None => {
            exact = ExactDtn::new(&cfg.potential, mesh, &cfg.riccati)?;
            (&exact, "poles=exact".into())
        }
    };
    let run = run_frequency_method(&fcfg, mesh, &cfg.potential, &u0, dtn)?;
    let comment = format!(
        "method=frequency sigma={} f_cutoff={} n_quad={}",
        output::num(run.sigma),
        output::num(fcfg.f_cutoff),
        fcfg.n_quad
    );
    write_snapshots(ctx, mesh, &run.snapshots, &comment)?;
    let mut summary = label;
    if !run.failed_frequencies.is_empty() {
        summary.push_str(&format!(" skipped_frequencies={}", run.failed_frequencies.len()));
    }
    if !no_errors {
        let series = error_series(cfg, mesh, &run.snapshots)?;
        write_errors(ctx, &series)?;
        print!("{}", output::error_table(&series));
        summary = format!("max_rel_l2={:.3e} {summary}", series.max());
    }
    Ok(summary)
}

fn cmd_solve_time(ctx: &Ctx, mesh: &Mesh, poles: Option<&Path>, no_errors: bool) -> Result<String> {
    let cfg = &ctx.cfg;
    let (l, r) = match poles {
        Some(p) => output::read_poles_json(&fs::read_to_string(p)?)?,
        None => fit_both(cfg, mesh)?,
    };
    if ctx.json {
        ctx.write("poles.json", &output::poles_json(&[&l, &r])?)?;
    }
    let label = format!("poles={}/{}", l.degree, r.degree);
    let u0 = WaveField::from_fn(mesh, 0.0, gaussian_beam);
    let run = run_time_method(
        &cfg.time,
        mesh,
        &cfg.potential,
        &u0,
        BoundaryCondition::Absorbing(l),
        BoundaryCondition::Absorbing(r),
    )?;
    let comment = format!("method=time dt={}", output::num(cfg.time.dt));
    write_snapshots(ctx, mesh, &run.snapshots, &comment)?;
    if ctx.csv {
        ctx.write("boundary.csv", &output::boundary_csv(&run.boundary_trace))?;
    }
    let mut summary = format!("{label} max_norm_ratio={:.6}", run.max_norm_ratio);
    if !no_errors {
        let snaps: Vec<WaveField> = run.snapshots.iter().filter(|s| s.time > 0.0).cloned().collect();
        let series = error_series(cfg, mesh, &snaps)?;
        write_errors(ctx, &series)?;
        print!("{}", output::error_table(&series));
        summary = format!("max_rel_l2={:.3e} {summary}", series.max());
    }
    Ok(summary)
}

fn cmd_reference(ctx: &Ctx, mesh: &Mesh) -> Result<String> {
    let cfg = &ctx.cfg;
    let r = reference_solution(
        &cfg.potential,
        mesh,
        gaussian_beam,
        &cfg.reference,
        cfg.time.dt,
        &cfg.time.snapshot_times,
    )?;
    let comment = format!(
        "method=reference half_width={} dt={}",
        output::num(cfg.reference.half_width),
        output::num(cfg.time.dt)
    );
    write_snapshots(ctx, mesh, &r.snapshots, &comment)?;
    Ok(format!(
        "trusted={} containment={:.3e} norm_drift={:.3e}",
        r.trusted, r.containment_max, r.norm_drift
    ))
}

fn read_snapshot_dir(dir: &Path) -> Result<Vec<(f64, Vec<f64>, Vec<weyl_abc::special::C64>)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("u_t") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    files.iter().map(|p| output::read_snapshot_csv(&fs::read_to_string(p)?)).collect()
}

fn cmd_compare(ctx: &Ctx, mesh: &Mesh, a: &Path, b: &Path) -> Result<String> {
    let sa = read_snapshot_dir(a)?;
    let sb = read_snapshot_dir(b)?;
    let mut series = ErrorSeries::default();
    for (t, xa, ua) in &sa {
        let Some((_, xb, ub)) = sb.iter().find(|(tb, _, _)| (tb - t).abs() <= 1e-12 * t.abs().max(1.0)) else {
            log::warn!("no snapshot at t = {t} in {}", b.display());
            continue;
        };
        if xa.as_slice() != mesh.nodes() || xb.as_slice() != mesh.nodes() {
            return Err(Error::Domain(format!("snapshots at t = {t} do not match the configured mesh")));
        }
        let fa = WaveField::new(*t, ua.clone());
        let fb = WaveField::new(*t, ub.clone());
        series.push(*t, relative_l2_error(&fa, &fb, mesh)?);
    }
    if series.is_empty() {
        return Err(Error::Domain("no matching snapshot times".into()));
    }
    write_errors(ctx, &series)?;
    print!("{}", output::error_table(&series));
    Ok(format!("max_rel_l2={:.3e} times={}", series.max(), series.len()))
}

fn run(cli: &Cli) -> Result<String> {
    let mut cfg = load_config(cli)?;
    if let Some(out) = &cli.out {
        cfg.outputs.directory = out.to_string_lossy().into_owned();
    }
    let threads = cli.threads.max(1);
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let out = PathBuf::from(&cfg.outputs.directory);
    fs::create_dir_all(&out)?;
    let ctx = Ctx {
        csv: cfg.outputs.formats.iter().any(|f| f == "csv"),
        json: cfg.outputs.formats.iter().any(|f| f == "json"),
        cfg,
        out,
    };
    let mesh = ctx.cfg.build_mesh()?;
    match &cli.command {
        Command::Mfunc => cmd_mfunc(&ctx, &mesh),
        Command::Fit => cmd_fit(&ctx, &mesh),
        Command::SolveFreq { poles, no_errors } => cmd_solve_freq(&ctx, &mesh, poles.as_deref(), *no_errors),
        Command::SolveTime { poles, no_errors } => cmd_solve_time(&ctx, &mesh, poles.as_deref(), *no_errors),
        Command::Reference => cmd_reference(&ctx, &mesh),
        Command::Compare { a, b } => cmd_compare(&ctx, &mesh, a, b),
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Mfunc => "mfunc",
        Command::Fit => "fit",
        Command::SolveFreq { .. } => "solve-freq",
        Command::SolveTime { .. } => "solve-time",
        Command::Reference => "reference",
        Command::Compare { .. } => "compare",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(summary) => {
            println!("{}: {summary} wall={:.2}s", name(&cli.command), start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = serde_json::json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
