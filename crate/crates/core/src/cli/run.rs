//! Orchestration behind the subcommands. Every run writes its data files and a
//! `<command>.manifest` into the output directory; the manifest is itself a
//! config file that reproduces the run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error as ThisError;

use super::config::{ConfigError, InitialKind, RunConfig};
use crate::diagnostics::{local_minima, FreeBasis, ObservableSeries};
use crate::error::Error;
use crate::evolution::{initial_state, propagate, time_grid, InitialStateSpec, DISPLAY_UNIT};
use crate::greens::{
    antisymmetric_part, demon_pole_scan, g0_box, g_delta, ContainerGreen, ContainerSpec, DemonBox, PoleReport,
    ScanOptions,
};
use crate::lattice::{
    assemble_hamiltonian, dispersion, dispersion_parabolic_range, eigendecompose, EigenSystem, HamiltonianMatrix,
    LatticeConfig,
};
use crate::potential::ActivationSpec;

/// Residual above which a loaded eigensystem is taken to belong to another
/// Hamiltonian.
const LOADED_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Numerical { context: String, source: Error },
}

impl RunError {
    /// 2 for configuration and file problems, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 2,
            RunError::Numerical {
                source: Error::InvalidParameter(_),
                ..
            } => 2,
            RunError::Numerical { .. } => 3,
        }
    }
}

trait Context<T> {
    fn context(self, what: &str) -> Result<T, RunError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn context(self, what: &str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Numerical {
            context: what.to_string(),
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Poles,
    Sweep,
    Dispersion,
    Greens,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Poles => "poles",
            Command::Sweep => "sweep",
            Command::Dispersion => "dispersion",
            Command::Greens => "greens",
        }
    }
}

/// What a run produced: a human-readable summary and the files written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, RunError> {
    cfg.validate()?;
    match command {
        Command::Evolve => run_evolve(cfg),
        Command::Poles => run_poles(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Dispersion => run_dispersion(cfg),
        Command::Greens => run_greens(cfg),
    }
}

fn initial_spec(kind: InitialKind) -> InitialStateSpec {
    match kind {
        InitialKind::Boltzmann(beta) => InitialStateSpec::Boltzmann { beta },
        InitialKind::Uniform => InitialStateSpec::Uniform,
    }
}

fn lattice_config(cfg: &RunConfig) -> Result<LatticeConfig, RunError> {
    LatticeConfig::new(cfg.half_sites, cfg.upsilon0, cfg.kappa_r, cfg.kappa_d).context("lattice parameters")
}

fn prepare_output(cfg: &RunConfig) -> Result<(), RunError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|source| RunError::Io {
        path: cfg.output_dir.clone(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    files.push(path.to_path_buf());
    Ok(())
}

fn write_manifest(
    cfg: &RunConfig,
    command: Command,
    notes: &[String],
    files: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let mut text = format!(
        "# {} {}\n# command = {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        command.name()
    );
    for note in notes {
        let _ = writeln!(text, "# {note}");
    }
    for f in files.iter() {
        let _ = writeln!(text, "# output = {}", f.display());
    }
    text.push_str(&cfg.to_text());
    let path = cfg.output_dir.join(format!("{}.manifest", command.name()));
    write_file(&path, text.as_bytes(), files)
}

fn load_or_decompose(cfg: &RunConfig, h: &HamiltonianMatrix) -> Result<EigenSystem, RunError> {
    let Some(path) = &cfg.eigensystem_input else {
        return eigendecompose(h).context("eigendecomposition");
    };
    let file = fs::File::open(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    let eig = EigenSystem::read_from(std::io::BufReader::new(file)).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    if eig.dim() != h.dim() {
        return Err(RunError::Numerical {
            context: format!("eigensystem {}", path.display()),
            source: Error::DimensionMismatch {
                expected: h.dim(),
                found: eig.dim(),
            },
        });
    }
    let residual = eig.max_residual(&h.matrix);
    if !(residual < LOADED_RESIDUAL_LIMIT) {
        return Err(RunError::Numerical {
            context: format!("eigensystem {}", path.display()),
            source: Error::Numerical(format!(
                "stored eigenpairs do not diagonalize the configured Hamiltonian (residual {residual:e})"
            )),
        });
    }
    Ok(eig)
}

fn save_eigensystem(cfg: &RunConfig, eig: &EigenSystem, files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    let mut bytes = Vec::new();
    eig.write_to(&mut bytes).map_err(|source| RunError::Io {
        path: cfg.output_dir.join("eigensystem.bin"),
        source,
    })?;
    write_file(&cfg.output_dir.join("eigensystem.bin"), &bytes, files)
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Numerical {
            context: "worker pool".into(),
            source: Error::Numerical(e.to_string()),
        })?;
    Ok(pool.install(job))
}

pub fn run_evolve(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let lattice = lattice_config(cfg)?;
    let taus = time_grid(cfg.tau_max, cfg.tau_steps).context("time grid")?;
    prepare_output(cfg)?;
    let mut files = Vec::new();

    let (series, trace, eig) = with_workers(cfg.workers, || -> Result<_, RunError> {
        let h = assemble_hamiltonian(&lattice);
        let eig = load_or_decompose(cfg, &h)?;
        let psi0 = initial_state(&initial_spec(cfg.beta), cfg.half_sites).context("initial state")?;
        let trace = propagate(&eig, &psi0, &taus).context("propagation")?;
        let basis = FreeBasis::new(cfg.half_sites);
        let series = ObservableSeries::compute(&trace, &h, &basis).context("observables")?;
        Ok((series, trace, eig))
    })??;

    if cfg.write_eigensystem {
        save_eigensystem(cfg, &eig, &mut files)?;
    }
    if cfg.write_observables {
        let mut bytes = Vec::new();
        series.write_csv(&mut bytes).expect("writing to memory");
        write_file(&cfg.output_dir.join("observables.csv"), &bytes, &mut files)?;
    }
    if cfg.write_density {
        let mut bytes = Vec::new();
        trace.write_density_csv(&mut bytes).expect("writing to memory");
        write_file(&cfg.output_dir.join("density.csv"), &bytes, &mut files)?;
    }
    write_manifest(cfg, Command::Evolve, &[], &mut files)?;

    let entropy = series.column(|r| r.entropy);
    let mut summary = format!(
        "sites {}  initial entropy {:.6}\n",
        lattice.dim(),
        entropy.first().copied().unwrap_or(f64::NAN)
    );
    let radius = (entropy.len() / 40).max(1);
    for i in local_minima(&entropy, radius) {
        if entropy[i] < entropy[0] {
            let _ = writeln!(
                summary,
                "entropy minimum {:.6} at display time {:.3}",
                entropy[i],
                taus[i] / DISPLAY_UNIT
            );
        }
    }
    Ok(Outcome { summary, files })
}

/// Entropy series for one initial state on a shared eigensystem.
fn entropy_column(
    eig: &EigenSystem,
    basis: &FreeBasis,
    kind: InitialKind,
    half_sites: usize,
    taus: &[f64],
) -> crate::Result<Vec<f64>> {
    let psi0 = initial_state(&initial_spec(kind), half_sites)?;
    let trace = propagate(eig, &psi0, taus)?;
    (0..trace.len()).map(|t| basis.entropy(&trace.state(t))).collect()
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let lattice = lattice_config(cfg)?;
    let taus = time_grid(cfg.tau_max, cfg.tau_steps).context("time grid")?;
    prepare_output(cfg)?;
    let mut files = Vec::new();

    let results = with_workers(cfg.workers, || -> Result<_, RunError> {
        let h = assemble_hamiltonian(&lattice);
        let eig = load_or_decompose(cfg, &h)?;
        let basis = FreeBasis::new(cfg.half_sites);
        let columns: Vec<crate::Result<Vec<f64>>> = cfg
            .sweep_betas
            .par_iter()
            .map(|&kind| entropy_column(&eig, &basis, kind, cfg.half_sites, &taus))
            .collect();
        Ok((columns, eig))
    })??;
    let (results, eig) = results;
    if cfg.write_eigensystem {
        save_eigensystem(cfg, &eig, &mut files)?;
    }

    let mut notes = Vec::new();
    let mut good: Vec<(String, Vec<f64>)> = Vec::new();
    for (kind, result) in cfg.sweep_betas.iter().zip(results) {
        match result {
            Ok(col) => good.push((kind.label(), col)),
            Err(e) => notes.push(format!("failed beta = {}: {e}", kind.label())),
        }
    }
    if good.is_empty() {
        return Err(RunError::Numerical {
            context: "sweep".into(),
            source: Error::Numerical(notes.join("; ")),
        });
    }
    if !notes.is_empty() {
        notes.insert(0, "partial = true".into());
    }

    let mut text = String::from("tau,display_time");
    for (label, _) in &good {
        let _ = write!(text, ",entropy_beta_{label}");
    }
    text.push('\n');
    for (t, tau) in taus.iter().enumerate() {
        let _ = write!(text, "{:.16e},{:.16e}", tau, tau / DISPLAY_UNIT);
        for (_, col) in &good {
            let _ = write!(text, ",{:.16e}", col[t]);
        }
        text.push('\n');
    }
    write_file(&cfg.output_dir.join("sweep.csv"), text.as_bytes(), &mut files)?;
    write_manifest(cfg, Command::Sweep, &notes, &mut files)?;

    let mut summary = String::new();
    for (label, col) in &good {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(summary, "beta {label}: entropy in [{lo:.6}, {hi:.6}]");
    }
    for note in &notes {
        let _ = writeln!(summary, "{note}");
    }
    Ok(Outcome { summary, files })
}

fn container(cfg: &RunConfig) -> Result<(ContainerSpec, ActivationSpec), RunError> {
    let spec = ContainerSpec::new(cfg.box_length, cfg.hbar, cfg.series_terms).context("container parameters")?;
    let act = ActivationSpec::new(cfg.p_ref, None, cfg.strength).context("activation parameters")?;
    Ok((spec, act))
}

pub fn run_poles(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let (spec, act) = container(cfg)?;
    let opts = ScanOptions {
        bisection_tol: cfg.bisection_tol,
    };
    let report = with_workers(cfg.workers, || demon_pole_scan(cfg.pole_e_lo, cfg.pole_e_hi, &spec, &act, &opts))?
        .context("pole scan")?;
    let text = report.to_text();
    PoleReport::parse_verified(&text).context("pole report self-check")?;

    prepare_output(cfg)?;
    let mut files = Vec::new();
    write_file(&cfg.output_dir.join("poles.txt"), text.as_bytes(), &mut files)?;
    write_manifest(cfg, Command::Poles, &[], &mut files)?;

    let mut summary = format!(
        "{} roots in [{}, {}]\n",
        report.roots.len(),
        cfg.pole_e_lo,
        cfg.pole_e_hi
    );
    if let Some(e) = report.flagged_extra_pole {
        let _ = writeln!(summary, "level {e} excluded: not a root of the denominator");
    }
    Ok(Outcome { summary, files })
}

pub fn run_dispersion(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut summary = String::from("tolerance  kappa_max  kappa_max/pi  kappa_r_inside\n");
    for &tol in &cfg.dispersion_tols {
        let k = dispersion_parabolic_range(tol).context("parabolic range")?;
        let _ = writeln!(
            summary,
            "{tol:<9}  {k:.9}  {:.9}  {}",
            k / std::f64::consts::PI,
            cfg.kappa_r <= k
        );
    }
    let _ = writeln!(
        summary,
        "lattice energy at kappa_r: {:.9} (parabola {:.9})",
        dispersion(cfg.kappa_r),
        0.5 * cfg.kappa_r * cfg.kappa_r
    );
    Ok(Outcome {
        summary,
        files: Vec::new(),
    })
}

/// `n` points evenly spaced strictly inside the box.
fn box_grid(length: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -0.5 * length + length * (i as f64 + 0.5) / n as f64)
        .collect()
}

pub fn run_greens(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let (spec, act) = container(cfg)?;
    let demon = DemonBox::new(&spec, &act, cfg.integrals_mode).context("container integrals")?;
    let base = ContainerGreen { spec };
    let xs = box_grid(cfg.box_length, cfg.greens_points);
    let xp = cfg.greens_xp;

    let mut text = String::from(
        "energy,x,xp,g0_re,g0_im,g_delta_re,g_delta_im,g_p_re,g_p_im,sym_re,sym_im,antisym_re,antisym_im\n",
    );
    let rows = with_workers(cfg.workers, || {
        let mut jobs = Vec::new();
        for &e in &cfg.greens_energies {
            for &x in &xs {
                jobs.push((e, x));
            }
        }
        jobs.par_iter()
            .map(|&(e, x)| -> crate::Result<String> {
                let ec = Complex64::new(e, 0.0);
                let g0 = g0_box(x, xp, e, &spec)?;
                let gd = g_delta(&base, x, xp, ec, cfg.delta_strength)?;
                let parts = antisymmetric_part(|a, b, z: Complex64| demon.eval(a, b, z.re), x, xp, ec)?;
                let gp = demon.eval(x, xp, e)?;
                Ok(format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    e,
                    x,
                    xp,
                    g0.re,
                    g0.im,
                    gd.re,
                    gd.im,
                    gp.re,
                    gp.im,
                    parts.sym.re,
                    parts.sym.im,
                    parts.antisym.re,
                    parts.antisym.im
                ))
            })
            .collect::<crate::Result<Vec<String>>>()
    })?
    .context("green's function grid")?;
    rows.iter().for_each(|r| text.push_str(r));

    prepare_output(cfg)?;
    let mut files = Vec::new();
    write_file(&cfg.output_dir.join("greens.csv"), text.as_bytes(), &mut files)?;
    write_manifest(cfg, Command::Greens, &[], &mut files)?;
    Ok(Outcome {
        summary: format!(
            "{} rows, band a/pi = {:.6}\n",
            rows.len(),
            demon.integrals().band_a() / std::f64::consts::PI
        ),
        files,
    })
}
