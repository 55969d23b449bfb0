//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line straight to
//! stdout (visible without `--nocapture`) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use demon_core::diagnostics::{local_minima, revival_estimate, FreeBasis, ObservableSeries};
use demon_core::evolution::{initial_state, propagate, time_grid, InitialStateSpec, DISPLAY_UNIT};
use demon_core::greens::{
    adjoint_symmetry_check, demon_pole_scan, g0_box, g0_origin_closed, g_delta, g_p_general, ContainerIntegrals,
    ContainerSpec, IntegralMode, ScanOptions,
};
use demon_core::greens::poles::Denominator;
use demon_core::lattice::{
    assemble_hamiltonian, eigendecompose, free_box_energy, free_chain, interaction_row, resolvent, LatticeConfig,
    LatticeGreen,
};
use demon_core::potential::ActivationSpec;

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn report(id: &str, pass: bool, detail: &str) -> bool {
    let line = format!("\n{id} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    // bypass the harness capture so the line shows on every run
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    pass
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Two deepest local minima (window `radius`) as display times, sorted.
fn deepest_two(values: &[f64], taus: &[f64], radius: usize) -> Vec<f64> {
    let mut mins = local_minima(values, radius);
    mins.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut times: Vec<f64> = mins.iter().take(2).map(|&i| taus[i] / DISPLAY_UNIT).collect();
    times.sort_by(f64::total_cmp);
    times
}

const MINIMA_RADIUS: usize = 50;

struct Evolution {
    taus: Vec<f64>,
    series: ObservableSeries,
    elapsed: Duration,
}

fn evolve(config: &LatticeConfig, initial: InitialStateSpec) -> Evolution {
    let start = Instant::now();
    let h = assemble_hamiltonian(config);
    let eig = eigendecompose(&h).unwrap();
    let psi0 = initial_state(&initial, config.half_sites()).unwrap();
    let taus = time_grid(20_000.0, 2001).unwrap();
    let trace = propagate(&eig, &psi0, &taus).unwrap();
    let series = ObservableSeries::compute(&trace, &h, &FreeBasis::new(config.half_sites())).unwrap();
    Evolution {
        taus,
        series,
        elapsed: start.elapsed(),
    }
}

#[test]
fn ac01_rank_two_resolvent() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac01);
    let mut worst: f64 = 0.0;
    let mut dims = Vec::new();
    for _ in 0..20 {
        let half = rng.gen_range(4..=63usize);
        let config = LatticeConfig::new(half, 0.1, PI / 4.0, PI / 2.0).unwrap();
        let n = half as i64;
        let (x, xp) = (rng.gen_range(-n..=n), rng.gen_range(-n..=n));
        let e = Complex64::new(rng.gen_range(-0.5..4.5), rng.gen_range(0.01..0.5));
        let g0 = LatticeGreen::new(free_chain(config.dim())).unwrap();
        let quad = g0.sites();
        let got = g_p_general(&g0, |m| Ok(interaction_row(&config, m)), x, xp, e, &quad).unwrap();
        let dense = resolvent(&assemble_hamiltonian(&config).matrix, e).unwrap();
        let want = dense[(config.index(x).unwrap(), config.index(xp).unwrap())];
        worst = worst.max(rel_err(got, want));
        dims.push(config.dim());
    }
    let t = secs(start.elapsed());
    let pass = worst < 1e-9 && t < 5.0;
    let detail = format!(
        "max rel err {worst:.2e} over 20 samples, sites {}..{}, {t:.2}s",
        dims.iter().min().unwrap(),
        dims.iter().max().unwrap()
    );
    assert!(report("AC1", pass, &detail), "{detail}");
}

#[test]
fn ac02_delta_potential() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac02);
    let half = 16usize;
    let dim = 2 * half + 1;
    let g0 = LatticeGreen::new(free_chain(dim)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let strength = rng.gen_range(-2.0..2.0);
        let n = half as i64;
        let (x, xp) = (rng.gen_range(-n..=n), rng.gen_range(-n..=n));
        let e = Complex64::new(rng.gen_range(-0.5..4.5), rng.gen_range(0.01..0.5));
        let got = g_delta(&g0, x, xp, e, strength).unwrap();
        let mut h = free_chain(dim);
        h[(half, half)] += strength;
        let want = resolvent(&h, e).unwrap()[((x + n) as usize, (xp + n) as usize)];
        worst = worst.max(rel_err(got, want));
    }
    let t = secs(start.elapsed());
    let pass = worst < 1e-10 && t < 1.0;
    let detail = format!("max rel err {worst:.2e} on 33 sites, {t:.3}s");
    assert!(report("AC2", pass, &detail), "{detail}");
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, real: bool) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(n, n, C0);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
        for j in 0..i {
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            let z = Complex64::new(rng.gen_range(-1.0..1.0), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

#[test]
fn ac03_adjoint_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac03);
    let (mut adjoint, mut symmetry): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let n = rng.gen_range(3..40);
        let e = rng.gen_range(-3.0..3.0);
        let complex = adjoint_symmetry_check(&random_hermitian(&mut rng, n, false), e, 1e-2).unwrap();
        adjoint = adjoint.max(complex.adjoint_defect);
        let real = adjoint_symmetry_check(&random_hermitian(&mut rng, n, true), e, 1e-2).unwrap();
        adjoint = adjoint.max(real.adjoint_defect);
        symmetry = symmetry.max(real.symmetry_defect.expect("real matrix"));
    }
    let demon = assemble_hamiltonian(&LatticeConfig::reference());
    let asym = adjoint_symmetry_check(&demon.matrix, 0.5, 1e-2).unwrap().asymmetry_frobenius;
    let pass = adjoint < 1e-10 && symmetry < 1e-10 && asym > 1e-3;
    let detail = format!(
        "50 matrices: adjoint defect {adjoint:.2e}, real symmetry defect {symmetry:.2e}; demon asymmetry {asym:.3e}"
    );
    assert!(report("AC3", pass, &detail), "{detail}");
}

#[test]
fn ac04_hermiticity_and_spectrum() {
    let reference = assemble_hamiltonian(&LatticeConfig::reference());
    let herm = reference.hermiticity_defect();
    let free_config = LatticeConfig::reference().with_upsilon0(0.0).unwrap();
    let eig = eigendecompose(&assemble_hamiltonian(&free_config)).unwrap();
    let half = free_config.half_sites();
    let spectrum: f64 = (0..eig.values.len())
        .map(|i| (eig.values[i] - free_box_energy(i + 1, half)).abs())
        .fold(0.0, f64::max);
    let pass = reference.dim() == 249 && herm < 1e-14 && spectrum < 1e-10;
    let detail = format!(
        "{} sites, hermiticity defect {herm:.2e}, free spectrum error {spectrum:.2e}",
        reference.dim()
    );
    assert!(report("AC4", pass, &detail), "{detail}");
}

#[test]
fn ac05_closed_form_consistency() {
    let spec = ContainerSpec::new(PI, 1.0, 10_000).unwrap();
    let mut series_err: f64 = 0.0;
    for e in [0.05, 0.7, 1.3, 3.3, 7.0, 13.0, 25.0] {
        let series = g0_box(0.0, 0.0, e, &spec).unwrap();
        let closed = g0_origin_closed(e, &spec).unwrap();
        series_err = series_err.max((series.re - closed).abs() / closed.abs().max(1.0) + series.im.abs());
    }

    // a/π = 2.3; probe midway between consecutive even resonances
    let act = ActivationSpec::new(4.6, None, 1.0).unwrap();
    let exact = ContainerIntegrals::new(&spec, &act, IntegralMode::Exact).unwrap();
    let approx = ContainerIntegrals::new(&spec, &act, IntegralMode::Approx).unwrap();
    let mut midway = Vec::new();
    for j in 1..=4 {
        let e = 0.5 * (spec.energy(2 * j) + spec.energy(2 * j + 2));
        let qe = exact.q1(e).unwrap();
        let qa = approx.q1(e).unwrap();
        midway.push((e, rel_err(qa, qe)));
    }
    let at13 = midway.iter().find(|(e, _)| (*e - 13.0).abs() < 1e-9).unwrap().1;
    let worst = midway.iter().map(|m| m.1).fold(0.0, f64::max);
    let pass = series_err < 1e-6 && at13 < 0.05;
    let detail = format!(
        "series vs closed form {series_err:.2e} (M=1e4); approx Q1 deviation {:.1}% at E=13, worst midway {:.1}%",
        100.0 * at13,
        100.0 * worst
    );
    assert!(report("AC5", pass, &detail), "{detail}");
}

#[test]
fn ac06_revival_time() {
    let (_, quarter) = revival_estimate(124).unwrap();
    let formula = 248.0_f64.powi(2) / (2.0 * PI);
    let observed = 10e3;
    let dev = (quarter - observed).abs() / observed;
    let pass = (quarter - formula).abs() < 1e-9 * formula && dev < 0.05;
    let detail = format!("quarter revival {quarter:.2}, {:.1}% from 10e3", 100.0 * dev);
    assert!(report("AC6", pass, &detail), "{detail}");
}

#[test]
fn ac07_entropy_dips() {
    let run = evolve(&LatticeConfig::reference(), InitialStateSpec::Boltzmann { beta: 0.01 });
    let entropy = run.series.column(|r| r.entropy);
    let (_, quarter) = revival_estimate(124).unwrap();
    let early = local_minima(&entropy, MINIMA_RADIUS)
        .into_iter()
        .filter(|&i| run.taus[i] <= quarter && entropy[i] < entropy[0])
        .count();
    let deepest = deepest_two(&entropy, &run.taus, MINIMA_RADIUS);
    let t = secs(run.elapsed);
    let pass = early >= 2
        && deepest.len() == 2
        && (deepest[0] - 2.0).abs() <= 1.0
        && (deepest[1] - 12.0).abs() <= 2.0
        && t < 30.0;
    let detail = format!(
        "{early} minima below initial entropy {:.4} within quarter revival; deepest at display times {deepest:.2?}; {t:.1}s",
        entropy[0]
    );
    assert!(report("AC7", pass, &detail), "{detail}");
}

#[test]
fn ac08_lateral_and_work() {
    let run = evolve(&LatticeConfig::reference(), InitialStateSpec::Boltzmann { beta: 0.01 });
    let diff: Vec<f64> = run.series.rows.iter().map(|r| r.p_right - r.p_left).collect();
    // the start is lopsided by construction; look after the first crossing
    let crossing = diff.iter().position(|d| d.signum() != diff[0].signum()).unwrap_or(diff.len());
    let peak = (crossing..diff.len()).max_by(|&a, &b| diff[a].abs().total_cmp(&diff[b].abs()));
    let v = run.series.column(|r| r.v_avg);
    let vmin = (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let peak_time = peak.map(|i| run.taus[i] / DISPLAY_UNIT).unwrap_or(f64::NAN);
    let vmin_time = run.taus[vmin] / DISPLAY_UNIT;
    let pass = (peak_time - 8.5).abs() <= 1.5 && v[vmin] < 0.0 && (vmin_time - 9.0).abs() <= 1.5;
    let detail = format!(
        "|p_right - p_left| peak at display time {peak_time:.2}; v_avg minimum {:.3e} at display time {vmin_time:.2}",
        v[vmin]
    );
    assert!(report("AC8", pass, &detail), "{detail}");
}

#[test]
fn ac09_uniform_entropy_dips() {
    let run = evolve(&LatticeConfig::reference(), InitialStateSpec::Uniform);
    let entropy = run.series.column(|r| r.entropy);
    let deepest = deepest_two(&entropy, &run.taus, MINIMA_RADIUS);
    let pass = deepest.len() == 2 && (deepest[0] - 8.0).abs() <= 1.5 && (deepest[1] - 16.0).abs() <= 2.0;
    let detail = format!("deepest entropy minima at display times {deepest:.2?}");
    assert!(report("AC9", pass, &detail), "{detail}");
}

#[test]
fn ac10_free_evolution_controls() {
    let free = LatticeConfig::reference().with_upsilon0(0.0).unwrap();
    let boltzmann = evolve(&free, InitialStateSpec::Boltzmann { beta: 0.01 });
    let s = boltzmann.series.column(|r| r.entropy);
    let drift = s.iter().map(|x| (x - s[0]).abs()).fold(0.0, f64::max);
    let work = boltzmann.series.column(|r| r.v_avg.abs()).into_iter().fold(0.0, f64::max);
    let uniform = evolve(&free, InitialStateSpec::Uniform);
    let parity = uniform
        .series
        .rows
        .iter()
        .map(|r| (r.p_left - r.p_right).abs())
        .fold(0.0, f64::max);
    let pass = drift < 1e-10 && parity < 1e-10 && work == 0.0;
    let detail = format!("entropy drift {drift:.2e}, parity-even side imbalance {parity:.2e}, max |v_avg| {work:.1e}");
    assert!(report("AC10", pass, &detail), "{detail}");
}

#[test]
fn ac11_pole_scan() {
    let spec = ContainerSpec::new(PI, 1.0, 4096).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for strength in [0.5, 1.0, 3.0] {
        let act = ActivationSpec::new(4.6, None, strength).unwrap();
        let d = Denominator::new(&spec, &act).unwrap();
        let fine = ScanOptions { bisection_tol: 1e-12 };
        let finer = ScanOptions { bisection_tol: 5e-13 };
        let a = demon_pole_scan(0.1, 60.0, &spec, &act, &fine).unwrap();
        let b = demon_pole_scan(0.1, 60.0, &spec, &act, &finer).unwrap();
        let residual = a.roots.iter().map(|r| d.eval(r.energy).abs()).fold(0.0, f64::max);
        let extra = spec.energy(4);
        let hits_extra = a.roots.iter().any(|r| (r.energy - extra).abs() < 1e-6);
        let stable = a.roots.len() == b.roots.len()
            && a.roots.iter().zip(&b.roots).all(|(x, y)| (x.energy - y.energy).abs() <= 1e-8);
        pass &= residual < 1e-10 && !hits_extra && stable && a.flagged_extra_pole == Some(extra);
        lines.push(format!(
            "strength {strength}: {} roots, max |D| {residual:.1e}, stable {stable}",
            a.roots.len()
        ));
    }
    let detail = format!("E=8 never reported; {}", lines.join("; "));
    assert!(report("AC11", pass, &detail), "{detail}");
}
