//! Initial states and spectral propagation `ψ(τ) = Σ_m e^{-iτΞ_m} ⟨ν_m|ψ₀⟩ ν_m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lattice::EigenSystem;

/// One display unit on the figure axes is this many rescaled time units.
pub const DISPLAY_UNIT: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateSpec {
    /// `Σ_q e^{-β(q²-1)} sin(qπ(n+N+1)/(2N+2))` over all `2N+1` modes.
    Boltzmann { beta: f64 },
    /// Equal amplitude on every site.
    Uniform,
    Explicit(DVector<Complex64>),
}

/// Build and normalize the initial state on `2N+1` sites.
pub fn initial_state(spec: &InitialStateSpec, half_sites: usize) -> Result<DVector<Complex64>> {
    let dim = 2 * half_sites + 1;
    let raw = match spec {
        InitialStateSpec::Boltzmann { beta } => {
            if !(beta.is_finite() && *beta >= 0.0) {
                return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
            }
            let denom = (dim + 1) as f64;
            let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
            // smallest weights first
            for q in (1..=dim).rev() {
                let qf = q as f64;
                let w = (-beta * (qf * qf - 1.0)).exp();
                if w == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    v[i] += w * (qf * PI * (i + 1) as f64 / denom).sin();
                }
            }
            v
        }
        InitialStateSpec::Uniform => DVector::from_element(dim, Complex64::new(1.0, 0.0)),
        InitialStateSpec::Explicit(v) => {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            v.clone()
        }
    };
    let norm = raw.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter("initial state has zero or non-finite norm".into()));
    }
    Ok(raw / Complex64::new(norm, 0.0))
}

/// States on a time grid, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveTrace {
    pub taus: Vec<f64>,
    pub states: DMatrix<Complex64>,
}

impl WaveTrace {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn state(&self, t: usize) -> DVector<Complex64> {
        self.states.row(t).transpose()
    }

    /// `|ψ(n,τ)|²` as CSV: `tau,display_time` then one column per site.
    pub fn write_density_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.states.ncols();
        let half = (dim / 2) as i64;
        let mut header = String::from("tau,display_time");
        for n in -half..=half {
            header.push_str(&format!(",n{n}"));
        }
        writeln!(w, "{header}")?;
        for (t, tau) in self.taus.iter().enumerate() {
            let mut line = format!("{tau:.16e},{:.16e}", tau / DISPLAY_UNIT);
            for i in 0..dim {
                line.push_str(&format!(",{:.16e}", self.states[(t, i)].norm_sqr()));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    }
}

/// Uniform grid of `steps` points on `[0, tau_max]`.
pub fn time_grid(tau_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 1 || !(tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time grid needs steps >= 1 and finite tau_max >= 0, got {steps}, {tau_max}"
        )));
    }
    if steps == 1 {
        return Ok(vec![0.0]);
    }
    let h = tau_max / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i == steps - 1 { tau_max } else { i as f64 * h }).collect())
}

/// Spectral propagator for a fixed initial state.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    eig: &'a EigenSystem,
    overlaps: DVector<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(eig: &'a EigenSystem, psi0: &DVector<Complex64>) -> Result<Self> {
        if psi0.len() != eig.dim() {
            return Err(Error::DimensionMismatch {
                expected: eig.dim(),
                found: psi0.len(),
            });
        }
        Ok(Propagator {
            eig,
            overlaps: eig.vectors.adjoint() * psi0,
        })
    }

    pub fn at(&self, tau: f64) -> DVector<Complex64> {
        let phased = DVector::from_fn(self.overlaps.len(), |m, _| {
            self.overlaps[m] * Complex64::from_polar(1.0, -tau * self.eig.values[m])
        });
        &self.eig.vectors * phased
    }
}

/// Propagate `psi0` to every time in `taus`, in parallel over times.
pub fn propagate(eig: &EigenSystem, psi0: &DVector<Complex64>, taus: &[f64]) -> Result<WaveTrace> {
    let prop = Propagator::new(eig, psi0)?;
    let rows: Vec<DVector<Complex64>> = taus.par_iter().map(|&tau| prop.at(tau)).collect();
    let dim = eig.dim();
    let states = DMatrix::from_fn(taus.len(), dim, |t, i| rows[t][i]);
    Ok(WaveTrace {
        taus: taus.to_vec(),
        states,
    })
}

/// Largest site-density difference between evolving forward and backward
/// by `tau`. For a real Hamiltonian and a real initial state the two are
/// complex conjugates and the witness vanishes.
pub fn time_reversal_witness(eig: &EigenSystem, psi0: &DVector<Complex64>, tau: f64) -> Result<f64> {
    let prop = Propagator::new(eig, psi0)?;
    let fwd = prop.at(tau);
    let bwd = prop.at(-tau);
    Ok(fwd
        .iter()
        .zip(bwd.iter())
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .fold(0.0, f64::max))
}
