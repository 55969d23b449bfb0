//! Observables of a propagated state: entropy in the free-box basis, left and
//! right occupations and energies, interaction energy, and a few
//! thermodynamic bookkeeping helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::io::Write;

use crate::error::{Error, Result};
use crate::evolution::{WaveTrace, DISPLAY_UNIT};
use crate::lattice::{free_box_mode, HamiltonianMatrix};

/// Populations below this are left out of the temperature fit.
pub const FIT_FLOOR: f64 = 1e-12;

/// Side probabilities below this leave the side energy undefined.
pub const SIDE_FLOOR: f64 = 1e-12;

/// Free-box eigenbasis on `2N+1` sites, one mode per column.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBasis {
    half_sites: usize,
    modes: DMatrix<f64>,
}

impl FreeBasis {
    pub fn new(half_sites: usize) -> Self {
        let dim = 2 * half_sites + 1;
        let mut modes = DMatrix::zeros(dim, dim);
        for q in 1..=dim {
            let m = free_box_mode(q, half_sites).expect("mode index in range");
            modes.set_column(q - 1, &m);
        }
        FreeBasis { half_sites, modes }
    }

    pub fn half_sites(&self) -> usize {
        self.half_sites
    }

    pub fn dim(&self) -> usize {
        self.modes.ncols()
    }

    /// `ϱ_q = |⟨mode_q|ψ⟩|²` for `q = 1..=2N+1`.
    pub fn populations(&self, psi: &DVector<Complex64>) -> Result<Vec<f64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        Ok((0..self.dim())
            .map(|q| {
                let col = self.modes.column(q);
                let mut amp = Complex64::new(0.0, 0.0);
                for (c, z) in col.iter().zip(psi.iter()) {
                    amp += z * *c;
                }
                amp.norm_sqr()
            })
            .collect())
    }

    /// `-Σ ϱ ln ϱ` with `0 ln 0 = 0`.
    pub fn entropy(&self, psi: &DVector<Complex64>) -> Result<f64> {
        Ok(self
            .populations(psi)?
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum())
    }
}

pub fn shannon_entropy(psi: &DVector<Complex64>, half_sites: usize) -> Result<f64> {
    FreeBasis::new(half_sites).entropy(psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralObservables {
    pub p_left: f64,
    pub p_right: f64,
    pub e_left: f64,
    pub e_right: f64,
}

/// Occupations and normalized energies of the two halves, with the central
/// site shared equally (amplitude weight `1/√2` in each projector).
pub fn lateral_observables(psi: &DVector<Complex64>, h: &DMatrix<Complex64>) -> Result<LateralObservables> {
    let dim = psi.len();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.nrows(),
        });
    }
    let centre = dim / 2;
    let project = |left: bool| {
        DVector::from_fn(dim, |i, _| {
            if i == centre {
                psi[i] * FRAC_1_SQRT_2
            } else if (i < centre) == left {
                psi[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let side = |left: bool| -> Result<(f64, f64)> {
        let v = project(left);
        let p = v.norm_squared();
        if p < SIDE_FLOOR {
            return Err(Error::Domain(format!(
                "{} side probability {p:e} too small for a side energy",
                if left { "left" } else { "right" }
            )));
        }
        Ok((p, v.dotc(&(h * &v)).re / p))
    };
    let (p_left, e_left) = side(true)?;
    let (p_right, e_right) = side(false)?;
    Ok(LateralObservables {
        p_left,
        p_right,
        e_left,
        e_right,
    })
}

/// `⟨ψ|V|ψ⟩` along the trace with its trapezoidal running mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialWork {
    pub v_avg: f64,
    pub v_timeavg: f64,
}

pub fn potential_work(trace: &WaveTrace, potential: &DMatrix<Complex64>) -> Result<Vec<PotentialWork>> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("empty trace".into()));
    }
    let values: Vec<f64> = (0..trace.len())
        .into_par_iter()
        .map(|t| expectation(&trace.state(t), potential))
        .collect();
    Ok(running_mean(&trace.taus, &values)
        .into_iter()
        .zip(values)
        .map(|(v_timeavg, v_avg)| PotentialWork { v_avg, v_timeavg })
        .collect())
}

fn expectation(psi: &DVector<Complex64>, op: &DMatrix<Complex64>) -> f64 {
    psi.dotc(&(op * psi)).re
}

/// Trapezoidal `(1/τ)∫₀^τ f`, equal to `f(0)` at the first point.
pub fn running_mean(taus: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut integral = 0.0;
    for i in 0..values.len() {
        if i == 0 {
            out.push(values[0]);
            continue;
        }
        integral += 0.5 * (taus[i] - taus[i - 1]) * (values[i] + values[i - 1]);
        let span = taus[i] - taus[0];
        out.push(if span > 0.0 { integral / span } else { values[i] });
    }
    out
}

/// Bound on the demon's entropy change `ΔV/⟨T⟩` and on the total
/// `ΔS_p + ΔV/⟨T⟩`.
pub fn entropy_budget(delta_sp: f64, delta_v: f64, inv_t: f64) -> Result<(f64, f64)> {
    if !(inv_t > 0.0) {
        return Err(Error::InvalidParameter(format!("inverse temperature must be positive, got {inv_t}")));
    }
    let sd = inv_t * delta_v;
    Ok((sd, delta_sp + sd))
}

/// `-(P_R/T_R + P_L/T_L) υ ln 2`
pub fn two_compartment_entropy_drop(
    pressure_r: f64,
    pressure_l: f64,
    temp_r: f64,
    temp_l: f64,
    volume: f64,
) -> Result<f64> {
    if !(temp_r > 0.0 && temp_l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperatures must be positive, got {temp_r} and {temp_l}"
        )));
    }
    if !(volume > 0.0) {
        return Err(Error::InvalidParameter(format!("volume must be positive, got {volume}")));
    }
    Ok(-(pressure_r / temp_r + pressure_l / temp_l) * volume * LN_2)
}

/// Full and quarter revival times `2(2N)²/π` and `(2N)²/(2π)` of the ideal
/// quadratic box spectrum with ground level `π²/(2N)²`.
pub fn revival_estimate(half_sites: usize) -> Result<(f64, f64)> {
    if half_sites < 1 {
        return Err(Error::InvalidParameter("need N >= 1".into()));
    }
    let width = (2 * half_sites) as f64;
    let full = 2.0 * width * width / PI;
    Ok((full, 0.25 * full))
}

/// Fit `ln ϱ_q = -2β(q²-1) + c` over populated modes; populations carry the
/// squared amplitude weight `e^{-β(q²-1)}`.
pub fn effective_beta_fit(psi: &DVector<Complex64>, half_sites: usize) -> Result<f64> {
    effective_beta_with(&FreeBasis::new(half_sites), psi)
}

pub fn effective_beta_with(basis: &FreeBasis, psi: &DVector<Complex64>) -> Result<f64> {
    let pops = basis.populations(psi)?;
    let points: Vec<(f64, f64)> = pops
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > FIT_FLOOR)
        .map(|(i, &p)| {
            let q = (i + 1) as f64;
            (q * q - 1.0, p.ln())
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::Underdetermined {
            usable: points.len(),
            needed: 3,
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Underdetermined {
            usable: 1,
            needed: 3,
        });
    }
    Ok(-0.5 * sxy / sxx)
}

/// One row of the observables table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRow {
    pub tau: f64,
    pub entropy: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub e_left: f64,
    pub e_right: f64,
    pub v_avg: f64,
    pub v_timeavg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub rows: Vec<ObservableRow>,
}

pub const OBSERVABLES_HEADER: &str = "tau,display_time,entropy,p_left,p_right,e_left,e_right,v_avg,v_timeavg";

impl ObservableSeries {
    pub fn compute(trace: &WaveTrace, h: &HamiltonianMatrix, basis: &FreeBasis) -> Result<Self> {
        if basis.dim() != h.dim() || trace.states.ncols() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: trace.states.ncols(),
            });
        }
        let work = potential_work(trace, &h.potential)?;
        let per_time: Vec<Result<(f64, LateralObservables)>> = (0..trace.len())
            .into_par_iter()
            .map(|t| {
                let psi = trace.state(t);
                Ok((basis.entropy(&psi)?, lateral_observables(&psi, &h.matrix)?))
            })
            .collect();
        let mut rows = Vec::with_capacity(trace.len());
        for (t, item) in per_time.into_iter().enumerate() {
            let (entropy, lat) = item?;
            rows.push(ObservableRow {
                tau: trace.taus[t],
                entropy,
                p_left: lat.p_left,
                p_right: lat.p_right,
                e_left: lat.e_left,
                e_right: lat.e_right,
                v_avg: work[t].v_avg,
                v_timeavg: work[t].v_timeavg,
            });
        }
        Ok(ObservableSeries { rows })
    }

    pub fn column(&self, f: impl Fn(&ObservableRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{OBSERVABLES_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.tau,
                r.tau / DISPLAY_UNIT,
                r.entropy, r.p_left, r.p_right, r.e_left, r.e_right, r.v_avg, r.v_timeavg
            )?;
        }
        w.flush()
    }
}

/// Indices of strict interior minima: lower than every other point within
/// `radius` on both sides.
pub fn local_minima(values: &[f64], radius: usize) -> Vec<usize> {
    let n = values.len();
    (1..n.saturating_sub(1))
        .filter(|&i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            (lo..=hi).all(|j| j == i || values[i] < values[j])
        })
        .collect()
}
