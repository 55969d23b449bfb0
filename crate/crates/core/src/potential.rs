//! Momentum-space activation function of the sorting interaction, its
//! position-space Fourier kernel and the lattice kernel.
//!
//! The activation function is the indicator of the two bands
//! `(0, P_R)` (slow right-movers) and `(-P_UV, -P_R)` (fast left-movers).
//! Band edges take the value 1/2.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reference momentum, ultraviolet cutoff and strength of the interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSpec {
    p_ref: f64,
    p_uv: Option<f64>,
    strength: f64,
}

impl ActivationSpec {
    /// `p_uv = None` means no ultraviolet cutoff.
    pub fn new(p_ref: f64, p_uv: Option<f64>, strength: f64) -> Result<Self> {
        if !(p_ref.is_finite() && p_ref > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference momentum must be finite and positive, got {p_ref}"
            )));
        }
        if let Some(uv) = p_uv {
            if !(uv.is_finite() && uv > p_ref) {
                return Err(Error::InvalidParameter(format!(
                    "UV cutoff must be finite and exceed the reference momentum {p_ref}, got {uv}"
                )));
            }
        }
        if !strength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "strength must be finite, got {strength}"
            )));
        }
        Ok(ActivationSpec {
            p_ref,
            p_uv,
            strength,
        })
    }

    pub fn p_ref(&self) -> f64 {
        self.p_ref
    }

    pub fn p_uv(&self) -> Option<f64> {
        self.p_uv
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn with_strength(self, strength: f64) -> Result<Self> {
        Self::new(self.p_ref, self.p_uv, strength)
    }
}

/// Heaviside step with the half-maximum convention at the origin.
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Value of the activation function `f_-(|p|) sgn(p) + f_+(|p|)`.
///
/// Returns 1 inside `(0, P_R)` and `(-P_UV, -P_R)`, 0 outside and 1/2 on
/// the band edges.
pub fn activation_value(p: f64, spec: &ActivationSpec) -> f64 {
    let ap = p.abs();
    let below = step(spec.p_ref - ap);
    let above = step(ap - spec.p_ref);
    let cut = spec.p_uv.map_or(0.0, |uv| step(ap - uv));
    let f_plus = 0.5 * (below + above - cut);
    let f_minus = 0.5 * (below - above + cut);
    f_minus * sign(p) + f_plus
}

/// Fourier kernel `(1/2π) ∫ dp e^{-ipy} V_act(p)`.
///
/// Without a UV cutoff the integral is regularized by `y -> y + i0`, which
/// drops the `e^{i P_UV y}` term of the finite-cutoff form.
pub fn fourier_value(y: f64, spec: &ActivationSpec) -> Result<Complex64> {
    if y == 0.0 || !y.is_finite() {
        return Err(Error::Domain(format!(
            "Fourier kernel is singular at y = 0 (got y = {y})"
        )));
    }
    let mut numer = Complex64::new(1.0 - 2.0 * (spec.p_ref * y).cos(), 0.0);
    if let Some(uv) = spec.p_uv {
        numer += Complex64::from_polar(1.0, uv * y);
    }
    Ok(numer / Complex64::new(0.0, 2.0 * PI * y))
}

/// Lattice kernel `w(n) = (2 cos κ_R n - 1 - e^{-iκ_D n}) / (2iπn)`, with
/// the continuous limit `w(0) = κ_D / 2π`.
///
/// `w(n)` is the Fourier kernel evaluated at `-n` with the Brillouin-zone
/// bands `[0, κ_R]` and `[-κ_D, -κ_R]`. Being the transform of a real
/// function it obeys `w(-n) = conj(w(n))`.
pub fn lattice_kernel(n: i64, kappa_r: f64, kappa_d: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(kappa_d / (2.0 * PI), 0.0);
    }
    let nf = n as f64;
    let numer = Complex64::new(2.0 * (kappa_r * nf).cos() - 1.0, 0.0)
        - Complex64::from_polar(1.0, -kappa_d * nf);
    numer / Complex64::new(0.0, 2.0 * PI * nf)
}
