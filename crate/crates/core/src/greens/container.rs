//! Green's functions of a particle in a hard-wall box `[-L/2, L/2]` with unit
//! mass, bare and with the sorting interaction at the centre.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use super::general::{GreenFunction, DENOMINATOR_TOLERANCE};
use super::sine_integral::{si, si_pair_approx};
use crate::error::{Error, Result};
use crate::potential::ActivationSpec;

/// Distance in energy from a base eigenenergy at which evaluation is refused.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Distance of `P_R L / 2` from a multiple of π at which the band split is refused.
pub const BAND_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_SERIES_TERMS: usize = 4096;

const MIN_SERIES_TERMS: usize = 32;

/// A hard-wall box of length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerSpec {
    box_length: f64,
    hbar: f64,
    series_terms: usize,
}

impl ContainerSpec {
    pub fn new(box_length: f64, hbar: f64, series_terms: usize) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive and finite, got {hbar}"
            )));
        }
        if series_terms < MIN_SERIES_TERMS {
            return Err(Error::InvalidParameter(format!(
                "series_terms must be at least {MIN_SERIES_TERMS}, got {series_terms}"
            )));
        }
        Ok(ContainerSpec {
            box_length,
            hbar,
            series_terms,
        })
    }

    /// Box of length `L` with `ħ = 1` and the default truncation.
    pub fn with_length(box_length: f64) -> Result<Self> {
        Self::new(box_length, 1.0, DEFAULT_SERIES_TERMS)
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    pub fn with_series_terms(self, series_terms: usize) -> Result<Self> {
        Self::new(self.box_length, self.hbar, series_terms)
    }

    /// `κ_n = nπ/L`
    pub fn wavenumber(&self, n: usize) -> f64 {
        n as f64 * PI / self.box_length
    }

    /// `E_n = ħ²κ_n²/2`
    pub fn energy(&self, n: usize) -> f64 {
        let k = self.wavenumber(n);
        0.5 * self.hbar * self.hbar * k * k
    }

    /// Normalized eigenfunction: `√(2/L) cos(κ_n x)` for odd `n`,
    /// `√(2/L) sin(κ_n x)` for even `n`.
    pub fn mode(&self, n: usize, x: f64) -> f64 {
        let norm = (2.0 / self.box_length).sqrt();
        let arg = self.wavenumber(n) * x;
        if n % 2 == 1 {
            norm * arg.cos()
        } else {
            norm * arg.sin()
        }
    }

    /// Half-argument `z = L√(2E)/(2ħ)` of the closed forms.
    fn half_phase(&self, energy: Complex64) -> Complex64 {
        self.box_length * (2.0 * energy).sqrt() / (2.0 * self.hbar)
    }

    /// Index of the eigenenergy closest to `energy` if it lies within
    /// [`POLE_TOLERANCE`], among the levels admitted by `levels`.
    fn nearby_level(&self, energy: Complex64, levels: Levels) -> Option<usize> {
        let scale = self.box_length / (PI * self.hbar);
        let guess = (scale * (2.0 * energy.re.max(0.0)).sqrt()).round() as usize;
        let lo = guess.saturating_sub(2).max(1);
        (lo..=guess + 2)
            .filter(|&n| levels.admits(n))
            .find(|&n| (energy - self.energy(n)).norm() < POLE_TOLERANCE)
    }

    fn check_pole(&self, energy: Complex64, levels: Levels) -> Result<()> {
        match self.nearby_level(energy, levels) {
            Some(index) => Err(Error::BasePole {
                index,
                energy: energy.re,
                tolerance: POLE_TOLERANCE,
            }),
            None => Ok(()),
        }
    }

    fn check_position(&self, x: f64) -> Result<()> {
        let half = 0.5 * self.box_length;
        if !(x.abs() <= half * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("position {x} outside the box [-{half}, {half}]")));
        }
        Ok(())
    }
}

/// Which box levels can produce a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Levels {
    All,
    Odd,
    Even,
}

impl Levels {
    fn admits(self, n: usize) -> bool {
        match self {
            Levels::All => true,
            Levels::Odd => n % 2 == 1,
            Levels::Even => n % 2 == 0,
        }
    }

    /// Even modes vanish at the centre, so they drop out of `G₀(x, 0)`.
    fn for_points(x: f64, xp: f64) -> Self {
        if x == 0.0 || xp == 0.0 {
            Levels::Odd
        } else {
            Levels::All
        }
    }
}

/// Static Green's function `G₀(x,x',0) = (2/ħ²)(x_< + L/2)(L/2 - x_>)/L`.
fn g0_zero_energy(x: f64, xp: f64, spec: &ContainerSpec) -> f64 {
    let half = 0.5 * spec.box_length;
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    2.0 * (lo + half) * (half - hi) / (spec.hbar * spec.hbar * spec.box_length)
}

fn g0_series(x: f64, xp: f64, energy: Complex64, spec: &ContainerSpec) -> Complex64 {
    // G(E) = G(0) + Σ φ_n(x) φ_n(x') E / (E_n (E_n - E)); terms fall off as n⁻⁴
    let levels = Levels::for_points(x, xp);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (1..=spec.series_terms).rev().filter(|&n| levels.admits(n)) {
        let en = spec.energy(n);
        acc += spec.mode(n, x) * spec.mode(n, xp) / (en * (en - energy));
    }
    g0_zero_energy(x, xp, spec) + energy * acc
}

/// Box Green's function `Σ_n φ_n(x) φ_n(x') / (E_n - E)` truncated at
/// `series_terms` modes.
pub fn g0_box(x: f64, xp: f64, energy: f64, spec: &ContainerSpec) -> Result<Complex64> {
    g0_box_complex(x, xp, Complex64::new(energy, 0.0), spec)
}

/// [`g0_box`] at complex energy.
pub fn g0_box_complex(x: f64, xp: f64, energy: Complex64, spec: &ContainerSpec) -> Result<Complex64> {
    spec.check_position(x)?;
    spec.check_position(xp)?;
    spec.check_pole(energy, Levels::for_points(x, xp))?;
    Ok(g0_series(x, xp, energy, spec))
}

/// `tan z / z` with a series near the origin.
fn tan_over_z(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 + z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    } else {
        z.tan() / z
    }
}

/// Closed diagonal form `G₀(0,0,E) = tan(L√(2E)/2ħ) / (ħ√(2E))`, continued to
/// `E <= 0` through `tan z / z`.
pub fn g0_origin_closed(energy: f64, spec: &ContainerSpec) -> Result<f64> {
    spec.check_pole(Complex64::new(energy, 0.0), Levels::Odd)?;
    let z = spec.half_phase(Complex64::new(energy, 0.0));
    let scale = spec.box_length / (2.0 * spec.hbar * spec.hbar);
    Ok(scale * tan_over_z(z).re)
}

/// `Σ_{n≥1} 1/(E_{2n} - E) = 1/(2E) - L cot z / (2ħ√(2E))`.
pub fn even_level_sum(energy: f64, spec: &ContainerSpec) -> f64 {
    let z = spec.half_phase(Complex64::new(energy, 0.0));
    let l2 = spec.box_length * spec.box_length / (2.0 * spec.hbar * spec.hbar);
    if z.norm() < 1e-2 {
        let z2 = z * z;
        return (l2 * (1.0 / 6.0 + z2 / 90.0 + z2 * z2 / 945.0)).re;
    }
    let cot_over_z = 1.0 / (z.tan() * z);
    (1.0 / (2.0 * energy) - 0.5 * l2 * cot_over_z).re
}

/// The bare box Green's function as a [`GreenFunction`] over positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerGreen {
    pub spec: ContainerSpec,
}

impl GreenFunction for ContainerGreen {
    type Point = f64;

    fn origin(&self) -> f64 {
        0.0
    }

    fn eval(&self, x: f64, xp: f64, energy: Complex64) -> Result<Complex64> {
        g0_box_complex(x, xp, energy, &self.spec)
    }
}

/// Evaluation strategy for the kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMode {
    /// Sine-integral coefficients summed to `series_terms`.
    Exact,
    /// Step approximation of the sine-integral coefficients and the closed
    /// cotangent form of `Q₁`.
    Approx,
}

/// Integrals of the sorting kernel against the box Green's function.
///
/// With `u = (V₀/2) Ṽ` and `S_n = Si(a + nπ) - Si(a - nπ) - Si(nπ)`:
/// `P₁(x) = -(2u/(iπL)) Σ S_n sin(κ_{2n}x)/(E_{2n} - E)`,
/// `Q₁ = (2u²/(π²L)) Σ S_n²/(E_{2n} - E)`, `P₂ = -P₁`, `Q₂ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerIntegrals {
    spec: ContainerSpec,
    mode: IntegralMode,
    coupling: f64,
    band_a: f64,
    band_index: usize,
    band_fraction: f64,
    coefficients: Vec<f64>,
}

/// Integer part `⌊a/π⌋` and fractional part `ε` of `a/π`.
fn band_split(band_a: f64) -> (usize, f64) {
    let ratio = band_a / PI;
    let k = ratio.floor();
    (k as usize, ratio - k)
}

impl ContainerIntegrals {
    pub fn new(spec: &ContainerSpec, act: &ActivationSpec, mode: IntegralMode) -> Result<Self> {
        if act.p_uv().is_some() {
            return Err(Error::InvalidParameter(
                "container integrals need an activation without UV cutoff".into(),
            ));
        }
        let band_a = act.p_ref() * spec.box_length / (2.0 * spec.hbar);
        let nearest = (band_a / PI).round() * PI;
        if (band_a - nearest).abs() < BAND_TOLERANCE {
            return Err(Error::DegenerateBand {
                band_a,
                tolerance: BAND_TOLERANCE,
            });
        }
        let (band_index, band_fraction) = band_split(band_a);
        let coefficients = (1..=spec.series_terms)
            .map(|n| {
                let npi = n as f64 * PI;
                match mode {
                    IntegralMode::Exact => si(band_a + npi) - si(band_a - npi) - si(npi),
                    IntegralMode::Approx => FRAC_PI_2 - si_pair_approx(n as u64, band_a),
                }
            })
            .collect();
        Ok(ContainerIntegrals {
            spec: *spec,
            mode,
            coupling: 0.5 * act.strength(),
            band_a,
            band_index,
            band_fraction,
            coefficients,
        })
    }

    pub fn mode(&self) -> IntegralMode {
        self.mode
    }

    pub fn spec(&self) -> &ContainerSpec {
        &self.spec
    }

    /// `a = P_R L / (2ħ)`
    pub fn band_a(&self) -> f64 {
        self.band_a
    }

    /// `⌊a/π⌋`
    pub fn band_index(&self) -> usize {
        self.band_index
    }

    /// Fractional part of `a/π`.
    pub fn band_fraction(&self) -> f64 {
        self.band_fraction
    }

    /// Energy `E_{2⌊a/π⌋}` of the extra pole, if `⌊a/π⌋ >= 1`.
    pub fn extra_pole(&self) -> Option<f64> {
        (self.band_index >= 1).then(|| self.spec.energy(2 * self.band_index))
    }

    /// Coefficients `S_n`, `n = 1..=series_terms`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    fn check_even_pole(&self, energy: f64) -> Result<()> {
        self.spec.check_pole(Complex64::new(energy, 0.0), Levels::Even)
    }

    pub fn p1(&self, x: f64, energy: f64) -> Result<Complex64> {
        self.spec.check_position(x)?;
        self.check_even_pole(energy)?;
        let mut acc = 0.0;
        for (i, s) in self.coefficients.iter().enumerate().rev() {
            let m = 2 * (i + 1);
            acc += s * (self.spec.wavenumber(m) * x).sin() / (self.spec.energy(m) - energy);
        }
        let pref = -2.0 * self.coupling / (PI * self.spec.box_length);
        // pref / i = -i pref
        Ok(Complex64::new(0.0, -pref * acc))
    }

    pub fn p2(&self, x: f64, energy: f64) -> Result<Complex64> {
        Ok(-self.p1(x, energy)?)
    }

    pub fn q1(&self, energy: f64) -> Result<Complex64> {
        let pref = 2.0 * self.coupling * self.coupling / (PI * PI * self.spec.box_length);
        let quarter = 0.25 * PI * PI;
        match self.mode {
            IntegralMode::Exact => {
                self.check_even_pole(energy)?;
                let mut acc = 0.0;
                let mut plain = 0.0;
                for (i, s) in self.coefficients.iter().enumerate().rev() {
                    let d = self.spec.energy(2 * (i + 1)) - energy;
                    acc += s * s / d;
                    plain += 1.0 / d;
                }
                // beyond the truncation S_n → π/2
                let tail = quarter * (even_level_sum(energy, &self.spec) - plain);
                Ok(Complex64::new(pref * (acc + tail), 0.0))
            }
            IntegralMode::Approx => {
                if let Some(index) = self.spec.nearby_level(Complex64::new(energy, 0.0), Levels::Even) {
                    if index != 2 * self.band_index {
                        return Err(Error::BasePole {
                            index,
                            energy,
                            tolerance: POLE_TOLERANCE,
                        });
                    }
                }
                Ok(Complex64::new(pref * quarter * self.approx_bracket(energy), 0.0))
            }
        }
    }

    /// `Σ 1/(E_{2n} - E) - [k>=1]/(E_{2k} - E)`, with the removable pole at
    /// `E_{2k}` taken out analytically.
    fn approx_bracket(&self, energy: f64) -> f64 {
        let Some(ek) = self.extra_pole() else {
            return even_level_sum(energy, &self.spec);
        };
        let z = self.spec.half_phase(Complex64::new(energy, 0.0)).re;
        let dz = z - self.band_index as f64 * PI;
        if energy <= 0.0 || dz.abs() > 0.1 {
            return even_level_sum(energy, &self.spec) - 1.0 / (ek - energy);
        }
        // cot z = cot δz; the 1/δz part cancels 1/(E_{2k} - E) in closed form
        let root = (2.0 * energy).sqrt();
        let root_k = (2.0 * ek).sqrt();
        let d2 = dz * dz;
        let cot_rest = -dz * (1.0 / 3.0 + d2 / 45.0 + 2.0 * d2 * d2 / 945.0 + d2 * d2 * d2 / 4725.0);
        1.0 / (2.0 * energy) - self.spec.box_length * cot_rest / (2.0 * self.spec.hbar * root)
            + 1.0 / (root * (root_k + root))
    }

    pub fn q2(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Box Green's function with the sorting interaction, built from
/// [`ContainerIntegrals`].
#[derive(Debug, Clone)]
pub struct DemonBox {
    integrals: ContainerIntegrals,
}

/// Pieces of the perturbed box Green's function at one `(x, x', E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemonBoxTerms {
    pub base: Complex64,
    /// `[P₁(x)G₀(0,x') - G₀(x,0)P₁(x')] / D`, odd under exchange.
    pub bracket: Complex64,
    /// `G₀(x,0)G₀(0,x')Q₁ / D`
    pub direct: Complex64,
    /// `-P₁(x)G₀(0,0)P₁(x') / D`
    pub cross: Complex64,
    pub denominator: Complex64,
}

impl DemonBoxTerms {
    pub fn total(&self) -> Complex64 {
        self.base + self.bracket + self.direct + self.cross
    }
}

impl DemonBox {
    pub fn new(spec: &ContainerSpec, act: &ActivationSpec, mode: IntegralMode) -> Result<Self> {
        Ok(DemonBox {
            integrals: ContainerIntegrals::new(spec, act, mode)?,
        })
    }

    pub fn integrals(&self) -> &ContainerIntegrals {
        &self.integrals
    }

    pub fn terms(&self, x: f64, xp: f64, energy: f64) -> Result<DemonBoxTerms> {
        let spec = &self.integrals.spec;
        let e = Complex64::new(energy, 0.0);
        spec.check_position(x)?;
        spec.check_position(xp)?;
        spec.check_pole(e, Levels::for_points(x, xp))?;
        let base = g0_series(x, xp, e, spec);
        let g_x0 = g0_series(x, 0.0, e, spec);
        let g_0xp = g0_series(0.0, xp, e, spec);
        let g_00 = Complex64::new(g0_origin_closed(energy, spec)?, 0.0);
        let p1_x = self.integrals.p1(x, energy)?;
        let p1_xp = self.integrals.p1(xp, energy)?;
        let q1 = self.integrals.q1(energy)?;
        let denominator = 1.0 - g_00 * q1;
        if denominator.norm() < DENOMINATOR_TOLERANCE {
            return Err(Error::VanishingDenominator {
                energy,
                magnitude: denominator.norm(),
            });
        }
        Ok(DemonBoxTerms {
            base,
            bracket: (p1_x * g_0xp - g_x0 * p1_xp) / denominator,
            direct: g_x0 * g_0xp * q1 / denominator,
            cross: -p1_x * g_00 * p1_xp / denominator,
            denominator,
        })
    }

    pub fn eval(&self, x: f64, xp: f64, energy: f64) -> Result<Complex64> {
        Ok(self.terms(x, xp, energy)?.total())
    }
}

/// Convenience wrapper around [`DemonBox`] for a single evaluation.
pub fn g_p_box(
    x: f64,
    xp: f64,
    energy: f64,
    spec: &ContainerSpec,
    act: &ActivationSpec,
    mode: IntegralMode,
) -> Result<Complex64> {
    DemonBox::new(spec, act, mode)?.eval(x, xp, energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::general::{antisymmetric_part, g_p_general};
    use crate::potential::fourier_value;
    use crate::quadrature::QuadratureGrid;

    /// Closed form `2 sin(k(x_<+L/2)) sin(k(L/2-x_>)) / (ħ²k sin kL)`.
    fn closed_g0(x: f64, xp: f64, e: f64, l: f64) -> f64 {
        let k = (2.0 * e).sqrt();
        let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
        2.0 * (k * (lo + 0.5 * l)).sin() * (k * (0.5 * l - hi)).sin() / (k * (k * l).sin())
    }

    fn box_pi() -> ContainerSpec {
        ContainerSpec::with_length(PI).unwrap()
    }

    fn act_with_fraction(spec: &ContainerSpec, ratio: f64, strength: f64) -> ActivationSpec {
        let p_ref = 2.0 * ratio * PI * spec.hbar() / spec.box_length();
        ActivationSpec::new(p_ref, None, strength).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ContainerSpec::new(0.0, 1.0, 64).is_err());
        assert!(ContainerSpec::new(1.0, 1.0, 31).is_err());
        assert!(ContainerSpec::new(1.0, -1.0, 64).is_err());
        let s = box_pi();
        for n in 1..100 {
            assert!(s.energy(n + 1) > s.energy(n));
        }
        assert_eq!(s.energy(2), 2.0);
    }

    #[test]
    fn diagonal_low_energy_limit() {
        let s = box_pi();
        assert!((g0_origin_closed(1e-14, &s).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((g0_box(0.0, 0.0, 1e-14, &s).unwrap().re - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn diagonal_vanishes_at_second_level() {
        // E = 2 is E_2: the sin modes vanish at the origin, so G(0,0) is regular
        let s = box_pi();
        assert!(g0_box(0.0, 0.0, 2.0, &s).unwrap().norm() < 1e-9);
        assert!(g0_origin_closed(2.0, &s).unwrap().abs() < 1e-15);
        assert!(g0_box(0.3, 0.0, 2.0, &s).is_ok());
        assert!(g0_box(0.3, 0.1, 2.0, &s).is_err());
    }

    #[test]
    fn series_matches_tangent_form() {
        let s = ContainerSpec::new(PI, 1.0, 10_000).unwrap();
        let series = g0_box(0.0, 0.0, 0.7, &s).unwrap().re;
        let closed = g0_origin_closed(0.7, &s).unwrap();
        assert!((series - closed).abs() < 1e-6);
        assert!((series - closed).abs() < 1e-12, "accelerated series: {}", series - closed);
    }

    #[test]
    fn series_matches_closed_form_off_diagonal() {
        let s = box_pi();
        for &(x, xp, e) in &[(0.3, -1.1, 0.7), (1.2, 0.4, 5.3), (-0.9, -0.2, 13.0), (0.0, 1.0, -2.0)] {
            let got = g0_box(x, xp, e, &s).unwrap().re;
            let want = if e > 0.0 {
                closed_g0(x, xp, e, PI)
            } else {
                let k = (-2.0 * e).sqrt();
                let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
                2.0 * (k * (lo + 0.5 * PI)).sinh() * (k * (0.5 * PI - hi)).sinh() / (k * (k * PI).sinh())
            };
            assert!((got - want).abs() < 1e-10, "({x},{xp},{e}): {got} vs {want}");
        }
    }

    #[test]
    fn pole_error_carries_index() {
        let s = box_pi();
        match g0_box(0.1, 0.2, 4.5, &s) {
            Err(Error::BasePole { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
        assert!(g0_box(0.1, 0.2, 4.5 + 1e-6, &s).is_ok());
    }

    #[test]
    fn even_sum_closed_form() {
        let s = box_pi();
        for e in [1e-8, 0.01, 0.7, 3.0, 13.0, -4.0] {
            let direct: f64 = (1..2_000_000usize).rev().map(|n| 1.0 / (s.energy(2 * n) - e)).sum();
            // Euler–Maclaurin tail of Σ 1/(2n²) beyond 2e6
            let tail = 1.0 / (2.0 * 2e6);
            assert!((even_level_sum(e, &s) - direct - tail).abs() < 1e-10, "E={e}");
        }
    }

    #[test]
    fn degenerate_band_rejected() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.0, 1.0);
        assert!(matches!(
            ContainerIntegrals::new(&s, &act, IntegralMode::Exact),
            Err(Error::DegenerateBand { .. })
        ));
        let cut = ActivationSpec::new(1.0, Some(3.0), 1.0).unwrap();
        assert!(ContainerIntegrals::new(&s, &cut, IntegralMode::Approx).is_err());
    }

    #[test]
    fn p2_is_minus_p1_and_q2_vanishes() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 0.8);
        for mode in [IntegralMode::Exact, IntegralMode::Approx] {
            let ints = ContainerIntegrals::new(&s, &act, mode).unwrap();
            assert_eq!(ints.q2(), Complex64::new(0.0, 0.0));
            for i in 0..10 {
                for j in 0..10 {
                    let x = -1.5 + 0.3 * i as f64;
                    let e = 0.37 + 2.9 * j as f64;
                    assert_eq!(ints.p2(x, e).unwrap(), -ints.p1(x, e).unwrap());
                }
            }
        }
    }

    /// `∫ (V₀/2) Ṽ(y) G₀(y, x') dy` by composite Gauss–Legendre on symmetric
    /// panels, which takes the principal value at `y = 0`.
    fn p1_by_quadrature(xp: f64, e: f64, s: &ContainerSpec, act: &ActivationSpec) -> Complex64 {
        let half = 0.5 * s.box_length();
        let mut total = Complex64::new(0.0, 0.0);
        // split at the kink y = x' and mirror the split so nodes stay symmetric
        let cut = xp.abs();
        for (a, b) in [(-half, -cut), (-cut, 0.0), (0.0, cut), (cut, half)] {
            if b - a < 1e-14 {
                continue;
            }
            let grid = QuadratureGrid::composite(a, b, 16, 32);
            for (y, w) in grid.iter() {
                let v = 0.5 * act.strength() * fourier_value(y, act).unwrap();
                total += w * v * closed_g0(y, xp, e, s.box_length());
            }
        }
        total
    }

    #[test]
    fn exact_p1_matches_direct_integration() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 1.0);
        let ints = ContainerIntegrals::new(&s, &act, IntegralMode::Exact).unwrap();
        for &(x, e) in &[(0.4, 0.7), (-1.1, 3.3), (1.3, 13.0)] {
            let series = ints.p1(x, e).unwrap();
            let quad = p1_by_quadrature(x, e, &s, &act);
            assert!((series - quad).norm() < 1e-6 * quad.norm().max(1.0), "x={x} E={e}: {series} vs {quad}");
        }
    }

    #[test]
    fn exact_series_is_cauchy_under_doubling() {
        let act_spec = |terms| ContainerSpec::new(PI, 1.0, terms).unwrap();
        let s1 = act_spec(2048);
        let act = act_with_fraction(&s1, 2.3, 1.0);
        let a = ContainerIntegrals::new(&s1, &act, IntegralMode::Exact).unwrap();
        let b = ContainerIntegrals::new(&act_spec(4096), &act, IntegralMode::Exact).unwrap();
        for e in [0.7, 5.3, 13.0] {
            assert!((a.q1(e).unwrap() - b.q1(e).unwrap()).norm() < 1e-8);
            assert!((a.p1(0.9, e).unwrap() - b.p1(0.9, e).unwrap()).norm() < 1e-6);
        }
    }

    #[test]
    fn approx_coefficients_follow_step_pattern() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 1.0);
        let ints = ContainerIntegrals::new(&s, &act, IntegralMode::Approx).unwrap();
        let c = ints.coefficients();
        assert_eq!(ints.band_index(), 2);
        assert!((c[0] + FRAC_PI_2).abs() < 1e-15);
        assert!((c[1] + 0.3 * PI).abs() < 1e-12);
        assert!((c[2] - FRAC_PI_2).abs() < 1e-15);
        // and they track the exact coefficients in sign far from n = k
        let exact = ContainerIntegrals::new(&s, &act, IntegralMode::Exact).unwrap();
        for n in 3..50 {
            assert!((exact.coefficients()[n] - c[n]).abs() < 0.05, "n={}", n + 1);
        }
    }

    #[test]
    fn approx_q1_closed_form_matches_its_series() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 1.0);
        let ints = ContainerIntegrals::new(&s, &act, IntegralMode::Approx).unwrap();
        let k = ints.band_index();
        for e in [0.7, 5.3, 13.0, 40.1] {
            let mut sum = 0.0;
            for n in (1..2_000_000usize).rev() {
                if n != k {
                    sum += 1.0 / (s.energy(2 * n) - e);
                }
            }
            sum += 1.0 / (2.0 * 2e6);
            let want = 0.5 * 0.5 / (2.0 * PI) * sum;
            assert!((ints.q1(e).unwrap().re - want).abs() < 1e-10, "E={e}");
        }
        // the removable pole at E_{2k} is gone
        let ek = ints.extra_pole().unwrap();
        let left = ints.q1(ek - 1e-9 * ek).unwrap().re;
        let right = ints.q1(ek + 1e-9 * ek).unwrap().re;
        let centre = ints.q1(ek).unwrap().re;
        assert!((left - right).abs() < 1e-7 && (centre - left).abs() < 1e-7);
    }

    #[test]
    fn zero_strength_reduces_to_base() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 0.0);
        for mode in [IntegralMode::Exact, IntegralMode::Approx] {
            let g = g_p_box(0.3, -0.8, 1.7, &s, &act, mode).unwrap();
            let g0 = g0_box(0.3, -0.8, 1.7, &s).unwrap();
            assert!((g - g0).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_flips_only_the_bracket() {
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 1.0);
        let demon = DemonBox::new(&s, &act, IntegralMode::Approx).unwrap();
        let (x, xp, e) = (0.7, -0.4, 3.1);
        let fwd = demon.terms(x, xp, e).unwrap();
        let bwd = demon.terms(xp, x, e).unwrap();
        assert!((fwd.bracket + bwd.bracket).norm() < 1e-14);
        assert!((fwd.base - bwd.base).norm() < 1e-14);
        assert!((fwd.direct - bwd.direct).norm() < 1e-14);
        assert!((fwd.cross - bwd.cross).norm() < 1e-14);
        let parts = antisymmetric_part(|a, b, en: Complex64| demon.eval(a, b, en.re), x, xp, Complex64::new(e, 0.0)).unwrap();
        assert!((parts.antisym - fwd.bracket).norm() < 1e-14);
        assert!(parts.antisym.norm() > 1e-3);
        let bare = antisymmetric_part(
            |a, b, en: Complex64| g0_box(a, b, en.re, &s),
            x,
            xp,
            Complex64::new(e, 0.0),
        )
        .unwrap();
        assert!(bare.antisym.norm() < 1e-14);
    }

    #[test]
    fn extra_pole_residue_of_the_odd_part() {
        // (E_{2k} - E) times the exchange-odd part tends to a finite, nonzero
        // limit proportional to sin(κ_{2k}x)G₀(0,x') - G₀(x,0)sin(κ_{2k}x')
        let s = box_pi();
        let act = act_with_fraction(&s, 2.3, 1.0);
        let demon = DemonBox::new(&s, &act, IntegralMode::Approx).unwrap();
        let ints = demon.integrals();
        let ek = ints.extra_pole().unwrap();
        let kk = s.wavenumber(2 * ints.band_index());
        let (x, xp) = (0.5, -1.2);
        let scaled = |d: f64| {
            let e = ek - d;
            d * demon.terms(x, xp, e).unwrap().bracket
        };
        // Richardson extrapolation in the offset
        let (r1, r2) = (scaled(1e-4), scaled(5e-5));
        let limit = 2.0 * r2 - r1;
        assert!(limit.norm() > 1e-3);
        let d = demon.terms(x, xp, ek - 1e-7).unwrap().denominator;
        let g_0xp = g0_box(0.0, xp, ek, &s).unwrap();
        let g_x0 = g0_box(x, 0.0, ek, &s).unwrap();
        let coeff = -2.0 * 0.5 / (PI * PI) * (-PI * ints.band_fraction());
        let shape = (kk * x).sin() * g_0xp - g_x0 * (kk * xp).sin();
        let predicted = Complex64::new(0.0, -coeff) * shape / d;
        assert!((limit - predicted).norm() < 1e-6 * predicted.norm(), "{limit} vs {predicted}");
    }

    #[test]
    fn general_form_agrees_with_box_specialization() {
        // the general rank-2 formula on a quadrature grid reproduces the
        // simplified box form once Q₂ = 0 is used
        let s = ContainerSpec::new(PI, 1.0, 48).unwrap();
        let act = act_with_fraction(&s, 1.3, 0.6);
        let g0 = ContainerGreen { spec: s };
        let half = 0.5 * PI;
        let grid = QuadratureGrid::composite(-half, half, 8, 64);
        let quad: Vec<(f64, f64)> = grid.iter().collect();
        let kernel = |y: f64| Ok(0.5 * act.strength() * fourier_value(y, &act)?);
        let demon = DemonBox::new(&s, &act, IntegralMode::Exact).unwrap();
        for &(x, xp, e) in &[(0.6, -0.9, 1.7), (-0.3, 1.1, 6.1)] {
            let general = g_p_general(&g0, kernel, x, xp, Complex64::new(e, 0.0), &quad).unwrap();
            let boxed = demon.eval(x, xp, e).unwrap();
            assert!((general - boxed).norm() < 2e-3 * boxed.norm(), "{general} vs {boxed}");
        }
    }
}
