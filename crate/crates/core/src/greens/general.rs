//! Perturbed Green's functions built from a known base resolvent.
//!
//! Two perturbations are covered. A position-only point interaction
//! `V₀ δ(x)` is a rank-1 update of the base resolvent. The sorting interaction
//! `V(p̂)δ(x̂) + δ(x̂)V(p̂)` acts through its Fourier kernel `Ṽ` as a rank-2
//! update: row `0` carries `Ṽ(y)` and column `0` carries `Ṽ(-y)`. Both are
//! solved in closed form in terms of the base Green's function.

use num_complex::Complex64;
use std::ops::Neg;

use crate::error::{Error, Result};

/// Threshold below which a resolvent denominator counts as vanishing.
pub const DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// An energy-dependent Green's function `G(x, x', E)`.
pub trait GreenFunction {
    type Point: Copy + Neg<Output = Self::Point>;

    /// Location of the point interaction.
    fn origin(&self) -> Self::Point;

    fn eval(&self, x: Self::Point, xp: Self::Point, energy: Complex64) -> Result<Complex64>;
}

impl<G: GreenFunction + ?Sized> GreenFunction for &G {
    type Point = G::Point;

    fn origin(&self) -> Self::Point {
        (**self).origin()
    }

    fn eval(&self, x: Self::Point, xp: Self::Point, energy: Complex64) -> Result<Complex64> {
        (**self).eval(x, xp, energy)
    }
}

/// Quadrature points paired with weights; on a lattice every site has weight 1.
pub type Quadrature<P> = [(P, f64)];

fn check_denominator(d: Complex64, energy: Complex64) -> Result<()> {
    if !d.is_finite() || d.norm() < DENOMINATOR_TOLERANCE {
        return Err(Error::VanishingDenominator {
            energy: energy.re,
            magnitude: d.norm(),
        });
    }
    Ok(())
}

/// Green's function with an added `V₀ δ(x)`:
/// `G₀(x,x') - V₀ G₀(x,0) G₀(0,x') / (1 + V₀ G₀(0,0))`.
pub fn g_delta<G: GreenFunction>(
    g0: &G,
    x: G::Point,
    xp: G::Point,
    energy: Complex64,
    strength: f64,
) -> Result<Complex64> {
    let o = g0.origin();
    let direct = g0.eval(x, xp, energy)?;
    if strength == 0.0 {
        return Ok(direct);
    }
    let left = g0.eval(x, o, energy)?;
    let right = g0.eval(o, xp, energy)?;
    let denom = 1.0 + strength * g0.eval(o, o, energy)?;
    check_denominator(denom, energy)?;
    Ok(direct - strength * left * right / denom)
}

/// Integrals of the Fourier kernel against the base Green's function at a
/// fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals {
    /// `Q₁ = ∫∫ Ṽ(x) G₀(x,y) Ṽ(-y)`
    pub q1: Complex64,
    /// `Q₂ = ∫ Ṽ(x) G₀(x,0)`
    pub q2: Complex64,
    /// `P₂(0) = ∫ G₀(0,y) Ṽ(-y)`
    pub p2_origin: Complex64,
}

/// Evaluator of the rank-2 perturbed Green's function on a fixed
/// quadrature grid. Energy-dependent integrals are computed once per energy.
pub struct RankTwoGreen<'a, G: GreenFunction, K> {
    g0: &'a G,
    kernel: K,
    quad: &'a Quadrature<G::Point>,
}

impl<'a, G, K> RankTwoGreen<'a, G, K>
where
    G: GreenFunction,
    K: Fn(G::Point) -> Result<Complex64>,
{
    pub fn new(g0: &'a G, kernel: K, quad: &'a Quadrature<G::Point>) -> Self {
        RankTwoGreen { g0, kernel, quad }
    }

    /// `P₁(x') = ∫ Ṽ(y) G₀(y,x')`
    pub fn p1(&self, xp: G::Point, energy: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(y, w) in self.quad {
            acc += w * (self.kernel)(y)? * self.g0.eval(y, xp, energy)?;
        }
        Ok(acc)
    }

    /// `P₂(x) = ∫ G₀(x,y) Ṽ(-y)`
    pub fn p2(&self, x: G::Point, energy: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(y, w) in self.quad {
            acc += w * self.g0.eval(x, y, energy)? * (self.kernel)(-y)?;
        }
        Ok(acc)
    }

    pub fn integrals(&self, energy: Complex64) -> Result<KernelIntegrals> {
        let o = self.g0.origin();
        let left: Vec<Complex64> = self
            .quad
            .iter()
            .map(|&(y, w)| Ok(w * (self.kernel)(y)?))
            .collect::<Result<_>>()?;
        let right: Vec<Complex64> = self
            .quad
            .iter()
            .map(|&(y, w)| Ok(w * (self.kernel)(-y)?))
            .collect::<Result<_>>()?;
        let mut q1 = Complex64::new(0.0, 0.0);
        let mut q2 = Complex64::new(0.0, 0.0);
        let mut p2_origin = Complex64::new(0.0, 0.0);
        for (i, &(xi, _)) in self.quad.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (j, &(yj, _)) in self.quad.iter().enumerate() {
                row += self.g0.eval(xi, yj, energy)? * right[j];
            }
            q1 += left[i] * row;
            q2 += left[i] * self.g0.eval(xi, o, energy)?;
            p2_origin += self.g0.eval(o, xi, energy)? * right[i];
        }
        Ok(KernelIntegrals { q1, q2, p2_origin })
    }

    /// Perturbed Green's function with integrals already at hand.
    pub fn eval_with(
        &self,
        ints: &KernelIntegrals,
        x: G::Point,
        xp: G::Point,
        energy: Complex64,
    ) -> Result<Complex64> {
        let o = self.g0.origin();
        let one_q2 = 1.0 + ints.q2;
        check_denominator(one_q2, energy)?;
        let r1 = self.p1(xp, energy)? / one_q2;
        let q3 = ints.q1 / one_q2;
        let g_oo = self.g0.eval(o, o, energy)?;
        let denom = 1.0 + ints.p2_origin - g_oo * q3;
        check_denominator(denom, energy)?;

        let g_xxp = self.g0.eval(x, xp, energy)?;
        let g_xo = self.g0.eval(x, o, energy)?;
        let g_oxp = self.g0.eval(o, xp, energy)?;
        let p2_x = self.p2(x, energy)?;

        Ok(g_xxp + g_xo * g_oxp * q3 / denom
            - g_xo * r1 * (1.0 + ints.p2_origin) / denom
            - p2_x * (g_oxp - g_oo * r1) / denom)
    }

    pub fn eval(&self, x: G::Point, xp: G::Point, energy: Complex64) -> Result<Complex64> {
        let ints = self.integrals(energy)?;
        self.eval_with(&ints, x, xp, energy)
    }
}

/// Green's function of `H₀ + V(p̂)δ(x̂) + δ(x̂)V(p̂)` at a single point, with
/// all kernel integrals done on `quad`. `kernel(y)` returns `Ṽ(y)` including
/// the interaction strength.
pub fn g_p_general<G, K>(
    g0: &G,
    kernel: K,
    x: G::Point,
    xp: G::Point,
    energy: Complex64,
    quad: &Quadrature<G::Point>,
) -> Result<Complex64>
where
    G: GreenFunction,
    K: Fn(G::Point) -> Result<Complex64>,
{
    RankTwoGreen::new(g0, kernel, quad).eval(x, xp, energy)
}

/// Split of `G(x,x')` into parts even and odd under `x <-> x'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeParts {
    pub sym: Complex64,
    pub antisym: Complex64,
}

impl ExchangeParts {
    pub fn reconstruct(&self) -> Complex64 {
        self.sym + self.antisym
    }
}

pub fn antisymmetric_part<P, F>(g: F, x: P, xp: P, energy: Complex64) -> Result<ExchangeParts>
where
    P: Copy,
    F: Fn(P, P, Complex64) -> Result<Complex64>,
{
    let forward = g(x, xp, energy)?;
    let backward = g(xp, x, energy)?;
    Ok(ExchangeParts {
        sym: 0.5 * (forward + backward),
        antisym: 0.5 * (forward - backward),
    })
}
