//! Numerical check of the exchange relations between the two boundary values
//! of a finite Hermitian resolvent.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{direct_resolvent, hermiticity_defect, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointReport {
    /// `max |G⁺(x',x)* - G⁻(x,x')|`
    pub adjoint_defect: f64,
    /// `max |G^±(x,x') - G^±(x',x)|` when `H` is entrywise real.
    pub symmetry_defect: Option<f64>,
    /// `‖G⁺ - (G⁺)ᵀ‖_F`, reported for every `H`.
    pub asymmetry_frobenius: f64,
}

pub fn adjoint_symmetry_check(h: &DMatrix<Complex64>, energy: f64, eps: f64) -> Result<AdjointReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if hermiticity_defect(h) > 1e-12 * scale {
        return Err(Error::InvalidParameter("matrix is not Hermitian".into()));
    }
    let plus = direct_resolvent(h, energy, eps, Side::Plus)?;
    let minus = direct_resolvent(h, energy, eps, Side::Minus)?;
    let dim = h.nrows();
    let mut adjoint_defect: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut frob = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            adjoint_defect = adjoint_defect.max((plus[(j, i)].conj() - minus[(i, j)]).norm());
            let d_plus = (plus[(i, j)] - plus[(j, i)]).norm();
            let d_minus = (minus[(i, j)] - minus[(j, i)]).norm();
            sym = sym.max(d_plus).max(d_minus);
            frob += d_plus * d_plus;
        }
    }
    let real = h.iter().all(|z| z.im == 0.0);
    Ok(AdjointReport {
        adjoint_defect,
        symmetry_defect: real.then_some(sym),
        asymmetry_frobenius: frob.sqrt(),
    })
}
