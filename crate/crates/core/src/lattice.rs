//! Tight-binding chain with the sorting interaction on the central site.
//!
//! Sites run over `n ∈ [-N, N]` (vector index `n + N`) with hard walls one
//! site beyond each end. Energies are in units of `ħ²/(2ma²)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::greens::general::GreenFunction;
use crate::potential::lattice_kernel;
use crate::roots::bisect_then_secant;

/// Largest acceptable condition estimate for a dense resolvent.
pub const CONDITION_LIMIT: f64 = 1e12;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    half_sites: usize,
    upsilon0: f64,
    kappa_r: f64,
    kappa_d: f64,
}

impl LatticeConfig {
    pub fn new(half_sites: usize, upsilon0: f64, kappa_r: f64, kappa_d: f64) -> Result<Self> {
        if 2 * half_sites + 1 < 9 {
            return Err(Error::InvalidParameter(format!(
                "need at least 9 sites, got 2*{half_sites}+1"
            )));
        }
        if !upsilon0.is_finite() {
            return Err(Error::InvalidParameter(format!("upsilon0 must be finite, got {upsilon0}")));
        }
        if !(kappa_r > 0.0 && kappa_r < kappa_d && kappa_d <= PI) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < kappa_r < kappa_d <= pi, got kappa_r={kappa_r}, kappa_d={kappa_d}"
            )));
        }
        Ok(LatticeConfig {
            half_sites,
            upsilon0,
            kappa_r,
            kappa_d,
        })
    }

    /// 249 sites, `Υ₀ = 0.1`, `κ_R = π/4`, `κ_D = π/2`.
    pub fn reference() -> Self {
        LatticeConfig {
            half_sites: 124,
            upsilon0: 0.1,
            kappa_r: PI / 4.0,
            kappa_d: PI / 2.0,
        }
    }

    pub fn half_sites(&self) -> usize {
        self.half_sites
    }

    pub fn dim(&self) -> usize {
        2 * self.half_sites + 1
    }

    pub fn upsilon0(&self) -> f64 {
        self.upsilon0
    }

    pub fn kappa_r(&self) -> f64 {
        self.kappa_r
    }

    pub fn kappa_d(&self) -> f64 {
        self.kappa_d
    }

    pub fn with_upsilon0(self, upsilon0: f64) -> Result<Self> {
        Self::new(self.half_sites, upsilon0, self.kappa_r, self.kappa_d)
    }

    /// Vector index of site `n`.
    pub fn index(&self, n: i64) -> Option<usize> {
        let shifted = n + self.half_sites as i64;
        (0..self.dim() as i64).contains(&shifted).then_some(shifted as usize)
    }
}

/// Dense Hamiltonian split into hopping and interaction parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub config: LatticeConfig,
    pub matrix: DMatrix<Complex64>,
    pub kinetic: DMatrix<Complex64>,
    pub potential: DMatrix<Complex64>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}

pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Free Dirichlet chain: `+2` on the diagonal, `-1` between neighbours.
pub fn free_chain(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| match i.abs_diff(j) {
        0 => Complex64::new(2.0, 0.0),
        1 => Complex64::new(-1.0, 0.0),
        _ => C0,
    })
}

/// Kernel row of the interaction: `u(n) = Υ₀ w(n)*`, with `u(0) = Υ₀ κ_D/(2π)`.
/// Row 0 of the interaction holds `u(n)`, column 0 holds `u(-n)`.
pub fn interaction_row(config: &LatticeConfig, n: i64) -> Complex64 {
    config.upsilon0 * lattice_kernel(n, config.kappa_r, config.kappa_d).conj()
}

pub fn assemble_hamiltonian(config: &LatticeConfig) -> HamiltonianMatrix {
    let dim = config.dim();
    let kinetic = free_chain(dim);
    let mut potential = DMatrix::from_element(dim, dim, C0);
    let centre = config.half_sites;
    let n_of = |i: usize| i as i64 - centre as i64;
    if config.upsilon0 != 0.0 {
        for i in 0..dim {
            let n = n_of(i);
            // column 0 carries Υ₀ w(n); row 0 its conjugate
            let col = config.upsilon0 * lattice_kernel(n, config.kappa_r, config.kappa_d);
            potential[(i, centre)] += col;
            potential[(centre, i)] += col.conj();
        }
    }
    let matrix = &kinetic + &potential;
    HamiltonianMatrix {
        config: *config,
        matrix,
        kinetic,
        potential,
    }
}

/// Eigenvalues ascending with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Worst `‖Hν - Ξν‖` over all eigenpairs.
    pub fn max_residual(&self, h: &DMatrix<Complex64>) -> f64 {
        let hv = h * &self.vectors;
        (0..self.dim())
            .map(|m| (hv.column(m) - self.vectors.column(m) * Complex64::new(self.values[m], 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// `max |V†V - 1|`
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Raw dump: dimension as `u64`, the eigenvalues, then the eigenvector
    /// matrix row-major as `(re, im)` pairs, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.dim();
        w.write_all(&(dim as u64).to_le_bytes())?;
        for v in self.values.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for i in 0..dim {
            for j in 0..dim {
                let z = self.vectors[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> std::io::Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> std::io::Result<[u8; 8]> {
            r.read_exact(&mut buf)?;
            Ok(buf)
        };
        let dim = u64::from_le_bytes(next(&mut r)?) as usize;
        if dim == 0 || dim > 1 << 16 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("implausible eigensystem dimension {dim}"),
            ));
        }
        let mut values = DVector::zeros(dim);
        for m in 0..dim {
            values[m] = f64::from_le_bytes(next(&mut r)?);
        }
        let mut vectors = DMatrix::from_element(dim, dim, C0);
        for i in 0..dim {
            for j in 0..dim {
                let re = f64::from_le_bytes(next(&mut r)?);
                let im = f64::from_le_bytes(next(&mut r)?);
                vectors[(i, j)] = Complex64::new(re, im);
            }
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "trailing bytes after eigensystem",
            ));
        }
        Ok(EigenSystem { values, vectors })
    }
}

/// Full eigendecomposition of a Hermitian matrix, checked against the
/// residual and orthogonality contract.
pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<EigenSystem> {
    eigendecompose_matrix(&h.matrix)
}

pub fn eigendecompose_matrix(h: &DMatrix<Complex64>) -> Result<EigenSystem> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.ncols(),
        });
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if hermiticity_defect(h) > 1e-12 * scale {
        return Err(Error::InvalidParameter("matrix is not Hermitian".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(dim, order.iter().map(|&m| eig.eigenvalues[m]));
    let mut vectors = DMatrix::from_element(dim, dim, C0);
    for (col, &m) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(m));
    }
    let sys = EigenSystem { values, vectors };
    let norm = h.norm();
    let residual = sys.max_residual(h);
    if residual > 1e-10 * norm.max(1.0) {
        return Err(Error::Numerical(format!("eigen residual {residual:e} exceeds contract")));
    }
    let ortho = sys.orthonormality_defect();
    if ortho > 1e-10 {
        return Err(Error::Numerical(format!("eigenvector orthogonality defect {ortho:e}")));
    }
    Ok(sys)
}

/// Which side of the real axis the energy is pushed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `(H - E - iε)⁻¹`
    Plus,
    /// `(H - E + iε)⁻¹`
    Minus,
}

/// `(H - E ∓ iε)⁻¹` by dense LU.
pub fn direct_resolvent(h: &DMatrix<Complex64>, energy: f64, eps: f64, side: Side) -> Result<DMatrix<Complex64>> {
    let shift = match side {
        Side::Plus => Complex64::new(energy, eps),
        Side::Minus => Complex64::new(energy, -eps),
    };
    resolvent(h, shift)
}

/// `(H - z)⁻¹` for complex `z`, refused when the 1-norm condition estimate
/// exceeds [`CONDITION_LIMIT`].
pub fn resolvent(h: &DMatrix<Complex64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    let dim = h.nrows();
    let mut a = h.clone();
    for i in 0..dim {
        a[(i, i)] -= z;
    }
    let a_norm = one_norm(&a);
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::IllConditioned { estimate: f64::INFINITY })?;
    let estimate = a_norm * one_norm(&inv);
    if !estimate.is_finite() || estimate > CONDITION_LIMIT {
        return Err(Error::IllConditioned { estimate });
    }
    Ok(inv)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Σ_m ν_m ν_m† / (Ξ_m - z)`
pub fn spectral_resolvent(eig: &EigenSystem, z: Complex64) -> DMatrix<Complex64> {
    let dim = eig.dim();
    let mut scaled = eig.vectors.clone();
    for m in 0..dim {
        let f = 1.0 / (eig.values[m] - z);
        for i in 0..dim {
            scaled[(i, m)] *= f;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Site-space resolvent of a fixed matrix, refreshed whenever a new energy is
/// requested.
#[derive(Debug)]
pub struct LatticeGreen {
    half_sites: usize,
    matrix: DMatrix<Complex64>,
    cache: std::sync::Mutex<Option<(Complex64, DMatrix<Complex64>)>>,
}

impl LatticeGreen {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim % 2 == 0 || matrix.ncols() != dim {
            return Err(Error::InvalidParameter(format!(
                "lattice Green's function needs a square matrix of odd size, got {}x{}",
                dim,
                matrix.ncols()
            )));
        }
        Ok(LatticeGreen {
            half_sites: dim / 2,
            matrix,
            cache: std::sync::Mutex::new(None),
        })
    }

    pub fn half_sites(&self) -> usize {
        self.half_sites
    }

    /// Every site with unit weight, as a quadrature for the rank-2 formula.
    pub fn sites(&self) -> Vec<(i64, f64)> {
        let n = self.half_sites as i64;
        (-n..=n).map(|s| (s, 1.0)).collect()
    }

    fn with_resolvent<T>(&self, z: Complex64, f: impl FnOnce(&DMatrix<Complex64>) -> T) -> Result<T> {
        let mut guard = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        let fresh = !matches!(&*guard, Some((cached, _)) if *cached == z);
        if fresh {
            *guard = Some((z, resolvent(&self.matrix, z)?));
        }
        Ok(f(&guard.as_ref().expect("cache filled").1))
    }
}

impl GreenFunction for LatticeGreen {
    type Point = i64;

    fn origin(&self) -> i64 {
        0
    }

    fn eval(&self, x: i64, xp: i64, energy: Complex64) -> Result<Complex64> {
        let n = self.half_sites as i64;
        let idx = |s: i64| {
            if s.abs() > n {
                Err(Error::Domain(format!("site {s} outside [-{n}, {n}]")))
            } else {
                Ok((s + n) as usize)
            }
        };
        let (i, j) = (idx(x)?, idx(xp)?);
        self.with_resolvent(energy, |g| g[(i, j)])
    }
}

/// Normalized Dirichlet mode `sin(qπ(n+N+1)/(2N+2))` over `n ∈ [-N, N]`.
pub fn free_box_mode(q: usize, half_sites: usize) -> Result<DVector<f64>> {
    let dim = 2 * half_sites + 1;
    if q == 0 || q > dim {
        return Err(Error::InvalidParameter(format!("mode index {q} outside 1..={dim}")));
    }
    let denom = (dim + 1) as f64;
    let mut v = DVector::from_fn(dim, |i, _| (q as f64 * PI * (i + 1) as f64 / denom).sin());
    // exact zeros at the nodes of even modes through the centre
    if q % 2 == 0 {
        v[half_sites] = 0.0;
    }
    let norm = v.norm();
    Ok(v / norm)
}

/// Dirichlet-chain eigenvalue `2(1 - cos(qπ/(2N+2)))`.
pub fn free_box_energy(q: usize, half_sites: usize) -> f64 {
    2.0 * (1.0 - (q as f64 * PI / (2 * half_sites + 2) as f64).cos())
}

/// Tight-binding dispersion `2(1 - cos κ)`.
pub fn dispersion(kappa: f64) -> f64 {
    2.0 * (1.0 - kappa.cos())
}

/// Largest `κ ∈ (0, π]` with `|2(1 - cos κ) - κ²| / κ² <= tol`.
pub fn dispersion_parabolic_range(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    // relative deficit 1 - (sin(κ/2)/(κ/2))² rises monotonically on (0, π]
    let deficit = |k: f64| {
        let h = 0.5 * k;
        let sinc = if h < 1e-4 { 1.0 - h * h / 6.0 } else { h.sin() / h };
        1.0 - sinc * sinc
    };
    if deficit(PI) <= tol {
        return Ok(PI);
    }
    let root = bisect_then_secant(|k| deficit(k) - tol, 0.0, PI, 1e-14, 5)
        .ok_or_else(|| Error::Numerical("no bracket for parabolic range".into()))?;
    Ok(root.root)
}
