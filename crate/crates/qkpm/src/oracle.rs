//! Exact references: dense matrices, LAPACK diagonalisation, matrix
//! functions and the exact trace of the one-step product formula.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qkpm_core::estimator::moment_postprocess;
use qkpm_core::hamiltonian::{
    coefficient_norm_bounds, rescale, HamiltonianSpec, Pauli, PauliTerm, RescaleParams, SpectralBounds, XyzCouplings,
};
use qkpm_core::kpm::{dos_compare, DosCurve, MomentSet, Provenance};
use qkpm_core::{Error, Result};
use serde::{Deserialize, Serialize};

// Links the LAPACK implementation.
extern crate lapack_src;

/// Largest register diagonalised exactly.
pub const ED_MAX_QUBITS: usize = 14;
/// Largest register for which eigenvectors and matrix functions are formed.
pub const DENSE_FUNCTION_MAX_QUBITS: usize = 10;

fn resource(msg: String) -> Error {
    Error::Resource(msg)
}

fn letter_entry(p: Pauli, row: usize, col: usize) -> Complex64 {
    let (o, r, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match (p, row, col) {
        (Pauli::I, a, b) => if a == b { r } else { o },
        (Pauli::X, a, b) => if a != b { r } else { o },
        (Pauli::Y, 0, 1) => -i,
        (Pauli::Y, 1, 0) => i,
        (Pauli::Y, _, _) => o,
        (Pauli::Z, 0, 0) => r,
        (Pauli::Z, 1, 1) => -r,
        (Pauli::Z, _, _) => o,
    }
}

/// `⟨row|P|col⟩` as a product of single-site entries.
pub fn matrix_element(t: &PauliTerm, n_qubits: usize, row: usize, col: usize) -> Complex64 {
    let mut v = Complex64::new(t.coefficient, 0.0);
    for q in 0..n_qubits {
        v *= letter_entry(t.letter(q), (row >> q) & 1, (col >> q) & 1);
        if v == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    v
}

/// Row hit by column `col` under `P`: flip the sites carrying X or Y.
fn image_row(t: &PauliTerm, col: usize) -> usize {
    t.factors()
        .iter()
        .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
        .fold(col, |r, &(q, _)| r ^ (1 << q))
}

/// True when every term has an even number of Y letters.
pub fn is_real(h: &HamiltonianSpec) -> bool {
    h.terms()
        .iter()
        .all(|t| t.factors().iter().filter(|(_, p)| *p == Pauli::Y).count() % 2 == 0)
}

fn check_cap(h: &HamiltonianSpec, cap: usize, what: &str) -> Result<()> {
    if h.n_qubits() > cap {
        return Err(resource(format!("{what} is capped at {cap} qubits, got {}", h.n_qubits())));
    }
    Ok(())
}

/// Dense `H` including the identity offset.
pub fn dense_matrix(h: &HamiltonianSpec) -> Result<DMatrix<Complex64>> {
    check_cap(h, 12, "dense complex matrix")?;
    let (n, d) = (h.n_qubits(), h.dim());
    let mut m = DMatrix::<Complex64>::identity(d, d) * Complex64::new(h.identity_offset, 0.0);
    for t in h.terms() {
        for col in 0..d {
            let row = image_row(t, col);
            m[(row, col)] += matrix_element(t, n, row, col);
        }
    }
    Ok(m)
}

/// Column-major dense real matrix; only for [`is_real`] operators.
fn dense_real(h: &HamiltonianSpec) -> Vec<f64> {
    let (n, d) = (h.n_qubits(), h.dim());
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        a[i * d + i] = h.identity_offset;
    }
    for t in h.terms() {
        for col in 0..d {
            let row = image_row(t, col);
            a[col * d + row] += matrix_element(t, n, row, col).re;
        }
    }
    a
}

fn check_info(info: i32, routine: &str) -> Result<()> {
    if info != 0 {
        return Err(Error::Domain(format!("{routine} failed with info = {info}")));
    }
    Ok(())
}

/// Eigenvalues (ascending) and, if `vectors`, column-major eigenvectors.
fn dsyevd(mut a: Vec<f64>, d: usize, vectors: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d as i32;
    let jobz = if vectors { b'V' } else { b'N' };
    let mut w = vec![0.0; d];
    let (mut work, mut iwork, mut info) = (vec![0.0; 1], vec![0i32; 1], 0);
    unsafe { lapack::dsyevd(jobz, b'U', n, &mut a, n, &mut w, &mut work, -1, &mut iwork, -1, &mut info) };
    check_info(info, "dsyevd workspace query")?;
    let (lwork, liwork) = (work[0] as i32, iwork[0]);
    let mut work = vec![0.0; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe { lapack::dsyevd(jobz, b'U', n, &mut a, n, &mut w, &mut work, lwork, &mut iwork, liwork, &mut info) };
    check_info(info, "dsyevd")?;
    Ok((w, if vectors { a } else { Vec::new() }))
}

fn zheevd(m: &DMatrix<Complex64>, vectors: bool) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let d = m.nrows();
    let n = d as i32;
    let jobz = if vectors { b'V' } else { b'N' };
    let mut a: Vec<lapack::c64> = m.as_slice().to_vec();
    let mut w = vec![0.0; d];
    let (mut work, mut rwork, mut iwork, mut info) = (vec![lapack::c64::new(0.0, 0.0); 1], vec![0.0; 1], vec![0i32; 1], 0);
    unsafe {
        lapack::zheevd(jobz, b'U', n, &mut a, n, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1, &mut info)
    };
    check_info(info, "zheevd workspace query")?;
    let (lwork, lrwork, liwork) = (work[0].re as i32, rwork[0] as i32, iwork[0]);
    let mut work = vec![lapack::c64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack::zheevd(
            jobz, b'U', n, &mut a, n, &mut w, &mut work, lwork, &mut rwork, lrwork, &mut iwork, liwork, &mut info,
        )
    };
    check_info(info, "zheevd")?;
    let v = if vectors { DMatrix::from_vec(d, d, a) } else { DMatrix::zeros(0, 0) };
    Ok((w, v))
}

/// Full spectrum, physical units, plus the rescaled copy once known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub n_qubits: usize,
    pub eigenvalues: Vec<f64>,
    pub rescaled: Option<Vec<f64>>,
    pub couplings: Option<[f64; 4]>,
}

impl SpectrumRecord {
    pub fn bounds(&self) -> SpectralBounds {
        SpectralBounds { e_min: self.eigenvalues[0], e_max: self.eigenvalues[self.eigenvalues.len() - 1] }
    }

    pub fn apply_rescale(&mut self, p: &RescaleParams) {
        self.rescaled = Some(self.eigenvalues.iter().map(|&e| p.to_rescaled(e)).collect());
    }
}

fn couplings_array(c: Option<XyzCouplings>) -> Option<[f64; 4]> {
    c.map(|c| [c.jx, c.jy, c.jz, c.lambda])
}

/// Dense Hermitian eigensolve, eigenvalues only.
pub fn exact_diagonalize(h: &HamiltonianSpec) -> Result<SpectrumRecord> {
    check_cap(h, ED_MAX_QUBITS, "exact diagonalisation")?;
    let eigenvalues = if is_real(h) {
        dsyevd(dense_real(h), h.dim(), false)?.0
    } else {
        zheevd(&dense_matrix(h)?, false)?.0
    };
    Ok(SpectrumRecord { n_qubits: h.n_qubits(), eigenvalues, rescaled: None, couplings: couplings_array(h.couplings) })
}

/// Eigenvalues and eigenvectors (columns), for `L ≤ 10`.
pub fn eigh(h: &HamiltonianSpec) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    check_cap(h, DENSE_FUNCTION_MAX_QUBITS, "eigenvector decomposition")?;
    if is_real(h) {
        let d = h.dim();
        let (w, v) = dsyevd(dense_real(h), d, true)?;
        Ok((w, DMatrix::from_iterator(d, d, v.into_iter().map(|x| Complex64::new(x, 0.0)))))
    } else {
        zheevd(&dense_matrix(h)?, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMethod {
    /// Exact up to [`ED_MAX_QUBITS`], coefficient norm above.
    #[default]
    Auto,
    Exact,
    CoefficientNorm,
}

impl std::str::FromStr for BoundsMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "coefficient-norm" => Ok(Self::CoefficientNorm),
            _ => Err(Error::Domain(format!("unknown bounds method {s:?}"))),
        }
    }
}

/// Spectral bounds together with the spectrum when it was computed.
pub fn spectral_bounds(h: &HamiltonianSpec, method: BoundsMethod) -> Result<(SpectralBounds, Option<SpectrumRecord>)> {
    let exact = match method {
        BoundsMethod::Exact => true,
        BoundsMethod::CoefficientNorm => false,
        BoundsMethod::Auto => h.n_qubits() <= ED_MAX_QUBITS,
    };
    if exact {
        let s = exact_diagonalize(h)?;
        Ok((s.bounds(), Some(s)))
    } else {
        Ok((coefficient_norm_bounds(h), None))
    }
}

/// Rescaled operator, parameters and (when exact) the spectrum with its rescaled copy.
pub fn rescale_model(
    h: &HamiltonianSpec,
    method: BoundsMethod,
    epsilon: f64,
) -> Result<(HamiltonianSpec, RescaleParams, Option<SpectrumRecord>)> {
    let (b, mut spec) = spectral_bounds(h, method)?;
    let (ht, p) = rescale(h, b, epsilon)?;
    if let Some(s) = &mut spec {
        s.apply_rescale(&p);
    }
    Ok((ht, p, spec))
}

/// Scalar functions applied through the spectral decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    /// `cos(n H)`
    Cos(f64),
    /// `sin(n H)`
    Sin(f64),
    /// `T_m(H)`; needs the spectrum inside `[−1, 1]`.
    Chebyshev(usize),
    /// `e^{i t H}`
    ExpI(f64),
    /// `Σ_{k≤K} c_k H^{2k+1}`, the truncated `π/2 − arccos(H)`.
    ArccosSeries(usize),
}

impl MatrixFunction {
    fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(match *self {
            MatrixFunction::Cos(n) => Complex64::new((n * x).cos(), 0.0),
            MatrixFunction::Sin(n) => Complex64::new((n * x).sin(), 0.0),
            MatrixFunction::Chebyshev(m) => {
                let x = if x.abs() <= 1.0 + 1e-12 { x.clamp(-1.0, 1.0) } else { x };
                Complex64::new(qkpm_core::kpm::chebyshev_t(m, x)?, 0.0)
            }
            MatrixFunction::ExpI(t) => Complex64::from_polar(1.0, t * x),
            MatrixFunction::ArccosSeries(k) => {
                let c = qkpm_core::hamiltonian::arccos_coefficients(k);
                Complex64::new(c.iter().enumerate().map(|(j, c)| c * x.powi(2 * j as i32 + 1)).sum(), 0.0)
            }
        })
    }
}

/// `f(H) = V f(Λ) V†`.
pub fn dense_matrix_function(h: &HamiltonianSpec, f: MatrixFunction) -> Result<DMatrix<Complex64>> {
    let (w, v) = eigh(h)?;
    let fw = w.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let mut vf = v.clone();
    for (j, mut col) in vf.column_iter_mut().enumerate() {
        col *= fw[j];
    }
    Ok(vf * v.adjoint())
}

/// 4×4 matrix of `P` restricted to sites `(a, b)`, `a` the low bit.
fn two_site(t: &PauliTerm, a: usize, b: usize) -> [[Complex64; 4]; 4] {
    let (la, lb) = (t.letter(a), t.letter(b));
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = letter_entry(la, r & 1, c & 1) * letter_entry(lb, r >> 1, c >> 1);
        }
    }
    m
}

fn mul4(x: &[[Complex64; 4]; 4], y: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    let mut z = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            z[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    z
}

/// Bond gate `Π_t e^{iθ_t P_t}` in term order, oriented `(a, b)`.
fn bond_gate(terms: &[&PauliTerm], a: usize, b: usize, time: f64) -> [[Complex64; 4]; 4] {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    for t in terms {
        let th = time * t.coefficient;
        let p = two_site(t, a, b);
        let mut e = p;
        for (i, row) in e.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= Complex64::new(0.0, th.sin());
                if i == j {
                    *x += th.cos();
                }
            }
        }
        g = mul4(&e, &g);
    }
    g
}

/// `tr[U]/2^L` for one product-formula step `U = e^{itH_odd} e^{itH_even} e^{itβ}`
/// on the periodic ring, by contracting a 4-state transfer matrix around it.
pub fn st_trace(h: &HamiltonianSpec, time: f64) -> Result<Complex64> {
    let l = h.n_qubits();
    if !(h.periodic && l >= 4 && l % 2 == 0) {
        return Err(Error::Domain("transfer-matrix trace needs an even periodic ring of at least 4 sites".into()));
    }
    let mut bonds: Vec<Vec<&PauliTerm>> = vec![Vec::new(); l];
    for t in h.pauli_terms() {
        let f = t.factors();
        let left = match f {
            [(i, _), (j, _)] if *j == i + 1 => *i,
            [(0, _), (j, _)] if *j == l - 1 => l - 1,
            _ => return Err(Error::Domain(format!("term {t} is not a nearest-neighbour bond"))),
        };
        bonds[left].push(t);
    }
    let mut total = DMatrix::<Complex64>::identity(4, 4);
    for j in 0..l / 2 {
        let (a0, a1) = (2 * j, 2 * j + 1);
        let (b0, b1) = (2 * j + 1, (2 * j + 2) % l);
        let ga = bond_gate(&bonds[a0], a0, a1, time);
        let gb = bond_gate(&bonds[b0], b0, b1, time);
        // v = s + 2p per site; ⟨p|A|s⟩ and ⟨s|B|p⟩ factor over bonds.
        let ta = DMatrix::from_fn(4, 4, |u, v| ga[(u >> 1) + 2 * (v >> 1)][(u & 1) + 2 * (v & 1)]);
        let tb = DMatrix::from_fn(4, 4, |u, v| gb[(u & 1) + 2 * (v & 1)][(u >> 1) + 2 * (v >> 1)]);
        total = total * ta * tb;
    }
    let phase = Complex64::from_polar(1.0, time * h.identity_coefficient());
    Ok(total.trace() * phase / (1u64 << l) as f64)
}

/// Exact one-step product-formula moments (infinite replicas, infinite shots).
pub fn st_moments_exact(h_k: &HamiltonianSpec, m_max: usize) -> Result<MomentSet> {
    let values = (0..=m_max)
        .map(|n| {
            let tr = st_trace(h_k, n as f64)?;
            Ok(moment_postprocess(n, tr.re, tr.im))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSet::exact(values, Provenance::St))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentDiff {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub diff: f64,
    /// `√(σ_a² + σ_b²)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentComparison {
    pub rows: Vec<MomentDiff>,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub rms: f64,
}

pub fn compare_moment_sets(a: &MomentSet, b: &MomentSet) -> Result<MomentComparison> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!("moment sets have lengths {} and {}", a.len(), b.len())));
    }
    let rows: Vec<MomentDiff> = (0..a.len())
        .map(|n| MomentDiff {
            n,
            a: a.values[n],
            b: b.values[n],
            diff: a.values[n] - b.values[n],
            std_error: a.std_errors[n].hypot(b.std_errors[n]),
        })
        .collect();
    let k = rows.len().max(1) as f64;
    Ok(MomentComparison {
        max_abs: rows.iter().map(|r| r.diff.abs()).fold(0.0, f64::max),
        mean_abs: rows.iter().map(|r| r.diff.abs()).sum::<f64>() / k,
        rms: (rows.iter().map(|r| r.diff * r.diff).sum::<f64>() / k).sqrt(),
        rows,
    })
}

/// Standard deviation of the `R`-replica stochastic estimate of each
/// moment: `σ_m² = (tr[T_m²] + (κ − 2) Σ_j T_m(H)_jj²) / (R D²)`.
///
/// With `vectors` absent the diagonal sum is replaced by its upper bound
/// `tr[T_m²]`, which only widens the envelope.
pub fn stochastic_envelope(
    rescaled_eigenvalues: &[f64],
    vectors: Option<&DMatrix<Complex64>>,
    m_max: usize,
    kappa: f64,
    replicas: usize,
) -> Vec<f64> {
    let d = rescaled_eigenvalues.len() as f64;
    let t: Vec<Vec<f64>> = rescaled_eigenvalues
        .iter()
        .map(|&x| {
            let x = x.clamp(-1.0, 1.0);
            (0..=m_max).map(|m| (m as f64 * x.acos()).cos()).collect()
        })
        .collect();
    // |v_jk|² weights for the diagonal of T_m(H).
    let weights = vectors.map(|v| v.map(|z| z.norm_sqr()));
    (0..=m_max)
        .map(|m| {
            let tr2: f64 = t.iter().map(|tk| tk[m] * tk[m]).sum();
            let diag2 = match &weights {
                Some(w) => (0..w.nrows())
                    .map(|j| {
                        let djj: f64 = (0..w.ncols()).map(|k| w[(j, k)] * t[k][m]).sum();
                        djj * djj
                    })
                    .sum(),
                None => tr2,
            };
            let var = (tr2 + (kappa - 2.0) * diag2).max(0.0) / (replicas as f64 * d * d);
            if vectors.is_none() && kappa < 2.0 {
                (tr2 / (replicas as f64 * d * d)).sqrt()
            } else {
                var.sqrt()
            }
        })
        .collect()
}

/// L1 and L∞ distance plus the pointwise table `(x, a, b)` on the finer grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DosComparison {
    pub l1: f64,
    pub linf: f64,
    pub points: Vec<(f64, f64, f64)>,
}

/// Symmetric in its arguments; the coarser curve is interpolated.
pub fn dos_compare_table(a: &DosCurve, b: &DosCurve) -> Result<DosComparison> {
    let l1 = dos_compare(a, b)?;
    let a_fine = a.grid.len() >= b.grid.len();
    let (fine, coarse) = if a_fine { (a, b) } else { (b, a) };
    let points: Vec<(f64, f64, f64)> = fine
        .grid
        .points
        .iter()
        .zip(&fine.values)
        .map(|(&x, &g)| {
            let h = coarse.interpolate(x);
            if a_fine { (x, g, h) } else { (x, h, g) }
        })
        .collect();
    let linf = points.iter().map(|p| (p.1 - p.2).abs()).fold(0.0, f64::max);
    Ok(DosComparison { l1, linf, points })
}
