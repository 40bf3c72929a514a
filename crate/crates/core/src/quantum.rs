//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything here works on explicit dense matrices: tensor products,
//! Hermitian eigendecomposition, exact unitary time evolution, partial
//! traces, von Neumann entropies and mutual information. All operations
//! are pure functions of immutable inputs and safe to evaluate from
//! several threads at once.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eigh, EigValsh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

/// Tensor (Kronecker) product of two dense matrices.
pub use ndarray::linalg::kron;

/// Tolerance below which a matrix is accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// State vectors must be normalized to within this tolerance.
pub const STATE_NORM_TOL: f64 = 1e-12;
/// Density matrices must have unit trace within this tolerance.
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
/// Eigenvalues with magnitude at or below this contribute zero to entropies
/// (the 0 log 0 := 0 convention, extended to roundoff-sized values).
pub const ENTROPY_CLIP: f64 = 1e-12;

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> CMatrix {
    CMatrix::eye(n)
}

/// The Pauli X matrix [[0,1],[1,0]].
pub fn sigma_x() -> CMatrix {
    let mut m = CMatrix::zeros((2, 2));
    m[[0, 1]] = C64::new(1.0, 0.0);
    m[[1, 0]] = C64::new(1.0, 0.0);
    m
}

/// Conjugate transpose.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// max_{ij} |M_ij - conj(M_ji)|; infinite for non-square input.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let (rows, cols) = m.dim();
    if rows != cols {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in i..cols {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let err = hermiticity_error(m);
    if err > tol {
        Err(Error::NotHermitian { max_asymmetry: err })
    } else {
        Ok(())
    }
}

/// A normalized pure state on a tensor-product Hilbert space.
///
/// `partition` lists the dimensions of the subsystem factors in order,
/// e.g. `[2, 2, 128]` for a reference qubit, a system qubit, and a
/// 128-dimensional environment. Amplitudes are stored in row-major
/// (last-factor-fastest) order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    partition: Vec<usize>,
}

impl StateVector {
    pub fn new(amplitudes: CVector, partition: Vec<usize>) -> Result<Self> {
        let dim: usize = partition.iter().product();
        if partition.is_empty() || partition.contains(&0) {
            return Err(Error::DimMismatch(
                "state partition must list nonzero factor dimensions".into(),
            ));
        }
        if dim != amplitudes.len() {
            return Err(Error::DimMismatch(format!(
                "partition {:?} implies dim {} but {} amplitudes were given",
                partition,
                dim,
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state vector not normalized: |psi| = {norm:.15}"
            )));
        }
        Ok(Self {
            amplitudes,
            partition,
        })
    }

    /// Normalize `amplitudes` and build the state; errors on a zero vector.
    pub fn normalized(amplitudes: CVector, partition: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(
                "cannot normalize the zero vector".into(),
            ));
        }
        Self::new(amplitudes.mapv(|z| z / norm), partition)
    }

    /// Product basis state |i_0 i_1 ...> with one index per factor.
    pub fn basis(partition: &[usize], indices: &[usize]) -> Result<Self> {
        if indices.len() != partition.len() {
            return Err(Error::BadIndices(format!(
                "{} indices for {} factors",
                indices.len(),
                partition.len()
            )));
        }
        let mut flat = 0usize;
        for (f, (&d, &i)) in partition.iter().zip(indices).enumerate() {
            if i >= d {
                return Err(Error::BadIndices(format!(
                    "index {i} out of range for factor {f} of dimension {d}"
                )));
            }
            flat = flat * d + i;
        }
        let dim: usize = partition.iter().product();
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[flat] = C64::new(1.0, 0.0);
        Self::new(amplitudes, partition.to_vec())
    }

    /// Tensor product of two states; partitions concatenate.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = CVector::zeros(self.dim() * other.dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                amplitudes[i * other.dim() + j] = a * b;
            }
        }
        let mut partition = self.partition.clone();
        partition.extend_from_slice(&other.partition);
        StateVector {
            amplitudes,
            partition,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Array1<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Build from known parts, validating ordering and unitarity.
    pub fn from_parts(eigenvalues: Array1<f64>, eigenvectors: CMatrix) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.dim() != (n, n) {
            return Err(Error::DimMismatch(format!(
                "{} eigenvalues with eigenvector matrix {:?}",
                n,
                eigenvectors.dim()
            )));
        }
        if eigenvalues.windows(2).into_iter().any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be ascending".into(),
            ));
        }
        let gram = adjoint(&eigenvectors).dot(&eigenvectors);
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[[i, j]] - C64::new(expect, 0.0)).norm());
            }
        }
        if err > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "eigenvector matrix is not unitary: max |V\u{2020}V - I| = {err:.3e}"
            )));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> ArrayView1<'_, C64> {
        self.eigenvectors.column(k)
    }

    /// V diag(lambda) V†.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..n {
            let lam = C64::new(self.eigenvalues[k], 0.0);
            scaled.column_mut(k).mapv_inplace(|z| z * lam);
        }
        scaled.dot(&adjoint(&self.eigenvectors))
    }
}

/// Diagonalize a Hermitian matrix; rejects non-Hermitian input with the
/// measured asymmetry.
///
/// The LAPACK wrapper hands over the row-major buffer, so it effectively
/// diagonalizes the transpose; conjugating the returned vectors restores
/// H v = lambda v. The reconstruction is checked before returning.
pub fn eig_decompose(h: &CMatrix) -> Result<SpectralDecomposition> {
    let (rows, cols) = h.dim();
    if rows != cols {
        return Err(Error::DimMismatch(format!(
            "eig_decompose needs a square matrix, got {rows}x{cols}"
        )));
    }
    check_hermitian(h, HERMITICITY_TOL)?;
    let (eigenvalues, raw) = h
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigensolver(e.to_string()))?;
    let eigenvectors = raw.mapv(|z| z.conj());
    let decomp = SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    };
    let scale = h.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let rec = decomp.reconstruct();
    let err = rec
        .iter()
        .zip(h.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    if err > 1e-10 * scale {
        return Err(Error::Eigensolver(format!(
            "spectral reconstruction error {err:.3e} exceeds tolerance"
        )));
    }
    Ok(decomp)
}

/// Exact evolution psi(t) = V exp(-i lambda t) V† psi.
pub fn evolve(state: &StateVector, decomp: &SpectralDecomposition, t: f64) -> Result<StateVector> {
    if decomp.dim() != state.dim() {
        return Err(Error::DimMismatch(format!(
            "decomposition dim {} vs state dim {}",
            decomp.dim(),
            state.dim()
        )));
    }
    let v = decomp.eigenvectors();
    let mut coeffs = adjoint(v).dot(state.amplitudes());
    for (c, &e) in coeffs.iter_mut().zip(decomp.eigenvalues()) {
        *c *= C64::from_polar(1.0, -e * t);
    }
    StateVector::new(v.dot(&coeffs), state.partition().to_vec())
}

/// A positive unit-trace Hermitian operator describing one or more factors
/// of a larger partition. `labels` records which factors of the original
/// partition the rows/columns enumerate.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Vec<usize>,
    labels: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: Vec<usize>, labels: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if matrix.dim() != (n, n) {
            return Err(Error::DimMismatch(format!(
                "density matrix {:?} does not match factor dims {:?}",
                matrix.dim(),
                dims
            )));
        }
        if labels.len() != dims.len() {
            return Err(Error::BadIndices(
                "one label per retained factor is required".into(),
            ));
        }
        check_hermitian(&matrix, HERMITICITY_TOL)?;
        let trace: f64 = (0..n).map(|i| matrix[[i, i]].re).sum();
        if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {trace:.15} is not 1"
            )));
        }
        Ok(Self {
            matrix,
            dims,
            labels,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[[i, i]].re).sum()
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Array1<f64> {
        self.matrix
            .eigvalsh(UPLO::Lower)
            .expect("density matrix eigenvalue solve failed")
    }
}

// Flat offsets of every multi-index combination over the chosen factors,
// enumerated row-major.
fn factor_offsets(dims: &[usize], strides: &[usize], chosen: &[usize]) -> Vec<usize> {
    let total: usize = chosen.iter().map(|&f| dims[f]).product();
    let mut offsets = Vec::with_capacity(total);
    let mut idx = vec![0usize; chosen.len()];
    loop {
        let off = chosen
            .iter()
            .zip(&idx)
            .map(|(&f, &i)| i * strides[f])
            .sum();
        offsets.push(off);
        // increment mixed-radix counter
        let mut pos = chosen.len();
        loop {
            if pos == 0 {
                return offsets;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < dims[chosen[pos]] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    strides
}

fn validate_keep(keep: &[usize], n_factors: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::BadIndices("no factors kept".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::BadIndices(format!("duplicate factors in {keep:?}")));
    }
    if *sorted.last().unwrap() >= n_factors {
        return Err(Error::BadIndices(format!(
            "factor index out of range: {keep:?} with {n_factors} factors"
        )));
    }
    Ok(sorted)
}

/// Reduce a pure state to the density matrix of the kept factors.
///
/// Kept factors appear in ascending partition order regardless of the
/// order given in `keep`.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = state.partition();
    let keep = validate_keep(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let strides = strides_of(dims);
    let keep_off = factor_offsets(dims, &strides, &keep);
    let trace_off = factor_offsets(dims, &strides, &traced);
    let n = keep_off.len();
    let psi = state.amplitudes();
    let mut rho = CMatrix::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for &e in &trace_off {
                acc += psi[keep_off[i] + e] * psi[keep_off[j] + e].conj();
            }
            rho[[i, j]] = acc;
            if i != j {
                rho[[j, i]] = acc.conj();
            }
        }
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
    DensityMatrix::new(rho, kept_dims, keep)
}

/// Trace out factors of an existing density matrix. `keep` indexes the
/// matrix's own factor list; the original partition labels carry over.
pub fn partial_trace_density(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let keep = validate_keep(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let strides = strides_of(dims);
    let keep_off = factor_offsets(dims, &strides, &keep);
    let trace_off = factor_offsets(dims, &strides, &traced);
    let n = keep_off.len();
    let m = rho.matrix();
    let mut out = CMatrix::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for &e in &trace_off {
                acc += m[[keep_off[i] + e, keep_off[j] + e]];
            }
            out[[i, j]] = acc;
        }
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&f| dims[f]).collect();
    let kept_labels: Vec<usize> = keep.iter().map(|&f| rho.labels()[f]).collect();
    DensityMatrix::new(out, kept_dims, kept_labels)
}

/// S(rho) = -Tr(rho log rho) in nats. Eigenvalues at or below
/// [`ENTROPY_CLIP`] contribute zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let mut s = 0.0;
    for &p in rho.eigenvalues().iter() {
        debug_assert!(p >= -1e-10, "density matrix eigenvalue {p} is negative");
        if p > ENTROPY_CLIP {
            s -= p * p.ln();
        }
    }
    s.max(0.0)
}

/// I(X,Y) = S(X) + S(Y) - S(XY) for disjoint factor sets of a pure state.
pub fn mutual_information(state: &StateVector, x: &[usize], y: &[usize]) -> Result<f64> {
    if x.iter().any(|f| y.contains(f)) {
        return Err(Error::BadIndices(format!(
            "X {x:?} and Y {y:?} overlap"
        )));
    }
    let mut xy: Vec<usize> = x.iter().chain(y).copied().collect();
    xy.sort_unstable();
    let s_x = von_neumann_entropy(&partial_trace(state, x)?);
    let s_y = von_neumann_entropy(&partial_trace(state, y)?);
    let s_xy = von_neumann_entropy(&partial_trace(state, &xy)?);
    Ok(s_x + s_y - s_xy)
}
