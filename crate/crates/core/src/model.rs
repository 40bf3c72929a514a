//! Composite-system construction: fixed spectra with Haar-random
//! eigenbases, interaction pathways, and entangled initial states.
//!
//! A model is two subsystems A and B with Hamiltonians built as
//! U diag(spectrum) U† for seeded Haar draws U, coupled by a sum of
//! product pathways c_g * E * O_A^g (x) O_B^g.

use ndarray::Array1;
use ndarray_linalg::QRSquare;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantum::{
    adjoint, check_hermitian, eig_decompose, eye, kron, sigma_x, CMatrix, CVector, C64,
    SpectralDecomposition, StateVector, HERMITICITY_TOL,
};

/// One subsystem: its dimension, energy spectrum, and the RNG seed for the
/// Haar-random eigenbasis.
#[derive(Debug, Clone)]
pub struct SubsystemSpec {
    pub dim: usize,
    /// Ascending; sorted on construction.
    pub spectrum: Vec<f64>,
    pub seed: u64,
}

impl SubsystemSpec {
    pub fn new(dim: usize, mut spectrum: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("subsystem dim must be >= 1".into()));
        }
        if spectrum.len() != dim {
            return Err(Error::DimMismatch(format!(
                "spectrum has {} values for dimension {dim}",
                spectrum.len()
            )));
        }
        if spectrum.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("spectrum must be finite".into()));
        }
        spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            dim,
            spectrum,
            seed,
        })
    }
}

/// One interaction pathway c * E * O_A (x) O_B with Hermitian factors.
#[derive(Debug, Clone)]
pub struct PathwaySpec {
    /// Dimensionless coupling c.
    pub coupling: f64,
    /// Energy scale E multiplying the dimensionless coupling.
    pub energy_scale: f64,
    pub op_a: CMatrix,
    pub op_b: CMatrix,
}

impl PathwaySpec {
    pub fn new(coupling: f64, energy_scale: f64, op_a: CMatrix, op_b: CMatrix) -> Result<Self> {
        check_hermitian(&op_a, HERMITICITY_TOL)
            .map_err(|_| non_hermitian_pathway("A", &op_a))?;
        check_hermitian(&op_b, HERMITICITY_TOL)
            .map_err(|_| non_hermitian_pathway("B", &op_b))?;
        Ok(Self {
            coupling,
            energy_scale,
            op_a,
            op_b,
        })
    }

    /// Full coefficient C = c * E.
    pub fn full_coefficient(&self) -> f64 {
        self.coupling * self.energy_scale
    }
}

fn non_hermitian_pathway(side: &str, op: &CMatrix) -> Error {
    Error::InvalidArgument(format!(
        "pathway operator on {side} is not Hermitian (max asymmetry {:.3e})",
        crate::quantum::hermiticity_error(op)
    ))
}

/// How to pick the initial state of B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Psi0Selector {
    /// Lowest-eigenvalue eigenvector of H_B.
    GroundB,
}

/// A fully assembled composite system, immutable after construction.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub spec_a: SubsystemSpec,
    pub spec_b: SubsystemSpec,
    pub pathways: Vec<PathwaySpec>,
    pub h_a: CMatrix,
    pub h_b: CMatrix,
    pub h_int: CMatrix,
    pub h_total: CMatrix,
    pub eig_a: SpectralDecomposition,
    pub eig_b: SpectralDecomposition,
    pub eig_total: SpectralDecomposition,
    /// Initial state of B (an eigenvector of H_B).
    pub psi0: StateVector,
    /// Eigenindex of psi0 within eig_b.
    pub psi0_index: usize,
    /// Energy of psi0.
    pub psi0_energy: f64,
}

impl ModelInstance {
    pub fn dim_a(&self) -> usize {
        self.spec_a.dim
    }

    pub fn dim_b(&self) -> usize {
        self.spec_b.dim
    }

    pub fn dim_total(&self) -> usize {
        self.spec_a.dim * self.spec_b.dim
    }

    pub fn energy_a(&self, k: usize) -> f64 {
        self.spec_a.spectrum[k]
    }

    pub fn energy_b(&self, i: usize) -> f64 {
        self.spec_b.spectrum[i]
    }
}

/// Draw a Haar-distributed unitary, deterministically from `seed`.
///
/// QR of a matrix of iid standard complex Gaussians, with the column
/// phases fixed by the signs of diag(R) so the distribution is exactly
/// Haar rather than QR-convention-dependent.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("haar_unitary: dim must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = CMatrix::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[[i, j]] = C64::new(re * inv_sqrt2, im * inv_sqrt2);
        }
    }
    let (mut q, r) = g
        .qr_square()
        .map_err(|e| Error::Eigensolver(format!("QR failed: {e}")))?;
    for k in 0..dim {
        let d = r[[k, k]];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(k).mapv_inplace(|z| z * phase);
    }
    Ok(q)
}

/// H = U diag(spectrum) U† together with its (exact, by construction)
/// spectral decomposition.
pub fn hamiltonian_from_spectrum(spec: &SubsystemSpec) -> Result<(CMatrix, SpectralDecomposition)> {
    let u = haar_unitary(spec.dim, spec.seed)?;
    let mut scaled = u.clone();
    for k in 0..spec.dim {
        let lam = C64::new(spec.spectrum[k], 0.0);
        scaled.column_mut(k).mapv_inplace(|z| z * lam);
    }
    let m = scaled.dot(&adjoint(&u));
    // symmetrize away the last bits of roundoff
    let h = (&m + &adjoint(&m)).mapv(|z| z / 2.0);
    let decomp =
        SpectralDecomposition::from_parts(Array1::from(spec.spectrum.clone()), u)?;
    Ok((h, decomp))
}

/// sqrt(Tr(O^2)/N), the normalization under which coupling operators have
/// unit size.
pub fn normalized_norm(o: &CMatrix) -> Result<f64> {
    let (rows, cols) = o.dim();
    if rows != cols {
        return Err(Error::DimMismatch(format!(
            "normalized_norm needs a square matrix, got {rows}x{cols}"
        )));
    }
    let mut tr = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            tr += (o[[i, j]] * o[[j, i]]).re;
        }
    }
    Ok((tr / rows as f64).max(0.0).sqrt())
}

/// Build the full composite system from subsystem specs and pathways.
pub fn assemble_model(
    spec_a: SubsystemSpec,
    spec_b: SubsystemSpec,
    pathways: Vec<PathwaySpec>,
    psi0: Psi0Selector,
) -> Result<ModelInstance> {
    for (g, pw) in pathways.iter().enumerate() {
        if pw.op_a.dim() != (spec_a.dim, spec_a.dim) {
            return Err(Error::DimMismatch(format!(
                "pathway {g}: A operator is {:?}, subsystem A has dim {}",
                pw.op_a.dim(),
                spec_a.dim
            )));
        }
        if pw.op_b.dim() != (spec_b.dim, spec_b.dim) {
            return Err(Error::DimMismatch(format!(
                "pathway {g}: B operator is {:?}, subsystem B has dim {}",
                pw.op_b.dim(),
                spec_b.dim
            )));
        }
        check_hermitian(&pw.op_a, HERMITICITY_TOL)
            .map_err(|_| non_hermitian_pathway("A", &pw.op_a))?;
        check_hermitian(&pw.op_b, HERMITICITY_TOL)
            .map_err(|_| non_hermitian_pathway("B", &pw.op_b))?;
    }
    let (h_a, eig_a) = hamiltonian_from_spectrum(&spec_a)?;
    let (h_b, eig_b) = hamiltonian_from_spectrum(&spec_b)?;
    let dim = spec_a.dim * spec_b.dim;
    let mut h_int = CMatrix::zeros((dim, dim));
    for pw in &pathways {
        let coeff = C64::new(pw.full_coefficient(), 0.0);
        h_int = h_int + kron(&pw.op_a, &pw.op_b).mapv(|z| z * coeff);
    }
    let h_total = kron(&h_a, &eye(spec_b.dim)) + kron(&eye(spec_a.dim), &h_b) + &h_int;
    let eig_total = eig_decompose(&h_total)?;
    let (psi0_index, psi0_energy) = match psi0 {
        Psi0Selector::GroundB => (0usize, spec_b.spectrum[0]),
    };
    let psi0 = StateVector::new(
        eig_b.eigenvector(psi0_index).to_owned(),
        vec![spec_b.dim],
    )?;
    Ok(ModelInstance {
        spec_a,
        spec_b,
        pathways,
        h_a,
        h_b,
        h_int,
        h_total,
        eig_a,
        eig_b,
        eig_total,
        psi0,
        psi0_index,
        psi0_energy,
    })
}

/// The 128-level environment spectrum {0} U {1 + i/600 : i = -63..=63}.
pub fn paper_env_spectrum() -> Vec<f64> {
    let mut s = Vec::with_capacity(128);
    s.push(0.0);
    for i in -63i32..=63 {
        s.push(1.0 + i as f64 / 600.0);
    }
    s
}

/// Pauli X expressed in the eigenbasis of a two-level decomposition:
/// the operator exchanging the two eigenstates.
pub fn sigma_x_in_eigenbasis(eig: &SpectralDecomposition) -> Result<CMatrix> {
    if eig.dim() != 2 {
        return Err(Error::DimMismatch(format!(
            "sigma_x_in_eigenbasis needs a two-level system, got dim {}",
            eig.dim()
        )));
    }
    let v0 = eig.eigenvector(0);
    let v1 = eig.eigenvector(1);
    let mut out = CMatrix::zeros((2, 2));
    for i in 0..2 {
        for j in 0..2 {
            out[[i, j]] = v0[i] * v1[j].conj() + v1[i] * v0[j].conj();
        }
    }
    Ok(out)
}

/// Pauli X on environment qubit `qubit` (1-based), identity on the rest,
/// in the computational (tensor-product) basis of 2^n_qubits levels.
pub fn sigma_x_on_env_qubit(n_qubits: usize, qubit: usize) -> Result<CMatrix> {
    if qubit == 0 || qubit > n_qubits {
        return Err(Error::BadIndices(format!(
            "environment qubit {qubit} out of range 1..={n_qubits}"
        )));
    }
    let left = 1usize << (qubit - 1);
    let right = 1usize << (n_qubits - qubit);
    Ok(kron(&eye(left), &kron(&sigma_x(), &eye(right))))
}

/// The two-level + 7-qubit-environment model with any set of pathways,
/// each given as (coupling, environment qubit index).
///
/// A has spectrum {0, 1}; its coupling operator exchanges the two H_A
/// eigenstates. B has the 128-level spectrum of [`paper_env_spectrum`]
/// with a Haar-random eigenbasis; its coupling operators are Pauli X on
/// single environment qubits in the computational basis. psi0 is the
/// ground state of H_B.
pub fn paper_model_with_pathways(
    pathways: &[(f64, usize)],
    seed_a: u64,
    seed_b: u64,
) -> Result<ModelInstance> {
    let spec_a = SubsystemSpec::new(2, vec![0.0, 1.0], seed_a)?;
    let spec_b = SubsystemSpec::new(128, paper_env_spectrum(), seed_b)?;
    // hamiltonian_from_spectrum is deterministic, so building eig_a here to
    // express the exchange operator matches the basis assemble_model rebuilds.
    let (_, eig_a) = hamiltonian_from_spectrum(&spec_a)?;
    let op_a = sigma_x_in_eigenbasis(&eig_a)?;
    let mut pws = Vec::with_capacity(pathways.len());
    for &(c, qubit) in pathways {
        pws.push(PathwaySpec::new(
            c,
            1.0,
            op_a.clone(),
            sigma_x_on_env_qubit(7, qubit)?,
        )?);
    }
    assemble_model(spec_a, spec_b, pws, Psi0Selector::GroundB)
}

/// The single-pathway instance behind the reference figures: coupling `c`
/// on environment qubit 1.
pub fn paper_figure_model(c: f64, seed_a: u64, seed_b: u64) -> Result<ModelInstance> {
    paper_model_with_pathways(&[(c, 1)], seed_a, seed_b)
}

/// Maximally entangle a band of A eigenstates with a reference copy and
/// tensor on psi0: (1/sqrt N) sum_K |Kbar>|K>|psi0> on partition
/// [N, dim_A, dim_B].
pub fn initial_entangled_state(model: &ModelInstance, band: &[usize]) -> Result<StateVector> {
    if band.is_empty() {
        return Err(Error::InvalidArgument("empty band".into()));
    }
    let mut seen = band.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != band.len() {
        return Err(Error::BadIndices(format!("duplicate band indices {band:?}")));
    }
    if band.iter().any(|&k| k >= model.dim_a()) {
        return Err(Error::BadIndices(format!(
            "band {band:?} out of range for dim_A = {}",
            model.dim_a()
        )));
    }
    let n = band.len();
    let (da, db) = (model.dim_a(), model.dim_b());
    let weight = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let psi0 = model.psi0.amplitudes();
    let mut amps = CVector::zeros(n * da * db);
    for (j, &k) in band.iter().enumerate() {
        let v = model.eig_a.eigenvector(k);
        for a in 0..da {
            let w = weight * v[a];
            for b in 0..db {
                amps[(j * da + a) * db + b] = w * psi0[b];
            }
        }
    }
    StateVector::new(amps, vec![n, da, db])
}

// ---------------------------------------------------------------------------
// Model configuration files (JSON)

/// Spectrum of B: an explicit list, or the name of a built-in generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSpec {
    Named(String),
    Values(Vec<f64>),
}

/// A matrix entry in a config file: a real number or an [re, im] pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Real(f64),
    Complex([f64; 2]),
}

/// A coupling operator: a named builder or an inline matrix literal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(String),
    Matrix(Vec<Vec<MatrixEntry>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathwayConfig {
    pub c: f64,
    #[serde(rename = "energyScale", default = "default_energy_scale")]
    pub energy_scale: f64,
    #[serde(rename = "opA")]
    pub op_a: OperatorSpec,
    #[serde(rename = "opB")]
    pub op_b: OperatorSpec,
}

fn default_energy_scale() -> f64 {
    1.0
}

/// On-disk model description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "spectrumA")]
    pub spectrum_a: Vec<f64>,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(rename = "spectrumB")]
    pub spectrum_b: SpectrumSpec,
    pub pathways: Vec<PathwayConfig>,
    #[serde(rename = "seedA")]
    pub seed_a: u64,
    #[serde(rename = "seedB")]
    pub seed_b: u64,
    pub psi0: String,
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

fn matrix_from_literal(rows: &[Vec<MatrixEntry>], dim: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Config(format!(
            "inline matrix must be {dim}x{dim}"
        )));
    }
    let mut m = CMatrix::zeros((dim, dim));
    for (i, row) in rows.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            m[[i, j]] = match entry {
                MatrixEntry::Real(x) => C64::new(*x, 0.0),
                MatrixEntry::Complex([re, im]) => C64::new(*re, *im),
            };
        }
    }
    Ok(m)
}

fn resolve_operator(
    spec: &OperatorSpec,
    dim: usize,
    eig: &SpectralDecomposition,
) -> Result<CMatrix> {
    match spec {
        OperatorSpec::Matrix(rows) => matrix_from_literal(rows, dim),
        OperatorSpec::Named(name) => {
            if name == "sigmaX-eigenbasis" {
                return sigma_x_in_eigenbasis(eig);
            }
            if let Some(rest) = name.strip_prefix("sigmaX-on-env-qubit-") {
                let qubit: usize = rest
                    .parse()
                    .map_err(|_| Error::Config(format!("bad operator name {name:?}")))?;
                if !dim.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "{name:?} needs a power-of-two dimension, got {dim}"
                    )));
                }
                let n_qubits = dim.trailing_zeros() as usize;
                return sigma_x_on_env_qubit(n_qubits, qubit);
            }
            Err(Error::Config(format!("unknown operator name {name:?}")))
        }
    }
}

/// Construct a [`ModelInstance`] from a parsed configuration.
pub fn build_model(cfg: &ModelConfig) -> Result<ModelInstance> {
    let spec_a = SubsystemSpec::new(cfg.dim_a, cfg.spectrum_a.clone(), cfg.seed_a)?;
    let spectrum_b = match &cfg.spectrum_b {
        SpectrumSpec::Values(v) => v.clone(),
        SpectrumSpec::Named(name) if name == "paper-envB" => paper_env_spectrum(),
        SpectrumSpec::Named(name) => {
            return Err(Error::Config(format!("unknown spectrum generator {name:?}")))
        }
    };
    let spec_b = SubsystemSpec::new(cfg.dim_b, spectrum_b, cfg.seed_b)?;
    if cfg.psi0 != "groundB" {
        return Err(Error::Config(format!(
            "unknown psi0 selector {:?} (expected \"groundB\")",
            cfg.psi0
        )));
    }
    let (_, eig_a) = hamiltonian_from_spectrum(&spec_a)?;
    let (_, eig_b) = hamiltonian_from_spectrum(&spec_b)?;
    let mut pathways = Vec::with_capacity(cfg.pathways.len());
    for pc in &cfg.pathways {
        let op_a = resolve_operator(&pc.op_a, cfg.dim_a, &eig_a)?;
        let op_b = resolve_operator(&pc.op_b, cfg.dim_b, &eig_b)?;
        pathways.push(PathwaySpec::new(pc.c, pc.energy_scale, op_a, op_b)?);
    }
    assemble_model(spec_a, spec_b, pathways, Psi0Selector::GroundB)
}
