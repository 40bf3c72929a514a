//! First-order perturbation theory for the interaction term: transition
//! amplitudes, decay probabilities, Fermi-Golden-Rule rates, the closed-form
//! two-level entropy model, and band-averaged reduced density matrices.
//!
//! Amplitudes follow the first-order form
//! A(t) = -2i M sin(t dE / 2) / dE * exp(i t dE / 2)
//! with M the interaction matrix element between unperturbed eigenstates and
//! dE the energy mismatch of the transition.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::ModelInstance;
use crate::quantum::{adjoint, CMatrix, CVector, C64, DensityMatrix};

/// |t dE| below this switches to the resonant limit sin(t dE / 2)/dE -> t/2.
pub const RESONANCE_PHASE_TOL: f64 = 1e-7;
/// First-order probabilities beyond this are flagged as out of the
/// perturbative regime.
pub const VALIDITY_THRESHOLD: f64 = 0.5;
/// Slack allowed on probability arguments of the closed-form model.
const PROBABILITY_SLACK: f64 = 1e-9;

/// Interaction matrix elements of one pathway in the unperturbed eigenbases.
struct PathwayElements {
    /// C = c * E.
    coefficient: f64,
    /// <K'| O_A |K> over A eigenstates.
    a_elems: CMatrix,
    /// <i| O_B |psi0> over B eigenstates.
    b_elems: CVector,
}

fn pathway_elements(model: &ModelInstance) -> Vec<PathwayElements> {
    let va = model.eig_a.eigenvectors();
    let vb = model.eig_b.eigenvectors();
    let va_h = adjoint(va);
    let vb_h = adjoint(vb);
    model
        .pathways
        .iter()
        .map(|pw| PathwayElements {
            coefficient: pw.full_coefficient(),
            a_elems: va_h.dot(&pw.op_a).dot(va),
            b_elems: vb_h.dot(&pw.op_b.dot(model.psi0.amplitudes())),
        })
        .collect()
}

fn matrix_element(elems: &[PathwayElements], k_final: usize, i_final: usize, k_initial: usize) -> C64 {
    elems
        .iter()
        .map(|e| e.a_elems[[k_final, k_initial]] * e.b_elems[i_final] * e.coefficient)
        .sum()
}

/// sin(t dE / 2) / dE with its resonant limit t/2.
fn sine_envelope(delta_e: f64, t: f64) -> f64 {
    if (t * delta_e).abs() < RESONANCE_PHASE_TOL {
        t / 2.0
    } else {
        (t * delta_e / 2.0).sin() / delta_e
    }
}

/// The full time-dependent amplitude factor multiplying the matrix element.
fn amplitude_kernel(delta_e: f64, t: f64) -> C64 {
    C64::new(0.0, -2.0) * sine_envelope(delta_e, t) * C64::from_polar(1.0, t * delta_e / 2.0)
}

/// 4 sin^2(t dE / 2) / dE^2, the squared modulus of the kernel.
fn probability_weight(delta_e: f64, t: f64) -> f64 {
    let s = sine_envelope(delta_e, t);
    4.0 * s * s
}

/// First-order amplitude for |K>|psi0> -> |K'>|i>.
///
/// Matrix elements are taken in the H_A and H_B eigenbases; at exact
/// resonance the analytic limit -i M t applies.
pub fn transition_amplitude(
    model: &ModelInstance,
    k_initial: usize,
    k_final: usize,
    i_final: usize,
    t: f64,
) -> C64 {
    let elems = pathway_elements(model);
    let delta_e = model.energy_a(k_final) + model.energy_b(i_final)
        - model.energy_a(k_initial)
        - model.psi0_energy;
    matrix_element(&elems, k_final, i_final, k_initial) * amplitude_kernel(delta_e, t)
}

/// Total first-order decay probability out of A eigenstate `k_initial`,
/// summed over final A states K' != K and all B states.
///
/// The returned flag is false once P exceeds the perturbative validity
/// threshold of 0.5.
pub fn decay_probability_perturbative(model: &ModelInstance, k_initial: usize, t: f64) -> (f64, bool) {
    let elems = pathway_elements(model);
    let e0 = model.psi0_energy;
    let ek = model.energy_a(k_initial);
    let mut p = 0.0;
    for k_final in 0..model.dim_a() {
        if k_final == k_initial {
            continue;
        }
        let ea = model.energy_a(k_final);
        for i_final in 0..model.dim_b() {
            let m = matrix_element(&elems, k_final, i_final, k_initial);
            let m2 = m.norm_sqr();
            if m2 == 0.0 {
                continue;
            }
            let delta_e = ea + model.energy_b(i_final) - ek - e0;
            p += m2 * probability_weight(delta_e, t);
        }
    }
    (p, p <= VALIDITY_THRESHOLD)
}

/// The sinc^2 kernel (1/2pi) sin^2(t dE/2) / (t dE/2)^2 that weights final
/// states within an energy band of width ~1/t around resonance.
pub fn band_projector_weight(delta_e: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "band projector weight needs t > 0, got {t}"
        )));
    }
    let x = t * delta_e / 2.0;
    let sinc2 = if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        let s = x.sin() / x;
        s * s
    };
    Ok(sinc2 / (2.0 * std::f64::consts::PI))
}

/// Median spacing of consecutive H_B levels times ten; for a dense band
/// this resolves the density of states while still averaging several
/// matrix elements.
pub fn default_fgr_window(model: &ModelInstance) -> f64 {
    let s = &model.spec_b.spectrum;
    let mut gaps: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return 1.0;
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = gaps[gaps.len() / 2];
    10.0 * median.max(f64::MIN_POSITIVE)
}

/// Fermi-Golden-Rule decay rate out of `k_initial`: 2 pi <|M|^2> rho(E),
/// with the matrix elements averaged over final states inside the energy
/// window around E_K + E_0 and rho the local density of those states.
pub fn fgr_rate(model: &ModelInstance, k_initial: usize, window: f64) -> Result<f64> {
    if window <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "FGR window must be positive, got {window}"
        )));
    }
    let elems = pathway_elements(model);
    let center = model.energy_a(k_initial) + model.psi0_energy;
    let mut sum_m2 = 0.0;
    let mut count = 0usize;
    let mut nearest = f64::INFINITY;
    for k_final in 0..model.dim_a() {
        if k_final == k_initial {
            continue;
        }
        for i_final in 0..model.dim_b() {
            let mismatch =
                (model.energy_a(k_final) + model.energy_b(i_final) - center).abs();
            if mismatch <= window / 2.0 {
                sum_m2 += matrix_element(&elems, k_final, i_final, k_initial).norm_sqr();
                count += 1;
            } else {
                nearest = nearest.min(mismatch);
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyWindow {
            window,
            center,
            nearest,
        });
    }
    let mean_m2 = sum_m2 / count as f64;
    let density = count as f64 / window;
    Ok(2.0 * std::f64::consts::PI * mean_m2 * density)
}

fn check_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

// w ln(w/2) with the w -> 0 limit of zero.
fn half_term(w: f64) -> f64 {
    if w > 0.0 {
        w * (w / 2.0).ln()
    } else {
        0.0
    }
}

/// Closed-form entropies (S_A, S_B) in nats of the decayed-qubit model at
/// decay probability `p`.
pub fn qubit_model_entropies(p: f64) -> Result<(f64, f64)> {
    let p = check_probability(p)?;
    let s_a = -0.5 * (half_term(1.0 + p) + half_term(1.0 - p));
    let q = 1.0 - p / 2.0;
    let h = p / 2.0;
    let mut s_b = 0.0;
    if q > 0.0 {
        s_b -= q * q.ln();
    }
    if h > 0.0 {
        s_b -= h * h.ln();
    }
    Ok((s_a, s_b))
}

/// Closed-form I(B, reference) = S_B - S_A + log 2 of the decayed-qubit
/// model; runs from 0 at p = 0 to 2 log 2 at p = 1.
pub fn qubit_model_mutual_information(p: f64) -> Result<f64> {
    let (s_a, s_b) = qubit_model_entropies(p)?;
    Ok(s_b - s_a + std::f64::consts::LN_2)
}

/// The closed-form model evaluated along a time grid, with out-of-range
/// probabilities clipped into [0, 1] and the clipping recorded.
#[derive(Debug, Clone)]
pub struct QubitModelCurve {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub s_a: Vec<f64>,
    pub s_b: Vec<f64>,
    pub mi: Vec<f64>,
    /// Number of samples that had to be clipped into [0, 1].
    pub clipped: usize,
    /// Largest excursion outside [0, 1] seen among clipped samples.
    pub max_excursion: f64,
}

pub fn qubit_model_curve(t: &[f64], p: &[f64]) -> Result<QubitModelCurve> {
    if t.len() != p.len() {
        return Err(Error::DimMismatch(format!(
            "{} times vs {} probabilities",
            t.len(),
            p.len()
        )));
    }
    let mut curve = QubitModelCurve {
        t: t.to_vec(),
        p: Vec::with_capacity(p.len()),
        s_a: Vec::with_capacity(p.len()),
        s_b: Vec::with_capacity(p.len()),
        mi: Vec::with_capacity(p.len()),
        clipped: 0,
        max_excursion: 0.0,
    };
    for &raw in p {
        let clamped = raw.clamp(0.0, 1.0);
        if clamped != raw {
            curve.clipped += 1;
            curve.max_excursion = curve.max_excursion.max((raw - clamped).abs());
        }
        let (s_a, s_b) = qubit_model_entropies(clamped)?;
        curve.p.push(clamped);
        curve.s_a.push(s_a);
        curve.s_b.push(s_b);
        curve.mi.push(s_b - s_a + std::f64::consts::LN_2);
    }
    Ok(curve)
}

/// First-order amplitudes A_{K'i,K0}(t) for every initial state K of a band.
///
/// Per initial K the entries form a dim_A x dim_B matrix over final states
/// (K', i); the row K' = K is identically zero (staying put is carried by
/// the survival amplitude, and single-factor changes are dropped at this
/// order).
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub t: f64,
    /// Initial A eigenstate indices.
    pub initial: Vec<usize>,
    /// One (dim_A x dim_B) amplitude matrix per initial state.
    pub entries: Vec<CMatrix>,
    /// Energy mismatch dE for every final state, same shape as `entries`.
    pub delta_e: Vec<Array2<f64>>,
    /// Eigenindex of psi0 within the B spectrum.
    pub psi0_index: usize,
}

impl AmplitudeTable {
    pub fn compute(model: &ModelInstance, initial: &[usize], t: f64) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::InvalidArgument("empty initial band".into()));
        }
        if initial.iter().any(|&k| k >= model.dim_a()) {
            return Err(Error::BadIndices(format!(
                "initial band {initial:?} out of range for dim_A = {}",
                model.dim_a()
            )));
        }
        let elems = pathway_elements(model);
        let (da, db) = (model.dim_a(), model.dim_b());
        let e0 = model.psi0_energy;
        let mut entries = Vec::with_capacity(initial.len());
        let mut delta_e = Vec::with_capacity(initial.len());
        for &k in initial {
            let ek = model.energy_a(k);
            let mut amp = CMatrix::zeros((da, db));
            let mut de = Array2::<f64>::zeros((da, db));
            for k_final in 0..da {
                for i_final in 0..db {
                    let d = model.energy_a(k_final) + model.energy_b(i_final) - ek - e0;
                    de[[k_final, i_final]] = d;
                    if k_final != k {
                        amp[[k_final, i_final]] =
                            matrix_element(&elems, k_final, i_final, k) * amplitude_kernel(d, t);
                    }
                }
            }
            entries.push(amp);
            delta_e.push(de);
        }
        Ok(Self {
            t,
            initial: initial.to_vec(),
            entries,
            delta_e,
            psi0_index: model.psi0_index,
        })
    }

    /// Total first-order transition probability out of the band state at
    /// position `idx`.
    pub fn total_probability(&self, idx: usize) -> f64 {
        self.entries[idx].iter().map(|a| a.norm_sqr()).sum()
    }

    /// True when the summed probability exceeds unity, i.e. the first-order
    /// expansion has broken down for this initial state.
    pub fn flagged(&self, idx: usize) -> bool {
        self.total_probability(idx) > 1.0 + PROBABILITY_SLACK
    }

    pub fn dim_a(&self) -> usize {
        self.entries[0].nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.entries[0].ncols()
    }
}

/// A band of initial A states decaying into a band of final A states.
#[derive(Debug, Clone)]
pub struct BandSpec {
    pub initial: Vec<usize>,
    pub final_states: Vec<usize>,
    pub energy_window: f64,
}

impl BandSpec {
    pub fn n(&self) -> usize {
        self.initial.len()
    }

    pub fn n_prime(&self) -> usize {
        self.final_states.len()
    }

    pub fn overlapping(&self) -> bool {
        self.initial
            .iter()
            .any(|k| self.final_states.contains(k))
    }
}

/// First-order reduced density matrices of a maximally entangled band,
/// renormalized to unit trace.
#[derive(Debug, Clone)]
pub struct BandDensities {
    /// On A, in the H_A eigenbasis.
    pub rho_a: DensityMatrix,
    /// On B, in the H_B eigenbasis.
    pub rho_b: DensityMatrix,
    /// |1 - trace| before renormalization.
    pub trace_deficit_a: f64,
    pub trace_deficit_b: f64,
    /// True when some survival weight 1 - P_K had to be clamped at zero.
    pub clamped: bool,
}

/// Assemble rho_A and rho_B from a table of first-order amplitudes:
/// rho_A = (1/N) sum_K [ |B_K|^2 |K><K| + sum_i |psi_iK><psi_iK| ] and the
/// analogous expression on B, with |B_K|^2 = 1 - P_K.
pub fn band_reduced_densities(amps: &AmplitudeTable, band: &BandSpec) -> Result<BandDensities> {
    for k in &band.initial {
        if !amps.initial.contains(k) {
            return Err(Error::BadIndices(format!(
                "band initial state {k} missing from the amplitude table {:?}",
                amps.initial
            )));
        }
    }
    let n = band.initial.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty band".into()));
    }
    let (da, db) = (amps.dim_a(), amps.dim_b());
    let weight = 1.0 / n as f64;
    let mut rho_a = CMatrix::zeros((da, da));
    let mut rho_b = CMatrix::zeros((db, db));
    let mut clamped = false;
    for k in &band.initial {
        let idx = amps.initial.iter().position(|x| x == k).unwrap();
        let m = &amps.entries[idx];
        let p_k = amps.total_probability(idx);
        let mut survival = 1.0 - p_k;
        if survival < 0.0 {
            survival = 0.0;
            clamped = true;
        }
        // sum_i |psi_iK><psi_iK| = M M†  (rows K', columns i)
        let mmh = m.dot(&adjoint(m));
        rho_a = rho_a + mmh.mapv(|z| z * weight);
        rho_a[[*k, *k]] += C64::new(weight * survival, 0.0);
        // sum_K' |psi_K'K><psi_K'K| = M^T conj(M)  (over B indices)
        let mtm = m.t().dot(&m.mapv(|z| z.conj()));
        rho_b = rho_b + mtm.mapv(|z| z * weight);
        rho_b[[amps.psi0_index, amps.psi0_index]] += C64::new(weight * survival, 0.0);
    }
    let trace_a: f64 = (0..da).map(|i| rho_a[[i, i]].re).sum();
    let trace_b: f64 = (0..db).map(|i| rho_b[[i, i]].re).sum();
    if trace_a <= 0.0 || trace_b <= 0.0 {
        return Err(Error::InvalidArgument(
            "band density matrices have non-positive trace".into(),
        ));
    }
    rho_a.mapv_inplace(|z| z / trace_a);
    rho_b.mapv_inplace(|z| z / trace_b);
    Ok(BandDensities {
        rho_a: DensityMatrix::new(rho_a, vec![da], vec![1])?,
        rho_b: DensityMatrix::new(rho_b, vec![db], vec![2])?,
        trace_deficit_a: (1.0 - trace_a).abs(),
        trace_deficit_b: (1.0 - trace_b).abs(),
        clamped,
    })
}

/// Band-averaged information transfer rate estimate.
///
/// Returns `(2 log(N/N') * rate, rate)` where `rate` is the mean over the
/// initial band of the first-order transition rate P_K(t)/t into the final
/// band, i.e. 2 pi t <H_I P_{1/t} H_I> averaged uniformly over initial
/// states.
pub fn band_rate_estimate(
    model: &ModelInstance,
    band: &BandSpec,
    t: f64,
) -> Result<(f64, f64)> {
    if t <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "band rate estimate needs t > 0, got {t}"
        )));
    }
    if band.n_prime() == 0 {
        return Err(Error::InvalidArgument("empty final band (N' = 0)".into()));
    }
    if band.n() == 0 {
        return Err(Error::InvalidArgument("empty initial band".into()));
    }
    if band
        .initial
        .iter()
        .chain(&band.final_states)
        .any(|&k| k >= model.dim_a())
    {
        return Err(Error::BadIndices(format!(
            "band indices out of range for dim_A = {}",
            model.dim_a()
        )));
    }
    let elems = pathway_elements(model);
    let e0 = model.psi0_energy;
    let mut rate_sum = 0.0;
    for &k in &band.initial {
        let ek = model.energy_a(k);
        let mut p = 0.0;
        for &k_final in &band.final_states {
            if k_final == k {
                continue;
            }
            let ea = model.energy_a(k_final);
            for i_final in 0..model.dim_b() {
                let m2 = matrix_element(&elems, k_final, i_final, k).norm_sqr();
                if m2 == 0.0 {
                    continue;
                }
                let delta_e = ea + model.energy_b(i_final) - ek - e0;
                p += m2 * probability_weight(delta_e, t);
            }
        }
        rate_sum += p / t;
    }
    let rate = rate_sum / band.n() as f64;
    let info_rate = 2.0 * (band.n() as f64 / band.n_prime() as f64).ln() * rate;
    Ok((info_rate, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        assemble_model, paper_figure_model, sigma_x_in_eigenbasis, sigma_x_on_env_qubit,
        hamiltonian_from_spectrum, PathwaySpec, Psi0Selector, SubsystemSpec,
    };
    use crate::quantum::von_neumann_entropy;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    /// Two-level system coupled to a four-level environment.
    fn toy_model(c: f64) -> ModelInstance {
        let spec_a = SubsystemSpec::new(2, vec![0.0, 1.0], 17).unwrap();
        let spec_b = SubsystemSpec::new(4, vec![0.0, 0.9, 1.0, 1.1], 18).unwrap();
        let (_, eig_a) = hamiltonian_from_spectrum(&spec_a).unwrap();
        let op_a = sigma_x_in_eigenbasis(&eig_a).unwrap();
        let pw = PathwaySpec::new(c, 1.0, op_a, sigma_x_on_env_qubit(2, 1).unwrap()).unwrap();
        assemble_model(spec_a, spec_b, vec![pw], Psi0Selector::GroundB).unwrap()
    }

    // First-order Dyson integral -i M \int_0^t ds exp(i s dE), evaluated by
    // Simpson quadrature; independent of the closed-form kernel.
    fn dyson_oracle(model: &ModelInstance, k0: usize, k1: usize, i1: usize, t: f64) -> C64 {
        let elems = pathway_elements(model);
        let m = matrix_element(&elems, k1, i1, k0);
        let delta_e = model.energy_a(k1) + model.energy_b(i1)
            - model.energy_a(k0)
            - model.psi0_energy;
        let n = 20_000usize; // even
        let h = t / n as f64;
        let f = |s: f64| C64::from_polar(1.0, s * delta_e);
        let mut acc = f(0.0) + f(t);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(j as f64 * h) * w;
        }
        let integral = acc * (h / 3.0);
        C64::new(0.0, -1.0) * m * integral
    }

    #[test]
    fn amplitude_zero_at_t_zero_and_zero_coupling() {
        let model = toy_model(0.05);
        assert_eq!(transition_amplitude(&model, 1, 0, 2, 0.0).norm(), 0.0);
        let free = toy_model(0.0);
        assert_eq!(transition_amplitude(&free, 1, 0, 2, 3.0).norm(), 0.0);
    }

    #[test]
    fn amplitude_matches_dyson_quadrature() {
        let model = toy_model(0.03);
        for &t in &[0.1, 1.0, 10.0] {
            for k0 in 0..2 {
                let k1 = 1 - k0;
                for i1 in 0..4 {
                    let closed = transition_amplitude(&model, k0, k1, i1, t);
                    let quad = dyson_oracle(&model, k0, k1, i1, t);
                    assert!(
                        (closed - quad).norm() <= 1e-8,
                        "t={t} K={k0}->{k1} i={i1}: {closed} vs {quad}"
                    );
                }
            }
        }
    }

    #[test]
    fn decay_probability_vanishes_without_coupling() {
        let free = toy_model(0.0);
        for &t in &[0.0, 1.0, 50.0] {
            assert_eq!(decay_probability_perturbative(&free, 1, t).0, 0.0);
        }
    }

    #[test]
    fn decay_probability_short_time_quadratic_law() {
        let model = toy_model(0.04);
        // alpha = sum over final states of |M|^2
        let elems = pathway_elements(&model);
        let mut alpha = 0.0;
        for i in 0..model.dim_b() {
            alpha += matrix_element(&elems, 0, i, 1).norm_sqr();
        }
        // Richardson extrapolation of P(t)/t^2 as t -> 0
        let f = |t: f64| decay_probability_perturbative(&model, 1, t).0 / (t * t);
        let (t1, t2) = (1e-3, 5e-4);
        let extrapolated = (4.0 * f(t2) - f(t1)) / 3.0;
        assert!(
            (extrapolated - alpha).abs() <= 1e-6 * alpha,
            "{extrapolated} vs {alpha}"
        );
    }

    #[test]
    fn decay_probability_validity_flag() {
        let model = toy_model(0.3);
        // strong coupling saturates the first-order sum quickly
        let mut flagged = false;
        for j in 1..400 {
            let (p, valid) = decay_probability_perturbative(&model, 1, j as f64 * 0.5);
            assert_eq!(valid, p <= VALIDITY_THRESHOLD);
            flagged |= !valid;
        }
        assert!(flagged, "expected the validity flag to trip at strong coupling");
    }

    #[test]
    fn band_projector_peak_and_zero() {
        let t = 3.0;
        let peak = band_projector_weight(0.0, t).unwrap();
        assert!((peak - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        // first zero at t dE / 2 = pi
        let zero = band_projector_weight(2.0 * std::f64::consts::PI / t, t).unwrap();
        assert!(zero.abs() < 1e-25);
        assert!(band_projector_weight(0.1, 0.0).is_err());
        assert!(band_projector_weight(0.1, -1.0).is_err());
    }

    #[test]
    fn band_projector_integrates_to_inverse_time() {
        // \int d(dE) weight(dE, t) = 1/t, by Simpson quadrature
        for &t in &[0.7, 4.0] {
            let cutoff = 4000.0 / t;
            let n = 400_000usize;
            let h = 2.0 * cutoff / n as f64;
            let f = |x: f64| band_projector_weight(x, t).unwrap();
            let mut acc = f(-cutoff) + f(cutoff);
            for j in 1..n {
                let w = if j % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(-cutoff + j as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!(
                (integral - 1.0 / t).abs() <= 0.01 / t,
                "t={t}: integral {integral} vs {}",
                1.0 / t
            );
        }
    }

    #[test]
    fn fgr_rate_scales_with_coupling_squared() {
        let window = default_fgr_window(&toy_model(0.0));
        let r1 = fgr_rate(&toy_model(0.01), 1, window).unwrap();
        let r2 = fgr_rate(&toy_model(0.02), 1, window).unwrap();
        assert!((r2 / r1 - 4.0).abs() < 1e-10, "ratio {}", r2 / r1);
    }

    #[test]
    fn fgr_rate_empty_window_reports_nearest_level() {
        let model = toy_model(0.01);
        // upward transitions out of the ground state are off-resonant by at
        // least 1, so a narrow window around E = 0 is empty
        let err = fgr_rate(&model, 0, 1e-6).unwrap_err();
        match err {
            Error::EmptyWindow { window, nearest, .. } => {
                assert_eq!(window, 1e-6);
                assert!((nearest - 1.0).abs() < 1e-12, "nearest {nearest}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn paper_model_fgr_window_default() {
        let model = paper_figure_model(1.0 / 400.0, 1, 2).unwrap();
        assert!((default_fgr_window(&model) - 10.0 / 600.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_entropies_endpoints() {
        let (s_a, s_b) = qubit_model_entropies(0.0).unwrap();
        assert!((s_a - LN2).abs() < 1e-12);
        assert_eq!(s_b, 0.0);
        let (s_a, s_b) = qubit_model_entropies(1.0).unwrap();
        assert!(s_a.abs() < 1e-12);
        assert!((s_b - LN2).abs() < 1e-12);
    }

    #[test]
    fn qubit_entropies_half_decay() {
        // both closed forms reduce to -(3/4)ln(3/4) - (1/4)ln(1/4)
        let expected = 0.5623351446188083;
        let (s_a, s_b) = qubit_model_entropies(0.5).unwrap();
        assert!((s_a - expected).abs() < 1e-12);
        assert!((s_b - expected).abs() < 1e-12);
    }

    #[test]
    fn qubit_entropies_reject_out_of_range() {
        assert!(qubit_model_entropies(-1e-6).is_err());
        assert!(qubit_model_entropies(1.0 + 1e-6).is_err());
        // the 1e-9 slack is accepted and clamped
        assert!(qubit_model_entropies(-1e-10).is_ok());
        assert!(qubit_model_entropies(1.0 + 1e-10).is_ok());
    }

    #[test]
    fn qubit_mutual_information_endpoints() {
        assert!(qubit_model_mutual_information(0.0).unwrap().abs() < 1e-12);
        let full = qubit_model_mutual_information(1.0).unwrap();
        assert!((full - 2.0 * LN2).abs() < 1e-12);
        let half = qubit_model_mutual_information(0.5).unwrap();
        assert!((half - LN2).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_qubit_mi_strictly_increasing(p1 in 0.0f64..1.0, dp in 1e-6f64..0.5) {
            let p2 = (p1 + dp).min(1.0);
            prop_assume!(p2 > p1);
            let i1 = qubit_model_mutual_information(p1).unwrap();
            let i2 = qubit_model_mutual_information(p2).unwrap();
            prop_assert!(i2 > i1, "I({p2}) = {i2} <= I({p1}) = {i1}");
        }
    }

    #[test]
    fn amplitude_table_at_t_zero_gives_initial_densities() {
        let model = toy_model(0.05);
        let amps = AmplitudeTable::compute(&model, &[0, 1], 0.0).unwrap();
        let band = BandSpec {
            initial: vec![0, 1],
            final_states: vec![0],
            energy_window: default_fgr_window(&model),
        };
        let bd = band_reduced_densities(&amps, &band).unwrap();
        // rho_A = I/2 on the band
        for i in 0..2 {
            assert!((bd.rho_a.matrix()[[i, i]].re - 0.5).abs() < 1e-14);
        }
        assert!(bd.rho_a.matrix()[[0, 1]].norm() < 1e-14);
        // rho_B = |psi0><psi0| in the eigenbasis
        assert!((bd.rho_b.matrix()[[model.psi0_index, model.psi0_index]].re - 1.0).abs() < 1e-14);
        assert!(von_neumann_entropy(&bd.rho_b) < 1e-12);
        assert_eq!(bd.trace_deficit_a, 0.0);
        assert!(!bd.clamped);
    }

    #[test]
    fn band_densities_specialize_to_qubit_model() {
        // Hand-built amplitude pattern of the decayed-qubit model: only
        // |1>|psi0> -> |0>|i != psi0> transitions carry weight.
        let (da, db, p) = (2usize, 6usize, 0.37f64);
        let mut m1 = CMatrix::zeros((da, db));
        let per = (p / 4.0).sqrt();
        for i in 1..5 {
            m1[[0, i]] = C64::new(per, 0.0);
        }
        let amps = AmplitudeTable {
            t: 1.0,
            initial: vec![0, 1],
            entries: vec![CMatrix::zeros((da, db)), m1],
            delta_e: vec![Array2::zeros((da, db)), Array2::zeros((da, db))],
            psi0_index: 0,
        };
        let band = BandSpec {
            initial: vec![0, 1],
            final_states: vec![0],
            energy_window: 1.0,
        };
        let bd = band_reduced_densities(&amps, &band).unwrap();
        let s_a = von_neumann_entropy(&bd.rho_a);
        let s_b = von_neumann_entropy(&bd.rho_b);
        let (want_a, want_b) = qubit_model_entropies(p).unwrap();
        assert!((s_a - want_a).abs() < 1e-12, "{s_a} vs {want_a}");
        assert!((s_b - want_b).abs() < 1e-12, "{s_b} vs {want_b}");
    }

    #[test]
    fn band_rate_estimate_edges() {
        let model = toy_model(0.02);
        let window = default_fgr_window(&model);
        // N = N' makes the information component vanish
        let band = BandSpec {
            initial: vec![0, 1],
            final_states: vec![0, 1],
            energy_window: window,
        };
        let (info, rate) = band_rate_estimate(&model, &band, 5.0).unwrap();
        assert_eq!(info, 0.0);
        assert!(rate > 0.0);
        // empty final band
        let empty = BandSpec {
            initial: vec![1],
            final_states: vec![],
            energy_window: window,
        };
        assert!(band_rate_estimate(&model, &empty, 5.0).is_err());
    }

    #[test]
    fn band_rate_scales_with_summed_couplings() {
        let spec = |s: f64| {
            let spec_a = SubsystemSpec::new(2, vec![0.0, 1.0], 17).unwrap();
            let spec_b = SubsystemSpec::new(4, vec![0.0, 0.9, 1.0, 1.1], 18).unwrap();
            let (_, eig_a) = hamiltonian_from_spectrum(&spec_a).unwrap();
            let op_a = sigma_x_in_eigenbasis(&eig_a).unwrap();
            let pw1 = PathwaySpec::new(
                0.02 * s,
                1.0,
                op_a.clone(),
                sigma_x_on_env_qubit(2, 1).unwrap(),
            )
            .unwrap();
            let pw2 = PathwaySpec::new(
                0.05 * s,
                1.0,
                op_a,
                sigma_x_on_env_qubit(2, 2).unwrap(),
            )
            .unwrap();
            assemble_model(spec_a, spec_b, vec![pw1, pw2], Psi0Selector::GroundB).unwrap()
        };
        let band = BandSpec {
            initial: vec![1],
            final_states: vec![0],
            energy_window: 1.0,
        };
        let (_, r1) = band_rate_estimate(&spec(1.0), &band, 3.0).unwrap();
        let (_, r3) = band_rate_estimate(&spec(3.0), &band, 3.0).unwrap();
        assert!((r3 / r1 - 9.0).abs() < 1e-9, "ratio {}", r3 / r1);
    }

    #[test]
    fn survival_probability_complements_decay() {
        // 1 - sum |A|^2 stays in [0, 1] while the flag is unset
        let model = toy_model(0.02);
        for j in 1..60 {
            let t = j as f64 * 2.0;
            let amps = AmplitudeTable::compute(&model, &[1], t).unwrap();
            let p = amps.total_probability(0);
            if !amps.flagged(0) {
                let survival = 1.0 - p;
                assert!((0.0..=1.0).contains(&survival), "t={t}: survival {survival}");
            }
        }
    }
}
