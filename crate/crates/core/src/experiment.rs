//! Experiment harness: exact-evolution time series, decay-time extraction,
//! coupling sweeps with linear fits, and the two-pathway additivity check.
//!
//! Exact dynamics evolve branch states |K>|psi0> with the diagonalized
//! total Hamiltonian; the entangled tripartite state is assembled from the
//! branches, with the reference copy evolving trivially.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{initial_entangled_state, paper_model_with_pathways, ModelInstance};
use crate::perturb::{
    decay_probability_perturbative, default_fgr_window, fgr_rate, qubit_model_mutual_information,
};
use crate::quantum::{
    evolve, mutual_information, partial_trace, von_neumann_entropy, CVector, StateVector,
};

/// Uniform time grid from 0 to `t_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub samples: usize,
}

impl GridSpec {
    pub fn new(t_max: f64, samples: usize) -> Result<Self> {
        let grid = Self { t_max, samples };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid t_max must be positive and finite, got {}",
                self.t_max
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|j| self.t_max * j as f64 / (n - 1) as f64)
            .collect()
    }
}

pub const DEFAULT_SAMPLES: usize = 400;

/// Grid covering the expected decay transition: 400 samples out to
/// 1.5 |ln 0.2| / rate, with the rate estimated by Fermi's Golden Rule for
/// the highest A eigenstate.
pub fn default_grid(model: &ModelInstance) -> Result<GridSpec> {
    let k = model.dim_a() - 1;
    let rate = fgr_rate(model, k, default_fgr_window(model))?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "golden-rule rate {rate} gives no decay time scale; pass an explicit grid"
        )));
    }
    GridSpec::new(1.5 * 0.2f64.ln().abs() / rate, DEFAULT_SAMPLES)
}

/// Provenance of a time series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub seed_a: u64,
    pub seed_b: u64,
    pub couplings: Vec<f64>,
    pub grid: GridSpec,
}

/// Sampled observables along a time grid. `p_*` columns are decay
/// probabilities, `i_*` mutual informations I(B, reference) in nats, and
/// `s_a`/`s_b` subsystem entropies of the entangled run in nats.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub p_numeric: Vec<f64>,
    pub p_perturbative: Vec<f64>,
    pub i_numeric: Vec<f64>,
    pub i_model: Vec<f64>,
    pub s_a: Vec<f64>,
    pub s_b: Vec<f64>,
    pub meta: Option<SeriesMeta>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Exact-evolution engine for one model: branch states |K>|psi0> evolved
/// with the diagonalized total Hamiltonian.
pub struct Propagator<'m> {
    model: &'m ModelInstance,
    branches: Vec<StateVector>,
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m ModelInstance) -> Result<Self> {
        let (da, db) = (model.dim_a(), model.dim_b());
        let psi0 = model.psi0.amplitudes();
        let mut branches = Vec::with_capacity(da);
        for k in 0..da {
            let v = model.eig_a.eigenvector(k);
            let mut amps = CVector::zeros(da * db);
            for a in 0..da {
                for b in 0..db {
                    amps[a * db + b] = v[a] * psi0[b];
                }
            }
            branches.push(StateVector::new(amps, vec![da, db])?);
        }
        Ok(Self { model, branches })
    }

    fn excited_index(&self) -> usize {
        self.model.dim_a() - 1
    }

    /// Branch |K>|psi0> evolved to time t.
    pub fn branch_at(&self, k: usize, t: f64) -> Result<StateVector> {
        evolve(&self.branches[k], &self.model.eig_total, t)
    }

    /// Population of A eigenstate `k` within a state on [dim_A, dim_B].
    fn a_population(&self, state: &StateVector, k: usize) -> f64 {
        let (da, db) = (self.model.dim_a(), self.model.dim_b());
        let v = self.model.eig_a.eigenvector(k);
        let amps = state.amplitudes();
        let mut pop = 0.0;
        for b in 0..db {
            let mut overlap = crate::quantum::C64::new(0.0, 0.0);
            for a in 0..da {
                overlap += v[a].conj() * amps[a * db + b];
            }
            pop += overlap.norm_sqr();
        }
        pop
    }

    /// P(t) = 1 - <excited projector> from exact evolution of the excited
    /// branch alone.
    pub fn decay_probability(&self, t: f64) -> Result<f64> {
        let k = self.excited_index();
        let phi = self.branch_at(k, t)?;
        Ok(1.0 - self.a_population(&phi, k))
    }

    /// The maximally entangled tripartite state at time t, on partition
    /// [dim_A, dim_A, dim_B]; the reference factor does not evolve.
    pub fn tripartite_at(&self, t: f64) -> Result<StateVector> {
        let (da, db) = (self.model.dim_a(), self.model.dim_b());
        let weight = 1.0 / (da as f64).sqrt();
        let mut amps = CVector::zeros(da * da * db);
        for j in 0..da {
            let phi = self.branch_at(j, t)?;
            for (x, z) in phi.amplitudes().iter().enumerate() {
                amps[j * da * db + x] = z * weight;
            }
        }
        StateVector::new(amps, vec![da, da, db])
    }

    /// Joint population of (reference excited, A excited) in the entangled
    /// run; exactly (1 - P)/2 for a two-level A by unitarity of the branch
    /// evolution.
    pub fn excited_branch_population(&self, t: f64) -> Result<f64> {
        let (da, db) = (self.model.dim_a(), self.model.dim_b());
        let k = self.excited_index();
        let psi = self.tripartite_at(t)?;
        let v = self.model.eig_a.eigenvector(k);
        let amps = psi.amplitudes();
        let mut pop = 0.0;
        for b in 0..db {
            let mut overlap = crate::quantum::C64::new(0.0, 0.0);
            for a in 0..da {
                overlap += v[a].conj() * amps[(k * da + a) * db + b];
            }
            pop += overlap.norm_sqr();
        }
        Ok(pop)
    }
}

/// Sanity check that the initial entangled state matches the tripartite
/// assembly at t = 0.
pub fn initial_tripartite(model: &ModelInstance) -> Result<StateVector> {
    let band: Vec<usize> = (0..model.dim_a()).collect();
    initial_entangled_state(model, &band)
}

fn run_series(model: &ModelInstance, grid: &GridSpec) -> Result<TimeSeries> {
    grid.validate()?;
    let prop = Propagator::new(model)?;
    let k_exc = model.dim_a() - 1;
    let qubit = model.dim_a() == 2;
    let times = grid.times();
    let mut series = TimeSeries {
        t: times.clone(),
        p_numeric: Vec::with_capacity(times.len()),
        p_perturbative: Vec::with_capacity(times.len()),
        i_numeric: Vec::with_capacity(times.len()),
        i_model: Vec::with_capacity(times.len()),
        s_a: Vec::with_capacity(times.len()),
        s_b: Vec::with_capacity(times.len()),
        meta: Some(SeriesMeta {
            seed_a: model.spec_a.seed,
            seed_b: model.spec_b.seed,
            couplings: model.pathways.iter().map(|p| p.coupling).collect(),
            grid: *grid,
        }),
    };
    for &t in &times {
        let p_num = prop.decay_probability(t)?;
        series.p_numeric.push(p_num);
        series
            .p_perturbative
            .push(decay_probability_perturbative(model, k_exc, t).0);
        let psi = prop.tripartite_at(t)?;
        series
            .s_a
            .push(von_neumann_entropy(&partial_trace(&psi, &[1])?));
        series
            .s_b
            .push(von_neumann_entropy(&partial_trace(&psi, &[2])?));
        series
            .i_numeric
            .push(mutual_information(&psi, &[2], &[0])?);
        let i_model = if qubit {
            qubit_model_mutual_information(p_num.clamp(0.0, 1.0))?
        } else {
            f64::NAN
        };
        series.i_model.push(i_model);
    }
    Ok(series)
}

/// Decay-probability series: exact P(t) from evolving the excited branch
/// next to its first-order estimate, plus the entangled-run entropy and
/// mutual-information columns on the same grid.
pub fn run_decay_series(model: &ModelInstance, grid: &GridSpec) -> Result<TimeSeries> {
    run_series(model, grid)
}

/// Mutual-information series: exact I(B, reference)(t) from the evolved
/// tripartite state next to the closed-form model evaluated on the exact
/// numeric P(t).
pub fn run_mi_series(model: &ModelInstance, grid: &GridSpec) -> Result<TimeSeries> {
    run_series(model, grid)
}

/// First time at which the exact decay probability crosses `target`,
/// located on the grid and refined by bisection (on exact evolution, not
/// interpolation) to a relative precision of 1e-4.
pub fn find_decay_time(model: &ModelInstance, target: f64, grid: &GridSpec) -> Result<f64> {
    if !(0.0 < target && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target probability must lie in (0, 1), got {target}"
        )));
    }
    grid.validate()?;
    let prop = Propagator::new(model)?;
    let times = grid.times();
    let mut max_p = f64::NEG_INFINITY;
    let mut prev_t = times[0];
    let mut prev_p = prop.decay_probability(prev_t)?;
    max_p = max_p.max(prev_p);
    let mut bracket = None;
    for &t in &times[1..] {
        let p = prop.decay_probability(t)?;
        max_p = max_p.max(p);
        if prev_p < target && p >= target {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
        prev_p = p;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::TargetNeverReached { target, max_p })?;
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if prop.decay_probability(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Rows whose derived grid turns out too short retry with a doubled span a
// few times before the row is declared unreachable.
fn find_decay_time_extended(
    model: &ModelInstance,
    target: f64,
    grid: &GridSpec,
    retries: usize,
) -> Result<f64> {
    let mut attempt = *grid;
    let mut last = Error::TargetNeverReached {
        target,
        max_p: f64::NAN,
    };
    for _ in 0..=retries {
        match find_decay_time(model, target, &attempt) {
            Ok(t) => return Ok(t),
            Err(e @ Error::TargetNeverReached { .. }) => {
                last = e;
                attempt.t_max *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Ordinary-least-squares fit of a decay-time scaling line.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 2 log 2 / slope: the dimensionless rate constant implied by a fit of
    /// decay time against inverse coupling squared, in units of the pathway
    /// energy scale.
    pub fitted_k: f64,
}

/// Least-squares line through (x, y) with the standard r^2.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<RateFit> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch(format!(
            "{} x values vs {} y values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "linear fit needs at least two points".into(),
        ));
    }
    let n = x.len() as f64;
    let x_mean = x.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - x_mean).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| (u - x_mean) * (v - y_mean))
        .sum();
    let x_scale: f64 = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if sxx <= f64::EPSILON * x_scale {
        return Err(Error::InvalidArgument(
            "degenerate fit: x values are all equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - (slope * u + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        fitted_k: 2.0 * std::f64::consts::LN_2 / slope,
    })
}

/// One coupling in a sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub inv_c_squared: f64,
    /// Decay time, NaN when the target was never reached.
    pub t_target: f64,
    pub valid: bool,
}

/// Decay times against couplings plus the linear fit over valid rows.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub target: f64,
    pub rows: Vec<SweepRow>,
    pub fit: Option<RateFit>,
}

/// The coupling list of the reference sweep: 1/500 + i/6000 for i = 1..=10.
pub fn paper_c_list() -> Vec<f64> {
    (1..=10).map(|i| 1.0 / 500.0 + i as f64 / 6000.0).collect()
}

/// Measure the decay time at each coupling and fit it against 1/c^2.
///
/// The same model builder (and therefore the same Haar seeds) serves every
/// row, isolating the coupling dependence. With no explicit grid each row
/// derives its own from the golden-rule rate and extends it a few times if
/// the target is missed; rows that still never reach the target are marked
/// invalid and excluded from the fit. Rows run in parallel and are returned
/// sorted by coupling.
pub fn coupling_sweep<F>(
    build: F,
    c_list: &[f64],
    target: f64,
    grid: Option<&GridSpec>,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<ModelInstance> + Sync,
{
    if c_list.is_empty() {
        return Err(Error::InvalidArgument("empty coupling list".into()));
    }
    if c_list.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidArgument(
            "sweep couplings must all be positive".into(),
        ));
    }
    let mut rows = c_list
        .par_iter()
        .map(|&c| -> Result<SweepRow> {
            let model = build(c)?;
            let found = match grid {
                Some(g) => find_decay_time(&model, target, g),
                None => match default_grid(&model) {
                    Ok(g) => find_decay_time_extended(&model, target, &g, 2),
                    Err(e) => Err(e),
                },
            };
            let row = match found {
                Ok(t) => SweepRow {
                    c,
                    inv_c_squared: 1.0 / (c * c),
                    t_target: t,
                    valid: true,
                },
                Err(Error::TargetNeverReached { .. }) | Err(Error::EmptyWindow { .. }) => {
                    SweepRow {
                        c,
                        inv_c_squared: 1.0 / (c * c),
                        t_target: f64::NAN,
                        valid: false,
                    }
                }
                Err(e) => return Err(e),
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.valid)
        .map(|r| r.inv_c_squared)
        .collect();
    let ys: Vec<f64> = rows.iter().filter(|r| r.valid).map(|r| r.t_target).collect();
    let fit = if xs.len() >= 2 {
        linear_fit(&xs, &ys).ok()
    } else {
        None
    };
    Ok(SweepResult { target, rows, fit })
}

/// Outcome of the two-pathway additivity comparison: inverse decay times
/// should add over independent pathways.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdditivityReport {
    pub c1: f64,
    pub c2: f64,
    pub target: f64,
    pub t_single_1: f64,
    pub t_single_2: f64,
    pub t_combined: f64,
    pub valid_1: bool,
    pub valid_2: bool,
    pub valid_combined: bool,
    /// 1/T_1 + 1/T_2 with unreachable runs contributing zero.
    pub rate_sum: f64,
    pub rate_combined: f64,
    /// rate_combined / rate_sum.
    pub ratio: f64,
}

/// Compare the combined decay rate of two pathways on different environment
/// qubits against the sum of their single-pathway rates.
pub fn pathway_additivity_check(
    c1: f64,
    c2: f64,
    seed_a: u64,
    seed_b: u64,
    target: f64,
) -> Result<AdditivityReport> {
    let combined = paper_model_with_pathways(&[(c1, 1), (c2, 2)], seed_a, seed_b)?;
    let single_1 = paper_model_with_pathways(&[(c1, 1)], seed_a, seed_b)?;
    let single_2 = paper_model_with_pathways(&[(c2, 2)], seed_a, seed_b)?;
    let combined_grid = default_grid(&combined)?;
    let measure = |model: &ModelInstance| -> Result<(f64, bool)> {
        let grid = default_grid(model).unwrap_or(combined_grid);
        match find_decay_time_extended(model, target, &grid, 2) {
            Ok(t) => Ok((t, true)),
            Err(Error::TargetNeverReached { .. }) => Ok((f64::NAN, false)),
            Err(e) => Err(e),
        }
    };
    let (t_combined, valid_combined) = measure(&combined)?;
    let (t_single_1, valid_1) = measure(&single_1)?;
    let (t_single_2, valid_2) = measure(&single_2)?;
    let rate = |t: f64, valid: bool| if valid { 1.0 / t } else { 0.0 };
    let rate_sum = rate(t_single_1, valid_1) + rate(t_single_2, valid_2);
    let rate_combined = rate(t_combined, valid_combined);
    Ok(AdditivityReport {
        c1,
        c2,
        target,
        t_single_1,
        t_single_2,
        t_combined,
        valid_1,
        valid_2,
        valid_combined,
        rate_sum,
        rate_combined,
        ratio: rate_combined / rate_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        assemble_model, hamiltonian_from_spectrum, sigma_x_in_eigenbasis, sigma_x_on_env_qubit,
        PathwaySpec, Psi0Selector, SubsystemSpec,
    };

    fn toy_model(c: f64) -> ModelInstance {
        let spec_a = SubsystemSpec::new(2, vec![0.0, 1.0], 17).unwrap();
        let spec_b = SubsystemSpec::new(4, vec![0.0, 0.9, 1.0, 1.1], 18).unwrap();
        let (_, eig_a) = hamiltonian_from_spectrum(&spec_a).unwrap();
        let op_a = sigma_x_in_eigenbasis(&eig_a).unwrap();
        let pw = PathwaySpec::new(c, 1.0, op_a, sigma_x_on_env_qubit(2, 1).unwrap()).unwrap();
        assemble_model(spec_a, spec_b, vec![pw], Psi0Selector::GroundB).unwrap()
    }

    #[test]
    fn grid_times_cover_range() {
        let grid = GridSpec::new(10.0, 5).unwrap();
        let t = grid.times();
        assert_eq!(t.len(), 5);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[4], 10.0);
        assert!(GridSpec::new(0.0, 5).is_err());
        assert!(GridSpec::new(1.0, 1).is_err());
    }

    #[test]
    fn series_without_coupling_never_decays() {
        let model = toy_model(0.0);
        let grid = GridSpec::new(30.0, 16).unwrap();
        let series = run_decay_series(&model, &grid).unwrap();
        for (&p_num, &p_pert) in series.p_numeric.iter().zip(&series.p_perturbative) {
            assert!(p_num.abs() <= 1e-12, "numeric leak {p_num}");
            assert_eq!(p_pert, 0.0);
        }
    }

    #[test]
    fn series_starts_at_zero() {
        let model = toy_model(0.08);
        let grid = GridSpec::new(20.0, 12).unwrap();
        let series = run_mi_series(&model, &grid).unwrap();
        assert!(series.p_numeric[0].abs() <= 1e-12);
        assert!(series.i_numeric[0].abs() <= 1e-9);
        assert!(series.i_model[0].abs() <= 1e-12);
        assert!((series.s_a[0] - std::f64::consts::LN_2).abs() <= 1e-9);
        assert!(series.s_b[0].abs() <= 1e-9);
    }

    #[test]
    fn dual_decay_definitions_agree() {
        let model = toy_model(0.07);
        let prop = Propagator::new(&model).unwrap();
        for &t in &[0.0, 1.3, 6.0, 23.0] {
            let p = prop.decay_probability(t).unwrap();
            let pop = prop.excited_branch_population(t).unwrap();
            assert!(
                (p - (1.0 - 2.0 * pop)).abs() <= 1e-10,
                "t={t}: P={p} vs 1-2pop={}",
                1.0 - 2.0 * pop
            );
        }
    }

    #[test]
    fn tripartite_matches_initial_entangled_state() {
        let model = toy_model(0.05);
        let prop = Propagator::new(&model).unwrap();
        let from_prop = prop.tripartite_at(0.0).unwrap();
        let direct = initial_tripartite(&model).unwrap();
        for (a, b) in from_prop
            .amplitudes()
            .iter()
            .zip(direct.amplitudes().iter())
        {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn find_decay_time_unreachable_reports_max() {
        let model = toy_model(0.0);
        let grid = GridSpec::new(30.0, 10).unwrap();
        match find_decay_time(&model, 0.8, &grid) {
            Err(Error::TargetNeverReached { target, max_p }) => {
                assert_eq!(target, 0.8);
                assert!(max_p.abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn find_decay_time_validates_target() {
        let model = toy_model(0.05);
        let grid = GridSpec::new(30.0, 10).unwrap();
        assert!(find_decay_time(&model, 0.0, &grid).is_err());
        assert!(find_decay_time(&model, 1.0, &grid).is_err());
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_two_points() {
        let fit = linear_fit(&[0.0, 1.0], &[3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_degenerate_x() {
        assert!(linear_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn linear_fit_matches_normal_equations() {
        // independent route: raw normal equations instead of centered sums
        let x: Vec<f64> = (0..40).map(|i| 0.3 + i as f64 * 0.17).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| 1.7 * v - 0.9 + ((i * 2654435761) % 1000) as f64 / 5000.0)
            .collect();
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - slope).abs() <= 1e-12 * slope.abs());
        assert!((fit.intercept - intercept).abs() <= 1e-12);
    }

    #[test]
    fn sweep_parametrization_slope_is_unit_free() {
        // synthetic T = K / c^2 rows fit to slope K and zero intercept for
        // any uniform rescaling of the coupling list
        let k = 0.05;
        for scale in [1.0, 3.0] {
            let c_list: Vec<f64> = (1..=6).map(|i| scale * (0.002 + i as f64 * 1e-4)).collect();
            let x: Vec<f64> = c_list.iter().map(|c| 1.0 / (c * c)).collect();
            let y: Vec<f64> = x.iter().map(|v| k * v).collect();
            let fit = linear_fit(&x, &y).unwrap();
            assert!((fit.slope - k).abs() < 1e-12);
            assert!(fit.intercept.abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_rejects_bad_couplings() {
        let build = |c: f64| Ok(toy_model(c));
        assert!(coupling_sweep(build, &[], 0.5, None).is_err());
        assert!(coupling_sweep(build, &[0.0], 0.5, None).is_err());
        assert!(coupling_sweep(build, &[-0.1], 0.5, None).is_err());
    }

    #[test]
    fn sweep_marks_unreachable_rows_invalid() {
        // an explicit short grid so the target cannot be reached
        let build = |c: f64| Ok(toy_model(c));
        let grid = GridSpec::new(1e-3, 4).unwrap();
        let result = coupling_sweep(build, &[0.01, 0.02], 0.9, Some(&grid)).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!(result.rows.iter().all(|r| !r.valid));
        assert!(result.fit.is_none());
    }
}
