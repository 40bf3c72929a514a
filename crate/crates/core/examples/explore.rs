use entflow_core::experiment::{
    coupling_sweep, default_grid, paper_c_list, run_mi_series, GridSpec, Propagator,
};
use entflow_core::model::paper_figure_model;
use entflow_core::quantum::partial_trace;
use ndarray_linalg::{EigValsh, UPLO};
use std::time::Instant;

fn main() {
    let c = 1.0 / 400.0;
    let model = paper_figure_model(c, 11, 12).unwrap();
    let grid = default_grid(&model).unwrap();

    // profile the per-sample pieces
    let prop = Propagator::new(&model).unwrap();
    let t_probe = grid.t_max / 2.0;
    let t0 = Instant::now();
    for _ in 0..10 {
        let _ = prop.decay_probability(t_probe).unwrap();
    }
    println!("decay_probability: {:?}/call", t0.elapsed() / 10);
    let t0 = Instant::now();
    let psi = prop.tripartite_at(t_probe).unwrap();
    println!("tripartite_at: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let rho = partial_trace(&psi, &[0, 2]).unwrap();
    println!("partial_trace BAbar: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let _ = rho.matrix().eigvalsh(UPLO::Lower).unwrap();
    println!("eigvalsh(256): {:?}", t0.elapsed());
    let t0 = Instant::now();
    let rho_b = partial_trace(&psi, &[2]).unwrap();
    let _ = rho_b.matrix().eigvalsh(UPLO::Lower).unwrap();
    println!("rho_B + eigvalsh(128): {:?}", t0.elapsed());

    // dump the P/I curves on a coarse grid for inspection
    let coarse = GridSpec::new(2.5 * grid.t_max, 120).unwrap();
    let series = run_mi_series(&model, &coarse).unwrap();
    println!("t,P_numeric,P_perturbative,I_numeric");
    for j in (0..series.len()).step_by(3) {
        println!(
            "{:.0},{:.4},{:.4},{:.4}",
            series.t[j], series.p_numeric[j], series.p_perturbative[j], series.i_numeric[j]
        );
    }

    // sweep statistics across seeds
    for seed in 0u64..6 {
        let (sa, sb) = (100 + seed * 2, 101 + seed * 2);
        let sweep = coupling_sweep(
            |cc| paper_figure_model(cc, sa, sb),
            &paper_c_list(),
            0.8,
            None,
        )
        .unwrap();
        let valid: Vec<_> = sweep.rows.iter().filter(|r| r.valid).collect();
        let ks: Vec<f64> = valid
            .iter()
            .map(|r| 2.0 * std::f64::consts::LN_2 / (r.t_target * r.c * r.c))
            .collect();
        let kmin = ks.iter().cloned().fold(f64::MAX, f64::min);
        let kmax = ks.iter().cloned().fold(f64::MIN, f64::max);
        let kmean = ks.iter().sum::<f64>() / ks.len() as f64;
        let min_t = valid.iter().map(|r| r.t_target).fold(f64::MAX, f64::min);
        if let Some(fit) = &sweep.fit {
            println!(
                "seeds ({sa},{sb}): r2 = {:.5}, intercept/minT = {:+.3}, K spread = {:.3} ({:.1}..{:.1}), n_valid = {}",
                fit.r_squared,
                fit.intercept / min_t,
                (kmax - kmin) / kmean,
                kmin,
                kmax,
                valid.len()
            );
        }
    }
}
