mod common;

use common::*;
use proptest::prelude::*;
use topicirt::irt::*;

fn params(ps: &[(f64, f64)]) -> Vec<ItemParams> {
    ps.iter().enumerate().map(|(i, &(a, b))| ItemParams::new(format!("i{i}"), a, b)).collect()
}

#[test]
fn log_marginal_matches_dense_grid() {
    let m = ResponseMatrix::from_strings(&["10", "01", "1."]).unwrap();
    let ps = [(1.4, -0.3), (0.8, 0.9)];
    let ll = log_marginal_likelihood(&m, &params(&ps), &QuadratureGrid::default()).unwrap();
    let oracle = dense_log_marginal(&rows_of(&m), &ps);
    assert!((ll - oracle).abs() < 1e-6, "{ll} vs {oracle}");
}

#[test]
fn adding_all_missing_model_changes_nothing() {
    let ps = params(&[(1.4, -0.3), (0.8, 0.9)]);
    let grid = QuadratureGrid::default();
    let a = log_marginal_likelihood(&ResponseMatrix::from_strings(&["10", "01"]).unwrap(), &ps, &grid).unwrap();
    let b = log_marginal_likelihood(&ResponseMatrix::from_strings(&["10", "01", ".."]).unwrap(), &ps, &grid).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn eap_matches_dense_grid_on_twenty_items() {
    let ps: Vec<(f64, f64)> = (0..20).map(|i| (0.5 + 0.1 * i as f64, -2.0 + 0.2 * i as f64)).collect();
    let row = "11101101100110100100";
    let cells: Vec<Cell> = row.chars().map(|c| Cell::from_correct(c == '1')).collect();
    let est = eap_ability("m", &cells, &params(&ps), &QuadratureGrid::default()).unwrap();
    let (mean, sd) = dense_eap(&cells, &ps);
    assert!((est.theta - mean).abs() < 1e-3, "{} vs {mean}", est.theta);
    assert!((est.se - sd).abs() < 1e-3, "{} vs {sd}", est.se);
}

#[test]
fn tiny_fit_reaches_grid_search_optimum() {
    let m = ResponseMatrix::from_strings(&["11", "11", "10", "01", "00", "00"]).unwrap();
    let fit = fit_2pl("t", &m, &FitSettings::default()).unwrap();
    let (_, oracle_ll) = grid_search_mml(&rows_of(&m), 2);
    assert!(fit.log_likelihood >= oracle_ll - 1e-3, "{} < {oracle_ll}", fit.log_likelihood);
    let ps: Vec<(f64, f64)> = fit.items.iter().map(|p| (p.a, p.b)).collect();
    let dense = dense_log_marginal(&rows_of(&m), &ps);
    assert!((dense - fit.log_likelihood).abs() < 1e-6);
}

#[test]
fn recovers_simulated_abilities() {
    let (thetas, items) = draw_population(80, 100, 2024);
    let m = simulate_matrix(&items, &thetas, 7).unwrap();
    let fit = fit_2pl("sim", &m, &FitSettings::default()).unwrap();
    assert!(fit.converged);
    let est: Vec<f64> = fit.abilities.iter().map(|a| a.theta).collect();
    assert!(pearson(&est, &thetas) >= 0.9);
}

#[test]
fn difficulty_error_shrinks_with_more_respondents() {
    // sampling error in b falls like 1/sqrt(models); 2,000 respondents pin it down
    let (thetas, items) = draw_population(2000, 100, 1);
    let m = simulate_matrix(&items, &thetas, 8).unwrap();
    let fit = fit_2pl("sim", &m, &FitSettings::default()).unwrap();
    let (bt, bh): (Vec<f64>, Vec<f64>) = items
        .iter()
        .zip(&fit.items)
        .filter(|(t, f)| t.b.abs() <= 2.5 && f.is_fitted())
        .map(|(t, f)| (t.b, f.b))
        .unzip();
    assert!(rmse(&bh, &bt) <= 0.1, "{}", rmse(&bh, &bt));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prob_correct_is_monotone_in_theta(a in -6.0f64..6.0, b in -5.0f64..5.0, t in -5.0f64..5.0, dt in 0.01f64..2.0) {
        let lo = prob_correct(a, b, t).unwrap();
        let hi = prob_correct(a, b, t + dt).unwrap();
        prop_assume!((a * (t + dt - b)).abs() < 30.0 && (a * (t - b)).abs() < 30.0);
        if a > 1e-3 { prop_assert!(hi > lo); }
        if a < -1e-3 { prop_assert!(hi < lo); }
        prop_assert_eq!(prob_correct(0.0, b, t).unwrap(), 0.5);
    }

    #[test]
    fn eap_never_drops_when_a_response_improves(
        ps in prop::collection::vec((0.2f64..3.0, -3.0f64..3.0), 1..12),
        pattern in prop::collection::vec(0u8..3, 12),
        flip in 0usize..12,
    ) {
        let items = params(&ps);
        let mut cells: Vec<Cell> = pattern[..ps.len()].iter().map(|v| match v {
            0 => Cell::Incorrect, 1 => Cell::Correct, _ => Cell::Missing,
        }).collect();
        let k = flip % ps.len();
        cells[k] = Cell::Incorrect;
        let grid = QuadratureGrid::default();
        let before = eap_ability("m", &cells, &items, &grid).unwrap();
        cells[k] = Cell::Correct;
        let after = eap_ability("m", &cells, &items, &grid).unwrap();
        prop_assert!(after.theta >= before.theta - 1e-12);
        prop_assert!(after.se > 0.0 && after.se <= grid.prior_sd() + 1e-12);
        let (lo, hi) = grid.span();
        prop_assert!(after.theta >= lo && after.theta <= hi);
    }

    #[test]
    fn e_step_masses_normalized_and_counts_bounded(
        ps in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..6),
        pattern in prop::collection::vec(0u8..3, 30),
    ) {
        let n_items = ps.len();
        let n_models = pattern.len() / n_items;
        let cells: Vec<Cell> = pattern[..n_models * n_items].iter().map(|v| match v {
            0 => Cell::Incorrect, 1 => Cell::Correct, _ => Cell::Missing,
        }).collect();
        let m = ResponseMatrix::new(
            (0..n_models).map(|i| format!("m{i}")).collect(),
            (0..n_items).map(|i| format!("i{i}")).collect(),
            cells,
        ).unwrap();
        let e = e_step(&m, &params(&ps), &QuadratureGrid::default()).unwrap();
        for model in 0..n_models {
            let s: f64 = e.model_posterior(model).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
        for (n, r) in e.expected_n.iter().zip(&e.expected_r) {
            prop_assert!(*r >= 0.0 && r <= n);
        }
    }

    #[test]
    fn standardize_is_affine_invariant(
        xs in prop::collection::vec(-10.0f64..10.0, 2..40),
        c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        d in -10.0f64..10.0,
    ) {
        prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3));
        let z = standardize(&xs).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| c * x + d).collect();
        let zm = standardize(&moved).unwrap();
        for (a, b) in z.iter().zip(&zm) {
            prop_assert!((c.signum() * a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn standardize_two_pass_oracle() {
    let (thetas, _) = draw_population(80, 0, 5);
    let z = standardize(&thetas).unwrap();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 1e-12);
    assert!((var.sqrt() - 1.0).abs() < 1e-12);
}

#[test]
fn likelihood_never_decreases_across_em_cycles() {
    for seed in 0..4 {
        let (thetas, items) = draw_population(30, 12, 100 + seed);
        let m = simulate_matrix(&items, &thetas, seed).unwrap();
        let fit = fit_2pl("t", &m, &FitSettings::default()).unwrap();
        for w in fit.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}
