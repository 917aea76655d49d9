//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers. Heavy Monte-Carlo criteria pin their seeds and
//! configurations here; nothing is left to later calibration.

mod common;

use common::{b1_nobg_dataset, counts_and_areas, direct_mle_b1_nobg};
use lognlogs::numerics::closed_form_loglik_nobg;
use lognlogs::seed::derive_seed;
use lognlogs::*;
use rayon::prelude::*;

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_distribution_suite() {
    let parameter_sets = [
        BrokenParetoParams::new(vec![1.2], vec![5e-17]).unwrap(),
        BrokenParetoParams::new(vec![0.5, 3.0], vec![1e-17, 5e-17]).unwrap(),
        BrokenParetoParams::new(vec![0.3, 1.0, 3.0], vec![1e-17, 8e-17, 1.8e-16]).unwrap(),
    ];
    let mut worst_roundtrip = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_ks = 0.0f64;
    for (i, params) in parameter_sets.iter().enumerate() {
        // cdf/quantile roundtrip across all segments
        for k in 1..=999 {
            let u = k as f64 / 1000.0;
            let x = params.quantile(u).unwrap();
            let back = params.quantile(params.cdf(x)).unwrap();
            let rel = (back - x).abs() / x;
            worst_roundtrip = worst_roundtrip.max(rel);
            assert!(rel <= 1e-12, "set {i}: roundtrip error {rel:.3e} at u={u}");
        }
        // pdf normalization: piecewise quadrature plus the analytic tail
        let tau = params.tau();
        let pieces = params.pieces();
        let mut total = 0.0;
        for j in 0..pieces {
            // nudge off the breakpoints so endpoint rounding cannot land on
            // the wrong side of the density's jump
            let lo = tau[j] * (1.0 + 1e-13);
            let hi = if j + 1 < pieces {
                tau[j + 1] * (1.0 - 1e-13)
            } else {
                tau[pieces - 1] * 1e6
            };
            let steps = 40_000;
            let (u_lo, u_hi) = (lo.ln(), hi.ln());
            let du = (u_hi - u_lo) / steps as f64;
            let f = |u: f64| {
                let x = u.exp();
                params.pdf(x) * x
            };
            let mut acc = f(u_lo) + f(u_hi);
            for s in 1..steps {
                acc += if s % 2 == 1 { 4.0 } else { 2.0 } * f(u_lo + s as f64 * du);
            }
            total += acc * du / 3.0;
        }
        total += params.survival(tau[pieces - 1] * 1e6);
        worst_norm = worst_norm.max((total - 1.0).abs());
        assert!((total - 1.0).abs() <= 1e-8, "set {i}: pdf mass {total}");

        // sampler KS distance at n = 1e5
        let n = 100_000;
        let mut xs = params.sample(n, &mut lognlogs::seed::stream(40 + i as u64, &[]));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = params.cdf(x);
                (f - k as f64 / n as f64).abs().max(((k + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0f64, f64::max);
        worst_ks = worst_ks.max(ks);
        assert!(ks < 0.01, "set {i}: KS distance {ks}");
    }
    println!(
        "acceptance criterion 1 (distribution suite): PASS \
         [roundtrip {worst_roundtrip:.2e}, |mass-1| {worst_norm:.2e}, KS {worst_ks:.4}]"
    );
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_mstep_correctness() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_pcg::Pcg64::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut instances = 0;
    while instances < 100 {
        let b = 1 + (rng.gen::<u64>() % 3) as usize;
        let mut beta = Vec::with_capacity(b);
        let mut tau = Vec::with_capacity(b);
        let mut t = 10f64.powf(-18.0 + 2.0 * rng.gen::<f64>());
        for j in 0..b {
            beta.push(0.3 + 4.0 * rng.gen::<f64>() + if j % 2 == 0 { 0.0 } else { 0.15 });
            tau.push(t);
            t *= 1.5 + 6.0 * rng.gen::<f64>();
        }
        let params = BrokenParetoParams::new(beta, tau).unwrap();
        let xs = params.sample(150 + (rng.gen::<u64>() % 300) as usize, &mut rng);
        // candidate breakpoints: τ_1 at the sample minimum, the rest at true
        // positions jittered; skip infeasible candidates (empty segments)
        let min_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut cand = vec![min_x];
        for j in 1..b {
            cand.push(params.tau()[j] * (0.8 + 0.4 * rng.gen::<f64>()));
        }
        if cand.windows(2).any(|w| w[1] <= w[0]) {
            continue;
        }
        let counts = match SegmentCounts::from_sample(&xs, &cand) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if counts.m.contains(&0) {
            continue;
        }
        let beta_hat = match beta_given_tau(&counts, &cand) {
            Ok(v) => v,
            Err(_) => continue,
        };
        instances += 1;

        for j in 0..b {
            // independent oracle: bisect the sign change of the per-slope
            // score computed from naive loops
            let nj = xs.iter().filter(|&&x| x >= cand[j]).count() as f64;
            let upper = if j + 1 < b {
                let nj1 = xs.iter().filter(|&&x| x >= cand[j + 1]).count() as f64;
                nj1 * cand[j + 1].ln()
            } else {
                0.0
            };
            let in_seg: Vec<f64> = xs
                .iter()
                .copied()
                .filter(|&x| x >= cand[j] && (j + 1 == b || x < cand[j + 1]))
                .collect();
            let mj = in_seg.len() as f64;
            let seg_logsum: f64 = in_seg.iter().map(|x| x.ln()).sum();
            let score = |bj: f64| nj * cand[j].ln() - upper + mj / bj - seg_logsum;
            let (mut lo, mut hi) = (1e-8, 1e6);
            for _ in 0..220 {
                let mid = 0.5 * (lo + hi);
                if score(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi);
            let rel = (beta_hat[j] - oracle).abs() / oracle.max(1.0);
            worst = worst.max(rel);
            assert!(rel <= 1e-8, "instance {instances} segment {j}: {rel:.2e}");
        }
    }

    // single-piece complete MLE equals the textbook Pareto MLE
    let params = BrokenParetoParams::new(vec![1.7], vec![3e-17]).unwrap();
    let xs = params.sample(5000, &mut rand_pcg::Pcg64::seed_from_u64(55));
    let fit = complete_mle(&xs, 1, &SimplexConfig::default()).unwrap();
    let min_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(fit.tau()[0], min_x);
    let textbook = xs.len() as f64 / xs.iter().map(|x| (x / min_x).ln()).sum::<f64>();
    let rel = (fit.beta()[0] - textbook).abs() / textbook;
    assert!(rel <= 1e-12, "textbook MLE mismatch {rel:.2e}");

    println!(
        "acceptance criterion 2 (M-step correctness): PASS \
         [worst slope error {worst:.2e} over 100 instances, textbook match {rel:.1e}]"
    );
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_3_em_vs_baseline() {
    let cfg = EmConfig { seed: 77, n_limit: 100, ..EmConfig::default() };
    let mut iter_pairs = Vec::new();
    let mut worst_gap = 0.0f64;
    for data_seed in [3u64, 9] {
        let data = b1_nobg_dataset(1.0, 5e-17, 100, 1e19, data_seed);
        let (ys, areas) = counts_and_areas(&data);
        let (_opt_theta, optimum) = direct_mle_b1_nobg(&data);
        let fits = [
            ("saem", saem_fit(&data, 1, &cfg).unwrap()),
            ("aaem", aaem_fit(&data, 1, &cfg).unwrap()),
            ("aem", aem_fit(&data, 1, &cfg).unwrap()),
            ("iem", iem_fit(&data, 1, &cfg).unwrap()),
        ];
        for (name, fit) in &fits {
            let ll = closed_form_loglik_nobg(&fit.theta_hat, &ys, &areas).unwrap();
            let gap = optimum - ll;
            worst_gap = worst_gap.max(gap);
            assert!(
                gap <= 0.5,
                "dataset {data_seed}, {name}: negative log-likelihood gap {gap:.3}"
            );
        }
        let iters = |name: &str| fits.iter().find(|(n, _)| *n == name).unwrap().1.iterations;
        assert!(
            iters("iem") <= iters("aem"),
            "dataset {data_seed}: iem took {} iterations vs aem {}",
            iters("iem"),
            iters("aem")
        );
        iter_pairs.push((data_seed, iters("iem"), iters("aem")));
    }
    println!(
        "acceptance criterion 3 (EM vs baseline): PASS \
         [worst gap {worst_gap:.3}, iem<=aem iterations {iter_pairs:?}]"
    );
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_4_power_posterior_accuracy() {
    let setting = SimSetting {
        params: BrokenParetoParams::new(vec![3.0], vec![1e-18]).unwrap(),
        n: 50,
        area: PerSource::Constant(1e19),
        background: PerSource::Constant(0.0),
        seed: 404,
    };
    let data = generate(&setting).unwrap().into_dataset();
    let (theta_hat, exact) = direct_mle_b1_nobg(&data);
    let errors: Vec<f64> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = PowerPosteriorConfig { n_grid: 20, c: 3.0, n_sim: 2000, n_burn: 400, seed };
            let est = power_posterior_loglik(&theta_hat, &data, &cfg).unwrap();
            est.value - exact
        })
        .collect();
    let worst = errors.iter().cloned().fold(0.0f64, |a, e| a.max(e.abs()));
    for (seed, err) in errors.iter().enumerate() {
        assert!(
            err.abs() <= 1.0,
            "seed {seed}: |power posterior - closed form| = {:.3}",
            err.abs()
        );
    }
    println!(
        "acceptance criterion 4 (power-posterior accuracy): PASS \
         [worst |error| {worst:.3} over 10 seeds]"
    );
}

// ----------------------------------------------------------- criteria 5 and 6

struct SelectionOutcome {
    bic_pick: usize,
    aic_pick: usize,
    beta1_at_2: Option<f64>,
}

fn run_selection_study(preset: &str, replications: u64) -> Vec<SelectionOutcome> {
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut setting = SimSetting::preset(preset, 0).unwrap();
            setting.seed = 90_000 + rep;
            let data = generate(&setting).unwrap().into_dataset();
            let em = EmConfig {
                seed: rep,
                n_sim: 500,
                n_burn: 125,
                n_limit: 40,
                theta_tol: 2.5e-3,
                ..EmConfig::default()
            };
            let pp = PowerPosteriorConfig {
                n_grid: 60,
                c: 3.0,
                n_sim: 1000,
                n_burn: 200,
                seed: derive_seed(rep, &[0x55]),
            };
            let report = select_b(&data, 4, &em, &pp).expect("selection should complete");
            SelectionOutcome {
                bic_pick: report.b_hat_bic,
                aic_pick: report.b_hat_aic,
                beta1_at_2: report
                    .candidates
                    .iter()
                    .find(|c| c.b == 2)
                    .map(|c| c.theta_hat.beta()[0]),
            }
        })
        .collect()
}

#[test]
fn criteria_5_and_6_selection_rates_and_rmse() {
    const REPS: u64 = 50;

    // setting 2: a clear break; BIC should find B = 2 almost always
    let outcomes2 = run_selection_study("setting2", REPS);
    let bic2 = outcomes2.iter().filter(|o| o.bic_pick == 2).count();
    let aic2 = outcomes2.iter().filter(|o| o.aic_pick == 2).count();
    assert!(
        bic2 * 10 >= (REPS as usize) * 9,
        "criterion 5: BIC found the break in only {bic2}/{REPS} replications"
    );
    assert!(
        aic2 <= bic2,
        "criterion 5: AIC ({aic2}) beat BIC ({bic2}) on setting 2"
    );

    // criterion 6 on the correctly selected replicates
    let betas: Vec<f64> = outcomes2
        .iter()
        .filter(|o| o.bic_pick == 2)
        .filter_map(|o| o.beta1_at_2)
        .collect();
    let mse = betas.iter().map(|b| (b - 0.5).powi(2)).sum::<f64>() / betas.len() as f64;
    let rel_rmse = mse.sqrt() / 0.5;
    assert!(
        rel_rmse <= 0.25,
        "criterion 6: relative RMSE of the first slope is {rel_rmse:.4}"
    );

    // setting 1: no break; BIC must beat AIC at saying so
    let outcomes1 = run_selection_study("setting1", REPS);
    let bic1 = outcomes1.iter().filter(|o| o.bic_pick == 1).count();
    let aic1 = outcomes1.iter().filter(|o| o.aic_pick == 1).count();
    assert!(
        bic1 > aic1,
        "criterion 5: BIC correct rate {bic1}/{REPS} does not exceed AIC {aic1}/{REPS}"
    );

    println!(
        "acceptance criterion 5 (selection rates): PASS \
         [setting2 BIC {bic2}/{REPS} AIC {aic2}/{REPS}; setting1 BIC {bic1}/{REPS} AIC {aic1}/{REPS}]"
    );
    println!(
        "acceptance criterion 6 (slope RMSE): PASS \
         [relative RMSE {rel_rmse:.4} over {} replicates]",
        betas.len()
    );
}

/// Extended, non-default study of the remaining experimental settings.
#[test]
#[ignore = "extended suite: run with --ignored"]
fn extended_selection_settings_3_and_4() {
    const REPS: u64 = 30;
    let outcomes3 = run_selection_study("setting3", REPS);
    let bic3 = outcomes3.iter().filter(|o| o.bic_pick == 2).count();
    assert!(
        bic3 * 10 >= (REPS as usize) * 7,
        "setting3: BIC correct in {bic3}/{REPS}"
    );
    let outcomes4 = run_selection_study("setting4", REPS);
    let bic4 = outcomes4.iter().filter(|o| o.bic_pick == 3).count();
    assert!(
        bic4 * 10 >= (REPS as usize) * 8,
        "setting4: BIC correct in {bic4}/{REPS}"
    );
    println!(
        "extended selection: PASS [setting3 BIC {bic3}/{REPS}, setting4 BIC {bic4}/{REPS}]"
    );
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_consistency() {
    // A is a free constant here; picking a bright detector keeps the
    // Monte-Carlo EM's finite-information floor (the support constraint on
    // τ̂ couples count noise into the slope, independent of n) well below
    // the statistical error, so the n^(-1/2) decay of the MLE is visible.
    let beta0 = 1.5;
    let medians: Vec<f64> = [100usize, 400, 1600]
        .iter()
        .map(|&n| {
            let mut errs: Vec<f64> = (0..20u64)
                .into_par_iter()
                .map(|rep| {
                    let data = b1_nobg_dataset(beta0, 5e-17, n, 1e21, 7000 + rep);
                    let cfg = EmConfig {
                        seed: derive_seed(rep, &[n as u64]),
                        n_sim: 600,
                        n_burn: 150,
                        n_limit: 40,
                        theta_tol: 2.5e-3,
                        ..EmConfig::default()
                    };
                    let fit = iem_fit(&data, 1, &cfg).expect("fit should complete");
                    (fit.theta_hat.beta()[0] - beta0).abs()
                })
                .collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            0.5 * (errs[9] + errs[10])
        })
        .collect();
    assert!(
        medians[1] < medians[0] && medians[2] < medians[1],
        "median |beta_hat - beta0| not decreasing: {medians:?}"
    );
    println!(
        "acceptance criterion 7 (consistency): PASS \
         [median errors {:.4} > {:.4} > {:.4} for n = 100, 400, 1600]",
        medians[0], medians[1], medians[2]
    );
}
