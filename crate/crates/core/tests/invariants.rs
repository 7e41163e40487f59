use proptest::prelude::*;

use wormchain::analytics::{kp_mean_sq_position, kp_tangent_correlation};
use wormchain::chain::{frc_msd_oracle, sample_frc, FrcConfig};
use wormchain::estimators::report::ComparisonReport;
use wormchain::estimators::ensemble::{Accumulator, SummaryEntry};
use wormchain::estimators::{
    path_rng, run_ensemble, CoMoments, EnsembleSummary, Model, Moments, Observable, Probe,
};
use wormchain::kp::{simulate_kp, KpConfig};
use wormchain::so3;

fn observables() -> Vec<Observable> {
    vec![
        Observable::Mean(Probe::SquaredPosition { s: 1.0 }),
        Observable::Mean(Probe::TangentDot { s: 0.0, t: 0.5 }),
        Observable::Variance(Probe::PositionComponent { s: 1.0, axis: 0 }),
        Observable::Covariance(
            Probe::PositionComponent { s: 0.5, axis: 0 },
            Probe::PositionComponent { s: 1.0, axis: 0 },
        ),
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

fn assert_summaries_close(a: &EnsembleSummary, b: &EnsembleSummary) {
    assert_eq!(a.n_paths, b.n_paths);
    for i in 0..a.entries.len() {
        let (x, y) = (a.estimate(i), b.estimate(i));
        assert!(close(x.value, y.value, 1e-10), "{x:?} vs {y:?}");
        assert!(close(x.stderr, y.stderr, 1e-10), "{x:?} vs {y:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frc_constraints_hold(n in 1usize..400, a in 0.01f64..10.0, theta in 0.001f64..3.1, seed: u64) {
        let cfg = FrcConfig::raw(n, a, theta).unwrap();
        let chain = sample_frc(&cfg, &mut path_rng(seed, 0)).unwrap();
        prop_assert_eq!(chain.beads()[0], [0.0; 3]);
        prop_assert_eq!(chain.bond(1), [0.0, 0.0, a]);
        for k in 1..=n {
            let b = chain.bond(k);
            prop_assert!((so3::norm(&b) - a).abs() <= 1e-11 * a);
            if k > 1 {
                let prev = chain.bond(k - 1);
                let angle = so3::norm(&so3::cross(&prev, &b)).atan2(so3::dot(&prev, &b));
                prop_assert!((angle - theta).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn kp_paths_stay_on_the_sphere(ell_p in 0.01f64..100.0, len in 0.1f64..5.0, seed: u64) {
        let cfg = KpConfig::new(len, ell_p, Some(300)).unwrap();
        let path = simulate_kp(&cfg, &mut path_rng(seed, 1)).unwrap();
        prop_assert_eq!(path.positions()[0], [0.0; 3]);
        prop_assert_eq!(path.tangents()[0].get(), so3::E3);
        for (z, q) in path.frames().iter().zip(path.tangents()) {
            prop_assert!(z.orthonormality_defect() <= 1e-10);
            prop_assert!((so3::norm(&q.get()) - 1.0).abs() <= 1e-10);
        }
        let end = path.positions().last().unwrap();
        prop_assert!(so3::norm(end) <= len * (1.0 + 1e-12));
    }

    #[test]
    fn summary_merge_matches_whole(xs in prop::collection::vec(-5.0f64..5.0, 4..200), cuts in prop::collection::vec(0usize..200, 3)) {
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin() + 0.2 * x).collect();
        let whole = summary_of(&xs, &ys);
        let mut cuts: Vec<usize> = cuts.iter().map(|c| c % xs.len()).collect();
        cuts.sort_unstable();
        let bounds: Vec<usize> = std::iter::once(0).chain(cuts).chain(std::iter::once(xs.len())).collect();
        let parts: Vec<EnsembleSummary> = bounds
            .windows(2)
            .map(|w| summary_of(&xs[w[0]..w[1]], &ys[w[0]..w[1]]))
            .collect();
        let mut forward = parts[0].clone();
        for p in &parts[1..] { forward.merge(p).unwrap(); }
        let mut backward = parts[parts.len() - 1].clone();
        for p in parts.iter().rev().skip(1) { backward.merge(p).unwrap(); }
        assert_summaries_close(&forward, &whole);
        assert_summaries_close(&backward, &whole);
    }

    #[test]
    fn worker_count_does_not_change_summary(seed: u64, n_paths in 2usize..300, workers in 2usize..9) {
        let model = Model::Frc(FrcConfig::raw(16, 0.1, 0.4).unwrap());
        let obs = [
            Observable::Mean(Probe::SquaredPosition { s: 1.6 }),
            Observable::Variance(Probe::PositionComponent { s: 0.8, axis: 1 }),
        ];
        let one = run_ensemble(&model, n_paths, &obs, seed, Some(1)).unwrap();
        let many = run_ensemble(&model, n_paths, &obs, seed, Some(workers)).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn pass_flag_is_reproducible(est in -10.0f64..10.0, se in 0.0f64..2.0, oracle in -10.0f64..10.0, thr in 0.5f64..6.0) {
        let r = ComparisonReport::z_test("x", None, None, est, se, oracle, thr);
        prop_assert_eq!(r.pass, r.evaluate());
        if se > 1e-6 {
            prop_assert_eq!(r.pass, ((est - oracle) / se).abs() <= thr);
        }
    }

    #[test]
    fn closed_forms_are_consistent(ell_p in 1e-3f64..1e3, t in 0.0f64..10.0, lag in 0.0f64..10.0) {
        let c = kp_tangent_correlation(ell_p, t, t + lag);
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert_eq!(c, kp_tangent_correlation(ell_p, t + lag, t));
        let m = kp_mean_sq_position(ell_p, t);
        prop_assert!(m >= 0.0 && m <= t * t * (1.0 + 1e-12));
        prop_assert!(m <= ell_p * t * (1.0 + 1e-12));
    }

    #[test]
    fn frc_msd_is_bounded_by_rod(n in 1usize..2000, theta in 0.01f64..3.1) {
        let cfg = FrcConfig::raw(n, 1.0, theta).unwrap();
        let m = frc_msd_oracle(&cfg);
        prop_assert!(m > 0.0);
        if n == 1 {
            prop_assert!((m - 1.0).abs() < 1e-12);
        }
        prop_assert!(m <= (n * n) as f64 * (1.0 + 1e-12));
    }
}

fn summary_of(xs: &[f64], ys: &[f64]) -> EnsembleSummary {
    let mut m = Moments::new();
    let mut c = CoMoments::new();
    for (x, y) in xs.iter().zip(ys) {
        m.push(*x);
        c.push(*x, *y);
    }
    let obs = observables();
    let (mean, cov) = (obs[0], obs[3]);
    EnsembleSummary {
        model: Model::Kp(KpConfig::new(1.0, 1.0, Some(2)).unwrap()),
        n_paths: xs.len() as u64,
        entries: vec![
            SummaryEntry { observable: mean, acc: Accumulator::Moments(m) },
            SummaryEntry { observable: cov, acc: Accumulator::CoMoments(c) },
        ],
    }
}
