//! Verification suites: Monte Carlo estimates against closed forms.

use log::warn;

use crate::analytics::{
    hard_rod_fluctuation_cov, kp_mean_sq_position, kp_tangent_correlation, random_coil_cov,
};
use crate::chain::{frc_bond_correlation_oracle, frc_msd_oracle, msd_closed_form, FrcConfig};
use crate::error::{invalid, Result};
use crate::kp::KpConfig;

use super::ensemble::{run_ensemble, EnsembleSummary, Model, Observable, Probe};
use super::report::ComparisonReport;

/// Seed perturbation used for the single rerun after a failed suite.
pub const RERUN_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub n_paths: usize,
    pub seed: u64,
    pub threshold: f64,
    pub workers: Option<usize>,
}

/// Reports of a suite together with the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<ComparisonReport>,
    pub seed_used: u64,
    pub attempts: u32,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs `suite` with `seed`; on any failed comparison runs it once more with
/// `seed ^ RERUN_SEED_MIX` and keeps the second result.
pub fn with_rerun<F>(seed: u64, mut suite: F) -> Result<SuiteOutcome>
where
    F: FnMut(u64) -> Result<Vec<ComparisonReport>>,
{
    let reports = suite(seed)?;
    if reports.iter().all(|r| r.pass) {
        return Ok(SuiteOutcome {
            reports,
            seed_used: seed,
            attempts: 1,
        });
    }
    let retry = seed ^ RERUN_SEED_MIX;
    Ok(SuiteOutcome {
        reports: suite(retry)?,
        seed_used: retry,
        attempts: 2,
    })
}

fn kp_config(summary: &EnsembleSummary) -> Result<KpConfig> {
    match summary.model {
        Model::Kp(c) => Ok(c),
        Model::Frc(_) => Err(invalid("expected a Kratky-Porod ensemble")),
    }
}

/// Compares the ensemble mean of `Q_s · Q_t` with `e^{−2|t−s|/ℓp}`.
pub fn estimate_tangent_correlation(
    summary: &EnsembleSummary,
    s: f64,
    t: f64,
    threshold: f64,
) -> Result<ComparisonReport> {
    let cfg = kp_config(summary)?;
    let grid = summary.model.grid();
    let (_, s) = grid.snap(s)?;
    let (_, t) = grid.snap(t)?;
    let est = summary.find(&Observable::Mean(Probe::TangentDot { s, t }))?;
    Ok(ComparisonReport::z_test(
        "tangent_correlation",
        Some(s),
        Some(t),
        est.value,
        est.stderr,
        kp_tangent_correlation(cfg.ell_p(), s, t),
        threshold,
    ))
}

/// Compares the ensemble mean of `|R_t|²` with the closed form.
pub fn estimate_msd(summary: &EnsembleSummary, t: f64, threshold: f64) -> Result<ComparisonReport> {
    let cfg = kp_config(summary)?;
    let (_, t) = summary.model.grid().snap(t)?;
    let est = summary.find(&Observable::Mean(Probe::SquaredPosition { s: t }))?;
    Ok(ComparisonReport::z_test(
        "mean_sq_position",
        None,
        Some(t),
        est.value,
        est.stderr,
        kp_mean_sq_position(cfg.ell_p(), t),
        threshold,
    ))
}

/// Tangent-pair arclengths checked by the correlation suite.
pub fn correlation_pairs(length: f64) -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.25 * length),
        (0.0, 0.5 * length),
        (0.0, length),
        (0.25 * length, 0.75 * length),
        (0.5 * length, 0.5 * length),
    ]
}

/// Arclengths checked by the mean-square-position suite.
pub fn msd_points(length: f64) -> Vec<f64> {
    vec![0.0, 0.25 * length, 0.5 * length, length]
}

/// Correlation and mean-square-position reports from one shared ensemble.
pub fn kp_oracle_suite(
    cfg: &KpConfig,
    opts: &RunOptions,
) -> Result<(Vec<ComparisonReport>, Vec<ComparisonReport>)> {
    let length = cfg.contour_length();
    let pairs = correlation_pairs(length);
    let points = msd_points(length);
    let mut obs: Vec<Observable> = pairs
        .iter()
        .map(|&(s, t)| Observable::Mean(Probe::TangentDot { s, t }))
        .collect();
    obs.extend(points.iter().map(|&s| Observable::Mean(Probe::SquaredPosition { s })));
    let summary = run_ensemble(&Model::Kp(*cfg), opts.n_paths, &obs, opts.seed, opts.workers)?;
    let corr = pairs
        .iter()
        .map(|&(s, t)| estimate_tangent_correlation(&summary, s, t, opts.threshold))
        .collect::<Result<Vec<_>>>()?;
    let msd = points
        .iter()
        .map(|&t| estimate_msd(&summary, t, opts.threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok((corr, msd))
}

/// Exact-oracle checks for the discrete chain: bond correlations at the
/// given lags, `|R_N|²`, and the vanishing transverse mean of `R_N`.
pub fn frc_oracle_suite(cfg: &FrcConfig, lags: &[usize], opts: &RunOptions) -> Result<Vec<ComparisonReport>> {
    let a = cfg.bond_length();
    let n = cfg.n_bonds();
    let lags: Vec<usize> = lags.iter().copied().filter(|&k| k < n).collect();
    let end = cfg.n_bonds() as f64 * a;
    let mut obs: Vec<Observable> = lags
        .iter()
        .map(|&k| {
            Observable::Mean(Probe::TangentDot {
                s: a,
                t: (1 + k) as f64 * a,
            })
        })
        .collect();
    obs.push(Observable::Mean(Probe::SquaredPosition { s: end }));
    obs.push(Observable::Mean(Probe::PositionComponent { s: end, axis: 0 }));
    obs.push(Observable::Mean(Probe::PositionComponent { s: end, axis: 1 }));
    let summary = run_ensemble(&Model::Frc(*cfg), opts.n_paths, &obs, opts.seed, opts.workers)?;

    let mut out = Vec::new();
    for (i, &k) in lags.iter().enumerate() {
        let est = summary.estimate(i);
        out.push(ComparisonReport::z_test(
            format!("frc_bond_correlation[lag={k}]"),
            Some(a),
            Some((1 + k) as f64 * a),
            est.value,
            est.stderr,
            frc_bond_correlation_oracle(cfg.bond_angle(), k as u64),
            opts.threshold,
        ));
    }
    let m = lags.len();
    let est = summary.estimate(m);
    out.push(ComparisonReport::z_test(
        "frc_mean_sq_end_to_end",
        None,
        Some(end),
        est.value,
        est.stderr,
        frc_msd_oracle(cfg),
        opts.threshold,
    ));
    for (axis, name) in [(0, "frc_mean_end_x"), (1, "frc_mean_end_y")] {
        let est = summary.estimate(m + 1 + axis);
        out.push(ComparisonReport::z_test(name, None, Some(end), est.value, est.stderr, 0.0, opts.threshold));
    }
    Ok(out)
}

/// Discrete chains with `a = L/N`, `θ = κ/√N` for each `N`, compared with
/// their exact oracles (gated) and with the continuum closed forms at
/// `ℓp = 2L/κ²` (informational). The continuum gap at `s = L` must not
/// grow with `N` beyond 10% of the smallest gap.
pub fn convergence_table(
    contour_length: f64,
    kappa: f64,
    n_list: &[usize],
    opts: &RunOptions,
) -> Result<Vec<ComparisonReport>> {
    if n_list.is_empty() {
        return Err(invalid("N list is empty"));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(invalid(format!("N = {n} too small for the convergence table")));
    }
    let ell_p = 2.0 * contour_length / (kappa * kappa);
    let half = 0.5 * contour_length;
    let mut out = Vec::new();
    let mut corr_gaps = Vec::new();
    let mut msd_gaps = Vec::new();

    for &n in n_list {
        let cfg = FrcConfig::scaled(n, contour_length, kappa)?;
        let grid = Model::Frc(cfg).grid();
        let theta = cfg.bond_angle();
        let a = cfg.bond_length();
        let (k_half, s_half) = grid.snap(half)?;
        let obs = [
            Observable::Mean(Probe::TangentDot { s: 0.0, t: s_half }),
            Observable::Mean(Probe::TangentDot { s: 0.0, t: contour_length }),
            Observable::Mean(Probe::SquaredPosition { s: s_half }),
            Observable::Mean(Probe::SquaredPosition { s: contour_length }),
        ];
        let summary = run_ensemble(&Model::Frc(cfg), opts.n_paths, &obs, opts.seed, opts.workers)?;
        let (_, s_end) = grid.snap(contour_length)?;

        // bond index at bead k is max(k, 1): lag is index − 1
        let rows = [
            ("bond_correlation", s_half, frc_bond_correlation_oracle(theta, k_half.max(1) as u64 - 1),
                kp_tangent_correlation(ell_p, 0.0, s_half)),
            ("bond_correlation", s_end, frc_bond_correlation_oracle(theta, n as u64 - 1),
                kp_tangent_correlation(ell_p, 0.0, s_end)),
            ("mean_sq_position", s_half, msd_closed_form(k_half, a, theta),
                kp_mean_sq_position(ell_p, s_half)),
            ("mean_sq_position", s_end, frc_msd_oracle(&cfg), kp_mean_sq_position(ell_p, s_end)),
        ];
        for (i, (name, t, frc, kp)) in rows.iter().enumerate() {
            let est = summary.estimate(i);
            let s = (i < 2).then_some(0.0);
            out.push(ComparisonReport::z_test(
                format!("frc_{name}[N={n}]"),
                s,
                Some(*t),
                est.value,
                est.stderr,
                *frc,
                opts.threshold,
            ));
            out.push(ComparisonReport::informational(
                format!("kp_{name}[N={n}]"),
                s,
                Some(*t),
                est.value,
                est.stderr,
                *kp,
            ));
        }
        corr_gaps.push((n, s_end, (rows[1].2 - rows[1].3).abs()));
        msd_gaps.push((n, s_end, (rows[3].2 - rows[3].3).abs()));
    }

    for (name, gaps) in [("gap_bond_correlation", &corr_gaps), ("gap_mean_sq_position", &msd_gaps)] {
        let smallest = gaps.iter().map(|g| g.2).fold(f64::INFINITY, f64::min);
        for (i, &(n, t, gap)) in gaps.iter().enumerate() {
            let label = format!("{name}[N={n}]");
            out.push(if i == 0 {
                ComparisonReport::informational(label, None, Some(t), gap, 0.0, gap)
            } else {
                ComparisonReport::at_most(label, None, Some(t), gap, 0.0, gaps[i - 1].2 + 0.1 * smallest)
            });
        }
    }
    Ok(out)
}

/// Default arclengths for the limit diagnostics.
pub fn default_grid_points(length: f64) -> Vec<f64> {
    vec![0.25 * length, 0.5 * length, length]
}

/// Stiff regime: `√ℓp (R_s − s e3)` against the integrated-Brownian limit.
pub fn hard_rod_diagnostics(
    ell_p: f64,
    contour_length: f64,
    n_steps: Option<usize>,
    grid_points: &[f64],
    opts: &RunOptions,
) -> Result<Vec<ComparisonReport>> {
    if ell_p < 100.0 * contour_length {
        warn!("hard-rod diagnostics with ℓp = {ell_p} < 100 L = {}", 100.0 * contour_length);
    }
    let cfg = KpConfig::new(contour_length, ell_p, n_steps)?;
    let grid = Model::Kp(cfg).grid();
    let mut obs = vec![Observable::Mean(Probe::SupRodDeviation)];
    let mut snapped = Vec::new();
    for &s in grid_points {
        let (_, s) = grid.snap(s)?;
        snapped.push(s);
        let comp = |axis| Probe::PositionComponent { s, axis };
        obs.push(Observable::Variance(comp(0)));
        obs.push(Observable::Variance(comp(1)));
        obs.push(Observable::Variance(comp(2)));
        obs.push(Observable::Covariance(comp(0), comp(1)));
    }
    let summary = run_ensemble(&Model::Kp(cfg), opts.n_paths, &obs, opts.seed, opts.workers)?;

    let mut out = Vec::new();
    let sup = summary.estimate(0);
    out.push(ComparisonReport::at_most(
        "hard_rod_sup_deviation",
        None,
        Some(contour_length),
        sup.value,
        sup.stderr,
        5.0 * (contour_length.powi(3) / ell_p).sqrt(),
    ));
    for (j, &s) in snapped.iter().enumerate() {
        let base = 1 + 4 * j;
        let scaled = |i: usize| {
            let e = summary.estimate(base + i);
            (ell_p * e.value, ell_p * e.stderr)
        };
        let oracle = hard_rod_fluctuation_cov(s, s);
        let (vx, sx) = scaled(0);
        let (vy, sy) = scaled(1);
        let (vz, sz) = scaled(2);
        let (cxy, sxy) = scaled(3);
        out.push(ComparisonReport::z_test("hard_rod_var_x", Some(s), Some(s), vx, sx, oracle, opts.threshold));
        out.push(ComparisonReport::z_test("hard_rod_var_y", Some(s), Some(s), vy, sy, oracle, opts.threshold));
        out.push(ComparisonReport::z_test("hard_rod_cov_xy", Some(s), Some(s), cxy, sxy, 0.0, opts.threshold));
        out.push(ComparisonReport::at_most(
            "hard_rod_var_z",
            Some(s),
            Some(s),
            vz,
            sz,
            0.05 * 0.5 * (vx + vy),
        ));
    }
    Ok(out)
}

/// Flexible regime: `√(3/ℓp) R_s` against standard 3-d Brownian motion.
pub fn random_coil_diagnostics(
    ell_p: f64,
    contour_length: f64,
    n_steps: Option<usize>,
    grid_points: &[f64],
    opts: &RunOptions,
) -> Result<Vec<ComparisonReport>> {
    if ell_p > contour_length / 100.0 {
        warn!("random-coil diagnostics with ℓp = {ell_p} > L/100 = {}", contour_length / 100.0);
    }
    let cfg = KpConfig::new(contour_length, ell_p, n_steps)?;
    let grid = Model::Kp(cfg).grid();
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    let mut obs = Vec::new();
    let mut snapped = Vec::new();
    for &s in grid_points {
        let (_, s) = grid.snap(s)?;
        let (_, mid) = grid.snap(0.5 * s)?;
        snapped.push((s, mid));
        let comp = |s, axis| Probe::PositionComponent { s, axis };
        for axis in 0..3 {
            obs.push(Observable::Variance(comp(s, axis)));
        }
        for (i, j) in PAIRS {
            obs.push(Observable::Covariance(comp(s, i), comp(s, j)));
        }
        for axis in 0..3 {
            obs.push(Observable::Covariance(
                Probe::PositionIncrementComponent { from: mid, to: s, axis },
                comp(mid, axis),
            ));
        }
        obs.push(Observable::Mean(Probe::SquaredPosition { s }));
    }
    let summary = run_ensemble(&Model::Kp(cfg), opts.n_paths, &obs, opts.seed, opts.workers)?;

    let k = 3.0 / ell_p;
    let axis_name = ["x", "y", "z"];
    let mut out = Vec::new();
    for (j, &(s, mid)) in snapped.iter().enumerate() {
        let base = 10 * j;
        let scaled = |i: usize| {
            let e = summary.estimate(base + i);
            (k * e.value, k * e.stderr)
        };
        for (axis, name) in axis_name.iter().enumerate() {
            let (v, se) = scaled(axis);
            out.push(ComparisonReport::z_test(
                format!("random_coil_var_{name}"),
                Some(s),
                Some(s),
                v,
                se,
                random_coil_cov(s, s),
                opts.threshold,
            ));
        }
        for (p, (a, b)) in PAIRS.iter().enumerate() {
            let (c, se) = scaled(3 + p);
            out.push(ComparisonReport::z_test(
                format!("random_coil_cov_{}{}", axis_name[*a], axis_name[*b]),
                Some(s),
                Some(s),
                c,
                se,
                0.0,
                opts.threshold,
            ));
        }
        for (axis, name) in axis_name.iter().enumerate() {
            let (c, se) = scaled(6 + axis);
            out.push(ComparisonReport::z_test(
                format!("random_coil_increment_cov_{name}"),
                Some(mid),
                Some(s),
                c,
                se,
                0.0,
                opts.threshold,
            ));
        }
        let (m, se) = scaled(9);
        out.push(ComparisonReport::z_test(
            "random_coil_scaled_msd",
            None,
            Some(s),
            m,
            se,
            k * kp_mean_sq_position(ell_p, s),
            opts.threshold,
        ));
    }
    Ok(out)
}
