//! Closed-form reference statistics of the Kratky-Porod chain and of its
//! hard-rod and random-coil limits.
//!
//! Convention: the tangent correlation decays as `e^{−2|t−s|/ℓp}`. Some of the
//! physics literature writes `e^{−|t−s|/ℓp}` for the same quantity; the factor
//! of two changes every formula below.

use std::collections::BTreeMap;

/// Switchover of [`kp_mean_sq_position`] to its Taylor series.
const MSD_TAYLOR_BELOW: f64 = 1e-4;

/// Named closed form with its parameters, used to label reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl ClosedForm {
    pub fn new(name: impl Into<String>, params: &[(&str, f64)]) -> Self {
        ClosedForm {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Evaluates the form if its name and parameters are recognized.
    pub fn evaluate(&self) -> Option<f64> {
        let p = |k: &str| self.params.get(k).copied();
        match self.name.as_str() {
            "kp_tangent_correlation" => Some(kp_tangent_correlation(p("ell_p")?, p("s")?, p("t")?)),
            "kp_mean_sq_position" => Some(kp_mean_sq_position(p("ell_p")?, p("t")?)),
            "hard_rod_fluctuation_cov" => Some(hard_rod_fluctuation_cov(p("s")?, p("t")?)),
            "random_coil_cov" => Some(random_coil_cov(p("s")?, p("t")?)),
            _ => None,
        }
    }
}

/// `E[Q_s · Q_t] = e^{−2|t−s|/ℓp}`.
pub fn kp_tangent_correlation(ell_p: f64, s: f64, t: f64) -> f64 {
    (-2.0 * (t - s).abs() / ell_p).exp()
}

/// `E|R_t|² = ℓp t − (ℓp²/2)(1 − e^{−2t/ℓp})`.
///
/// For `t/ℓp < 1e−4` the series `t² − (2/3)t³/ℓp + (1/3)t⁴/ℓp²` is used
/// instead, which avoids the cancellation of the two leading terms.
pub fn kp_mean_sq_position(ell_p: f64, t: f64) -> f64 {
    let x = t / ell_p;
    if x < MSD_TAYLOR_BELOW {
        t * t * (1.0 - 2.0 / 3.0 * x + x * x / 3.0)
    } else {
        ell_p * t - 0.5 * ell_p * ell_p * (-(-2.0 * x).exp_m1())
    }
}

/// Covariance of one transverse component of the hard-rod fluctuation
/// `W_s = ∫₀ˢ β_u du`: `∫₀ˢ∫₀ᵗ min(u, v) du dv = s²(3t − s)/6` for `s ≤ t`.
/// Components are mutually independent and the axial component vanishes.
pub fn hard_rod_fluctuation_cov(s: f64, t: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    lo * lo * (3.0 * hi - lo) / 6.0
}

/// Per-component covariance `min(s, t)` of the random-coil limit of
/// `√(3/ℓp) R`, a standard 3-d Brownian motion.
pub fn random_coil_cov(s: f64, t: f64) -> f64 {
    s.min(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Composite 8-point Gauss–Legendre on `[a, b]` with `panels` panels.
    fn gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        const X: [f64; 4] = [
            0.1834346424956498,
            0.525532409916329,
            0.7966664774136267,
            0.9602898564975363,
        ];
        const W: [f64; 4] = [
            0.362683783378362,
            0.3137066458778873,
            0.2223810344533745,
            0.1012285362903763,
        ];
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                total += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
            }
        }
        0.5 * h * total
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(kp_tangent_correlation(0.7, 1.3, 1.3), 1.0);
        assert!((kp_tangent_correlation(1.0, 0.0, 0.5) - 0.36787944117144233).abs() < 1e-15);
        assert!((kp_tangent_correlation(1.0, 0.5, 0.0) - 0.36787944117144233).abs() < 1e-15);
        assert!((kp_tangent_correlation(1e12, 0.0, 3.0) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn msd_examples() {
        assert_eq!(kp_mean_sq_position(2.0, 0.0), 0.0);
        // 1 − (1 − e^{−2})/2
        assert!((kp_mean_sq_position(1.0, 1.0) - 0.5676676416183064).abs() < 1e-15);
        let rod = kp_mean_sq_position(1e6, 1.0);
        assert!((rod - 1.0).abs() < 1e-6);
        // ℓp = 0.01, t = 1: 0.01 − 0.00005 (1 − e^{−200})
        assert!((kp_mean_sq_position(0.01, 1.0) - 0.00995).abs() < 1e-15);
    }

    #[test]
    fn msd_is_double_integral_of_correlation() {
        for &(ell_p, t) in &[(1.0, 1.0), (0.1, 2.0), (5.0, 0.3), (0.01, 1.0), (100.0, 3.0)] {
            let inner = |v: f64| gauss(|u| kp_tangent_correlation(ell_p, u, v), 0.0, v, 64);
            let quad = 2.0 * gauss(inner, 0.0, t, 64);
            let closed = kp_mean_sq_position(ell_p, t);
            assert!((quad - closed).abs() < 1e-8, "ℓp={ell_p} t={t}: {quad} vs {closed}");
        }
    }

    #[test]
    fn taylor_branch_is_continuous() {
        let ell_p = 3.0;
        let t = MSD_TAYLOR_BELOW * ell_p;
        let series = kp_mean_sq_position(ell_p, t * (1.0 - 1e-12));
        let exact = kp_mean_sq_position(ell_p, t * (1.0 + 1e-12));
        assert!(((series - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn rod_and_coil_limits() {
        let t = 2.0;
        let mut prev = 0.0;
        for &ell_p in &[0.1, 1.0, 10.0, 100.0, 1e4, 1e8] {
            let r = kp_mean_sq_position(ell_p, t) / (t * t);
            assert!(r > prev && r <= 1.0);
            prev = r;
        }
        assert!((prev - 1.0).abs() < 1e-7);
        for &ell_p in &[1e-3, 1e-5, 1e-8] {
            let r = kp_mean_sq_position(ell_p, t) / (ell_p * t);
            assert!((r - 1.0).abs() < ell_p);
        }
        // leading term of the coil is ℓp s, i.e. per component ℓp s/3
        assert!((3.0 / 1e-4 * kp_mean_sq_position(1e-4, 1.0) / 3.0 - random_coil_cov(1.0, 1.0)).abs() < 1e-3);
    }

    #[test]
    fn hard_rod_cov_matches_quadrature() {
        for &(s, t) in &[(1.0, 1.0), (1.0, 2.0), (0.3, 0.7), (2.0, 0.5)] {
            let inner = |u: f64| gauss(|v: f64| u.min(v), 0.0, t, 200);
            let quad = gauss(inner, 0.0, s, 200);
            assert!((quad - hard_rod_fluctuation_cov(s, t)).abs() < 1e-6, "{s} {t}");
        }
        assert_eq!(hard_rod_fluctuation_cov(0.0, 4.0), 0.0);
        assert!((hard_rod_fluctuation_cov(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((hard_rod_fluctuation_cov(1.0, 2.0) - 5.0 / 6.0).abs() < 1e-15);
    }

    /// Brute force: exact joint Gaussian steps of (β, ∫β) over 10⁵ paths.
    #[test]
    fn hard_rod_cov_matches_integrated_brownian_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let m = 100_000;
        let steps = 8;
        let h = 2.0 / steps as f64; // horizon t = 2, record at s = 1 and s = 2
        let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
        let (mut q11, mut q22, mut q12) = (0.0, 0.0, 0.0);
        for _ in 0..m {
            let (mut b, mut w) = (0.0f64, 0.0f64);
            let mut w1 = 0.0;
            for k in 0..steps {
                // Over one step: Δβ = √h z1, Δ∫ = β h + h^{3/2}(z1/2 + z2/(2√3))
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                w += b * h + h.powf(1.5) * (0.5 * z1 + z2 / (2.0 * 3f64.sqrt()));
                b += h.sqrt() * z1;
                if k + 1 == steps / 2 {
                    w1 = w;
                }
            }
            let (a, c) = (w1 * w1, w * w);
            let d = w1 * w;
            s11 += a;
            s22 += c;
            s12 += d;
            q11 += a * a;
            q22 += c * c;
            q12 += d * d;
        }
        let mf = m as f64;
        for (sum, sq, oracle) in [
            (s11, q11, hard_rod_fluctuation_cov(1.0, 1.0)),
            (s22, q22, hard_rod_fluctuation_cov(2.0, 2.0)),
            (s12, q12, hard_rod_fluctuation_cov(1.0, 2.0)),
        ] {
            let mean = sum / mf;
            let se = ((sq / mf - mean * mean) / mf).sqrt();
            assert!(((mean - oracle) / se).abs() < 4.0, "{mean} vs {oracle} (se {se})");
        }
    }

    #[test]
    fn random_coil_cov_values() {
        assert_eq!(random_coil_cov(1.0, 1.0), 1.0);
        assert_eq!(random_coil_cov(0.5, 2.0), 0.5);
    }

    #[test]
    fn closed_form_lookup() {
        let f = ClosedForm::new("kp_tangent_correlation", &[("ell_p", 1.0), ("s", 0.0), ("t", 1.0)]);
        assert!((f.evaluate().unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert_eq!(ClosedForm::new("nope", &[]).evaluate(), None);
        assert_eq!(ClosedForm::new("kp_mean_sq_position", &[("ell_p", 1.0)]).evaluate(), None);
    }
}
