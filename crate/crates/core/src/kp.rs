//! Continuum Kratky-Porod chain.
//!
//! The frame `Z_s ∈ SO(3)` follows the Stratonovich equation
//! `∂Z = σ Z ∂B` with `B = β¹A₁ + β²A₂`, where `A₁`, `A₂` are the skew
//! matrices with a unit `(1,3)` resp. `(2,3)` entry. The tangent is
//! `Q_s = Z_s e3` and the curve is `R_s = ∫ Q_u du`.
//!
//! Normalization: `σ = √(2/ℓp)`. With this choice the tangent is a spherical
//! Brownian motion generated by `(1/ℓp)Δ`, so `E[Q_s·Q_t] = e^{−2|t−s|/ℓp}`
//! and `E|R_t|² = ℓp t − ℓp²/2 (1 − e^{−2t/ℓp})`. A coefficient of
//! `1/√ℓp` would halve the decay rate.
//!
//! Integration is by exponential Euler–Maruyama: each step right-multiplies
//! the frame by the exact exponential of the Lie-algebra increment, which
//! keeps `Z` on SO(3) and needs no Itô correction term.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chain::REORTHONORMALIZE_EVERY;
use crate::error::{invalid, Result};
use crate::format::fmt_f64;
use crate::so3::{self, Rotation3, UnitVec3, Vec3};

/// Parameters of a discretized Kratky-Porod path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpConfig {
    contour_length: f64,
    ell_p: f64,
    n_steps: usize,
}

impl KpConfig {
    /// `n_steps = None` picks [`KpConfig::default_n_steps`].
    pub fn new(contour_length: f64, ell_p: f64, n_steps: Option<usize>) -> Result<Self> {
        if !(contour_length > 0.0 && contour_length.is_finite()) {
            return Err(invalid(format!("contour length must be positive, got {contour_length}")));
        }
        if !(ell_p > 0.0 && ell_p.is_finite()) {
            return Err(invalid(format!("persistence length must be positive, got {ell_p}")));
        }
        let n_steps = match n_steps {
            Some(0) => return Err(invalid("n_steps must be at least 1")),
            Some(n) => n,
            None => Self::default_n_steps(contour_length, ell_p),
        };
        Ok(KpConfig {
            contour_length,
            ell_p,
            n_steps,
        })
    }

    /// `max(1000, ⌈100 L/ℓp⌉)`: at least 50 steps per correlation length `ℓp/2`.
    pub fn default_n_steps(contour_length: f64, ell_p: f64) -> usize {
        let fine = (100.0 * contour_length / ell_p).ceil();
        if fine > 1000.0 {
            fine as usize
        } else {
            1000
        }
    }

    pub fn contour_length(&self) -> f64 {
        self.contour_length
    }

    pub fn ell_p(&self) -> f64 {
        self.ell_p
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Grid spacing `h = L / n_steps`.
    pub fn step(&self) -> f64 {
        self.contour_length / self.n_steps as f64
    }

    /// Noise coefficient `σ = √(2/ℓp)`.
    pub fn noise_scale(&self) -> f64 {
        noise_scale(self.ell_p)
    }
}

#[inline]
fn noise_scale(ell_p: f64) -> f64 {
    (2.0 / ell_p).sqrt()
}

/// Increments `(Δβ¹_k, Δβ²_k)` of the planar driver, each `N(0, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianDriver {
    step: f64,
    increments: Vec<[f64; 2]>,
}

impl BrownianDriver {
    pub fn sample<R: Rng + ?Sized>(n_steps: usize, step: f64, rng: &mut R) -> Self {
        let sd = step.sqrt();
        let increments = (0..n_steps)
            .map(|_| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                [sd * a, sd * b]
            })
            .collect();
        BrownianDriver { step, increments }
    }

    /// All-zero driver; integrates to the straight rod.
    pub fn zeros(n_steps: usize, step: f64) -> Self {
        BrownianDriver {
            step,
            increments: vec![[0.0; 2]; n_steps],
        }
    }

    pub fn from_increments(step: f64, increments: Vec<[f64; 2]>) -> Result<Self> {
        if increments.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("driver increments must be finite"));
        }
        Ok(BrownianDriver { step, increments })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn increments(&self) -> &[[f64; 2]] {
        &self.increments
    }
}

/// One step of the exponential scheme: `Z · exp(σ (Δβ¹A₁ + Δβ²A₂))`.
///
/// In coefficient form `Δβ¹A₁ + Δβ²A₂ = [(−Δβ², Δβ¹, 0)]×`.
#[inline]
pub fn step_kp(z: &Rotation3, dbeta1: f64, dbeta2: f64, ell_p: f64) -> Rotation3 {
    let k = noise_scale(ell_p);
    let inc = so3::hat([-k * dbeta2, k * dbeta1, 0.0]).expect("finite increment");
    so3::compose(z, &so3::exp_rodrigues(&inc))
}

/// A realized path on the uniform grid `s_k = k h`, `k = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    step: f64,
    frames: Vec<Rotation3>,
    tangents: Vec<UnitVec3>,
    positions: Vec<Vec3>,
}

impl PathSample {
    pub fn n_steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn contour_length(&self) -> f64 {
        self.grid(self.n_steps())
    }

    pub fn grid(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn frames(&self) -> &[Rotation3] {
        &self.frames
    }

    pub fn tangents(&self) -> &[UnitVec3] {
        &self.tangents
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Frame columns `(X_k, Y_k, Q_k)`.
    pub fn frame_vectors(&self, k: usize) -> (Vec3, Vec3, Vec3) {
        let z = &self.frames[k];
        (z.column(0), z.column(1), z.column(2))
    }

    /// Tangent at the last grid point not beyond `s`.
    pub fn tangent_at(&self, s: f64) -> Result<UnitVec3> {
        let total = self.contour_length();
        if !(0.0..=total).contains(&s) {
            return Err(invalid(format!("arclength {s} outside [0, {total}]")));
        }
        let x = s / self.step;
        let nearest = x.round();
        let k = if (x - nearest).abs() <= 4.0 * f64::EPSILON * nearest.max(1.0) {
            nearest as usize
        } else {
            x.floor() as usize
        };
        Ok(self.tangents[k.min(self.n_steps())])
    }

    /// CSV with header `s,Qx,Qy,Qz,Rx,Ry,Rz`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["s", "Qx", "Qy", "Qz", "Rx", "Ry", "Rz"])?;
        for (k, (q, r)) in self.tangents.iter().zip(&self.positions).enumerate() {
            let q = q.get();
            w.write_record([
                fmt_f64(self.grid(k)),
                fmt_f64(q[0]),
                fmt_f64(q[1]),
                fmt_f64(q[2]),
                fmt_f64(r[0]),
                fmt_f64(r[1]),
                fmt_f64(r[2]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws a driver and integrates one path.
pub fn simulate_kp<R: Rng + ?Sized>(cfg: &KpConfig, rng: &mut R) -> Result<PathSample> {
    let driver = BrownianDriver::sample(cfg.n_steps, cfg.step(), rng);
    simulate_kp_with_driver(cfg, &driver)
}

/// Integrates one path for a given driver.
pub fn simulate_kp_with_driver(cfg: &KpConfig, driver: &BrownianDriver) -> Result<PathSample> {
    if driver.increments.len() != cfg.n_steps {
        return Err(invalid(format!(
            "driver has {} increments, config wants {}",
            driver.increments.len(),
            cfg.n_steps
        )));
    }
    let h = cfg.step();
    let n = cfg.n_steps;
    let mut frames = Vec::with_capacity(n + 1);
    let mut tangents = Vec::with_capacity(n + 1);
    let mut positions = Vec::with_capacity(n + 1);

    let mut z = Rotation3::IDENTITY;
    let mut q_prev = so3::E3;
    let mut r = [0.0; 3];
    frames.push(z);
    tangents.push(UnitVec3::E3);
    positions.push(r);

    for (k, &[d1, d2]) in driver.increments.iter().enumerate() {
        z = step_kp(&z, d1, d2, cfg.ell_p);
        if (k + 1) % REORTHONORMALIZE_EVERY == 0 {
            z = so3::reorthonormalize(&z)?;
        }
        let q = z.column(2);
        r = [
            r[0] + 0.5 * h * (q_prev[0] + q[0]),
            r[1] + 0.5 * h * (q_prev[1] + q[1]),
            r[2] + 0.5 * h * (q_prev[2] + q[2]),
        ];
        frames.push(z);
        tangents.push(UnitVec3::new(q)?);
        positions.push(r);
        q_prev = q;
    }

    Ok(PathSample {
        step: h,
        frames,
        tangents,
        positions,
    })
}
