//! Freely rotating chain: `N` bonds of length `a`, fixed bond angle `θ`,
//! i.i.d. uniform torsions.
//!
//! The chain is pinned: `R_0 = 0` and the first bond is `a·e3`. Each later
//! bond is obtained by accumulating the frame `Z_n = Z_{n-1} H_n`, where
//! `H_n` turns `e3` through `θ` about the horizontal axis
//! `(cos φ_n, sin φ_n, 0)`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::format::fmt_f64;
use crate::so3::{self, Rotation3, Vec3};

/// Frames are re-orthonormalized after this many multiplications.
pub const REORTHONORMALIZE_EVERY: usize = 1024;

/// Parameters of a freely rotating chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrcConfig {
    n_bonds: usize,
    bond_length: f64,
    bond_angle: f64,
    scaling: Option<Scaling>,
}

/// Continuum scaling `a = L/N`, `θ = κ/√N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub contour_length: f64,
    pub kappa: f64,
}

impl FrcConfig {
    /// Chain given directly by bond length and bond angle, `θ ∈ (0, π)`.
    pub fn raw(n_bonds: usize, bond_length: f64, bond_angle: f64) -> Result<Self> {
        check_n_bonds(n_bonds)?;
        check_bond_length(bond_length)?;
        if !(bond_angle > 0.0 && bond_angle < PI) {
            return Err(invalid(format!("bond angle must lie in (0, π), got {bond_angle}")));
        }
        Ok(FrcConfig {
            n_bonds,
            bond_length,
            bond_angle,
            scaling: None,
        })
    }

    /// Chain with contour length `L` and stiffness `κ`: `a = L/N`, `θ = κ/√N`.
    pub fn scaled(n_bonds: usize, contour_length: f64, kappa: f64) -> Result<Self> {
        check_n_bonds(n_bonds)?;
        if !(contour_length > 0.0 && contour_length.is_finite()) {
            return Err(invalid(format!("contour length must be positive, got {contour_length}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa must be positive, got {kappa}")));
        }
        let bond_angle = kappa / (n_bonds as f64).sqrt();
        if bond_angle >= PI {
            return Err(invalid(format!(
                "bond angle κ/√N = {bond_angle} must be below π"
            )));
        }
        Ok(FrcConfig {
            n_bonds,
            bond_length: contour_length / n_bonds as f64,
            bond_angle,
            scaling: Some(Scaling {
                contour_length,
                kappa,
            }),
        })
    }

    /// Degenerate `θ = 0` chain (a straight rod). Only meant for tests and
    /// oracle checks; normal constructors reject `θ = 0`.
    pub fn straight_rod(n_bonds: usize, bond_length: f64) -> Result<Self> {
        check_n_bonds(n_bonds)?;
        check_bond_length(bond_length)?;
        Ok(FrcConfig {
            n_bonds,
            bond_length,
            bond_angle: 0.0,
            scaling: None,
        })
    }

    pub fn n_bonds(&self) -> usize {
        self.n_bonds
    }

    pub fn bond_length(&self) -> f64 {
        self.bond_length
    }

    pub fn bond_angle(&self) -> f64 {
        self.bond_angle
    }

    pub fn scaling(&self) -> Option<Scaling> {
        self.scaling
    }

    pub fn contour_length(&self) -> f64 {
        match self.scaling {
            Some(s) => s.contour_length,
            None => self.n_bonds as f64 * self.bond_length,
        }
    }

    /// `ℓp = 2L/κ²`, defined for scaled chains only.
    pub fn persistence_length(&self) -> Option<f64> {
        self.scaling
            .map(|s| 2.0 * s.contour_length / (s.kappa * s.kappa))
    }
}

fn check_n_bonds(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("chain needs at least one bond"));
    }
    Ok(())
}

fn check_bond_length(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("bond length must be positive, got {a}")));
    }
    Ok(())
}

/// One realized chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChain {
    bond_length: f64,
    bond_angle: f64,
    beads: Vec<Vec3>,
    phis: Vec<f64>,
}

impl DiscreteChain {
    pub fn n_bonds(&self) -> usize {
        self.beads.len() - 1
    }

    pub fn bond_length(&self) -> f64 {
        self.bond_length
    }

    pub fn bond_angle(&self) -> f64 {
        self.bond_angle
    }

    /// Bead positions `R_0..R_N`.
    pub fn beads(&self) -> &[Vec3] {
        &self.beads
    }

    /// Torsion angles `φ_2..φ_N`.
    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn contour_length(&self) -> f64 {
        self.n_bonds() as f64 * self.bond_length
    }

    /// Bond vector `Q_n = R_n − R_{n−1}` for `1 ≤ n ≤ N`.
    pub fn bond(&self, n: usize) -> Vec3 {
        so3::sub(&self.beads[n], &self.beads[n - 1])
    }

    /// Position on the piecewise-linear curve through the beads at arclength `s`.
    pub fn interpolate_path(&self, s: f64) -> Result<Vec3> {
        let total = self.contour_length();
        if !(0.0..=total).contains(&s) {
            return Err(invalid(format!("arclength {s} outside [0, {total}]")));
        }
        let x = s / self.bond_length;
        let nearest = x.round();
        if (x - nearest).abs() <= 4.0 * f64::EPSILON * nearest.max(1.0) {
            return Ok(self.beads[(nearest as usize).min(self.n_bonds())]);
        }
        let n = (x.floor() as usize).min(self.n_bonds() - 1);
        let frac = x - n as f64;
        let (p, q) = (&self.beads[n], &self.beads[n + 1]);
        Ok(so3::add(p, &so3::scale(&so3::sub(q, p), frac)))
    }

    /// CSV with header `n,x,y,z` (plus `phi` when requested). `phi` on row
    /// `n` is the torsion that produced bond `n`; empty for `n < 2`.
    pub fn write_csv<W: Write>(&self, out: W, include_phi: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        if include_phi {
            w.write_record(["n", "x", "y", "z", "phi"])?;
        } else {
            w.write_record(["n", "x", "y", "z"])?;
        }
        for (n, r) in self.beads.iter().enumerate() {
            let mut row = vec![n.to_string(), fmt_f64(r[0]), fmt_f64(r[1]), fmt_f64(r[2])];
            if include_phi {
                row.push(if n >= 2 { fmt_f64(self.phis[n - 2]) } else { String::new() });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws one freely rotating chain.
pub fn sample_frc<R: Rng + ?Sized>(cfg: &FrcConfig, rng: &mut R) -> Result<DiscreteChain> {
    let n = cfg.n_bonds;
    let a = cfg.bond_length;
    let (sin_t, cos_t) = cfg.bond_angle.sin_cos();

    let mut beads = Vec::with_capacity(n + 1);
    let mut phis = Vec::with_capacity(n.saturating_sub(1));
    beads.push([0.0; 3]);
    beads.push([0.0, 0.0, a]);

    let mut z = Rotation3::IDENTITY;
    let mut last = beads[1];
    for step in 2..=n {
        let phi = rng.random::<f64>() * TAU;
        phis.push(phi);
        let (sp, cp) = phi.sin_cos();
        let h = so3::rotation_about_unit_axis(&[cp, sp, 0.0], cos_t, sin_t);
        z = so3::compose(&z, &h);
        if (step - 1) % REORTHONORMALIZE_EVERY == 0 {
            z = so3::reorthonormalize(&z)?;
        }
        // Z e3 is the third column
        let q = z.column(2);
        last = [last[0] + a * q[0], last[1] + a * q[1], last[2] + a * q[2]];
        beads.push(last);
    }

    Ok(DiscreteChain {
        bond_length: a,
        bond_angle: cfg.bond_angle,
        beads,
        phis,
    })
}

/// `E[Q_n · Q_{n+k}]/a² = cos^k θ`.
pub fn frc_bond_correlation_oracle(theta: f64, k: u64) -> f64 {
    let c = theta.cos();
    if k <= i32::MAX as u64 {
        c.powi(k as i32)
    } else {
        c.powf(k as f64)
    }
}

/// Exact `E|R_N|² = a² Σ_{i,j=1}^N cos^{|i−j|} θ`, in telescoped form.
pub fn frc_msd_oracle(cfg: &FrcConfig) -> f64 {
    msd_closed_form(cfg.n_bonds, cfg.bond_length, cfg.bond_angle)
}

pub(crate) fn msd_closed_form(n_bonds: usize, a: f64, theta: f64) -> f64 {
    let n = n_bonds as f64;
    let c = theta.cos();
    // 1 − cos θ without cancellation
    let one_minus_c = 2.0 * (0.5 * theta).sin().powi(2);
    if one_minus_c == 0.0 {
        return (n * a).powi(2);
    }
    let cn = frc_bond_correlation_oracle(theta, n_bonds as u64);
    a * a * (n * (1.0 + c) / one_minus_c - 2.0 * c * (1.0 - cn) / (one_minus_c * one_minus_c))
}

/// `E|R_N|²` by summing the lag expansion `N + 2 Σ_k (N − k) cos^k θ`.
pub fn frc_msd_lag_sum(cfg: &FrcConfig) -> f64 {
    let n = cfg.n_bonds;
    let c = cfg.bond_angle.cos();
    let mut sum = n as f64;
    let mut ck = 1.0;
    for k in 1..n {
        ck *= c;
        sum += 2.0 * (n - k) as f64 * ck;
    }
    cfg.bond_length * cfg.bond_length * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{dot, norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn config_validation() {
        assert!(FrcConfig::raw(0, 1.0, 0.5).is_err());
        assert!(FrcConfig::raw(3, 0.0, 0.5).is_err());
        assert!(FrcConfig::raw(3, 1.0, 0.0).is_err());
        assert!(FrcConfig::raw(3, 1.0, PI).is_err());
        assert!(FrcConfig::scaled(1, 1.0, 4.0).is_err());
        assert!(FrcConfig::scaled(4, -1.0, 1.0).is_err());
        let c = FrcConfig::scaled(100, 2.0, 2.0).unwrap();
        assert_eq!(c.bond_length(), 0.02);
        assert!((c.bond_angle() - 0.2).abs() < 1e-15);
        assert_eq!(c.persistence_length(), Some(1.0));
        assert_eq!(c.contour_length(), 2.0);
        assert_eq!(FrcConfig::raw(3, 1.0, 0.5).unwrap().persistence_length(), None);
    }

    #[test]
    fn single_bond_chain() {
        let cfg = FrcConfig::scaled(1, 1.0, 1.0).unwrap();
        let chain = sample_frc(&cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(chain.beads(), &[[0.0; 3], [0.0, 0.0, 1.0]]);
        assert!(chain.phis().is_empty());
    }

    #[test]
    fn straight_rod_is_vertical() {
        let cfg = FrcConfig::straight_rod(20, 0.5).unwrap();
        let chain = sample_frc(&cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for (n, r) in chain.beads().iter().enumerate() {
            assert_eq!(r[0], 0.0);
            assert_eq!(r[1], 0.0);
            assert!((r[2] - n as f64 * 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn constraints_hold_along_long_chain() {
        let cfg = FrcConfig::raw(5000, 0.3, 0.4).unwrap();
        let chain = sample_frc(&cfg, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(chain.beads()[0], [0.0; 3]);
        assert_eq!(chain.beads()[1], [0.0, 0.0, 0.3]);
        assert_eq!(chain.phis().len(), 4999);
        let c = 0.4f64.cos();
        for n in 1..=chain.n_bonds() {
            let q = chain.bond(n);
            assert!((norm(&q) - 0.3).abs() <= 1e-12 * 0.3 * 10.0, "bond {n}");
            if n < chain.n_bonds() {
                let cosang = dot(&q, &chain.bond(n + 1)) / (0.3 * 0.3);
                assert!((cosang - c).abs() <= 1e-10, "angle at {n}");
            }
        }
    }

    #[test]
    fn interpolation() {
        let cfg = FrcConfig::raw(7, 0.1, 1.0).unwrap();
        let chain = sample_frc(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(chain.interpolate_path(0.0).unwrap(), [0.0; 3]);
        let half = chain.interpolate_path(0.05).unwrap();
        assert!((half[2] - 0.05).abs() < 1e-15 && half[0] == 0.0 && half[1] == 0.0);
        for n in 0..=7 {
            assert_eq!(chain.interpolate_path(n as f64 * 0.1).unwrap(), chain.beads()[n]);
        }
        assert!(chain.interpolate_path(-1e-9).is_err());
        assert!(chain.interpolate_path(0.71).is_err());
    }

    #[test]
    fn bond_correlation_oracle_values() {
        assert_eq!(frc_bond_correlation_oracle(0.7, 0), 1.0);
        assert_eq!(frc_bond_correlation_oracle(0.0, 1000), 1.0);
        assert!((frc_bond_correlation_oracle(0.7, 3) - 0.7f64.cos().powi(3)).abs() < 1e-15);
    }

    #[test]
    fn lag_one_correlation_matches_cone_average() {
        // Average the next bond direction over the torsion angle by brute force:
        // with Q_n = e3, Q_{n+1} = H e3 and its e3 component is the correlation.
        let theta: f64 = 0.9;
        let (s, c) = theta.sin_cos();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = 1_000_000;
        let mut acc = [0.0; 3];
        for _ in 0..m {
            let phi = rng.random::<f64>() * TAU;
            let h = so3::rotation_about_unit_axis(&[phi.cos(), phi.sin(), 0.0], c, s);
            acc = so3::add(&acc, &h.column(2));
        }
        let mean = so3::scale(&acc, 1.0 / m as f64);
        // transverse parts average out at rate sin θ/√(2m)
        assert!(mean[0].abs() < 5.0 * s / (2.0 * m as f64).sqrt());
        assert!(mean[1].abs() < 5.0 * s / (2.0 * m as f64).sqrt());
        assert!((mean[2] - frc_bond_correlation_oracle(theta, 1)).abs() < 1e-9);
    }

    fn msd_direct(n: usize, a: f64, theta: f64) -> f64 {
        let c = theta.cos();
        let mut s = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                s += c.powi((i as i32 - j as i32).abs());
            }
        }
        a * a * s
    }

    #[test]
    fn msd_oracle_examples() {
        let rod = FrcConfig::straight_rod(10, 0.3).unwrap();
        assert!((frc_msd_oracle(&rod) - 9.0).abs() < 1e-12);
        let one = FrcConfig::raw(1, 0.4, 1.0).unwrap();
        assert!((frc_msd_oracle(&one) - 0.16).abs() < 1e-15);
        let two = FrcConfig::raw(2, 0.5, FRAC_PI_2).unwrap();
        assert!((frc_msd_oracle(&two) - 2.0 * 0.25).abs() < 1e-15);
        assert!((msd_direct(2, 0.5, FRAC_PI_2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn msd_forms_agree() {
        for &(n, theta) in &[(3usize, 0.2), (50, 1.3), (400, 0.05), (1000, 2.5), (2000, 0.0316)] {
            let cfg = FrcConfig::raw(n, 0.7, theta).unwrap();
            let direct = msd_direct(n, 0.7, theta);
            let closed = frc_msd_oracle(&cfg);
            let lag = frc_msd_lag_sum(&cfg);
            assert!(((closed - direct) / direct).abs() < 1e-10, "{n} {theta}");
            assert!(((lag - direct) / direct).abs() < 1e-10, "{n} {theta}");
        }
    }

    #[test]
    fn csv_layout() {
        let cfg = FrcConfig::raw(3, 1.0, 0.5).unwrap();
        let chain = sample_frc(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut buf = Vec::new();
        chain.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,x,y,z,phi");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(','));
        assert!(lines[3].split(',').nth(4).unwrap().parse::<f64>().unwrap() == chain.phis()[0]);
        assert!(!text.contains('\r'));
    }
}
