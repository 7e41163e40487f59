//! Parallel, reproducible Monte Carlo ensembles.
//!
//! Path `i` of a run with seed `s` draws from ChaCha8 keyed by `s` on stream
//! `i`, so its randomness does not depend on which worker builds it. Paths
//! are grouped into fixed-size chunks; each chunk folds its own accumulators
//! and chunks are merged in index order, which makes every summary
//! bit-identical across worker counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{sample_frc, DiscreteChain, FrcConfig};
use crate::error::{invalid, Error, Result};
use crate::kp::{simulate_kp, KpConfig, PathSample};
use crate::so3::{self, Vec3};

use super::stats::{CoMoments, Moments};

const CHUNK: usize = 64;

/// Random stream for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Frc(FrcConfig),
    Kp(KpConfig),
}

impl Model {
    pub fn grid(&self) -> Grid {
        match self {
            Model::Frc(c) => Grid {
                spacing: c.bond_length(),
                last: c.n_bonds(),
            },
            Model::Kp(c) => Grid {
                spacing: c.step(),
                last: c.n_steps(),
            },
        }
    }
}

/// Uniform arclength grid `k · spacing`, `k = 0..=last`. For the discrete
/// chain the grid points are the beads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub spacing: f64,
    pub last: usize,
}

impl Grid {
    pub fn at(&self, k: usize) -> f64 {
        k as f64 * self.spacing
    }

    pub fn length(&self) -> f64 {
        self.at(self.last)
    }

    /// Nearest grid index to `s` and its arclength.
    pub fn snap(&self, s: f64) -> Result<(usize, f64)> {
        let total = self.length();
        if !s.is_finite() || s < 0.0 || s > total * (1.0 + 1e-12) {
            return Err(invalid(format!("arclength {s} outside [0, {total}]")));
        }
        let k = ((s / self.spacing).round() as usize).min(self.last);
        Ok((k, self.at(k)))
    }
}

/// Scalar statistic of a single path. Arclengths are snapped to the grid
/// before a run; summaries report the snapped values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Probe {
    /// `Q_s · Q_t`. For the discrete chain the tangent at bead `k` is the
    /// unit bond ending there (bond 1 at bead 0).
    TangentDot { s: f64, t: f64 },
    TangentComponent { s: f64, axis: usize },
    PositionComponent { s: f64, axis: usize },
    /// `|R_s|²`.
    SquaredPosition { s: f64 },
    /// Component of `R_to − R_from`.
    PositionIncrementComponent { from: f64, to: f64, axis: usize },
    /// `max_k |R_k − s_k e3|` over the whole grid.
    SupRodDeviation,
}

#[derive(Debug, Clone, Copy)]
enum Resolved {
    TangentDot(usize, usize),
    TangentComponent(usize, usize),
    PositionComponent(usize, usize),
    SquaredPosition(usize),
    PositionIncrement(usize, usize, usize),
    SupRodDeviation,
}

fn check_axis(axis: usize) -> Result<()> {
    if axis > 2 {
        return Err(invalid(format!("axis {axis} out of range 0..=2")));
    }
    Ok(())
}

impl Probe {
    fn resolve(&self, grid: &Grid) -> Result<(Probe, Resolved)> {
        Ok(match *self {
            Probe::TangentDot { s, t } => {
                let (i, s) = grid.snap(s)?;
                let (j, t) = grid.snap(t)?;
                (Probe::TangentDot { s, t }, Resolved::TangentDot(i, j))
            }
            Probe::TangentComponent { s, axis } => {
                check_axis(axis)?;
                let (i, s) = grid.snap(s)?;
                (Probe::TangentComponent { s, axis }, Resolved::TangentComponent(i, axis))
            }
            Probe::PositionComponent { s, axis } => {
                check_axis(axis)?;
                let (i, s) = grid.snap(s)?;
                (Probe::PositionComponent { s, axis }, Resolved::PositionComponent(i, axis))
            }
            Probe::SquaredPosition { s } => {
                let (i, s) = grid.snap(s)?;
                (Probe::SquaredPosition { s }, Resolved::SquaredPosition(i))
            }
            Probe::PositionIncrementComponent { from, to, axis } => {
                check_axis(axis)?;
                let (i, from) = grid.snap(from)?;
                let (j, to) = grid.snap(to)?;
                (
                    Probe::PositionIncrementComponent { from, to, axis },
                    Resolved::PositionIncrement(i, j, axis),
                )
            }
            Probe::SupRodDeviation => (Probe::SupRodDeviation, Resolved::SupRodDeviation),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Observable {
    Mean(Probe),
    Variance(Probe),
    Covariance(Probe, Probe),
}

#[derive(Debug, Clone, Copy)]
enum ResolvedObservable {
    Moments(Resolved),
    CoMoments(Resolved, Resolved),
}

impl Observable {
    fn resolve(&self, grid: &Grid) -> Result<(Observable, ResolvedObservable)> {
        Ok(match self {
            Observable::Mean(p) => {
                let (p, r) = p.resolve(grid)?;
                (Observable::Mean(p), ResolvedObservable::Moments(r))
            }
            Observable::Variance(p) => {
                let (p, r) = p.resolve(grid)?;
                (Observable::Variance(p), ResolvedObservable::Moments(r))
            }
            Observable::Covariance(a, b) => {
                let (a, ra) = a.resolve(grid)?;
                let (b, rb) = b.resolve(grid)?;
                (Observable::Covariance(a, b), ResolvedObservable::CoMoments(ra, rb))
            }
        })
    }

    /// Same observable with its arclengths snapped to `grid`.
    pub fn snapped(&self, grid: &Grid) -> Result<Observable> {
        Ok(self.resolve(grid)?.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Accumulator {
    Moments(Moments),
    CoMoments(CoMoments),
}

impl Accumulator {
    fn merge(&mut self, other: &Accumulator) -> Result<()> {
        match (self, other) {
            (Accumulator::Moments(a), Accumulator::Moments(b)) => a.merge(b),
            (Accumulator::CoMoments(a), Accumulator::CoMoments(b)) => a.merge(b),
            _ => return Err(invalid("cannot merge accumulators of different kinds")),
        }
        Ok(())
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub observable: Observable,
    pub acc: Accumulator,
}

impl SummaryEntry {
    pub fn estimate(&self) -> Estimate {
        match (&self.observable, &self.acc) {
            (Observable::Mean(_), Accumulator::Moments(m)) => Estimate {
                value: m.mean,
                stderr: m.stderr_mean(),
            },
            (Observable::Variance(_), Accumulator::Moments(m)) => Estimate {
                value: m.variance(),
                stderr: m.stderr_variance(),
            },
            (_, Accumulator::CoMoments(c)) => Estimate {
                value: c.covariance(),
                stderr: c.stderr_covariance(),
            },
            (Observable::Covariance(..), Accumulator::Moments(_)) => {
                unreachable!("covariance always carries co-moments")
            }
        }
    }
}

/// Merged accumulators of an ensemble, one entry per requested observable
/// in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub model: Model,
    pub n_paths: u64,
    pub entries: Vec<SummaryEntry>,
}

impl EnsembleSummary {
    pub fn estimate(&self, index: usize) -> Estimate {
        self.entries[index].estimate()
    }

    /// Entry for `observable` after snapping it to this ensemble's grid.
    pub fn find(&self, observable: &Observable) -> Result<Estimate> {
        let snapped = observable.snapped(&self.model.grid())?;
        self.entries
            .iter()
            .find(|e| e.observable == snapped)
            .map(SummaryEntry::estimate)
            .ok_or_else(|| invalid(format!("observable {snapped:?} not in summary")))
    }

    /// Combines summaries of disjoint path sets with identical observables.
    pub fn merge(&mut self, other: &EnsembleSummary) -> Result<()> {
        if self.entries.len() != other.entries.len()
            || self
                .entries
                .iter()
                .zip(&other.entries)
                .any(|(a, b)| a.observable != b.observable)
        {
            return Err(invalid("summaries track different observables"));
        }
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.acc.merge(&b.acc)?;
        }
        self.n_paths += other.n_paths;
        Ok(())
    }
}

enum PathRef<'a> {
    Frc(&'a DiscreteChain),
    Kp(&'a PathSample),
}

impl PathRef<'_> {
    fn tangent(&self, k: usize) -> Vec3 {
        match self {
            PathRef::Frc(c) => so3::scale(&c.bond(k.max(1)), 1.0 / c.bond_length()),
            PathRef::Kp(p) => p.tangents()[k].get(),
        }
    }

    fn position(&self, k: usize) -> Vec3 {
        match self {
            PathRef::Frc(c) => c.beads()[k],
            PathRef::Kp(p) => p.positions()[k],
        }
    }

    fn positions(&self) -> &[Vec3] {
        match self {
            PathRef::Frc(c) => c.beads(),
            PathRef::Kp(p) => p.positions(),
        }
    }

    fn eval(&self, probe: &Resolved, grid: &Grid) -> f64 {
        match *probe {
            Resolved::TangentDot(i, j) => so3::dot(&self.tangent(i), &self.tangent(j)),
            Resolved::TangentComponent(i, a) => self.tangent(i)[a],
            Resolved::PositionComponent(i, a) => self.position(i)[a],
            Resolved::SquaredPosition(i) => {
                let r = self.position(i);
                so3::dot(&r, &r)
            }
            Resolved::PositionIncrement(i, j, a) => self.position(j)[a] - self.position(i)[a],
            Resolved::SupRodDeviation => self
                .positions()
                .iter()
                .enumerate()
                .map(|(k, r)| so3::norm(&[r[0], r[1], r[2] - grid.at(k)]))
                .fold(0.0, f64::max),
        }
    }
}

fn empty_accumulators(resolved: &[ResolvedObservable]) -> Vec<Accumulator> {
    resolved
        .iter()
        .map(|r| match r {
            ResolvedObservable::Moments(_) => Accumulator::Moments(Moments::new()),
            ResolvedObservable::CoMoments(..) => Accumulator::CoMoments(CoMoments::new()),
        })
        .collect()
}

fn run_chunk(
    model: &Model,
    grid: &Grid,
    resolved: &[ResolvedObservable],
    seed: u64,
    paths: std::ops::Range<usize>,
) -> Result<Vec<Accumulator>> {
    let mut accs = empty_accumulators(resolved);
    for i in paths {
        let mut rng = path_rng(seed, i as u64);
        let chain;
        let sample;
        let path = match model {
            Model::Frc(cfg) => {
                chain = sample_frc(cfg, &mut rng)?;
                PathRef::Frc(&chain)
            }
            Model::Kp(cfg) => {
                sample = simulate_kp(cfg, &mut rng)?;
                PathRef::Kp(&sample)
            }
        };
        for (acc, obs) in accs.iter_mut().zip(resolved) {
            match (acc, obs) {
                (Accumulator::Moments(m), ResolvedObservable::Moments(p)) => {
                    m.push(path.eval(p, grid))
                }
                (Accumulator::CoMoments(c), ResolvedObservable::CoMoments(a, b)) => {
                    c.push(path.eval(a, grid), path.eval(b, grid))
                }
                _ => unreachable!("accumulators are built from the same list"),
            }
        }
    }
    Ok(accs)
}

/// Generates `n_paths` independent paths of `model` and accumulates every
/// observable. `workers = None` uses the global rayon pool.
pub fn run_ensemble(
    model: &Model,
    n_paths: usize,
    observables: &[Observable],
    seed: u64,
    workers: Option<usize>,
) -> Result<EnsembleSummary> {
    if n_paths < 2 {
        return Err(invalid("an ensemble needs at least two paths"));
    }
    if observables.is_empty() {
        return Err(invalid("no observables requested"));
    }
    let grid = model.grid();
    let (snapped, resolved): (Vec<_>, Vec<_>) = observables
        .iter()
        .map(|o| o.resolve(&grid))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let n_chunks = n_paths.div_ceil(CHUNK);
    let work = || -> Result<Vec<Vec<Accumulator>>> {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let paths = c * CHUNK..((c + 1) * CHUNK).min(n_paths);
                run_chunk(model, &grid, &resolved, seed, paths)
            })
            .collect()
    };
    let chunks = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::NumericFailure(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut accs = empty_accumulators(&resolved);
    for chunk in &chunks {
        for (acc, part) in accs.iter_mut().zip(chunk) {
            acc.merge(part)?;
        }
    }
    Ok(EnsembleSummary {
        model: *model,
        n_paths: n_paths as u64,
        entries: snapped
            .into_iter()
            .zip(accs)
            .map(|(observable, acc)| SummaryEntry { observable, acc })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp() -> Model {
        Model::Kp(KpConfig::new(1.0, 0.5, Some(50)).unwrap())
    }

    #[test]
    fn rejects_bad_requests() {
        let obs = [Observable::Mean(Probe::SquaredPosition { s: 1.0 })];
        assert!(run_ensemble(&kp(), 1, &obs, 0, None).is_err());
        assert!(run_ensemble(&kp(), 10, &[], 0, None).is_err());
        let far = [Observable::Mean(Probe::SquaredPosition { s: 1.5 })];
        assert!(run_ensemble(&kp(), 10, &far, 0, None).is_err());
        let axis = [Observable::Mean(Probe::PositionComponent { s: 0.5, axis: 3 })];
        assert!(run_ensemble(&kp(), 10, &axis, 0, None).is_err());
    }

    #[test]
    fn pinned_start_is_deterministic() {
        let obs = [
            Observable::Mean(Probe::PositionComponent { s: 0.0, axis: 0 }),
            Observable::Mean(Probe::PositionComponent { s: 0.0, axis: 1 }),
            Observable::Mean(Probe::PositionComponent { s: 0.0, axis: 2 }),
            Observable::Mean(Probe::TangentComponent { s: 0.0, axis: 2 }),
        ];
        for model in [kp(), Model::Frc(FrcConfig::raw(20, 0.1, 0.3).unwrap())] {
            let sum = run_ensemble(&model, 2, &obs, 5, None).unwrap();
            for i in 0..3 {
                assert_eq!(sum.estimate(i), Estimate { value: 0.0, stderr: 0.0 });
            }
            assert_eq!(sum.estimate(3), Estimate { value: 1.0, stderr: 0.0 });
        }
    }

    #[test]
    fn snapping_reports_grid_values() {
        let grid = kp().grid();
        assert_eq!(grid.snap(0.333).unwrap().0, 17);
        let o = Observable::Mean(Probe::TangentDot { s: 0.0, t: 0.333 }).snapped(&grid).unwrap();
        assert_eq!(o, Observable::Mean(Probe::TangentDot { s: 0.0, t: 17.0 * 0.02 }));
        assert!(grid.snap(-0.001).is_err());
        assert!(grid.snap(f64::NAN).is_err());
    }

    #[test]
    fn frc_tangent_at_bead_zero_is_first_bond() {
        let model = Model::Frc(FrcConfig::raw(5, 0.2, 0.4).unwrap());
        let obs = [
            Observable::Mean(Probe::TangentDot { s: 0.0, t: 0.2 }),
            Observable::Mean(Probe::TangentDot { s: 0.2, t: 0.4 }),
        ];
        let sum = run_ensemble(&model, 8, &obs, 1, None).unwrap();
        assert!((sum.estimate(0).value - 1.0).abs() < 1e-12);
        assert!((sum.estimate(1).value - 0.4f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let obs = [
            Observable::Mean(Probe::SquaredPosition { s: 1.0 }),
            Observable::Variance(Probe::PositionComponent { s: 0.5, axis: 0 }),
            Observable::Covariance(
                Probe::PositionComponent { s: 1.0, axis: 0 },
                Probe::PositionComponent { s: 1.0, axis: 2 },
            ),
            Observable::Mean(Probe::SupRodDeviation),
        ];
        let one = run_ensemble(&kp(), 300, &obs, 77, Some(1)).unwrap();
        let many = run_ensemble(&kp(), 300, &obs, 77, Some(8)).unwrap();
        assert_eq!(one, many);
        let other = run_ensemble(&kp(), 300, &obs, 78, Some(1)).unwrap();
        assert_ne!(one, other);
    }

    #[test]
    fn merging_halves_matches_single_run_statistics() {
        let obs = [Observable::Mean(Probe::SquaredPosition { s: 1.0 })];
        let mut a = run_ensemble(&kp(), 100, &obs, 1, None).unwrap();
        let b = run_ensemble(&kp(), 100, &obs, 2, None).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.n_paths, 200);
        let other = run_ensemble(&kp(), 100, &[Observable::Mean(Probe::SupRodDeviation)], 1, None).unwrap();
        assert!(a.merge(&other).is_err());
    }

    #[test]
    fn path_streams_are_distinct() {
        use rand::Rng;
        let x: u64 = path_rng(9, 0).random();
        let y: u64 = path_rng(9, 1).random();
        let z: u64 = path_rng(9, 0).random();
        assert_ne!(x, y);
        assert_eq!(x, z);
    }
}
