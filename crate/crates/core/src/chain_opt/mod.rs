//! Finite-chain minimization and ground-energy estimation.
//!
//! Minimizers are found in two stages: a min-plus DP over a position grid
//! locates the global structure, then a damped Newton iteration on the
//! tridiagonal Hessian polishes the positions off the grid.

mod dp;
mod refine;
mod repair;

pub use dp::Grid;
pub use repair::{aubry_exchange_repair, crossing_gain, repaired_energy, structure_report, Repair, StructureReport};

use serde::Serialize;

use crate::environments::EnvPoint;
use crate::lagrangians::{BoundEnergy, LagrangianSpec};
use crate::{Error, Exec, Result};

use dp::FreeDp;
use refine::Refiner;

/// Largest chain length accepted by [`ground_energy`].
pub const MAX_GROUND_N: usize = 64;

/// A finite configuration `x_0, …, x_n` with its energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    pub positions: Vec<f64>,
    pub energy: f64,
    pub env: EnvPoint,
}

impl Chain {
    pub fn new(e: &BoundEnergy, positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::domain("a chain needs at least two points"));
        }
        Ok(Chain { energy: e.chain_energy(&positions), positions, env: e.env })
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.positions.len() - 1
    }

    /// `(x_n − x_0) / n`.
    pub fn rotation(&self) -> f64 {
        (self.positions[self.steps()] - self.positions[0]) / self.steps() as f64
    }

    pub fn jumps(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_jump(&self) -> f64 {
        self.jumps().map(f64::abs).fold(0.0, f64::max)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.jumps().all(|d| d > 0.0)
    }

    pub fn is_strictly_monotone(&self) -> bool {
        self.jumps().all(|d| d > 0.0) || self.jumps().all(|d| d < 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Grid step of the DP stage.
    pub h: f64,
    /// Largest jump `|x_{k+1} − x_k|` considered by the DP.
    pub jump_cap: f64,
    pub max_sweeps: usize,
    /// Stop once no position moves by more than this.
    pub tol: f64,
    pub exec: Exec,
}

impl SolverOptions {
    pub fn for_model(model: &LagrangianSpec) -> Self {
        let lambda = model.lambda().abs();
        SolverOptions { h: 0.05 * lambda.max(1.0), jump_cap: lambda + 3.0, max_sweeps: 500, tol: 1e-9, exec: Exec::default() }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::domain(format!("grid step h = {} must be positive", self.h)));
        }
        if !(self.jump_cap >= self.h) {
            return Err(Error::domain("jump cap must be at least one grid step"));
        }
        Ok(())
    }

    fn jump(&self) -> usize {
        (self.jump_cap / self.h).floor() as usize
    }

    fn refiner<'a>(&self, e: &'a BoundEnergy, free: bool) -> Refiner<'a> {
        Refiner { e, free_start: free, free_end: free, tol: self.tol, max_iter: self.max_sweeps, bracket: self.h }
    }
}

/// Refines a grid chain and keeps whichever of the two is cheaper.
fn polish(e: &BoundEnergy, grid_chain: Vec<f64>, free: bool, opts: &SolverOptions) -> Result<Chain> {
    let grid_energy = e.chain_energy(&grid_chain);
    let refined = opts.refiner(e, free).run(grid_chain.clone())?;
    let chain = Chain::new(e, refined)?;
    if chain.energy <= grid_energy {
        Ok(chain)
    } else {
        Chain::new(e, grid_chain)
    }
}

/// Minimizer of `E(x_0, …, x_n)` with `x_0 = x_start`, `x_n = x_end`.
pub fn minimize_fixed(
    model: &LagrangianSpec,
    env: &EnvPoint,
    x_start: f64,
    x_end: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<Chain> {
    opts.check()?;
    if n < 2 {
        return Err(Error::domain("fixed-endpoint minimization needs n ≥ 2"));
    }
    if (x_end - x_start).abs() > n as f64 * opts.jump_cap {
        return Err(Error::domain(format!(
            "endpoints {x_start} and {x_end} are farther apart than {n} jumps of {}",
            opts.jump_cap
        )));
    }
    let e = model.bind(env)?;
    let (grid_chain, _) = dp::fixed_chain(&e, x_start, x_end, n, opts.h, opts.jump_cap, opts.exec)?;
    polish(&e, grid_chain, false, opts)
}

/// The best grid chain only, without refinement.
pub fn grid_minimize_fixed(
    model: &LagrangianSpec,
    env: &EnvPoint,
    x_start: f64,
    x_end: f64,
    n: usize,
    opts: &SolverOptions,
) -> Result<Chain> {
    opts.check()?;
    let e = model.bind(env)?;
    let (xs, _) = dp::fixed_chain(&e, x_start, x_end, n, opts.h, opts.jump_cap, opts.exec)?;
    Chain::new(&e, xs)
}

/// Default free window: centred at 0, length `n·R + 2R`.
pub fn default_window(n: usize, opts: &SolverOptions) -> (f64, f64) {
    let half = 0.5 * (n as f64 + 2.0) * opts.jump_cap;
    (-half, half)
}

/// Free minimizers for every `n` in `ns`, from one DP sweep.
pub fn free_minimizers(
    e: &BoundEnergy,
    ns: &[usize],
    window: Option<(f64, f64)>,
    opts: &SolverOptions,
) -> Result<Vec<Chain>> {
    opts.check()?;
    let n_max = *ns.iter().max().ok_or_else(|| Error::domain("empty list of chain lengths"))?;
    if ns.contains(&0) {
        return Err(Error::domain("chain lengths must be at least 1"));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(n_max, opts));
    if hi - lo < n_max as f64 * opts.jump_cap {
        return Err(Error::domain(format!(
            "window [{lo}, {hi}] is shorter than {n_max} jumps of {}",
            opts.jump_cap
        )));
    }
    let grid = Grid::covering(0.0, lo, hi, opts.h)?;
    let table = FreeDp::run(e, grid, n_max, opts.jump(), opts.exec)?;
    let polished = opts.exec.map(ns, |&n| polish(e, table.chain(n), true, &SolverOptions { exec: Exec::Sequential, ..*opts }));
    polished.into_iter().collect()
}

/// Free minimizer of `n` steps and its energy `m_n`.
pub fn minimize_free(model: &LagrangianSpec, env: &EnvPoint, n: usize, opts: &SolverOptions) -> Result<(Chain, f64)> {
    let e = model.bind(env)?;
    let chain = free_minimizers(&e, &[n], None, opts)?.pop().expect("one chain per length");
    let m = chain.energy;
    Ok((chain, m))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundEnergyEstimate {
    pub n: Vec<usize>,
    pub m_n: Vec<f64>,
    /// `max_n m_n / n`, a lower bound by superadditivity.
    pub lower_bound: f64,
    /// Intercept of the fit `m_n/n = E̅ − c/n` over the top half of `n`.
    pub extrapolated: f64,
    pub fit_slope: f64,
    /// Sampled `inf_{x,y} E(x, y)`.
    pub sandwich_low: f64,
    /// Sampled `inf_x E(x, x)`.
    pub sandwich_high: f64,
    pub h: f64,
    pub jump_cap: f64,
    #[serde(skip)]
    pub minimizers: Vec<Chain>,
}

impl GroundEnergyEstimate {
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.n.iter().zip(&self.m_n).map(|(&n, &m)| m / n as f64)
    }
}

const SANDWICH_SAMPLES: usize = 4096;

/// Sampled a-priori bounds `inf E ≤ E̅ ≤ inf_x E(x, x)`.
pub fn a_priori_bounds(e: &BoundEnergy) -> (f64, f64) {
    let span = match e.env {
        EnvPoint::Quasicrystal(set) => 8.0 * set.alpha.long_gap() as f64,
        _ => 8.0,
    };
    let (mut pmin, mut diag) = (f64::INFINITY, f64::INFINITY);
    for i in 0..SANDWICH_SAMPLES {
        let x = span * i as f64 / SANDWICH_SAMPLES as f64;
        pmin = pmin.min(e.potential(x));
        diag = diag.min(e.diagonal(x));
    }
    // W attains 0 at t = λ for both springs.
    (pmin, diag)
}

fn fit_intercept(ns: &[usize], ratios: &[f64]) -> (f64, f64) {
    let k = ns.len() as f64;
    let xs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ratios.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ratios).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, -slope)
}

/// Ground energy from free minimizers of the lengths in `ns`.
pub fn ground_energy(
    model: &LagrangianSpec,
    env: &EnvPoint,
    ns: &[usize],
    opts: &SolverOptions,
) -> Result<GroundEnergyEstimate> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("n_list must be nonempty and strictly increasing"));
    }
    if ns[ns.len() - 1] > MAX_GROUND_N {
        return Err(Error::domain(format!("n_list entries must be at most {MAX_GROUND_N}")));
    }
    let e = model.bind(env)?;
    let minimizers = free_minimizers(&e, ns, None, opts)?;
    let m_n: Vec<f64> = minimizers.iter().map(|c| c.energy).collect();
    let ratios: Vec<f64> = ns.iter().zip(&m_n).map(|(&n, &m)| m / n as f64).collect();
    let lower_bound = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (sandwich_low, sandwich_high) = a_priori_bounds(&e);

    let top = ns.len() / 2;
    let (mut extrapolated, fit_slope) =
        if ns.len() - top >= 2 { fit_intercept(&ns[top..], &ratios[top..]) } else { (lower_bound, 0.0) };
    extrapolated = extrapolated.min(sandwich_high).max(lower_bound);

    Ok(GroundEnergyEstimate {
        n: ns.to_vec(),
        m_n,
        lower_bound,
        extrapolated,
        fit_slope,
        sandwich_low,
        sandwich_high,
        h: opts.h,
        jump_cap: opts.jump_cap,
        minimizers,
    })
}
