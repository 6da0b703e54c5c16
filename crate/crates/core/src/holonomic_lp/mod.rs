//! Finite holonomic-measure linear program for the circle model.
//!
//! Grid points `ω_j = j/N` and jumps `t_k = k/N` make every translate land
//! on the grid, so holonomy becomes flow conservation on a finite graph and
//! minimizing measures become minimum mean cycles.

mod simplex;

use serde::Serialize;

use crate::environments::EnvPoint;
use crate::lagrangians::{LagrangianSpec, Potential};
use crate::{Error, Exec, Result};

/// Largest variable count accepted by [`discretize_circle`].
pub const MAX_VARIABLES: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpProblem {
    pub model: LagrangianSpec,
    pub n: usize,
    pub t_max: f64,
    /// Jump numerators `k`, so `t_k = k/N`.
    pub jumps: Vec<i64>,
    /// `cost[j·|T| + k] = L(ω_j, t_k)`.
    pub cost: Vec<f64>,
}

impl LpProblem {
    pub fn arcs(&self) -> usize {
        self.cost.len()
    }

    /// `(from, to, jump index)` of arc `a`.
    pub fn arc(&self, a: usize) -> (usize, usize, usize) {
        let nt = self.jumps.len();
        let (j, k) = (a / nt, a % nt);
        (j, (j as i64 + self.jumps[k]).rem_euclid(self.n as i64) as usize, k)
    }

    pub fn jump(&self, k: usize) -> f64 {
        self.jumps[k] as f64 / self.n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub n: usize,
    pub jumps: Vec<i64>,
    /// `weights[j·|T| + k]`.
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `max_j |outflow(j) − inflow(j)|`.
    pub fn holonomy_residual(&self) -> f64 {
        let nt = self.jumps.len();
        let mut net = vec![0.0; self.n];
        for (a, &w) in self.weights.iter().enumerate() {
            let (j, k) = (a / nt, a % nt);
            let to = (j as i64 + self.jumps[k]).rem_euclid(self.n as i64) as usize;
            net[j] += w;
            net[to] -= w;
        }
        net.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualPotential {
    pub u: Vec<f64>,
    pub value: f64,
}

impl DualPotential {
    /// `max_arcs (value − L − u[j] + u[j'])`, nonpositive up to rounding
    /// for a feasible potential.
    pub fn violation(&self, lp: &LpProblem) -> f64 {
        (0..lp.arcs())
            .map(|a| {
                let (j, to, _) = lp.arc(a);
                self.value - lp.cost[a] - self.u[j] + self.u[to]
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub measure: DiscreteMeasure,
    pub primal: f64,
    pub dual: DualPotential,
    pub pivots: usize,
}

impl LpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal - self.dual.value).abs()
    }
}

/// Builds the LP for a circle-cosine model on the grid `j/N`.
pub fn discretize_circle(model: &LagrangianSpec, n: usize, t_max: f64) -> Result<LpProblem> {
    if !matches!(model.potential, Potential::CircleCosine { .. }) {
        return Err(Error::domain("only the circle-cosine model has a grid-exact discretization"));
    }
    if !(8..=512).contains(&n) {
        return Err(Error::domain(format!("N = {n} outside [8, 512]")));
    }
    if !(t_max >= model.lambda() + 1.0) {
        return Err(Error::domain(format!("T_max = {t_max} must be at least λ + 1")));
    }
    let kmax = (t_max * n as f64 + 1e-9).floor() as i64;
    let nt = 2 * kmax as usize + 1;
    if n.saturating_mul(nt) > MAX_VARIABLES {
        return Err(Error::resource(format!("{} variables exceed the cap of {MAX_VARIABLES}", n * nt)));
    }
    let e = model.bind(&EnvPoint::circle(0.0))?;
    let jumps: Vec<i64> = (-kmax..=kmax).collect();
    let mut cost = Vec::with_capacity(n * nt);
    for j in 0..n {
        let x = j as f64 / n as f64;
        for &k in &jumps {
            cost.push(e.energy(x, x + k as f64 / n as f64));
        }
    }
    Ok(LpProblem { model: *model, n, t_max, jumps, cost })
}

/// Solves the primal LP and reads the dual potential off the final tableau.
///
/// Rows are holonomy at `j = 0..N−2` (the last is implied) and total mass.
pub fn solve(lp: &LpProblem) -> Result<LpSolution> {
    let n = lp.n;
    let vars = lp.arcs();
    let m = n;
    let mut a = vec![0.0; m * vars];
    for arc in 0..vars {
        let (j, to, _) = lp.arc(arc);
        if j != to {
            if j < n - 1 {
                a[j * vars + arc] += 1.0;
            }
            if to < n - 1 {
                a[to * vars + arc] -= 1.0;
            }
        }
        a[(m - 1) * vars + arc] = 1.0;
    }
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    let s = simplex::solve(&a, &b, &lp.cost)?;
    // Reduced cost c − y_j + y_to − y_mass ≥ 0, so u = −y.
    let mut u: Vec<f64> = s.y[..n - 1].iter().map(|v| -v).collect();
    u.push(0.0);
    Ok(LpSolution {
        measure: DiscreteMeasure { n, jumps: lp.jumps.clone(), weights: s.x.iter().map(|&w| w.max(0.0)).collect() },
        primal: s.value,
        dual: DualPotential { u, value: s.y[m - 1] },
        pivots: s.pivots,
    })
}

/// Primal measure and value.
pub fn solve_primal(lp: &LpProblem) -> Result<(DiscreteMeasure, f64)> {
    solve(lp).map(|s| (s.measure, s.primal))
}

/// Dual potential from the optimal tableau.
pub fn solve_dual(lp: &LpProblem) -> Result<DualPotential> {
    solve(lp).map(|s| s.dual)
}

/// Solves independent instances, concurrently when `exec` allows.
pub fn solve_batch(problems: &[LpProblem], exec: Exec) -> Vec<Result<LpSolution>> {
    exec.map(problems, solve)
}

/// Minimum mean cost of a cycle in the arc graph (Karp).
pub fn min_mean_cycle(lp: &LpProblem) -> f64 {
    let n = lp.n;
    // d[k][v]: cheapest walk of exactly k arcs ending at v, from anywhere.
    let mut d = vec![vec![f64::INFINITY; n]; n + 1];
    d[0].iter_mut().for_each(|v| *v = 0.0);
    for k in 1..=n {
        let (prev, cur) = d.split_at_mut(k);
        let (prev, cur) = (&prev[k - 1], &mut cur[0]);
        for arc in 0..lp.arcs() {
            let (j, to, _) = lp.arc(arc);
            let v = prev[j] + lp.cost[arc];
            if v < cur[to] {
                cur[to] = v;
            }
        }
    }
    (0..n)
        .filter(|&v| d[n][v].is_finite())
        .map(|v| (0..n).map(|k| (d[n][v] - d[k][v]) / (n - k) as f64).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatherSupport {
    /// `(j, k)` with `k` the jump numerator.
    pub arcs: Vec<(usize, i64)>,
    /// Distinct grid points carrying support.
    pub projection: Vec<usize>,
}

/// Arcs with weight above `threshold · max weight`.
pub fn mather_support(mu: &DiscreteMeasure, threshold: f64) -> Result<MatherSupport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!("threshold {threshold} outside (0, 1)")));
    }
    let nt = mu.jumps.len();
    let top = mu.weights.iter().copied().fold(0.0, f64::max);
    let arcs: Vec<(usize, i64)> = mu
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > threshold * top)
        .map(|(a, _)| (a / nt, mu.jumps[a % nt]))
        .collect();
    let mut projection: Vec<usize> = arcs.iter().map(|a| a.0).collect();
    projection.dedup();
    Ok(MatherSupport { arcs, projection })
}

#[cfg(test)]
mod tests;
