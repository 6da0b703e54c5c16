use serde::Serialize;

use crate::environments::EnvPoint;
use crate::lagrangians::{BoundEnergy, LagrangianSpec, Spring};
use crate::{Error, Exec, Result};

const NO_PRED: u32 = u32::MAX;

/// Discretized Mañé subadditive cocycle `Φ̂(ω, t)` over monotone node chains
/// starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManeTable {
    pub model: LagrangianSpec,
    pub env: EnvPoint,
    pub ebar: f64,
    /// Sorted node positions; `nodes[origin] == 0`.
    pub nodes: Vec<f64>,
    pub origin: usize,
    pub n_max: usize,
    pub values: Vec<f64>,
    pub n_steps: Vec<usize>,
    /// Some optimum used exactly `n_max` steps while longer chains exist.
    pub truncated: bool,
    #[serde(skip)]
    back: Back,
}

#[derive(Clone, Debug, PartialEq)]
enum Back {
    /// Predecessor per node, for the unbounded single pass.
    Single(Vec<u32>),
    /// Predecessor per (layer, node), for the length-capped DP.
    Layered(Vec<Vec<u32>>),
}

/// Nodes `k·h` for `|k| ≤ ⌊X/h⌋`.
pub fn uniform_nodes(x_max: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && x_max > 0.0) {
        return Err(Error::domain("mane table needs h > 0 and X > 0"));
    }
    let k = (x_max / h + 1e-9).floor() as i64;
    if k > 1_000_000 {
        return Err(Error::resource("mane grid too fine"));
    }
    Ok((-k..=k).map(|i| i as f64 * h).collect())
}

impl ManeTable {
    /// Builds the table on an arbitrary sorted node set containing 0.
    pub fn with_nodes(e: &BoundEnergy, ebar: f64, mut nodes: Vec<f64>, n_max: usize, exec: Exec) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let origin = nodes
            .iter()
            .position(|&x| x == 0.0)
            .ok_or_else(|| Error::domain("mane table nodes must contain 0"))?;
        let len = nodes.len();
        let pot = exec.map_range(len, |i| e.potential(nodes[i]));
        let mut values = vec![f64::INFINITY; len];
        let mut n_steps = vec![0; len];
        values[origin] = e.energy(0.0, 0.0) - ebar;
        n_steps[origin] = 1;

        let right: Vec<usize> = (origin + 1..len).collect();
        let left: Vec<usize> = (0..origin).rev().collect();
        let per_side = right.len().max(left.len());
        let mut truncated = false;
        let back = if n_max >= per_side {
            let mut pred = vec![NO_PRED; len];
            for side in [&right, &left] {
                single_pass(e, ebar, &nodes, &pot, origin, side, &mut values, &mut n_steps, &mut pred);
            }
            Back::Single(pred)
        } else {
            let mut layers = vec![vec![NO_PRED; len]; n_max + 1];
            for side in [&right, &left] {
                truncated |= layered(e, ebar, &nodes, &pot, origin, side, n_max, exec, &mut values, &mut n_steps, &mut layers);
            }
            Back::Layered(layers)
        };
        Ok(ManeTable { model: e.model, env: e.env, ebar, nodes, origin, n_max, values, n_steps, truncated, back })
    }

    /// Index of the node equal to `t` within 1e-12.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < t - 1e-12);
        (i < self.nodes.len() && (self.nodes[i] - t).abs() <= 1e-12).then_some(i)
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.index_of(t).map(|i| self.values[i])
    }

    /// Offset `k` from the origin in node units, when it exists.
    pub fn value_offset(&self, k: i64) -> Option<f64> {
        let i = self.origin as i64 + k;
        (0..self.nodes.len() as i64).contains(&i).then(|| self.values[i as usize])
    }

    /// The minimizing chain `0 = x_0, …, x_n = t` for node `i`.
    pub fn argmin_chain(&self, i: usize) -> Vec<f64> {
        if i == self.origin {
            return vec![0.0, 0.0];
        }
        let mut idx = vec![i];
        match &self.back {
            Back::Single(pred) => {
                while pred[*idx.last().unwrap()] != NO_PRED {
                    idx.push(pred[*idx.last().unwrap()] as usize);
                }
            }
            Back::Layered(layers) => {
                let mut k = self.n_steps[i];
                while k > 1 {
                    idx.push(layers[k][*idx.last().unwrap()] as usize);
                    k -= 1;
                }
            }
        }
        idx.push(self.origin);
        idx.into_iter().rev().map(|j| self.nodes[j]).collect()
    }

    pub fn x_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].max(-self.nodes[0])
    }
}

/// `Φ̂` on the uniform grid `k·h ∈ [−X, X]`.
pub fn mane_table(
    model: &LagrangianSpec,
    env: &EnvPoint,
    ebar: f64,
    x_max: f64,
    h: f64,
    n_max: usize,
    exec: Exec,
) -> Result<ManeTable> {
    let nodes = uniform_nodes(x_max, h)?;
    if n_max as f64 > 4.0 * x_max / h + 1e-9 {
        return Err(Error::domain(format!("n_max = {n_max} exceeds 4·X/h")));
    }
    ManeTable::with_nodes(&model.bind(env)?, ebar, nodes, n_max, exec)
}

#[allow(clippy::too_many_arguments)]
fn single_pass(
    e: &BoundEnergy,
    ebar: f64,
    nodes: &[f64],
    pot: &[f64],
    origin: usize,
    side: &[usize],
    values: &mut [f64],
    n_steps: &mut [usize],
    pred: &mut [u32],
) {
    for (a, &j) in side.iter().enumerate() {
        let y = nodes[j];
        let mut best = e.energy(0.0, y) - ebar;
        let mut steps = 1;
        let mut arg = NO_PRED;
        for &i in &side[..a] {
            let v = values[i] + (e.spring(y - nodes[i]) + pot[i]) - ebar;
            if v < best {
                best = v;
                steps = n_steps[i] + 1;
                arg = i as u32;
            }
        }
        values[j] = best;
        n_steps[j] = steps;
        pred[j] = arg;
    }
    let _ = origin;
}

#[allow(clippy::too_many_arguments)]
fn layered(
    e: &BoundEnergy,
    ebar: f64,
    nodes: &[f64],
    pot: &[f64],
    origin: usize,
    side: &[usize],
    n_max: usize,
    exec: Exec,
    values: &mut [f64],
    n_steps: &mut [usize],
    layers: &mut [Vec<u32>],
) -> bool {
    let m = side.len();
    let mut d: Vec<f64> = side.iter().map(|&j| e.energy(nodes[origin], nodes[j]) - ebar).collect();
    let mut best: Vec<(f64, usize)> = d.iter().map(|&v| (v, 1)).collect();
    for (k, layer) in layers.iter_mut().enumerate().take(n_max + 1).skip(2) {
        let mut next = vec![(f64::INFINITY, NO_PRED); m];
        exec.for_each_mut(&mut next, |b, slot| {
            let y = nodes[side[b]];
            for a in 0..b {
                let v = d[a] + (e.spring(y - nodes[side[a]]) + pot[side[a]]) - ebar;
                if v < slot.0 {
                    *slot = (v, side[a] as u32);
                }
            }
        });
        for (b, &(v, p)) in next.iter().enumerate() {
            layer[side[b]] = p;
            if v < best[b].0 {
                best[b] = (v, k);
            }
        }
        d = next.into_iter().map(|(v, _)| v).collect();
    }
    let mut truncated = false;
    for (b, &j) in side.iter().enumerate() {
        values[j] = best[b].0;
        n_steps[j] = best[b].1;
        // A strictly monotone chain to the b-th node has at most b + 1 steps.
        truncated |= best[b].1 == n_max && b + 1 > n_max;
    }
    truncated
}

/// Upper bound on `|∂L/∂t| + |∂L/∂x|` for `|t| ≤ t_max`.
pub fn lipschitz_bound(model: &LagrangianSpec, t_max: f64) -> f64 {
    let s = t_max + model.lambda().abs();
    let w = match model.spring {
        Spring::Quadratic { .. } => s,
        Spring::Quartic { .. } => s.powi(3),
    };
    w + model.potential.slope_bound()
}
