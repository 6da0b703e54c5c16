//! Min-plus dynamic programming over a uniform position grid.

use crate::lagrangians::BoundEnergy;
use crate::{Error, Exec, Result};

/// Cap on `layers × nodes` for one DP run.
pub(crate) const MAX_DP_WORK: usize = 400_000_000;

/// Nodes `base + (first + i)·h` for `i ∈ [0, len)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub base: f64,
    pub first: i64,
    pub len: usize,
    pub h: f64,
}

impl Grid {
    /// Grid anchored at `base` covering `[lo, hi]`.
    pub fn covering(base: f64, lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("grid step {h} must be positive")));
        }
        let first = ((lo - base) / h).floor() as i64;
        let last = ((hi - base) / h).ceil() as i64;
        let len = (last - first + 1) as usize;
        if len > 50_000_000 {
            return Err(Error::resource(format!("grid of {len} nodes is too large")));
        }
        Ok(Grid { base, first, len, h })
    }

    #[inline]
    pub fn pos(&self, i: usize) -> f64 {
        self.base + (self.first + i as i64) as f64 * self.h
    }

    /// Index of `base` itself.
    pub fn anchor(&self) -> usize {
        (-self.first) as usize
    }
}

pub(crate) fn spring_table(e: &BoundEnergy, h: f64, jump: usize) -> Vec<f64> {
    (0..=2 * jump).map(|j| e.spring((j as f64 - jump as f64) * h)).collect()
}

/// One min-plus layer: `next[y] = min_z g[z] + w[y − z + J]`, first minimizer wins.
pub(crate) fn relax(g: &[f64], w: &[f64], jump: usize, exec: Exec) -> (Vec<f64>, Vec<u32>) {
    let len = g.len();
    let mut out = vec![(f64::INFINITY, u32::MAX); len];
    exec.for_each_mut(&mut out, |y, slot| {
        let lo = y.saturating_sub(jump);
        let hi = (y + jump).min(len - 1);
        let mut best = f64::INFINITY;
        let mut arg = u32::MAX;
        for z in lo..=hi {
            let v = g[z] + w[y + jump - z];
            if v < best {
                best = v;
                arg = z as u32;
            }
        }
        *slot = (best, arg);
    });
    out.into_iter().unzip()
}

/// Free-endpoint DP: for every `k ≤ n_max` the best chain of `k` steps.
pub(crate) struct FreeDp {
    pub grid: Grid,
    pub best: Vec<(f64, usize)>,
    back: Vec<Vec<u32>>,
}

impl FreeDp {
    pub fn run(e: &BoundEnergy, grid: Grid, n_max: usize, jump: usize, exec: Exec) -> Result<Self> {
        if grid.len.saturating_mul(n_max) > MAX_DP_WORK {
            return Err(Error::resource(format!(
                "free DP with {} nodes and {n_max} layers exceeds the work cap",
                grid.len
            )));
        }
        let pot = exec.map_range(grid.len, |i| e.potential(grid.pos(i)));
        let w = spring_table(e, grid.h, jump);
        let mut d = vec![0.0; grid.len];
        let mut best = vec![(0.0, 0)];
        let mut back = vec![Vec::new()];
        for _ in 1..=n_max {
            let g: Vec<f64> = d.iter().zip(&pot).map(|(a, b)| a + b).collect();
            let (next, arg) = relax(&g, &w, jump, exec);
            best.push(argmin(&next));
            back.push(arg);
            d = next;
        }
        Ok(FreeDp { grid, best, back })
    }

    /// Grid chain realizing `best[n]`.
    pub fn chain(&self, n: usize) -> Vec<f64> {
        let mut idx = vec![self.best[n].1; n + 1];
        for k in (1..=n).rev() {
            idx[k - 1] = self.back[k][idx[k]] as usize;
        }
        idx.into_iter().map(|i| self.grid.pos(i)).collect()
    }
}

fn argmin(v: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, &x) in v.iter().enumerate() {
        if x < best.0 {
            best = (x, i);
        }
    }
    best
}

/// Best grid chain from `x_start` to `x_end` in `n ≥ 1` steps with jumps ≤ `cap`.
///
/// Interior points live on a grid anchored at `x_start`; the final step to
/// `x_end` is evaluated off-grid.
pub(crate) fn fixed_chain(
    e: &BoundEnergy,
    x_start: f64,
    x_end: f64,
    n: usize,
    h: f64,
    cap: f64,
    exec: Exec,
) -> Result<(Vec<f64>, f64)> {
    if n == 1 {
        return Ok((vec![x_start, x_end], e.energy(x_start, x_end)));
    }
    let jump = (cap / h).floor() as usize;
    let grid = Grid::covering(x_start, x_start.min(x_end) - cap, x_start.max(x_end) + cap, h)?;
    if grid.len.saturating_mul(n) > MAX_DP_WORK {
        return Err(Error::resource("fixed-endpoint DP exceeds the work cap"));
    }
    let s = grid.anchor();
    let pot = exec.map_range(grid.len, |i| e.potential(grid.pos(i)));
    let w = spring_table(e, h, jump);

    let mut d: Vec<f64> = (0..grid.len)
        .map(|y| if y.abs_diff(s) <= jump { e.energy(x_start, grid.pos(y)) } else { f64::INFINITY })
        .collect();
    let mut back = Vec::with_capacity(n);
    for _ in 2..n {
        let g: Vec<f64> = d.iter().zip(&pot).map(|(a, b)| a + b).collect();
        let (next, arg) = relax(&g, &w, jump, exec);
        back.push(arg);
        d = next;
    }
    let mut best = (f64::INFINITY, usize::MAX);
    for (z, &dz) in d.iter().enumerate() {
        let xz = grid.pos(z);
        if (x_end - xz).abs() > cap {
            continue;
        }
        let v = dz + e.energy(xz, x_end);
        if v < best.0 {
            best = (v, z);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::domain(format!(
            "no chain of {n} steps with jumps ≤ {cap} joins {x_start} to {x_end}"
        )));
    }
    // idx[k] is the grid index of x_{k+1}.
    let mut idx = vec![best.1; n - 1];
    for k in (1..n - 1).rev() {
        idx[k - 1] = back[k - 1][idx[k]] as usize;
    }
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(x_start);
    xs.extend(idx.into_iter().map(|i| grid.pos(i)));
    xs.push(x_end);
    let energy = e.chain_energy(&xs);
    Ok((xs, energy))
}
