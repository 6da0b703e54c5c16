//! Aubry exchanges and order structure of chains.

use serde::Serialize;

use super::Chain;
use crate::lagrangians::BoundEnergy;
use crate::{Error, Result};

/// Output of [`aubry_exchange_repair`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Repair {
    /// The retained subsequence `x_{i_0}, …, x_{i_r}` with `i_0 = 0`, `i_r = n`.
    pub chain: Chain,
    pub indices: Vec<usize>,
    /// Dropped points, each charged as a fixed point `E(x, x)`.
    pub fixed_points: Vec<f64>,
    /// `E(x_{i_0}, …, x_{i_r}) + Σ_dropped E(x_i, x_i)`.
    pub total_energy: f64,
}

/// Total of a subsequence plus its dropped points, summed in index order.
pub fn repaired_energy(e: &BoundEnergy, xs: &[f64], indices: &[usize]) -> f64 {
    let kept: Vec<f64> = indices.iter().map(|&i| xs[i]).collect();
    let mut total = e.chain_energy(&kept);
    let mut next = indices.iter().peekable();
    for (i, &x) in xs.iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
        } else {
            total += e.diagonal(x);
        }
    }
    total
}

/// Replaces a chain by its cheapest strictly monotone subsequence from `x_0`
/// to `x_n`, charging every dropped point as a fixed point.
///
/// For twist energies this never increases the energy, and a strictly
/// monotone input is its own best subsequence, so it comes back unchanged.
pub fn aubry_exchange_repair(e: &BoundEnergy, xs: &[f64]) -> Result<Repair> {
    if xs.len() < 2 {
        return Err(Error::domain("a chain needs at least two points"));
    }
    let n = xs.len() - 1;
    let dir = (xs[n] - xs[0]).signum();
    let ordered = |a: f64, b: f64| dir != 0.0 && (b - a) * dir > 0.0;

    let indices = if xs.windows(2).all(|w| ordered(w[0], w[1])) {
        (0..=n).collect()
    } else {
        let diag: Vec<f64> = xs.iter().map(|&x| e.diagonal(x)).collect();
        let mut prefix = vec![0.0; n + 2];
        for i in 0..=n {
            prefix[i + 1] = prefix[i] + diag[i];
        }
        let mut best = vec![f64::INFINITY; n + 1];
        let mut prev = vec![usize::MAX; n + 1];
        best[0] = 0.0;
        for j in 1..=n {
            for i in 0..j {
                if !best[i].is_finite() || !(ordered(xs[i], xs[j]) || (i == 0 && j == n)) {
                    continue;
                }
                let v = best[i] + e.energy(xs[i], xs[j]) + (prefix[j] - prefix[i + 1]);
                if v < best[j] {
                    best[j] = v;
                    prev[j] = i;
                }
            }
        }
        let mut idx = vec![n];
        while *idx.last().unwrap() != 0 {
            idx.push(prev[*idx.last().unwrap()]);
        }
        idx.reverse();
        idx
    };
    let kept: Vec<f64> = indices.iter().map(|&i| xs[i]).collect();
    let fixed_points = (0..=n).filter(|i| !indices.contains(i)).map(|i| xs[i]).collect();
    let total_energy = repaired_energy(e, xs, &indices);
    Ok(Repair { chain: Chain::new(e, kept)?, indices, fixed_points, total_energy })
}

/// `[E(x0,x1) + E(y0,y1)] − [E(x0,y1) + E(y0,x1)]` for crossing segments.
pub fn crossing_gain(e: &BoundEnergy, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
    if !((y0 - x0) * (y1 - x1) < 0.0) {
        return Err(Error::domain("segments do not cross: need (y0−x0)(y1−x1) < 0"));
    }
    // Pair terms sharing a left endpoint so the potential cancels exactly.
    Ok((e.energy(x0, x1) - e.energy(x0, y1)) + (e.energy(y0, y1) - e.energy(y0, x1)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub strictly_monotone: bool,
    pub max_jump: f64,
    /// Largest energy decrease found by moving one interior point on a local grid.
    pub interior_perturbation_defect: f64,
    pub jumps_within_r: bool,
}

const PERTURBATIONS: [f64; 6] = [1e-5, 1e-4, 1e-3, 1e-2, 5e-2, 0.2];

pub fn structure_report(e: &BoundEnergy, xs: &[f64], r: f64) -> StructureReport {
    let dir = if xs.last() >= xs.first() { 1.0 } else { -1.0 };
    let strictly_monotone = xs.len() >= 2 && xs.windows(2).all(|w| (w[1] - w[0]) * dir > 0.0);
    let max_jump = xs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let mut defect = 0.0f64;
    for k in 1..xs.len().saturating_sub(1) {
        let base = e.energy(xs[k - 1], xs[k]) + e.energy(xs[k], xs[k + 1]);
        for d in PERTURBATIONS.iter().flat_map(|&d| [d, -d]) {
            let x = xs[k] + d;
            let v = e.energy(xs[k - 1], x) + e.energy(x, xs[k + 1]);
            defect = defect.max(base - v);
        }
    }
    StructureReport {
        strictly_monotone,
        max_jump,
        interior_perturbation_defect: defect,
        jumps_within_r: max_jump <= r,
    }
}
