//! Mañé subadditive cocycle, its inequalities, and calibration checks on
//! long minimizers.
//!
//! `Φ(ω, t)` is approximated by the monotone-chain shortest path over a node
//! set containing 0; for twist models the monotone chains already realise
//! the infimum.

mod calibrate;
mod table;

pub use calibrate::{
    calibrate_window, equidistribution_counts, rotation_number, CalibrationReport, EbarDefects, Equidistribution,
    PairDefect, RotationReport,
};
pub use table::{lipschitz_bound, mane_table, uniform_nodes, ManeTable};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lagrangians::BoundEnergy;
use crate::{Error, Exec, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleDefects {
    /// `max Φ̂(s+t) − Φ̂(s) − Φ̂_{τ_s ω}(t)` over sampled grid pairs.
    pub subadd_max: f64,
    /// `max Φ̂(t) − (L(ω, t) − E̅)`.
    pub one_step_max: f64,
    /// `max (E̅ − L(τ_t ω, −t)) − Φ̂(t)`.
    pub lower_bound_max: f64,
    /// `max |Φ̂(t)| / (1 + |t|)`.
    pub sublinearity_ratio: f64,
    /// Same ratio restricted to `t ≥ 0`.
    pub sublinearity_ratio_forward: f64,
    /// Upper bound on the Lipschitz constant of `L` for jumps up to `X`.
    pub lipschitz: f64,
    pub shifts: Vec<f64>,
    pub pairs: usize,
}

/// Checks the cocycle inequalities of a uniform-grid table.
///
/// `samples` shifts `s` are drawn from the grid; for each, a second table at
/// `τ_s ω` is built and every admissible `t` is tested.
pub fn cocycle_defects(table: &ManeTable, samples: usize, seed: u64, exec: Exec) -> Result<CocycleDefects> {
    if samples < 10 {
        return Err(Error::domain("cocycle_defects needs at least 10 samples"));
    }
    let k = table.origin as i64;
    if table.nodes.len() as i64 != 2 * k + 1 || k == 0 {
        return Err(Error::domain("cocycle_defects needs a symmetric uniform grid"));
    }
    let h = table.nodes[table.origin + 1];
    let e = table.model.bind(&table.env)?;

    let mut one_step_max = f64::NEG_INFINITY;
    let mut lower_bound_max = f64::NEG_INFINITY;
    let (mut ratio, mut ratio_fwd) = (0.0_f64, 0.0_f64);
    for (i, (&t, &v)) in table.nodes.iter().zip(&table.values).enumerate() {
        let one = if i == table.origin { e.energy(0.0, 0.0) } else { e.energy(0.0, t) } - table.ebar;
        one_step_max = one_step_max.max(v - one);
        // L(τ_t ω, −t) = E_ω(t, 0).
        lower_bound_max = lower_bound_max.max(table.ebar - e.energy(t, 0.0) - v);
        let r = v.abs() / (1.0 + t.abs());
        ratio = ratio.max(r);
        if t >= 0.0 {
            ratio_fwd = ratio_fwd.max(r);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shifts: Vec<i64> = (0..samples)
        .map(|_| loop {
            let s = rng.gen_range(-k..=k);
            if s != 0 {
                break s;
            }
        })
        .collect();
    shifts.sort_unstable();
    shifts.dedup();

    let per_shift: Vec<Result<(f64, usize)>> = exec.map(&shifts, |&s| {
        let moved = ManeTable::with_nodes(
            &e.translated(s as f64 * h),
            table.ebar,
            table.nodes.clone(),
            table.n_max,
            Exec::Sequential,
        )?;
        let phi_s = table.values[(k + s) as usize];
        let mut worst = f64::NEG_INFINITY;
        let mut count = 0;
        for t in (-k - s).max(-k)..=(k - s).min(k) {
            let lhs = table.values[(k + s + t) as usize];
            worst = worst.max(lhs - phi_s - moved.values[(k + t) as usize]);
            count += 1;
        }
        Ok((worst, count))
    });
    let mut subadd_max = f64::NEG_INFINITY;
    let mut pairs = 0;
    for r in per_shift {
        let (w, c) = r?;
        subadd_max = subadd_max.max(w);
        pairs += c;
    }

    Ok(CocycleDefects {
        subadd_max,
        one_step_max,
        lower_bound_max,
        sublinearity_ratio: ratio,
        sublinearity_ratio_forward: ratio_fwd,
        lipschitz: lipschitz_bound(&table.model, table.x_max()),
        shifts: shifts.iter().map(|&s| s as f64 * h).collect(),
        pairs,
    })
}

/// Max change of `Φ̂` on the common nodes when `h` is halved, and the
/// implied constant `C = change / h`.
pub fn grid_refinement(e: &BoundEnergy, ebar: f64, x_max: f64, h: f64, exec: Exec) -> Result<(f64, f64)> {
    let coarse_nodes = uniform_nodes(x_max, h)?;
    let n = coarse_nodes.len();
    let coarse = ManeTable::with_nodes(e, ebar, coarse_nodes, n, exec)?;
    let fine_nodes = uniform_nodes(x_max, 0.5 * h)?;
    let fine = ManeTable::with_nodes(e, ebar, fine_nodes, 2 * n, exec)?;
    let mut change = 0.0_f64;
    for (&t, &v) in coarse.nodes.iter().zip(&coarse.values) {
        if let Some(w) = fine.value_at(t) {
            change = change.max((v - w).abs());
        }
    }
    Ok((change, change / h))
}

#[cfg(test)]
mod tests;
