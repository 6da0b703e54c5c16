use serde::Serialize;

use super::table::{lipschitz_bound, uniform_nodes, ManeTable};
use crate::chain_opt::{free_minimizers, ground_energy, Chain, GroundEnergyEstimate, SolverOptions};
use crate::environments::{return_times, CylinderSpec, EnvKind, EnvPoint};
use crate::lagrangians::LagrangianSpec;
use crate::{Error, Exec, Result};

/// Defect of one window pair `(m, n)` under both `E̅` choices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDefect {
    pub m: usize,
    pub n: usize,
    pub defect_extrapolated: f64,
    pub defect_lower: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EbarDefects {
    pub ebar: f64,
    pub max_defect: f64,
    pub min_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// Window positions `x_{c−W}, …, x_{c+W}`.
    pub window: Vec<f64>,
    /// Index of the window's first point in the outer chain.
    pub window_start: usize,
    pub n_outer: usize,
    pub pairs: Vec<PairDefect>,
    pub extrapolated: EbarDefects,
    pub lower: EbarDefects,
    /// `max |defect_extrapolated − defect_lower|`.
    pub ebar_sensitivity: f64,
    pub tolerance: f64,
    pub rotation: f64,
    pub max_jump: f64,
    pub min_jump: f64,
    pub mane_h: f64,
}

impl CalibrationReport {
    /// The reported calibration quality.
    pub fn max_defect(&self) -> f64 {
        self.extrapolated.max_defect
    }
}

/// Calibration defects on the middle `2W + 1` points of a free minimizer of
/// `n_outer` steps.
///
/// `Ŝ(x_m, x_n)` comes from a table at `τ_{x_m} ω` whose nodes are the
/// uniform grid of step `mane_h` plus every window offset.
pub fn calibrate_window(
    model: &LagrangianSpec,
    env: &EnvPoint,
    est: &GroundEnergyEstimate,
    n_outer: usize,
    w: usize,
    mane_h: f64,
    opts: &SolverOptions,
) -> Result<CalibrationReport> {
    if w == 0 || n_outer < 4 * w {
        return Err(Error::domain(format!("need W ≥ 1 and N_outer ≥ 4·W, got N_outer = {n_outer}, W = {w}")));
    }
    if !(mane_h > 0.0) {
        return Err(Error::domain("mane grid step must be positive"));
    }
    let e = model.bind(env)?;
    let outer = free_minimizers(&e, &[n_outer], None, opts)?.pop().expect("one chain");
    let c = n_outer / 2;
    let start = c - w;
    let window: Vec<f64> = outer.positions[start..=c + w].to_vec();
    let len = window.len();

    let reach = window.iter().map(|x| (x - window[0]).abs()).fold(0.0, f64::max);
    let x_max = reach.max(mane_h) + mane_h;
    let base = uniform_nodes(x_max, mane_h)?;

    let ebars = [est.extrapolated, est.lower_bound];
    // Per start index m: (n, [defect under each E̅]).
    type Row = Vec<(usize, [f64; 2])>;
    let per_m: Vec<Result<Row>> = opts.exec.map_range(len, |m| {
        let shifted = e.translated(window[m]);
        let mut nodes = base.clone();
        let hi = (m + w).min(len - 1);
        nodes.extend(window[m + 1..=hi].iter().map(|x| x - window[m]));
        let mut out: Row = (m + 1..=hi).map(|n| (n, [0.0; 2])).collect();
        for (slot, &ebar) in ebars.iter().enumerate() {
            let size = nodes.len();
            let table = ManeTable::with_nodes(&shifted, ebar, nodes.clone(), size, Exec::Sequential)?;
            for (n, d) in out.iter_mut() {
                let t = window[*n] - window[m];
                let s_hat = table
                    .value_at(t)
                    .ok_or_else(|| Error::NumericalFailure { message: "window offset missing from table".into(), best: vec![t] })?;
                let energy = e.chain_energy(&window[m..=*n]);
                d[slot] = energy - (*n - m) as f64 * ebar - s_hat;
            }
        }
        Ok(out)
    });

    let mut pairs = Vec::new();
    for (m, r) in per_m.into_iter().enumerate() {
        for (n, d) in r? {
            pairs.push(PairDefect { m, n, defect_extrapolated: d[0], defect_lower: d[1] });
        }
    }
    let summarize = |ebar: f64, f: fn(&PairDefect) -> f64| EbarDefects {
        ebar,
        max_defect: pairs.iter().map(f).fold(f64::NEG_INFINITY, f64::max),
        min_defect: pairs.iter().map(f).fold(f64::INFINITY, f64::min),
    };
    let extrapolated = summarize(est.extrapolated, |p| p.defect_extrapolated);
    let lower = summarize(est.lower_bound, |p| p.defect_lower);
    let ebar_sensitivity =
        pairs.iter().map(|p| (p.defect_extrapolated - p.defect_lower).abs()).fold(0.0, f64::max);
    let lip = lipschitz_bound(model, opts.jump_cap);
    let tolerance = 10.0 * (mane_h + lip / n_outer as f64);

    Ok(CalibrationReport {
        rotation: outer.rotation(),
        max_jump: outer.max_jump(),
        min_jump: outer.jumps().map(f64::abs).fold(f64::INFINITY, f64::min),
        window,
        window_start: start,
        n_outer,
        pairs,
        extrapolated,
        lower,
        ebar_sensitivity,
        tolerance,
        mane_h,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationReport {
    /// `(n, |x_n − x_0| / n)`.
    pub estimates: Vec<(usize, f64)>,
    /// Smallest estimate over the upper half of `n`.
    pub lower_constant: f64,
    /// `inf_x E(x, x)` does not exceed the `E̅` estimate.
    pub degenerate: bool,
    /// Minimizing constant configuration, in the degenerate case.
    pub constant_configuration: Option<Vec<f64>>,
    pub ebar: f64,
    pub diagonal_inf: f64,
}

const DEGENERACY_GAP: f64 = 1e-9;

/// Rotation estimates of free minimizers for each `n` in `ns`.
pub fn rotation_number(
    model: &LagrangianSpec,
    env: &EnvPoint,
    ns: &[usize],
    opts: &SolverOptions,
) -> Result<RotationReport> {
    let est = ground_energy(model, env, ns, opts)?;
    let estimates: Vec<(usize, f64)> =
        est.minimizers.iter().map(|c| (c.steps(), c.rotation().abs())).collect();
    let top = &estimates[estimates.len() / 2..];
    let lower_constant = top.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let degenerate = est.sandwich_high - est.extrapolated <= DEGENERACY_GAP;
    let constant_configuration = degenerate.then(|| {
        let e = model.bind(env).expect("bound above");
        let x = argmin_diagonal(|x| e.diagonal(x));
        vec![x; ns[ns.len() - 1] + 1]
    });
    Ok(RotationReport {
        estimates,
        lower_constant,
        degenerate,
        constant_configuration,
        ebar: est.extrapolated,
        diagonal_inf: est.sandwich_high,
    })
}

fn argmin_diagonal(f: impl Fn(f64) -> f64) -> f64 {
    const SAMPLES: usize = 4096;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..SAMPLES {
        let x = 8.0 * i as f64 / SAMPLES as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equidistribution {
    pub returns: Vec<f64>,
    /// Counts for returns whose interval lies inside the chain span.
    pub counts: Vec<usize>,
    /// `(return, count)` for intervals that stick out of the span.
    pub exceptional: Vec<(f64, usize)>,
    pub radius: f64,
}

impl Equidistribution {
    pub fn spread(&self) -> usize {
        match (self.counts.iter().max(), self.counts.iter().min()) {
            (Some(a), Some(b)) => a - b,
            _ => 0,
        }
    }
}

/// Chain points in `(a − R, a + R)` for every return `a` of `ω` to
/// `section` inside the chain span.
pub fn equidistribution_counts(chain: &Chain, section: &CylinderSpec, r: f64) -> Result<Equidistribution> {
    if chain.env.kind() != EnvKind::Quasicrystal {
        return Err(Error::domain("equidistribution needs a quasicrystal environment"));
    }
    if !chain.is_strictly_monotone() {
        return Err(Error::domain("equidistribution needs a strictly monotone chain"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("interval radius must be positive"));
    }
    let xs = &chain.positions;
    let (lo, hi) = (xs[0].min(xs[xs.len() - 1]), xs[0].max(xs[xs.len() - 1]));
    let returns = return_times(&chain.env, section, lo, hi)?;
    if returns.len() < 3 {
        return Err(Error::insufficient(format!("only {} section returns inside the chain span", returns.len())));
    }
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut counts = Vec::new();
    let mut exceptional = Vec::new();
    for &a in &returns {
        let first = sorted.partition_point(|&x| x <= a - r);
        let last = sorted.partition_point(|&x| x < a + r);
        let count = last - first;
        if a - r >= lo && a + r <= hi {
            counts.push(count);
        } else {
            exceptional.push((a, count));
        }
    }
    Ok(Equidistribution { returns, counts, exceptional, radius: r })
}
