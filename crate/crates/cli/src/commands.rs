//! Subcommand implementations. Each writes its CSV/JSON files into the
//! output directory and returns a [`RunSummary`].

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use fklab_core::chain_opt::{ground_energy, minimize_free, structure_report};
use fklab_core::environments::{hull_distance, transverse_frequency, CylinderSpec, EnvKind, EnvPoint};
use fklab_core::holonomic_lp::{discretize_circle, mather_support, min_mean_cycle, solve};
use fklab_core::mane_calibration::{
    calibrate_window, cocycle_defects, equidistribution_counts, grid_refinement, mane_table, rotation_number,
};
use fklab_core::towers::{induce_tower, level0_tower, tower_measure_residual};
use fklab_core::Exec;

use crate::config::{ConfigError, Format, RunConfig};
use crate::output::{to_json, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    GroundEnergy,
    Mane,
    Calibrate,
    Tower,
    Lp,
    EnvReport,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundEnergy => "ground-energy",
            Command::Mane => "mane",
            Command::Calibrate => "calibrate",
            Command::Tower => "tower",
            Command::Lp => "lp",
            Command::EnvReport => "env-report",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] fklab_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CmdError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use fklab_core::Error as E;
        match self {
            CmdError::Config(_) => 2,
            CmdError::Core(E::Domain(_) | E::Resource(_)) => 2,
            CmdError::Core(E::NumericalFailure { .. } | E::InsufficientData(_)) => 3,
            CmdError::Io { .. } => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub results: Value,
    pub warnings: Vec<String>,
}

struct Sink<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    hash: String,
}

impl Sink<'_> {
    fn csv(&self, name: &str, t: &Table) -> Result<(), CmdError> {
        if self.cfg.writes(Format::Csv) {
            let path = self.dir.join(name);
            t.write(&path, &self.hash).map_err(|source| CmdError::Io { path: path.display().to_string(), source })?;
        }
        Ok(())
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, dir: &Path, exec: Exec) -> Result<RunSummary, CmdError> {
    std::fs::create_dir_all(dir).map_err(|source| CmdError::Io { path: dir.display().to_string(), source })?;
    let sink = Sink { dir, cfg, hash: cfg.hash() };
    let mut warnings = Vec::new();
    let results = match cmd {
        Command::GroundEnergy => cmd_ground_energy(&sink, exec, &mut warnings)?,
        Command::Mane => cmd_mane(&sink, exec, &mut warnings)?,
        Command::Calibrate => cmd_calibrate(&sink, exec, &mut warnings)?,
        Command::Tower => cmd_tower(&sink, &mut warnings)?,
        Command::Lp => cmd_lp(&sink)?,
        Command::EnvReport => cmd_env_report(&sink)?,
    };
    let summary = RunSummary {
        command: cmd.name().to_string(),
        config_hash: sink.hash.clone(),
        seed: cfg.seed,
        results,
        warnings,
    };
    if cfg.writes(Format::Json) {
        let path = dir.join("summary.json");
        std::fs::write(&path, to_json(&summary)).map_err(|source| CmdError::Io { path: path.display().to_string(), source })?;
    }
    Ok(summary)
}

fn cmd_ground_energy(s: &Sink, exec: Exec, warnings: &mut Vec<String>) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    let opts = cfg.solver_options().with_exec(exec);
    let est = ground_energy(&cfg.model, &cfg.env, &cfg.grid.n_list, &opts)?;
    let mut t = Table::new(&["n", "m_n", "m_n_over_n"]);
    for (&n, &m) in est.n.iter().zip(&est.m_n) {
        t.push(vec![n.into(), m.into(), (m / n as f64).into()]);
    }
    s.csv("ground_energy.csv", &t)?;
    let mut t = Table::new(&["n", "i", "x"]);
    for c in &est.minimizers {
        for (i, &x) in c.positions.iter().enumerate() {
            t.push(vec![c.steps().into(), i.into(), x.into()]);
        }
    }
    s.csv("minimizers.csv", &t)?;

    let e = cfg.model.bind(&cfg.env)?;
    let longest = est.minimizers.last().expect("nonempty n_list");
    let structure = structure_report(&e, &longest.positions, opts.jump_cap);
    if est.sandwich_high - est.extrapolated <= 1e-9 {
        warnings.push("inf E(x,x) equals the ground-energy estimate: degenerate constant minimizers".into());
    }
    if !structure.jumps_within_r {
        warnings.push(format!("a jump of the longest minimizer reaches the DP cap {}", opts.jump_cap));
    }
    Ok(json!({
        "estimate": est,
        "longest_minimizer": {
            "n": longest.steps(),
            "rotation": longest.rotation(),
            "structure": structure,
        },
    }))
}

fn cmd_mane(s: &Sink, exec: Exec, warnings: &mut Vec<String>) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    let g = &cfg.grid;
    let opts = cfg.solver_options().with_exec(exec);
    let est = ground_energy(&cfg.model, &cfg.env, &g.n_list, &opts)?;
    let table = mane_table(&cfg.model, &cfg.env, est.lower_bound, g.x_max, g.mane_h, g.n_max, exec)?;
    let alt = mane_table(&cfg.model, &cfg.env, est.extrapolated, g.x_max, g.mane_h, g.n_max, exec)?;
    let e = cfg.model.bind(&cfg.env)?;

    let mut t = Table::new(&["t", "phi", "n_steps", "phi_extrapolated", "one_step_bound"]);
    for i in 0..table.nodes.len() {
        let x = table.nodes[i];
        let bound = if i == table.origin { e.energy(0.0, 0.0) } else { e.energy(0.0, x) } - table.ebar;
        t.push(vec![x.into(), table.values[i].into(), table.n_steps[i].into(), alt.values[i].into(), bound.into()]);
    }
    s.csv("mane_potential.csv", &t)?;

    let defects = cocycle_defects(&table, g.samples, cfg.seed, exec)?;
    let (change, constant) = grid_refinement(&e, est.lower_bound, g.x_max, g.mane_h, exec)?;
    let sensitivity = table.values.iter().zip(&alt.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if table.truncated {
        warnings.push(format!("n_max = {} is active at some optimum; longer chains may lower the table", g.n_max));
    }
    Ok(json!({
        "ebar_lower": est.lower_bound,
        "ebar_extrapolated": est.extrapolated,
        "ebar_sensitivity": sensitivity,
        "x_max": g.x_max,
        "h": g.mane_h,
        "n_max": g.n_max,
        "truncated": table.truncated,
        "cocycle": defects,
        "subadditivity_tolerance": 10.0 * g.mane_h * defects.lipschitz,
        "refinement": { "max_change_on_halving": change, "empirical_constant": constant },
    }))
}

fn cmd_calibrate(s: &Sink, exec: Exec, warnings: &mut Vec<String>) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    let g = &cfg.grid;
    let opts = cfg.solver_options().with_exec(exec);
    let est = ground_energy(&cfg.model, &cfg.env, &g.n_list, &opts)?;
    let rep = calibrate_window(&cfg.model, &cfg.env, &est, g.n_outer, g.window, g.mane_h, &opts)?;
    let mut t = Table::new(&["m", "n", "x_m", "x_n", "defect_extrapolated", "defect_lower"]);
    for p in &rep.pairs {
        t.push(vec![
            (rep.window_start + p.m).into(),
            (rep.window_start + p.n).into(),
            rep.window[p.m].into(),
            rep.window[p.n].into(),
            p.defect_extrapolated.into(),
            p.defect_lower.into(),
        ]);
    }
    s.csv("calibration.csv", &t)?;
    let rotation = rotation_number(&cfg.model, &cfg.env, &g.n_list, &opts)?;
    if rep.max_defect() > rep.tolerance {
        warnings.push(format!("max defect {} exceeds tolerance {}", rep.max_defect(), rep.tolerance));
    }
    if rep.lower.min_defect < -1e-8 {
        warnings.push(format!("negative defect {} below −1e−8", rep.lower.min_defect));
    }
    if rotation.degenerate {
        warnings.push("degenerate case: inf E(x,x) equals the ground-energy estimate".into());
    }

    let equidistribution = match cfg.env {
        EnvPoint::Quasicrystal(set) => {
            let (chain, _) = minimize_free(&cfg.model, &cfg.env, g.n_outer, &opts)?;
            let mid = chain.positions[chain.steps() / 2];
            let rho = set.alpha.short_gap() as f64 + 1.0;
            let section = CylinderSpec::at(&cfg.env, set.bracket(mid).0, rho)?;
            let eq = equidistribution_counts(&chain, &section, cfg.report.interval)?;
            json!({ "section_radius": rho, "spread": eq.spread(), "counts": eq })
        }
        _ => Value::Null,
    };
    Ok(json!({
        "ebar_lower": est.lower_bound,
        "ebar_extrapolated": est.extrapolated,
        "max_defect": rep.max_defect(),
        "tolerance": rep.tolerance,
        "within_tolerance": rep.max_defect() <= rep.tolerance,
        "report": rep,
        "rotation_number": rotation,
        "equidistribution": equidistribution,
    }))
}

fn cmd_tower(s: &Sink, warnings: &mut Vec<String>) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    let EnvPoint::Quasicrystal(set) = cfg.env else {
        return Err(ConfigError::Invalid("tower needs the quasicrystal variant".into()).into());
    };
    let mut towers = vec![level0_tower(&set.alpha, cfg.tower.window)?];
    let mut matrices = Vec::new();
    for _ in 0..cfg.tower.levels {
        let (u, m) = induce_tower(towers.last().expect("level 0"))?;
        towers.push(u);
        matrices.push(m);
    }
    let mut floors = Table::new(&["level", "floor", "label", "height", "nu"]);
    for t in &towers {
        for (i, (f, nu)) in t.floors.iter().zip(&t.empirical_nu).enumerate() {
            floors.push(vec![t.level.into(), i.into(), f.label.as_str().into(), f.height.into(), (*nu).into()]);
        }
    }
    s.csv("tower_floors.csv", &floors)?;
    let mut hom = Table::new(&["level", "row", "col", "entry"]);
    let mut levels = Vec::new();
    for (l, m) in matrices.iter().enumerate() {
        for (r, row) in m.entries.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                hom.push(vec![l.into(), r.into(), c.into(), (v as i64).into()]);
            }
        }
        let (lo, hi) = (&towers[l], &towers[l + 1]);
        let heights_exact = m.column_heights(&lo.heights()) == hi.heights();
        let residual = tower_measure_residual(lo, hi, m)?;
        levels.push(json!({
            "level": l,
            "residual": residual,
            "residual_bound": 10.0 / lo.window_length * lo.floors.len() as f64,
            "height_identity_exact": heights_exact,
        }));
    }
    s.csv("homology.csv", &hom)?;
    if towers.iter().any(|t| t.periodic) {
        warnings.push("periodic gap sequence: induction is stationary".into());
    }
    let residual = levels.iter().map(|l| l["residual"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    Ok(json!({
        "alpha": set.alpha,
        "window": cfg.tower.window,
        "residual": residual,
        "levels": levels,
        "towers": towers,
        "mass": towers.iter().map(|t| t.total_mass()).collect::<Vec<_>>(),
    }))
}

fn cmd_lp(s: &Sink) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    if cfg.env.kind() != EnvKind::Circle {
        return Err(ConfigError::Invalid("lp needs the circle variant".into()).into());
    }
    let lp = discretize_circle(&cfg.model, cfg.lp.n, cfg.lp_t_max())?;
    let sol = solve(&lp)?;
    let support = mather_support(&sol.measure, cfg.lp.threshold)?;
    let nf = lp.n as f64;
    let mut t = Table::new(&["j", "k", "omega", "t", "weight"]);
    let nt = lp.jumps.len();
    for (a, &w) in sol.measure.weights.iter().enumerate() {
        if w > 0.0 {
            let (j, k) = (a / nt, lp.jumps[a % nt]);
            t.push(vec![j.into(), k.into(), (j as f64 / nf).into(), (k as f64 / nf).into(), w.into()]);
        }
    }
    s.csv("lp_measure.csv", &t)?;
    let mut t = Table::new(&["j", "omega", "u"]);
    for (j, &u) in sol.dual.u.iter().enumerate() {
        t.push(vec![j.into(), (j as f64 / nf).into(), u.into()]);
    }
    s.csv("lp_dual.csv", &t)?;
    Ok(json!({
        "n": lp.n,
        "t_max": lp.t_max,
        "variables": lp.arcs(),
        "primal": sol.primal,
        "dual": sol.dual.value,
        "gap": sol.gap(),
        "min_mean_cycle": min_mean_cycle(&lp),
        "pivots": sol.pivots,
        "mass": sol.measure.mass(),
        "holonomy_residual": sol.measure.holonomy_residual(),
        "dual_violation": sol.dual.violation(&lp),
        "support": support,
    }))
}

const MAX_SAMPLES: usize = 10_001;

fn cmd_env_report(s: &Sink) -> Result<Value, CmdError> {
    let cfg = s.cfg;
    let r = &cfg.report;
    let e = cfg.model.bind(&cfg.env)?;
    let samples = (((r.hi - r.lo) / 0.01).ceil() as usize + 1).min(MAX_SAMPLES);
    let step = (r.hi - r.lo) / (samples - 1) as f64;
    let mut t = Table::new(&["x", "potential"]);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..samples {
        let x = r.lo + i as f64 * step;
        let v = e.potential(x);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
        t.push(vec![x.into(), v.into()]);
    }
    s.csv("potential.csv", &t)?;
    let mut out = json!({
        "variant": format!("{:?}", cfg.env.kind()).to_lowercase(),
        "env": cfg.env,
        "window": [r.lo, r.hi],
        "potential_min": vmin,
        "potential_max": vmax,
    });
    if let EnvPoint::Quasicrystal(set) = cfg.env {
        let pts = set.points_in(r.lo, r.hi)?;
        let mut t = Table::new(&["i", "x", "gap_after"]);
        for (i, &x) in pts.iter().enumerate() {
            let gap = pts.get(i + 1).map_or(f64::NAN, |y| y - x);
            t.push(vec![i.into(), x.into(), gap.into()]);
        }
        s.csv("points.csv", &t)?;
        let anchor = *pts.first().ok_or_else(|| ConfigError::Invalid("report window holds no points".into()))?;
        let section = CylinderSpec::at(&cfg.env, anchor, r.radius)?;
        let half = 0.5 * (r.hi - r.lo);
        let centre = 0.5 * (r.hi + r.lo);
        let freq = transverse_frequency(&cfg.env.translate(centre), &section, half)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut distances = Vec::with_capacity(r.pairs);
        for _ in 0..r.pairs {
            let (a, b): (f64, f64) = (rng.gen_range(r.lo..r.hi), rng.gen_range(r.lo..r.hi));
            let d = hull_distance(&cfg.env.translate(a), &cfg.env.translate(b), r.radius)?;
            distances.push([a, b, d]);
        }
        out["alpha"] = json!(set.alpha);
        out["alpha_value"] = json!(set.alpha.value());
        out["gaps"] = json!(set.alpha.gaps());
        out["points"] = json!(pts.len());
        out["section"] = json!({ "anchor": anchor, "radius": r.radius, "pattern": section.anchor });
        out["section_frequency"] = json!(freq);
        out["hull_distances"] = json!(distances);
    }
    Ok(out)
}
