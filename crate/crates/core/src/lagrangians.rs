//! Model catalog: `E_ω(x, y) = W(y − x) + V(τ_x ω)`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::environments::{EnvKind, EnvPoint, PointSet};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Interaction term `W(t)`, `t = y − x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spring {
    /// `|t − λ|² / 2`
    Quadratic { lambda: f64 },
    /// `|t − λ|⁴ / 4`
    Quartic { lambda: f64 },
}

impl Spring {
    pub fn lambda(&self) -> f64 {
        match *self {
            Spring::Quadratic { lambda } | Spring::Quartic { lambda } => lambda,
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Spring::Quadratic { lambda } => 0.5 * (t - lambda).powi(2),
            Spring::Quartic { lambda } => 0.25 * (t - lambda).powi(4),
        }
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        match *self {
            Spring::Quadratic { lambda } => t - lambda,
            Spring::Quartic { lambda } => (t - lambda).powi(3),
        }
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        match *self {
            Spring::Quadratic { .. } => 1.0,
            Spring::Quartic { lambda } => 3.0 * (t - lambda).powi(2),
        }
    }
}

/// Amplitudes of the two gap bumps `U_i(s) = a_i·u²(1−u)²`, `u = s/(⌊1/α⌋+i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpSpec {
    pub a0: f64,
    pub a1: f64,
}

impl BumpSpec {
    fn amplitude(&self, kind: i64) -> f64 {
        if kind == 0 {
            self.a0
        } else {
            self.a1
        }
    }

    /// `(U, U', U'')` at offset `s` inside a gap of length `gap` and type `kind`.
    #[inline]
    pub fn eval(&self, kind: i64, gap: f64, s: f64) -> (f64, f64, f64) {
        let a = self.amplitude(kind);
        let u = s / gap;
        let v = 1.0 - u;
        (
            a * u * u * v * v,
            a * 2.0 * u * v * (1.0 - 2.0 * u) / gap,
            a * (2.0 - 12.0 * u + 12.0 * u * u) / (gap * gap),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `K/(2π)²·(1 − cos 2πφ)`
    CircleCosine { k: f64 },
    /// `K1/(2π)²·(1 − cos 2πω₁) + K2/(2π)²·(1 − cos 2πω₂)`
    TorusDoubleCosine { k1: f64, k2: f64 },
    /// Gap bumps on the Beatty set.
    QuasicrystalBumps(BumpSpec),
}

impl Potential {
    pub fn env_kind(&self) -> EnvKind {
        match self {
            Potential::CircleCosine { .. } => EnvKind::Circle,
            Potential::TorusDoubleCosine { .. } => EnvKind::Torus,
            Potential::QuasicrystalBumps(_) => EnvKind::Quasicrystal,
        }
    }

    /// `sup V − inf V`.
    pub fn range(&self) -> f64 {
        let c = 2.0 / (TWO_PI * TWO_PI);
        match *self {
            Potential::CircleCosine { k } => c * k.abs(),
            Potential::TorusDoubleCosine { k1, k2 } => c * (k1.abs() + k2.abs()),
            Potential::QuasicrystalBumps(b) => (b.a0.abs().max(b.a1.abs())) / 16.0,
        }
    }

    /// Upper bound on `|V'|`.
    pub fn slope_bound(&self) -> f64 {
        match *self {
            Potential::CircleCosine { k } => k.abs() / TWO_PI,
            Potential::TorusDoubleCosine { k1, k2 } => (k1.abs() + SQRT_2 * k2.abs()) / TWO_PI,
            // max |2u(1−u)(1−2u)| = √3/18 on [0, 1], and gaps are ≥ 1.
            Potential::QuasicrystalBumps(b) => b.a0.abs().max(b.a1.abs()) * 3f64.sqrt() / 18.0,
        }
    }
}

/// A declarative model: spring plus potential family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LagrangianSpec {
    pub spring: Spring,
    pub potential: Potential,
}

impl LagrangianSpec {
    pub fn new(spring: Spring, potential: Potential) -> Result<Self> {
        if matches!(spring, Spring::Quartic { .. }) && matches!(potential, Potential::QuasicrystalBumps(_)) {
            return Err(Error::domain("quartic springs are only available for circle and torus models"));
        }
        let finite = match potential {
            Potential::CircleCosine { k } => k.is_finite(),
            Potential::TorusDoubleCosine { k1, k2 } => k1.is_finite() && k2.is_finite(),
            Potential::QuasicrystalBumps(b) => b.a0.is_finite() && b.a1.is_finite(),
        };
        if !finite || !spring.lambda().is_finite() {
            return Err(Error::domain("model parameters must be finite"));
        }
        Ok(LagrangianSpec { spring, potential })
    }

    pub fn circle(lambda: f64, k: f64) -> Self {
        LagrangianSpec { spring: Spring::Quadratic { lambda }, potential: Potential::CircleCosine { k } }
    }

    pub fn torus(lambda: f64, k1: f64, k2: f64) -> Self {
        LagrangianSpec { spring: Spring::Quadratic { lambda }, potential: Potential::TorusDoubleCosine { k1, k2 } }
    }

    pub fn sturm(lambda: f64, a0: f64, a1: f64) -> Self {
        LagrangianSpec {
            spring: Spring::Quadratic { lambda },
            potential: Potential::QuasicrystalBumps(BumpSpec { a0, a1 }),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.spring.lambda()
    }

    /// Every catalog model has `∂²E/∂x∂y = −W''(y−x) ≤ 0`.
    pub fn is_twist(&self) -> bool {
        true
    }

    pub fn bind(&self, env: &EnvPoint) -> Result<BoundEnergy> {
        if env.kind() != self.potential.env_kind() {
            return Err(Error::domain(format!(
                "{:?} potential cannot be evaluated on a {:?} environment",
                self.potential.env_kind(),
                env.kind()
            )));
        }
        Ok(BoundEnergy { model: *self, env: *env })
    }
}

/// A model bound to one environment; evaluation never fails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundEnergy {
    pub model: LagrangianSpec,
    pub env: EnvPoint,
}

impl BoundEnergy {
    /// `(P, P', P'')` with `P(x) = V(τ_x ω)`.
    pub fn potential_jet(&self, x: f64) -> (f64, f64, f64) {
        let c = 1.0 / (TWO_PI * TWO_PI);
        match (self.model.potential, self.env) {
            (Potential::CircleCosine { k }, EnvPoint::Circle { phase }) => {
                let a = TWO_PI * (phase + x);
                (k * c * (1.0 - a.cos()), k / TWO_PI * a.sin(), k * a.cos())
            }
            (Potential::TorusDoubleCosine { k1, k2 }, EnvPoint::Torus { phase }) => {
                let a = TWO_PI * (phase[0] + x);
                let b = TWO_PI * (phase[1] + SQRT_2 * x);
                (
                    c * (k1 * (1.0 - a.cos()) + k2 * (1.0 - b.cos())),
                    (k1 * a.sin() + SQRT_2 * k2 * b.sin()) / TWO_PI,
                    k1 * a.cos() + 2.0 * k2 * b.cos(),
                )
            }
            (Potential::QuasicrystalBumps(bumps), EnvPoint::Quasicrystal(set)) => bump_jet(&bumps, &set, x),
            _ => unreachable!("bind checks the environment kind"),
        }
    }

    #[inline]
    pub fn potential(&self, x: f64) -> f64 {
        match (self.model.potential, self.env) {
            (Potential::CircleCosine { k }, EnvPoint::Circle { phase }) => {
                k / (TWO_PI * TWO_PI) * (1.0 - (TWO_PI * (phase + x)).cos())
            }
            _ => self.potential_jet(x).0,
        }
    }

    #[inline]
    pub fn spring(&self, t: f64) -> f64 {
        self.model.spring.value(t)
    }

    #[inline]
    pub fn energy(&self, x: f64, y: f64) -> f64 {
        self.spring(y - x) + self.potential(x)
    }

    /// Energy of `x_0, …, x_n`.
    pub fn chain_energy(&self, xs: &[f64]) -> f64 {
        xs.windows(2).map(|w| self.energy(w[0], w[1])).sum()
    }

    /// `E_ω(x, x)`, the cost of a fixed point.
    pub fn diagonal(&self, x: f64) -> f64 {
        self.energy(x, x)
    }

    pub fn translated(&self, t: f64) -> Self {
        BoundEnergy { model: self.model, env: self.env.translate(t) }
    }
}

fn bump_jet(bumps: &BumpSpec, set: &PointSet, x: f64) -> (f64, f64, f64) {
    let (lo, hi) = set.bracket_index(x);
    let gap = hi - lo;
    let kind = gap - set.alpha.short_gap();
    let s = (x + set.offset) - lo as f64;
    bumps.eval(kind, gap as f64, s)
}

/// `E_ω(x, y)`.
pub fn energy(model: &LagrangianSpec, env: &EnvPoint, x: f64, y: f64) -> Result<f64> {
    Ok(model.bind(env)?.energy(x, y))
}

/// `V_ω(x) = U_{ω_{n+1}−ω_n−⌊1/α⌋}(x − ω_n)` with `ω_n ≤ x < ω_{n+1}`.
pub fn equivariant_potential(model: &LagrangianSpec, env: &EnvPoint, x: f64) -> Result<f64> {
    let set = env.point_set()?;
    match model.potential {
        Potential::QuasicrystalBumps(b) => Ok(bump_jet(&b, set, x).0),
        _ => Err(Error::domain("equivariant potential needs a bump model")),
    }
}

/// `Σ E(x_k, x_{k+1})`.
pub fn chain_energy(model: &LagrangianSpec, env: &EnvPoint, xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::domain("a chain needs at least two points"));
    }
    Ok(model.bind(env)?.chain_energy(xs))
}

/// Largest sampled mixed derivative `∂²E/∂x∂y` over a box; negative values
/// certify the twist condition on the sample.
pub fn twist_defect(
    model: &LagrangianSpec,
    env: &EnvPoint,
    xs: (f64, f64),
    ys: (f64, f64),
    grid: usize,
) -> Result<f64> {
    if grid < 8 {
        return Err(Error::domain("twist grid must have at least 8 cells"));
    }
    let (wx, wy) = (xs.1 - xs.0, ys.1 - ys.0);
    if !(wx > 0.0 && wy > 0.0) {
        return Err(Error::domain("twist box must have positive width"));
    }
    let e = model.bind(env)?;
    let h = wx.min(wy) / (4.0 * grid as f64);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=grid {
        let x = xs.0 + wx * i as f64 / grid as f64;
        for j in 0..=grid {
            let y = ys.0 + wy * j as f64 / grid as f64;
            let m = (e.energy(x + h, y + h) - e.energy(x + h, y - h) - e.energy(x - h, y + h)
                + e.energy(x - h, y - h))
                / (4.0 * h * h);
            worst = worst.max(m);
        }
    }
    Ok(worst)
}

const PROBE_X: usize = 97;
const PROBE_STEP: f64 = 1.0 / 64.0;

/// Sampled `inf_{|y−x| ≥ R_i} E(x, y)` for each radius.
///
/// All radii share one master sample of `y − x`, so the sampled sets are
/// nested and the returned infima are nondecreasing.
pub fn coercivity_probe(model: &LagrangianSpec, env: &EnvPoint, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.len() < 2 {
        return Err(Error::domain("coercivity probe needs at least two radii"));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] < 0.0 {
        return Err(Error::domain("probe radii must be nonnegative and increasing"));
    }
    let e = model.bind(env)?;
    let r_top = radii[radii.len() - 1];
    let t_max = r_top + model.lambda().abs() + 4.0;
    let mut ts: Vec<f64> = radii.iter().flat_map(|&r| [r, -r]).collect();
    let steps = (t_max / PROBE_STEP).ceil() as usize;
    ts.extend((0..=steps).flat_map(|k| [k as f64 * PROBE_STEP, -(k as f64) * PROBE_STEP]));

    // Sample x over a few periods of the environment.
    let span = match env {
        EnvPoint::Quasicrystal(set) => 4.0 * set.alpha.long_gap() as f64,
        _ => 4.0,
    };
    let xs: Vec<f64> = (0..PROBE_X).map(|i| span * i as f64 / (PROBE_X - 1) as f64).collect();
    let pot: Vec<f64> = xs.iter().map(|&x| e.potential(x)).collect();
    let pmin = pot.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(radii
        .iter()
        .map(|&r| {
            let w = ts
                .iter()
                .filter(|t| t.abs() >= r)
                .map(|&t| e.spring(t))
                .fold(f64::INFINITY, f64::min);
            (r, w + pmin)
        })
        .collect())
}
