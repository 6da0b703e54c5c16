//! The three example environments and their translation flow.
//!
//! A quasicrystal environment is the Beatty set `ω(α) = {n : ⌊nα⌋ − ⌊(n−1)α⌋ = 1}`
//! shifted by an offset; `τ_t` moves every point by `−t`, which is stored as
//! `offset += t`. Circle and torus phases are kept reduced modulo 1.

mod alpha;
mod hull;

pub use alpha::{AlphaValue, MAX_EXACT_INDEX};
pub use hull::{hull_distance, return_times, transverse_frequency};

use serde::Serialize;

use crate::{Error, Result};

/// Hard cap on the number of integers scanned when materializing a window.
pub const MAX_WINDOW: f64 = 1e7;

/// Absolute tolerance used when comparing point positions.
pub const MATCH_TOL: f64 = 1e-9;

pub(crate) fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain("window bounds must be finite"));
    }
    if hi - lo > MAX_WINDOW {
        return Err(Error::resource(format!(
            "window [{lo}, {hi}] exceeds the {MAX_WINDOW:e} point cap"
        )));
    }
    Ok(())
}

/// Raw Beatty indices `n ∈ [lo, hi]` in increasing order.
pub fn beatty_points(alpha: &AlphaValue, lo: f64, hi: f64) -> Result<Vec<i64>> {
    if !(lo < hi) {
        return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
    }
    check_window(lo, hi)?;
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    if a > b {
        return Ok(Vec::new());
    }
    // One floor per index: the membership test reuses the previous floor.
    let mut out = Vec::with_capacity(((b - a) as f64 * alpha.value()) as usize + 2);
    let mut prev = alpha.floor_mul(a - 1);
    for n in a..=b {
        let cur = alpha.floor_mul(n);
        if cur - prev == 1 {
            out.push(n);
        }
        prev = cur;
    }
    Ok(out)
}

/// The point set `ω(α) − offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointSet {
    pub alpha: AlphaValue,
    pub offset: f64,
}

impl PointSet {
    pub fn new(alpha: AlphaValue, offset: f64) -> Self {
        PointSet { alpha, offset }
    }

    /// Positions of the set inside the closed interval `[lo, hi]`, ascending.
    pub fn points_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if hi < lo {
            return Ok(Vec::new());
        }
        check_window(lo, hi)?;
        let (a, b) = ((lo + self.offset).floor() - 1.0, (hi + self.offset).ceil() + 1.0);
        Ok(beatty_points(&self.alpha, a, b)?
            .into_iter()
            .map(|n| n as f64 - self.offset)
            .filter(|&p| lo <= p && p <= hi)
            .collect())
    }

    /// Consecutive points `(ω_n, ω_{n+1})` with `ω_n ≤ x < ω_{n+1}`.
    pub fn bracket(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.bracket_index(x);
        (lo as f64 - self.offset, hi as f64 - self.offset)
    }

    /// Beatty indices bracketing `x`; see [`PointSet::bracket`].
    pub fn bracket_index(&self, x: f64) -> (i64, i64) {
        let y = x + self.offset;
        let mut n = y.floor() as i64;
        if (n as f64) > y {
            n -= 1;
        }
        let mut lo = n;
        while !self.alpha.is_beatty(lo) {
            lo -= 1;
        }
        let mut hi = n + 1;
        while !self.alpha.is_beatty(hi) {
            hi += 1;
        }
        (lo, hi)
    }
}

/// Which example family an environment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Circle,
    Torus,
    Quasicrystal,
}

/// A point of one of the three hulls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvPoint {
    Circle { phase: f64 },
    Torus { phase: [f64; 2] },
    Quasicrystal(PointSet),
}

impl EnvPoint {
    pub fn circle(phase: f64) -> Self {
        EnvPoint::Circle { phase: wrap_unit(phase) }
    }

    pub fn torus(w1: f64, w2: f64) -> Self {
        EnvPoint::Torus { phase: [wrap_unit(w1), wrap_unit(w2)] }
    }

    pub fn quasicrystal(alpha: AlphaValue, offset: f64) -> Self {
        EnvPoint::Quasicrystal(PointSet::new(alpha, offset))
    }

    pub fn kind(&self) -> EnvKind {
        match self {
            EnvPoint::Circle { .. } => EnvKind::Circle,
            EnvPoint::Torus { .. } => EnvKind::Torus,
            EnvPoint::Quasicrystal(_) => EnvKind::Quasicrystal,
        }
    }

    /// The flow `τ_t`.
    pub fn translate(&self, t: f64) -> Self {
        match *self {
            EnvPoint::Circle { phase } => EnvPoint::circle(phase + t),
            EnvPoint::Torus { phase: [a, b] } => EnvPoint::torus(a + t, b + t * std::f64::consts::SQRT_2),
            EnvPoint::Quasicrystal(set) => EnvPoint::Quasicrystal(PointSet::new(set.alpha, set.offset + t)),
        }
    }

    pub fn point_set(&self) -> Result<&PointSet> {
        match self {
            EnvPoint::Quasicrystal(set) => Ok(set),
            _ => Err(Error::domain("operation needs a quasicrystal environment")),
        }
    }

    /// Distance between two environments modulo representation: phases are
    /// compared on the circle, offsets directly.
    pub fn separation(&self, other: &EnvPoint) -> Option<f64> {
        let circ = |a: f64, b: f64| {
            let d = (a - b).abs();
            d.min(1.0 - d)
        };
        match (self, other) {
            (EnvPoint::Circle { phase: a }, EnvPoint::Circle { phase: b }) => Some(circ(*a, *b)),
            (EnvPoint::Torus { phase: a }, EnvPoint::Torus { phase: b }) => {
                Some(circ(a[0], b[0]).max(circ(a[1], b[1])))
            }
            (EnvPoint::Quasicrystal(a), EnvPoint::Quasicrystal(b)) if a.alpha == b.alpha => {
                Some((a.offset - b.offset).abs())
            }
            _ => None,
        }
    }
}

/// A recentered patch `ω ∩ B̄_ρ(x) − x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pattern {
    pub radius: f64,
    pub points: Vec<f64>,
}

impl Pattern {
    /// Equality of patches up to [`MATCH_TOL`] on every position.
    pub fn matches(&self, other: &Pattern) -> bool {
        (self.radius - other.radius).abs() <= MATCH_TOL
            && self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| (a - b).abs() <= MATCH_TOL)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The cylinder `Ξ_{ω,ρ}` of environments showing `anchor` around the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderSpec {
    pub anchor: Pattern,
}

impl CylinderSpec {
    pub fn new(anchor: Pattern) -> Self {
        CylinderSpec { anchor }
    }

    /// Cylinder of the patch seen at `x` in `ω`.
    pub fn at(env: &EnvPoint, x: f64, radius: f64) -> Result<Self> {
        Ok(CylinderSpec { anchor: pattern_at(env, x, radius)? })
    }

    pub fn radius(&self) -> f64 {
        self.anchor.radius
    }
}

/// The recentered points of `ω` within closed distance `ρ` of `x`.
pub fn pattern_at(env: &EnvPoint, x: f64, radius: f64) -> Result<Pattern> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("pattern radius {radius} must be positive")));
    }
    let set = env.point_set()?;
    let points = set
        .points_in(x - radius - 1.0, x + radius + 1.0)?
        .into_iter()
        .map(|p| p - x)
        .filter(|d| d.abs() <= radius + MATCH_TOL)
        .collect();
    Ok(Pattern { radius, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half() -> AlphaValue {
        AlphaValue::rational(1, 2).unwrap()
    }

    #[test]
    fn beatty_half_is_even_integers() {
        // 0 is even, so it belongs to the set as well.
        assert_eq!(beatty_points(&half(), 0.0, 10.0).unwrap(), vec![0, 2, 4, 6, 8, 10]);
    }

    #[test]
    fn beatty_fibonacci_matches_float_free_oracle() {
        let fib = AlphaValue::fibonacci();
        let got = beatty_points(&fib, 1.0, 20.0).unwrap();
        // ⌊nα⌋ for α = (√5−1)/2 via isqrt(5n²).
        let fl = |n: i64| ((5 * n * n) as u64).isqrt() as i64 - n;
        let expect: Vec<i64> = (1..=20).filter(|&n| fl(n).div_euclid(2) - fl(n - 1).div_euclid(2) == 1).collect();
        assert_eq!(got, expect);
        assert_eq!(got.len(), 12);
    }

    #[test]
    fn beatty_window_errors() {
        assert!(matches!(beatty_points(&half(), 0.0, 2e7), Err(Error::Resource(_))));
        assert!(matches!(beatty_points(&half(), 3.0, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn beatty_count_law_to_a_million() {
        let fib = AlphaValue::fibonacci();
        let pts = beatty_points(&fib, 1.0, 1e6).unwrap();
        for (i, &n) in pts.iter().enumerate() {
            // #members in [1, n] is ⌊nα⌋ exactly; here that count is i + 1.
            assert_eq!(fib.floor_mul(n), i as i64 + 1);
        }
        assert_eq!(pts.len() as i64, fib.floor_mul(1_000_000));
    }

    #[test]
    fn translate_examples() {
        assert_eq!(EnvPoint::circle(0.25).translate(0.75), EnvPoint::circle(0.0));
        let EnvPoint::Torus { phase } = EnvPoint::torus(0.0, 0.0).translate(1.0) else { unreachable!() };
        assert_eq!(phase[0], 0.0);
        assert!((phase[1] - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-15);
        let w = EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0);
        assert_eq!(w.translate(0.3).translate(-0.3).separation(&w), Some(0.0));
        assert_eq!(w.translate(0.3).translate(-0.3), w);
    }

    #[test]
    fn pattern_examples() {
        let w = EnvPoint::quasicrystal(half(), 0.0);
        assert_eq!(pattern_at(&w, 0.0, 4.0).unwrap().points, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!(pattern_at(&w, 1.0, 0.1).unwrap().is_empty());
        assert!(pattern_at(&EnvPoint::circle(0.0), 0.0, 1.0).is_err());
        assert!(pattern_at(&w, 0.0, 0.0).is_err());
    }

    #[test]
    fn fibonacci_pattern_brute_force() {
        let fib = AlphaValue::fibonacci();
        let w = EnvPoint::quasicrystal(fib, 0.0);
        for x in [1i64, 3, 4, 6, 9, 11] {
            if !fib.is_beatty(x) {
                continue;
            }
            let got = pattern_at(&w, x as f64, 5.0).unwrap();
            let expect: Vec<f64> = ((x - 5)..=(x + 5)).filter(|&n| fib.is_beatty(n)).map(|n| (n - x) as f64).collect();
            assert_eq!(got.points, expect);
        }
    }

    #[test]
    fn bracket_finds_consecutive_points() {
        let set = PointSet::new(AlphaValue::fibonacci(), 0.25);
        for i in 0..200 {
            let x = -50.0 + 0.37 * i as f64;
            let (a, b) = set.bracket(x);
            assert!(a <= x && x < b);
            assert!(set.points_in(a + 1e-6, b - 1e-6).unwrap().is_empty());
        }
    }

    proptest! {
        #[test]
        fn gap_law(p in 1i64..50, q in 2i64..60, lo in -10_000i64..10_000) {
            prop_assume!(p < q);
            let alpha = AlphaValue::rational(p, q).unwrap();
            let pts = beatty_points(&alpha, lo as f64, (lo + 400) as f64).unwrap();
            let g = alpha.short_gap();
            for w in pts.windows(2) {
                let d = w[1] - w[0];
                prop_assert!(d == g || d == g + 1);
            }
        }

        #[test]
        fn gap_law_quadratic(a in -20i64..20, b in 1i64..6, c in 1i64..30, d in 2i64..40, lo in -10_000i64..10_000) {
            let Ok(alpha) = AlphaValue::quadratic(a, b, c, d) else { return Ok(()) };
            let pts = beatty_points(&alpha, lo as f64, (lo + 400) as f64).unwrap();
            let g = alpha.short_gap();
            for w in pts.windows(2) {
                let dd = w[1] - w[0];
                prop_assert!(dd == g || dd == g + 1);
            }
        }

        #[test]
        fn cocycle(s in -100.0f64..100.0, t in -100.0f64..100.0, p in 0.0f64..1.0, q in 0.0f64..1.0) {
            for w in [EnvPoint::circle(p), EnvPoint::torus(p, q)] {
                let lhs = w.translate(s).translate(t);
                let rhs = w.translate(s + t);
                prop_assert!(lhs.separation(&rhs).unwrap() <= 1e-12);
            }
            // Dyadic shifts are exact in binary floating point.
            let (s2, t2) = ((s * 1024.0).round() / 1024.0, (t * 1024.0).round() / 1024.0);
            let p2 = (p * 1024.0).round() / 1024.0;
            let w = EnvPoint::quasicrystal(AlphaValue::fibonacci(), p2);
            prop_assert_eq!(w.translate(s2).translate(t2), w.translate(s2 + t2));
            let w = EnvPoint::quasicrystal(AlphaValue::fibonacci(), p);
            let lhs = w.translate(s).translate(t);
            prop_assert!(lhs.separation(&w.translate(s + t)).unwrap() <= 1e-12);
        }
    }
}
