use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Largest |n| for which [`AlphaValue::floor_mul`] is guaranteed exact.
pub const MAX_EXACT_INDEX: i64 = 1 << 40;

// Coefficient caps keep every intermediate of `floor_mul` inside i128/u128
// for |n| <= MAX_EXACT_INDEX.
const MAX_COEFF: i64 = 1 << 20;
const MAX_B2D: i128 = 1 << 40;

/// A rotation number in (0, 1) with an exact integer-floor oracle.
///
/// Floating-point values are deliberately unrepresentable: the Beatty gap
/// and count laws must hold exactly, which needs `floor(n·α)` computed in
/// integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlphaValue {
    /// `p / q` with `0 < p < q`, stored in lowest terms.
    Rational { p: i64, q: i64 },
    /// `(a + b·√d) / c` with `c > 0` and `d` a positive non-square.
    Quadratic { a: i64, b: i64, c: i64, d: i64 },
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_square(d: i64) -> bool {
    d >= 0 && (d as u64).isqrt().pow(2) == d as u64
}

/// floor(b·√d) for d > 0 non-square, exactly.
fn floor_b_sqrt_d(b: i128, d: i128) -> i128 {
    if b == 0 {
        return 0;
    }
    let sq = (b.unsigned_abs() * b.unsigned_abs())
        .checked_mul(d as u128)
        .expect("b²·d overflows u128; index outside the exact range");
    let r = sq.isqrt() as i128;
    if b > 0 {
        r
    } else {
        // b·√d is irrational, so it never equals -r.
        -r - 1
    }
}

impl AlphaValue {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("alpha denominator is zero"));
        }
        let (mut p, mut q) = if q < 0 { (-p, -q) } else { (p, q) };
        let g = gcd(p, q).max(1);
        p /= g;
        q /= g;
        if !(0 < p && p < q) {
            return Err(Error::domain(format!("alpha = {p}/{q} is not in (0, 1)")));
        }
        Ok(AlphaValue::Rational { p, q })
    }

    pub fn quadratic(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::domain("alpha denominator is zero"));
        }
        if d <= 0 || is_square(d) {
            return Err(Error::domain(format!("d = {d} must be a positive non-square")));
        }
        if b == 0 {
            return Err(Error::domain("b = 0 makes alpha rational; use p/q"));
        }
        let (a, b, c) = if c < 0 { (-a, -b, -c) } else { (a, b, c) };
        if a.abs() > MAX_COEFF || c > MAX_COEFF || (b as i128).pow(2) * d as i128 > MAX_B2D {
            return Err(Error::domain("quadratic coefficients too large for exact floors"));
        }
        let alpha = AlphaValue::Quadratic { a, b, c, d };
        // Irrational, so floor(alpha) == 0 is equivalent to 0 < alpha < 1.
        if alpha.floor_mul(1) != 0 {
            return Err(Error::domain(format!("alpha = {alpha} is not in (0, 1)")));
        }
        Ok(alpha)
    }

    /// The golden-mean rotation (√5 − 1)/2.
    pub fn fibonacci() -> Self {
        AlphaValue::Quadratic { a: -1, b: 1, c: 2, d: 5 }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, AlphaValue::Rational { .. })
    }

    /// Floating-point approximation, for reporting and initial guesses only.
    pub fn value(&self) -> f64 {
        match *self {
            AlphaValue::Rational { p, q } => p as f64 / q as f64,
            AlphaValue::Quadratic { a, b, c, d } => (a as f64 + b as f64 * (d as f64).sqrt()) / c as f64,
        }
    }

    /// `floor(n·α)` in exact integer arithmetic.
    ///
    /// Panics if `|n|` is far outside [`MAX_EXACT_INDEX`] and an intermediate
    /// overflows.
    pub fn floor_mul(&self, n: i64) -> i64 {
        match *self {
            AlphaValue::Rational { p, q } => ((n as i128 * p as i128).div_euclid(q as i128)) as i64,
            AlphaValue::Quadratic { a, b, c, d } => {
                let big_a = n as i128 * a as i128;
                let big_b = n as i128 * b as i128;
                let floor_x = big_a + floor_b_sqrt_d(big_b, d as i128);
                floor_x.div_euclid(c as i128) as i64
            }
        }
    }

    /// Membership in the Beatty set `{n : ⌊nα⌋ − ⌊(n−1)α⌋ = 1}`.
    #[inline]
    pub fn is_beatty(&self, n: i64) -> bool {
        self.floor_mul(n) - self.floor_mul(n - 1) == 1
    }

    /// `⌊1/α⌋`, the short gap of the Beatty set.
    pub fn short_gap(&self) -> i64 {
        match *self {
            AlphaValue::Rational { p, q } => q / p,
            AlphaValue::Quadratic { .. } => {
                // Largest k with k·α < 1; for irrational α this is ⌊1/α⌋.
                let mut k = (1.0 / self.value()).floor().max(1.0) as i64;
                while self.floor_mul(k) >= 1 {
                    k -= 1;
                }
                while self.floor_mul(k + 1) == 0 {
                    k += 1;
                }
                k
            }
        }
    }

    /// Distinct gap lengths of the Beatty set, ascending.
    pub fn gaps(&self) -> Vec<i64> {
        let q = self.short_gap();
        match *self {
            AlphaValue::Rational { p, q: den } if den % p == 0 => vec![q],
            _ => vec![q, q + 1],
        }
    }

    /// Largest gap between consecutive Beatty points.
    pub fn long_gap(&self) -> i64 {
        *self.gaps().last().expect("at least one gap")
    }
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AlphaValue::Rational { p, q } => write!(f, "{p}/{q}"),
            AlphaValue::Quadratic { a, b, c, d } => {
                let sign = if b < 0 { '-' } else { '+' };
                write!(f, "({a}{sign}{}*sqrt({d}))/{c}", b.abs())
            }
        }
    }
}

impl Serialize for AlphaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_int(s: &str) -> Result<i64> {
    s.parse::<i64>()
        .map_err(|_| Error::domain(format!("expected an integer, found {s:?}")))
}

/// Parses `b√d`, `b*sqrt(d)`, `√d`, `-sqrt(d)`.
fn parse_surd(term: &str) -> Result<Option<(i64, i64)>> {
    let (coeff, rest) = if let Some(i) = term.find('√') {
        (&term[..i], &term[i + '√'.len_utf8()..])
    } else if let Some(i) = term.find("sqrt(") {
        let inner = term[i + 5..]
            .strip_suffix(')')
            .ok_or_else(|| Error::domain(format!("unbalanced sqrt in {term:?}")))?;
        (&term[..i], inner)
    } else {
        return Ok(None);
    };
    let coeff = coeff.trim_end_matches('*');
    let b = match coeff {
        "" | "+" => 1,
        "-" => -1,
        c => parse_int(c)?,
    };
    let rest = rest.trim_start_matches('(').trim_end_matches(')');
    Ok(Some((b, parse_int(rest)?)))
}

impl FromStr for AlphaValue {
    type Err = Error;

    /// Accepts `p/q`, `(a+b√d)/c` and `(a+b*sqrt(d))/c`. Decimal literals
    /// are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.contains('.') || s.contains('e') && !s.contains("sqrt") {
            return Err(Error::domain(format!(
                "floating-point alpha {s:?} rejected; use p/q or (a+b*sqrt(d))/c"
            )));
        }
        let (num, den) = match s.rfind('/') {
            Some(i) if !s[i..].contains(')') => (&s[..i], parse_int(&s[i + 1..])?),
            _ => (s.as_str(), 1),
        };
        let num = num.strip_prefix('(').and_then(|n| n.strip_suffix(')')).unwrap_or(num);

        // Split into signed terms, keeping signs that are not inside sqrt(...).
        let mut terms = Vec::new();
        let mut start = 0;
        let mut depth = 0;
        for (i, ch) in num.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if i > start && depth == 0 && !num[..i].ends_with('*') => {
                    terms.push(&num[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&num[start..]);

        let mut a = 0;
        let mut surd = None;
        for t in terms {
            match parse_surd(t)? {
                Some(bd) if surd.is_none() => surd = Some(bd),
                Some(_) => return Err(Error::domain(format!("more than one surd in {s:?}"))),
                None => a += parse_int(t)?,
            }
        }
        match surd {
            Some((b, d)) => AlphaValue::quadratic(a, b, den, d),
            None => AlphaValue::rational(a, den),
        }
    }
}
