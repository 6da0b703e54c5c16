//! Dense two-phase tableau simplex with Bland's rule, for
//! `min c·x  s.t.  A x = b, x ≥ 0` with `b ≥ 0`.

use crate::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 1_000_000;

pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Row duals `y` with `c − Aᵀy ≥ 0` at optimality.
    pub y: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    /// Structural plus artificial columns.
    width: usize,
    /// `m` constraint rows then the objective row, each `width + 1` long
    /// with the right-hand side last.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        let w = self.width + 1;
        &self.data[i * w..(i + 1) * w]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width + 1;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.data[i * w + c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule over the columns `< allowed`.
    fn optimize(&mut self, allowed: usize, budget: &mut usize) -> Result<()> {
        let w = self.width + 1;
        loop {
            let obj = self.row(self.m);
            let Some(c) = (0..allowed).find(|&j| obj[j] < -PIVOT_EPS) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.m {
                let a = self.data[i * w + c];
                if a > PIVOT_EPS {
                    let ratio = self.data[i * w + self.width] / a;
                    best = match best {
                        None => Some((ratio, i)),
                        Some((br, bi)) => {
                            if ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((ratio, i))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            let (_, r) = best.ok_or_else(|| Error::NumericalFailure { message: "linear program is unbounded".into(), best: vec![] })?;
            self.pivot(r, c);
            *budget = budget.checked_sub(1).ok_or_else(|| Error::NumericalFailure {
                message: format!("simplex exceeded {MAX_PIVOTS} pivots"),
                best: vec![],
            })?;
        }
    }
}

/// `a` is row-major `m × n`.
pub(crate) fn solve(a: &[f64], b: &[f64], c: &[f64]) -> Result<Solution> {
    let m = b.len();
    let n = c.len();
    debug_assert_eq!(a.len(), m * n);
    let width = n + m;
    let w = width + 1;
    let mut data = vec![0.0; (m + 1) * w];
    for i in 0..m {
        data[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        data[i * w + n + i] = 1.0;
        data[i * w + width] = b[i];
    }
    // Phase-one objective: the sum of artificials, priced out.
    for j in 0..n {
        data[m * w + j] = -(0..m).map(|i| a[i * n + j]).sum::<f64>();
    }
    data[m * w + width] = -b.iter().sum::<f64>();
    let mut t = Tableau { m, width, data, basis: (n..n + m).collect() };
    let mut budget = MAX_PIVOTS;
    t.optimize(n, &mut budget)?;
    if t.data[m * w + width].abs() > 1e-9 {
        return Err(Error::NumericalFailure { message: "linear program is infeasible".into(), best: vec![] });
    }
    // Drive degenerate artificials out of the basis.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| t.data[r * w + j].abs() > 1e-9) {
                t.pivot(r, c);
            }
        }
    }
    // Phase two objective row: c − c_B B⁻¹ A.
    let obj = &mut t.data[m * w..];
    obj[..n].copy_from_slice(c);
    obj[n..].fill(0.0);
    for r in 0..m {
        let cb = if t.basis[r] < n { c[t.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                t.data[m * w + j] -= cb * t.data[r * w + j];
            }
        }
    }
    t.optimize(n, &mut budget)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.data[r * w + width];
        }
    }
    let value = c.iter().zip(&x).map(|(c, x)| c * x).sum();
    // The artificial block of the objective row holds −c_B B⁻¹ = −y.
    let y = (0..m).map(|i| -t.data[m * w + n + i]).collect();
    Ok(Solution { x, value, y, pivots: MAX_PIVOTS - budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min −x − y, x + 2y + s1 = 4, 3x + y + s2 = 6 → (8/5, 6/5).
        let a = [1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0];
        let s = solve(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((s.x[0] - 1.6).abs() < 1e-12 && (s.x[1] - 1.2).abs() < 1e-12);
        assert!((s.value + 2.8).abs() < 1e-12);
        let dual: f64 = s.y[0] * 4.0 + s.y[1] * 6.0;
        assert!((dual - s.value).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_and_infeasibility() {
        // x + y = 1 twice.
        let s = solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn unbounded() {
        // x − y = 1, min −x.
        assert!(solve(&[1.0, -1.0], &[1.0], &[-1.0, 0.0]).is_err());
    }
}
