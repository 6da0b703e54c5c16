//! Newton refinement of a chain with a tridiagonal Hessian.

use crate::lagrangians::BoundEnergy;
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-12;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub(crate) struct Refiner<'a> {
    pub e: &'a BoundEnergy,
    pub free_start: bool,
    pub free_end: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// Half-width of the golden-section bracket used when `W'' ≈ 0`.
    pub bracket: f64,
}

/// Derivatives of the chain energy with respect to each position.
struct Jet {
    grad: Vec<f64>,
    diag: Vec<f64>,
    /// `off[k] = ∂²E/∂x_k∂x_{k+1}`.
    off: Vec<f64>,
}

impl Refiner<'_> {
    fn range(&self, n: usize) -> (usize, usize) {
        (usize::from(!self.free_start), if self.free_end { n } else { n - 1 })
    }

    fn jet(&self, xs: &[f64]) -> Jet {
        let n = xs.len() - 1;
        let spring = &self.e.model.spring;
        let mut grad = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut off = vec![0.0; n];
        for k in 0..n {
            let t = xs[k + 1] - xs[k];
            let (w1, w2) = (spring.d1(t), spring.d2(t));
            let (_, p1, p2) = self.e.potential_jet(xs[k]);
            grad[k] += p1 - w1;
            grad[k + 1] += w1;
            diag[k] += w2 + p2;
            diag[k + 1] += w2;
            off[k] = -w2;
        }
        Jet { grad, diag, off }
    }

    /// Energy terms that involve `x_k`.
    fn local(&self, xs: &[f64], k: usize, x: f64) -> f64 {
        let mut v = 0.0;
        if k > 0 {
            v += self.e.energy(xs[k - 1], x);
        }
        if k + 1 < xs.len() {
            v += self.e.energy(x, xs[k + 1]);
        }
        v
    }

    /// Solves `(H + μI) p = −g` on the active range; `None` if a pivot fails.
    fn newton_direction(&self, jet: &Jet, a: usize, b: usize, mu: f64) -> Option<Vec<f64>> {
        let m = b - a + 1;
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for i in 0..m {
            let k = a + i;
            let lower = if i > 0 { jet.off[k - 1] } else { 0.0 };
            let piv = jet.diag[k] + mu - lower * prev_c;
            if !(piv > 1e-14 * (1.0 + jet.diag[k].abs())) {
                return None;
            }
            let upper = if i + 1 < m { jet.off[k] } else { 0.0 };
            c[i] = upper / piv;
            d[i] = (-jet.grad[k] - lower * prev_d) / piv;
            prev_c = c[i];
            prev_d = d[i];
        }
        let mut p = vec![0.0; m];
        p[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            p[i] = d[i] - c[i] * p[i + 1];
        }
        Some(p)
    }

    /// One damped Newton step. Returns the max move, or `None` when no
    /// acceptable step was found.
    fn newton_step(&self, xs: &mut [f64], f: &mut f64) -> Option<f64> {
        let n = xs.len() - 1;
        let (a, b) = self.range(n);
        let jet = self.jet(xs);
        let scale = jet.diag[a..=b].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Stationary to rounding: a step would only chase noise along flat directions.
        let gmax = jet.grad[a..=b].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= GRAD_TOL * (1.0 + scale) {
            return Some(0.0);
        }
        let mut mu = 0.0;
        let p = loop {
            if let Some(p) = self.newton_direction(&jet, a, b, mu) {
                break p;
            }
            mu = if mu == 0.0 { 1e-10 * (1.0 + scale) } else { mu * 10.0 };
            if mu > 1e12 * (1.0 + scale) {
                return None;
            }
        };
        let slope: f64 = p.iter().enumerate().map(|(i, pi)| pi * jet.grad[a + i]).sum();
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pmax == 0.0 {
            return Some(0.0);
        }
        if slope >= 0.0 {
            return None;
        }
        let mut trial = xs.to_vec();
        let mut alpha = 1.0;
        while alpha > 1e-10 {
            for (i, pi) in p.iter().enumerate() {
                trial[a + i] = xs[a + i] + alpha * pi;
            }
            let ft = self.e.chain_energy(&trial);
            let noise = pmax * alpha < 1e-7 && ft <= *f + 1e-12 * (1.0 + f.abs());
            if ft <= *f + ARMIJO * alpha * slope || noise {
                xs.copy_from_slice(&trial);
                *f = ft;
                return Some(alpha * pmax);
            }
            alpha *= 0.5;
        }
        None
    }

    fn golden(&self, xs: &[f64], k: usize) -> f64 {
        let (mut lo, mut hi) = (xs[k] - self.bracket, xs[k] + self.bracket);
        let mut x1 = hi - GOLDEN * (hi - lo);
        let mut x2 = lo + GOLDEN * (hi - lo);
        let (mut f1, mut f2) = (self.local(xs, k, x1), self.local(xs, k, x2));
        while hi - lo > 1e-12 * (1.0 + xs[k].abs()) {
            if f1 <= f2 {
                hi = x2;
                (x2, f2) = (x1, f1);
                x1 = hi - GOLDEN * (hi - lo);
                f1 = self.local(xs, k, x1);
            } else {
                lo = x1;
                (x1, f1) = (x2, f2);
                x2 = lo + GOLDEN * (hi - lo);
                f2 = self.local(xs, k, x2);
            }
        }
        let mid = 0.5 * (lo + hi);
        if self.local(xs, k, mid) < self.local(xs, k, xs[k]) {
            mid
        } else {
            xs[k]
        }
    }

    /// Gauss-Seidel sweep of one-dimensional Newton steps.
    fn coordinate_sweep(&self, xs: &mut [f64]) -> f64 {
        let n = xs.len() - 1;
        let (a, b) = self.range(n);
        let mut moved = 0.0f64;
        for k in a..=b {
            let jet = self.jet_at(xs, k);
            let old = xs[k];
            let f0 = self.local(xs, k, old);
            let new = if jet.1 > 1e-12 {
                let mut step = -jet.0 / jet.1;
                loop {
                    if self.local(xs, k, old + step) <= f0 || step.abs() < 1e-15 {
                        break old + step;
                    }
                    step *= 0.5;
                }
            } else {
                self.golden(xs, k)
            };
            if self.local(xs, k, new) <= f0 {
                xs[k] = new;
                moved = moved.max((new - old).abs());
            }
        }
        moved
    }

    /// First and second derivative of the local energy at `x_k`.
    fn jet_at(&self, xs: &[f64], k: usize) -> (f64, f64) {
        let spring = &self.e.model.spring;
        let mut g = 0.0;
        let mut h = 0.0;
        if k > 0 {
            let t = xs[k] - xs[k - 1];
            g += spring.d1(t);
            h += spring.d2(t);
        }
        if k + 1 < xs.len() {
            let t = xs[k + 1] - xs[k];
            let (_, p1, p2) = self.e.potential_jet(xs[k]);
            g += p1 - spring.d1(t);
            h += spring.d2(t) + p2;
        }
        (g, h)
    }

    /// Refines `xs` in place order; endpoints move only when free.
    pub fn run(&self, mut xs: Vec<f64>) -> Result<Vec<f64>> {
        let n = xs.len() - 1;
        let (a, b) = self.range(n);
        if n == 0 || a > b {
            return Ok(xs);
        }
        let mut f = self.e.chain_energy(&xs);
        let mut best = (f, xs.clone());
        for _ in 0..self.max_iter {
            let moved = match self.newton_step(&mut xs, &mut f) {
                Some(m) => m,
                None => {
                    let m = self.coordinate_sweep(&mut xs);
                    f = self.e.chain_energy(&xs);
                    m
                }
            };
            if f < best.0 {
                best = (f, xs.clone());
            }
            if moved < self.tol {
                return Ok(if f <= best.0 { xs } else { best.1 });
            }
        }
        Err(Error::NumericalFailure {
            message: format!("chain refinement did not reach tolerance {} in {} iterations", self.tol, self.max_iter),
            best: best.1,
        })
    }
}
