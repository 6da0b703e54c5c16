use super::*;
use crate::chain_opt::{ground_energy, minimize_free, Chain, SolverOptions};
use crate::environments::{AlphaValue, CylinderSpec, EnvPoint};
use crate::lagrangians::LagrangianSpec;
use proptest::prelude::*;

fn circle_table(k: f64, lambda: f64, x: f64, h: f64, n_max: usize) -> ManeTable {
    mane_table(&LagrangianSpec::circle(lambda, k), &EnvPoint::circle(0.0), 0.0, x, h, n_max, Exec::Parallel).unwrap()
}

/// Cheapest strictly monotone chain from 0 to `nodes[target]` with at most
/// `n_max` steps, by enumeration of subsets.
fn brute_force(e: &BoundEnergy, ebar: f64, nodes: &[f64], origin: usize, target: usize, n_max: usize) -> f64 {
    if target == origin {
        return e.energy(0.0, 0.0) - ebar;
    }
    let between: Vec<usize> = if target > origin { (origin + 1..target).collect() } else { (target + 1..origin).rev().collect() };
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << between.len()) {
        let mut path = vec![0.0];
        path.extend(between.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| nodes[i]));
        path.push(nodes[target]);
        let steps = path.len() - 1;
        if steps > n_max {
            continue;
        }
        let v: f64 = path.windows(2).map(|w| e.energy(w[0], w[1]) - ebar).sum();
        best = best.min(v);
    }
    best
}

#[test]
fn free_spring_examples() {
    let t = circle_table(0.0, 1.0, 4.0, 0.5, 16);
    assert!(t.value_at(2.0).unwrap().abs() < 1e-15);
    assert_eq!(t.argmin_chain(t.index_of(2.0).unwrap()), vec![0.0, 1.0, 2.0]);
    assert!((t.value_at(0.5).unwrap() - 0.125).abs() < 1e-15);
    assert_eq!(t.n_steps[t.index_of(0.5).unwrap()], 1);
    assert_eq!(t.value_at(0.0).unwrap(), 0.5);
    assert!(!t.truncated);
}

#[test]
fn closed_form_over_chain_lengths() {
    // With E̅ = 0 a single step is optimal up to t = √2, and integer
    // targets are reached at zero cost by unit steps.
    let t = circle_table(0.0, 1.0, 3.0, 0.25, 24);
    for (&x, &v) in t.nodes.iter().zip(&t.values) {
        if x > 0.0 && x <= 2f64.sqrt() {
            assert!((v - (x - 1.0).powi(2) / 2.0).abs() < 1e-12, "t = {x}");
        }
        if x > 0.0 && x.fract() == 0.0 {
            assert!(v.abs() < 1e-12, "t = {x}");
        }
    }
}

#[test]
fn matches_exhaustive_enumeration() {
    for k in [0.0, 1.0] {
        for ebar in [0.0, 0.3] {
            let model = LagrangianSpec::circle(1.0, k);
            let env = EnvPoint::circle(0.17);
            let t = mane_table(&model, &env, ebar, 2.0, 0.5, 6, Exec::Sequential).unwrap();
            let e = model.bind(&env).unwrap();
            for j in 0..t.nodes.len() {
                let oracle = brute_force(&e, ebar, &t.nodes, t.origin, j, 6);
                assert!((t.values[j] - oracle).abs() < 1e-12, "K={k} t={}", t.nodes[j]);
                let chain = t.argmin_chain(j);
                if j != t.origin {
                    let v: f64 = chain.windows(2).map(|w| e.energy(w[0], w[1]) - ebar).sum();
                    assert!((v - t.values[j]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn layered_matches_capped_enumeration() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let env = EnvPoint::circle(0.3);
    let e = model.bind(&env).unwrap();
    let nodes = uniform_nodes(3.0, 0.5).unwrap();
    for n_max in [1, 2, 3, 5] {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let t = ManeTable::with_nodes(&e, 0.1, nodes.clone(), n_max, exec).unwrap();
            for j in 0..nodes.len() {
                let oracle = brute_force(&e, 0.1, &nodes, t.origin, j, n_max);
                assert!((t.values[j] - oracle).abs() < 1e-12);
                assert!(t.argmin_chain(j).len() - 1 <= n_max.max(1));
            }
        }
    }
}

#[test]
fn doubling_cap_never_increases() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let env = EnvPoint::circle(0.0);
    let mut prev: Option<ManeTable> = None;
    for n_max in [2, 4, 8, 16, 32] {
        let t = mane_table(&model, &env, 0.0, 4.0, 0.25, n_max, Exec::Parallel).unwrap();
        if let Some(p) = &prev {
            for (a, b) in t.values.iter().zip(&p.values) {
                assert!(*a <= b + 1e-12);
            }
        }
        prev = Some(t);
    }
}

#[test]
fn truncation_flag() {
    // Reaching 4 at spring rest length 1 wants four steps.
    let t = circle_table(0.0, 1.0, 4.0, 0.5, 2);
    assert!(t.truncated);
    let t = circle_table(0.0, 1.0, 4.0, 0.5, 8);
    assert!(!t.truncated);
}

#[test]
fn rejects_bad_inputs() {
    let model = LagrangianSpec::circle(1.0, 0.0);
    let env = EnvPoint::circle(0.0);
    assert!(mane_table(&model, &env, 0.0, 2.0, 0.5, 17, Exec::Sequential).is_err());
    assert!(mane_table(&model, &env, 0.0, 2.0, 0.0, 1, Exec::Sequential).is_err());
    let e = model.bind(&env).unwrap();
    assert!(ManeTable::with_nodes(&e, 0.0, vec![0.5, 1.0], 3, Exec::Sequential).is_err());
}

#[test]
fn cocycle_inequalities_circle() {
    for k in [0.0, 1.0] {
        let model = LagrangianSpec::circle(0.5, k);
        let env = EnvPoint::circle(0.0);
        let est = ground_energy(&model, &env, &[8, 16, 32], &SolverOptions::for_model(&model)).unwrap();
        let h = 0.125;
        let t = mane_table(&model, &env, est.lower_bound, 3.0, h, 96, Exec::Parallel).unwrap();
        let d = cocycle_defects(&t, 12, 7, Exec::Parallel).unwrap();
        assert!(d.one_step_max <= 1e-9);
        assert!(d.lower_bound_max <= 1e-9, "{d:?}");
        assert!(d.subadd_max <= 10.0 * h * d.lipschitz, "{d:?}");
        assert!(d.sublinearity_ratio.is_finite());
        assert!(d.pairs > 0);
    }
}

#[test]
fn sublinearity_of_free_spring() {
    let h = 0.25;
    let t = circle_table(0.0, 1.0, 4.0, h, 32);
    let d = cocycle_defects(&t, 10, 1, Exec::Sequential).unwrap();
    assert!(d.sublinearity_ratio_forward <= 0.5 + h);
    assert!(d.subadd_max <= 1e-12);
}

#[test]
fn cocycle_is_seed_deterministic() {
    let t = circle_table(1.0, 0.5, 2.0, 0.25, 16);
    let a = cocycle_defects(&t, 10, 42, Exec::Parallel).unwrap();
    let b = cocycle_defects(&t, 10, 42, Exec::Sequential).unwrap();
    assert_eq!(a, b);
    assert!(cocycle_defects(&t, 9, 42, Exec::Sequential).is_err());
}

#[test]
fn refinement_change_is_first_order() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let e = model.bind(&EnvPoint::circle(0.0)).unwrap();
    let (c1, k1) = grid_refinement(&e, 0.0, 2.0, 0.25, Exec::Parallel).unwrap();
    let (c2, _) = grid_refinement(&e, 0.0, 2.0, 0.125, Exec::Parallel).unwrap();
    assert!(c1 >= 0.0 && k1.is_finite());
    assert!(c2 <= c1 + 1e-12);
}

#[test]
fn free_spring_window_is_calibrated() {
    let model = LagrangianSpec::circle(1.0, 0.0);
    let env = EnvPoint::circle(0.0);
    let opts = SolverOptions::for_model(&model);
    let est = ground_energy(&model, &env, &[8, 16, 32], &opts).unwrap();
    let rep = calibrate_window(&model, &env, &est, 32, 4, 0.25, &opts).unwrap();
    assert_eq!(rep.window.len(), 9);
    assert!(rep.max_defect() <= 1e-6, "{}", rep.max_defect());
    assert!(rep.extrapolated.min_defect >= -1e-8);
    assert!((rep.rotation - 1.0).abs() < 1e-8);
    assert_eq!(rep.pairs.len(), (1..=4).map(|d| 9 - d).sum::<usize>());
}

#[test]
fn torus_constant_chain_is_calibrated() {
    let model = LagrangianSpec::torus(0.0, 1.0, 1.0);
    let env = EnvPoint::torus(0.0, 0.0);
    let opts = SolverOptions::for_model(&model);
    let est = ground_energy(&model, &env, &[8, 16, 32], &opts).unwrap();
    assert!(est.extrapolated.abs() <= 1e-6);
    let rep = calibrate_window(&model, &env, &est, 16, 4, 0.25, &opts).unwrap();
    assert!(rep.window.iter().all(|x| x.abs() < 1e-6), "{:?}", rep.window);
    assert!(rep.max_defect().abs() <= 1e-6);
}

#[test]
fn calibration_rejects_short_outer_chain() {
    let model = LagrangianSpec::circle(1.0, 0.0);
    let env = EnvPoint::circle(0.0);
    let opts = SolverOptions::for_model(&model);
    let est = ground_energy(&model, &env, &[8, 16], &opts).unwrap();
    assert!(calibrate_window(&model, &env, &est, 15, 4, 0.25, &opts).is_err());
}

#[test]
fn rotation_of_free_spring_and_degenerate_case() {
    let model = LagrangianSpec::circle(1.0, 0.0);
    let r = rotation_number(&model, &EnvPoint::circle(0.0), &[8, 16, 32], &SolverOptions::for_model(&model)).unwrap();
    assert!(r.estimates.iter().all(|(_, v)| (v - 1.0).abs() < 1e-8));
    assert!(!r.degenerate);

    let flat = LagrangianSpec::circle(0.0, 0.0);
    let r = rotation_number(&flat, &EnvPoint::circle(0.0), &[8, 16], &SolverOptions::for_model(&flat)).unwrap();
    assert!(r.degenerate);
    let c = r.constant_configuration.unwrap();
    assert_eq!(c.len(), 17);
    assert!(c.iter().all(|&x| x == c[0]));
}

#[test]
fn periodic_equidistribution_is_flat() {
    let alpha = AlphaValue::rational(1, 2).unwrap();
    let env = EnvPoint::quasicrystal(alpha, 0.0);
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let e = model.bind(&env).unwrap();
    let chain = Chain::new(&e, (0..=20).map(f64::from).collect()).unwrap();
    let section = CylinderSpec::at(&env, 0.0, 3.0).unwrap();
    let eq = equidistribution_counts(&chain, &section, 1.5).unwrap();
    assert!(!eq.counts.is_empty());
    assert!(eq.counts.iter().all(|&c| c == 3));
    assert_eq!(eq.spread(), 0);
}

#[test]
fn fibonacci_minimizer_equidistributes() {
    let env = EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0);
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let opts = SolverOptions::for_model(&model);
    let (chain, _) = minimize_free(&model, &env, 64, &opts).unwrap();
    let q = AlphaValue::fibonacci().short_gap() as f64;
    let mid = chain.positions[32];
    let anchor = env.point_set().unwrap().bracket(mid).0;
    let section = CylinderSpec::at(&env, anchor, q + 1.0).unwrap();
    let eq = equidistribution_counts(&chain, &section, 3.0).unwrap();
    assert!(eq.counts.len() >= 3);
    assert!(eq.spread() <= 2, "{eq:?}");
}

#[test]
fn equidistribution_errors() {
    let env = EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0);
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let e = model.bind(&env).unwrap();
    let chain = Chain::new(&e, (0..=4).map(f64::from).collect()).unwrap();
    let wide = CylinderSpec::at(&env, 0.0, 40.0).unwrap();
    assert!(matches!(equidistribution_counts(&chain, &wide, 1.0), Err(Error::InsufficientData(_))));
    let empty = CylinderSpec::at(&env, 0.5, 0.1).unwrap();
    assert!(equidistribution_counts(&chain, &empty, 1.0).is_err());
    let back = Chain::new(&e, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
    assert!(equidistribution_counts(&back, &wide, 1.0).is_err());
    let circ = Chain::new(&LagrangianSpec::circle(1.0, 0.0).bind(&EnvPoint::circle(0.0)).unwrap(), vec![0.0, 1.0]).unwrap();
    assert!(equidistribution_counts(&circ, &wide, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_step_and_lower_bounds_hold(k in 0.0f64..2.0, lambda in 0.0f64..1.5, phase in 0.0f64..1.0) {
        let model = LagrangianSpec::circle(lambda, k);
        let env = EnvPoint::circle(phase);
        let e = model.bind(&env).unwrap();
        // Any ebar below inf E(x, x) makes the lower bound exact on the grid.
        let (_, diag) = crate::chain_opt::a_priori_bounds(&e);
        let t = mane_table(&model, &env, diag - 0.05, 2.0, 0.25, 16, Exec::Sequential).unwrap();
        for (&x, &v) in t.nodes.iter().zip(&t.values) {
            let one = if x == 0.0 { e.energy(0.0, 0.0) } else { e.energy(0.0, x) } - t.ebar;
            prop_assert!(v <= one + 1e-9);
            prop_assert!(v >= t.ebar - e.energy(x, 0.0) - 1e-9);
        }
    }
}

#[test]
fn circle_defect_does_not_grow_with_outer_length() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let env = EnvPoint::circle(0.0);
    let opts = SolverOptions::for_model(&model);
    let est = ground_energy(&model, &env, &[8, 16, 32, 64], &opts).unwrap();
    let a = calibrate_window(&model, &env, &est, 32, 4, 0.05, &opts).unwrap();
    let b = calibrate_window(&model, &env, &est, 64, 4, 0.05, &opts).unwrap();
    assert!(b.max_defect() <= a.max_defect() + 1e-12);
    assert!(b.tolerance < a.tolerance);
    assert!(a.lower.min_defect >= -1e-8 && b.lower.min_defect >= -1e-8);
}
