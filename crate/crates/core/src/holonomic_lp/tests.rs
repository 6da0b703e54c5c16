use super::*;
use crate::chain_opt::{ground_energy, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lp(lambda: f64, k: f64, n: usize, t_max: f64) -> LpProblem {
    discretize_circle(&LagrangianSpec::circle(lambda, k), n, t_max).unwrap()
}

#[test]
fn construction() {
    let p = lp(0.0, 0.0, 8, 1.0);
    assert_eq!(p.arcs(), 8 * (2 * 8 + 1));
    for j in 0..8 {
        let k0 = p.jumps.iter().position(|&k| k == 0).unwrap();
        assert_eq!(p.cost[j * p.jumps.len() + k0], 0.0);
    }
    let p = lp(0.5, 1.0, 16, 2.0);
    assert_eq!(p.arcs(), 16 * (2 * 2 * 16 + 1));
    let e = p.model.bind(&EnvPoint::circle(0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let a = rng.gen_range(0..p.arcs());
        let (j, _, k) = p.arc(a);
        let x = j as f64 / 16.0;
        assert!((p.cost[a] - e.energy(x, x + p.jump(k))).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_problems() {
    let m = LagrangianSpec::circle(1.0, 1.0);
    assert!(discretize_circle(&m, 4, 2.0).is_err());
    assert!(discretize_circle(&m, 8, 1.5).is_err());
    assert!(matches!(discretize_circle(&m, 512, 2.0), Err(Error::Resource(_))));
    assert!(discretize_circle(&LagrangianSpec::torus(0.0, 1.0, 1.0), 8, 2.0).is_err());
}

#[test]
fn free_spring_has_zero_cost_cycle() {
    let p = lp(1.0, 0.0, 8, 2.0);
    let s = solve(&p).unwrap();
    assert!(s.primal.abs() < 1e-12);
    assert!(s.dual.value.abs() < 1e-9);
    let sup = mather_support(&s.measure, 1e-6).unwrap();
    assert!(!sup.arcs.is_empty());
    assert!(sup.arcs.iter().all(|&(_, k)| k == 8));
    let zero = DualPotential { u: vec![0.0; 8], value: 0.0 };
    assert!(zero.violation(&p) <= 1e-12);
}

#[test]
fn primal_matches_min_mean_cycle() {
    for (lambda, k) in [(0.0, 1.0), (0.5, 1.0), (0.25, 3.0), (1.0, 0.5)] {
        for n in [8, 16] {
            let p = lp(lambda, k, n, lambda + 1.0);
            let s = solve(&p).unwrap();
            let oracle = min_mean_cycle(&p);
            assert!((s.primal - oracle).abs() < 1e-9, "λ={lambda} K={k} N={n}: {} vs {oracle}", s.primal);
            let cheapest = p.cost.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(s.primal >= cheapest - 1e-12);
        }
    }
}

#[test]
fn duality_and_measure_invariants() {
    for k in [0.0, 1.0] {
        let p = lp(0.5, k, 16, 2.0);
        let s = solve(&p).unwrap();
        assert!(s.dual.value <= s.primal + 1e-9);
        assert!(s.gap() <= 1e-6);
        assert!(s.dual.violation(&p) <= 1e-9);
        assert!((s.measure.mass() - 1.0).abs() <= 1e-10);
        assert!(s.measure.holonomy_residual() <= 1e-9);
        assert!(s.measure.weights.iter().all(|&w| w >= 0.0));
    }
}

#[test]
fn large_potential_concentrates_at_minimum() {
    let p = lp(0.5, 40.0, 16, 2.0);
    let s = solve(&p).unwrap();
    let sup = mather_support(&s.measure, 1e-6).unwrap();
    assert!(sup.projection.iter().all(|&j| j == 0 || j == 15 || j == 1), "{sup:?}");
    assert!(mather_support(&s.measure, 1.0).is_err());
}

#[test]
fn batch_matches_sequential() {
    let ps: Vec<_> = [8, 12, 16].iter().map(|&n| lp(0.5, 1.0, n, 2.0)).collect();
    let a = solve_batch(&ps, Exec::Parallel);
    let b = solve_batch(&ps, Exec::Sequential);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.as_ref().unwrap(), y.as_ref().unwrap());
    }
}

#[test]
fn primal_tracks_chain_estimate() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let est = ground_energy(&model, &EnvPoint::circle(0.0), &[8, 16, 32, 64], &SolverOptions::for_model(&model)).unwrap();
    let v16 = solve(&lp(0.5, 1.0, 16, 2.0)).unwrap().primal;
    let v32 = solve(&lp(0.5, 1.0, 32, 2.0)).unwrap().primal;
    assert!(v32 >= est.lower_bound - 2e-2);
    assert!((v32 - est.extrapolated).abs() <= 2e-2, "{v32} vs {}", est.extrapolated);
    assert!((v32 - est.extrapolated).abs() <= (v16 - est.extrapolated).abs() + 1e-12);
}
