use fklab_core::chain_opt::{ground_energy, minimize_free, SolverOptions};
use fklab_core::environments::{beatty_points, AlphaValue, CylinderSpec, EnvPoint};
use fklab_core::holonomic_lp::{discretize_circle, min_mean_cycle, solve};
use fklab_core::lagrangians::LagrangianSpec;
use fklab_core::mane_calibration::{calibrate_window, cocycle_defects, equidistribution_counts, mane_table};
use fklab_core::towers::{induce_tower, level0_tower, tower_measure_residual};
use fklab_core::Exec;

#[test]
fn circle_estimates_agree_across_methods() {
    let model = LagrangianSpec::circle(0.5, 1.0);
    let env = EnvPoint::circle(0.0);
    let opts = SolverOptions::for_model(&model);
    let est = ground_energy(&model, &env, &[8, 16, 32, 64], &opts).unwrap();
    assert!(est.sandwich_low <= est.lower_bound + 1e-12);
    assert!(est.lower_bound <= est.extrapolated && est.extrapolated <= est.sandwich_high);

    let lp = discretize_circle(&model, 16, 2.0).unwrap();
    let sol = solve(&lp).unwrap();
    assert!((sol.primal - min_mean_cycle(&lp)).abs() < 1e-9);
    assert!(sol.primal >= est.lower_bound - 2e-2);

    let table = mane_table(&model, &env, est.lower_bound, 3.0, 0.1, 60, Exec::Parallel).unwrap();
    let d = cocycle_defects(&table, 10, 5, Exec::Parallel).unwrap();
    assert!(d.one_step_max <= 1e-9 && d.lower_bound_max <= 1e-9);

    let rep = calibrate_window(&model, &env, &est, 32, 4, 0.1, &opts).unwrap();
    assert!(rep.lower.min_defect >= -1e-8);
    assert!(rep.max_defect() <= rep.tolerance);
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let env = EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0);
    let seq = SolverOptions::for_model(&model).with_exec(Exec::Sequential);
    let par = SolverOptions::for_model(&model).with_exec(Exec::Parallel);
    let a = ground_energy(&model, &env, &[8, 16, 32], &seq).unwrap();
    let b = ground_energy(&model, &env, &[8, 16, 32], &par).unwrap();
    assert_eq!(a, b);
    let circle = LagrangianSpec::circle(0.5, 1.0);
    let ta = mane_table(&circle, &EnvPoint::circle(0.3), 0.02, 2.0, 0.1, 10, Exec::Sequential).unwrap();
    let tb = mane_table(&circle, &EnvPoint::circle(0.3), 0.02, 2.0, 0.1, 10, Exec::Parallel).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn fibonacci_minimizer_structure() {
    let alpha = AlphaValue::fibonacci();
    let env = EnvPoint::quasicrystal(alpha, 0.0);
    let model = LagrangianSpec::sturm(1.0, 0.5, 1.0);
    let (chain, _) = minimize_free(&model, &env, 64, &SolverOptions::for_model(&model)).unwrap();
    assert!(chain.is_strictly_monotone());
    let anchor = env.point_set().unwrap().bracket(chain.positions[32]).0;
    let rho = alpha.short_gap() as f64 + 1.0;
    let section = CylinderSpec::at(&env, anchor, rho).unwrap();
    for r in [1.0, 2.0, 4.0] {
        let eq = equidistribution_counts(&chain, &section, r).unwrap();
        assert!(eq.spread() <= 2, "R = {r}: {eq:?}");
    }
}

#[test]
fn beatty_count_law_and_towers() {
    let alpha = AlphaValue::fibonacci();
    for n in [1_i64, 10, 1_000, 123_457, 1_000_000] {
        let pts = beatty_points(&alpha, 1.0, n as f64 + 0.5).unwrap();
        assert_eq!(pts.len() as i64, alpha.floor_mul(n));
    }
    let t0 = level0_tower(&alpha, 1e5).unwrap();
    let (t1, m0) = induce_tower(&t0).unwrap();
    let (t2, m1) = induce_tower(&t1).unwrap();
    assert!(tower_measure_residual(&t0, &t1, &m0).unwrap() <= 1e-3);
    assert!(tower_measure_residual(&t1, &t2, &m1).unwrap() <= 1e-3);
    assert_eq!(m1.column_heights(&t1.heights()), t2.heights());
}
