mod common;

use common::{nominal, random_pair, rng};
use rand::Rng;
use rsma_bounds::feasibility::lambda_strict_lower;
use rsma_bounds::oracle::{map_region, GridAxis, GridSpec};
use rsma_bounds::SinrPair;

fn nominal_grid() -> GridSpec {
    let fine = GridAxis::new(0.001, 0.999, 0.001).unwrap();
    GridSpec {
        lambda: GridAxis::new(0.85, 0.999, 0.001).unwrap(),
        alpha: fine,
        tau: fine,
        beta: 0.0,
    }
}

#[test]
fn nominal_point_fine_grid() {
    let r = map_region(&nominal(), &nominal_grid()).unwrap();
    assert_eq!(
        r.mismatch_count,
        0,
        "{:?}",
        &r.mismatches[..r.mismatches.len().min(5)]
    );
    let lmin = r.empirical_lambda_min.unwrap();
    assert!((0.864..=0.866).contains(&lmin), "{lmin}");

    let s = r.slice(0.99).unwrap();
    assert!((s.lambda - 0.99).abs() < 1e-9);
    let (lo, hi) = (s.alpha_min.unwrap(), s.alpha_max.unwrap());
    assert!(
        (lo - 0.683).abs() <= 0.0015 && (hi - 0.776).abs() <= 0.0015,
        "({lo}, {hi})"
    );
    let (alo, ahi) = s.analytic.unwrap();
    assert!((lo - alo).abs() <= 0.001 && (hi - ahi).abs() <= 0.001);
}

#[test]
fn nominal_point_cells_satisfy_both_inequalities() {
    let r = map_region(&nominal(), &GridSpec::uniform(0.004, 0.0).unwrap()).unwrap();
    let p = nominal();
    let mut n = 0;
    for (l, a, t) in r.feasible_cells() {
        let rep = rsma_bounds::rate_model::split_rates(&p, a, l, 0.0)
            .unwrap()
            .report(t);
        assert!(rep.both_users_gain(), "({l}, {a}, {t})");
        n += 1;
    }
    assert!(n > 0);
}

#[test]
fn random_pairs_at_the_specified_step() {
    let mut r = rng(21);
    for _ in 0..20 {
        let p = random_pair(&mut r);
        for beta in [0.0, 0.02] {
            let grid = GridSpec::uniform(0.001, beta).unwrap();
            let rep = map_region(&p, &grid).unwrap();
            assert_eq!(
                rep.mismatch_count,
                0,
                "gs={} gw={} beta={beta}: {:?}",
                p.gamma_s(),
                p.gamma_w(),
                &rep.mismatches[..rep.mismatches.len().min(5)]
            );
            if let (Some(emp), Ok(strict)) =
                (rep.empirical_lambda_min, lambda_strict_lower(&p, beta))
            {
                assert!(
                    emp >= strict - 0.001 && emp <= strict + 0.002,
                    "{emp} vs {strict}"
                );
            }
        }
    }
}

#[test]
fn report_does_not_depend_on_thread_count() {
    let grid = GridSpec::uniform(0.003, 0.02).unwrap();
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| map_region(&nominal(), &grid).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn nearly_equal_users_with_full_residual_give_an_empty_region() {
    let mut r = rng(5);
    for _ in 0..5 {
        let gw = 10f64.powf(r.gen_range(0.0..1.0));
        let p = SinrPair::new(gw * 1.05, gw).unwrap();
        let rep = map_region(&p, &GridSpec::uniform(0.01, 1.0).unwrap()).unwrap();
        assert_eq!(rep.regime_cells, 0);
        assert!(rep.passed());
        assert_eq!(rep.slices.len(), 99);
    }
}
