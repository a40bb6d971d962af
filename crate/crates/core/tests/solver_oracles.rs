mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use shrinkcov_core::datagen::{Field, RngStream};
use shrinkcov_core::estimators::scm;
use shrinkcov_core::shrinkage::multi::{
    mt_constrained_moments, mt_loocv_moments, mt_oracle_moments, mt_select, solve_budget_qp,
    solve_nonneg_qp, MultiMoments, MultiTargetMethod,
};
use shrinkcov_core::shrinkage::single::{
    oracle_moments, scm_fast_moments, select_single_target, solve_quadratic_2d, Constraint,
    CvMoments, SingleTargetMethod,
};
use shrinkcov_core::targets::{diagonal_target, scaled_identity_target, toeplitz_average_target};
use shrinkcov_core::{HermitianMatrix, ScmLoo};

fn grid_min(m: &CvMoments, convex: bool) -> f64 {
    let mut best = f64::INFINITY;
    let steps = 3000;
    for i in 0..=steps {
        let rho = i as f64 * 1e-3;
        if convex {
            if rho <= 1.0 {
                best = best.min(m.objective(rho, 1.0 - rho));
            }
            continue;
        }
        for j in 0..=steps {
            best = best.min(m.objective(rho, j as f64 * 1e-3));
        }
    }
    best
}

fn random_instance(case: usize, rng: &mut RngStream) -> CvMoments {
    let n = 3 + case % 6;
    let t = 3 + case % 11;
    let field = if case % 2 == 0 {
        Field::Real
    } else {
        Field::Complex
    };
    let samples = random_samples(n, t, field, rng);
    let target = match case % 3 {
        0 => scaled_identity_target(&scm(&samples)),
        1 => random_psd(n, 1 + case % 4, field, rng),
        _ => random_psd(n, n, field, rng).scale(0.2 + (case % 5) as f64),
    };
    scm_fast_moments(&samples, &target).unwrap()
}

#[test]
fn closed_form_beats_grid_search() {
    let mut rng = RngStream::new(31, 0);
    for case in 0..60 {
        let m = random_instance(case, &mut rng);
        let unc = solve_quadratic_2d(&m, Constraint::Unconstrained).unwrap();
        assert!(unc.rho >= 0.0 && unc.tau >= 0.0);
        let scale = m.c.abs().max(m.a11.abs());
        assert!(
            m.objective(unc.rho, unc.tau) <= grid_min(&m, false) + 1e-6 * scale,
            "unconstrained case {case}"
        );
        let con = solve_quadratic_2d(&m, Constraint::Convex).unwrap();
        assert!((con.rho + con.tau - 1.0).abs() < 1e-12);
        assert!(
            m.objective(con.rho, con.tau) <= grid_min(&m, true) + 1e-6 * scale,
            "convex case {case}"
        );
    }
}

fn projected_gradient(m: &MultiMoments, budget: bool) -> DVector<f64> {
    let n = m.len();
    let lmax = nalgebra::SymmetricEigen::new(m.a.clone()).eigenvalues.max();
    let step = 0.5 / lmax;
    let mut x = DVector::zeros(n);
    for _ in 0..200_000 {
        let g = (&m.a * &x - &m.b) * 2.0;
        let mut y = &x - g * step;
        y.apply(|v| *v = v.max(0.0));
        if budget && y.sum() > 1.0 {
            y = project_simplex_budget(&y);
        }
        if (&y - &x).amax() < 1e-15 {
            x = y;
            break;
        }
        x = y;
    }
    x
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` (used when the budget binds).
fn project_simplex_budget(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

fn random_qp(n: usize, rng: &mut RngStream) -> MultiMoments {
    let g = DMatrix::from_fn(n, n + 1, |_, _| rng.normal());
    let a = &g * g.transpose() / (n + 1) as f64;
    let b = DVector::from_fn(n, |_, _| rng.normal());
    MultiMoments { a, b, c: 0.0 }
}

fn kkt_residual(m: &MultiMoments, x: &DVector<f64>) -> f64 {
    // Stationarity on the free set, sign condition on the active set.
    let g = m.residual(x);
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        if x[i] > 1e-12 {
            worst = worst.max(g[i].abs());
        } else {
            worst = worst.max((-g[i]).max(0.0));
        }
    }
    worst
}

#[test]
fn active_set_solutions_satisfy_kkt_and_match_projected_gradient() {
    let mut rng = RngStream::new(32, 0);
    for case in 0..60 {
        let n = 1 + case % 6;
        let m = random_qp(n, &mut rng);
        let x = solve_nonneg_qp(&m).unwrap();
        let scale = m.a.amax().max(m.b.amax());
        assert!(
            kkt_residual(&m, &x) <= 1e-8 * scale,
            "case {case}: {}",
            kkt_residual(&m, &x)
        );
        let pg = projected_gradient(&m, false);
        assert!(m.objective(&x) <= m.objective(&pg) + 1e-9 * scale);

        let xb = solve_budget_qp(&m).unwrap();
        assert!(xb.iter().all(|&v| v >= 0.0) && xb.sum() <= 1.0 + 1e-12);
        let pgb = projected_gradient(&m, true);
        assert!(
            m.objective(&xb) <= m.objective(&pgb) + 1e-9 * scale,
            "budget case {case}"
        );
    }
}

#[test]
fn multi_moments_reproduce_direct_costs() {
    let mut rng = RngStream::new(33, 0);
    for case in 0..10 {
        let n = 4 + case % 4;
        let t = 4 + case;
        let field = if case % 2 == 0 {
            Field::Real
        } else {
            Field::Complex
        };
        let samples = random_samples(n, t, field, &mut rng);
        let r = scm(&samples);
        let targets = vec![scaled_identity_target(&r), diagonal_target(&r).unwrap()];
        let family = ScmLoo::new(samples.clone()).unwrap();
        let loo = naive_loo_scms(samples.as_matrix());
        let dense: Vec<_> = targets.iter().map(|t| t.as_matrix().clone()).collect();

        let mm = mt_loocv_moments(&family, &targets).unwrap();
        let x = DVector::from_row_slice(&[0.6, 0.3, 0.25]);
        let direct = direct_cv_cost(&loo, samples.as_matrix(), &dense, x[0], &[x[1], x[2]]);
        assert!(rel_close(mm.objective(&x), direct, direct, 1e-10));

        let cm = mt_constrained_moments(&family, &targets).unwrap();
        let tau = DVector::from_row_slice(&[0.3, 0.25]);
        let direct = direct_cv_cost(&loo, samples.as_matrix(), &dense, 0.45, &[0.3, 0.25]);
        assert!(
            rel_close(cm.objective(&tau), direct, direct, 1e-10),
            "case {case}"
        );
    }
}

#[test]
fn single_target_reduction() {
    let mut rng = RngStream::new(34, 0);
    for case in 0..20 {
        let n = 3 + case % 5;
        let samples = random_samples(n, 4 + case, Field::Complex, &mut rng);
        let family = ScmLoo::new(samples.clone()).unwrap();
        let target = if case % 2 == 0 {
            scaled_identity_target(family_base(&family))
        } else {
            random_psd(n, 2, Field::Complex, &mut rng)
        };
        let sigma = random_psd(n, 2 * n, Field::Complex, &mut rng);
        let targets = vec![target.clone()];

        let (single, _) =
            select_single_target(SingleTargetMethod::LoocvUnconstrained, &family, &target).unwrap();
        let m = scm_fast_moments(&samples, &target).unwrap();
        let generic = solve_quadratic_2d(&m, Constraint::Unconstrained).unwrap();
        let (multi, _) =
            mt_select(MultiTargetMethod::LoocvUnconstrained, &family, &targets).unwrap();
        assert!(
            (generic.rho - multi.rho).abs() < 1e-10 && (generic.tau - multi.taus[0]).abs() < 1e-10
        );
        if case % 2 == 0 {
            assert!(
                (single.rho - multi.rho).abs() < 1e-10
                    && (single.tau - multi.taus[0]).abs() < 1e-10
            );
        }

        let (so, _) = select_single_target(
            SingleTargetMethod::OracleFro {
                sigma: &sigma,
                constraint: Constraint::Unconstrained,
            },
            &family,
            &target,
        )
        .unwrap();
        let (mo, _) = mt_select(
            MultiTargetMethod::Oracle { sigma: &sigma },
            &family,
            &targets,
        )
        .unwrap();
        assert!(
            (so.rho - mo.rho).abs() < 1e-10 && (so.tau - mo.taus[0]).abs() < 1e-10,
            "oracle case {case}"
        );

        if case % 2 == 0 {
            let (sc, _) =
                select_single_target(SingleTargetMethod::LoocvConstrained, &family, &target)
                    .unwrap();
            let (mc, _) =
                mt_select(MultiTargetMethod::LoocvConstrained, &family, &targets).unwrap();
            assert!(
                (sc.rho - mc.rho).abs() < 1e-10 && (sc.tau - mc.taus[0]).abs() < 1e-10,
                "constrained {case}"
            );
            let om = oracle_moments(family_base(&family), &target, &sigma).unwrap();
            let oc = solve_quadratic_2d(&om, Constraint::Convex).unwrap();
            let (mo, _) = mt_select(
                MultiTargetMethod::OracleConstrained { sigma: &sigma },
                &family,
                &targets,
            )
            .unwrap();
            assert!((oc.rho - mo.rho).abs() < 1e-10, "oracle constrained {case}");
        }
    }
}

fn family_base(f: &ScmLoo) -> &HermitianMatrix {
    use shrinkcov_core::LooFamily;
    f.base()
}

#[test]
fn oracle_multi_moments_reproduce_frobenius_error() {
    let mut rng = RngStream::new(35, 0);
    let samples = random_samples(5, 9, Field::Real, &mut rng);
    let r = scm(&samples);
    let sigma = random_psd(5, 8, Field::Real, &mut rng);
    let targets = vec![scaled_identity_target(&r), toeplitz_average_target(&r)];
    let m = mt_oracle_moments(&r, &targets, &sigma).unwrap();
    let x = DVector::from_row_slice(&[0.5, 0.2, 0.4]);
    let est = r.as_matrix() * c(0.5, 0.0)
        + targets[0].as_matrix() * c(0.2, 0.0)
        + targets[1].as_matrix() * c(0.4, 0.0);
    let err: f64 = (est - sigma.as_matrix()).iter().map(|z| z.norm_sqr()).sum();
    assert!(rel_close(m.objective(&x), err, err, 1e-12));
}

#[test]
fn equal_targets_give_minimum_norm_split() {
    let mut rng = RngStream::new(36, 0);
    let samples = random_samples(4, 10, Field::Real, &mut rng);
    let family = ScmLoo::new(samples).unwrap();
    let t = scaled_identity_target(family_base(&family));
    let targets = vec![t.clone(), t.clone(), t];
    let (sol, _) = mt_select(MultiTargetMethod::LoocvConstrained, &family, &targets).unwrap();
    assert!((sol.taus[0] - sol.taus[1]).abs() < 1e-12 && (sol.taus[1] - sol.taus[2]).abs() < 1e-12);
}
