#![no_main]

use libfuzzer_sys::fuzz_target;
use nalgebra::{DMatrix, DVector};
use shrinkcov_core::shrinkage::multi::{solve_budget_qp, solve_nonneg_qp, MultiMoments};
use shrinkcov_core::shrinkage::single::{solve_quadratic_2d, Constraint, CvMoments};

/// Maps a byte to a value in [-4, 4].
fn value(b: u8) -> f64 {
    (b as f64 - 127.5) / 32.0
}

fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else {
        return;
    };
    let k = 1 + (head as usize % 6);
    let need = (k + 1) * k + k;
    if rest.len() < need {
        return;
    }
    let g = DMatrix::from_fn(k + 1, k, |i, j| value(rest[i * k + j]));
    let a = g.transpose() * g;
    let b = DVector::from_fn(k, |i, _| value(rest[(k + 1) * k + i]));
    let scale = 1.0 + a.amax() + b.amax();
    let m = MultiMoments { a, b, c: 0.0 };

    if let Ok(x) = solve_nonneg_qp(&m) {
        let res = m.residual(&x);
        for i in 0..k {
            assert!(x[i] >= 0.0);
            if x[i] > 0.0 {
                assert!(res[i].abs() <= 1e-7 * scale, "stationarity {i}: {}", res[i]);
            } else {
                assert!(res[i] >= -1e-7 * scale, "sign {i}: {}", res[i]);
            }
        }
        let zero = DVector::zeros(k);
        assert!(m.objective(&x) <= m.objective(&zero) + 1e-9 * scale);
    }
    if let Ok(x) = solve_budget_qp(&m) {
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!(x.sum() <= 1.0 + 1e-9);
    }

    if k >= 2 {
        let two = CvMoments {
            a11: m.a[(0, 0)],
            a12: m.a[(0, 1)],
            a22: m.a[(1, 1)],
            b1: m.b[0],
            b2: m.b[1],
            c: 0.0,
        };
        for constraint in [Constraint::Unconstrained, Constraint::Convex] {
            if let Ok(sol) = solve_quadratic_2d(&two, constraint) {
                assert!(sol.rho >= 0.0 && sol.tau >= 0.0);
                assert!(sol.rho.is_finite() && sol.tau.is_finite());
                if matches!(constraint, Constraint::Convex) {
                    assert!((sol.rho + sol.tau - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
});
