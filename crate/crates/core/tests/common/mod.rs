//! Shared oracles for the integration and acceptance suites. Everything in
//! here is deliberately independent of the library's own algorithms: plain
//! quadrature, brute-force pair counting, and derivative-free maximization.

#![allow(dead_code)]

use ekde_screen::features::{FeatureTable, FeatureVector};

/// Trapezoidal integral of pre-evaluated values on an equally spaced grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2.0;
    }
    acc
}

/// AUC by brute force: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half. Quadratic and obviously right.
pub fn pairwise_auc(y_true: &[u8], scores: &[f64]) -> f64 {
    let mut correct_twice = 0u64; // 2·wins + ties, an integer
    let mut pairs = 0u64;
    for (i, &yi) in y_true.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y_true.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                correct_twice += 2;
            } else if scores[i] == scores[j] {
                correct_twice += 1;
            }
        }
    }
    correct_twice as f64 / (2 * pairs) as f64
}

/// Golden-section search for the maximum of a unimodal slice.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}

/// Derivative-free maximizer: cyclic golden-section line searches over each
/// coordinate until a full cycle moves nothing. For a smooth strictly
/// concave objective this converges to the global maximum. The search runs
/// in a caller-supplied scaled space to keep coordinates decoupled.
pub fn coordinate_ascent_max(
    f: impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    bracket: f64,
    cycles: usize,
) -> [f64; 3] {
    let mut point = start;
    for _ in 0..cycles {
        let mut moved = 0.0f64;
        for dim in 0..3 {
            let slice = |v: f64| {
                let mut p = point;
                p[dim] = v;
                f(&p)
            };
            let best = golden_section_max(
                slice,
                point[dim] - bracket,
                point[dim] + bracket,
                1e-11,
            );
            moved = moved.max((best - point[dim]).abs());
            point[dim] = best;
        }
        if moved < 1e-10 {
            break;
        }
    }
    point
}

/// Central-difference gradient of a scalar function of three parameters.
pub fn fd_gradient(f: impl Fn(&[f64; 3]) -> f64, at: [f64; 3]) -> [f64; 3] {
    let mut grad = [0.0; 3];
    for (dim, slot) in grad.iter_mut().enumerate() {
        let step = 1e-5 * (1.0 + at[dim].abs());
        let mut hi = at;
        let mut lo = at;
        hi[dim] += step;
        lo[dim] -= step;
        *slot = (f(&hi) - f(&lo)) / (2.0 * step);
    }
    grad
}

/// Central-difference Hessian of a scalar function of three parameters.
pub fn fd_hessian(f: impl Fn(&[f64; 3]) -> f64 + Copy, at: [f64; 3]) -> [[f64; 3]; 3] {
    let mut hess = [[0.0; 3]; 3];
    let step = |d: usize| 1e-4 * (1.0 + at[d].abs());
    for i in 0..3 {
        for j in 0..3 {
            let (hi, hj) = (step(i), step(j));
            let mut pp = at;
            let mut pm = at;
            let mut mp = at;
            let mut mm = at;
            pp[i] += hi;
            pp[j] += hj;
            pm[i] += hi;
            pm[j] -= hj;
            mp[i] -= hi;
            mp[j] += hj;
            mm[i] -= hi;
            mm[j] -= hj;
            hess[i][j] = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * hi * hj);
        }
    }
    hess
}

/// Invert a symmetric 3×3 matrix via cofactors; `None` when singular.
pub fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let c = |a: f64, b: f64, cc: f64, d: f64| (a * d - b * cc) / det;
    Some([
        [
            c(m[1][1], m[1][2], m[2][1], m[2][2]),
            c(m[0][2], m[0][1], m[2][2], m[2][1]),
            c(m[0][1], m[0][2], m[1][1], m[1][2]),
        ],
        [
            c(m[1][2], m[1][0], m[2][2], m[2][0]),
            c(m[0][0], m[0][2], m[2][0], m[2][2]),
            c(m[0][2], m[0][0], m[1][2], m[1][0]),
        ],
        [
            c(m[1][0], m[1][1], m[2][0], m[2][1]),
            c(m[0][1], m[0][0], m[2][1], m[2][0]),
            c(m[0][0], m[0][1], m[1][0], m[1][1]),
        ],
    ])
}

/// Build a labeled feature table from raw (label, mu, sigma) triples.
pub fn table_from(rows: &[(u8, f64, f64)]) -> FeatureTable {
    FeatureTable::new(
        rows.iter()
            .enumerate()
            .map(|(case_id, &(label, mu, sigma))| FeatureVector {
                case_id,
                path: String::new(),
                label: Some(label),
                mu,
                sigma,
                h: 0.02,
            })
            .collect(),
    )
}
