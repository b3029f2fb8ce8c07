//! The joint problem `{(1+,2-,3+), (1+,4-,5+)}` at `sigma = 2` with
//! `beta = 0` and all centres at `k`, where a two-step count of order
//! `L^3 T^{-1}` is attained.
//!
//! With `X = L(k - k_1)`, `Y = L(k - k_3)`, `Z = L(k - k_5)` the two
//! resonance factors are `-2XY/L^2` and `-2XZ/L^2`, so every triple with
//! `0 < X <= L/(2T)` and `0 < Y, Z < L/2` is a solution.

use serde::Serialize;

use super::oracle::{count_solutions, CountingProblem, CountingTuple, SizeRule};
use crate::combinatorics::Sign;
use crate::error::{Error, Result};

/// `#{0 < X <= L/(2T)} * #{0 < Y < L/2}^2`.
pub fn five_vector_box_count(l: i64, t: f64) -> u64 {
    let x = (l as f64 / (2.0 * t)).floor().max(0.0) as u64;
    let y = ((l + 1) / 2 - 1).max(0) as u64;
    x * y * y
}

/// The problem itself, centred at `k` (numerator over `L`).
pub fn five_vector_problem(l: i64, t: f64, k: i64) -> CountingProblem {
    let a = k as f64 / l as f64;
    let t1 = CountingTuple { terms: vec![(1, Sign::Plus), (2, Sign::Minus), (3, Sign::Plus)], k, beta: 0.0 };
    let t2 = CountingTuple { terms: vec![(1, Sign::Plus), (4, Sign::Minus), (5, Sign::Plus)], k, beta: 0.0 };
    CountingProblem {
        l,
        t,
        sigma: 2.0,
        d: a.abs() + 1.0,
        centers: (1..=5).map(|j| (j, a)).collect(),
        tuples: vec![t1, t2],
        size_rule: SizeRule::AtMostTwoLarge,
    }
}

/// The box triples as numerators `(k_1, ..., k_5)`, for checking them
/// against the problem directly.
pub fn five_vector_box_points(l: i64, t: f64, k: i64) -> Vec<[i64; 5]> {
    let xmax = (l as f64 / (2.0 * t)).floor() as i64;
    let ymax = (l + 1) / 2 - 1;
    let mut out = Vec::new();
    for x in 1..=xmax {
        for y in 1..=ymax {
            for z in 1..=ymax {
                let (k1, k3, k5) = (k - x, k - y, k - z);
                out.push([k1, k1 + k3 - k, k3, k1 + k5 - k, k5]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FivePoint {
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "T")]
    pub t: f64,
    pub oracle: u64,
    pub box_count: u64,
    /// `oracle / (L^3 T^{-3/2})`.
    pub over_target: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FiveVectorReport {
    pub points: Vec<FivePoint>,
    pub oracle_dominates_box: bool,
    /// Least-squares `log C = c + a log L + b log T`.
    pub l_exponent: f64,
    pub t_exponent: f64,
    /// Same fit for the box count.
    pub box_l_exponent: f64,
    pub box_t_exponent: f64,
    /// `oracle / (L^3 T^{-3/2})` along `T = L/16`, in increasing `L`.
    pub ratio_along_diagonal: Vec<f64>,
    pub ratio_increases: bool,
    pub seconds: f64,
}

/// Count at one `(L, T)`; `T < L` is required.
pub fn five_vector_lower_bound(l: i64, t: f64) -> Result<FivePoint> {
    if !(t > 0.0 && t < l as f64) {
        return Err(Error::Domain(format!("need 0 < T < L, got T = {t}, L = {l}")));
    }
    let oracle = count_solutions(&five_vector_problem(l, t, 0))?;
    let box_count = five_vector_box_count(l, t);
    let lf = l as f64;
    Ok(FivePoint { l, t, oracle, box_count, over_target: oracle as f64 / (lf.powi(3) * t.powf(-1.5)) })
}

/// Fit `log y = c + a log L + b log T`.
pub fn fit_exponents(points: &[(f64, f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Usage("need at least three points to fit".into()));
    }
    // normal equations for [1, log L, log T]
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(l, t, y) in points {
        let row = [1.0, l.ln(), t.ln()];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * y.ln();
        }
    }
    let x = solve3(a, b).ok_or_else(|| Error::Numeric { message: "degenerate (L, T) design".into(), residual: 0.0 })?;
    Ok((x[0], x[1], x[2]))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..3 {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Sweep `L` over `ls` and `T` over `L / d` for `d` in `divisors`, fit the
/// exponents and track the ratio to `L^3 T^{-3/2}` along `T = L/16`.
pub fn five_vector_sweep(ls: &[i64], divisors: &[i64]) -> Result<FiveVectorReport> {
    let t0 = std::time::Instant::now();
    let mut points = Vec::new();
    for &l in ls {
        for &dv in divisors {
            points.push(five_vector_lower_bound(l, (l / dv) as f64)?);
        }
    }
    let fit = |f: &dyn Fn(&FivePoint) -> u64| {
        let data: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.l as f64, p.t, f(p) as f64)).collect();
        fit_exponents(&data)
    };
    let (_, la, ta) = fit(&|p| p.oracle)?;
    let (_, bl, bt) = fit(&|p| p.box_count)?;
    let diag: Vec<f64> = ls
        .iter()
        .filter_map(|&l| points.iter().find(|p| p.l == l && p.t == (l / 16) as f64).map(|p| p.over_target))
        .collect();
    Ok(FiveVectorReport {
        oracle_dominates_box: points.iter().all(|p| p.oracle >= p.box_count),
        l_exponent: la,
        t_exponent: ta,
        box_l_exponent: bl,
        box_t_exponent: bt,
        ratio_increases: diag.len() >= 2 && diag.windows(2).all(|w| w[1] > w[0]),
        ratio_along_diagonal: diag,
        points,
        seconds: t0.elapsed().as_secs_f64(),
    })
}
