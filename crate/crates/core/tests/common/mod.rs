//! Independent oracles for the acceptance tests.
//!
//! Everything here is written directly from the governing formulas as plain
//! arithmetic, deliberately sharing no code with the library paths it checks.

#![allow(dead_code)]

use sg_lattice::{ModelParams, Scheme};

/// Dense Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Tridiagonal bands expanded to a dense matrix.
pub fn bands_to_dense(sub: &[f64], diag: &[f64], sup: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = sup[i];
            a[i + 1][i] = sub[i];
        }
    }
    a
}

/// Term-by-term transcription of the scheme residual at one site, using the
/// raw difference quotient for the nonlinear term.
pub fn residual_termwise(
    scheme: Scheme,
    params: &ModelParams,
    dt: f64,
    um1: &[f64],
    u0: &[f64],
    up1: &[f64],
    site: usize,
) -> f64 {
    let lap = |u: &[f64]| u[site + 1] - 2.0 * u[site] + u[site - 1];
    let c2 = params.c * params.c;

    let d2t = (up1[site] - 2.0 * u0[site] + um1[site]) / (dt * dt);
    let coupling = match scheme {
        Scheme::S1 => c2 / 2.0 * (lap(up1) + lap(um1)),
        Scheme::S2 => c2 / 4.0 * (lap(up1) + 2.0 * lap(u0) + lap(um1)),
    };
    let internal = params.beta / (2.0 * dt) * (lap(up1) - lap(um1));
    let gamma_n = params.gamma
        + if site == params.n { params.inv_r() } else { 0.0 }
        + sg_lattice::sponge_gamma(site, params.n, params.n0, params.sponge);
    let external = gamma_n / (2.0 * dt) * (up1[site] - um1[site]);
    let mass = params.m2 / 2.0 * (up1[site] + um1[site]);
    let dv = up1[site] - um1[site];
    let nonlinear = if dv.abs() > 1e-9 {
        ((1.0 - up1[site].cos()) - (1.0 - um1[site].cos())) / dv
    } else {
        (0.5 * (up1[site] + um1[site])).sin()
    };
    d2t - coupling - internal + external + mass + nonlinear - params.j
}

/// Adaptive Runge-Kutta-Fehlberg 4(5) for `y' = f(t, y)`.
pub fn rkf45<F>(f: F, t0: f64, y0: Vec<f64>, t_end: f64, tol: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    const A: [[f64; 5]; 5] = [
        [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
        [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
        [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
        [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ];
    const B5: [f64; 6] = [
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ];
    const B4: [f64; 6] = [
        25.0 / 216.0,
        0.0,
        1408.0 / 2565.0,
        2197.0 / 4104.0,
        -1.0 / 5.0,
        0.0,
    ];

    let dim = y0.len();
    let mut t = t0;
    let mut y = y0;
    let mut h = (t_end - t0).min(1e-3);
    while t < t_end {
        h = h.min(t_end - t);
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(6);
        k.push(f(t, &y));
        for weights in &A {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                for d in 0..dim {
                    ys[d] += h * weights[j] * kj[d];
                }
            }
            k.push(f(t + h, &ys));
        }
        let mut err = 0.0f64;
        let mut y5 = y.clone();
        for d in 0..dim {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for j in 0..6 {
                d5 += B5[j] * k[j][d];
                d4 += B4[j] * k[j][d];
            }
            y5[d] += h * d5;
            err = err.max((h * (d5 - d4)).abs());
        }
        if err <= tol || h < 1e-12 {
            t += h;
            y = y5;
        }
        let scale = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            2.0
        };
        h *= scale.clamp(0.2, 2.0);
    }
    y
}

/// Single damped pendulum-like junction: u'' = -gamma u' - m2 u - sin u.
pub fn single_junction_rhs(gamma: f64, m2: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_t, y| vec![y[1], -gamma * y[1] - m2 * y[0] - y[0].sin()]
}
