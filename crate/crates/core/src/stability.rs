//! Von Neumann stability analysis of the linearized schemes.
//!
//! Linearizing (V' = 0, J = 0, uniform gamma) and inserting a plane-wave
//! mode turns either scheme into the two-level recurrence with amplification
//! matrix
//!
//! ```text
//! A(xi) = [ f(xi)/g(xi)  -h(xi)/g(xi) ]
//!         [ 1             0           ]
//! ```
//!
//! whose symbols are, with s = sin^2(xi/2),
//!
//! ```text
//! f = 2                      (S1)   or   2 - 2 c^2 dt^2 s   (S2)
//! g = 1 + (c^2 dt^2 + 2 beta dt) s + (m2 dt^2 + gamma dt)/2
//! h = 1 + (c^2 dt^2 - 2 beta dt) s + (m2 dt^2 - gamma dt)/2
//! ```
//!
//! The scan samples the spectral radius and the infinity norm of A over a
//! uniform xi-grid on [0, pi]; the stability predicates themselves are closed
//! form in (c, beta, gamma, dt), so the scan verifies rather than decides.
//! The predicates are meaningful for m2 >= 0.

use crate::integrator::Scheme;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("amplification denominator g(xi) vanished")]
    ZeroDenominator,
    #[error("xi-grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
}

/// Scalar inputs of the symbol triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityParams {
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m2: f64,
    pub dt: f64,
}

impl StabilityParams {
    pub fn from_model(params: &crate::model::ModelParams, dt: f64) -> Self {
        Self {
            c: params.c,
            beta: params.beta,
            gamma: params.gamma,
            m2: params.m2,
            dt,
        }
    }
}

/// Symbol triple (f, g, h) of the amplification matrix at wavenumber `xi`.
pub fn symbols(scheme: Scheme, p: &StabilityParams, xi: f64) -> (f64, f64, f64) {
    let s = (0.5 * xi).sin().powi(2);
    let c2dt2 = p.c * p.c * p.dt * p.dt;
    let f = match scheme {
        Scheme::S1 => 2.0,
        Scheme::S2 => 2.0 - 2.0 * c2dt2 * s,
    };
    let g = 1.0 + (c2dt2 + 2.0 * p.beta * p.dt) * s + 0.5 * (p.m2 * p.dt * p.dt + p.gamma * p.dt);
    let h = 1.0 + (c2dt2 - 2.0 * p.beta * p.dt) * s + 0.5 * (p.m2 * p.dt * p.dt - p.gamma * p.dt);
    (f, g, h)
}

/// Eigenvalues `(f +- sqrt(f^2 - 4 g h)) / (2 g)` of the amplification
/// matrix. In the complex branch both carry modulus sqrt(h/g).
pub fn eigenvalues(
    f_hat: f64,
    g_hat: f64,
    h_hat: f64,
) -> Result<(Complex64, Complex64), StabilityError> {
    if g_hat == 0.0 {
        return Err(StabilityError::ZeroDenominator);
    }
    let disc = f_hat * f_hat - 4.0 * g_hat * h_hat;
    let two_g = 2.0 * g_hat;
    if disc >= 0.0 {
        let root = disc.sqrt();
        Ok((
            Complex64::new((f_hat + root) / two_g, 0.0),
            Complex64::new((f_hat - root) / two_g, 0.0),
        ))
    } else {
        let root = (-disc).sqrt();
        Ok((
            Complex64::new(f_hat / two_g, root / two_g),
            Complex64::new(f_hat / two_g, -root / two_g),
        ))
    }
}

/// Spectral radius of A(xi) from its symbols.
pub fn spectral_radius(f_hat: f64, g_hat: f64, h_hat: f64) -> Result<f64, StabilityError> {
    let (a, b) = eigenvalues(f_hat, g_hat, h_hat)?;
    Ok(a.norm().max(b.norm()))
}

/// Infinity norm of A(xi): max of the first-row sum and the unit second row.
pub fn inf_norm(f_hat: f64, g_hat: f64, h_hat: f64) -> f64 {
    ((f_hat.abs() + h_hat.abs()) / g_hat.abs()).max(1.0)
}

/// Grid scan of the amplification matrix plus the closed-form predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub scheme: Scheme,
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub inf_norm: Vec<f64>,
    pub max_rho: f64,
    pub max_inf_norm: f64,
    /// Necessary condition dt <= 1/c for S2.
    pub necessary_ok: bool,
    /// Sufficient infinity-norm window 2/gamma < dt < sqrt(2)/c for S2;
    /// `None` when gamma = 0 makes the condition inapplicable.
    pub sufficient_ok: Option<bool>,
    /// Two-sided condition 2/gamma <= dt <= 1/c for S1; `None` when
    /// gamma = 0.
    pub corollary_ok: Option<bool>,
}

/// Scan `grid_points` evenly spaced wavenumbers on [0, pi], endpoints
/// included.
pub fn scan(
    scheme: Scheme,
    p: &StabilityParams,
    grid_points: usize,
) -> Result<StabilityReport, StabilityError> {
    if grid_points < 2 {
        return Err(StabilityError::GridTooSmall(grid_points));
    }
    let last = grid_points - 1;
    let mut xi = Vec::with_capacity(grid_points);
    let mut rho = Vec::with_capacity(grid_points);
    let mut norms = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let x = if i == last {
            std::f64::consts::PI
        } else {
            std::f64::consts::PI * i as f64 / last as f64
        };
        let (f, g, h) = symbols(scheme, p, x);
        rho.push(spectral_radius(f, g, h)?);
        norms.push(inf_norm(f, g, h));
        xi.push(x);
    }
    let max_rho = rho.iter().copied().fold(0.0f64, f64::max);
    let max_inf_norm = norms.iter().copied().fold(0.0f64, f64::max);

    let dt_le_inv_c = p.c == 0.0 || p.dt <= 1.0 / p.c;
    let necessary_ok = dt_le_inv_c;
    let sufficient_ok = (p.gamma > 0.0).then(|| {
        let upper = p.c == 0.0 || p.dt < std::f64::consts::SQRT_2 / p.c;
        2.0 / p.gamma < p.dt && upper
    });
    let corollary_ok = (p.gamma > 0.0).then(|| 2.0 / p.gamma <= p.dt && dt_le_inv_c);

    Ok(StabilityReport {
        scheme,
        xi,
        rho,
        inf_norm: norms,
        max_rho,
        max_inf_norm,
        necessary_ok,
        sufficient_ok,
        corollary_ok,
    })
}
