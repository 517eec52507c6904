//! Physical parameters, boundary drive, and closed-form model quantities for
//! a damped chain of harmonically driven Josephson junctions.
//!
//! Site `n` of the chain (1 <= n <= N) obeys
//!
//! ```text
//! u_n'' - (c^2 + beta d/dt) (u_{n+1} - 2 u_n + u_{n-1}) + gamma_n u_n'
//!       + m2 u_n + sin(u_n) = J
//! ```
//!
//! with ghost sites 0 and N+1 carrying the boundary data: the left ghost is
//! driven through `c^2 (u_0 - u_1) + beta (u_0' - u_1') = phi(t)` and the
//! right ghost mirrors site N. The per-site damping `gamma_n` collects the
//! uniform external damping, the output tap `1/R` at site N, and an optional
//! absorbing sponge profile near the far end.

use thiserror::Error;

/// Validation and domain errors for model-level quantities.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("coupling coefficient c must be nonnegative, got {0}")]
    NegativeCoupling(f64),
    #[error("internal damping beta must be nonnegative, got {0}")]
    NegativeBeta(f64),
    #[error("external damping gamma must be nonnegative, got {0}")]
    NegativeGamma(f64),
    #[error("output resistance R must be positive (or infinite), got {0}")]
    NonPositiveResistance(f64),
    #[error("lattice needs at least one junction, got N = {0}")]
    EmptyLattice(usize),
    #[error("sponge-free count N0 must satisfy 1 <= N0 <= N, got N0 = {n0}, N = {n}")]
    SpongeCount { n0: usize, n: usize },
    #[error("parameter {name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("drive amplitude must be nonnegative, got {0}")]
    NegativeAmplitude(f64),
    #[error("drive frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("c and beta cannot both vanish while a drive is attached")]
    DegenerateDrivenBoundary,
    #[error("frequency {0} lies outside the band gap (0, {1}]")]
    FrequencyOutsideGap(f64, f64),
    #[error("no equilibrium bracket found for m2 = {m2}, J = {j}")]
    NoEquilibrium { m2: f64, j: f64 },
    #[error("invalid sweep grid: {0}")]
    BadSweepGrid(String),
    #[error("{0}")]
    BadSolverConfig(String),
}

/// Absorbing-layer profile applied near the far end of the lattice.
///
/// `Verbatim` evaluates `0.5 [1 + tanh((2n - N0 + N)/6)]`, which saturates at
/// 1 on every site once N is a few hundred. `Ramp` flips the sign of the
/// centering, `0.5 [1 + tanh((2n - N - N0)/6)]`, so the profile actually
/// rises from ~0 to ~1 across the last `N - N0` sites; this is the profile a
/// semi-infinite emulation wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpongeMode {
    Off,
    Verbatim,
    Ramp,
}

/// Physical constants of the junction array plus lattice geometry.
///
/// `r` is the output reading resistance; `f64::INFINITY` means the output tap
/// is open (1/R = 0), which is also the default regime of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Coupling coefficient c (>= 0).
    pub c: f64,
    /// Internal damping beta (>= 0), acting on the Laplacian's time derivative.
    pub beta: f64,
    /// External (on-site) damping gamma (>= 0).
    pub gamma: f64,
    /// Squared mass m2; may be negative (pure-imaginary mass).
    pub m2: f64,
    /// Generalized Josephson current J.
    pub j: f64,
    /// Output reading resistance; `f64::INFINITY` disables the output tap.
    pub r: f64,
    /// Number of junctions N (>= 1).
    pub n: usize,
    /// Sponge-free site count N0 (1 <= N0 <= N).
    pub n0: usize,
    /// Absorbing-layer selection.
    pub sponge: SpongeMode,
}

impl ModelParams {
    /// Undamped, massless, open-circuit chain with the sponge disabled.
    pub fn bare(c: f64, n: usize) -> Self {
        Self {
            c,
            beta: 0.0,
            gamma: 0.0,
            m2: 0.0,
            j: 0.0,
            r: f64::INFINITY,
            n,
            n0: n,
            sponge: SpongeMode::Off,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("c", self.c),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("m2", self.m2),
            ("J", self.j),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NotFinite { name, value });
            }
        }
        if self.c < 0.0 {
            return Err(ModelError::NegativeCoupling(self.c));
        }
        if self.beta < 0.0 {
            return Err(ModelError::NegativeBeta(self.beta));
        }
        if self.gamma < 0.0 {
            return Err(ModelError::NegativeGamma(self.gamma));
        }
        if self.r.is_nan() || self.r <= 0.0 {
            return Err(ModelError::NonPositiveResistance(self.r));
        }
        if self.n < 1 {
            return Err(ModelError::EmptyLattice(self.n));
        }
        if self.n0 < 1 || self.n0 > self.n {
            return Err(ModelError::SpongeCount {
                n0: self.n0,
                n: self.n,
            });
        }
        Ok(())
    }

    /// 1/R, with an open output tap contributing nothing.
    pub fn inv_r(&self) -> f64 {
        if self.r.is_infinite() {
            0.0
        } else {
            1.0 / self.r
        }
    }

    /// Effective damping at site `n` (1-based): gamma + 1/R at the last site
    /// + the sponge profile.
    pub fn gamma_at(&self, n: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.n);
        let tap = if n == self.n { self.inv_r() } else { 0.0 };
        self.gamma + tap + sponge_gamma(n, self.n, self.n0, self.sponge)
    }

    /// Per-site damping for sites 1..=N, index shifted down by one.
    pub fn damping_profile(&self) -> Vec<f64> {
        (1..=self.n).map(|n| self.gamma_at(n)).collect()
    }

    /// True when every site sees the same damping (sponge off, open output
    /// tap), which is the regime the discrete energy-rate identities assume.
    pub fn is_uniform_damping(&self) -> bool {
        self.sponge == SpongeMode::Off && self.inv_r() == 0.0
    }

    /// Upper edge sqrt(m2 + 1) of the forbidden band gap. NaN when m2 < -1
    /// (no gap).
    pub fn band_gap_edge(&self) -> f64 {
        (self.m2 + 1.0).sqrt()
    }
}

/// Harmonic boundary drive `phi(t) = A sin(Omega t)`, optionally ramped in
/// linearly over the first `ramp_steps` steps and cut to zero after step
/// `shutoff_step` (used by energy audits that watch the undriven aftermath).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub amplitude: f64,
    pub omega: f64,
    /// 0 disables the ramp; otherwise the envelope is min(k/ramp_steps, 1).
    pub ramp_steps: usize,
    /// When set, phi is forced to zero for step centers k > shutoff_step.
    pub shutoff_step: Option<usize>,
}

impl DriveSpec {
    pub fn new(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            ramp_steps: 0,
            shutoff_step: None,
        }
    }

    /// A drive that is identically zero.
    pub fn off() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(ModelError::NegativeAmplitude(self.amplitude));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(ModelError::NonPositiveFrequency(self.omega));
        }
        Ok(())
    }

    /// Drive value phi_k at step center k, i.e. at time t_k = k dt.
    pub fn phi(&self, k: usize, dt: f64) -> f64 {
        if let Some(m1) = self.shutoff_step {
            if k > m1 {
                return 0.0;
            }
        }
        let envelope = if self.ramp_steps == 0 {
            1.0
        } else {
            (k as f64 / self.ramp_steps as f64).min(1.0)
        };
        envelope * self.amplitude * (self.omega * k as f64 * dt).sin()
    }
}

/// Sine-Gordon on-site potential V(u) = 1 - cos(u), valued in [0, 2].
pub fn potential(u: f64) -> f64 {
    1.0 - u.cos()
}

// sin(x)/x with the removable singularity filled in; series for small |x|.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 * (1.0 - x * x / 20.0)
    } else {
        x.sin() / x
    }
}

// d/dx [sin(x)/x] = (x cos x - sin x)/x^2; the direct form loses all digits
// to cancellation near zero, so switch to the series below |x| = 1e-4.
fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 3.0 * (1.0 - x * x / 10.0)
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Stabilized difference quotient `[V(u+) - V(u-)] / (u+ - u-)` for the
/// sine-Gordon potential, evaluated through the exact closed form
/// `sin(s) sinc(d)` with `s = (u+ + u-)/2`, `d = (u+ - u-)/2`.
///
/// Coincides with the raw quotient whenever `u+ != u-` and with `sin(u)` in
/// the limit `u+ = u- = u`; no 0/0 case exists.
pub fn nonlinear_ratio(u_plus: f64, u_minus: f64) -> f64 {
    let s = 0.5 * (u_plus + u_minus);
    let d = 0.5 * (u_plus - u_minus);
    s.sin() * sinc(d)
}

/// Partial derivative of [`nonlinear_ratio`] with respect to `u_plus`:
/// `0.5 [cos(s) sinc(d) + sin(s) sinc'(d)]`. This is the nonlinear entry of
/// the Newton Jacobian.
pub fn nonlinear_ratio_dplus(u_plus: f64, u_minus: f64) -> f64 {
    let s = 0.5 * (u_plus + u_minus);
    let d = 0.5 * (u_plus - u_minus);
    0.5 * (s.cos() * sinc(d) + s.sin() * sinc_prime(d))
}

/// Linear dispersion relation of the undamped chain:
/// `omega^2(k) = m2 + 1 + 2 c^2 (1 - cos k)`, minimized at k = 0. Driving
/// below the k = 0 value sqrt(m2 + 1) falls in the forbidden band gap.
pub fn dispersion_omega2(k_wave: f64, params: &ModelParams) -> f64 {
    params.m2 + 1.0 + 2.0 * params.c * params.c * (1.0 - k_wave.cos())
}

/// Continuum-limit supratransmission threshold `A_s = 2 c (1 - Omega^2)` for
/// the massless chain. Meaningful only for in-gap frequencies; accepts the
/// half-open gap `(0, 1]` and returns 0 at the edge.
pub fn continuum_threshold(c: f64, omega: f64) -> Result<f64, ModelError> {
    if !omega.is_finite() || omega <= 0.0 || omega > 1.0 {
        return Err(ModelError::FrequencyOutsideGap(omega, 1.0));
    }
    Ok(2.0 * c * (1.0 - omega * omega))
}

/// Absorbing-layer damping at site `n` of an N-site chain with N0 sponge-free
/// sites. See [`SpongeMode`] for the two active profiles.
pub fn sponge_gamma(n: usize, n_sites: usize, n0: usize, mode: SpongeMode) -> f64 {
    let (n, n_sites, n0) = (n as f64, n_sites as f64, n0 as f64);
    match mode {
        SpongeMode::Off => 0.0,
        SpongeMode::Verbatim => 0.5 * (1.0 + ((2.0 * n - n0 + n_sites) / 6.0).tanh()),
        SpongeMode::Ramp => 0.5 * (1.0 + ((2.0 * n - n_sites - n0) / 6.0).tanh()),
    }
}

/// Spatially uniform steady state of the undriven chain: the root of
/// `m2 u + sin(u) = J`, located by bisection on a scanned bracket.
///
/// Fails with [`ModelError::NoEquilibrium`] when no sign change is found
/// (e.g. m2 = 0 with |J| > 1).
pub fn uniform_equilibrium(m2: f64, j: f64) -> Result<f64, ModelError> {
    let f = |u: f64| m2 * u + u.sin() - j;

    // Beyond (1 + |J|)/m2 the linear term dominates, so any root lies inside.
    let reach = if m2.abs() > 0.0 {
        ((1.0 + j.abs()) / m2.abs() + 1.0).max(std::f64::consts::PI)
    } else {
        std::f64::consts::FRAC_PI_2
    };

    let samples = 4096;
    let mut lo = -reach;
    let mut f_lo = f(lo);
    let mut bracket = None;
    for i in 1..=samples {
        let hi = -reach + 2.0 * reach * i as f64 / samples as f64;
        let f_hi = f(hi);
        if f_lo == 0.0 {
            bracket = Some((lo, lo));
            break;
        }
        if f_lo * f_hi <= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let (mut a, mut b) = bracket.ok_or(ModelError::NoEquilibrium { m2, j })?;

    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(a) * f(mid) <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let root = 0.5 * (a + b);
    if f(root).abs() < 1e-12 {
        Ok(root)
    } else {
        Err(ModelError::NoEquilibrium { m2, j })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params_with(c: f64, m2: f64) -> ModelParams {
        ModelParams {
            m2,
            ..ModelParams::bare(c, 10)
        }
    }

    #[test]
    fn potential_reference_values() {
        assert_eq!(potential(0.0), 0.0);
        assert!((potential(PI) - 2.0).abs() < 1e-15);
        assert!((potential(0.5) - 0.122_417_438_109_627_2).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_ratio_matches_raw_quotient() {
        // Oracle: the raw quotient (cos u- - cos u+)/(u+ - u-).
        let raw = (0.5f64.cos() - 1.0f64.cos()) / 0.5;
        assert!((nonlinear_ratio(1.0, 0.5) - raw).abs() < 1e-14);
        assert!((nonlinear_ratio(1.0, 0.5) - 0.674_560_512_044_466).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_ratio_equal_arguments_give_sin() {
        assert_eq!(nonlinear_ratio(0.0, 0.0), 0.0);
        for u in [-2.3, -0.4, 0.7, 1.9, 3.0] {
            assert!((nonlinear_ratio(u, u) - u.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn dplus_symmetric_limits() {
        assert!((nonlinear_ratio_dplus(0.0, 0.0) - 0.5).abs() < 1e-15);
        for u in [-1.2, 0.3, 2.5] {
            assert!((nonlinear_ratio_dplus(u, u) - 0.5 * u.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn dplus_matches_finite_difference() {
        let h = 1e-6;
        for (up, um) in [(1.0, 0.5), (-0.3, 0.9), (2.2, 2.2), (0.1, -1.7)] {
            let fd = (nonlinear_ratio(up + h, um) - nonlinear_ratio(up - h, um)) / (2.0 * h);
            assert!(
                (nonlinear_ratio_dplus(up, um) - fd).abs() < 1e-7,
                "dplus mismatch at ({up}, {um})"
            );
        }
    }

    #[test]
    fn dispersion_reference_values() {
        assert!((dispersion_omega2(0.0, &params_with(3.7, 0.0)) - 1.0).abs() < 1e-15);
        assert!((dispersion_omega2(PI, &params_with(5.0, 0.0)) - 101.0).abs() < 1e-12);
    }

    #[test]
    fn continuum_threshold_reference_values() {
        assert!((continuum_threshold(5.0, 0.8).unwrap() - 3.6).abs() < 1e-12);
        assert!((continuum_threshold(2.0, 0.5).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(continuum_threshold(4.0, 1.0).unwrap(), 0.0);
        assert!(continuum_threshold(5.0, 0.0).is_err());
        assert!(continuum_threshold(5.0, 1.2).is_err());
        assert!(continuum_threshold(5.0, -0.4).is_err());
    }

    #[test]
    fn sponge_profiles() {
        // Ramp is centered at n = (N + N0)/2.
        assert!((sponge_gamma(125, 200, 50, SpongeMode::Ramp) - 0.5).abs() < 1e-15);
        // The printed argument saturates: (2*200 - 50 + 200)/6 = 550/6.
        assert!(sponge_gamma(200, 200, 50, SpongeMode::Verbatim) > 1.0 - 1e-12);
        assert_eq!(sponge_gamma(17, 200, 50, SpongeMode::Off), 0.0);
    }

    #[test]
    fn sponge_verbatim_saturates_everywhere_at_large_n() {
        // At N = 200 the verbatim profile is ~1 already at site 1, which is
        // why Ramp exists.
        assert!(sponge_gamma(1, 200, 50, SpongeMode::Verbatim) > 1.0 - 1e-10);
    }

    #[test]
    fn equilibrium_reference_values() {
        assert!(uniform_equilibrium(1.0, 0.0).unwrap().abs() < 1e-12);
        let u = uniform_equilibrium(0.0, 0.5).unwrap();
        assert!((u - 0.523_598_775_598_298_8).abs() < 1e-10);
        let u = uniform_equilibrium(0.25, 0.25).unwrap();
        assert!((0.25 * u + u.sin() - 0.25).abs() < 1e-12);
        assert!(matches!(
            uniform_equilibrium(0.0, 1.5),
            Err(ModelError::NoEquilibrium { .. })
        ));
    }

    #[test]
    fn params_validation() {
        let mut p = ModelParams::bare(5.0, 100);
        assert!(p.validate().is_ok());
        p.c = -1.0;
        assert_eq!(p.validate(), Err(ModelError::NegativeCoupling(-1.0)));
        p.c = 5.0;
        p.n0 = 101;
        assert!(matches!(p.validate(), Err(ModelError::SpongeCount { .. })));
        p.n0 = 50;
        p.r = 0.0;
        assert!(matches!(
            p.validate(),
            Err(ModelError::NonPositiveResistance(_))
        ));
    }

    #[test]
    fn per_site_damping_assembles_all_contributions() {
        let p = ModelParams {
            gamma: 0.2,
            r: 4.0,
            sponge: SpongeMode::Ramp,
            n0: 5,
            ..ModelParams::bare(1.0, 10)
        };
        let expected_last = 0.2 + 0.25 + sponge_gamma(10, 10, 5, SpongeMode::Ramp);
        assert!((p.gamma_at(10) - expected_last).abs() < 1e-15);
        assert!((p.gamma_at(3) - (0.2 + sponge_gamma(3, 10, 5, SpongeMode::Ramp))).abs() < 1e-15);
        assert!(!p.is_uniform_damping());
        assert!(ModelParams::bare(1.0, 10).is_uniform_damping());
        assert_eq!(p.damping_profile().len(), 10);
    }

    #[test]
    fn drive_values() {
        let d = DriveSpec::new(2.0, 0.8);
        let dt = 0.05;
        for k in [1usize, 7, 100] {
            let t = k as f64 * dt;
            assert!((d.phi(k, dt) - 2.0 * (0.8 * t).sin()).abs() < 1e-15);
        }

        let ramped = DriveSpec {
            ramp_steps: 10,
            ..d.clone()
        };
        assert!((ramped.phi(5, dt) - 0.5 * d.phi(5, dt)).abs() < 1e-15);
        assert_eq!(ramped.phi(20, dt), d.phi(20, dt));

        let cut = DriveSpec {
            shutoff_step: Some(8),
            ..d.clone()
        };
        assert_eq!(cut.phi(8, dt), d.phi(8, dt));
        assert_eq!(cut.phi(9, dt), 0.0);

        assert!(DriveSpec::new(-1.0, 0.8).validate().is_err());
        assert!(DriveSpec::new(1.0, 0.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn ratio_is_symmetric(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            prop_assert!((nonlinear_ratio(a, b) - nonlinear_ratio(b, a)).abs() < 1e-14);
        }

        // The raw quotient is the oracle but it loses ~eps/|a-b| digits to
        // cancellation, so the tolerance carries that term.
        #[test]
        fn ratio_tracks_raw_quotient(a in -10.0f64..10.0, d in 1e-6f64..5.0) {
            let b = a - d;
            let raw = (potential(a) - potential(b)) / (a - b);
            let tol = 1e-12 + 8.0 * f64::EPSILON / d;
            prop_assert!((nonlinear_ratio(a, b) - raw).abs() < tol);
        }

        #[test]
        fn dispersion_bounded_below(k in -10.0f64..10.0, c in 0.0f64..10.0, m2 in -0.5f64..4.0) {
            let p = params_with(c, m2);
            prop_assert!(dispersion_omega2(k, &p) >= m2 + 1.0 - 1e-12);
        }

        #[test]
        fn sponge_ramp_monotone_and_bounded(n_sites in 4usize..300) {
            let n0 = 1 + n_sites / 4;
            let mut prev = -1.0;
            for n in 1..=n_sites {
                for mode in [SpongeMode::Ramp, SpongeMode::Verbatim] {
                    let g = sponge_gamma(n, n_sites, n0, mode);
                    prop_assert!((0.0..=1.0).contains(&g));
                }
                let g = sponge_gamma(n, n_sites, n0, SpongeMode::Ramp);
                prop_assert!(g >= prev);
                prev = g;
            }
        }

        #[test]
        fn threshold_linear_in_gap_depth(c in 0.1f64..10.0, omega in 0.05f64..1.0) {
            let a = continuum_threshold(c, omega).unwrap();
            prop_assert!((a - 2.0 * c * (1.0 - omega * omega)).abs() < 1e-12);
        }
    }
}
