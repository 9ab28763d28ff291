//! Dephasing factor `γ(τ)` and bath-mediated phase `δ(τ)` for a bosonic
//! bath with spectral density `J(ω)`.
//!
//! The mode sums are taken in the continuum limit, with `J(ω)` carrying the
//! density of `|g_k|²`:
//!
//! ```text
//! γ(τ) = ∫₀^∞ dω J(ω)/ω² (1 − cos ωτ) coth(βω/2)
//! δ(τ) = ∫₀^∞ dω J(ω)/ω² (sin ωτ − ωτ)
//! ```
//!
//! Only the Ohmic density `J(ω) = G ω e^{−ω/ω_c}` ships. For it `δ` and the
//! zero-temperature `γ` have closed forms; the finite-temperature `γ` is
//! integrated numerically.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::quadrature::{self, Tolerance};

/// A bath spectral density `J(ω)`.
pub trait SpectralDensity: Sync {
    fn density(&self, omega: f64) -> f64;

    /// `J(ω)/ω`, which must stay finite as `ω → 0`.
    fn density_over_omega(&self, omega: f64) -> f64 {
        self.density(omega) / omega
    }

    /// Frequency scale beyond which the density is negligible.
    fn cutoff(&self) -> f64;
}

/// `J(ω) = G ω exp(−ω/ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ohmic {
    pub coupling: f64,
    pub cutoff: f64,
}

impl SpectralDensity for Ohmic {
    fn density(&self, omega: f64) -> f64 {
        self.coupling * omega * (-omega / self.cutoff).exp()
    }

    fn density_over_omega(&self, omega: f64) -> f64 {
        self.coupling * (-omega / self.cutoff).exp()
    }

    fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Ohmic bath in thermal equilibrium at inverse temperature `beta`.
///
/// `beta = +∞` is the zero-temperature bath (`coth ≡ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhmicBath {
    coupling: f64,
    cutoff: f64,
    beta: f64,
}

impl OhmicBath {
    pub fn new(coupling: f64, cutoff: f64, beta: f64) -> Result<Self> {
        check_positive("G", coupling)?;
        check_positive("omega_c", cutoff)?;
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", format!("{beta} must be > 0")));
        }
        Ok(OhmicBath {
            coupling,
            cutoff,
            beta,
        })
    }

    pub fn zero_temperature(coupling: f64, cutoff: f64) -> Result<Self> {
        Self::new(coupling, cutoff, f64::INFINITY)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectral_density(&self) -> Ohmic {
        Ohmic {
            coupling: self.coupling,
            cutoff: self.cutoff,
        }
    }

    /// Same bath with the coupling replaced.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(coupling, self.cutoff, self.beta)
    }
}

/// Controls for the numerical `γ` integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub tolerance: Tolerance,
    /// The integral is cut at `ω_max = truncation · max(ω_c, 1/τ)`.
    pub truncation: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            tolerance: Tolerance::default(),
            truncation: 40.0,
        }
    }
}

/// `γ(τ)` and `δ(τ)` at one measurement interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingFactors {
    pub tau: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl DephasingFactors {
    pub fn evaluate(bath: &OhmicBath, tau: f64) -> Result<Self> {
        Ok(DephasingFactors {
            tau,
            gamma: gamma(bath, tau)?,
            delta: delta(bath, tau)?,
        })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(
            "tau",
            format!("{tau} must be finite and >= 0"),
        ));
    }
    Ok(())
}

/// `(1 − cos ωτ)/ω²`, written as `2 sin²(ωτ/2)/ω²` and expanded near zero.
fn one_minus_cos_over_sq(omega: f64, tau: f64) -> f64 {
    let h = 0.5 * omega * tau;
    if h.abs() < 1e-4 {
        0.5 * tau * tau * (1.0 - h * h / 3.0)
    } else {
        let s = h.sin();
        2.0 * s * s / (omega * omega)
    }
}

/// `ω coth(βω/2)`; the coth pole at `ω = 0` cancels against the factor `ω`.
fn omega_coth(omega: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        return omega;
    }
    let x = 0.5 * beta * omega;
    let x_coth_x = if x < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    };
    2.0 / beta * x_coth_x
}

/// `(sin x − x)/x`, by its Taylor series for small `x`.
fn sin_minus_id_over_id(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() / x - 1.0
    }
}

/// Largest number of oscillation panels one integral may use.
pub const MAX_PANELS: usize = 1 << 20;

fn panel_breakpoints(cutoff: f64, tau: f64, truncation: f64) -> Result<Vec<f64>> {
    let omega_max = truncation * cutoff.max(1.0 / tau);
    let width = std::f64::consts::PI / tau;
    let panels = (omega_max / width).ceil().max(1.0);
    if !(panels <= MAX_PANELS as f64) {
        return Err(Error::Range {
            what: "bath integral",
            reason: format!(
                "omega_c * tau = {} needs {panels:.3e} oscillation panels (limit {MAX_PANELS})",
                cutoff * tau
            ),
        });
    }
    let mut pts: Vec<f64> = (0..panels as usize).map(|k| k as f64 * width).collect();
    pts.push(omega_max);
    Ok(pts)
}

/// `γ(τ)` for a general spectral density by panelled adaptive quadrature.
pub fn gamma_for_density<S: SpectralDensity>(
    density: &S,
    beta: f64,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let integrand = |w: f64| {
        density.density_over_omega(w) * one_minus_cos_over_sq(w, tau) * omega_coth(w, beta)
    };
    let pts = panel_breakpoints(density.cutoff(), tau, settings.truncation)?;
    let r = quadrature::integrate(integrand, &pts, settings.tolerance)?;
    Ok(r.value.max(0.0))
}

/// `δ(τ)` for a general spectral density by panelled adaptive quadrature.
pub fn delta_for_density<S: SpectralDensity>(
    density: &S,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_tau(tau)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let integrand = |w: f64| density.density_over_omega(w) * tau * sin_minus_id_over_id(w * tau);
    let pts = panel_breakpoints(density.cutoff(), tau, settings.truncation)?;
    let r = quadrature::integrate(integrand, &pts, settings.tolerance)?;
    Ok(r.value.min(0.0))
}

/// Dephasing factor of the Ohmic bath.
pub fn gamma(bath: &OhmicBath, tau: f64) -> Result<f64> {
    gamma_with(bath, tau, &QuadratureSettings::default())
}

pub fn gamma_with(bath: &OhmicBath, tau: f64, settings: &QuadratureSettings) -> Result<f64> {
    if bath.beta.is_infinite() {
        return gamma_zero_temperature(bath, tau);
    }
    gamma_for_density(&bath.spectral_density(), bath.beta, tau, settings)
}

/// `(G/2) ln(1 + ω_c² τ²)`, the `β → ∞` limit of [`gamma`].
pub fn gamma_zero_temperature(bath: &OhmicBath, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let y = bath.cutoff * tau;
    Ok(0.5 * bath.coupling * (y * y).ln_1p())
}

/// Bath-mediated phase of the Ohmic bath, `G [arctan(ω_c τ) − ω_c τ]`.
pub fn delta(bath: &OhmicBath, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let y = bath.cutoff * tau;
    let atan_minus_id = if y < 1e-3 {
        let y2 = y * y;
        -y * y2 / 3.0 * (1.0 - 3.0 * y2 / 5.0 * (1.0 - 5.0 * y2 / 7.0))
    } else {
        y.atan() - y
    };
    Ok(bath.coupling * atan_minus_id)
}

/// [`delta`] by quadrature instead of the closed form.
pub fn delta_by_quadrature(bath: &OhmicBath, tau: f64) -> Result<f64> {
    delta_for_density(
        &bath.spectral_density(),
        tau,
        &QuadratureSettings::default(),
    )
}

/// [`gamma`] by quadrature even when `β = ∞`.
pub fn gamma_by_quadrature(bath: &OhmicBath, tau: f64) -> Result<f64> {
    gamma_for_density(
        &bath.spectral_density(),
        bath.beta,
        tau,
        &QuadratureSettings::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::hp;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_interval_gives_zero() {
        let bath = OhmicBath::new(0.1, 10.0, 10.0).unwrap();
        assert_eq!(gamma(&bath, 0.0).unwrap(), 0.0);
        assert_eq!(delta(&bath, 0.0).unwrap(), 0.0);
        assert_eq!(gamma_zero_temperature(&bath, 0.0).unwrap(), 0.0);
        assert!(gamma(&bath, -1.0).is_err());
        assert!(delta(&bath, -1.0).is_err());
    }

    #[test]
    fn bath_validation() {
        assert!(OhmicBath::new(0.0, 10.0, 10.0).is_err());
        assert!(OhmicBath::new(0.1, -1.0, 10.0).is_err());
        assert!(OhmicBath::new(0.1, 10.0, 0.0).is_err());
        assert!(OhmicBath::new(0.1, 10.0, f64::NAN).is_err());
        assert!(OhmicBath::zero_temperature(0.1, 10.0).is_ok());
    }

    #[test]
    fn zero_temperature_quadrature_matches_closed_form() {
        let bath = OhmicBath::zero_temperature(0.1, 10.0).unwrap();
        let expected = 0.05 * hp::ln_1p(100.0);
        assert!((expected - 0.230_756_025_8).abs() < 1e-9);
        let q = gamma_by_quadrature(&bath, 1.0).unwrap();
        assert!(rel(q, expected) < 1e-9, "{q} vs {expected}");
    }

    #[test]
    fn zero_temperature_closed_form_example() {
        let bath = OhmicBath::zero_temperature(0.5, 10.0).unwrap();
        let expected = 0.25 * hp::ln(2.0);
        assert!((gamma_zero_temperature(&bath, 0.1).unwrap() - expected).abs() < 1e-16);
    }

    #[test]
    fn finite_temperature_matches_trapezoid_oracle() {
        // Brute-force trapezoid on [0, 50 ω_c] with 10^6 panels, using the
        // literal integrand and its ω → 0 limit G τ²/β at the origin.
        let (g, wc, beta, tau) = (0.1, 10.0, 10.0, 1.0);
        let upper = 50.0 * wc;
        let n = 1_000_000;
        let h = upper / n as f64;
        let f = |w: f64| {
            if w == 0.0 {
                g * tau * tau / beta
            } else {
                g * w * (-w / wc).exp() / (w * w) * (1.0 - (w * tau).cos())
                    / (beta * w / 2.0).tanh()
            }
        };
        let mut trap = 0.5 * (f(0.0) + f(upper));
        for k in 1..n {
            trap += f(k as f64 * h);
        }
        trap *= h;
        let bath = OhmicBath::new(g, wc, beta).unwrap();
        let q = gamma(&bath, tau).unwrap();
        assert!(rel(q, trap) < 1e-7, "{q} vs {trap}");
    }

    #[test]
    fn delta_closed_form_matches_quadrature() {
        let bath = OhmicBath::new(0.1, 10.0, 10.0).unwrap();
        let closed = delta(&bath, 1.0).unwrap();
        let reference = 0.1 * (hp::atan(10.0) - 10.0);
        assert!((closed - reference).abs() < 1e-15);
        assert!((closed + 0.852_887_2).abs() < 1e-6);
        let q = delta_by_quadrature(&bath, 1.0).unwrap();
        assert!(rel(q, closed) < 1e-8);
    }

    #[test]
    fn delta_small_argument_series_is_continuous() {
        let bath = OhmicBath::new(1.0, 1.0, 1.0).unwrap();
        for y in [1e-6, 5e-4, 0.999e-3, 1.001e-3] {
            let d = delta(&bath, y).unwrap();
            // atan(y) − y = −y³/3 + y⁵/5 − ...
            let series = -y.powi(3) / 3.0 + y.powi(5) / 5.0;
            assert!(rel(d, series) < 1e-9, "y = {y}: {d} vs {series}");
        }
    }

    #[test]
    fn delta_vanishes_with_coupling() {
        let bath = OhmicBath::new(1e-300, 10.0, 10.0).unwrap();
        assert!(delta(&bath, 3.0).unwrap().abs() < 1e-298);
    }

    #[test]
    fn gamma_is_linear_in_coupling() {
        let a = OhmicBath::new(0.1, 10.0, 10.0).unwrap();
        let b = a.with_coupling(0.2).unwrap();
        for tau in [0.05, 0.7, 4.0] {
            let ga = gamma(&a, tau).unwrap();
            let gb = gamma(&b, tau).unwrap();
            assert!(rel(gb, 2.0 * ga) < 1e-10);
        }
    }

    #[test]
    fn truncation_is_converged() {
        let bath = OhmicBath::new(0.5, 1.0, 10.0).unwrap();
        let wider = QuadratureSettings {
            truncation: 60.0,
            ..QuadratureSettings::default()
        };
        for tau in [0.01, 0.3, 5.0] {
            let base = gamma(&bath, tau).unwrap();
            let ext = gamma_with(&bath, tau, &wider).unwrap();
            assert!(rel(ext, base) < 1e-10, "tau = {tau}");
        }
    }

    #[test]
    fn oversized_integrals_are_refused() {
        let bath = OhmicBath::new(0.1, 1e9, 10.0).unwrap();
        assert!(matches!(gamma(&bath, 1.0), Err(Error::Range { .. })));
        assert!(gamma(&OhmicBath::zero_temperature(0.1, 1e9).unwrap(), 1.0).is_ok());
    }

    #[test]
    fn helpers_are_smooth_across_series_switch() {
        for &(w, tau) in &[(1.999e-4f64, 1.0f64), (2.001e-4, 1.0)] {
            let direct = (1.0 - (w * tau).cos()) / (w * w);
            assert!(rel(one_minus_cos_over_sq(w, tau), 0.5 * tau * tau) < 1e-7);
            assert!(rel(direct, 0.5) < 1e-4);
        }
        let beta: f64 = 10.0;
        for w in [1.99e-5, 2.01e-5, 1.0] {
            let direct = w / (0.5 * beta * w).tanh();
            assert!(rel(omega_coth(w, beta), direct) < 1e-9);
        }
        for x in [0.0099f64, 0.0101] {
            let direct = x.sin() / x - 1.0;
            assert!(rel(sin_minus_id_over_id(x), direct) < 1e-9);
        }
    }
}
