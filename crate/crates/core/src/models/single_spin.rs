//! Single two-level system dephasing through a harmonic-oscillator bath.
//!
//! Measurements project onto `|ψ₀⟩ = cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩`
//! and its orthogonal complement. Both transition directions share
//! `s = ½ sin²θ (1 − e^{−γ(τ)})`.

use serde::{Deserialize, Serialize};

use crate::bath::{self, OhmicBath};
use crate::chain::{
    effective_decay_rate, selective_decay_rate, survival_two_level_closed, Protocol, ProtocolKind,
};
use crate::error::{check_nonnegative_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSpinParams {
    theta: f64,
    phi: f64,
    omega0: f64,
}

impl SingleSpinParams {
    pub fn new(theta: f64, phi: f64, omega0: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid(
                "theta",
                format!("{theta} is outside [0, pi]"),
            ));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::invalid("phi", format!("{phi} is outside [0, 2 pi)")));
        }
        if !omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be finite"));
        }
        Ok(SingleSpinParams { theta, phi, omega0 })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
}

/// `s01 = s10 = ½ sin²θ (1 − e^{−γ})`.
pub fn single_spin_transition(params: &SingleSpinParams, gamma: f64) -> Result<f64> {
    check_nonnegative_finite("gamma", gamma).or_else(|e| {
        if gamma == f64::INFINITY {
            Ok(())
        } else {
            Err(e)
        }
    })?;
    let sin = params.theta.sin();
    Ok(0.5 * sin * sin * -(-gamma).exp_m1())
}

/// Decay rate given an already evaluated dephasing factor.
pub fn single_spin_rate_from_gamma(
    params: &SingleSpinParams,
    gamma: f64,
    protocol: &Protocol,
) -> Result<f64> {
    let s = single_spin_transition(params, gamma)?;
    match protocol.kind() {
        ProtocolKind::Selective => selective_decay_rate(s, protocol.tau()),
        ProtocolKind::NonSelective => {
            let m = protocol.measurements();
            let survival = survival_two_level_closed(s, s, m)?;
            effective_decay_rate(survival, m, protocol.tau())
        }
    }
}

/// Effective decay rate of the single-spin dephasing model.
pub fn single_spin_decay_rate(
    params: &SingleSpinParams,
    bath: &OhmicBath,
    protocol: &Protocol,
) -> Result<f64> {
    let gamma = bath::gamma(bath, protocol.tau())?;
    single_spin_rate_from_gamma(params, gamma, protocol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn half_pi() -> SingleSpinParams {
        SingleSpinParams::new(FRAC_PI_2, 0.0, 1.0).unwrap()
    }

    /// Closed-form rates written out directly from θ and γ.
    fn direct_rate(theta: f64, gamma: f64, m: u32, tau: f64, kind: ProtocolKind) -> f64 {
        let sin2 = theta.sin().powi(2);
        match kind {
            ProtocolKind::NonSelective => {
                let inner = 1.0 - sin2 * (1.0 - (-gamma).exp());
                -(0.5 * (1.0 + inner.powi(m as i32))).ln() / (m as f64 * tau)
            }
            ProtocolKind::Selective => -(1.0 - 0.5 * sin2 * (1.0 - (-gamma).exp())).ln() / tau,
        }
    }

    #[test]
    fn transition_examples() {
        assert_eq!(single_spin_transition(&half_pi(), 0.0).unwrap(), 0.0);
        let pole = SingleSpinParams::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(single_spin_transition(&pole, 3.0).unwrap(), 0.0);
        assert_eq!(
            single_spin_transition(&half_pi(), f64::INFINITY).unwrap(),
            0.5
        );
        assert!(single_spin_transition(&half_pi(), -0.1).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SingleSpinParams::new(4.0, 0.0, 1.0).is_err());
        assert!(SingleSpinParams::new(1.0, 2.0 * PI, 1.0).is_err());
        assert!(SingleSpinParams::new(PI, 0.0, 1.0).is_ok());
    }

    #[test]
    fn immune_pole_state_never_decays() {
        let pole = SingleSpinParams::new(0.0, 0.3, 1.0).unwrap();
        let bath = OhmicBath::new(0.5, 10.0, 10.0).unwrap();
        for m in [1, 3, 10] {
            for kind in [ProtocolKind::Selective, ProtocolKind::NonSelective] {
                let p = Protocol::new(m, 0.4, kind).unwrap();
                assert_eq!(single_spin_decay_rate(&pole, &bath, &p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn composition_matches_direct_formula() {
        for &theta in &[0.3, FRAC_PI_2, 2.0] {
            let params = SingleSpinParams::new(theta, 0.0, 1.0).unwrap();
            for &gamma in &[1e-3, 0.2, 1.5, 7.0] {
                for m in [1, 3, 5, 10, 40] {
                    for kind in [ProtocolKind::Selective, ProtocolKind::NonSelective] {
                        let tau = 0.37;
                        let p = Protocol::new(m, tau, kind).unwrap();
                        let got = single_spin_rate_from_gamma(&params, gamma, &p).unwrap();
                        let want = direct_rate(theta, gamma, m, tau, kind);
                        assert!((got - want).abs() < 1e-12, "{theta} {gamma} {m} {kind}");
                    }
                }
            }
        }
    }

    #[test]
    fn one_measurement_is_selective() {
        let bath = OhmicBath::new(0.5, 10.0, 10.0).unwrap();
        for tau in [0.05, 0.3, 2.0] {
            let sel = single_spin_decay_rate(
                &half_pi(),
                &bath,
                &Protocol::new(1, tau, ProtocolKind::Selective).unwrap(),
            );
            let non = single_spin_decay_rate(
                &half_pi(),
                &bath,
                &Protocol::new(1, tau, ProtocolKind::NonSelective).unwrap(),
            );
            assert!((sel.unwrap() - non.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn small_dephasing_keeps_precision() {
        // 1 − e^{−γ} loses digits if formed by subtraction.
        let g = 1e-9;
        let s = single_spin_transition(&half_pi(), g).unwrap();
        let want = 0.5 * (1.0 - crate::testutil::hp::exp(-g));
        assert!((s - want).abs() / want < 1e-6);
        assert!((s - 0.5 * g * (1.0 - 0.5 * g)).abs() / s < 1e-15);
    }
}
