//! The three system–environment models and a uniform way to evaluate them.

pub mod large_spin;
pub mod single_spin;
pub mod spin_bath;

use serde::{Deserialize, Serialize};

use crate::bath::{self, DephasingFactors, OhmicBath};
use crate::chain::{Protocol, ProtocolKind};
use crate::error::{Error, Result};

pub use large_spin::{
    generic_transition, large_spin_decay_rate, large_spin_transitions, DensityMatrix,
    LargeSpinParams, SelectiveForm,
};
pub use single_spin::{single_spin_decay_rate, single_spin_transition, SingleSpinParams};
pub use spin_bath::{
    spin_bath_decay_rate, spin_bath_transition, BathSpins, SpinBathModel, SpinBathParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    SingleSpin,
    SpinBath,
    LargeSpin,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::SingleSpin => "single_spin",
            ModelId::SpinBath => "spin_bath",
            ModelId::LargeSpin => "large_spin",
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_spin" => Ok(ModelId::SingleSpin),
            "spin_bath" => Ok(ModelId::SpinBath),
            "large_spin" => Ok(ModelId::LargeSpin),
            other => Err(Error::invalid("model", format!("unknown model `{other}`"))),
        }
    }
}

/// A fully parameterised model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    SingleSpin {
        params: SingleSpinParams,
        bath: OhmicBath,
    },
    SpinBath(SpinBathModel),
    LargeSpin {
        params: LargeSpinParams,
        bath: OhmicBath,
        selective: SelectiveForm,
    },
}

/// Survival after `M` measurements and the matching effective decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub survival: f64,
    pub rate: f64,
}

impl Model {
    pub fn id(&self) -> ModelId {
        match self {
            Model::SingleSpin { .. } => ModelId::SingleSpin,
            Model::SpinBath(_) => ModelId::SpinBath,
            Model::LargeSpin { .. } => ModelId::LargeSpin,
        }
    }

    /// Evaluates several protocols at one interval, computing the bath
    /// quantities once.
    pub fn evaluate(&self, tau: f64, protocols: &[(u32, ProtocolKind)]) -> Result<Vec<Outcome>> {
        let built = protocols
            .iter()
            .map(|&(m, kind)| Protocol::new(m, tau, kind))
            .collect::<Result<Vec<_>>>()?;
        match self {
            Model::SingleSpin { params, bath } => {
                let gamma = bath::gamma(bath, tau)?;
                let s = single_spin::single_spin_transition(params, gamma)?;
                built
                    .iter()
                    .map(|p| {
                        let rate = single_spin::single_spin_rate_from_gamma(params, gamma, p)?;
                        Ok(Outcome {
                            survival: survival_for(p, s, rate),
                            rate,
                        })
                    })
                    .collect()
            }
            Model::SpinBath(model) => {
                let overlap = model.overlap(tau)?;
                let s = spin_bath::transition_from_overlap(overlap)?;
                built
                    .iter()
                    .map(|p| {
                        let rate = spin_bath::rate_from_overlap(overlap, p)?;
                        Ok(Outcome {
                            survival: survival_for(p, s, rate),
                            rate,
                        })
                    })
                    .collect()
            }
            Model::LargeSpin {
                params,
                bath,
                selective,
            } => {
                large_spin::check_spin_one(params)?;
                let factors = DephasingFactors::evaluate(bath, tau)?;
                let (s01, s02) = large_spin_transitions(factors.gamma, factors.delta)?;
                built
                    .iter()
                    .map(|p| {
                        let rate =
                            large_spin::large_spin_rate_from_factors(&factors, p, *selective)?;
                        Ok(Outcome {
                            survival: survival_for(p, s01 + s02, rate),
                            rate,
                        })
                    })
                    .collect()
            }
        }
    }

    pub fn decay_rate(&self, protocol: &Protocol) -> Result<f64> {
        let out = self.evaluate(
            protocol.tau(),
            &[(protocol.measurements(), protocol.kind())],
        )?;
        Ok(out[0].rate)
    }
}

/// Survival consistent with the reported rate: `(1 − s_leave)^M` for selective
/// measurements and `e^{−ΓMτ}` otherwise.
fn survival_for(protocol: &Protocol, leave: f64, rate: f64) -> f64 {
    let m = protocol.measurements();
    match protocol.kind() {
        ProtocolKind::Selective => crate::chain::powu((1.0 - leave).clamp(0.0, 1.0), m),
        ProtocolKind::NonSelective => (-rate * f64::from(m) * protocol.tau()).exp(),
    }
}
