//! Central spin coupled to a bath of spin-1/2 particles through `σ_z σ_z^{(i)}`.
//!
//! Bath configurations `|n⟩` are joint eigenstates of the bath Hamiltonian
//! and of the coupling operator, so the central spin evolves under a
//! configuration-dependent two-level Hamiltonian with bias `ζ_n = ε + G_n`
//! and is averaged with thermal weights `c_n = e^{−β η_n / 2}`.
//!
//! For `N = 100` at `β = 10` the weights span `e^{±500}`, so every thermal
//! average is formed in the log domain and shifted by the largest weight.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::chain::{non_negative_zero, powu, Protocol, ProtocolKind};
use crate::error::{check_positive, Error, Result};

/// Largest bath handled by explicit enumeration of all `2^N` configurations.
pub const MAX_ENUMERATED_SPINS: usize = 14;

/// Tolerance before an out-of-range transition probability is an error.
const RANGE_SLACK: f64 = 1e-10;

/// The bath spins, either identical or listed one by one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathSpins {
    Uniform {
        count: usize,
        energy: f64,
        coupling: f64,
    },
    Explicit {
        energies: Vec<f64>,
        couplings: Vec<f64>,
    },
}

impl BathSpins {
    pub fn count(&self) -> usize {
        match self {
            BathSpins::Uniform { count, .. } => *count,
            BathSpins::Explicit { energies, .. } => energies.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinBathParams {
    epsilon: f64,
    tunneling: f64,
    beta: f64,
    spins: BathSpins,
}

impl SpinBathParams {
    pub fn new(epsilon: f64, tunneling: f64, beta: f64, spins: BathSpins) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be finite"));
        }
        if !tunneling.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        if epsilon == 0.0 && tunneling == 0.0 {
            return Err(Error::invalid(
                "epsilon",
                "epsilon and delta cannot both vanish: the free rotation is undefined",
            ));
        }
        check_positive("beta", beta)?;
        match &spins {
            BathSpins::Uniform {
                count,
                energy,
                coupling,
            } => {
                if *count == 0 {
                    return Err(Error::invalid("N", "at least one bath spin is required"));
                }
                if !energy.is_finite() || !coupling.is_finite() {
                    return Err(Error::invalid("epsilon_i/g_i", "must be finite"));
                }
            }
            BathSpins::Explicit {
                energies,
                couplings,
            } => {
                if energies.is_empty() {
                    return Err(Error::invalid("N", "at least one bath spin is required"));
                }
                if energies.len() != couplings.len() {
                    return Err(Error::invalid(
                        "epsilon_i/g_i",
                        format!(
                            "{} energies but {} couplings",
                            energies.len(),
                            couplings.len()
                        ),
                    ));
                }
                if energies.iter().chain(couplings).any(|x| !x.is_finite()) {
                    return Err(Error::invalid("epsilon_i/g_i", "must be finite"));
                }
                if energies.len() > MAX_ENUMERATED_SPINS {
                    return Err(Error::Capacity(format!(
                        "non-uniform bath of {} spins exceeds the exact enumeration limit N <= {MAX_ENUMERATED_SPINS}",
                        energies.len()
                    )));
                }
            }
        }
        Ok(SpinBathParams {
            epsilon,
            tunneling,
            beta,
            spins,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tunneling(&self) -> f64 {
        self.tunneling
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spins(&self) -> &BathSpins {
        &self.spins
    }
}

/// One bath configuration class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinBathTerm {
    /// `G_n = Σ (−1)^{n_i} g_i`.
    pub coupling_sum: f64,
    /// `η_n = Σ (−1)^{n_i} ε_i`.
    pub energy_sum: f64,
    /// `ζ_n = ε + G_n`.
    pub zeta: f64,
    /// `Ω_n = √(ζ_n² + Δ²) / 2`.
    pub omega: f64,
    /// `ln c_n = −β η_n / 2`.
    pub log_weight: f64,
    /// Natural log of the number of configurations in this class.
    pub log_multiplicity: f64,
}

impl SpinBathTerm {
    fn new(
        params: &SpinBathParams,
        coupling_sum: f64,
        energy_sum: f64,
        log_multiplicity: f64,
    ) -> Self {
        let zeta = params.epsilon + coupling_sum;
        SpinBathTerm {
            coupling_sum,
            energy_sum,
            zeta,
            omega: 0.5 * zeta.hypot(params.tunneling),
            log_weight: -0.5 * params.beta * energy_sum,
            log_multiplicity,
        }
    }
}

/// Three components of a Bloch-type vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in a double").ln();
    }
    let shift = bits - 64;
    let head = (v >> shift).to_f64().expect("64-bit head");
    head.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Groups the `2^N` configurations of an identical-spin bath into `N + 1`
/// classes by the number `k` of down spins.
pub fn collapse_uniform_bath(params: &SpinBathParams) -> Result<Vec<SpinBathTerm>> {
    let BathSpins::Uniform {
        count,
        energy,
        coupling,
    } = params.spins
    else {
        return Err(Error::invalid(
            "bath",
            "degeneracy collapse needs identical bath spins",
        ));
    };
    let n = count;
    let mut binom = BigUint::one();
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            binom = binom * BigUint::from(n - k + 1) / BigUint::from(k);
        }
        let net = (n as f64) - 2.0 * (k as f64);
        terms.push(SpinBathTerm::new(
            params,
            coupling * net,
            energy * net,
            ln_biguint(&binom),
        ));
    }
    Ok(terms)
}

/// Lists every bath configuration `|n⟩` with multiplicity one.
pub fn enumerate_bath_exact(params: &SpinBathParams) -> Result<Vec<SpinBathTerm>> {
    let (energies, couplings): (Vec<f64>, Vec<f64>) = match &params.spins {
        BathSpins::Uniform {
            count,
            energy,
            coupling,
        } => (vec![*energy; *count], vec![*coupling; *count]),
        BathSpins::Explicit {
            energies,
            couplings,
        } => (energies.clone(), couplings.clone()),
    };
    let n = energies.len();
    if n > MAX_ENUMERATED_SPINS {
        return Err(Error::Capacity(format!(
            "exact enumeration of {n} bath spins exceeds the limit N <= {MAX_ENUMERATED_SPINS}"
        )));
    }
    let terms = (0..1usize << n)
        .map(|config| {
            let (mut g, mut eta) = (0.0, 0.0);
            for i in 0..n {
                let sign = if config >> i & 1 == 0 { 1.0 } else { -1.0 };
                g += sign * couplings[i];
                eta += sign * energies[i];
            }
            SpinBathTerm::new(params, g, eta, 0.0)
        })
        .collect();
    Ok(terms)
}

/// Production term list: collapsed for identical spins, enumerated otherwise.
pub fn bath_terms(params: &SpinBathParams) -> Result<Vec<SpinBathTerm>> {
    match params.spins {
        BathSpins::Uniform { .. } => collapse_uniform_bath(params),
        BathSpins::Explicit { .. } => enumerate_bath_exact(params),
    }
}

fn log_weights(terms: &[SpinBathTerm]) -> (Vec<f64>, f64) {
    let logs: Vec<f64> = terms
        .iter()
        .map(|t| t.log_weight + t.log_multiplicity)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (logs, max)
}

/// `ln Z_B = ln Σ_n c_n`.
pub fn log_partition(terms: &[SpinBathTerm]) -> f64 {
    let (logs, max) = log_weights(terms);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// Thermal weights `c_n / Z_B` (including multiplicities), summing to one.
pub fn normalized_weights(terms: &[SpinBathTerm]) -> Vec<f64> {
    let (logs, max) = log_weights(terms);
    let raw: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Thermally averaged Bloch vector `(p_x, p_y, p_z)` of the central spin.
pub fn bloch_from_terms(terms: &[SpinBathTerm], tunneling: f64, tau: f64) -> Result<BlochVector> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(
            "tau",
            format!("{tau} must be finite and >= 0"),
        ));
    }
    let weights = normalized_weights(terms);
    let mut p = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    let d2 = tunneling * tunneling;
    for (t, w) in terms.iter().zip(weights) {
        if t.omega == 0.0 {
            // ζ_n = Δ = 0: no evolution in this configuration.
            p.x += w;
            continue;
        }
        let four_omega_sq = 4.0 * t.omega * t.omega;
        let angle = t.omega * tau;
        let sin_half = angle.sin();
        p.x += w * (t.zeta * t.zeta * (2.0 * angle).cos() + d2) / four_omega_sq;
        p.y += w * t.zeta * (2.0 * angle).sin() / (2.0 * t.omega);
        p.z += w * tunneling * t.zeta * sin_half * sin_half / (2.0 * t.omega * t.omega);
    }
    Ok(p)
}

/// Thermally averaged Bloch components of the central spin at time `tau`.
pub fn bloch_coefficients(params: &SpinBathParams, tau: f64) -> Result<BlochVector> {
    bloch_from_terms(&bath_terms(params)?, params.tunneling, tau)
}

/// Components that undo the free central-spin rotation before measuring.
pub fn free_rotation_coefficients(epsilon: f64, tunneling: f64, tau: f64) -> Result<BlochVector> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(
            "tau",
            format!("{tau} must be finite and >= 0"),
        ));
    }
    let omega = 0.5 * epsilon.hypot(tunneling);
    if omega == 0.0 {
        return Err(Error::invalid(
            "epsilon/delta",
            "free rotation frequency vanishes for epsilon = delta = 0",
        ));
    }
    let (s, c) = (omega * tau).sin_cos();
    Ok(BlochVector {
        x: c * c + s * s / (4.0 * omega * omega) * (tunneling * tunneling - epsilon * epsilon),
        y: epsilon / omega * s * c,
        z: 0.5 * epsilon * tunneling * s * s / (omega * omega),
    })
}

/// A spin-bath scenario with its configuration classes prepared once.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathModel {
    params: SpinBathParams,
    terms: Vec<SpinBathTerm>,
}

impl SpinBathModel {
    pub fn new(params: SpinBathParams) -> Result<Self> {
        let terms = bath_terms(&params)?;
        Ok(SpinBathModel { params, terms })
    }

    pub fn params(&self) -> &SpinBathParams {
        &self.params
    }

    pub fn terms(&self) -> &[SpinBathTerm] {
        &self.terms
    }

    /// `p · n`, the overlap that survives one interval.
    pub fn overlap(&self, tau: f64) -> Result<f64> {
        let p = bloch_from_terms(&self.terms, self.params.tunneling, tau)?;
        let n = free_rotation_coefficients(self.params.epsilon, self.params.tunneling, tau)?;
        Ok(p.dot(&n))
    }

    pub fn transition(&self, tau: f64) -> Result<f64> {
        transition_from_overlap(self.overlap(tau)?)
    }

    pub fn decay_rate(&self, protocol: &Protocol) -> Result<f64> {
        rate_from_overlap(self.overlap(protocol.tau())?, protocol)
    }
}

pub(crate) fn transition_from_overlap(overlap: f64) -> Result<f64> {
    let s = 0.5 * (1.0 - overlap);
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&s) {
        return Err(Error::Numerical(format!(
            "spin-bath transition probability {s} is outside [0, 1]"
        )));
    }
    Ok(s.clamp(0.0, 1.0))
}

/// `−ln{½[1 + (p·n)^M]}/(Mτ)`, or with `M = 1` for selective measurements.
pub(crate) fn rate_from_overlap(overlap: f64, protocol: &Protocol) -> Result<f64> {
    transition_from_overlap(overlap)?;
    let m = match protocol.kind() {
        ProtocolKind::Selective => 1,
        ProtocolKind::NonSelective => protocol.measurements(),
    };
    let survival = 0.5 * (1.0 + powu(overlap.clamp(-1.0, 1.0), m));
    if survival <= 0.0 {
        return Err(Error::InfiniteRate(
            "spin-bath survival probability is zero".into(),
        ));
    }
    Ok(non_negative_zero(
        -survival.min(1.0).ln() / (f64::from(m) * protocol.tau()),
    ))
}

/// `s01 = ½[1 − p·n]`; also `s10`.
pub fn spin_bath_transition(params: &SpinBathParams, tau: f64) -> Result<f64> {
    SpinBathModel::new(params.clone())?.transition(tau)
}

/// Effective decay rate of the central spin.
pub fn spin_bath_decay_rate(params: &SpinBathParams, protocol: &Protocol) -> Result<f64> {
    SpinBathModel::new(params.clone())?.decay_rate(protocol)
}
