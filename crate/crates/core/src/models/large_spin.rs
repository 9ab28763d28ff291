//! Spin-`J` pure dephasing through a common harmonic-oscillator bath.
//!
//! In the `J_z` eigenbasis (rows ordered `m = J, J−1, …, −J`) and with the
//! free evolution removed, coherences evolve as
//! `ρ_lm → ρ_lm e^{−iδ(l²−m²)} e^{−γ(l−m)²}`. Measurements are in the `J_x`
//! eigenbasis; for `J = 1` the kernel is symmetric with
//! `s01 = s10 = s12 = s21` and `s02 = s20`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{DephasingFactors, OhmicBath};
use crate::chain::{non_negative_zero, powu, selective_decay_rate, Protocol, ProtocolKind};
use crate::error::{check_nonnegative_finite, Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const IMAGINARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeSpinParams {
    spin: f64,
    omega0: f64,
}

impl LargeSpinParams {
    pub fn new(spin: f64, omega0: f64) -> Result<Self> {
        if !(spin >= 0.5) || (2.0 * spin).fract() != 0.0 || !spin.is_finite() {
            return Err(Error::invalid(
                "J",
                format!("{spin} is not a positive integer or half-integer"),
            ));
        }
        if !omega0.is_finite() {
            return Err(Error::invalid("omega0", "must be finite"));
        }
        Ok(LargeSpinParams { spin, omega0 })
    }

    pub fn spin(&self) -> f64 {
        self.spin
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
}

/// How the selective-measurement rate is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectiveForm {
    /// `−ln(1 − s01 − s02)/τ` from the transition probabilities.
    #[default]
    Canonical,
    /// `−ln{⅛[3 + 4e^{−4γ} + 4 cos δ e^{−γ}]}/τ`, kept for comparison only;
    /// it does not equal `1 − s01 − s02`.
    AsPrinted,
}

/// A validated density matrix in the `J_z` eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<Complex64>);

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid(
                "rho",
                "density matrix must be square and non-empty",
            ));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::invalid(
                        "rho",
                        format!("not Hermitian at ({i}, {j})"),
                    ));
                }
            }
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::invalid("rho", format!("trace {trace} is not 1")));
        }
        let eigen = matrix.clone().symmetric_eigenvalues();
        if let Some(min) = eigen.iter().copied().reduce(f64::min) {
            if min < -HERMITIAN_TOL {
                return Err(Error::invalid(
                    "rho",
                    format!("not positive semidefinite (eigenvalue {min})"),
                ));
            }
        }
        Ok(DensityMatrix(matrix))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(m)
    }

    /// The three `J_x` eigenprojectors of a spin one, for eigenvalues
    /// `+1`, `0` and `−1`.
    pub fn spin_one_jx_eigenstates() -> [DensityMatrix; 3] {
        let r = std::f64::consts::SQRT_2;
        let q = |rows: [[f64; 3]; 3], scale: f64| {
            DMatrix::from_fn(3, 3, |i, j| Complex64::new(rows[i][j] * scale, 0.0))
        };
        [
            DensityMatrix(q([[1.0, r, 1.0], [r, 2.0, r], [1.0, r, 1.0]], 0.25)),
            DensityMatrix(q(
                [[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]],
                0.5,
            )),
            DensityMatrix(q([[1.0, -r, 1.0], [-r, 2.0, -r], [1.0, -r, 1.0]], 0.25)),
        ]
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Spin size `J = (dim − 1)/2`.
    pub fn spin(&self) -> f64 {
        0.5 * (self.dim() as f64 - 1.0)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// `J_z` eigenvalue labelling row (or column) `index`.
    pub fn magnetic_number(&self, index: usize) -> f64 {
        self.spin() - index as f64
    }

    /// The state after one interval of pure dephasing.
    pub fn dephased(&self, gamma: f64, delta: f64) -> DensityMatrix {
        let n = self.dim();
        DensityMatrix(DMatrix::from_fn(n, n, |i, j| {
            dephased_matrix_element(
                self.0[(i, j)],
                self.magnetic_number(i),
                self.magnetic_number(j),
                gamma,
                delta,
            )
        }))
    }
}

/// `ρ_lm e^{−iδ(l²−m²)} e^{−γ(l−m)²}`.
pub fn dephased_matrix_element(
    rho_lm: Complex64,
    l: f64,
    m: f64,
    gamma: f64,
    delta: f64,
) -> Complex64 {
    if l == m {
        return rho_lm;
    }
    let diff = l - m;
    let phase = Complex64::from_polar(1.0, -delta * (l * l - m * m));
    rho_lm * phase * (-gamma * diff * diff).exp()
}

/// Probability of finding `rho_b` one interval after preparing `rho_a`:
/// `Σ_lm e^{−iδ(l²−m²)} e^{−γ(l−m)²} [ρ_a]_lm [ρ_b]_ml`.
pub fn generic_transition(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    if rho_a.dim() != rho_b.dim() {
        return Err(Error::invalid(
            "rho",
            format!("dimension mismatch {} vs {}", rho_a.dim(), rho_b.dim()),
        ));
    }
    let evolved = rho_a.dephased(gamma, delta);
    let n = rho_a.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..n {
        for m in 0..n {
            total += evolved.0[(l, m)] * rho_b.0[(m, l)];
        }
    }
    if total.im.abs() > IMAGINARY_TOL {
        return Err(Error::Numerical(format!(
            "transition probability has imaginary residue {}",
            total.im
        )));
    }
    Ok(total.re)
}

/// `(s01, s02)` for `J = 1`:
/// `s01 = ¼[1 − e^{−4γ}]`, `s02 = ⅛[3 + e^{−4γ} − 4 cos δ e^{−γ}]`.
pub fn large_spin_transitions(gamma: f64, delta: f64) -> Result<(f64, f64)> {
    if gamma != f64::INFINITY {
        check_nonnegative_finite("gamma", gamma)?;
    }
    if !delta.is_finite() {
        return Err(Error::invalid("delta", "must be finite"));
    }
    let e4 = (-4.0 * gamma).exp();
    let s01 = -0.25 * (-4.0 * gamma).exp_m1();
    let s02 = 0.125 * (3.0 + e4 - 4.0 * delta.cos() * (-gamma).exp());
    Ok((s01, s02.max(0.0)))
}

fn require_spin_one(params: &LargeSpinParams) -> Result<()> {
    if params.spin != 1.0 {
        return Err(Error::invalid(
            "J",
            format!(
                "survival closed form is implemented for J = 1 only, got {}",
                params.spin
            ),
        ));
    }
    Ok(())
}

/// Selective rate in the printed `⅛[3 + 4e^{−4γ} + 4 cos δ e^{−γ}]` form.
pub fn large_spin_selective_rate_printed(gamma: f64, delta: f64, tau: f64) -> Result<f64> {
    let arg = 0.125 * (3.0 + 4.0 * (-4.0 * gamma).exp() + 4.0 * delta.cos() * (-gamma).exp());
    if arg <= 0.0 {
        return Err(Error::InfiniteRate(format!("log argument {arg} <= 0")));
    }
    Ok(-arg.ln() / tau)
}

/// Decay rate from already evaluated bath factors.
pub fn large_spin_rate_from_factors(
    factors: &DephasingFactors,
    protocol: &Protocol,
    selective: SelectiveForm,
) -> Result<f64> {
    let (gamma, delta, tau) = (factors.gamma, factors.delta, protocol.tau());
    match (protocol.kind(), selective) {
        (ProtocolKind::Selective, SelectiveForm::Canonical) => {
            let (s01, s02) = large_spin_transitions(gamma, delta)?;
            // Leaving state 0 means landing in 1 or 2.
            selective_decay_rate((s01 + s02).min(1.0), tau)
        }
        (ProtocolKind::Selective, SelectiveForm::AsPrinted) => {
            large_spin_selective_rate_printed(gamma, delta, tau)
        }
        (ProtocolKind::NonSelective, _) => {
            large_spin_transitions(gamma, delta)?;
            let m = protocol.measurements();
            let slow = 0.25 * (1.0 + 3.0 * (-4.0 * gamma).exp());
            let fast = delta.cos() * (-gamma).exp();
            let survival = (2.0 + powu(slow, m) + 3.0 * powu(fast, m)) / 6.0;
            if survival <= 0.0 {
                return Err(Error::InfiniteRate(format!(
                    "large-spin survival {survival} <= 0"
                )));
            }
            Ok(non_negative_zero(
                -survival.min(1.0).ln() / (f64::from(m) * tau),
            ))
        }
    }
}

/// Effective decay rate of the spin-one dephasing model.
pub fn large_spin_decay_rate(
    params: &LargeSpinParams,
    bath: &OhmicBath,
    protocol: &Protocol,
    selective: SelectiveForm,
) -> Result<f64> {
    require_spin_one(params)?;
    let factors = DephasingFactors::evaluate(bath, protocol.tau())?;
    large_spin_rate_from_factors(&factors, protocol, selective)
}

pub(crate) fn check_spin_one(params: &LargeSpinParams) -> Result<()> {
    require_spin_one(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{effective_decay_rate, survival_three_level_symmetric};

    fn factors(gamma: f64, delta: f64, tau: f64) -> DephasingFactors {
        DephasingFactors { tau, gamma, delta }
    }

    #[test]
    fn jx_eigenstates_are_valid_density_matrices() {
        for rho in DensityMatrix::spin_one_jx_eigenstates() {
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            assert_eq!(rho.spin(), 1.0);
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_real_rows(&[&[0.5, 0.1], &[0.2, 0.5]]).is_err());
        assert!(DensityMatrix::from_real_rows(&[&[0.6, 0.0], &[0.0, 0.6]]).is_err());
        assert!(DensityMatrix::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]).is_err());
        assert!(DensityMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).is_ok());
    }

    #[test]
    fn matrix_element_examples() {
        let rho = Complex64::new(0.3, -0.1);
        assert_eq!(dephased_matrix_element(rho, 1.0, 1.0, 5.0, 2.0), rho);
        assert_eq!(
            dephased_matrix_element(rho, 1.0, 0.0, f64::INFINITY, 2.0),
            Complex64::new(0.0, 0.0)
        );
        let got = dephased_matrix_element(rho, 1.0, -1.0, 0.1, 0.2);
        let want = rho * (-0.4f64).exp();
        assert!((got - want).norm() < 1e-16);
    }

    #[test]
    fn transitions_examples() {
        assert_eq!(large_spin_transitions(0.0, 0.0).unwrap(), (0.0, 0.0));
        let (a, b) = large_spin_transitions(f64::INFINITY, 0.7).unwrap();
        assert_eq!((a, b), (0.25, 0.375));
        assert!(large_spin_transitions(-1.0, 0.0).is_err());
    }

    #[test]
    fn overlap_sum_reproduces_closed_forms() {
        let [r0, r1, r2] = DensityMatrix::spin_one_jx_eigenstates();
        let (g, d) = (0.2, 0.3);
        let (s01, s02) = large_spin_transitions(g, d).unwrap();
        let want01 = 0.25 * (1.0 - (-0.8f64).exp());
        let want02 = 0.125 * (3.0 + (-0.8f64).exp() - 4.0 * 0.3f64.cos() * (-0.2f64).exp());
        assert!((s01 - want01).abs() < 1e-15);
        assert!((s02 - want02).abs() < 1e-15);
        assert!((generic_transition(&r0, &r1, g, d).unwrap() - s01).abs() < 1e-12);
        assert!((generic_transition(&r0, &r2, g, d).unwrap() - s02).abs() < 1e-12);
        assert!((generic_transition(&r1, &r2, g, d).unwrap() - s01).abs() < 1e-12);
        assert!((generic_transition(&r0, &r0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generic_transition_rejects_mismatched_dims() {
        let [r0, ..] = DensityMatrix::spin_one_jx_eigenstates();
        let half = DensityMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(generic_transition(&r0, &half, 0.1, 0.1).is_err());
    }

    #[test]
    fn half_spin_reduces_to_single_spin_dephasing() {
        // |+x⟩⟨+x| → |−x⟩⟨−x| for J = 1/2: ½(1 − e^{−γ}).
        let plus = DensityMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let minus = DensityMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        let s = generic_transition(&plus, &minus, 0.7, 1.3).unwrap();
        assert!((s - 0.5 * (1.0 - (-0.7f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn nonselective_rate_matches_three_level_chain() {
        for &(g, d) in &[(0.01, -0.2), (0.3, -2.5), (1.0, -3.1), (0.05, -3.0)] {
            let (s01, s02) = large_spin_transitions(g, d).unwrap();
            for m in [1, 2, 3, 5, 10, 31] {
                let tau = 0.8;
                let p = Protocol::new(m, tau, ProtocolKind::NonSelective).unwrap();
                let direct =
                    large_spin_rate_from_factors(&factors(g, d, tau), &p, SelectiveForm::Canonical)
                        .unwrap();
                let chain = effective_decay_rate(
                    survival_three_level_symmetric(s01, s02, m).unwrap(),
                    m,
                    tau,
                )
                .unwrap();
                assert!(
                    (direct - chain).abs() < 1e-12,
                    "{g} {d} {m}: {direct} vs {chain}"
                );
            }
        }
    }

    #[test]
    fn one_measurement_is_selective() {
        for &(g, d) in &[(0.0, 0.0), (0.2, -0.5), (2.0, -4.0)] {
            let f = factors(g, d, 0.6);
            let sel = large_spin_rate_from_factors(
                &f,
                &Protocol::new(1, 0.6, ProtocolKind::Selective).unwrap(),
                SelectiveForm::Canonical,
            )
            .unwrap();
            let non = large_spin_rate_from_factors(
                &f,
                &Protocol::new(1, 0.6, ProtocolKind::NonSelective).unwrap(),
                SelectiveForm::Canonical,
            )
            .unwrap();
            assert!((sel - non).abs() < 1e-12);
        }
    }

    #[test]
    fn printed_selective_form_differs() {
        let f = factors(0.2, -0.5, 1.0);
        let p = Protocol::new(1, 1.0, ProtocolKind::Selective).unwrap();
        let canonical = large_spin_rate_from_factors(&f, &p, SelectiveForm::Canonical).unwrap();
        let printed = large_spin_rate_from_factors(&f, &p, SelectiveForm::AsPrinted).unwrap();
        // The forms differ by 3e^{−4γ}/8 inside the logarithm.
        let s00 = 0.125 * (3.0 + (-0.8f64).exp() + 4.0 * (-0.5f64).cos() * (-0.2f64).exp());
        let printed_arg = s00 + 0.375 * (-0.8f64).exp();
        assert!((canonical + s00.ln()).abs() < 1e-14);
        assert!((printed + printed_arg.ln()).abs() < 1e-14);
        assert!(printed < canonical);
    }

    #[test]
    fn spin_gate() {
        let bath = OhmicBath::new(0.1, 10.0, 10.0).unwrap();
        let p = Protocol::new(3, 0.5, ProtocolKind::NonSelective).unwrap();
        let two = LargeSpinParams::new(2.0, 1.0).unwrap();
        assert!(large_spin_decay_rate(&two, &bath, &p, SelectiveForm::Canonical).is_err());
        assert!(LargeSpinParams::new(0.7, 1.0).is_err());
        let one = LargeSpinParams::new(1.0, 1.0).unwrap();
        assert!(large_spin_decay_rate(&one, &bath, &p, SelectiveForm::Canonical).unwrap() > 0.0);
    }
}
