//! Survival probabilities for repeated measurements, independent of any
//! particular system–environment model.
//!
//! Each measurement interval is summarised by a row-stochastic kernel of
//! transition probabilities between measurement-basis states. Composition
//! over intervals assumes no system–environment correlations carry over
//! from one interval to the next, so the probability of finding the
//! initial state after `M` intervals is the top-left entry of the
//! kernel's `M`-th power.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Error, Result};
use crate::exact::Dyadic;

/// Tolerance on row sums when a kernel is built.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Maximum drift allowed in row sums while a kernel is being powered.
pub const DRIFT_GUARD: f64 = 1e-9;

/// Largest measurement count accepted by [`survival_two_level_series`].
pub const SERIES_MAX_MEASUREMENTS: u32 = 64;

/// Whether intermediate measurement outcomes are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Every outcome is read and only runs that always find the initial
    /// state are kept.
    Selective,
    /// Outcomes are not read; only the last measurement is post-selected.
    NonSelective,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Selective => "selective",
            ProtocolKind::NonSelective => "nonselective",
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `M` measurements spaced by `tau` (ħ = 1 units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    measurements: u32,
    tau: f64,
    kind: ProtocolKind,
}

impl Protocol {
    pub fn new(measurements: u32, tau: f64, kind: ProtocolKind) -> Result<Self> {
        if measurements == 0 {
            return Err(Error::invalid("M", "at least one measurement is required"));
        }
        check_positive("tau", tau)?;
        Ok(Protocol {
            measurements,
            tau,
            kind,
        })
    }

    pub fn measurements(&self) -> u32 {
        self.measurements
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }
}

/// Row-stochastic matrix of one-interval transition probabilities.
///
/// Only off-diagonal entries are held; `s[i][i]` is always
/// `1 - Σ_{j≠i} s[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    dim: usize,
    // Row-major dim×dim; diagonal slots are unused and kept at zero.
    off: Vec<f64>,
}

impl TransitionKernel {
    /// Builds a kernel from its off-diagonal entries; `entry(i, j)` is only
    /// called for `i != j`.
    pub fn from_fn(dim: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(
                "dim",
                format!("kernel dimension {dim} must be >= 2"),
            ));
        }
        let mut off = vec![0.0; dim * dim];
        for i in 0..dim {
            let mut row = 0.0;
            for j in (0..dim).filter(|&j| j != i) {
                let s = entry(i, j);
                check_probability("s_ij", s)?;
                off[i * dim + j] = s;
                row += s;
            }
            if row > 1.0 + ROW_SUM_TOLERANCE {
                return Err(Error::invalid(
                    "s_ij",
                    format!("off-diagonal entries of row {i} sum to {row} > 1"),
                ));
            }
        }
        Ok(TransitionKernel { dim, off })
    }

    pub fn two_level(s01: f64, s10: f64) -> Result<Self> {
        Self::from_fn(2, |i, _| if i == 0 { s01 } else { s10 })
    }

    /// Three-level kernel with `s01 = s10 = s12 = s21` and `s02 = s20`.
    pub fn three_level_symmetric(s01: f64, s02: f64) -> Result<Self> {
        Self::from_fn(3, |i, j| if i.abs_diff(j) == 2 { s02 } else { s01 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "kernel index out of range");
        if i != j {
            return self.off[i * self.dim + j];
        }
        let row: f64 = (0..self.dim)
            .filter(|&k| k != i)
            .map(|k| self.off[i * self.dim + k])
            .sum();
        (1.0 - row).max(0.0)
    }

    /// Dense row-major copy including the derived diagonal.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n * n).map(|idx| self.get(idx / n, idx % n)).collect()
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn check_drift(m: &[f64], n: usize) -> Result<()> {
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > DRIFT_GUARD
            || row
                .iter()
                .any(|&x| !(-DRIFT_GUARD..=1.0 + DRIFT_GUARD).contains(&x))
        {
            return Err(Error::Numerical(format!(
                "row {i} of kernel power drifted from stochasticity (row sum {sum})"
            )));
        }
    }
    Ok(())
}

/// `[kernel^M]_{00}` by binary exponentiation. `M = 0` gives 1.
pub fn survival_matrix_power(kernel: &TransitionKernel, measurements: u32) -> Result<f64> {
    let n = kernel.dim();
    let mut result: Option<Vec<f64>> = None;
    let mut base = kernel.to_dense();
    let mut m = measurements;
    while m > 0 {
        if m & 1 == 1 {
            let next = match result {
                None => base.clone(),
                Some(r) => matmul(&r, &base, n),
            };
            check_drift(&next, n)?;
            result = Some(next);
        }
        m >>= 1;
        if m > 0 {
            base = matmul(&base, &base, n);
            check_drift(&base, n)?;
        }
    }
    Ok(result.map_or(1.0, |r| r[0].clamp(0.0, 1.0)))
}

/// Closed-form two-level survival probability
/// `(s01 (1 - s01 - s10)^M + s10) / (s01 + s10)`.
///
/// With no transitions at all (`s01 = s10 = 0`) the state trivially survives.
pub fn survival_two_level_closed(s01: f64, s10: f64, measurements: u32) -> Result<f64> {
    check_probability("s01", s01)?;
    check_probability("s10", s10)?;
    let total = s01 + s10;
    if total == 0.0 {
        return Ok(1.0);
    }
    let decay = powu(1.0 - total, measurements);
    Ok((s01 / total) * decay + s10 / total)
}

/// The alternating binomial series form of the two-level survival
/// probability, evaluated exactly and rounded once.
///
/// Terms reach `C(64, 32) ≈ 1.8e18` with alternating signs, so the sum is
/// accumulated in exact dyadic arithmetic rather than in doubles.
pub fn survival_two_level_series(s01: f64, s10: f64, measurements: u32) -> Result<f64> {
    check_probability("s01", s01)?;
    check_probability("s10", s10)?;
    if measurements > SERIES_MAX_MEASUREMENTS {
        return Err(Error::Range {
            what: "M",
            reason: format!(
                "series form supports M <= {SERIES_MAX_MEASUREMENTS}, got {measurements}; use the closed form"
            ),
        });
    }
    let m = measurements;
    let a = Dyadic::from_f64(s01);
    let x = &a + &Dyadic::from_f64(s10);
    let mut sum = Dyadic::zero();
    let mut x_pow = Dyadic::from_int(1);
    for k in 1..m {
        x_pow = &x_pow * &x;
        let term = &Dyadic::from_int(binomial(m, k + 1)) * &x_pow;
        sum = if k % 2 == 1 {
            &sum + &term
        } else {
            &sum - &term
        };
    }
    let one = Dyadic::from_int(1);
    let linear = &Dyadic::from_int(m) * &a;
    let value = &(&one - &linear) + &(&a * &sum);
    Ok(value.to_f64())
}

/// Exact binomial coefficient for `n <= 64`.
pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    assert!(
        n <= SERIES_MAX_MEASUREMENTS,
        "binomial({n}, {k}) outside exact range"
    );
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    c
}

/// Survival for the symmetric three-level kernel:
/// `[2 + (1 - 3 s01)^M + 3 (1 - s01 - 2 s02)^M] / 6`.
///
/// `1 - s01 - 2 s02` may be negative; the power is the real integer power.
pub fn survival_three_level_symmetric(s01: f64, s02: f64, measurements: u32) -> Result<f64> {
    // Validates entries and row sums of the kernel this formula diagonalises.
    // `s01 + 2 s02 > 1` is allowed: the large-spin kernel reaches it.
    TransitionKernel::three_level_symmetric(s01, s02)?;
    if 3.0 * s01 > 1.0 + ROW_SUM_TOLERANCE {
        return Err(Error::invalid(
            "s01",
            format!("3 s01 = {} exceeds 1", 3.0 * s01),
        ));
    }
    let value = (2.0
        + powu(1.0 - 3.0 * s01, measurements)
        + 3.0 * powu(1.0 - s01 - 2.0 * s02, measurements))
        / 6.0;
    Ok(value)
}

/// `Γ = -ln(S) / (M τ)`, the rate defined by `S = exp(-Γ M τ)`.
pub fn effective_decay_rate(survival: f64, measurements: u32, tau: f64) -> Result<f64> {
    if measurements == 0 {
        return Err(Error::invalid("M", "at least one measurement is required"));
    }
    check_positive("tau", tau)?;
    if survival == 0.0 {
        return Err(Error::InfiniteRate("survival probability is zero".into()));
    }
    if !(survival > 0.0 && survival <= 1.0) {
        return Err(Error::invalid(
            "survival",
            format!("{survival} is not in (0, 1]"),
        ));
    }
    Ok(non_negative_zero(
        -survival.ln() / (f64::from(measurements) * tau),
    ))
}

/// Selective-measurement rate `-ln(1 - s01) / τ`; independent of `M`.
pub fn selective_decay_rate(s01: f64, tau: f64) -> Result<f64> {
    check_probability("s01", s01)?;
    check_positive("tau", tau)?;
    if s01 == 1.0 {
        return Err(Error::InfiniteRate(
            "transition probability s01 is one".into(),
        ));
    }
    Ok(non_negative_zero(-(-s01).ln_1p() / tau))
}

/// Integer power by repeated squaring.
pub(crate) fn powu(x: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => {
            let half = powu(x, n / 2);
            let sq = half * half;
            if n % 2 == 1 {
                sq * x
            } else {
                sq
            }
        }
    }
}

pub(crate) fn non_negative_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}
