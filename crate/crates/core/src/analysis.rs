//! Decay-rate sweeps over measurement intervals and Zeno/anti-Zeno regime
//! classification.
//!
//! The Zeno regime is where shortening the interval lowers the effective
//! decay rate (`dΓ/dτ > 0`); the anti-Zeno regime is the opposite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ProtocolKind;
use crate::error::{Error, Result};
use crate::models::{Model, ModelId, Outcome};

/// Differences below this are treated as flat.
pub const PLATEAU_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

impl std::str::FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::invalid(
                "spacing",
                format!("unknown spacing `{other}`"),
            )),
        }
    }
}

impl Spacing {
    pub fn as_str(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    tau_min: f64,
    tau_max: f64,
    count: usize,
    spacing: Spacing,
}

impl Grid {
    pub fn new(tau_min: f64, tau_max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if !(tau_min > 0.0) || !tau_min.is_finite() {
            return Err(Error::invalid(
                "tau_min",
                format!("{tau_min} must be finite and > 0"),
            ));
        }
        if !(tau_max > tau_min) || !tau_max.is_finite() {
            return Err(Error::invalid(
                "tau_max",
                format!("{tau_max} must be finite and > tau_min = {tau_min}"),
            ));
        }
        if count < 2 {
            return Err(Error::invalid(
                "count",
                format!("{count} must be at least 2"),
            ));
        }
        Ok(Grid {
            tau_min,
            tau_max,
            count,
            spacing,
        })
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Sample points, with both endpoints hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.tau_min;
                }
                if i == self.count - 1 {
                    return self.tau_max;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.tau_min + t * (self.tau_max - self.tau_min),
                    Spacing::Log => {
                        let (a, b) = (self.tau_min.ln(), self.tau_max.ln());
                        (a + t * (b - a)).exp()
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub survival: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub model_id: ModelId,
    pub measurements: u32,
    pub kind: ProtocolKind,
    pub samples: Vec<Sample>,
    pub grid: Option<Grid>,
}

impl DecayCurve {
    /// A curve from bare `(τ, Γ)` pairs, e.g. synthetic test data.
    pub fn from_rates(taus: &[f64], rates: &[f64]) -> Result<Self> {
        if taus.len() != rates.len() {
            return Err(Error::invalid("samples", "tau and rate lengths differ"));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("samples", "tau must be strictly increasing"));
        }
        Ok(DecayCurve {
            model_id: ModelId::SingleSpin,
            measurements: 1,
            kind: ProtocolKind::Selective,
            samples: taus
                .iter()
                .zip(rates)
                .map(|(&tau, &rate)| Sample {
                    tau,
                    survival: 1.0,
                    rate,
                })
                .collect(),
            grid: None,
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rate).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Zeno,
    AntiZeno,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Zeno => "zeno",
            Regime::AntiZeno => "anti_zeno",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub tau_start: f64,
    pub tau_end: f64,
    pub label: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub tau: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSegmentation {
    pub segments: Vec<Segment>,
    pub crossovers: Vec<f64>,
    pub peaks: Vec<Peak>,
}

fn evaluate_grid<F>(taus: &[f64], parallel: bool, eval: F) -> Result<Vec<Vec<Outcome>>>
where
    F: Fn(f64) -> Result<Vec<Outcome>> + Sync,
{
    let run = |tau: f64| eval(tau).map_err(|e| e.at_tau(tau));
    let slots: Vec<Result<Vec<Outcome>>> = if parallel {
        taus.par_iter().map(|&t| run(t)).collect()
    } else {
        taus.iter().map(|&t| run(t)).collect()
    };
    // First failure in grid order, independent of scheduling.
    slots.into_iter().collect()
}

fn sweep_impl(
    model: &Model,
    grid: &Grid,
    protocols: &[(u32, ProtocolKind)],
    parallel: bool,
) -> Result<Vec<DecayCurve>> {
    if protocols.is_empty() {
        return Err(Error::invalid(
            "protocols",
            "at least one protocol is required",
        ));
    }
    let taus = grid.points();
    let table = evaluate_grid(&taus, parallel, |tau| model.evaluate(tau, protocols))?;
    Ok(protocols
        .iter()
        .enumerate()
        .map(|(j, &(m, kind))| DecayCurve {
            model_id: model.id(),
            measurements: m,
            kind,
            samples: taus
                .iter()
                .zip(&table)
                .map(|(&tau, row)| Sample {
                    tau,
                    survival: row[j].survival,
                    rate: row[j].rate,
                })
                .collect(),
            grid: Some(*grid),
        })
        .collect())
}

/// One curve per protocol, evaluated on the current rayon pool.
pub fn sweep(
    model: &Model,
    grid: &Grid,
    protocols: &[(u32, ProtocolKind)],
) -> Result<Vec<DecayCurve>> {
    sweep_impl(model, grid, protocols, true)
}

/// Same as [`sweep`] on the calling thread.
pub fn sweep_serial(
    model: &Model,
    grid: &Grid,
    protocols: &[(u32, ProtocolKind)],
) -> Result<Vec<DecayCurve>> {
    sweep_impl(model, grid, protocols, false)
}

/// Labels each interval by the sign of its forward difference, folding flat
/// intervals into the preceding label.
fn interval_labels(rates: &[f64]) -> Vec<Regime> {
    let raw: Vec<Option<Regime>> = rates
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d.abs() < PLATEAU_TOLERANCE {
                None
            } else if d > 0.0 {
                Some(Regime::Zeno)
            } else {
                Some(Regime::AntiZeno)
            }
        })
        .collect();
    let first = raw.iter().flatten().next().copied().unwrap_or(Regime::Zeno);
    let mut current = first;
    raw.into_iter()
        .map(|r| {
            if let Some(r) = r {
                current = r;
            }
            current
        })
        .collect()
}

pub fn classify_regimes(curve: &DecayCurve) -> Result<RegimeSegmentation> {
    let n = curve.samples.len();
    if n < 3 {
        return Err(Error::invalid(
            "curve",
            format!("regime classification needs at least 3 samples, got {n}"),
        ));
    }
    let taus = curve.taus();
    let rates = curve.rates();
    let labels = interval_labels(&rates);
    let slope = |i: usize| (rates[i + 1] - rates[i]) / (taus[i + 1] - taus[i]);
    let mid = |i: usize| 0.5 * (taus[i] + taus[i + 1]);

    let mut segments = Vec::new();
    let mut crossovers = Vec::new();
    let mut start = taus[0];
    // Last interval whose difference was not flat.
    let mut last_signed: Option<usize> = None;
    for i in 0..labels.len() {
        let flat = (rates[i + 1] - rates[i]).abs() < PLATEAU_TOLERANCE;
        if i > 0 && labels[i] != labels[i - 1] {
            let j = last_signed.expect("label change follows a signed interval");
            let (dj, di) = (slope(j), slope(i));
            let (mj, mi) = (mid(j), mid(i));
            let at = mj + (mi - mj) * dj / (dj - di);
            crossovers.push(at);
            segments.push(Segment {
                tau_start: start,
                tau_end: at,
                label: labels[i - 1],
            });
            start = at;
        }
        if !flat {
            last_signed = Some(i);
        }
    }
    segments.push(Segment {
        tau_start: start,
        tau_end: taus[n - 1],
        label: *labels.last().expect("at least two intervals"),
    });
    Ok(RegimeSegmentation {
        segments,
        crossovers,
        peaks: find_peaks(curve),
    })
}

/// Local maxima by three-point comparison, refined by the vertex of the
/// parabola through the neighbouring samples.
pub fn find_peaks(curve: &DecayCurve) -> Vec<Peak> {
    let s = &curve.samples;
    let mut peaks = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        let (a, b, c) = (s[i - 1], s[i], s[i + 1]);
        if !(b.rate > a.rate && b.rate >= c.rate) {
            continue;
        }
        peaks.push(parabola_vertex(
            (a.tau, a.rate),
            (b.tau, b.rate),
            (c.tau, c.rate),
        ));
    }
    peaks
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Peak {
    // Newton form: y = y0 + d1 (x − x0) + d2 (x − x0)(x − x1).
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let d2 = (d12 - d01) / (x2 - x0);
    if !(d2 < 0.0) {
        return Peak { tau: x1, rate: y1 };
    }
    let x = 0.5 * (x0 + x1) - d01 / (2.0 * d2);
    let x = x.clamp(x0, x2);
    let y = y0 + d01 * (x - x0) + d2 * (x - x0) * (x - x1);
    Peak {
        tau: x,
        rate: y.max(y1),
    }
}
