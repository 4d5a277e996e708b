//! Growth rates, private-attack thresholds, comparison curves and the Chernoff rate of
//! the adversary/fictitious-chain race.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn honest_growth_rate(lambda_h: f64, delta: f64) -> f64 {
    lambda_h / (1.0 + lambda_h * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdModel {
    PowPs,
    Chia,
}

/// Root of a sign-changing function on `[lo, hi]`; `None` when the endpoints share a sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Residual of the threshold equation; zero at the threshold β.
pub fn threshold_residual(beta: f64, lambda_delta: f64, model: ThresholdModel) -> f64 {
    let c = match model {
        ThresholdModel::PowPs => 1.0,
        ThresholdModel::Chia => E,
    };
    c * beta - (1.0 - beta) / (1.0 + (1.0 - beta) * lambda_delta)
}

/// Largest adversary fraction the private attack cannot beat, at delay product `λΔ`.
pub fn private_threshold(lambda_delta: f64, model: ThresholdModel) -> f64 {
    assert!(lambda_delta >= 0.0, "lambda_delta must be non-negative");
    bisect(|b| threshold_residual(b, lambda_delta, model), 0.0, 1.0)
        .expect("residual changes sign on [0, 1]")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    TruePowPs,
    TrueChia,
    PssRed,
    Green,
    Yellow,
    PosRed,
    PosGreen,
}

impl CurveId {
    pub const ALL: [CurveId; 7] = [
        CurveId::TruePowPs,
        CurveId::TrueChia,
        CurveId::PssRed,
        CurveId::Green,
        CurveId::Yellow,
        CurveId::PosRed,
        CurveId::PosGreen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveId::TruePowPs => "true_pow_ps",
            CurveId::TrueChia => "true_chia",
            CurveId::PssRed => "pss_red",
            CurveId::Green => "green",
            CurveId::Yellow => "yellow",
            CurveId::PosRed => "pos_red",
            CurveId::PosGreen => "pos_green",
        }
    }

    /// Defining equation in residual form `f(β) = 0`.
    pub fn residual(self, beta: f64, x: f64) -> f64 {
        let h = 1.0 - beta;
        match self {
            CurveId::TruePowPs => threshold_residual(beta, x, ThresholdModel::PowPs),
            CurveId::TrueChia => threshold_residual(beta, x, ThresholdModel::Chia),
            CurveId::PssRed => beta - h * (-2.0 * h * x).exp(),
            CurveId::Green => beta - h * (1.0 - 2.0 * x * h),
            CurveId::Yellow => beta - h * (1.0 - 10.0 * x * h),
            CurveId::PosRed => h / (1.0 + x) - 0.5,
            CurveId::PosGreen => h * (1.0 - x) - 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub lambda_delta: f64,
    pub curve_id: CurveId,
    /// `None` when the equation has no root in `[0, 1]`.
    pub beta: Option<f64>,
}

pub fn solve_curve(curve: CurveId, lambda_delta: f64) -> Option<f64> {
    bisect(|b| curve.residual(b, lambda_delta), 0.0, 1.0)
}

/// Parses `start:step:end` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("grid '{spec}': {e}")))?;
    match nums.as_slice() {
        [v] => Ok(vec![*v]),
        [start, step, end] if *step > 0.0 && end >= start => {
            let n = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(Error::InvalidArgument(format!(
            "grid '{spec}' must be start:step:end with step > 0"
        ))),
    }
}

pub fn default_grid() -> Vec<f64> {
    (0..=40).map(|i| i as f64 * 0.05).collect()
}

pub fn comparison_curves(grid: &[f64]) -> Vec<ThresholdPoint> {
    let mut out = Vec::with_capacity(grid.len() * CurveId::ALL.len());
    for &x in grid {
        for curve in CurveId::ALL {
            out.push(ThresholdPoint {
                lambda_delta: x,
                curve_id: curve,
                beta: solve_curve(curve, x),
            });
        }
    }
    out
}

pub fn curves_csv(points: &[ThresholdPoint]) -> String {
    let mut s = String::from("lambda_delta,curve_id,beta\n");
    for p in points {
        let beta = p.beta.map(|b| format!("{b:.12}")).unwrap_or_default();
        s.push_str(&format!("{:.4},{},{}\n", p.lambda_delta, p.curve_id.name(), beta));
    }
    s
}

/// Chernoff exponent for the event that `n` fictitious-chain level times outlast
/// `n + 1` adversary inter-arrival times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffRate {
    /// Optimal tilt.
    pub s: f64,
    /// `sΔ + ln(λ_a λ_h / ((λ_h − s)(λ_a + s)))`, evaluated literally. This is the
    /// per-step log moment generating function at `s`, so it is non-positive.
    pub a0_formula: f64,
    /// Decay rate supported by simulation: `P(B_n) ≈ e^{-rate · n}`. Equals `-a0_formula`.
    pub decay_rate: f64,
}

pub fn chernoff_rate_a0(lambda_a: f64, lambda_h: f64, delta: f64) -> Result<ChernoffRate> {
    if !(lambda_a > 0.0 && lambda_h > 0.0 && delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda_a = {lambda_a}, lambda_h = {lambda_h}, delta = {delta}"
        )));
    }
    let boundary = honest_growth_rate(lambda_h, delta);
    if lambda_a > boundary * (1.0 + 1e-12) {
        return Err(Error::OutOfRegime(format!(
            "lambda_a = {lambda_a} exceeds lambda_h / (1 + lambda_h delta) = {boundary}"
        )));
    }
    let sum = lambda_a + lambda_h;
    let s = if delta == 0.0 {
        (lambda_h - lambda_a) / 2.0
    } else {
        (lambda_h - lambda_a) / 2.0
            + (2.0 - (4.0 + delta * delta * sum * sum).sqrt()) / (2.0 * delta)
    };
    let a0 = s * delta + (lambda_a * lambda_h / ((lambda_h - s) * (lambda_a + s))).ln();
    let rate = if a0.abs() < 1e-12 { 0.0 } else { -a0 };
    Ok(ChernoffRate { s, a0_formula: a0, decay_rate: rate })
}
