use std::f64::consts::PI;

use super::lm::Point;
use super::models::RabiParams;
use crate::error::{Error, Result};

fn sorted_by_x(data: &[Point]) -> Vec<Point> {
    let mut d = data.to_vec();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    d
}

/// (amplitude, center, fwhm, offset) from the peak and the half-maximum
/// crossings, falling back to the second moment when the half maximum is
/// not bracketed.
pub fn lorentzian_initial(data: &[Point]) -> Result<[f64; 4]> {
    if data.len() < 4 {
        return Err(Error::Fit("need at least four points".into()));
    }
    let d = sorted_by_x(data);
    let offset = d.first().unwrap().1.min(d.last().unwrap().1);
    let (peak_idx, peak) = d
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 .1).total_cmp(&b.1 .1))
        .map(|(i, p)| (i, *p))
        .unwrap();
    let amplitude = peak.1 - offset;
    let half = offset + 0.5 * amplitude;
    let cross = |a: &Point, b: &Point| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let left = (1..=peak_idx).rev().find(|&i| d[i - 1].1 < half).map(|i| cross(&d[i - 1], &d[i]));
    let right = (peak_idx..d.len() - 1).find(|&i| d[i + 1].1 < half).map(|i| cross(&d[i], &d[i + 1]));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (peak.0 - l),
        (None, Some(r)) => 2.0 * (r - peak.0),
        (None, None) => {
            let w: f64 = d.iter().map(|p| (p.1 - offset).max(0.0)).sum();
            let var = d.iter().map(|p| (p.1 - offset).max(0.0) * (p.0 - peak.0).powi(2)).sum::<f64>() / w;
            2.0 * var.sqrt()
        }
    };
    if !(fwhm > 0.0) || !(amplitude > 0.0) {
        return Err(Error::Fit("no peak found".into()));
    }
    Ok([amplitude, peak.0, fwhm, offset])
}

/// Pulse length (µs) from the strongest component of the periodogram of
/// y(ω): the revivals repeat every 1/t in ω.
pub fn pulse_length_guess(data: &[Point]) -> Result<f64> {
    let d = sorted_by_x(data);
    if d.len() < 8 {
        return Err(Error::Fit("need at least eight points".into()));
    }
    let span = d.last().unwrap().0 - d.first().unwrap().0;
    let step = d.windows(2).map(|w| w[1].0 - w[0].0).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !step.is_finite() {
        return Err(Error::Fit("degenerate abscissa".into()));
    }
    let mean = d.iter().map(|p| p.1).sum::<f64>() / d.len() as f64;
    // at least two revivals in the span, up to Nyquist
    let (t_lo, t_hi) = (2.0 / span, 0.5 / step);
    let samples = 4000;
    let power = |t: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for p in &d {
            let phase = 2.0 * PI * p.0 * t;
            re += (p.1 - mean) * phase.cos();
            im += (p.1 - mean) * phase.sin();
        }
        re * re + im * im
    };
    (0..=samples)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / samples as f64)
        .map(|t| (t, power(t)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .ok_or_else(|| Error::Fit("empty periodogram".into()))
}

/// 𝒩 from the duty cycle: [cos²x]^𝒩 stays above half its peak for a
/// fraction f = 2·acos(2^{−1/(2𝒩)})/π of each period.
pub fn polariton_number_from_duty_cycle(fraction: f64) -> f64 {
    let x_half = 0.5 * PI * fraction.clamp(1e-3, 0.999);
    (-(2f64.ln()) / (2.0 * x_half.cos().ln())).clamp(0.3, 20.0)
}

/// Initial Rabi parameters: background and amplitude from the extremes,
/// 𝒩 from the duty cycle of the high-frequency half, envelope and decay
/// scales from the scanned range.
pub fn rabi_initial(data: &[Point]) -> Result<RabiParams> {
    let d = sorted_by_x(data);
    if d.len() < 8 {
        return Err(Error::Fit("need at least eight points".into()));
    }
    let b = d.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let top = d.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let a = top - b;
    if !(a > 0.0) {
        return Err(Error::Fit("flat data".into()));
    }
    let (lo, hi) = (d.first().unwrap().0, d.last().unwrap().0);
    let tail: Vec<&Point> = d.iter().filter(|p| p.0 >= 0.5 * (lo + hi)).collect();
    let tail_top = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let above = tail.iter().filter(|p| p.1 - b > 0.5 * (tail_top - b)).count();
    let n = polariton_number_from_duty_cycle(above as f64 / tail.len() as f64);
    let scale = ((hi - lo) / 8.0).max(lo).max(1e-3);
    Ok(RabiParams {
        a,
        n,
        omega_env: scale,
        omega_decay: scale,
        b,
    })
}
