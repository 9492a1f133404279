//! Fractional Sobolev norms of time series on (0, T).
//!
//! A series of M + 1 samples is extended by even reflection to a periodic
//! sequence of length 2M, transformed, and mode k is weighted by
//! (1 + ω_k²)^s with ω_k = πk/T. With the normalization below the s = 0 norm
//! coincides with the composite trapezoid L² norm, and the weight operator
//! `apply_weight` is symmetric in the trapezoid inner product, so
//! `<W_s f, g>_trap = <f, g>_s` exactly.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ensure_finite, KdvError, Result};

pub const MIN_SAMPLES: usize = 4;

fn check(series: &[f64], horizon: f64) -> Result<()> {
    if series.len() < MIN_SAMPLES {
        return Err(KdvError::SeriesTooShort(series.len()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(KdvError::InvalidGrid(format!("horizon must be > 0, got {horizon}")));
    }
    ensure_finite(series, "time series")
}

fn reflect(series: &[f64]) -> Vec<Complex64> {
    let m = series.len() - 1;
    let mut out = Vec::with_capacity(2 * m);
    out.extend(series.iter().map(|&x| Complex64::new(x, 0.0)));
    out.extend(series[1..m].iter().rev().map(|&x| Complex64::new(x, 0.0)));
    out
}

fn weights(len: usize, s: f64, horizon: f64) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            let omega = std::f64::consts::PI * kk / horizon;
            (1.0 + omega * omega).powf(s)
        })
        .collect()
}

fn spectrum(series: &[f64]) -> Vec<Complex64> {
    let mut buf = reflect(series);
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf
}

/// Weighted inner product <f, g>_s.
pub fn sobolev_inner(f: &[f64], g: &[f64], s: f64, horizon: f64) -> Result<f64> {
    check(f, horizon)?;
    check(g, horizon)?;
    if f.len() != g.len() {
        return Err(KdvError::DimensionMismatch {
            what: "time series".into(),
            expected: f.len(),
            found: g.len(),
        });
    }
    let m = f.len() - 1;
    let dt = horizon / m as f64;
    let (ff, gg) = (spectrum(f), spectrum(g));
    let w = weights(2 * m, s, horizon);
    let acc: f64 = ff
        .iter()
        .zip(&gg)
        .zip(&w)
        .map(|((a, b), w)| w * (a * b.conj()).re)
        .sum();
    Ok(0.5 * dt * acc / (2 * m) as f64)
}

/// ‖f‖_{H^s(0,T)} in the reflected-DFT discretization; s = 0 is the trapezoid L² norm.
pub fn sobolev_trace_norm(series: &[f64], s: f64, horizon: f64) -> Result<f64> {
    check(series, horizon)?;
    if s == 0.0 {
        let m = series.len() - 1;
        let dt = horizon / m as f64;
        let sq: Vec<f64> = series.iter().map(|x| x * x).collect();
        return Ok(crate::model::trapezoid(&sq, dt).sqrt());
    }
    Ok(sobolev_inner(series, series, s, horizon)?.max(0.0).sqrt())
}

/// W_s f: multiply the reflected spectrum by the weights and restrict back to [0, T].
pub fn apply_weight(series: &[f64], s: f64, horizon: f64) -> Result<Vec<f64>> {
    check(series, horizon)?;
    if s == 0.0 {
        return Ok(series.to_vec());
    }
    let m = series.len() - 1;
    let mut buf = spectrum(series);
    let w = weights(2 * m, s, horizon);
    for (b, w) in buf.iter_mut().zip(&w) {
        *b *= *w;
    }
    let ifft = FftPlanner::new().plan_fft_inverse(buf.len());
    ifft.process(&mut buf);
    let scale = 1.0 / (2 * m) as f64;
    Ok(buf[..=m].iter().map(|c| c.re * scale).collect())
}
