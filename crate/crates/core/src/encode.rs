//! Scalar-to-spike-train conversion: rate, time-to-first-spike, inter-spike
//! interval, and Poisson schemes over a fixed encoding window.
//!
//! All encoders take values normalized to [0, 1].

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A fixed window of `length` ticks resolving `resolution` distinct levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingWindow {
    pub length: u64,
    pub resolution: u64,
}

impl EncodingWindow {
    pub fn new(length: u64, resolution: u64) -> Result<Self> {
        if length == 0 {
            return Err(Error::OutOfRange { what: "window length", value: 0.0 });
        }
        if resolution == 0 || resolution > length {
            return Err(Error::OutOfRange { what: "window resolution", value: resolution as f64 });
        }
        Ok(Self { length, resolution })
    }

    /// Window with one level per tick.
    pub fn ticks(length: u64) -> Result<Self> {
        Self::new(length, length)
    }
}

fn check_value(value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::OutOfRange { what: "encoded value", value });
    }
    Ok(())
}

/// Emits `round(value * T)` spikes spread evenly over the window.
pub fn rate_encode(value: f64, window: &EncodingWindow) -> Result<Vec<u64>> {
    check_value(value)?;
    let t = window.length;
    let count = (value * t as f64).round() as u64;
    Ok((0..count).map(|i| i * t / count.max(1)).collect())
}

/// Mean firing rate of the train: `N_spike / T`.
pub fn rate_decode(train: &[u64], window: &EncodingWindow) -> Result<f64> {
    for &tick in train {
        if tick >= window.length {
            return Err(Error::TickOutOfRange { tick, end: window.length });
        }
    }
    Ok(train.len() as f64 / window.length as f64)
}

/// Single-spike time-to-first-spike code: larger values spike earlier.
/// `tick = round((1 - value) * (T - 1))`; value 1 maps to tick 0 and
/// value 0 to the last tick.
pub fn ttfs_encode(value: f64, window: &EncodingWindow) -> Result<u64> {
    check_value(value)?;
    Ok(((1.0 - value) * (window.length - 1) as f64).round() as u64)
}

/// TTFS with the alternative zero convention: value 0 emits no spike at all
/// instead of a last-tick spike.
pub fn ttfs_encode_sparse(value: f64, window: &EncodingWindow) -> Result<Option<u64>> {
    check_value(value)?;
    if value == 0.0 {
        return Ok(None);
    }
    ttfs_encode(value, window).map(Some)
}

pub fn ttfs_decode(tick: u64, window: &EncodingWindow) -> Result<f64> {
    if tick >= window.length {
        return Err(Error::TickOutOfRange { tick, end: window.length });
    }
    if window.length == 1 {
        return Ok(1.0);
    }
    Ok(1.0 - tick as f64 / (window.length - 1) as f64)
}

/// Two-spike inter-spike-interval code: spikes at `{0, gap}` with
/// `gap = 1 + round(value * (T - 2))`. Requires `T >= 3`.
pub fn isi_encode(value: f64, window: &EncodingWindow) -> Result<[u64; 2]> {
    check_value(value)?;
    if window.length < 3 {
        return Err(Error::structure(format!(
            "ISI needs a window of at least 3 ticks, got {}",
            window.length
        )));
    }
    let gap = 1 + (value * (window.length - 2) as f64).round() as u64;
    Ok([0, gap])
}

pub fn isi_decode(train: &[u64; 2], window: &EncodingWindow) -> Result<f64> {
    if window.length < 3 {
        return Err(Error::structure("ISI needs a window of at least 3 ticks".to_string()));
    }
    if train[1] <= train[0] || train[1] >= window.length {
        return Err(Error::structure(format!("bad ISI train {:?}", train)));
    }
    let gap = train[1] - train[0];
    Ok((gap - 1) as f64 / (window.length - 2) as f64)
}

/// Stochastic rate code: each tick fires independently with probability `value`.
pub fn poisson_encode(value: f64, window: &EncodingWindow, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    check_value(value)?;
    Ok((0..window.length).filter(|_| rng.gen::<f64>() < value).collect())
}
