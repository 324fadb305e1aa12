//! Cycle and buffer accounting for the streamed NTT datapath.
//!
//! An `N`-point transform at throughput `T` is split into `log(N/T)` streamed
//! stages, each with a `T/2`-butterfly block and an output buffer of
//! `¾·N/2^i` words, followed by one fully parallel `T`-point stage with no
//! buffer. A new transform enters every `N/T` cycles.
//!
//! Latency is first input to first output: every streamed stage waits for
//! half of one of its sub-transforms (`N/(2^(i+1)·T)` cycles) and every stage
//! adds [`PIPELINE_REGISTER_DEPTH`] register cycles.

use crate::error::Result;
use crate::ntt::NttConfig;

/// Register depth per stage (Karatsuba multiplier, reduction, adders).
///
/// Single calibration constant: gives 701 cycles at `N = 1024, T = 2`
/// against the 700 measured on the FPGA.
pub const PIPELINE_REGISTER_DEPTH: u64 = 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    Streamed,
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageInfo {
    pub index: u32,
    pub kind: StageKind,
    /// Size of the sub-transforms this stage works on.
    pub points: u64,
    pub butterflies_per_block: u64,
    /// Butterflies evaluated per transform (always `N/2`).
    pub butterflies: u64,
    pub buffer_words: u64,
    pub start_delay: u64,
    pub register_depth: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageModel {
    pub size: u64,
    pub throughput: u64,
    pub stages: Vec<StageInfo>,
    pub interval_cycles: u64,
    pub latency_cycles: u64,
    pub buffer_words: u64,
}

impl StageModel {
    pub fn streamed_stages(&self) -> usize {
        self.stages.iter().filter(|s| s.kind == StageKind::Streamed).count()
    }

    /// `¾·N·Σ_{i=0}^{log(N/T)} 2^{-i}`, the upper bound on buffered words.
    pub fn buffer_bound(&self) -> f64 {
        let s = self.streamed_stages() as i32;
        let sum: f64 = (0..=s).map(|i| 2f64.powi(-i)).sum();
        0.75 * self.size as f64 * sum
    }
}

pub fn stage_schedule(cfg: &NttConfig) -> Result<StageModel> {
    let n = cfg.size() as u64;
    let t = cfg.throughput() as u64;
    let streamed = (n / t).trailing_zeros();
    let mut stages = Vec::with_capacity(streamed as usize + 1);

    for i in 0..streamed {
        let points = n >> i;
        stages.push(StageInfo {
            index: i,
            kind: StageKind::Streamed,
            points,
            butterflies_per_block: t / 2,
            butterflies: n / 2,
            buffer_words: 3 * points / 4,
            start_delay: points / (2 * t),
            register_depth: PIPELINE_REGISTER_DEPTH,
        });
    }
    stages.push(StageInfo {
        index: streamed,
        kind: StageKind::Parallel,
        points: t,
        butterflies_per_block: t / 2 * t.trailing_zeros() as u64,
        butterflies: n / 2 * t.trailing_zeros() as u64,
        buffer_words: 0,
        start_delay: 0,
        register_depth: PIPELINE_REGISTER_DEPTH,
    });

    let latency_cycles = stages.iter().map(|s| s.start_delay + s.register_depth).sum();
    let buffer_words = stages.iter().map(|s| s.buffer_words).sum();
    Ok(StageModel {
        size: n,
        throughput: t,
        stages,
        interval_cycles: n / t,
        latency_cycles,
        buffer_words,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NttTiming {
    pub interval_cycles: u64,
    pub latency_cycles: u64,
    pub ntts_per_ms: f64,
    pub latency_us: f64,
}

pub fn ntt_cycle_model(cfg: &NttConfig, freq_hz: f64) -> Result<NttTiming> {
    if !(freq_hz > 0.0) {
        return Err(crate::Error::InvalidModelInput(format!(
            "frequency must be positive, got {freq_hz}"
        )));
    }
    let model = stage_schedule(cfg)?;
    Ok(NttTiming {
        interval_cycles: model.interval_cycles,
        latency_cycles: model.latency_cycles,
        ntts_per_ms: freq_hz / model.interval_cycles as f64 / 1000.0,
        latency_us: model.latency_cycles as f64 / freq_hz * 1e6,
    })
}
