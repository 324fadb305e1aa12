//! Cycle, latency and bandwidth model of the pipelined processor.
//!
//! One PBS issues every `n·(k+1)·⌈N/T⌉` cycles: each of the `n` blind-rotation
//! iterations streams `k + 1` polynomials through NTT lanes that accept `T`
//! coefficients per cycle. Batching `b` ciphertexts lets one GGSW element
//! serve `b` iterations, trading latency for key bandwidth.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntt::{ntt_cycle_model, NttConfig};
use crate::processor::isa::{base_bits, Instruction, Opcode};
use crate::tfhe::TfheParams;

const WORD_BYTES: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    /// Coefficients per cycle `T`.
    pub throughput: usize,
    pub freq_hz: f64,
    /// PBS batch size; derived from `mem_bw` when absent.
    pub batch_size: Option<u64>,
    /// Key bandwidth available to the PBS module, bytes/s.
    pub mem_bw: Option<f64>,
}

impl ExecConfig {
    pub fn new(throughput: usize, freq_hz: f64) -> Self {
        Self {
            throughput,
            freq_hz,
            batch_size: None,
            mem_bw: None,
        }
    }

    pub fn with_batch(mut self, batch: u64) -> Self {
        self.batch_size = Some(batch);
        self
    }

    pub fn with_mem_bw(mut self, bytes_per_s: f64) -> Self {
        self.mem_bw = Some(bytes_per_s);
        self
    }

    pub fn validate(&self, params: &TfheParams) -> Result<NttConfig> {
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(Error::InvalidModelInput(format!(
                "frequency must be positive, got {}",
                self.freq_hz
            )));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidModelInput("batch size must be at least 1".into()));
        }
        if let Some(bw) = self.mem_bw {
            if !(bw > 0.0) {
                return Err(Error::InvalidModelInput(format!(
                    "memory bandwidth must be positive, got {bw}"
                )));
            }
        }
        NttConfig::new(params.poly_size, self.throughput)
    }
}

/// A published FPGA configuration and its reported figures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceConfig {
    pub params: &'static str,
    pub throughput: usize,
    pub freq_mhz: f64,
    pub pbs_per_s: f64,
    pub delay_ms: Option<f64>,
    /// Batch implied by the reported delay.
    pub batch: u64,
    /// Per-module key bandwidth that reproduces `batch` under [`batch_schedule`].
    pub mem_bw_gbs: f64,
}

pub const REFERENCE_CONFIGS: [ReferenceConfig; 6] = [
    ReferenceConfig {
        params: "standard",
        throughput: 2,
        freq_mhz: 575.0,
        pbs_per_s: 1123.0,
        delay_ms: Some(2.67),
        batch: 3,
        mem_bw_gbs: 16.0,
    },
    ReferenceConfig {
        params: "standard",
        throughput: 4,
        freq_mhz: 525.0,
        pbs_per_s: 2050.0,
        delay_ms: Some(1.95),
        batch: 4,
        mem_bw_gbs: 20.0,
    },
    ReferenceConfig {
        params: "standard",
        throughput: 8,
        freq_mhz: 450.0,
        pbs_per_s: 3516.0,
        delay_ms: Some(1.42),
        batch: 5,
        mem_bw_gbs: 25.6,
    },
    ReferenceConfig {
        params: "standard",
        throughput: 16,
        freq_mhz: 400.0,
        pbs_per_s: 6250.0,
        delay_ms: Some(0.96),
        batch: 6,
        mem_bw_gbs: 38.4,
    },
    ReferenceConfig {
        params: "standard",
        throughput: 32,
        freq_mhz: 325.0,
        pbs_per_s: 10156.0,
        delay_ms: Some(0.88),
        batch: 9,
        mem_bw_gbs: 38.4,
    },
    ReferenceConfig {
        params: "large",
        throughput: 8,
        freq_mhz: 400.0,
        pbs_per_s: 122.0,
        delay_ms: None,
        batch: 3,
        mem_bw_gbs: 102.4,
    },
];

/// NTT reference point: `N = 1024, T = 2` at 600 MHz, 1172 NTTs/ms, 700 cycles.
pub const REFERENCE_NTT: (usize, usize, f64, f64, u64) = (1024, 2, 600e6, 1172.0, 700);

/// Reported internal bandwidths at `T = 32`, GB/s: PBS, KS, total.
pub const REFERENCE_INTERNAL_BW_GBS: (f64, f64, f64) = (93.0, 73.0, 166.0);

/// Reported instruction-stream bandwidth, bits/s.
pub const REFERENCE_EXTERNAL_BW: f64 = 3e6;

/// Other designs' rates and decryption-failure exponents.
pub const REFERENCE_DFR: [(&str, f64, f64, f64); 2] = [("FPT", 25000.0, -15.0, 5860.0), ("ALT", 6506.0, -32.0, 3253.0)];

impl ReferenceConfig {
    pub fn params(&self) -> TfheParams {
        TfheParams::preset(self.params).expect("reference presets exist")
    }

    pub fn exec_config(&self) -> ExecConfig {
        ExecConfig::new(self.throughput, self.freq_mhz * 1e6).with_batch(self.batch)
    }
}

pub fn reference_for(params: &TfheParams, throughput: usize) -> Option<&'static ReferenceConfig> {
    REFERENCE_CONFIGS
        .iter()
        .find(|r| r.params == params.name && r.throughput == throughput)
}

/// `n·(k+1)·⌈N/T⌉`.
pub fn pbs_cycle_model(params: &TfheParams, cfg: &ExecConfig) -> Result<u64> {
    cfg.validate(params)?;
    Ok(
        params.lwe_dim as u64
            * (params.glwe_dim as u64 + 1)
            * (params.poly_size as u64).div_ceil(cfg.throughput as u64),
    )
}

pub fn pbs_per_second(params: &TfheParams, cfg: &ExecConfig) -> Result<f64> {
    Ok(cfg.freq_hz / pbs_cycle_model(params, cfg)? as f64)
}

/// Cycles the PBS pipeline spends on one blind-rotation iteration.
pub fn iteration_cycles(params: &TfheParams, cfg: &ExecConfig) -> u64 {
    (params.glwe_dim as u64 + 1) * (params.poly_size as u64).div_ceil(cfg.throughput as u64)
}

/// Bytes of one evaluation-domain GGSW element, `(k+1)²·ℓ·N·8`.
pub fn ggsw_bytes(params: &TfheParams) -> u64 {
    let k1 = params.glwe_dim as u64 + 1;
    k1 * k1 * params.pbs_decomp.ell as u64 * params.poly_size as u64 * WORD_BYTES
}

/// Bytes of the key-switching key, `kN·ℓ_ks·(n+1)·8`.
pub fn ksk_bytes(params: &TfheParams) -> u64 {
    params.extracted_dim() as u64 * params.ks_decomp.ell as u64 * (params.lwe_dim as u64 + 1) * WORD_BYTES
}

/// Smallest batch for which one GGSW element loads within `b` iterations.
pub fn batch_schedule(params: &TfheParams, cfg: &ExecConfig, element_bytes: u64, mem_bw: f64) -> Result<u64> {
    cfg.validate(params)?;
    if !(mem_bw > 0.0) {
        return Err(Error::InvalidModelInput(format!(
            "memory bandwidth must be positive, got {mem_bw}"
        )));
    }
    if mem_bw.is_infinite() {
        return Ok(1);
    }
    let load_cycles = element_bytes as f64 * cfg.freq_hz / mem_bw;
    let b = (load_cycles / iteration_cycles(params, cfg) as f64).ceil() as u64;
    Ok(b.max(1))
}

/// Batch from the config, else from its bandwidth, else the stored
/// reference batch, else 1.
pub fn effective_batch(params: &TfheParams, cfg: &ExecConfig) -> Result<u64> {
    if let Some(b) = cfg.batch_size {
        return Ok(b);
    }
    if let Some(bw) = cfg.mem_bw {
        return batch_schedule(params, cfg, ggsw_bytes(params), bw);
    }
    Ok(reference_for(params, cfg.throughput).map_or(1, |r| r.batch))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyEstimate {
    pub batch: u64,
    pub latency_ms: f64,
    /// NTT pipeline fill, reported separately.
    pub fill_cycles: u64,
    pub latency_with_fill_ms: f64,
}

/// `batch · interval / f`.
pub fn pbs_latency_model(params: &TfheParams, cfg: &ExecConfig) -> Result<LatencyEstimate> {
    let ntt_cfg = cfg.validate(params)?;
    let interval = pbs_cycle_model(params, cfg)?;
    let batch = effective_batch(params, cfg)?;
    let fill_cycles = ntt_cycle_model(&ntt_cfg, cfg.freq_hz)?.latency_cycles;
    let latency_ms = batch as f64 * interval as f64 / cfg.freq_hz * 1e3;
    Ok(LatencyEstimate {
        batch,
        latency_ms,
        fill_cycles,
        latency_with_fill_ms: latency_ms + fill_cycles as f64 / cfg.freq_hz * 1e3,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsThroughput {
    /// Coefficients per cycle of the key-switch module.
    pub lanes: u64,
    /// Key-switch input length after padding to a multiple of `lanes`.
    pub padded_input: u64,
}

/// Smallest power of two `≥ T/n`, so the KS module keeps pace with PBS.
pub fn ks_throughput(throughput: usize, params: &TfheParams) -> KsThroughput {
    let lanes = (throughput as u64).div_ceil(params.lwe_dim as u64).next_power_of_two();
    KsThroughput {
        lanes,
        padded_input: (params.extracted_dim() as u64).div_ceil(lanes) * lanes,
    }
}

pub fn ks_cycles(params: &TfheParams, cfg: &ExecConfig) -> u64 {
    let ks = ks_throughput(cfg.throughput, params);
    ks.padded_input / ks.lanes
}

pub fn mul_add_cycles(params: &TfheParams, cfg: &ExecConfig) -> u64 {
    let ks = ks_throughput(cfg.throughput, params);
    (params.lwe_dim as u64 + 1).div_ceil(ks.lanes)
}

pub fn instruction_cycles(ins: &Instruction, params: &TfheParams, cfg: &ExecConfig) -> Result<u64> {
    Ok(match ins.opcode {
        Opcode::Pbs => pbs_cycle_model(params, cfg)?,
        Opcode::Ks => ks_cycles(params, cfg),
        Opcode::MulAdd => mul_add_cycles(params, cfg),
    })
}

/// Sequential cycle estimate of a program (no overlap between modules).
pub fn program_cycles(program: &[Instruction], params: &TfheParams, cfg: &ExecConfig) -> Result<u64> {
    program.iter().map(|i| instruction_cycles(i, params, cfg)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalBandwidth {
    pub pbs_bytes_per_s: f64,
    pub ks_bytes_per_s: f64,
    pub total_bytes_per_s: f64,
    pub assumptions: Vec<String>,
}

/// Key traffic: one GGSW element per iteration shared by `batch` PBS, and
/// the whole key-switching key once per key switch at the PBS rate.
pub fn internal_bandwidth(params: &TfheParams, cfg: &ExecConfig, batch: u64) -> Result<InternalBandwidth> {
    cfg.validate(params)?;
    if batch == 0 {
        return Err(Error::InvalidModelInput("batch size must be at least 1".into()));
    }
    let iter_s = iteration_cycles(params, cfg) as f64 / cfg.freq_hz;
    let pbs = ggsw_bytes(params) as f64 / (iter_s * batch as f64);
    let ks = ksk_bytes(params) as f64 * pbs_per_second(params, cfg)?;
    Ok(InternalBandwidth {
        pbs_bytes_per_s: pbs,
        ks_bytes_per_s: ks,
        total_bytes_per_s: pbs + ks,
        assumptions: vec![
            format!("64-bit words; keys stored in the evaluation domain"),
            format!("GGSW element = (k+1)^2*l*N words = {} bytes", ggsw_bytes(params)),
            format!(
                "one GGSW element per {} cycles, amortised over batch {batch}",
                iteration_cycles(params, cfg)
            ),
            format!(
                "KSK = kN*l_ks*(n+1) words = {} bytes, streamed once per key switch",
                ksk_bytes(params)
            ),
            "one key switch per PBS; no on-chip reuse of the KSK".to_string(),
        ],
    })
}

/// Instruction-stream bits/s: one PBS and one KS word per bootstrap.
pub fn external_bandwidth(params: &TfheParams, pbs_rate: f64) -> Result<f64> {
    if !(pbs_rate >= 0.0 && pbs_rate.is_finite()) {
        return Err(Error::InvalidModelInput(format!(
            "PBS rate must be non-negative, got {pbs_rate}"
        )));
    }
    Ok(pbs_rate * 2.0 * base_bits(params.poly_size) as f64)
}

/// Rate rescaled to a failure rate of `2^-64`: `rate · exponent / −64`.
pub fn dfr_normalize(rate: f64, dfr_exponent: f64) -> Result<f64> {
    if !(dfr_exponent < 0.0) {
        return Err(Error::NonNegativeDfrExponent(dfr_exponent));
    }
    Ok(rate * (dfr_exponent / -64.0))
}

/// Flat summary of every model output for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub params: String,
    pub n: usize,
    pub poly_size: usize,
    pub glwe_dim: usize,
    pub throughput: usize,
    pub freq_hz: f64,
    pub batch: u64,
    pub ntt_interval_cycles: u64,
    pub ntt_latency_cycles: u64,
    pub ntts_per_ms: f64,
    pub pbs_interval_cycles: u64,
    pub pbs_per_s: f64,
    pub latency_ms: f64,
    pub fill_cycles: u64,
    pub ks_lanes: u64,
    pub ks_cycles: u64,
    pub muladd_cycles: u64,
    pub ext_bw_bits_per_s: f64,
    pub int_bw_pbs_bytes_per_s: f64,
    pub int_bw_ks_bytes_per_s: f64,
    pub int_bw_total_bytes_per_s: f64,
    pub dfr_exponent: f64,
    pub dfr_normalized_pbs_per_s: f64,
}

pub fn report(params: &TfheParams, cfg: &ExecConfig) -> Result<CostReport> {
    let ntt_cfg = cfg.validate(params)?;
    let ntt = ntt_cycle_model(&ntt_cfg, cfg.freq_hz)?;
    let interval = pbs_cycle_model(params, cfg)?;
    let rate = cfg.freq_hz / interval as f64;
    let lat = pbs_latency_model(params, cfg)?;
    let bw = internal_bandwidth(params, cfg, lat.batch)?;
    let dfr_exponent = -64.0;
    Ok(CostReport {
        params: params.name.clone(),
        n: params.lwe_dim,
        poly_size: params.poly_size,
        glwe_dim: params.glwe_dim,
        throughput: cfg.throughput,
        freq_hz: cfg.freq_hz,
        batch: lat.batch,
        ntt_interval_cycles: ntt.interval_cycles,
        ntt_latency_cycles: ntt.latency_cycles,
        ntts_per_ms: ntt.ntts_per_ms,
        pbs_interval_cycles: interval,
        pbs_per_s: rate,
        latency_ms: lat.latency_ms,
        fill_cycles: lat.fill_cycles,
        ks_lanes: ks_throughput(cfg.throughput, params).lanes,
        ks_cycles: ks_cycles(params, cfg),
        muladd_cycles: mul_add_cycles(params, cfg),
        ext_bw_bits_per_s: external_bandwidth(params, rate)?,
        int_bw_pbs_bytes_per_s: bw.pbs_bytes_per_s,
        int_bw_ks_bytes_per_s: bw.ks_bytes_per_s,
        int_bw_total_bytes_per_s: bw.total_bytes_per_s,
        dfr_exponent,
        dfr_normalized_pbs_per_s: dfr_normalize(rate, dfr_exponent)?,
    })
}

pub fn reports_to_csv<W: io::Write>(reports: &[CostReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in reports {
        wr.serialize(r)?;
    }
    wr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn reports_from_csv<R: io::Read>(r: R) -> Result<Vec<CostReport>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Model value against a reported figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: String,
    pub model: f64,
    pub reference: f64,
    pub rel_delta: f64,
}

impl Comparison {
    pub fn new(metric: impl Into<String>, model: f64, reference: f64) -> Self {
        Self {
            metric: metric.into(),
            model,
            reference,
            rel_delta: (model - reference) / reference,
        }
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.rel_delta.abs() <= tolerance
    }
}

/// Side-by-side rows for a report whose configuration has reference figures.
pub fn compare(report: &CostReport) -> Vec<Comparison> {
    let mut rows = Vec::new();
    let (n, t, f, ntts, lat) = REFERENCE_NTT;
    if report.poly_size == n && report.throughput == t && report.freq_hz == f {
        rows.push(Comparison::new("ntts_per_ms", report.ntts_per_ms, ntts));
        rows.push(Comparison::new(
            "ntt_latency_cycles",
            report.ntt_latency_cycles as f64,
            lat as f64,
        ));
    }
    if let Some(r) = REFERENCE_CONFIGS
        .iter()
        .find(|r| r.params == report.params && r.throughput == report.throughput && r.freq_mhz * 1e6 == report.freq_hz)
    {
        rows.push(Comparison::new("pbs_per_s", report.pbs_per_s, r.pbs_per_s));
        if let Some(d) = r.delay_ms {
            rows.push(Comparison::new("latency_ms", report.latency_ms, d));
        }
        if r.params == "standard" && r.throughput == 32 {
            let (p, k, tot) = REFERENCE_INTERNAL_BW_GBS;
            rows.push(Comparison::new(
                "int_bw_pbs_gbs",
                report.int_bw_pbs_bytes_per_s / 1e9,
                p,
            ));
            rows.push(Comparison::new("int_bw_ks_gbs", report.int_bw_ks_bytes_per_s / 1e9, k));
            rows.push(Comparison::new(
                "int_bw_total_gbs",
                report.int_bw_total_bytes_per_s / 1e9,
                tot,
            ));
            rows.push(Comparison::new(
                "ext_bw_bits_per_s",
                report.ext_bw_bits_per_s,
                REFERENCE_EXTERNAL_BW,
            ));
        }
    }
    rows
}

/// Reports for every reference configuration.
pub fn reference_reports() -> Result<Vec<CostReport>> {
    REFERENCE_CONFIGS
        .iter()
        .map(|r| report(&r.params(), &r.exec_config()))
        .collect()
}
