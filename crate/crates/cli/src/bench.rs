//! Analytic and measured comparison of a fully connected output head
//! against a global-average-pooling head on the same feature map.
//!
//! The FC path flattens the `H x W x C` map into one vector feeding
//! `units` outputs. The GAP path pools to `C` channel means first and feeds
//! the same `units` outputs from there, shrinking the parameterized layer
//! by the spatial factor. Parameters and FLOPs come from the accounting
//! module; wall-clock numbers come from timed forward loops.

use std::hint::black_box;
use std::time::Instant;

use fatigue_core::tensor::accounting::{fc_accounting, gap_accounting};
use fatigue_core::tensor::ops::{fully_connected, global_average_pool};
use fatigue_core::tensor::FeatureMap;

use crate::report::RunReport;
use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct GapFcBenchConfig {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub units: usize,
    pub iterations: u64,
    pub seed: u64,
}

impl Default for GapFcBenchConfig {
    fn default() -> Self {
        // stand-in for a small detector's final map and head
        Self {
            height: 3,
            width: 3,
            channels: 32,
            units: 128,
            iterations: 10_000,
            seed: 0,
        }
    }
}

/// Deterministic pseudo-random fill; bit-stable across runs.
fn fill(seed: u64, len: usize) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

pub fn run_gap_fc_bench(config: &GapFcBenchConfig) -> Result<RunReport, CliError> {
    let GapFcBenchConfig {
        height: h,
        width: w,
        channels: c,
        units,
        iterations,
        seed,
    } = *config;
    if h == 0 || w == 0 || c == 0 || units == 0 || iterations == 0 {
        return Err(CliError::Usage(
            "bench dimensions and iterations must be positive".into(),
        ));
    }

    let flat = h * w * c;
    let fc_head = fc_accounting(flat, units);
    let gap_pool = gap_accounting(h, w, c);
    let gap_head = fc_accounting(c, units);
    let gap_path_params = gap_pool.param_count + gap_head.param_count;
    let gap_path_flops = gap_pool.flop_count + gap_head.flop_count;

    let input = FeatureMap::new(h, w, c, fill(seed, flat)).map_err(CliError::data)?;
    let fc_weights = fill(seed ^ 0xfc, flat * units);
    let fc_bias = fill(seed ^ 0xb1a5, units);
    let gap_weights = fill(seed ^ 0x6a9, c * units);

    let fc_ns = {
        let start = Instant::now();
        for _ in 0..iterations {
            let out =
                fully_connected(black_box(input.as_slice()), &fc_weights, &fc_bias).unwrap();
            black_box(out);
        }
        start.elapsed().as_nanos() as f64 / iterations as f64
    };
    let gap_ns = {
        let start = Instant::now();
        for _ in 0..iterations {
            let pooled = global_average_pool(black_box(&input));
            let out = fully_connected(&pooled, &gap_weights, &fc_bias).unwrap();
            black_box(out);
        }
        start.elapsed().as_nanos() as f64 / iterations as f64
    };

    let mut report = RunReport::new();
    report.push("bench", "gap_vs_fc_head");
    report.push("height", h);
    report.push("width", w);
    report.push("channels", c);
    report.push("units", units);
    report.push("iterations", iterations);
    report.push("seed", seed);
    report.push("fc_head_params", fc_head.param_count);
    report.push("fc_head_flops", fc_head.flop_count);
    report.push("gap_params", gap_pool.param_count);
    report.push("gap_head_params", gap_head.param_count);
    report.push("gap_path_params", gap_path_params);
    report.push("gap_path_flops", gap_path_flops);
    report.push(
        "param_reduction_ratio",
        gap_path_params as f64 / fc_head.param_count as f64,
    );
    report.push(
        "flop_ratio",
        gap_path_flops as f64 / fc_head.flop_count as f64,
    );
    report.push("fc_forward_time_ms", fc_ns / 1e6);
    report.push("gap_forward_time_ms", gap_ns / 1e6);
    report.push("forward_time_ratio", gap_ns / fc_ns);
    Ok(report)
}
