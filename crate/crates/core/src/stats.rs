//! Order statistics over end-to-end latencies.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min_ms: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

/// Latency summary. `summary` is `None` when no sample completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub lost: usize,
    pub summary: Option<Summary>,
}

impl LatencyStats {
    pub fn mean_ms(&self) -> Option<f64> {
        self.summary.map(|s| s.mean_ms)
    }
}

/// Linear-interpolation quantile over sorted data (rank `q * (n - 1)`).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn summarize(samples: &[f64], lost: usize) -> LatencyStats {
    if samples.is_empty() {
        return LatencyStats {
            count: 0,
            lost,
            summary: None,
        };
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Sum in sorted order so permutations of the input give identical means.
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    LatencyStats {
        count: sorted.len(),
        lost,
        summary: Some(Summary {
            min_ms: min,
            mean_ms: mean.clamp(min, max),
            median_ms: quantile(&sorted, 0.5),
            p95_ms: quantile(&sorted, 0.95),
            max_ms: max,
        }),
    }
}
