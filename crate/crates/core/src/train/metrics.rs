use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of the metrics log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub epoch: usize,
    /// `train` for per-interval training records, `valid` for the epoch-end
    /// validation pass.
    pub split: String,
    pub loss_nats: f64,
    pub bpc: f64,
    pub chars_per_sec: f64,
    pub wall_ms: f64,
    /// Gradient-clipping events inside this interval.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub clipped: u64,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

pub trait MetricsSink {
    fn record(&mut self, rec: &MetricsRecord) -> Result<()>;
}

impl MetricsSink for Vec<MetricsRecord> {
    fn record(&mut self, rec: &MetricsRecord) -> Result<()> {
        self.push(rec.clone());
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl MetricsSink for NullSink {
    fn record(&mut self, _: &MetricsRecord) -> Result<()> {
        Ok(())
    }
}

/// Append-only JSON lines.
pub struct JsonLinesSink<W: Write> {
    out: W,
}

impl<W: Write> JsonLinesSink<W> {
    pub fn new(out: W) -> Self {
        JsonLinesSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl JsonLinesSink<BufWriter<File>> {
    pub fn append(path: &Path) -> Result<Self> {
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(JsonLinesSink::new(BufWriter::new(f)))
    }
}

impl<W: Write> MetricsSink for JsonLinesSink<W> {
    fn record(&mut self, rec: &MetricsRecord) -> Result<()> {
        let line = serde_json::to_string(rec).map_err(|e| Error::Contract(e.to_string()))?;
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io("<metrics>", e))
    }
}

/// Source of elapsed wall time. Injected so tests can make metrics streams
/// reproducible bit for bit.
pub trait Clock {
    /// Milliseconds since the clock was created.
    fn elapsed_ms(&mut self) -> f64;
}

pub struct SystemClock(Instant);

impl SystemClock {
    pub fn start() -> Self {
        SystemClock(Instant::now())
    }
}

impl Clock for SystemClock {
    fn elapsed_ms(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Advances by a fixed amount on every reading.
pub struct TickClock {
    now: f64,
    tick: f64,
}

impl TickClock {
    pub fn new(tick_ms: f64) -> Self {
        TickClock { now: 0.0, tick: tick_ms }
    }
}

impl Clock for TickClock {
    fn elapsed_ms(&mut self) -> f64 {
        self.now += self.tick;
        self.now
    }
}
