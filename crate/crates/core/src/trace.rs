//! Convergence traces: per-iteration records and restart events.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Instant;

/// One sample of a solver trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub run_id: u64,
    /// Cumulative iteration counter (across restarts).
    pub k: u64,
    pub coord_updates: u64,
    /// `coord_updates / n`.
    pub epoch: f64,
    pub objective: f64,
    /// `F - F_ref` when a reference optimum is known.
    pub gap_to_ref: Option<f64>,
    pub duality_gap: f64,
    pub elapsed_seconds: f64,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str =
        "run_id,k,coord_updates,epoch,F,F_minus_Fref,duality_gap,elapsed_seconds";

    pub fn to_csv_row(&self) -> String {
        let mut s = String::with_capacity(96);
        write!(
            s,
            "{},{},{},{},{},",
            self.run_id, self.k, self.coord_updates, self.epoch, self.objective
        )
        .unwrap();
        if let Some(d) = self.gap_to_ref {
            write!(s, "{d}").unwrap();
        }
        write!(s, ",{},{}", self.duality_gap, self.elapsed_seconds).unwrap();
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kept {
    Candidate,
    Previous,
}

impl Kept {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kept::Candidate => "candidate",
            Kept::Previous => "previous",
        }
    }
}

/// Outcome of one restart boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartEvent {
    pub run_id: u64,
    pub restart_index: usize,
    pub period: u64,
    /// `F` at the point the run started from.
    pub f_before: f64,
    /// `F` at the candidate the run produced.
    pub f_after: f64,
    pub kept: Kept,
}

impl RestartEvent {
    pub const CSV_HEADER: &'static str = "run_id,restart_index,K_r,F_before,F_after,kept";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.run_id,
            self.restart_index,
            self.period,
            self.f_before,
            self.f_after,
            self.kept.as_str()
        )
    }

    /// Objective of the point kept after this boundary.
    pub fn f_kept(&self) -> f64 {
        match self.kept {
            Kept::Candidate => self.f_after,
            Kept::Previous => self.f_before,
        }
    }
}

pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord);

    fn restart(&mut self, _event: &RestartEvent) {}
}

impl<T: TraceSink + ?Sized> TraceSink for &mut T {
    fn record(&mut self, rec: &TraceRecord) {
        (**self).record(rec)
    }

    fn restart(&mut self, event: &RestartEvent) {
        (**self).restart(event)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _rec: &TraceRecord) {}
}

#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub records: Vec<TraceRecord>,
    pub restarts: Vec<RestartEvent>,
}

impl TraceSink for MemorySink {
    fn record(&mut self, rec: &TraceRecord) {
        self.records.push(rec.clone());
    }

    fn restart(&mut self, event: &RestartEvent) {
        self.restarts.push(event.clone());
    }
}

/// Streams records and restart events as CSV to two writers. The first I/O
/// error is kept and reported by [`CsvSink::finish`].
pub struct CsvSink<W: Write, R: Write> {
    records: W,
    restarts: R,
    error: Option<io::Error>,
}

impl<W: Write, R: Write> CsvSink<W, R> {
    pub fn new(mut records: W, mut restarts: R) -> io::Result<Self> {
        writeln!(records, "{}", TraceRecord::CSV_HEADER)?;
        writeln!(restarts, "{}", RestartEvent::CSV_HEADER)?;
        Ok(CsvSink { records, restarts, error: None })
    }

    pub fn finish(mut self) -> io::Result<(W, R)> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.records.flush()?;
        self.restarts.flush()?;
        Ok((self.records, self.restarts))
    }
}

impl<W: Write, R: Write> TraceSink for CsvSink<W, R> {
    fn record(&mut self, rec: &TraceRecord) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.records, "{}", rec.to_csv_row()) {
                self.error = Some(e);
            }
        }
    }

    fn restart(&mut self, event: &RestartEvent) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.restarts, "{}", event.to_csv_row()) {
                self.error = Some(e);
            }
        }
    }
}

/// Run-level trace bookkeeping shared by the solvers and the restart loop:
/// cumulative counters, sampling stride and the wall clock.
pub struct Tracer<'a> {
    sink: &'a mut dyn TraceSink,
    pub run_id: u64,
    pub f_ref: Option<f64>,
    /// Iterations between trace records; `None` disables periodic records.
    pub stride: Option<u64>,
    dim: usize,
    start: Instant,
    last_recorded: Option<u64>,
}

impl<'a> Tracer<'a> {
    pub fn new(sink: &'a mut dyn TraceSink, dim: usize) -> Self {
        Tracer {
            sink,
            run_id: 0,
            f_ref: None,
            stride: None,
            dim,
            start: Instant::now(),
            last_recorded: None,
        }
    }

    pub fn with_stride(mut self, stride: Option<u64>) -> Self {
        self.stride = stride.filter(|&s| s > 0);
        self
    }

    pub fn with_run_id(mut self, run_id: u64) -> Self {
        self.run_id = run_id;
        self
    }

    pub fn with_reference(mut self, f_ref: Option<f64>) -> Self {
        self.f_ref = f_ref;
        self
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn is_due(&self, k: u64) -> bool {
        self.stride.is_some_and(|s| k.is_multiple_of(s)) && self.last_recorded != Some(k)
    }

    /// Emits a record unless one was already emitted at `k`.
    pub fn record(&mut self, k: u64, coord_updates: u64, objective: f64, duality_gap: f64) {
        if self.last_recorded == Some(k) {
            return;
        }
        self.last_recorded = Some(k);
        let rec = TraceRecord {
            run_id: self.run_id,
            k,
            coord_updates,
            epoch: coord_updates as f64 / self.dim as f64,
            objective,
            gap_to_ref: self.f_ref.map(|r| objective - r),
            duality_gap,
            elapsed_seconds: self.elapsed(),
        };
        self.sink.record(&rec);
    }

    pub fn restart(&mut self, mut event: RestartEvent) {
        event.run_id = self.run_id;
        self.sink.restart(&event);
    }
}
