//! Canonical CSV encoding of run traces and replacement events.

use std::io::{self, Write};

use crate::arena::RunTrace;

pub const TRACE_HEADER: &str = "t,slot,item_id,visibility";
pub const EVENTS_HEADER: &str = "t,slot,old_id,new_id";

/// Formats a share with 17 significant digits.
pub fn format_share(v: f64) -> String {
    format!("{v:.16e}")
}

/// One line per `(t, slot)`, ordered by `t` then slot.
pub fn write_trace_csv<W: Write>(trace: &RunTrace, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{TRACE_HEADER}")?;
    for t in 1..=trace.len() {
        for (slot, (&v, &id)) in trace.row(t).iter().zip(trace.ids(t)).enumerate() {
            writeln!(out, "{t},{slot},{id},{}", format_share(v))?;
        }
    }
    out.flush()
}

pub fn write_events_csv<W: Write>(trace: &RunTrace, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{EVENTS_HEADER}")?;
    for ev in &trace.events {
        writeln!(out, "{},{},{},{}", ev.t, ev.slot, ev.old_id, ev.new_id)?;
    }
    out.flush()
}

pub fn trace_csv_bytes(trace: &RunTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn events_csv_bytes(trace: &RunTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_events_csv(trace, &mut buf).expect("writing to a Vec cannot fail");
    buf
}
