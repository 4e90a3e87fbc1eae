//! CSV emission for sweep results.
//!
//! The format is a stable contract: header
//! `C,regime,p12,p21,Q1,Q2,profit,mc_mean,mc_stderr,evals`, `\n` line
//! endings, `.` decimal point, UTF-8, shortest round-trip float text.

use std::io::{self, Write};

use crate::config::regime_tag;
use crate::sweep::SweepRow;

pub const CSV_HEADER: &str = "C,regime,p12,p21,Q1,Q2,profit,mc_mean,mc_stderr,evals";

/// Writes one header line plus one line per row.
pub fn emit_csv(rows: &[SweepRow], out: &mut impl Write) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "refusing to emit a CSV with no rows",
        ));
    }
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        let (mc_mean, mc_stderr) = match row.mc {
            Some((mean, stderr)) => (mean.to_string(), stderr.to_string()),
            None => (String::new(), String::new()),
        };
        let line = format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.capacity,
            regime_tag(&row.regime),
            row.p12,
            row.p21,
            row.q1,
            row.q2,
            row.profit,
            mc_mean,
            mc_stderr,
            row.evaluations
        );
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}
