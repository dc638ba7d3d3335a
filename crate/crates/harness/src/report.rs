//! CSV artifacts.

use std::io::Write;

use crate::error::Result;
use crate::experiment::ExperimentOutcome;
use crate::format::sig6;
use crate::trace::TraceRow;

pub const REPORT_FILE: &str = "report.csv";
pub const TRACE_FILE: &str = "trace.csv";

pub const REPORT_HEADER: [&str; 18] = [
    "id",
    "model",
    "sampler",
    "n",
    "replicates",
    "esjd_gs",
    "se_esjd_gs",
    "mse_gs",
    "se_mse_gs",
    "esjd_cmh",
    "mse_cmh",
    "esjdr",
    "se_esjdr",
    "mser",
    "se_mser",
    "accept_rate",
    "beta_ref",
    "seed",
];

/// Writes one row per experiment; numbers carry six significant digits.
pub fn write_report<W: Write>(out: W, outcomes: &[ExperimentOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for o in outcomes {
        let r = &o.report;
        let mut row = vec![
            o.id.clone(),
            o.model.to_owned(),
            o.sampler.clone(),
            o.n.to_string(),
            o.replicates.to_string(),
        ];
        row.extend(
            [
                r.esjd_gs,
                r.se_esjd_gs,
                r.mse_gs,
                r.se_mse_gs,
                r.esjd_hat,
                r.mse_hat,
                r.esjdr,
                r.se_esjdr,
                r.mser,
                r.se_mser,
                r.accept_rate,
                r.beta_ref,
            ]
            .map(sig6),
        );
        row.push(o.seed.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trace", "iteration", "value"])?;
    for r in rows {
        w.write_record([r.trace.as_str(), &r.iteration.to_string(), &sig6(r.value)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
