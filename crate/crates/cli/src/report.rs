// SPDX-License-Identifier: Apache-2.0
//! Report files written by `evaluate`.
//!
//! Every file carries the config echo: the JSON report embeds it, each CSV
//! starts with a `# seed=.. config=..` comment line. Rows are ascending by
//! bin or position.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use srff_puf::MetricsReport;

use crate::error::CliError;

#[derive(Debug)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub inter_hd: PathBuf,
    pub intra_hd: PathBuf,
    pub positions: PathBuf,
}

impl ReportPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        Self {
            json: dir.join(format!("{stem}.report.json")),
            inter_hd: dir.join(format!("{stem}.inter_hd.csv")),
            intra_hd: dir.join(format!("{stem}.intra_hd.csv")),
            positions: dir.join(format!("{stem}.positions.csv")),
        }
    }
}

fn csv_writer(
    path: &Path,
    report: &MetricsReport,
) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    let config = serde_json::to_string(&report.config).expect("config serializes");
    writeln!(out, "# seed={} config={config}", report.config.seed)?;
    Ok(csv::Writer::from_writer(out))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_reports(report: &MetricsReport, paths: &ReportPaths) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&paths.json, json + "\n")?;

    let mut w = csv_writer(&paths.inter_hd, report)?;
    w.write_record(["hd", "count"]).map_err(csv_err)?;
    for (hd, count) in report.inter_hd_histogram.iter().enumerate() {
        w.write_record([hd.to_string(), count.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv_writer(&paths.intra_hd, report)?;
    let mut header = vec!["hd".to_string()];
    header.extend(report.intra_hd_histograms.iter().map(|e| e.label.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for hd in 0..=report.n_bits {
        let mut row = vec![hd.to_string()];
        row.extend(
            report
                .intra_hd_histograms
                .iter()
                .map(|e| e.histogram[hd].to_string()),
        );
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv_writer(&paths.positions, report)?;
    w.write_record([
        "position",
        "p_zero",
        "bit_aliasing",
        "collision_match",
        "collision_mismatch",
    ])
    .map_err(csv_err)?;
    for l in 0..report.n_bits {
        w.write_record([
            l.to_string(),
            report.p_zero_per_position[l].to_string(),
            report.bit_aliasing_per_position[l].to_string(),
            report.collision.match_per_position[l].to_string(),
            report.collision.mismatch_per_position[l].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
