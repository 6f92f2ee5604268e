// SPDX-License-Identifier: Apache-2.0
//! Newline-delimited JSON persistence for CRP datasets.
//!
//! Line 1 is a header record carrying the full experiment config (and so
//! the seed), the per-position offsets and diagnostics. Every following line
//! is one response. Bits are hex, MSB first, position 0 in the top bit of
//! the first digit.
//!
//! ```text
//! {"kind":"header","format":"srff-puf-crp/1","seed":1,"config":{..},"sys_offsets":[..],..}
//! {"kind":"reference","die":0,"env":"reference","n_bits":16,"bits":"a3f0"}
//! {"kind":"stress","die":0,"env":"T0C","env_index":0,"rep":0,"n_bits":16,"bits":"a3f0"}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{PufError, Result};
use crate::montecarlo::{CrpDataset, ExperimentConfig, ResponseBits};

pub const FORMAT: &str = "srff-puf-crp/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Header {
        format: String,
        seed: u64,
        config: ExperimentConfig,
        sys_offsets: Vec<f64>,
        marginal_ties: u64,
        n_references: usize,
        n_stress: usize,
    },
    Reference {
        die: u32,
        env: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        challenge: Option<String>,
        n_bits: usize,
        bits: String,
    },
    Stress {
        die: u32,
        env: String,
        env_index: usize,
        rep: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        challenge: Option<String>,
        n_bits: usize,
        bits: String,
    },
}

fn response_record(r: &ResponseBits) -> Record {
    match (r.env_index, r.rep) {
        (Some(env_index), Some(rep)) => Record::Stress {
            die: r.die_id,
            env: r.env.clone(),
            env_index,
            rep,
            challenge: r.challenge.clone(),
            n_bits: r.bits.len(),
            bits: r.bits.to_hex(),
        },
        _ => Record::Reference {
            die: r.die_id,
            env: r.env.clone(),
            challenge: r.challenge.clone(),
            n_bits: r.bits.len(),
            bits: r.bits.to_hex(),
        },
    }
}

pub fn write_dataset<W: Write>(dataset: &CrpDataset, mut out: W) -> Result<()> {
    let header = Record::Header {
        format: FORMAT.into(),
        seed: dataset.config.seed,
        config: dataset.config.clone(),
        sys_offsets: dataset.sys_offsets.clone(),
        marginal_ties: dataset.marginal_ties,
        n_references: dataset.references.len(),
        n_stress: dataset.stress.len(),
    };
    let mut line = |rec: &Record| -> Result<()> {
        serde_json::to_writer(&mut out, rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    line(&header)?;
    for r in dataset.references.iter().chain(&dataset.stress) {
        line(&response_record(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<CrpDataset> {
    let corrupt =
        |line: usize, msg: String| PufError::CorruptDataset(format!("line {line}: {msg}"));
    let mut lines = input.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| PufError::CorruptDataset("empty file".into()))?;
    let header: Record = serde_json::from_str(&first?).map_err(|e| corrupt(1, e.to_string()))?;
    let Record::Header {
        format,
        seed,
        config,
        sys_offsets,
        marginal_ties,
        n_references,
        n_stress,
    } = header
    else {
        return Err(corrupt(1, "first record is not a header".into()));
    };
    if format != FORMAT {
        return Err(corrupt(1, format!("unsupported format {format:?}")));
    }
    if seed != config.seed {
        return Err(corrupt(1, "header seed disagrees with config".into()));
    }
    let mut references = Vec::with_capacity(n_references);
    let mut stress = Vec::with_capacity(n_stress);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| corrupt(i + 1, e.to_string()))?;
        match rec {
            Record::Header { .. } => return Err(corrupt(i + 1, "duplicate header".into())),
            Record::Reference {
                die,
                env,
                challenge,
                n_bits,
                bits,
            } => references.push(ResponseBits {
                die_id: die,
                env,
                env_index: None,
                rep: None,
                challenge,
                bits: BitString::from_hex(&bits, n_bits)
                    .map_err(|e| corrupt(i + 1, e.to_string()))?,
            }),
            Record::Stress {
                die,
                env,
                env_index,
                rep,
                challenge,
                n_bits,
                bits,
            } => stress.push(ResponseBits {
                die_id: die,
                env,
                env_index: Some(env_index),
                rep: Some(rep),
                challenge,
                bits: BitString::from_hex(&bits, n_bits)
                    .map_err(|e| corrupt(i + 1, e.to_string()))?,
            }),
        }
    }
    if references.len() != n_references || stress.len() != n_stress {
        return Err(PufError::CorruptDataset(format!(
            "header announces {n_references}+{n_stress} records, found {}+{}",
            references.len(),
            stress.len()
        )));
    }
    let dataset = CrpDataset {
        config,
        sys_offsets,
        references,
        stress,
        marginal_ties,
    };
    dataset.validate().map_err(|e| match e {
        PufError::InvalidConfig(m) => PufError::CorruptDataset(format!("header config: {m}")),
        other => other,
    })?;
    Ok(dataset)
}

pub fn save(dataset: &CrpDataset, path: &Path) -> Result<()> {
    write_dataset(dataset, BufWriter::new(File::create(path)?))
}

pub fn load(path: &Path) -> Result<CrpDataset> {
    read_dataset(BufReader::new(File::open(path)?))
}
