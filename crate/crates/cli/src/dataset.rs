//! Dataset CSV format: a `#` metadata line, a column-name header, then one
//! row per sequence sample (label first, then the row-major 4 x L matrix).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use fatigue_core::window::{retained_len, SequenceMatrix, SequenceSample, MATRIX_ROWS};
use fatigue_core::Label;

use crate::CliError;

const MAGIC: &str = "# fatigue-seq dataset v1";
const ROW_NAMES: [&str; MATRIX_ROWS] = ["leye", "reye", "mouth", "pitch"];

/// Window geometry recorded in the dataset header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub n: usize,
    pub k: usize,
    pub stride: usize,
    pub fps: u32,
}

impl DatasetHeader {
    pub fn cols(&self) -> usize {
        retained_len(self.n, self.k)
    }
}

pub fn write_dataset(
    path: &Path,
    header: &DatasetHeader,
    samples: &[SequenceSample],
) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "{MAGIC} n={} k={} stride={} fps={}",
        header.n, header.k, header.stride, header.fps
    )?;
    let cols = header.cols();
    let mut names = Vec::with_capacity(1 + MATRIX_ROWS * cols);
    names.push("label".to_string());
    for row in ROW_NAMES {
        for c in 0..cols {
            names.push(format!("{row}_{c}"));
        }
    }
    writeln!(out, "{}", names.join(","))?;
    for sample in samples {
        if sample.matrix.cols() != cols {
            return Err(CliError::Data(format!(
                "sample has {} columns, header implies {cols}",
                sample.matrix.cols()
            )));
        }
        write!(out, "{}", sample.label.as_u8())?;
        for v in sample.matrix.as_slice() {
            write!(out, ",{v}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Vec<SequenceSample>), CliError> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let meta = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty dataset", path.display())))??;
    let header = parse_header(&meta)
        .ok_or_else(|| CliError::Data(format!("{}: bad dataset header: {meta}", path.display())))?;
    // column-name row
    let _ = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: missing column header", path.display())))??;

    let cols = header.cols();
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label_field = fields.next().unwrap_or_default();
        let label = match label_field {
            "0" => Label::Normal,
            "1" => Label::Fatigue,
            other => {
                return Err(CliError::Data(format!(
                    "{}:{}: bad label {other:?}",
                    path.display(),
                    lineno + 3
                )))
            }
        };
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| {
                CliError::Data(format!("{}:{}: {e}", path.display(), lineno + 3))
            })?;
        if values.len() != MATRIX_ROWS * cols {
            return Err(CliError::Data(format!(
                "{}:{}: row has {} values, expected {}",
                path.display(),
                lineno + 3,
                values.len(),
                MATRIX_ROWS * cols
            )));
        }
        samples.push(SequenceSample {
            matrix: SequenceMatrix::from_row_major(cols, values).map_err(CliError::data)?,
            label,
            window_len: header.n,
            skip: header.k,
        });
    }
    Ok((header, samples))
}

fn parse_header(line: &str) -> Option<DatasetHeader> {
    let rest = line.strip_prefix(MAGIC)?.trim();
    let mut n = None;
    let mut k = None;
    let mut stride = None;
    let mut fps = None;
    for token in rest.split_whitespace() {
        let (key, value) = token.split_once('=')?;
        match key {
            "n" => n = value.parse().ok(),
            "k" => k = value.parse().ok(),
            "stride" => stride = value.parse().ok(),
            "fps" => fps = value.parse().ok(),
            _ => return None,
        }
    }
    Some(DatasetHeader {
        n: n?,
        k: k?,
        stride: stride?,
        fps: fps?,
    })
}
