//! Self-describing text checkpoints for the LSTM recognizer.
//!
//! Layout:
//!
//! ```text
//! fatigue-lstm-checkpoint v1
//! input_size 4
//! hidden_size 32
//! tensor w_i 32 36
//! <one row of space-separated decimals per line>
//! ...
//! tensor head_b 1 1
//! 0
//! end
//! ```
//!
//! Values print in Rust's shortest round-trip decimal form, so reading a
//! checkpoint back reproduces every bit.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use fatigue_core::lstm::{LstmModel, INPUT_SIZE};

use crate::CliError;

const MAGIC: &str = "fatigue-lstm-checkpoint v1";

pub fn encode_checkpoint(model: &LstmModel) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("input_size {INPUT_SIZE}\n"));
    out.push_str(&format!("hidden_size {}\n", model.hidden_size()));
    for (name, [rows, cols], data) in model.named_tensors() {
        out.push_str(&format!("tensor {name} {rows} {cols}\n"));
        for row in data.chunks(cols) {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{v}"));
                first = false;
            }
            out.push('\n');
        }
    }
    out.push_str("end\n");
    out
}

pub fn write_checkpoint(path: &Path, model: &LstmModel) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(encode_checkpoint(model).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn decode_checkpoint(text: &str) -> Result<LstmModel, CliError> {
    let mut lines = text.lines();
    let bad = |msg: &str| CliError::Data(format!("checkpoint: {msg}"));
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing or unknown header"));
    }
    let mut scalar = |key: &str| -> Result<usize, CliError> {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| bad(&format!("expected `{key}`")))?;
        rest.trim()
            .parse()
            .map_err(|_| bad(&format!("bad {key} value")))
    };
    let input_size = scalar("input_size")?;
    if input_size != INPUT_SIZE {
        return Err(bad(&format!(
            "input_size {input_size} unsupported (expected {INPUT_SIZE})"
        )));
    }
    let hidden_size = scalar("hidden_size")?;

    let mut tensors: HashMap<String, Vec<f64>> = HashMap::new();
    loop {
        let line = lines.next().ok_or_else(|| bad("missing `end`"))?;
        if line == "end" {
            break;
        }
        let mut parts = line.split_whitespace();
        if parts.next() != Some("tensor") {
            return Err(bad(&format!("expected tensor declaration, got {line:?}")));
        }
        let name = parts.next().ok_or_else(|| bad("tensor without name"))?;
        let rows: usize = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("tensor without row count"))?;
        let cols: usize = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("tensor without column count"))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row = lines.next().ok_or_else(|| bad("truncated tensor"))?;
            for field in row.split_whitespace() {
                data.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| bad(&format!("bad value {field:?} in {name}")))?,
                );
            }
        }
        if data.len() != rows * cols {
            return Err(bad(&format!(
                "{name}: expected {} values, found {}",
                rows * cols,
                data.len()
            )));
        }
        tensors.insert(name.to_string(), data);
    }

    let mut take = |name: &str| -> Result<Vec<f64>, CliError> {
        tensors
            .remove(name)
            .ok_or_else(|| bad(&format!("missing tensor {name}")))
    };
    let model = LstmModel::from_parts(
        hidden_size,
        take("w_i")?,
        take("w_f")?,
        take("w_o")?,
        take("w_g")?,
        take("b_i")?,
        take("b_f")?,
        take("b_o")?,
        take("b_g")?,
        take("head_w")?,
        take("head_b")?[0],
    )
    .map_err(CliError::data)?;
    if let Some(extra) = tensors.keys().next() {
        return Err(bad(&format!("unexpected tensor {extra}")));
    }
    Ok(model)
}

pub fn read_checkpoint(path: &Path) -> Result<LstmModel, CliError> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    decode_checkpoint(&text)
}
