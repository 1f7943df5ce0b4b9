//! JSONL stream format: one frame record per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use fatigue_core::feature::{build_feature_vector, FatigueFeatureVector, LandmarkFrame};
use fatigue_core::{Label, Point, PoseAngles, NUM_LANDMARKS};

use crate::CliError;

/// One stream line. Landmarks may be omitted when the features are already
/// present; pose angles are always carried.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamRecord {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

impl StreamRecord {
    pub fn from_frame(frame: &LandmarkFrame) -> Self {
        Self {
            t: frame.timestamp,
            points: Some(frame.points.iter().map(|p| [p.x, p.y]).collect()),
            pitch: frame.pose.pitch(),
            yaw: frame.pose.yaw(),
            roll: frame.pose.roll(),
            features: None,
            label: frame.label.map(|l| l.as_u8()),
        }
    }

    /// The per-frame feature vector: taken verbatim when precomputed,
    /// otherwise derived from the landmarks and pose.
    pub fn feature_vector(&self) -> Result<FatigueFeatureVector, CliError> {
        if let Some(values) = self.features {
            return FatigueFeatureVector::from_array(values).map_err(CliError::data);
        }
        let Some(raw) = &self.points else {
            return Err(CliError::Data(
                "stream record carries neither features nor landmarks".into(),
            ));
        };
        if raw.len() != NUM_LANDMARKS {
            return Err(CliError::Data(format!(
                "stream record has {} landmarks, expected {NUM_LANDMARKS}",
                raw.len()
            )));
        }
        let mut points = [Point::new(0.0, 0.0); NUM_LANDMARKS];
        for (dst, src) in points.iter_mut().zip(raw) {
            *dst = Point::new(src[0], src[1]);
        }
        let frame = LandmarkFrame {
            timestamp: self.t,
            points,
            pose: PoseAngles::new(self.pitch, self.yaw, self.roll).map_err(CliError::data)?,
            label: None,
        };
        build_feature_vector(&frame).map_err(CliError::data)
    }

    pub fn label(&self) -> Result<Option<Label>, CliError> {
        self.label
            .map(Label::from_u8)
            .transpose()
            .map_err(CliError::data)
    }
}

/// Writes frames as JSONL.
pub fn write_stream(path: &Path, frames: &[LandmarkFrame]) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    for frame in frames {
        let record = StreamRecord::from_frame(frame);
        serde_json::to_writer(&mut out, &record).map_err(CliError::data)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSONL stream, enforcing per-line parseability and strictly
/// increasing timestamps.
pub fn read_stream(path: &Path) -> Result<Vec<StreamRecord>, CliError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StreamRecord = serde_json::from_str(&line).map_err(|e| {
            CliError::Data(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if !record.t.is_finite() || record.t <= last_t {
            return Err(CliError::Data(format!(
                "{}:{}: timestamps must increase strictly ({} after {})",
                path.display(),
                lineno + 1,
                record.t,
                last_t
            )));
        }
        last_t = record.t;
        records.push(record);
    }
    Ok(records)
}
