//! The on-disk EEG container and a CSV import path for fixtures.
//!
//! Binary layout (little-endian): magic `ASADEEG1` | u32 version | u32 fs |
//! u32 n_channels | u32 n_trials | channel labels (u32 length + UTF-8 each) |
//! per trial: u32 trial_id, u8 label (0 = left, 1 = right), u64 n_samples,
//! then n_channels * n_samples IEEE-754 f32 samples, channel-major.

use std::path::Path;

use asad_dsp::RecordingBuffer;

use crate::error::{DataError, Result};
use crate::recording::{EegRecording, Label, Trial};

pub const MAGIC: &[u8; 8] = b"ASADEEG1";
pub const FORMAT_VERSION: u32 = 1;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(DataError::Truncated {
                offset: self.pos,
                expected: n,
                actual: self.bytes.len() - self.pos,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|e| DataError::Csv {
            line: 0,
            detail: format!("invalid UTF-8 label: {e}"),
        })
    }
}

/// Serialize a recording (samples stored as f32).
pub fn encode_recording(rec: &EegRecording) -> Result<Vec<u8>> {
    rec.validate()?;
    let labels = rec.channel_labels().unwrap_or(&[]);
    let fs = rec.fs().unwrap_or(0);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&fs.to_le_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_le_bytes());
    out.extend_from_slice(&(rec.trials.len() as u32).to_le_bytes());
    for l in labels {
        out.extend_from_slice(&(l.len() as u32).to_le_bytes());
        out.extend_from_slice(l.as_bytes());
    }
    for t in &rec.trials {
        out.extend_from_slice(&t.trial_id.to_le_bytes());
        out.push(t.label as u8);
        out.extend_from_slice(&(t.buffer.n_samples() as u64).to_le_bytes());
        for &v in t.buffer.samples() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

/// Parse container bytes; `subject_id` usually comes from the file stem.
pub fn decode_recording(bytes: &[u8], subject_id: &str) -> Result<EegRecording> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.take(8)?;
    if magic != MAGIC {
        return Err(DataError::BadMagic(magic.to_vec()));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(DataError::BadVersion(version));
    }
    let fs = c.u32()?;
    let n_channels = c.u32()? as usize;
    let n_trials = c.u32()? as usize;
    let mut labels = Vec::with_capacity(n_channels);
    for _ in 0..n_channels {
        labels.push(c.string()?);
    }
    let mut trials = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let trial_id = c.u32()?;
        let label_byte = c.u8()?;
        let label = Label::from_byte(label_byte).ok_or(DataError::BadLabel {
            trial: trial_id,
            value: label_byte,
        })?;
        let n_samples = c.u64()? as usize;
        let raw = c.take(n_channels * n_samples * 4)?;
        let mut samples = Vec::with_capacity(n_channels * n_samples);
        for (i, chunk) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(DataError::NonFiniteSample {
                    trial: trial_id,
                    index: i,
                });
            }
            samples.push(v as f64);
        }
        trials.push(Trial {
            trial_id,
            label,
            buffer: RecordingBuffer::new(fs, labels.clone(), samples)?,
        });
    }
    let rec = EegRecording {
        subject_id: subject_id.to_string(),
        trials,
    };
    rec.validate()?;
    Ok(rec)
}

pub fn write_recording(rec: &EegRecording, path: &Path) -> Result<()> {
    std::fs::write(path, encode_recording(rec)?)?;
    Ok(())
}

/// Read a container file; the subject id is the file stem.
pub fn ingest(path: &Path) -> Result<EegRecording> {
    let bytes = std::fs::read(path)?;
    let subject = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into());
    decode_recording(&bytes, &subject)
}

/// Import one trial from a fixture CSV (`time,ch1,...,chN` header). The
/// sidecar file `<path>.labels` holds the attended side (`left`/`right`).
/// The sample rate is inferred from the time column.
pub fn ingest_csv(path: &Path) -> Result<EegRecording> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DataError::Csv {
        line: 1,
        detail: "empty file".into(),
    })?;
    let mut cols = header.split(',').map(str::trim);
    match cols.next() {
        Some("time") => {}
        other => {
            return Err(DataError::Csv {
                line: 1,
                detail: format!("first column must be `time`, got {other:?}"),
            })
        }
    }
    let channel_labels: Vec<String> = cols.map(String::from).collect();
    if channel_labels.is_empty() {
        return Err(DataError::Csv {
            line: 1,
            detail: "no channel columns".into(),
        });
    }

    let mut times = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut vals = line.split(',').map(str::trim);
        let t: f64 = vals
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or(DataError::Csv {
                line: idx + 1,
                detail: "bad time value".into(),
            })?;
        times.push(t);
        let row: std::result::Result<Vec<f64>, _> = vals.map(str::parse::<f64>).collect();
        let row = row.map_err(|e| DataError::Csv {
            line: idx + 1,
            detail: e.to_string(),
        })?;
        if row.len() != channel_labels.len() {
            return Err(DataError::Csv {
                line: idx + 1,
                detail: format!(
                    "expected {} channel values, got {}",
                    channel_labels.len(),
                    row.len()
                ),
            });
        }
        rows.push(row);
    }
    if times.len() < 2 {
        return Err(DataError::Csv {
            line: 0,
            detail: "need at least 2 samples".into(),
        });
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let fs = (1.0 / dt).round() as u32;
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 0.01 * dt {
            return Err(DataError::Csv {
                line: i + 3,
                detail: format!("non-uniform sampling: dt {} vs {}", w[1] - w[0], dt),
            });
        }
    }

    let label_path = path.with_extension("labels");
    let label_text = std::fs::read_to_string(&label_path)?;
    let label = Label::from_name(&label_text).ok_or(DataError::Csv {
        line: 1,
        detail: format!("sidecar {}: bad label {:?}", label_path.display(), label_text.trim()),
    })?;

    // Column-major rows to channel-major samples.
    let n = rows.len();
    let mut samples = vec![0.0_f64; channel_labels.len() * n];
    for (t, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            samples[c * n + t] = v;
        }
    }
    let subject = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Ok(EegRecording {
        subject_id: subject,
        trials: vec![Trial {
            trial_id: 0,
            label,
            buffer: RecordingBuffer::new(fs, channel_labels, samples)?,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_recording() -> EegRecording {
        EegRecording {
            subject_id: "s01".into(),
            trials: vec![
                Trial {
                    trial_id: 0,
                    label: Label::Left,
                    buffer: RecordingBuffer::new(
                        128,
                        vec!["a".into(), "b".into()],
                        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
                    )
                    .unwrap(),
                },
                Trial {
                    trial_id: 1,
                    label: Label::Right,
                    buffer: RecordingBuffer::new(
                        128,
                        vec!["a".into(), "b".into()],
                        vec![-1.0, -2.0, -3.0, -4.0, 0.5, 0.25, 0.125, 0.0625],
                    )
                    .unwrap(),
                },
            ],
        }
    }

    #[test]
    fn encode_decode_round_trip_is_bitwise() {
        let rec = tiny_recording();
        let bytes = encode_recording(&rec).unwrap();
        let back = decode_recording(&bytes, "s01").unwrap();
        assert_eq!(rec, back);
        let bytes2 = encode_recording(&back).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn truncated_file_reports_byte_counts() {
        let bytes = encode_recording(&tiny_recording()).unwrap();
        let cut = &bytes[..bytes.len() - 10];
        let err = decode_recording(cut, "s01").unwrap_err();
        match err {
            DataError::Truncated { expected, actual, .. } => {
                assert!(expected > actual, "expected {expected}, actual {actual}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn bad_label_byte_is_rejected() {
        let mut bytes = encode_recording(&tiny_recording()).unwrap();
        // First trial's label byte sits right after the header + labels + id.
        let labels_block = 4 + 1 + 4 + 1; // two length-prefixed labels "a", "b"
        let offset = 8 + 4 + 4 + 4 + 4 + labels_block + 4;
        bytes[offset] = 7;
        let err = decode_recording(&bytes, "s01").unwrap_err();
        assert!(matches!(err, DataError::BadLabel { value: 7, .. }), "{err}");
    }

    #[test]
    fn hand_built_two_channel_file_decodes_exactly() {
        // 1 trial, 2 channels ("L", "R"), 2 samples each, label right.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"ASADEEG1");
        bytes.extend_from_slice(&1u32.to_le_bytes()); // version
        bytes.extend_from_slice(&128u32.to_le_bytes()); // fs
        bytes.extend_from_slice(&2u32.to_le_bytes()); // channels
        bytes.extend_from_slice(&1u32.to_le_bytes()); // trials
        for l in ["L", "R"] {
            bytes.extend_from_slice(&(l.len() as u32).to_le_bytes());
            bytes.extend_from_slice(l.as_bytes());
        }
        bytes.extend_from_slice(&9u32.to_le_bytes()); // trial id
        bytes.push(1); // right
        bytes.extend_from_slice(&2u64.to_le_bytes()); // samples
        for v in [0.5f32, -1.5, 2.25, 4.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }

        let rec = decode_recording(&bytes, "fixture").unwrap();
        assert_eq!(rec.trials.len(), 1);
        let t = &rec.trials[0];
        assert_eq!(t.trial_id, 9);
        assert_eq!(t.label, Label::Right);
        assert_eq!(t.buffer.channel(0), &[0.5, -1.5]);
        assert_eq!(t.buffer.channel(1), &[2.25, 4.0]);
    }

    #[test]
    fn nan_samples_are_rejected() {
        let mut rec = tiny_recording();
        rec.trials[0].buffer.channel_mut(0)[1] = f64::NAN;
        let bytes = encode_recording(&rec).unwrap();
        let err = decode_recording(&bytes, "s01").unwrap_err();
        assert!(matches!(err, DataError::NonFiniteSample { trial: 0, .. }), "{err}");
    }

    #[test]
    fn csv_import_round_trip() {
        let dir = std::env::temp_dir().join("asad_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("fixture.csv");
        std::fs::write(
            &csv,
            "time,c1,c2\n0.0,1.0,4.0\n0.0078125,2.0,5.0\n0.015625,3.0,6.0\n",
        )
        .unwrap();
        std::fs::write(dir.join("fixture.labels"), "left\n").unwrap();
        let rec = ingest_csv(&csv).unwrap();
        assert_eq!(rec.trials[0].buffer.fs, 128);
        assert_eq!(rec.trials[0].label, Label::Left);
        assert_eq!(rec.trials[0].buffer.channel(0), &[1.0, 2.0, 3.0]);
        assert_eq!(rec.trials[0].buffer.channel(1), &[4.0, 5.0, 6.0]);
    }
}
