//! Labeled multi-trial recordings, one per subject.

use asad_dsp::RecordingBuffer;

use crate::error::{DataError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Left = 0,
    Right = 1,
}

impl Label {
    pub fn from_byte(b: u8) -> Option<Label> {
        match b {
            0 => Some(Label::Left),
            1 => Some(Label::Right),
            _ => None,
        }
    }

    pub fn from_name(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" | "0" => Some(Label::Left),
            "right" | "r" | "1" => Some(Label::Right),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Left => "left",
            Label::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub trial_id: u32,
    pub label: Label,
    pub buffer: RecordingBuffer,
}

/// One subject's recording: trials sharing channel labels and sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    pub subject_id: String,
    pub trials: Vec<Trial>,
}

impl EegRecording {
    pub fn fs(&self) -> Option<u32> {
        self.trials.first().map(|t| t.buffer.fs)
    }

    pub fn channel_labels(&self) -> Option<&[String]> {
        self.trials.first().map(|t| t.buffer.channel_labels.as_slice())
    }

    /// One label per trial; all trials share channel labels and fs.
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.trials.first() else {
            return Ok(());
        };
        for t in &self.trials[1..] {
            if t.buffer.fs != first.buffer.fs {
                return Err(DataError::InconsistentTrials {
                    detail: format!(
                        "trial {} runs at {} Hz, trial {} at {} Hz",
                        first.trial_id, first.buffer.fs, t.trial_id, t.buffer.fs
                    ),
                });
            }
            if t.buffer.channel_labels != first.buffer.channel_labels {
                return Err(DataError::InconsistentTrials {
                    detail: format!(
                        "trial {} and trial {} have different channel labels",
                        first.trial_id, t.trial_id
                    ),
                });
            }
        }
        Ok(())
    }
}
