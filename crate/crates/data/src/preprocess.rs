//! The preprocessing chain: resample to 128 Hz, Butterworth band-pass,
//! z-score normalization. Applied per trial, before windowing.

use asad_dsp::{
    apply_filter, design_butterworth_bandpass, normalize, resample_to_128, NormScope, TARGET_FS,
};

use crate::error::Result;
use crate::recording::{EegRecording, Trial};

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub band: (f64, f64),
    pub filter_order: usize,
    pub norm_scope: NormScope,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            band: (14.0, 31.0),
            filter_order: 8,
            norm_scope: NormScope::Global,
        }
    }
}

/// Run the full chain over every trial of a recording.
pub fn preprocess_recording(rec: &EegRecording, cfg: &PreprocessConfig) -> Result<EegRecording> {
    rec.validate()?;
    let cascade =
        design_butterworth_bandpass(cfg.filter_order, cfg.band.0, cfg.band.1, TARGET_FS as f64)?;
    let mut trials = Vec::with_capacity(rec.trials.len());
    for t in &rec.trials {
        let resampled = resample_to_128(&t.buffer)?;
        let filtered = apply_filter(&resampled, &cascade)?;
        let normalized = normalize(&filtered, cfg.norm_scope)?;
        trials.push(Trial {
            trial_id: t.trial_id,
            label: t.label,
            buffer: normalized,
        });
    }
    Ok(EegRecording {
        subject_id: rec.subject_id.clone(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recording::Label;
    use asad_dsp::RecordingBuffer;

    #[test]
    fn chain_outputs_128_hz_regardless_of_input_rate() {
        let mut rng = asad_nn::SeededRng::new(3);
        let n = 512 * 4;
        let samples: Vec<f64> = (0..2 * n).map(|_| rng.normal()).collect();
        let rec = EegRecording {
            subject_id: "s".into(),
            trials: vec![Trial {
                trial_id: 0,
                label: Label::Left,
                buffer: RecordingBuffer::new(512, vec!["a".into(), "b".into()], samples).unwrap(),
            }],
        };
        let out = preprocess_recording(&rec, &PreprocessConfig::default()).unwrap();
        assert_eq!(out.fs(), Some(128));
        assert_eq!(out.trials[0].buffer.n_samples(), 512);
    }

    #[test]
    fn too_low_rate_propagates_the_resampler_error() {
        let rec = EegRecording {
            subject_id: "s".into(),
            trials: vec![Trial {
                trial_id: 0,
                label: Label::Left,
                buffer: RecordingBuffer::new(100, vec!["a".into()], vec![0.0; 100]).unwrap(),
            }],
        };
        let err = preprocess_recording(&rec, &PreprocessConfig::default()).unwrap_err();
        assert!(err.to_string().contains("128"), "{err}");
    }
}
