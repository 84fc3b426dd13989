//! Audio quality metrics and timing. SNR over the full signal, LLR as the
//! mean LPC log-likelihood ratio over 30 ms Hamming-windowed frames with
//! 50% overlap, and a median wall-clock timer for the benchmark harness.

use std::time::Instant;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::wavcodec::AudioSamples;

/// LPC prediction order used by [`llr`].
pub const LPC_ORDER: usize = 10;
/// Analysis frame length in milliseconds.
pub const FRAME_MS: f64 = 30.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("signals differ in length or channel count")]
    LengthMismatch,
    #[error("reference signal is all zeros")]
    SilentReference,
    #[error("signal is shorter than one analysis frame")]
    TooShort,
    #[error("autocorrelation has no energy at lag zero")]
    SingularFrame,
}

/// Signal-to-noise ratio in decibels: 10*log10(sum x^2 / sum (x-y)^2),
/// summed over every channel. Returns +Inf exactly when the signals are
/// sample-for-sample identical.
pub fn snr(reference: &AudioSamples, processed: &AudioSamples) -> Result<f64, MetricError> {
    check_aligned(reference, processed)?;
    let refs = reference.normalized();
    let procs = processed.normalized();
    let mut signal = 0.0f64;
    let mut error = 0.0f64;
    for (r, p) in refs.iter().zip(&procs) {
        for (x, y) in r.iter().zip(p) {
            signal += x * x;
            let d = x - y;
            error += d * d;
        }
    }
    if signal == 0.0 {
        return Err(MetricError::SilentReference);
    }
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

/// Mean log-likelihood ratio and the number of frames it was averaged
/// over. Frames where either signal has no energy are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlrScore {
    pub mean: f64,
    pub frames: usize,
}

/// LPC-distance log-likelihood ratio: per frame,
/// ln((a_p R_r a_p') / (a_r R_r a_r')) with order-10 coefficients from
/// Levinson-Durbin, averaged over usable frames. 0 exactly for identical
/// inputs since both sides fit identical coefficients.
pub fn llr(reference: &AudioSamples, processed: &AudioSamples) -> Result<LlrScore, MetricError> {
    check_aligned(reference, processed)?;
    let frame_len = (FRAME_MS / 1000.0 * f64::from(reference.sample_rate)).round() as usize;
    let hop = frame_len / 2;
    if reference.len() < frame_len || frame_len <= LPC_ORDER {
        return Err(MetricError::TooShort);
    }
    let window = hamming(frame_len);
    let refs = reference.normalized();
    let procs = processed.normalized();

    let mut sum = 0.0f64;
    let mut frames = 0usize;
    let mut windowed_r = vec![0.0f64; frame_len];
    let mut windowed_p = vec![0.0f64; frame_len];
    for (r, p) in refs.iter().zip(&procs) {
        let mut start = 0;
        while start + frame_len <= r.len() {
            for i in 0..frame_len {
                windowed_r[i] = r[start + i] * window[i];
                windowed_p[i] = p[start + i] * window[i];
            }
            let rr = autocorrelation(&windowed_r, LPC_ORDER);
            let rp = autocorrelation(&windowed_p, LPC_ORDER);
            if rr[0] > 0.0 && rp[0] > 0.0 {
                let (ar, _) = levinson_durbin(&rr, LPC_ORDER)?;
                let (ap, _) = levinson_durbin(&rp, LPC_ORDER)?;
                let den = quadratic_form(&ar, &rr);
                let num = quadratic_form(&ap, &rr);
                if den > 0.0 && num > 0.0 {
                    sum += (num / den).ln();
                    frames += 1;
                }
            }
            start += hop;
        }
    }
    // All-silent inputs have no usable frames; identical silence is
    // distortion-free, so the mean defaults to zero.
    let mean = if frames == 0 {
        0.0
    } else {
        sum / frames as f64
    };
    Ok(LlrScore { mean, frames })
}

fn check_aligned(a: &AudioSamples, b: &AudioSamples) -> Result<(), MetricError> {
    if a.channels.len() != b.channels.len() {
        return Err(MetricError::LengthMismatch);
    }
    for (x, y) in a.channels.iter().zip(&b.channels) {
        if x.len() != y.len() {
            return Err(MetricError::LengthMismatch);
        }
    }
    Ok(())
}

fn hamming(len: usize) -> Vec<f64> {
    let denom = (len - 1) as f64;
    (0..len)
        .map(|i| 0.54 - 0.46 * (std::f64::consts::TAU * i as f64 / denom).cos())
        .collect()
}

/// Biased autocorrelation r[l] = sum x[n]*x[n-l] for l in 0..=max_lag.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let mut r = vec![0.0f64; max_lag + 1];
    for (lag, slot) in r.iter_mut().enumerate() {
        let mut acc = 0.0;
        for n in lag..x.len() {
            acc += x[n] * x[n - lag];
        }
        *slot = acc;
    }
    r
}

/// Levinson-Durbin recursion. Returns the analysis-filter coefficients
/// a_1..=a_order (the implied a_0 is 1) and the final prediction error
/// energy. Order 0 returns no coefficients and error autocorr[0].
pub fn levinson_durbin(autocorr: &[f64], order: usize) -> Result<(Vec<f64>, f64), MetricError> {
    assert!(
        order < autocorr.len(),
        "need autocorrelation up to lag `order`"
    );
    if autocorr[0] <= 0.0 {
        return Err(MetricError::SingularFrame);
    }
    let mut a = vec![0.0f64; order + 1];
    a[0] = 1.0;
    let mut e = autocorr[0];
    for i in 1..=order {
        if e <= 0.0 {
            // Perfectly predictable already; higher reflections are zero.
            break;
        }
        let mut acc = autocorr[i];
        for j in 1..i {
            acc += a[j] * autocorr[i - j];
        }
        let k = -acc / e;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        e *= 1.0 - k * k;
    }
    Ok((a[1..].to_vec(), e))
}

/// a' R a for the full coefficient vector [1, a_1..a_p] against a Toeplitz
/// autocorrelation matrix given by its first row.
fn quadratic_form(coeffs: &[f64], autocorr: &[f64]) -> f64 {
    let mut full = Vec::with_capacity(coeffs.len() + 1);
    full.push(1.0);
    full.extend_from_slice(coeffs);
    let mut acc = 0.0;
    for (i, &ai) in full.iter().enumerate() {
        for (j, &aj) in full.iter().enumerate() {
            acc += ai * aj * autocorr[i.abs_diff(j)];
        }
    }
    acc
}

/// One row of analysis output, shaped like the quality table.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QualityReport {
    pub file_name: String,
    pub file_size_bytes: u64,
    pub security_level: Option<usize>,
    #[serde(serialize_with = "serialize_db")]
    pub snr_db: f64,
    pub llr: f64,
    pub frame_count: usize,
    pub elapsed_ms: f64,
}

fn serialize_db<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "Inf" } else { "-Inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// "Inf" for an infinite value, plain decimal otherwise.
pub fn format_db(v: f64) -> String {
    if v.is_infinite() {
        (if v > 0.0 { "Inf" } else { "-Inf" }).to_string()
    } else {
        format!("{v}")
    }
}

impl QualityReport {
    /// Single-line JSON object.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "file,size,level,snrDb,llr,elapsedMs"
    }

    pub fn to_csv_row(&self) -> String {
        let level = self
            .security_level
            .map(|l| l.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.file_name,
            self.file_size_bytes,
            level,
            format_db(self.snr_db),
            self.llr,
            self.elapsed_ms
        )
    }
}

/// Runs both metrics and packages the result. `elapsed_ms` is the metric
/// computation time.
pub fn analyze(
    reference: &AudioSamples,
    processed: &AudioSamples,
    file_name: &str,
    file_size_bytes: u64,
    security_level: Option<usize>,
) -> Result<QualityReport, MetricError> {
    let started = Instant::now();
    let snr_db = snr(reference, processed)?;
    let score = llr(reference, processed)?;
    Ok(QualityReport {
        file_name: file_name.to_string(),
        file_size_bytes,
        security_level,
        snr_db,
        llr: score.mean,
        frame_count: score.frames,
        elapsed_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Runs `op` `reps` times and returns the median wall-clock time in
/// milliseconds together with the last result. `reps` must be >= 1.
pub fn time_run<T>(reps: usize, mut op: impl FnMut() -> T) -> (f64, T) {
    assert!(reps >= 1);
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let started = Instant::now();
        last = Some(op());
        times.push(started.elapsed().as_secs_f64() * 1000.0);
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if reps % 2 == 1 {
        times[reps / 2]
    } else {
        (times[reps / 2 - 1] + times[reps / 2]) / 2.0
    };
    (median, last.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rng::SplitMix64;
    use crate::wavcodec::WavFile;

    fn mono(samples: Vec<i32>, rate: u32) -> AudioSamples {
        AudioSamples {
            channels: vec![samples],
            sample_rate: rate,
            bits_per_sample: 16,
        }
    }

    fn speech_samples(bytes: usize, seed: u64) -> AudioSamples {
        let wav = fixtures::speech_wav(bytes, 8_000, seed);
        WavFile::parse(&wav).unwrap().decode_samples().unwrap()
    }

    #[test]
    fn snr_of_identical_signals_is_infinite() {
        let x = speech_samples(4_096, 1);
        assert_eq!(snr(&x, &x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn snr_of_negated_signal_is_minus_six_db() {
        let samples: Vec<i32> = vec![1000, -1000, 1000, -1000, 500, -500];
        let x = mono(samples.clone(), 8_000);
        let y = mono(samples.iter().map(|s| -s).collect(), 8_000);
        let got = snr(&x, &y).unwrap();
        let expected = 10.0 * 0.25f64.log10();
        assert!((got - expected).abs() < 1e-12, "got {got}");
        assert!((got + 6.0206).abs() < 1e-3);
    }

    #[test]
    fn snr_is_scale_invariant() {
        let x = speech_samples(4_096, 2);
        let noisy = mono(
            x.channels[0].iter().map(|&s| s + 50).collect(),
            x.sample_rate,
        );
        let a = snr(&x, &noisy).unwrap();
        let x3 = mono(x.channels[0].iter().map(|&s| s * 3).collect(), 8_000);
        let noisy3 = mono(noisy.channels[0].iter().map(|&s| s * 3).collect(), 8_000);
        let b = snr(&x3, &noisy3).unwrap();
        assert!((a - b).abs() < 1e-9, "a={a} b={b}");
    }

    #[test]
    fn snr_rejects_length_mismatch() {
        let x = mono(vec![1, 2, 3], 8_000);
        let y = mono(vec![1, 2], 8_000);
        assert_eq!(snr(&x, &y), Err(MetricError::LengthMismatch));
    }

    #[test]
    fn snr_rejects_silent_reference() {
        let x = mono(vec![0; 100], 8_000);
        let y = mono(vec![1; 100], 8_000);
        assert_eq!(snr(&x, &y), Err(MetricError::SilentReference));
    }

    #[test]
    fn llr_of_identical_signals_is_exactly_zero() {
        let x = speech_samples(8_192, 3);
        let score = llr(&x, &x).unwrap();
        assert_eq!(score.mean, 0.0);
        assert!(score.frames > 0);
    }

    #[test]
    fn llr_of_distorted_signal_is_nonzero_and_finite() {
        let x = speech_samples(8_192, 4);
        let mut rng = SplitMix64::new(5);
        let y = mono(
            x.channels[0]
                .iter()
                .map(|&s| (f64::from(s) * 0.4 + 6000.0 * rng.signed_unit()) as i32)
                .collect(),
            x.sample_rate,
        );
        let score = llr(&x, &y).unwrap();
        assert!(score.mean.is_finite());
        assert!(score.mean.abs() > 1e-6, "mean {}", score.mean);
    }

    #[test]
    fn llr_skips_silent_frames() {
        // 30 ms at 8 kHz is 240 samples. One voiced frame surrounded by
        // digital silence: silent frames carry no LPC solution.
        let mut samples = vec![0i32; 960];
        let mut rng = SplitMix64::new(6);
        for s in samples.iter_mut().take(480).skip(240) {
            *s = (8000.0 * rng.signed_unit()) as i32;
        }
        let x = mono(samples, 8_000);
        let full_frames = 1 + (960 - 240) / 120;
        let score = llr(&x, &x).unwrap();
        assert!(score.frames < full_frames, "frames {}", score.frames);
        assert!(score.frames >= 2);
    }

    #[test]
    fn llr_rejects_too_short_input() {
        let x = mono(vec![1; 100], 8_000);
        assert_eq!(llr(&x, &x), Err(MetricError::TooShort));
    }

    #[test]
    fn levinson_durbin_frozen_oracle() {
        // AR(1)-shaped autocorrelation [1, 0.5, 0.25]: the order-2 fit is
        // a = [-0.5, 0] with error 0.75, exactly.
        let (a, e) = levinson_durbin(&[1.0, 0.5, 0.25], 2).unwrap();
        assert_eq!(a, vec![-0.5, 0.0]);
        assert_eq!(e, 0.75);
    }

    #[test]
    fn levinson_durbin_order_zero() {
        let (a, e) = levinson_durbin(&[2.5, 1.0], 0).unwrap();
        assert!(a.is_empty());
        assert_eq!(e, 2.5);
    }

    #[test]
    fn levinson_durbin_rejects_zero_energy() {
        assert_eq!(
            levinson_durbin(&[0.0, 0.0], 1),
            Err(MetricError::SingularFrame)
        );
    }

    #[test]
    fn levinson_durbin_matches_least_squares_on_ar1() {
        // x[n] = 0.9 x[n-1] + e[n]
        let mut rng = SplitMix64::new(7);
        let mut x = vec![0.0f64; 20_000];
        for n in 1..x.len() {
            x[n] = 0.9 * x[n - 1] + rng.signed_unit();
        }
        let r = autocorrelation(&x, 1);
        let (a, e) = levinson_durbin(&r, 1).unwrap();

        let num: f64 = (1..x.len()).map(|n| x[n] * x[n - 1]).sum();
        let den: f64 = (0..x.len() - 1).map(|n| x[n] * x[n]).sum();
        let least_squares = -num / den;
        assert!(
            (a[0] - least_squares).abs() < 0.02,
            "ld {} ls {least_squares}",
            a[0]
        );
        assert!((a[0] + 0.9).abs() < 0.05, "a1 {}", a[0]);
        assert!(e > 0.0 && e < r[0]);
    }

    #[test]
    fn levinson_durbin_on_white_noise_is_near_zero() {
        let mut rng = SplitMix64::new(8);
        let x: Vec<f64> = (0..8_192).map(|_| rng.signed_unit()).collect();
        let r = autocorrelation(&x, LPC_ORDER);
        let (a, _) = levinson_durbin(&r, LPC_ORDER).unwrap();
        for (i, c) in a.iter().enumerate() {
            assert!(c.abs() < 0.1, "a[{i}] = {c}");
        }
    }

    #[test]
    fn prediction_error_is_non_increasing_with_order() {
        let x = speech_samples(8_192, 9);
        let norm = x.normalized();
        let r = autocorrelation(&norm[0], LPC_ORDER);
        let mut last = f64::INFINITY;
        for order in 0..=LPC_ORDER {
            let (_, e) = levinson_durbin(&r, order).unwrap();
            assert!(e <= last + 1e-12, "order {order}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn report_serializes_infinity_as_string() {
        let report = QualityReport {
            file_name: "x.wav".into(),
            file_size_bytes: 1_024,
            security_level: Some(9),
            snr_db: f64::INFINITY,
            llr: 0.0,
            frame_count: 3,
            elapsed_ms: 0.5,
        };
        let json = report.to_json_line();
        assert!(json.contains("\"snrDb\":\"Inf\""), "{json}");
        assert!(!json.contains('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["llr"], 0.0);
        assert_eq!(parsed["securityLevel"], 9);

        assert_eq!(report.to_csv_row(), "x.wav,1024,9,Inf,0,0.5");
    }

    #[test]
    fn report_serializes_finite_snr_as_number() {
        let report = QualityReport {
            file_name: "x.wav".into(),
            file_size_bytes: 10,
            security_level: None,
            snr_db: -11.5,
            llr: 0.25,
            frame_count: 1,
            elapsed_ms: 1.0,
        };
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json_line()).unwrap();
        assert_eq!(parsed["snrDb"], -11.5);
        assert_eq!(parsed["securityLevel"], serde_json::Value::Null);
        assert!(report.to_csv_row().starts_with("x.wav,10,,-11.5,"));
    }

    #[test]
    fn time_run_reports_median_and_result() {
        let mut count = 0;
        let (ms, value) = time_run(5, || {
            count += 1;
            count
        });
        assert_eq!(value, 5);
        assert!(ms >= 0.0);
    }
}
