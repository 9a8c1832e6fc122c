//! Resonance peak extraction from magnitude traces.

/// Local maxima above `threshold` times the median magnitude, refined by
/// three-point parabolic interpolation. NaN samples (failed solves) break
/// the trace and are skipped.
pub fn find_resonances(freqs: &[f64], mags: &[f64], threshold: f64) -> Vec<f64> {
    assert_eq!(freqs.len(), mags.len());
    if freqs.len() < 3 {
        return Vec::new();
    }
    let mut finite: Vec<f64> = mags.iter().copied().filter(|m| m.is_finite()).collect();
    if finite.is_empty() {
        return Vec::new();
    }
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = finite[finite.len() / 2];
    let floor = threshold * median;

    let mut peaks = Vec::new();
    for i in 1..mags.len() - 1 {
        let (a, b, c) = (mags[i - 1], mags[i], mags[i + 1]);
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            continue;
        }
        if b < floor || b < a || b <= c {
            continue;
        }
        // parabolic refinement within half a bin
        let denom = a - 2.0 * b + c;
        let shift = if denom.abs() > 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let df = 0.5 * (freqs[i + 1] - freqs[i - 1]);
        peaks.push(freqs[i] + shift * df);
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(f: f64, f0: f64, width: f64) -> f64 {
        1.0 / (1.0 + ((f - f0) / width).powi(2))
    }

    #[test]
    fn single_lorentzian_at_1ghz() {
        let freqs: Vec<f64> = (0..1001).map(|i| 0.5e9 + 1e6 * i as f64).collect();
        let mags: Vec<f64> = freqs.iter().map(|&f| lorentzian(f, 1.0e9, 2e7)).collect();
        let peaks = find_resonances(&freqs, &mags, 5.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - 1.0e9).abs() < 0.5e6, "peak at {}", peaks[0]);
    }

    #[test]
    fn merged_peaks_report_once() {
        // two resonances inside one bin appear as a single maximum
        let freqs: Vec<f64> = (0..101).map(|i| 0.9e9 + 2e6 * i as f64).collect();
        let mags: Vec<f64> = freqs
            .iter()
            .map(|&f| lorentzian(f, 1.0e9, 1e5) + lorentzian(f, 1.0005e9, 1e5))
            .collect();
        let peaks = find_resonances(&freqs, &mags, 5.0);
        assert_eq!(peaks.len(), 1);
    }

    #[test]
    fn empty_and_flat_traces() {
        assert!(find_resonances(&[], &[], 5.0).is_empty());
        let freqs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mags = vec![1.0; 100];
        assert!(find_resonances(&freqs, &mags, 5.0).is_empty());
    }

    #[test]
    fn nan_samples_are_skipped() {
        let freqs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut mags: Vec<f64> = freqs.iter().map(|&f| lorentzian(f, 50.0, 3.0)).collect();
        mags[20] = f64::NAN;
        let peaks = find_resonances(&freqs, &mags, 5.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - 50.0).abs() < 1.0);
    }
}
