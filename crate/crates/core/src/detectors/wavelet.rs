//! Spectral edge detection with a derivative-of-Gaussian wavelet.
//!
//! The frame's periodogram is correlated, circularly in frequency, with a
//! sampled first-derivative-of-Gaussian kernel at each scale. A step up in
//! the spectrum gives a positive response, a step down a negative one; the
//! statistic is the largest response magnitude over all scales and bins.

use super::{DetectorId, TestStatistic};
use crate::error::{Result, SenseError};
use crate::signal_model::SignalFrame;
use crate::stats::{periodogram, PowerSpectrum};

pub const DEFAULT_SCALES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Taps `k(t)`, `t = −h..=h`, of the kernel `t·exp(−t²/2s²)` with
/// `h = ⌈4s⌉` (at least 1), shifted to zero mean and scaled to unit norm.
pub fn dog_kernel(scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(SenseError::param(
            "wavelet scale",
            "finite and positive",
            scale,
        ));
    }
    let half = ((4.0 * scale).ceil() as i64).max(1);
    let mut taps: Vec<f64> = (-half..=half)
        .map(|t| {
            let t = t as f64;
            t * (-t * t / (2.0 * scale * scale)).exp()
        })
        .collect();
    let mean = taps.iter().sum::<f64>() / taps.len() as f64;
    taps.iter_mut().for_each(|v| *v -= mean);
    let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(SenseError::param(
            "wavelet scale",
            "large enough to sample",
            scale,
        ));
    }
    taps.iter_mut().for_each(|v| *v /= norm);
    Ok(taps)
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(SenseError::Usage(
            "at least one wavelet scale is required".into(),
        ));
    }
    Ok(())
}

/// `f(s, u) = Σ_t P[(u + t) mod B]·k_s(t)` for every scale `s` (outer index)
/// and translation `u` (inner index).
pub fn wavelet_transform(psd: &PowerSpectrum, scales: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_scales(scales)?;
    let bins = psd.bins();
    let b = bins.len() as i64;
    scales
        .iter()
        .map(|&s| {
            let taps = dog_kernel(s)?;
            let half = (taps.len() / 2) as i64;
            let padded: Vec<f64> = (-half..b + half)
                .map(|i| bins[i.rem_euclid(b) as usize])
                .collect();
            Ok(padded
                .windows(taps.len())
                .map(|w| w.iter().zip(&taps).map(|(p, k)| p * k).sum())
                .collect())
        })
        .collect()
}

/// Largest `|f(s, u)|` over all scales and translations.
pub fn wavelet_edge_of_spectrum(psd: &PowerSpectrum, scales: &[f64]) -> Result<f64> {
    Ok(wavelet_transform(psd, scales)?
        .iter()
        .flatten()
        .fold(0.0, |acc: f64, v| acc.max(v.abs())))
}

/// Strongest spectral edge of the frame.
pub fn wavelet_edge_statistic(frame: &SignalFrame, scales: &[f64]) -> Result<TestStatistic> {
    if frame.len() < 8 {
        return Err(SenseError::param(
            "frame length",
            ">= 8",
            frame.len() as f64,
        ));
    }
    check_scales(scales)?;
    Ok(TestStatistic {
        value: wavelet_edge_of_spectrum(&periodogram(frame)?, scales)?,
        detector: DetectorId::Wavelet,
    })
}

/// Occupied bins `start..=end`; `start > end` when the band wraps around the
/// last bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccupiedBand {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BandReport {
    pub bands: Vec<OccupiedBand>,
}

impl BandReport {
    pub fn count(&self) -> usize {
        self.bands.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    bin: usize,
    rising: bool,
}

/// Counts occupied bands from the multiscale edge response.
///
/// The per-scale responses are summed; local maxima of the summed magnitude
/// above `edge_threshold` are edges, rising where the response is positive.
/// A band runs from the first rising edge of a run of rising edges to the
/// last falling edge of the following run of falling edges.
pub fn wavelet_occupied_bands(
    psd: &PowerSpectrum,
    scales: &[f64],
    edge_threshold: f64,
) -> Result<BandReport> {
    if !(edge_threshold > 0.0) {
        return Err(SenseError::param(
            "edge threshold",
            "positive",
            edge_threshold,
        ));
    }
    let transform = wavelet_transform(psd, scales)?;
    let b = psd.bin_count();
    let mut combined = vec![0.0; b];
    for row in &transform {
        for (c, v) in combined.iter_mut().zip(row) {
            *c += v;
        }
    }

    let mag = |i: usize| combined[i].abs();
    let edges: Vec<Edge> = (0..b)
        .filter(|&u| {
            let left = mag((u + b - 1) % b);
            let right = mag((u + 1) % b);
            mag(u) > edge_threshold && mag(u) > left && mag(u) >= right
        })
        .map(|u| Edge {
            bin: u,
            rising: combined[u] > 0.0,
        })
        .collect();

    // rotate so the scan starts on a rising edge that follows a falling one
    let Some(start) = (0..edges.len()).find(|&i| {
        let prev = edges[(i + edges.len() - 1) % edges.len()];
        edges[i].rising && !prev.rising
    }) else {
        return Ok(BandReport::default());
    };

    let mut bands = Vec::new();
    let mut i = 0;
    while i < edges.len() {
        let first_rise = edges[(start + i) % edges.len()];
        while i < edges.len() && edges[(start + i) % edges.len()].rising {
            i += 1;
        }
        let mut last_fall = None;
        while i < edges.len() && !edges[(start + i) % edges.len()].rising {
            last_fall = Some(edges[(start + i) % edges.len()]);
            i += 1;
        }
        if let Some(fall) = last_fall {
            // the rising response peaks on the last empty bin before the band
            bands.push(OccupiedBand {
                start: (first_rise.bin + 1) % b,
                end: fall.bin,
            });
        }
    }
    Ok(BandReport { bands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn rect_psd(bins: usize, bands: &[(usize, usize)], level: f64, floor: f64) -> PowerSpectrum {
        let mut v = vec![floor; bins];
        for &(a, z) in bands {
            for x in &mut v[a..=z] {
                *x = level;
            }
        }
        PowerSpectrum::from_bins(v).unwrap()
    }

    /// Independent evaluation of one response value straight from the
    /// continuous kernel formula.
    fn brute_response(psd: &[f64], scale: f64, u: usize) -> f64 {
        let half = ((4.0 * scale).ceil() as i64).max(1);
        let raw: Vec<f64> = (-half..=half)
            .map(|t| t as f64 * (-(t * t) as f64 / (2.0 * scale * scale)).exp())
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let norm = raw.iter().map(|r| (r - mean).powi(2)).sum::<f64>().sqrt();
        let n = psd.len() as i64;
        (-half..=half)
            .zip(&raw)
            .map(|(t, r)| psd[((u as i64 + t) % n + n) as usize % n as usize] * (r - mean) / norm)
            .sum()
    }

    #[test]
    fn kernel_has_zero_mean_and_unit_norm() {
        for s in DEFAULT_SCALES {
            let k = dog_kernel(s).unwrap();
            assert_abs_diff_eq!(k.iter().sum::<f64>(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(k.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-14);
        }
        assert!(dog_kernel(0.0).is_err());
    }

    #[test]
    fn flat_spectrum_has_no_edge() {
        let psd = PowerSpectrum::from_bins(vec![3.7; 128]).unwrap();
        let e = wavelet_edge_of_spectrum(&psd, &DEFAULT_SCALES).unwrap();
        assert!(e < 1e-12, "{e}");
        assert_eq!(
            wavelet_occupied_bands(&psd, &DEFAULT_SCALES, 0.1)
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn transform_matches_brute_force() {
        let psd = rect_psd(96, &[(30, 50)], 5.0, 1.0);
        let t = wavelet_transform(&psd, &DEFAULT_SCALES).unwrap();
        for (row, &s) in t.iter().zip(&DEFAULT_SCALES) {
            for (u, &got) in row.iter().enumerate() {
                assert_abs_diff_eq!(got, brute_response(psd.bins(), s, u), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rectangular_band_edges_sit_on_its_boundaries() {
        let psd = rect_psd(256, &[(100, 139)], 10.0, 1.0);
        // brute-force scan for the strongest positive and negative responses
        let mut best_rise = (0.0, 0);
        let mut best_fall = (0.0, 0);
        for &s in &DEFAULT_SCALES {
            for u in 0..256 {
                let f = brute_response(psd.bins(), s, u);
                if f > best_rise.0 {
                    best_rise = (f, u);
                }
                if -f > best_fall.0 {
                    best_fall = (-f, u);
                }
            }
        }
        assert!(best_rise.1.abs_diff(100) <= 1, "rise at {}", best_rise.1);
        assert!(best_fall.1.abs_diff(139) <= 1, "fall at {}", best_fall.1);
        let e = wavelet_edge_of_spectrum(&psd, &DEFAULT_SCALES).unwrap();
        assert_abs_diff_eq!(e, best_rise.0.max(best_fall.0), epsilon = 1e-12);
    }

    #[test]
    fn sinusoid_edges_flank_its_bin() {
        let (n, k) = (256, 40);
        let samples = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
            .collect();
        let psd = periodogram(&SignalFrame::new(samples).unwrap()).unwrap();
        let t = wavelet_transform(&psd, &DEFAULT_SCALES).unwrap();
        let (mut best, mut at) = (0.0, 0);
        for row in &t {
            for (u, v) in row.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    at = u;
                }
            }
        }
        assert!(at == k - 1 || at == k + 1, "max at {at}");
    }

    #[test]
    fn counts_single_band() {
        let psd = rect_psd(256, &[(60, 99)], 10.0, 1.0);
        let report = wavelet_occupied_bands(&psd, &DEFAULT_SCALES, 2.0).unwrap();
        assert_eq!(report.count(), 1);
        let band = report.bands[0];
        assert!(
            band.start.abs_diff(60) <= 2 && band.end.abs_diff(99) <= 2,
            "{band:?}"
        );
    }

    #[test]
    fn counts_two_bands() {
        let psd = rect_psd(512, &[(40, 90), (300, 360)], 8.0, 1.0);
        let report = wavelet_occupied_bands(&psd, &DEFAULT_SCALES, 2.0).unwrap();
        assert_eq!(report.count(), 2);
        let truth = [(40, 90), (300, 360)];
        for (band, (a, z)) in report.bands.iter().zip(truth) {
            assert!(
                band.start.abs_diff(a) <= 2 && band.end.abs_diff(z) <= 2,
                "{band:?}"
            );
        }
    }

    #[test]
    fn wrapping_band_is_reported_once() {
        let mut v = vec![1.0; 128];
        for i in (0..10).chain(118..128) {
            v[i] = 6.0;
        }
        let psd = PowerSpectrum::from_bins(v).unwrap();
        let report = wavelet_occupied_bands(&psd, &DEFAULT_SCALES, 2.0).unwrap();
        assert_eq!(report.count(), 1);
        let band = report.bands[0];
        assert!(
            band.start.abs_diff(118) <= 2 && band.end.abs_diff(9) <= 2,
            "{band:?}"
        );
    }

    #[test]
    fn preconditions() {
        let psd = PowerSpectrum::from_bins(vec![1.0; 16]).unwrap();
        assert!(wavelet_occupied_bands(&psd, &DEFAULT_SCALES, 0.0).is_err());
        assert!(wavelet_transform(&psd, &[]).is_err());
        assert!(wavelet_edge_statistic(&SignalFrame::zeros(7).unwrap(), &DEFAULT_SCALES).is_err());
    }
}
