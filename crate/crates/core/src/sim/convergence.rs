//! Convergence-time measurement on recorded series.

use crate::sim::engine::Series;
use serde::Serialize;

/// Knobs for the two detectors.
#[derive(Debug, Clone)]
pub struct ConvergenceOptions {
    /// Radius of the multiplier ball for the oracle-based time.
    pub zeta: f64,
    /// Steady-window band as a fraction of the long-run mean.
    pub band_frac: f64,
    /// Steady-window length in slots.
    pub window: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            zeta: 50.0,
            band_frac: 0.10,
            window: 200,
        }
    }
}

/// A multiplier target for one regime segment, in reporting precision.
#[derive(Debug, Clone)]
pub struct SegmentTarget {
    pub upsilon: Vec<f64>,
    pub nu: Vec<f64>,
}

/// Measured convergence times of one regime segment, in slots after the
/// segment start. `None` means the detector did not fire by segment end.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentReport {
    pub start: u64,
    pub end: u64,
    /// First slot with `‖(Q̂, Ê) − (υ*, ν*+θ)‖ < ζ` (needs an oracle).
    pub t_zeta: Option<u64>,
    /// First slot after which every augmented energy level stays within the
    /// band around its segment long-run mean for a full window.
    pub steady_window: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub zeta: f64,
    pub band_frac: f64,
    pub window: usize,
    pub segments: Vec<SegmentReport>,
}

/// Scans a recorded series segment by segment. `segments` are
/// `[start, end)` slot ranges (typically split at regime changes);
/// `targets` supplies one optional oracle per segment.
pub fn measure_convergence(
    series: &Series,
    segments: &[(u64, u64)],
    targets: &[Option<SegmentTarget>],
    options: &ConvergenceOptions,
) -> ConvergenceReport {
    assert_eq!(segments.len(), targets.len());
    let mut reports = Vec::with_capacity(segments.len());
    for (&(start, end), target) in segments.iter().zip(targets) {
        let end = end.min(series.slots as u64);
        let t_zeta = target.as_ref().and_then(|target| {
            (start..end).find_map(|t| {
                let q = series.q_hat_row(t as usize);
                let e = series.e_hat_row(t as usize);
                let mut d2 = 0.0;
                for (x, y) in q.iter().zip(&target.upsilon) {
                    d2 += (x - y) * (x - y);
                }
                for (x, y) in e.iter().zip(&target.nu) {
                    d2 += (x - y) * (x - y);
                }
                (d2.sqrt() < options.zeta).then_some(t - start)
            })
        });
        reports.push(SegmentReport {
            start,
            end,
            t_zeta,
            steady_window: steady_window_time(series, start, end, options),
        });
    }
    ConvergenceReport {
        zeta: options.zeta,
        band_frac: options.band_frac,
        window: options.window,
        segments: reports,
    }
}

/// The oracle-free detector: long-run means are estimated over the second
/// half of the segment, and the answer is the first slot opening a
/// `window`-long run with every augmented energy level inside
/// `±band_frac·|mean|` of its mean.
fn steady_window_time(
    series: &Series,
    start: u64,
    end: u64,
    options: &ConvergenceOptions,
) -> Option<u64> {
    let energy = series.energy;
    if energy == 0 || end <= start {
        return Some(0);
    }
    let mid = start + (end - start) / 2;
    let tail = (end - mid) as f64;
    let mut mean = vec![0.0; energy];
    for t in mid..end {
        for (m, &e) in mean.iter_mut().zip(series.e_hat_row(t as usize)) {
            *m += e;
        }
    }
    for m in &mut mean {
        *m /= tail;
    }
    let band: Vec<f64> = mean
        .iter()
        .map(|m| options.band_frac * m.abs().max(1.0))
        .collect();

    let mut run_start = start;
    let mut t = start;
    while t < end {
        let row = series.e_hat_row(t as usize);
        let in_band = row
            .iter()
            .zip(&mean)
            .zip(&band)
            .all(|((&e, &m), &b)| (e - m).abs() <= b);
        if !in_band {
            run_start = t + 1;
        } else if (t + 1 - run_start) as usize >= options.window {
            return Some(run_start - start);
        }
        t += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(e_hat: Vec<f64>, energy: usize) -> Series {
        let slots = e_hat.len() / energy;
        Series {
            slots,
            pairs: 0,
            energy,
            q_hat: vec![],
            e_hat: e_hat.clone(),
            e_raw: e_hat,
        }
    }

    #[test]
    fn t_zeta_zero_when_starting_inside() {
        let s = series(vec![10.0; 100], 1);
        let target = SegmentTarget {
            upsilon: vec![],
            nu: vec![10.0],
        };
        let report = measure_convergence(
            &s,
            &[(0, 100)],
            &[Some(target)],
            &ConvergenceOptions::default(),
        );
        assert_eq!(report.segments[0].t_zeta, Some(0));
    }

    #[test]
    fn infinite_zeta_fires_immediately() {
        let s = series(vec![0.0; 50], 1);
        let target = SegmentTarget {
            upsilon: vec![],
            nu: vec![1e9],
        };
        let opts = ConvergenceOptions {
            zeta: f64::INFINITY,
            ..Default::default()
        };
        let report = measure_convergence(&s, &[(0, 50)], &[Some(target)], &opts);
        assert_eq!(report.segments[0].t_zeta, Some(0));
    }

    #[test]
    fn steady_window_finds_ramp_end() {
        // ramp 0..=99 then flat at 100 for 400 slots
        let mut values: Vec<f64> = (0..100).map(|t| t as f64).collect();
        values.extend(std::iter::repeat(100.0).take(400));
        let s = series(values, 1);
        let opts = ConvergenceOptions {
            zeta: 1.0,
            band_frac: 0.10,
            window: 200,
        };
        let report = measure_convergence(&s, &[(0, 500)], &[None], &opts);
        // mean over the second half is 100, band ±10: the ramp enters at 90
        assert_eq!(report.segments[0].steady_window, Some(90));
        assert_eq!(report.segments[0].t_zeta, None);
    }

    #[test]
    fn detector_ignores_earlier_segment() {
        let mut values: Vec<f64> = vec![500.0; 100];
        values.extend(std::iter::repeat(10.0).take(300));
        let s = series(values, 1);
        let opts = ConvergenceOptions {
            zeta: 1.0,
            band_frac: 0.10,
            window: 50,
        };
        let report = measure_convergence(&s, &[(100, 400)], &[None], &opts);
        assert_eq!(report.segments[0].steady_window, Some(0));
    }

    #[test]
    fn no_window_reports_none() {
        // oscillates too widely for any window
        let values: Vec<f64> = (0..300).map(|t| if t % 2 == 0 { 0.0 } else { 100.0 }).collect();
        let s = series(values, 1);
        let opts = ConvergenceOptions {
            zeta: 1.0,
            band_frac: 0.10,
            window: 100,
        };
        let report = measure_convergence(&s, &[(0, 300)], &[None], &opts);
        assert_eq!(report.segments[0].steady_window, None);
    }
}
