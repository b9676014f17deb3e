//! Synthetic heatmaps and the post-processing cost study.
//!
//! Complexity is measured by counting comparisons in an instrumented argmax:
//! `N^2 - 1` per channel for a 2D search against `2N - 2` for two 1D
//! searches. Wall-clock medians are reported alongside but depend on the
//! host.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{quantize, GaussianVectorPair, Heatmap, LabelConfig};
use crate::{Error, Point2, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub col: usize,
    pub row: usize,
    pub magnitude: f64,
}

/// Description of one synthetic response map.
///
/// The profile is `amplitude * r(d)` where `r` is the label response (peak
/// `1 + theta` at `d == 0`, Gaussian tail below the cutoff). With
/// `subpixel == false` distances are taken from the quantized centre, which
/// reproduces the encoder exactly; with `subpixel == true` they are taken from
/// the continuous centre, as a smooth network output would look. The centre
/// may lie outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub center: Point2,
    pub amplitude: f64,
    pub label: LabelConfig,
    pub subpixel: bool,
    /// Uniform noise is drawn from `[0, noise]` for every element.
    pub noise: f64,
    pub seed: u64,
    /// Added on top of the heatmap; ignored for vector pairs.
    pub spike: Option<Spike>,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, center: Point2) -> Self {
        Self {
            width,
            height,
            center,
            amplitude: 1.0,
            label: LabelConfig::default(),
            subpixel: false,
            noise: 0.0,
            seed: 0,
            spike: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("synthetic grid dimensions must be positive"));
        }
        if !self.center.is_finite() {
            return Err(Error::NonFinite("synthetic centre"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::config(format!(
                "noise amplitude must be >= 0, got {}",
                self.noise
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::NonFinite("amplitude"));
        }
        if let Some(s) = self.spike {
            if s.col >= self.width || s.row >= self.height || !s.magnitude.is_finite() {
                return Err(Error::config(
                    "spike must lie inside the grid with finite magnitude",
                ));
            }
        }
        Ok(())
    }

    fn axis_center(&self, c: f64) -> f64 {
        if self.subpixel {
            c
        } else {
            quantize(c) as f64
        }
    }
}

fn add_noise(values: &mut [f64], amplitude: f64, rng: &mut ChaCha8Rng) {
    if amplitude > 0.0 {
        for v in values {
            *v += rng.random::<f64>() * amplitude;
        }
    }
}

pub fn synth_vector(
    len: usize,
    center: f64,
    amplitude: f64,
    label: &LabelConfig,
    subpixel: bool,
) -> Vec<f64> {
    let c = if subpixel {
        center
    } else {
        quantize(center) as f64
    };
    (0..len)
        .map(|i| amplitude * label.response((i as f64 - c).abs()))
        .collect()
}

pub fn synth_heatmap(spec: &SynthSpec) -> Result<Heatmap> {
    spec.validate()?;
    let cx = spec.axis_center(spec.center.x);
    let cy = spec.axis_center(spec.center.y);
    let mut values = Vec::with_capacity(spec.width * spec.height);
    for row in 0..spec.height {
        let dy = row as f64 - cy;
        for col in 0..spec.width {
            let dx = col as f64 - cx;
            values.push(spec.amplitude * spec.label.response(dx.hypot(dy)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise(&mut values, spec.noise, &mut rng);
    let mut h = Heatmap::new(spec.height, spec.width, values)?;
    if let Some(s) = spec.spike {
        *h.get_mut(s.row, s.col) += s.magnitude;
    }
    Ok(h)
}

/// Vector pair as a trained band-pooled output would present it.
pub fn synth_vector_pair(spec: &SynthSpec) -> Result<GaussianVectorPair> {
    spec.validate()?;
    let mut x = synth_vector(
        spec.width,
        spec.center.x,
        spec.amplitude,
        &spec.label,
        spec.subpixel,
    );
    let mut y = synth_vector(
        spec.height,
        spec.center.y,
        spec.amplitude,
        &spec.label,
        spec.subpixel,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    add_noise(&mut x, spec.noise, &mut rng);
    add_noise(&mut y, spec.noise, &mut rng);
    Ok(GaussianVectorPair::new(x, y, 0))
}

/// Argmax that also reports how many comparisons it made.
pub fn counted_argmax<T: PartialOrd + Copy>(v: &[T]) -> (usize, u64) {
    let mut best = 0;
    let mut comparisons = 0u64;
    for i in 1..v.len() {
        comparisons += 1;
        if v[i] > v[best] {
            best = i;
        }
    }
    (best, comparisons)
}

pub fn ops_2d(n: usize) -> u64 {
    (n * n) as u64 - 1
}

pub fn ops_vec(n: usize) -> u64 {
    2 * (n as u64 - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub ops_2d: u64,
    pub ops_vec: u64,
    pub wall_2d_ns: u64,
    pub wall_vec_ns: u64,
    pub bytes_2d: u64,
    pub bytes_vec: u64,
}

impl BenchRow {
    pub fn payload_ratio(&self) -> f64 {
        self.bytes_2d as f64 / self.bytes_vec as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub landmarks: usize,
    pub trials: usize,
    pub rows: Vec<BenchRow>,
    /// `None` with fewer than three sizes.
    pub exponent_2d: Option<f64>,
    pub exponent_vec: Option<f64>,
}

fn median(mut samples: Vec<u64>) -> u64 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

fn bench_one(n: usize, landmarks: usize, trials: usize) -> BenchRow {
    // f32 matches the on-disk tensor payloads; fill with a deterministic
    // pattern whose maximum is not at index 0 to keep the branch honest.
    let heat: Vec<f32> = (0..landmarks * n * n)
        .map(|i| ((i.wrapping_mul(2_654_435_761)) % 1000) as f32)
        .collect();
    let vectors: Vec<f32> = (0..landmarks * n * 2)
        .map(|i| ((i.wrapping_mul(2_654_435_761)) % 1000) as f32)
        .collect();

    let run_2d = || {
        let mut ops = 0;
        let mut sink = 0usize;
        for channel in heat.chunks_exact(n * n) {
            let (idx, c) = counted_argmax(channel);
            sink = sink.wrapping_add(idx);
            ops += c;
        }
        (ops, sink)
    };
    let run_vec = || {
        let mut ops = 0;
        let mut sink = 0usize;
        // (L, N, 2) layout; each axis is a strided view, copy out as the
        // decoder would.
        let mut axis = vec![0f32; n];
        for channel in vectors.chunks_exact(n * 2) {
            for offset in 0..2 {
                for (dst, src) in axis.iter_mut().zip(channel.iter().skip(offset).step_by(2)) {
                    *dst = *src;
                }
                let (idx, c) = counted_argmax(&axis);
                sink = sink.wrapping_add(idx);
                ops += c;
            }
        }
        (ops, sink)
    };

    let mut wall_2d = Vec::with_capacity(trials);
    let mut wall_vec = Vec::with_capacity(trials);
    let (mut ops_2d_total, mut ops_vec_total) = (0, 0);
    for _ in 0..trials {
        let t = Instant::now();
        let (ops, sink) = run_2d();
        wall_2d.push(t.elapsed().as_nanos() as u64);
        std::hint::black_box(sink);
        ops_2d_total = ops;

        let t = Instant::now();
        let (ops, sink) = run_vec();
        wall_vec.push(t.elapsed().as_nanos() as u64);
        std::hint::black_box(sink);
        ops_vec_total = ops;
    }
    let l = landmarks as u64;
    BenchRow {
        n,
        ops_2d: ops_2d_total,
        ops_vec: ops_vec_total,
        wall_2d_ns: median(wall_2d),
        wall_vec_ns: median(wall_vec),
        bytes_2d: l * (n * n) as u64 * 4,
        bytes_vec: l * n as u64 * 2 * 4,
    }
}

/// Runs the cost study on the calling thread.
pub fn bench_decode(sizes: &[usize], landmarks: usize, trials: usize) -> Result<BenchReport> {
    if sizes.is_empty() {
        return Err(Error::Empty("sizes"));
    }
    if sizes.iter().any(|&n| n < 2) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("sizes must be strictly ascending and >= 2"));
    }
    if landmarks == 0 {
        return Err(Error::config("landmarks must be >= 1"));
    }
    if trials < 3 {
        return Err(Error::config(format!("trials must be >= 3, got {trials}")));
    }
    let rows: Vec<BenchRow> = sizes
        .iter()
        .map(|&n| bench_one(n, landmarks, trials))
        .collect();
    let (exponent_2d, exponent_vec) = if rows.len() >= 3 {
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let c2: Vec<f64> = rows.iter().map(|r| r.ops_2d as f64).collect();
        let cv: Vec<f64> = rows.iter().map(|r| r.ops_vec as f64).collect();
        (
            Some(fit_scaling_exponent(&ns, &c2)?),
            Some(fit_scaling_exponent(&ns, &cv)?),
        )
    } else {
        (None, None)
    };
    Ok(BenchReport {
        landmarks,
        trials,
        rows,
        exponent_2d,
        exponent_vec,
    })
}

/// Least-squares slope of `ln(cost)` against `ln(n)`.
pub fn fit_scaling_exponent(ns: &[f64], costs: &[f64]) -> Result<f64> {
    if ns.len() != costs.len() {
        return Err(Error::LengthMismatch {
            expected: ns.len(),
            actual: costs.len(),
        });
    }
    if ns.len() < 3 {
        return Err(Error::config(
            "need at least three points to fit an exponent",
        ));
    }
    if ns.iter().chain(costs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::config("sizes and costs must be positive"));
    }
    let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = costs.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::config("all sizes are equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpm::{bpm_apply, BpmConfig};
    use crate::codec::{encode_heatmap_label, HeatmapStack};
    use crate::decode::{argmax_1d, decode_pair, DecodeConfig};

    #[test]
    fn noise_free_matches_encoder() {
        let p = Point2::new(30.4, 17.6);
        let spec = SynthSpec::new(64, 64, p);
        let expected = encode_heatmap_label(p, 64, 64, &LabelConfig::default()).unwrap();
        assert_eq!(synth_heatmap(&spec).unwrap(), expected);
    }

    #[test]
    fn out_of_grid_tail() {
        let mut spec = SynthSpec::new(64, 64, Point2::new(-2.0, 30.0));
        spec.amplitude = 2.0;
        spec.label = LabelConfig::with_sigma_theta(2.0, 0.0).unwrap();
        let h = synth_heatmap(&spec).unwrap();
        assert!((h.get(30, 0) / spec.amplitude - (-0.5f64).exp()).abs() < 1e-15);
        let pair = synth_vector_pair(&spec).unwrap();
        assert!((pair.x[0] / 2.0 - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(pair.y[30], 2.0);
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let mut spec = SynthSpec::new(32, 24, Point2::new(10.0, 11.0));
        spec.noise = 0.3;
        spec.seed = 7;
        let a = synth_heatmap(&spec).unwrap();
        let b = synth_heatmap(&spec).unwrap();
        let bytes = |h: &Heatmap| {
            h.values()
                .iter()
                .flat_map(|v| v.to_le_bytes())
                .collect::<Vec<_>>()
        };
        assert_eq!(bytes(&a), bytes(&b));
        spec.seed = 8;
        assert_ne!(synth_heatmap(&spec).unwrap(), a);
        assert!(a.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn spike_and_validation() {
        let mut spec = SynthSpec::new(16, 16, Point2::new(8.0, 8.0));
        spec.spike = Some(Spike {
            col: 2,
            row: 3,
            magnitude: 9.0,
        });
        assert_eq!(synth_heatmap(&spec).unwrap().get(3, 2), 9.0);
        spec.spike = Some(Spike {
            col: 16,
            row: 3,
            magnitude: 1.0,
        });
        assert!(synth_heatmap(&spec).is_err());
        spec.spike = None;
        spec.noise = -1.0;
        assert!(synth_heatmap(&spec).is_err());
        spec.noise = 0.0;
        spec.width = 0;
        assert!(synth_heatmap(&spec).is_err());
    }

    #[test]
    fn op_count_examples() {
        let r = bench_decode(&[64], 68, 3).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.ops_2d, 68 * 4095);
        assert_eq!(row.ops_vec, 68 * 126);
        assert_eq!(row.bytes_2d, 68 * 64 * 64 * 4);
        assert_eq!(row.bytes_vec, 68 * 64 * 2 * 4);
        assert_eq!(row.payload_ratio(), 32.0);
        assert_eq!(r.exponent_2d, None);

        let small = bench_decode(&[2], 1, 3).unwrap();
        assert_eq!((small.rows[0].ops_2d, small.rows[0].ops_vec), (3, 2));
    }

    #[test]
    fn op_counts_follow_closed_form() {
        let sizes: Vec<usize> = (2..40).collect();
        let r = bench_decode(&sizes, 2, 3).unwrap();
        for row in &r.rows {
            assert_eq!(row.ops_2d, 2 * ops_2d(row.n));
            assert_eq!(row.ops_vec, 2 * ops_vec(row.n));
        }
        assert_eq!(counted_argmax(&[1.0, 3.0, 3.0, 2.0]), (1, 3));
        assert_eq!(counted_argmax::<f32>(&[]), (0, 0));
    }

    #[test]
    fn bench_validation() {
        assert!(bench_decode(&[], 1, 3).is_err());
        assert!(bench_decode(&[64, 32], 1, 3).is_err());
        assert!(bench_decode(&[1, 32], 1, 3).is_err());
        assert!(bench_decode(&[32], 0, 3).is_err());
        assert!(bench_decode(&[32], 1, 2).is_err());
    }

    #[test]
    fn exponent_fits() {
        let ns = [32.0, 64.0, 128.0, 256.0, 512.0];
        let sq: Vec<f64> = ns.iter().map(|n| n * n).collect();
        assert!((fit_scaling_exponent(&ns, &sq).unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<f64> = ns.iter().map(|n| 7.0 * n).collect();
        assert!((fit_scaling_exponent(&ns, &lin).unwrap() - 1.0).abs() < 1e-12);
        let c2: Vec<f64> = ns.iter().map(|&n| ops_2d(n as usize) as f64).collect();
        let cv: Vec<f64> = ns.iter().map(|&n| ops_vec(n as usize) as f64).collect();
        let e2 = fit_scaling_exponent(&ns, &c2).unwrap();
        let ev = fit_scaling_exponent(&ns, &cv).unwrap();
        assert!((1.95..=2.05).contains(&e2), "{e2}");
        assert!((0.95..=1.05).contains(&ev), "{ev}");
        assert!(fit_scaling_exponent(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_scaling_exponent(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_scaling_exponent(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
    }

    #[test]
    fn band_pooling_tolerates_noise() {
        let bpm = BpmConfig::default();
        let dec = DecodeConfig::default().with_beyond_box(false);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut within = 0;
        for trial in 0..1000u64 {
            let p = Point2::new(rng.random_range(8.0..56.0), rng.random_range(8.0..56.0));
            // smooth unit-peak prediction, noise at 10% of its peak
            let mut spec = SynthSpec::new(64, 64, p);
            spec.label = LabelConfig::with_sigma_theta(2.0, 0.0).unwrap();
            spec.noise = 0.1;
            spec.seed = trial;
            let h = synth_heatmap(&spec).unwrap();
            let pair = &bpm_apply(&HeatmapStack::from_channels(&[h]).unwrap(), &bpm).unwrap()[0];
            let d = decode_pair(pair, &dec).unwrap();
            if (d.x - p.x).abs() <= 1.0 && (d.y - p.y).abs() <= 1.0 {
                within += 1;
            }
            // the pooled maximum itself stays on the quantized landmark
            assert!(
                argmax_1d(&pair.x)
                    .unwrap()
                    .0
                    .abs_diff(quantize(p.x) as usize)
                    <= 1
            );
        }
        assert!(within >= 990, "{within}/1000");
    }
}
