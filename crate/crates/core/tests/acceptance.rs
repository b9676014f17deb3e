//! Acceptance suite. Run with `cargo test -p gvec-core --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::time::Instant;

use gvec_core::bench::{bench_decode, synth_vector, synth_vector_pair, SynthSpec};
use gvec_core::bpm::{band_pool, bpm_apply, Band, BpmConfig};
use gvec_core::codec::{
    encode_heatmap_label, encode_vector_label, GaussianVectorPair, HeatmapStack, LabelConfig,
};
use gvec_core::decode::{decode_pair, decode_stack, DecodeConfig};
use gvec_core::geometry::{square_box, CropTransform, FaceBox};
use gvec_core::io::{read_pts, read_tensor, write_pts, write_tensor, PtsFile, Tensor};
use gvec_core::metrics::{auc, evaluate, NormKind, NormScheme};
use gvec_core::{LandmarkSet, Point2, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn argmax2d(values: &[f64], width: usize) -> (usize, usize) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    (best % width, best / width)
}

fn round_trip_codec() -> Outcome {
    let start = Instant::now();
    let label = LabelConfig::default();
    let shift = DecodeConfig::default();
    let no_shift = DecodeConfig::default().with_shift_delta(0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut worst_integer: f64 = 0.0;
    for _ in 0..1000 {
        let p = Point2::new(
            rng.random_range(0..64) as f64,
            rng.random_range(0..64) as f64,
        );
        let d = decode_pair(&encode_vector_label(p, 64, 64, &label).unwrap(), &shift).unwrap();
        worst_integer = worst_integer.max((d.x - p.x).abs()).max((d.y - p.y).abs());
    }

    // Label route: the encoded profile for every continuous point.
    let mut worst_label: f64 = 0.0;
    // Predicted-profile route: Gaussian sampled at continuous distance.
    let unboosted = LabelConfig::with_sigma_theta(2.0, 0.0).unwrap();
    let mut worst_smooth: f64 = 0.0;
    let (mut mae_shift, mut mae_plain) = (0.0, 0.0);
    for _ in 0..1000 {
        let p = Point2::new(rng.random_range(1.0..62.0), rng.random_range(1.0..62.0));
        let pair = encode_vector_label(p, 64, 64, &label).unwrap();
        for cfg in [&shift, &no_shift] {
            let d = decode_pair(&pair, cfg).unwrap();
            worst_label = worst_label.max((d.x - p.x).abs()).max((d.y - p.y).abs());
        }
        let mut spec = SynthSpec::new(64, 64, p);
        spec.label = unboosted;
        spec.subpixel = true;
        let smooth = synth_vector_pair(&spec).unwrap();
        let a = decode_pair(&smooth, &shift).unwrap();
        let b = decode_pair(&smooth, &no_shift).unwrap();
        worst_smooth = worst_smooth
            .max((a.x - p.x).abs())
            .max((a.y - p.y).abs())
            .max((b.x - p.x).abs())
            .max((b.y - p.y).abs());
        mae_shift += (a.x - p.x).abs() + (a.y - p.y).abs();
        mae_plain += (b.x - p.x).abs() + (b.y - p.y).abs();
    }
    mae_shift /= 2000.0;
    mae_plain /= 2000.0;
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst_integer == 0.0
            && worst_label <= 0.5
            && worst_smooth <= 0.5
            && mae_shift < mae_plain
            && elapsed < 2.0,
        format!(
            "integer max err {worst_integer}, continuous max err {:.4}, MAE shift {mae_shift:.4} < no-shift {mae_plain:.4}, {elapsed:.3}s",
            worst_label.max(worst_smooth)
        ),
    )
}

fn scaled_box(b: &FaceBox, factor: f64) -> FaceBox {
    let c = b.center();
    let (w, h) = (b.width * factor, b.height * factor);
    FaceBox::new(c.x - w / 2.0, c.y - h / 2.0, w, h).unwrap()
}

fn mean_error(pred: &LandmarkSet, gt: &LandmarkSet) -> f64 {
    pred.points
        .iter()
        .zip(&gt.points)
        .map(|(a, b)| a.distance(b))
        .sum::<f64>()
        / gt.len() as f64
}

fn beyond_box_inversion() -> Outcome {
    let cfg = DecodeConfig::default();
    let label = LabelConfig::with_sigma_theta(2.0, 0.0).unwrap();
    let mut worst: f64 = 0.0;
    for x0 in (-5..=-1).chain(64..=68) {
        let x0 = x0 as f64;
        let pair = GaussianVectorPair::new(
            synth_vector(64, x0, cfg.tau(), &label, true),
            synth_vector(64, 32.0, cfg.tau(), &label, true),
            0,
        );
        let d = decode_pair(&pair, &cfg).unwrap();
        worst = worst.max((d.x - x0).abs()).max((d.y - 32.0).abs());
    }

    // Shrunken-box suite: crops cut 10% off each dimension of the tight box.
    let off = cfg.with_beyond_box(false);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut err_on, mut err_off) = (0.0, 0.0);
    let samples = 200;
    for s in 0..samples {
        let (bx, by) = (rng.random_range(0.0..400.0), rng.random_range(0.0..400.0));
        let (bw, bh) = (rng.random_range(80.0..200.0), rng.random_range(80.0..200.0));
        let points: Vec<Point2> = (0..68)
            .map(|_| {
                Point2::new(
                    bx + rng.random_range(0.0..bw),
                    by + rng.random_range(0.0..bh),
                )
            })
            .collect();
        let gt = LandmarkSet::new(Space::Image, points);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &gt.points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let tight = FaceBox::new(x0, y0, x1 - x0, y1 - y0).unwrap();
        let crop = square_box(&scaled_box(&tight, 0.9));
        let t = CropTransform::new(crop, 256, 4).unwrap();
        let side = t.heatmap_side();
        let pairs: Vec<_> = gt
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut spec = SynthSpec::new(side, side, t.to_heatmap_space(*p));
                spec.amplitude = cfg.tau();
                spec.label = label;
                spec.subpixel = true;
                spec.noise = 0.01;
                spec.seed = (s * 68 + k) as u64;
                synth_vector_pair(&spec).unwrap()
            })
            .collect();
        err_on += mean_error(&decode_stack(&pairs, &cfg, &t).unwrap(), &gt);
        err_off += mean_error(&decode_stack(&pairs, &off, &t).unwrap(), &gt);
    }
    err_on /= samples as f64;
    err_off /= samples as f64;
    check(
        worst <= 0.5 && err_on < err_off,
        format!("closed-form max err {worst:.2e}; shrunken-box mean err {err_on:.4} (on) < {err_off:.4} (off) px"),
    )
}

fn imbalance() -> Outcome {
    let label = LabelConfig::default();
    let p = Point2::new(32.0, 32.0);
    let heat = encode_heatmap_label(p, 64, 64, &label)
        .unwrap()
        .foreground_fraction();
    let vec = encode_vector_label(p, 64, 64, &label)
        .unwrap()
        .foreground_fraction();
    let ratio = vec / heat;
    check(
        (0.025..=0.045).contains(&heat)
            && (0.15..=0.22).contains(&vec)
            && ratio >= 5.0
            && heat == 109.0 / 4096.0
            && vec == 22.0 / 128.0,
        format!("heatmap {heat:.4} (109/4096), vector {vec:.4} (22/128), ratio {ratio:.2}"),
    )
}

fn bpm_robustness() -> Outcome {
    let label = LabelConfig::default();
    let p = Point2::new(30.0, 30.0);
    let mut h = encode_heatmap_label(p, 64, 64, &label).unwrap();
    *h.get_mut(30, 34) += label.peak_value();
    let (ax, ay) = argmax2d(h.values(), 64);
    let displacement = Point2::new(ax as f64, ay as f64).distance(&p);
    let mut ok = displacement >= 3.0;
    let mut detail = format!("2D argmax displaced {displacement} px;");
    let stack = HeatmapStack::from_channels(std::slice::from_ref(&h)).unwrap();
    for l in [3, 5] {
        let vx = band_pool(h.view(), Band::Vertical, l).unwrap();
        let vy = band_pool(h.view(), Band::Horizontal, l).unwrap();
        let ix = gvec_core::decode::argmax_1d(&vx).unwrap().0;
        let iy = gvec_core::decode::argmax_1d(&vy).unwrap().0;
        let fused = &bpm_apply(&stack, &BpmConfig::single(l).unwrap()).unwrap()[0];
        let d = decode_pair(
            fused,
            &DecodeConfig::default().with_shift_delta(0.0).unwrap(),
        )
        .unwrap();
        ok &= ix == 30 && iy == 30 && d.x == 30.0 && d.y == 30.0;
        detail.push_str(&format!(" l={l} pooled argmax ({ix}, {iy})"));
    }
    check(ok, detail)
}

fn complexity_scaling() -> Outcome {
    let report = bench_decode(&[32, 64, 128, 256, 512], 68, 3).unwrap();
    let e2 = report.exponent_2d.unwrap();
    let ev = report.exponent_vec.unwrap();
    let row = report.rows.iter().find(|r| r.n == 64).unwrap();
    let heat_bytes = Tensor::new(vec![68, 64, 64], vec![0.0; 68 * 64 * 64])
        .unwrap()
        .payload_bytes() as u64;
    let vec_bytes = Tensor::new(vec![68, 64, 2], vec![0.0; 68 * 64 * 2])
        .unwrap()
        .payload_bytes() as u64;
    let speedups: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "N={} {:.1}x",
                r.n,
                r.wall_2d_ns as f64 / r.wall_vec_ns.max(1) as f64
            )
        })
        .collect();
    check(
        (e2 - 2.0).abs() <= 0.05
            && (ev - 1.0).abs() <= 0.05
            && row.payload_ratio() == 32.0
            && row.bytes_2d == heat_bytes
            && row.bytes_vec == vec_bytes,
        format!(
            "exponents 2D {e2:.4}, vector {ev:.4}; payload {}:{} = {}:1; wall speedup (informative) {}",
            row.bytes_2d,
            row.bytes_vec,
            row.payload_ratio(),
            speedups.join(", ")
        ),
    )
}

fn metrics_fixtures() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let faces: Vec<LandmarkSet> = (0..10)
        .map(|_| {
            LandmarkSet::new(
                Space::Image,
                (0..68)
                    .map(|_| {
                        Point2::new(rng.random_range(0.0..200.0), rng.random_range(0.0..200.0))
                    })
                    .collect(),
            )
        })
        .collect();
    let scheme = NormScheme::preset(NormKind::InterOcular, 68).unwrap();
    let same = evaluate(&faces, &faces, &scheme, 0.10, 0.10).unwrap();
    let mut ok = same.mean_nme == 0.0 && same.auc == 1.0 && same.fr == 0.0;

    let gt = LandmarkSet::new(
        Space::Image,
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(100.0, 0.0),
            Point2::new(50.0, 40.0),
        ],
    );
    let shifted = |dx: f64, dy: f64| {
        LandmarkSet::new(
            Space::Image,
            gt.points
                .iter()
                .map(|p| Point2::new(p.x + dx, p.y + dy))
                .collect(),
        )
    };
    let pairs = NormScheme::new(NormKind::ExplicitPairs, vec![0], vec![1]).unwrap();
    let two = evaluate(
        &[shifted(3.0, 4.0), shifted(9.0, 12.0)],
        &[gt.clone(), gt.clone()],
        &pairs,
        0.10,
        0.10,
    )
    .unwrap();
    ok &= (two.mean_nme - 0.10).abs() < 1e-12 && two.fr == 0.5 && (two.auc - 0.25).abs() < 1e-12;

    let errors: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..0.15)).collect();
    let step = auc(&errors, 0.10).unwrap();
    let trap = trapezoid_auc(&errors, 0.10, 100_000);
    ok &= (step - trap).abs() <= 1e-3;
    check(
        ok,
        format!(
            "GT-vs-GT NME {} AUC {} FR {}; fixture NME {:.4} FR {} AUC {:.4}; step {step:.6} vs trapezoid {trap:.6}",
            same.mean_nme, same.auc, same.fr, two.mean_nme, two.fr, two.auc
        ),
    )
}

fn trapezoid_auc(errors: &[f64], max_t: f64, steps: usize) -> f64 {
    let ced = |t: f64| errors.iter().filter(|e| **e <= t).count() as f64 / errors.len() as f64;
    let h = max_t / steps as f64;
    let mut area = 0.0;
    let mut prev = ced(0.0);
    for i in 1..=steps {
        let next = ced(i as f64 * h);
        area += (prev + next) * h / 2.0;
        prev = next;
    }
    area / max_t
}

fn format_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..120);
        let pts = PtsFile::new(
            (0..n)
                .map(|_| {
                    Point2::new(
                        rng.random_range(-50.0..600.0),
                        rng.random_range(-50.0..600.0),
                    )
                })
                .collect(),
        );
        let text = write_pts(&pts);
        let back = read_pts(&text).unwrap();
        ok &= back == pts && write_pts(&back) == text;

        let rank = rng.random_range(1..=4);
        let dims: Vec<usize> = (0..rank).map(|_| rng.random_range(1..6)).collect();
        let len = dims.iter().product();
        let data: Vec<f32> = (0..len)
            .map(|_| f32::from_bits(rng.random::<u32>() & 0x7f7f_ffff))
            .collect();
        let t = Tensor::new(dims, data).unwrap();
        let bytes = write_tensor(&t);
        let back = read_tensor(&bytes).unwrap();
        ok &= write_tensor(&back) == bytes
            && back.dims() == t.dims()
            && back
                .data()
                .iter()
                .zip(t.data())
                .all(|(a, b)| a.to_bits() == b.to_bits());
    }
    check(
        ok,
        "100 .pts and 100 GVT fixtures byte-identical after read/write".to_string(),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("1 round-trip codec", round_trip_codec),
        ("2 beyond-box inversion", beyond_box_inversion),
        ("3 foreground imbalance", imbalance),
        ("4 band pooling robustness", bpm_robustness),
        ("5 complexity scaling", complexity_scaling),
        ("6 metrics fixtures", metrics_fixtures),
        ("7 format round trips", format_round_trips),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  criterion {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
