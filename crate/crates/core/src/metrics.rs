//! Evaluation metrics: NME under a normalization scheme, CED, AUC and FR.
//!
//! CED counts a sample as a success when its error is `<= t` and FR counts a
//! failure when it is `> t`, so `CED(t) + FR(t) == 1` for every threshold.

use serde::{Deserialize, Serialize};

use crate::{Error, LandmarkSet, Point2, Result};

pub const DEFAULT_AUC_THRESHOLD: f64 = 0.10;
pub const JD_AUC_THRESHOLD: f64 = 0.08;
pub const DEFAULT_FR_THRESHOLD: f64 = 0.10;
/// Number of CED samples reported by [`evaluate`], `0..=auc_threshold`.
pub const CED_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    InterPupil,
    InterOcular,
    BboxGeometricMean,
    ExplicitPairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScheme {
    kind: NormKind,
    left_indices: Vec<usize>,
    right_indices: Vec<usize>,
}

impl NormScheme {
    pub fn new(
        kind: NormKind,
        left_indices: Vec<usize>,
        right_indices: Vec<usize>,
    ) -> Result<Self> {
        if kind != NormKind::BboxGeometricMean {
            if left_indices.is_empty() || right_indices.is_empty() {
                return Err(Error::config("reference index groups must be non-empty"));
            }
            if left_indices.iter().any(|i| right_indices.contains(i)) {
                return Err(Error::config("reference index groups must be disjoint"));
            }
        }
        Ok(Self {
            kind,
            left_indices,
            right_indices,
        })
    }

    pub fn bbox_geometric_mean() -> Self {
        Self {
            kind: NormKind::BboxGeometricMean,
            left_indices: Vec::new(),
            right_indices: Vec::new(),
        }
    }

    /// Reference groups for common annotation layouts (0-based indices).
    ///
    /// These follow the usual community conventions: 68 points (300W) uses
    /// the outer eye corners 36/45 for inter-ocular and the means of 36-41 and
    /// 42-47 for inter-pupil; 98 points (WFLW) uses corners 60/72 and pupils
    /// 96/97; 29 points (COFW) uses corners 8/9 and pupils 16/17.
    pub fn preset(kind: NormKind, n_landmarks: usize) -> Result<Self> {
        let groups = match (kind, n_landmarks) {
            (NormKind::BboxGeometricMean, _) => return Ok(Self::bbox_geometric_mean()),
            (NormKind::InterOcular, 68) => (vec![36], vec![45]),
            (NormKind::InterPupil, 68) => ((36..42).collect(), (42..48).collect()),
            (NormKind::InterOcular, 98) => (vec![60], vec![72]),
            (NormKind::InterPupil, 98) => (vec![96], vec![97]),
            (NormKind::InterOcular, 29) => (vec![8], vec![9]),
            (NormKind::InterPupil, 29) => (vec![16], vec![17]),
            _ => {
                return Err(Error::config(format!(
                    "no {kind:?} preset for {n_landmarks} landmarks; pass explicit indices"
                )))
            }
        };
        Self::new(kind, groups.0, groups.1)
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn left_indices(&self) -> &[usize] {
        &self.left_indices
    }

    pub fn right_indices(&self) -> &[usize] {
        &self.right_indices
    }
}

fn group_mean(points: &[Point2], indices: &[usize]) -> Result<Point2> {
    let mut sum = Point2::default();
    for &i in indices {
        let p = points.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: points.len(),
        })?;
        sum.x += p.x;
        sum.y += p.y;
    }
    let n = indices.len() as f64;
    Ok(Point2::new(sum.x / n, sum.y / n))
}

pub fn normalization_distance(gt: &LandmarkSet, scheme: &NormScheme) -> Result<f64> {
    let d = match scheme.kind {
        NormKind::BboxGeometricMean => {
            let first = gt
                .points
                .first()
                .ok_or(Error::Empty("ground truth landmarks"))?;
            let (mut lo, mut hi) = (*first, *first);
            for p in &gt.points {
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
            ((hi.x - lo.x) * (hi.y - lo.y)).sqrt()
        }
        _ => {
            let left = group_mean(&gt.points, &scheme.left_indices)?;
            let right = group_mean(&gt.points, &scheme.right_indices)?;
            left.distance(&right)
        }
    };
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::DegenerateNormalization)
    }
}

pub fn nme(pred: &LandmarkSet, gt: &LandmarkSet, d: f64) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            actual: pred.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::Empty("landmark set"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::DegenerateNormalization);
    }
    let dists: Vec<f64> = pred
        .points
        .iter()
        .zip(&gt.points)
        .map(|(p, g)| p.distance(g))
        .collect();
    Ok(pairwise_sum(&dists) / gt.len() as f64 / d)
}

/// Sum with a fixed binary reduction tree, independent of scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn check_errors(errors: &[f64]) -> Result<()> {
    if errors.iter().all(|e| e.is_finite() && *e >= 0.0) {
        Ok(())
    } else {
        Err(Error::config("errors must be finite and non-negative"))
    }
}

fn success_fraction(errors: &[f64], t: f64) -> f64 {
    errors.iter().filter(|&&e| e <= t).count() as f64 / errors.len() as f64
}

/// Fraction of errors `<= t` at each threshold, in the given order.
pub fn ced(errors: &[f64], thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_errors(errors)?;
    if errors.is_empty() {
        return Err(Error::Empty("errors"));
    }
    Ok(thresholds
        .iter()
        .map(|&t| (t, success_fraction(errors, t)))
        .collect())
}

/// Normalized area under the CED step function on `[0, max_t]`.
///
/// Each sample contributes `max(0, max_t - e)`, which is the exact integral of
/// its indicator `e <= t`.
pub fn auc(errors: &[f64], max_t: f64) -> Result<f64> {
    check_errors(errors)?;
    if errors.is_empty() {
        return Err(Error::Empty("errors"));
    }
    if !(max_t > 0.0 && max_t.is_finite()) {
        return Err(Error::config(format!(
            "AUC threshold must be > 0, got {max_t}"
        )));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let areas: Vec<f64> = sorted.iter().map(|&e| (max_t - e).max(0.0)).collect();
    Ok(pairwise_sum(&areas) / (errors.len() as f64 * max_t))
}

/// Fraction of errors strictly greater than `t`.
pub fn fr(errors: &[f64], t: f64) -> Result<f64> {
    check_errors(errors)?;
    if errors.is_empty() {
        return Err(Error::Empty("errors"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::config(format!("FR threshold must be > 0, got {t}")));
    }
    Ok(errors.iter().filter(|&&e| e > t).count() as f64 / errors.len() as f64)
}

/// Evenly spaced thresholds `0..=max_t`.
pub fn ced_grid(max_t: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![max_t],
        n => (0..n).map(|i| max_t * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_sample_nme: Vec<f64>,
    pub mean_nme: f64,
    pub auc: f64,
    pub auc_threshold: f64,
    pub fr: f64,
    pub fr_threshold: f64,
    /// `(threshold, fraction)` pairs in ascending threshold order.
    pub ced: Vec<(f64, f64)>,
}

impl EvalReport {
    pub fn from_errors(per_sample_nme: Vec<f64>, auc_t: f64, fr_t: f64) -> Result<Self> {
        let mean_nme = {
            if per_sample_nme.is_empty() {
                return Err(Error::Empty("samples"));
            }
            pairwise_sum(&per_sample_nme) / per_sample_nme.len() as f64
        };
        Ok(Self {
            auc: auc(&per_sample_nme, auc_t)?,
            fr: fr(&per_sample_nme, fr_t)?,
            ced: ced(&per_sample_nme, &ced_grid(auc_t, CED_POINTS))?,
            mean_nme,
            auc_threshold: auc_t,
            fr_threshold: fr_t,
            per_sample_nme,
        })
    }
}

pub fn evaluate(
    preds: &[LandmarkSet],
    gts: &[LandmarkSet],
    scheme: &NormScheme,
    auc_t: f64,
    fr_t: f64,
) -> Result<EvalReport> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            expected: gts.len(),
            actual: preds.len(),
        });
    }
    if gts.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let errors = preds
        .iter()
        .zip(gts)
        .map(|(p, g)| nme(p, g, normalization_distance(g, scheme)?))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_errors(errors, auc_t, fr_t)
}
