//! Deterministic rejection sampling of evaluation points. All randomness
//! flows from one explicitly seeded ChaCha8 stream, so a (domain, count,
//! seed) triple always reproduces the same samples, bit for bit, across
//! platforms and runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{families::MetricKind, FinslerMetric};
use crate::sample::TangentSample;
use crate::tol::SLIT_MARGIN;

/// One interval per coordinate.
pub type CoordBox = Vec<(f64, f64)>;

/// Per-coordinate sampling boxes for base points and tangent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub x_box: CoordBox,
    pub y_box: CoordBox,
}

impl DomainSpec {
    /// Validate intervals and dimensions against a metric.
    pub fn validate(&self, m: &FinslerMetric) -> Result<()> {
        let dim = m.dim();
        for (name, the_box) in [("x", &self.x_box), ("y", &self.y_box)] {
            if the_box.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "{name} box has {} intervals for dimension {dim}",
                    the_box.len()
                )));
            }
            for &(lo, hi) in the_box {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} box interval [{lo}, {hi}] is not a proper interval"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// What a drawn sample must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Chart, slit, and joint validity: every sample is fully evaluable.
    Full,
    /// Chart and slit only: samples where a product's squared value is
    /// non-positive are admitted, so downstream checks can witness the
    /// failure.
    ChartOnly,
}

/// Samples plus the base-point and fiber grids used by the classification
/// probes, all drawn from one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub samples: Vec<TangentSample>,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Default sampling boxes for a metric: comfortably inside each family's
/// chart, with fiber coordinates of order one.
pub fn default_domain(m: &FinslerMetric) -> DomainSpec {
    fn boxes(kind: &MetricKind) -> (CoordBox, CoordBox) {
        let dim = kind.dim();
        match kind {
            // The chart box is scaled so its corners stay at radius 0.8:
            // tensor entries grow like 1/(1 - |x|^2)^2 toward the unit
            // sphere, and samples there are too ill-conditioned for
            // finite-difference cross-checks.
            MetricKind::Klein { dim } => {
                let a = 0.8 / (*dim as f64).sqrt();
                (vec![(-a, a); *dim], vec![(-2.0, 2.0); *dim])
            }
            MetricKind::Randers(form) => (form.x_box.clone(), vec![(-2.0, 2.0); dim]),
            // The blend's coupling term outgrows its diagonal blocks once
            // x1 x3 gets large and the tensor stops being positive-definite;
            // the default box stays in the numerically certified region.
            MetricKind::MinkowskiBlend { .. } => (
                vec![(0.1, 0.6), (-1.0, 1.0), (0.1, 0.6), (-1.0, 1.0)],
                vec![(0.1, 2.0), (-2.0, 2.0), (0.1, 2.0), (-2.0, 2.0)],
            ),
            MetricKind::FunkBlend { dim, .. } => {
                // Same corner-radius cap as the other ball chart.
                let n2 = dim - 3;
                let a = 0.7 / (n2 as f64).sqrt();
                let mut x = vec![(-1.0, 1.0); 3];
                x.extend(vec![(-a, a); n2]);
                (x, vec![(-2.0, 2.0); *dim])
            }
            MetricKind::Convolution(spec) | MetricKind::Warped { spec, .. } => {
                let (mut x1, mut y1) = boxes(spec.first_metric().kind());
                let (x2, y2) = boxes(spec.second_metric().kind());
                x1.extend(x2);
                y1.extend(y2);
                (x1, y1)
            }
            _ => (vec![(-1.0, 1.0); dim], vec![(-2.0, 2.0); dim]),
        }
    }
    let (x_box, y_box) = boxes(m.kind());
    DomainSpec { x_box, y_box }
}

fn draw_point(rng: &mut ChaCha8Rng, the_box: &[(f64, f64)]) -> Vec<f64> {
    the_box
        .iter()
        .map(|&(lo, hi)| rng.random_range(lo..hi))
        .collect()
}

/// Fiber acceptance: slit constraints plus a conditioning margin keeping
/// every factor block's norm of order one.
fn y_acceptable(m: &FinslerMetric, y: &[f64]) -> bool {
    if m.check_slit(y).is_err() {
        return false;
    }
    let norm_sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    let margin_sq = SLIT_MARGIN * SLIT_MARGIN;
    match m.split() {
        None => norm_sq(y) >= margin_sq,
        Some((n1, _)) => norm_sq(&y[..n1]) >= margin_sq && norm_sq(&y[n1..]) >= margin_sq,
    }
}

const MAX_TRIES_PER_SAMPLE: usize = 10_000;

fn rejection<T>(
    needed: usize,
    mut attempt: impl FnMut() -> Option<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(needed);
    let mut tries = 0usize;
    while out.len() < needed {
        tries += 1;
        if tries > MAX_TRIES_PER_SAMPLE * needed {
            return Err(Error::InsufficientSamples {
                needed,
                got: out.len(),
            });
        }
        if let Some(v) = attempt() {
            out.push(v);
        }
    }
    Ok(out)
}

/// Draw `count` tangent samples from the domain boxes.
pub fn draw_samples(
    m: &FinslerMetric,
    domain: &DomainSpec,
    count: usize,
    seed: u64,
    mode: SampleMode,
) -> Result<Vec<TangentSample>> {
    domain.validate(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_samples_with(m, domain, count, &mut rng, mode)
}

fn draw_samples_with(
    m: &FinslerMetric,
    domain: &DomainSpec,
    count: usize,
    rng: &mut ChaCha8Rng,
    mode: SampleMode,
) -> Result<Vec<TangentSample>> {
    rejection(count, || {
        let x = draw_point(rng, &domain.x_box);
        let y = draw_point(rng, &domain.y_box);
        if m.check_chart(&x).is_err() || !y_acceptable(m, &y) {
            return None;
        }
        let s = TangentSample::new(x, y).ok()?;
        match mode {
            SampleMode::Full => m.check_domain(&s).is_ok().then_some(s),
            SampleMode::ChartOnly => Some(s),
        }
    })
}

/// Draw samples plus separate base-point and fiber grids for the probes.
/// Everything comes from a single stream seeded with `seed`, in a fixed
/// order: samples, then base points, then fiber vectors.
pub fn build_plan(
    m: &FinslerMetric,
    domain: &DomainSpec,
    count: usize,
    grid_x: usize,
    grid_y: usize,
    seed: u64,
) -> Result<SamplePlan> {
    domain.validate(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = draw_samples_with(m, domain, count, &mut rng, SampleMode::Full)?;
    let xs = rejection(grid_x, || {
        let x = draw_point(&mut rng, &domain.x_box);
        m.check_chart(&x).is_ok().then_some(x)
    })?;
    let ys = rejection(grid_y, || {
        let y = draw_point(&mut rng, &domain.y_box);
        y_acceptable(m, &y).then_some(y)
    })?;
    Ok(SamplePlan {
        samples,
        xs,
        ys,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build, ZooSpec};

    #[test]
    fn sampling_is_deterministic() {
        let m = build(&ZooSpec::Klein { dim: 3 }).unwrap();
        let dom = default_domain(&m);
        let a = draw_samples(&m, &dom, 50, 123, SampleMode::Full).unwrap();
        let b = draw_samples(&m, &dom, 50, 123, SampleMode::Full).unwrap();
        assert_eq!(a, b);
        let c = draw_samples(&m, &dom, 50, 124, SampleMode::Full).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn samples_satisfy_the_domain() {
        let m = build(&ZooSpec::MinkowskiBlend {
            coupling: 2.0,
            power: 2,
        })
        .unwrap();
        let dom = default_domain(&m);
        let samples = draw_samples(&m, &dom, 100, 9, SampleMode::Full).unwrap();
        assert_eq!(samples.len(), 100);
        for s in &samples {
            m.check_domain(s).unwrap();
            assert!(s.y[0] > 0.0 && s.y[2] > 0.0);
        }
    }

    #[test]
    fn plan_draws_grids_inside_the_chart() {
        let m = build(&ZooSpec::Klein { dim: 2 }).unwrap();
        let dom = default_domain(&m);
        let plan = build_plan(&m, &dom, 30, 12, 8, 5).unwrap();
        assert_eq!(plan.samples.len(), 30);
        assert_eq!(plan.xs.len(), 12);
        assert_eq!(plan.ys.len(), 8);
        for x in &plan.xs {
            m.check_chart(x).unwrap();
        }
        for y in &plan.ys {
            assert!(y.iter().map(|v| v * v).sum::<f64>().sqrt() >= SLIT_MARGIN);
        }
    }

    #[test]
    fn bad_domain_is_rejected() {
        let m = build(&ZooSpec::Euclidean { dim: 2 }).unwrap();
        let dom = DomainSpec {
            x_box: vec![(0.0, 1.0)],
            y_box: vec![(0.0, 1.0), (0.0, 1.0)],
        };
        assert!(draw_samples(&m, &dom, 5, 0, SampleMode::Full).is_err());
        let dom2 = DomainSpec {
            x_box: vec![(0.0, 1.0), (1.0, 1.0)],
            y_box: vec![(0.0, 1.0), (0.0, 1.0)],
        };
        assert!(draw_samples(&m, &dom2, 5, 0, SampleMode::Full).is_err());
    }

    #[test]
    fn impossible_domain_reports_insufficient_samples() {
        let m = build(&ZooSpec::Klein { dim: 2 }).unwrap();
        // A box entirely outside the unit ball can never satisfy the chart.
        let dom = DomainSpec {
            x_box: vec![(2.0, 3.0), (2.0, 3.0)],
            y_box: vec![(-1.0, 1.0), (-1.0, 1.0)],
        };
        match draw_samples(&m, &dom, 3, 0, SampleMode::Full) {
            Err(Error::InsufficientSamples { needed: 3, .. }) => {}
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
    }
}
