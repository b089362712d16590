//! Sampling-based classification of a metric's type. Each probe turns one
//! structural question — is the metric Riemannian? independent of the base
//! point? of Randers form? flat Euclidean? — into a numeric test over
//! supplied samples, and reports a verdict together with the evidence that
//! produced it. Probes never decide silently: samples a probe had to skip
//! are counted, and a probe that could not gather enough usable evidence
//! says so instead of guessing.

use serde::{Deserialize, Serialize};

use crate::convolution::{convolve, ConvolutionSpec};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::metric::FinslerMetric;
use crate::numeric::linalg::SymMatrix;
use crate::sample::TangentSample;
use crate::sampler::SamplePlan;
use crate::tol::Tolerances;

/// Fewest tangent samples the Riemannian probe accepts.
pub const MIN_SAMPLES: usize = 30;
/// Fewest base points the grid probes accept.
pub const MIN_BASE_POINTS: usize = 10;
/// Fewest usable evaluations before a probe calls itself unclassifiable.
const MIN_USABLE: usize = 10;

/// Grid sizes `(base points, fiber vectors)` giving every probe enough
/// evidence at the given dimension and sample budget. The fiber count is
/// driven by the Randers probe, whose least-squares fit needs one equation
/// per quadratic-form unknown plus one per drift component.
pub fn plan_grids(dim: usize, samples: usize) -> (usize, usize) {
    let fibers_needed = dim * (dim + 1) / 2 + dim + 2;
    let base = (samples / 20).clamp(MIN_BASE_POINTS, 40);
    let fibers = fibers_needed.max(MIN_SAMPLES).max(2 * dim + 8);
    (base, fibers)
}

/// A probe's decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Positive,
    Negative,
    /// Too little usable evidence to decide either way.
    Unclassifiable,
}

/// A verdict plus the numbers that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub verdict: Verdict,
    /// Worst deviation observed from the property being probed.
    pub max_deviation: f64,
    /// Threshold the deviation was compared against.
    pub tolerance: f64,
    /// Samples that contributed evidence.
    pub evaluated: usize,
    /// Samples skipped for domain or conditioning reasons.
    pub skipped: usize,
    /// Sample achieving the worst deviation, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TangentSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ProbeOutcome {
    fn unclassifiable(note: String, evaluated: usize, skipped: usize, tolerance: f64) -> Self {
        ProbeOutcome {
            verdict: Verdict::Unclassifiable,
            max_deviation: 0.0,
            tolerance,
            evaluated,
            skipped,
            witness: None,
            note: Some(note),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::Positive
    }
}

/// Is the metric Riemannian? Probes the Cartan tensor, which vanishes
/// identically exactly in the Riemannian case, at every supplied sample.
pub fn probe_riemannian(
    m: &FinslerMetric,
    samples: &[TangentSample],
    tol: &Tolerances,
) -> Result<ProbeOutcome> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let mut max_deviation = 0.0_f64;
    let mut witness = None;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for s in samples {
        match m.cartan_tensor(s, tol.cartan_step) {
            Ok(cartan) => {
                evaluated += 1;
                let dev = cartan.max_abs();
                if dev > max_deviation {
                    max_deviation = dev;
                    witness = Some(s.clone());
                }
            }
            Err(e) if e.is_sample_local() => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if evaluated < MIN_USABLE {
        return Ok(ProbeOutcome::unclassifiable(
            format!("only {evaluated} of {} samples were evaluable", samples.len()),
            evaluated,
            skipped,
            tol.derivative_probe,
        ));
    }
    let verdict = if max_deviation < tol.derivative_probe {
        Verdict::Positive
    } else {
        Verdict::Negative
    };
    Ok(ProbeOutcome {
        verdict,
        max_deviation,
        tolerance: tol.derivative_probe,
        evaluated,
        skipped,
        witness,
        note: None,
    })
}

/// Is the metric locally Minkowskian in these coordinates? Probes whether
/// the fundamental tensor depends on the base point: for each fiber vector,
/// tensors across all base points are compared entrywise.
pub fn probe_minkowski(
    m: &FinslerMetric,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ProbeOutcome> {
    if xs.len() < MIN_BASE_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_BASE_POINTS,
            got: xs.len(),
        });
    }
    if ys.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: ys.len(),
        });
    }
    let mut max_deviation = 0.0_f64;
    let mut witness = None;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    let mut compared_fibers = 0usize;
    for y in ys {
        let mut baseline: Option<SymMatrix> = None;
        let mut fiber_compared = false;
        for x in xs {
            let s = TangentSample::new(x.clone(), y.clone())?;
            match m.fundamental_tensor(&s) {
                Ok(g) => {
                    evaluated += 1;
                    match &baseline {
                        None => baseline = Some(g.matrix),
                        Some(first) => {
                            fiber_compared = true;
                            let dev = g.matrix.max_abs_diff(first);
                            if dev > max_deviation {
                                max_deviation = dev;
                                witness = Some(s);
                            }
                        }
                    }
                }
                Err(e) if e.is_sample_local() => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if fiber_compared {
            compared_fibers += 1;
        }
    }
    if compared_fibers == 0 {
        return Ok(ProbeOutcome::unclassifiable(
            "no fiber vector was evaluable at two or more base points".into(),
            evaluated,
            skipped,
            tol.derivative_probe,
        ));
    }
    let verdict = if max_deviation < tol.derivative_probe {
        Verdict::Positive
    } else {
        Verdict::Negative
    };
    Ok(ProbeOutcome {
        verdict,
        max_deviation,
        tolerance: tol.derivative_probe,
        evaluated,
        skipped,
        witness,
        note: None,
    })
}

/// Per-base-point evidence from the Randers probe: the fitted Riemannian
/// part, the fitted drift, and the fit quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandersFit {
    pub x: Vec<f64>,
    /// Fitted drift coefficients b with odd part ~ b . y.
    pub drift: Vec<f64>,
    /// Fitted quadratic form Q with even part squared ~ y^T Q y.
    pub quad: Vec<Vec<f64>>,
    /// Worst relative residual of the two fits at this base point.
    pub residual: f64,
    /// |b|_Q, the drift norm in the fitted Riemannian part; a Randers
    /// metric requires this below 1. Absent when the fitted quadratic part
    /// was not positive-definite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_norm: Option<f64>,
}

/// Outcome of the Randers probe plus its per-base-point fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandersProbe {
    pub outcome: ProbeOutcome,
    pub fits: Vec<RandersFit>,
}

/// Is the metric of Randers form F = sqrt(a(y,y)) + b(x).y? At each base
/// point, F is split into even and odd fiber parts; the probe then checks
/// by least squares that the odd part is linear in y, that the squared even
/// part is quadratic in y, and that the fitted drift norm stays below 1.
pub fn probe_randers(
    m: &FinslerMetric,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<RandersProbe> {
    let n = m.dim();
    let quad_unknowns = n * (n + 1) / 2;
    let needed_ys = quad_unknowns + n + 2;
    if xs.len() < MIN_BASE_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_BASE_POINTS,
            got: xs.len(),
        });
    }
    if ys.len() < needed_ys {
        return Err(Error::InsufficientSamples {
            needed: needed_ys,
            got: ys.len(),
        });
    }
    let mut fits = Vec::new();
    let mut max_deviation = 0.0_f64;
    let mut witness = None;
    let mut skipped = 0usize;
    let mut evaluated = 0usize;
    let mut shape_failure: Option<String> = None;
    let mut norm_failure: Option<f64> = None;
    for x in xs {
        // Gather even/odd values over the fiber grid.
        let mut points = Vec::new();
        for y in ys {
            let s = TangentSample::new(x.clone(), y.clone())?;
            match m.even_odd_split(&s) {
                Ok((even, odd)) => points.push((y.clone(), even, odd, s)),
                Err(e) if e.is_sample_local() => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if points.len() < needed_ys {
            continue;
        }
        // Least-squares drift: minimize |b . y - odd| over the grid.
        let mut normal = SymMatrix::zeros(n);
        let mut rhs = vec![0.0; n];
        for (y, _, odd, _) in &points {
            for i in 0..n {
                for j in 0..=i {
                    normal.set(i, j, normal.get(i, j) + y[i] * y[j]);
                }
                rhs[i] += odd * y[i];
            }
        }
        let drift = match normal.solve(&rhs) {
            Ok(b) => b,
            Err(e) if e.is_sample_local() => {
                skipped += points.len();
                continue;
            }
            Err(e) => return Err(e),
        };
        // Least-squares quadratic part: minimize |phi(y) . q - even^2| with
        // the monomial basis y_i^2 (diagonal) and 2 y_i y_j (off-diagonal).
        let basis = |y: &[f64]| {
            let mut phi = Vec::with_capacity(quad_unknowns);
            for i in 0..n {
                for j in 0..=i {
                    phi.push(if i == j { y[i] * y[i] } else { 2.0 * y[i] * y[j] });
                }
            }
            phi
        };
        let mut qnormal = SymMatrix::zeros(quad_unknowns);
        let mut qrhs = vec![0.0; quad_unknowns];
        for (y, even, _, _) in &points {
            let phi = basis(y);
            for a in 0..quad_unknowns {
                for b in 0..=a {
                    qnormal.set(a, b, qnormal.get(a, b) + phi[a] * phi[b]);
                }
                qrhs[a] += even * even * phi[a];
            }
        }
        let qcoef = match qnormal.solve(&qrhs) {
            Ok(q) => q,
            Err(e) if e.is_sample_local() => {
                skipped += points.len();
                continue;
            }
            Err(e) => return Err(e),
        };
        // Unpack the packed coefficients into the symmetric matrix Q.
        let mut quad = SymMatrix::zeros(n);
        {
            let mut idx = 0;
            for i in 0..n {
                for j in 0..=i {
                    quad.set(i, j, qcoef[idx]);
                    idx += 1;
                }
            }
        }
        // Fit residuals, relative to the metric scale.
        let mut residual = 0.0_f64;
        let mut local_witness = None;
        for (y, even, odd, s) in &points {
            let lin: f64 = drift.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            let lin_res = (lin - odd).abs() / even.abs().max(1.0);
            let quad_res =
                (quad.quadratic_form(y) - even * even).abs() / (even * even).max(1.0);
            let r = lin_res.max(quad_res);
            if r > residual {
                residual = r;
                local_witness = Some(s.clone());
            }
        }
        evaluated += points.len();
        // The fitted Riemannian part must itself be a metric.
        let drift_norm = if quad.min_eigenvalue() > 0.0 {
            quad.solve(&drift).ok().map(|qinv_b| {
                drift
                    .iter()
                    .zip(&qinv_b)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .max(0.0)
                    .sqrt()
            })
        } else {
            None
        };
        if drift_norm.is_none() && shape_failure.is_none() && residual < tol.derivative_probe {
            shape_failure = Some("fitted quadratic part is not positive-definite".into());
        }
        if let Some(norm) = drift_norm {
            if norm >= 1.0 && norm_failure.is_none() {
                norm_failure = Some(norm);
            }
        }
        if residual > max_deviation {
            max_deviation = residual;
            witness = local_witness;
        }
        fits.push(RandersFit {
            x: x.clone(),
            drift,
            quad: quad.rows(),
            residual,
            drift_norm,
        });
    }
    if fits.is_empty() {
        return Ok(RandersProbe {
            outcome: ProbeOutcome::unclassifiable(
                "no base point had enough evaluable reflected pairs".into(),
                evaluated,
                skipped,
                tol.derivative_probe,
            ),
            fits,
        });
    }
    let fits_ok = max_deviation < tol.derivative_probe;
    let mut note = None;
    let verdict = if fits_ok && shape_failure.is_none() && norm_failure.is_none() {
        Verdict::Positive
    } else {
        if let Some(msg) = &shape_failure {
            note = Some(msg.clone());
        } else if let Some(norm) = norm_failure {
            note = Some(format!("fitted drift norm {norm:.6} is not below 1"));
        }
        Verdict::Negative
    };
    Ok(RandersProbe {
        outcome: ProbeOutcome {
            verdict,
            max_deviation,
            tolerance: tol.derivative_probe,
            evaluated,
            skipped,
            witness,
            note,
        },
        fits,
    })
}

/// Is the metric flat Euclidean (up to a constant positive-definite form)?
/// Requires the Riemannian and base-independence probes to pass on the grid
/// and the fundamental tensor to be one constant matrix across all of it.
pub fn probe_euclidean(
    m: &FinslerMetric,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ProbeOutcome> {
    if xs.len() * ys.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: xs.len() * ys.len(),
        });
    }
    let mut grid = Vec::with_capacity(xs.len() * ys.len());
    for x in xs {
        for y in ys {
            grid.push(TangentSample::new(x.clone(), y.clone())?);
        }
    }
    let riemannian = probe_riemannian(m, &grid, tol)?;
    let minkowskian = probe_minkowski(m, xs, ys, tol)?;
    // Constancy across the whole grid, fiber and base together.
    let mut baseline: Option<SymMatrix> = None;
    let mut const_dev = 0.0_f64;
    let mut const_witness = None;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for s in &grid {
        match m.fundamental_tensor(s) {
            Ok(g) => {
                evaluated += 1;
                match &baseline {
                    None => baseline = Some(g.matrix),
                    Some(first) => {
                        let dev = g.matrix.max_abs_diff(first);
                        if dev > const_dev {
                            const_dev = dev;
                            const_witness = Some(s.clone());
                        }
                    }
                }
            }
            Err(e) if e.is_sample_local() => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if evaluated < MIN_USABLE {
        return Ok(ProbeOutcome::unclassifiable(
            format!("only {evaluated} grid samples were evaluable"),
            evaluated,
            skipped,
            tol.derivative_probe,
        ));
    }
    let const_ok = const_dev < tol.derivative_probe;
    let parts = [
        ("cartan", &riemannian),
        ("base-dependence", &minkowskian),
    ];
    let any_unclassifiable = parts
        .iter()
        .any(|(_, p)| p.verdict == Verdict::Unclassifiable);
    let all_positive =
        parts.iter().all(|(_, p)| p.verdict == Verdict::Positive) && const_ok;
    let max_deviation = riemannian
        .max_deviation
        .max(minkowskian.max_deviation)
        .max(const_dev);
    let (verdict, witness, note) = if all_positive {
        (Verdict::Positive, const_witness, None)
    } else if any_unclassifiable {
        (
            Verdict::Unclassifiable,
            None,
            Some("a constituent probe could not gather enough evidence".into()),
        )
    } else {
        let failed: Vec<&str> = parts
            .iter()
            .filter(|(_, p)| p.verdict == Verdict::Negative)
            .map(|(name, _)| *name)
            .chain((!const_ok).then_some("tensor-constancy"))
            .collect();
        let witness = parts
            .iter()
            .find(|(_, p)| p.verdict == Verdict::Negative)
            .and_then(|(_, p)| p.witness.clone())
            .or(const_witness);
        (
            Verdict::Negative,
            witness,
            Some(format!("failed: {}", failed.join(", "))),
        )
    };
    Ok(ProbeOutcome {
        verdict,
        max_deviation,
        tolerance: tol.derivative_probe,
        evaluated,
        skipped,
        witness,
        note,
    })
}

/// Full classification report for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub dim: usize,
    pub seed: u64,
    pub riemannian: ProbeOutcome,
    pub locally_minkowskian: ProbeOutcome,
    pub randers: ProbeOutcome,
    pub euclidean: ProbeOutcome,
    /// Per-base-point Randers fits backing the `randers` outcome.
    pub randers_fits: Vec<RandersFit>,
    pub tolerances: Tolerances,
}

/// Run all four probes over a sample plan.
pub fn classify(
    m: &FinslerMetric,
    plan: &SamplePlan,
    tol: &Tolerances,
) -> Result<ClassificationReport> {
    let riemannian = probe_riemannian(m, &plan.samples, tol)?;
    let locally_minkowskian = probe_minkowski(m, &plan.xs, &plan.ys, tol)?;
    let randers = probe_randers(m, &plan.xs, &plan.ys, tol)?;
    let euclidean = probe_euclidean(m, &plan.xs, &plan.ys, tol)?;
    Ok(ClassificationReport {
        metric: m.describe(),
        dim: m.dim(),
        seed: plan.seed,
        riemannian,
        locally_minkowskian,
        randers: randers.outcome,
        euclidean,
        randers_fits: randers.fits,
        tolerances: *tol,
    })
}

/// Outcome of the proportionality test for two Randers-type factors under
/// constant warping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    /// Whether a1* b2* = a2* b1* held at every evaluated sample, where the
    /// starred quantities are the factor parts scaled by the opposite
    /// warping value.
    pub ratio_holds: bool,
    /// Worst relative defect of the proportionality identity.
    pub max_residual: f64,
    /// Worst relative mismatch between the combined Randers form
    /// sqrt(a1*^2 + a2*^2) + sign * sqrt(b1*^2 + b2*^2) and the product
    /// metric itself, when any sample was evaluable.
    pub combined_max_error: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Check the proportionality condition for a product of two reversibly
/// decomposable factors with at least one constant warping field, and —
/// sample by sample — that the combined Randers form reproduces the product
/// metric. `tol` bounds the acceptable relative residual.
///
/// The proportionality identity a1* b2* = a2* b1* compares the two factor
/// decompositions as functions of a fiber argument, so it is meaningful on
/// samples whose fiber blocks carry the same vector: callers probing
/// factors that live on a common space should supply diagonal samples
/// y = (w, w). Off-diagonal fiber pairs make the identity fail even for
/// proportional factors, simply because the two sides are then evaluated at
/// unrelated arguments.
pub fn check_randers_ratio(
    m1: &FinslerMetric,
    f1: &ScalarField,
    m2: &FinslerMetric,
    f2: &ScalarField,
    samples: &[TangentSample],
    tol: f64,
) -> Result<RatioCheck> {
    if f1.constant_value().is_none() && f2.constant_value().is_none() {
        return Err(Error::InvalidParameter(
            "the proportionality test needs at least one constant warping field".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let spec = ConvolutionSpec::new(m1.clone(), f1.clone(), m2.clone(), f2.clone())?;
    let product = convolve(spec);
    let (n1, n2) = product.split().expect("convolution is a product");
    let mut max_residual = 0.0_f64;
    let mut combined_max_error = 0.0_f64;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for s in samples {
        if s.dim() != n1 + n2 {
            return Err(Error::InvalidParameter(format!(
                "sample has dimension {}, product expects {}",
                s.dim(),
                n1 + n2
            )));
        }
        let s1 = s.block(0, n1);
        let s2 = s.block(n1, n2);
        let parts = (|| -> Result<(f64, f64, f64, f64, f64, f64)> {
            let (a1, b1) = m1.even_odd_split(&s1)?;
            let (a2, b2) = m2.even_odd_split(&s2)?;
            let c1 = f1.value(&s1.x)?;
            let c2 = f2.value(&s2.x)?;
            let f = product.value(s)?;
            Ok((c2 * a1, c2 * b1, c1 * a2, c1 * b2, f, 0.0))
        })();
        let (a1s, b1s, a2s, b2s, f_product, _) = match parts {
            Ok(v) => v,
            Err(e) if e.is_sample_local() => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        evaluated += 1;
        // Proportionality residual, with a graceful zero-drift case.
        let num = (a1s * b2s - a2s * b1s).abs();
        let den = (a1s * b2s).abs() + (a2s * b1s).abs();
        let scale = a1s.abs().max(a2s.abs()).max(1.0);
        let residual = if num <= 1e-14 * scale * scale {
            0.0
        } else if den <= 1e-14 * scale * scale {
            1.0
        } else {
            num / den
        };
        max_residual = max_residual.max(residual);
        // Combined form against the product value.
        let alpha_c = (a1s * a1s + a2s * a2s).sqrt();
        let dot = a1s * b1s + a2s * b2s;
        let sign = if dot > 0.0 {
            1.0
        } else if dot < 0.0 {
            -1.0
        } else {
            0.0
        };
        let beta_c = sign * (b1s * b1s + b2s * b2s).sqrt();
        let err = ((alpha_c + beta_c) - f_product).abs() / f_product.max(1.0);
        combined_max_error = combined_max_error.max(err);
    }
    if evaluated == 0 {
        return Ok(RatioCheck {
            ratio_holds: false,
            max_residual: 0.0,
            combined_max_error: None,
            evaluated,
            skipped,
        });
    }
    Ok(RatioCheck {
        ratio_holds: max_residual <= tol,
        max_residual,
        combined_max_error: Some(combined_max_error),
        evaluated,
        skipped,
    })
}
