//! The property-check suite: run the defining identities of a Finsler
//! metric over a set of samples and produce a structured pass/fail report.
//! This is the engine behind `finsler check`; it lives in the library so the
//! report schema can be round-tripped and tested without the binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convolution::check_positivity_condition;
use crate::metric::FinslerMetric;
use crate::sample::TangentSample;
use crate::tol::Tolerances;

/// Scales exercised by the homogeneity property.
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 10.0];

/// One property's aggregate result over the sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    /// Worst deviation observed among evaluated samples.
    pub max_deviation: f64,
    /// Threshold the deviation was held to.
    pub tolerance: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Sample achieving the worst deviation or first violation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TangentSample>,
}

/// Full report of `finsler check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub metric: String,
    pub dim: usize,
    pub seed: u64,
    pub samples_requested: usize,
    pub properties: Vec<PropertyReport>,
    pub all_passed: bool,
    pub tolerances: Tolerances,
}

struct PropertyAccumulator {
    name: &'static str,
    tolerance: f64,
    max_deviation: f64,
    evaluated: usize,
    skipped: usize,
    violations: usize,
    witness: Option<TangentSample>,
}

impl PropertyAccumulator {
    fn new(name: &'static str, tolerance: f64) -> Self {
        PropertyAccumulator {
            name,
            tolerance,
            max_deviation: 0.0,
            evaluated: 0,
            skipped: 0,
            violations: 0,
            witness: None,
        }
    }

    fn observe(&mut self, deviation: f64, s: &TangentSample) {
        self.evaluated += 1;
        if deviation > self.max_deviation {
            self.max_deviation = deviation;
            self.witness = Some(s.clone());
        }
        if deviation > self.tolerance {
            self.violations += 1;
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    fn violation(&mut self, deviation: f64, s: &TangentSample) {
        self.evaluated += 1;
        self.violations += 1;
        if deviation >= self.max_deviation {
            self.max_deviation = deviation;
            self.witness = Some(s.clone());
        }
    }

    fn finish(self) -> PropertyReport {
        PropertyReport {
            name: self.name.to_string(),
            passed: self.violations == 0,
            max_deviation: self.max_deviation,
            tolerance: self.tolerance,
            evaluated: self.evaluated,
            skipped: self.skipped,
            violations: self.violations,
            witness: self.witness,
        }
    }
}

/// Run positivity, homogeneity, Euler, and strong-convexity checks over the
/// samples — plus the coupling positivity inequality when the metric is a
/// convolution. `seed` drives the per-sample test directions for the
/// coupling check.
pub fn run_check_suite(
    m: &FinslerMetric,
    samples: &[TangentSample],
    tol: &Tolerances,
    seed: u64,
) -> CheckReport {
    let mut positivity = PropertyAccumulator::new("positivity", 0.0);
    let mut value_homog = PropertyAccumulator::new("value-homogeneity", tol.homogeneity);
    let mut tensor_homog = PropertyAccumulator::new("tensor-homogeneity", tol.algebraic);
    let mut euler = PropertyAccumulator::new("euler-identity", tol.algebraic);
    let mut convexity = PropertyAccumulator::new("strong-convexity", 0.0);

    for s in samples {
        // Positivity of the squared metric.
        match m.value(s) {
            Ok(_) => positivity.observe(0.0, s),
            Err(crate::Error::NonPositive { value }) => positivity.violation(value.abs(), s),
            Err(_) => positivity.skip(),
        }
        // Homogeneity of the value and invariance of the tensor under
        // fiber scaling.
        match m.check_homogeneity(s, &HOMOGENEITY_SCALES) {
            Ok(check) => {
                value_homog.observe(check.max_value_defect, s);
                tensor_homog.observe(check.max_tensor_defect, s);
            }
            Err(_) => {
                value_homog.skip();
                tensor_homog.skip();
            }
        }
        // Euler identity g(y, y) = F^2 and positive definiteness of g.
        match (m.fundamental_tensor(s), m.squared_value(s)) {
            (Ok(g), Ok(f2)) => {
                euler.observe(g.euler_defect(f2) / f2.abs().max(1.0), s);
                if g.is_strongly_convex() {
                    convexity.observe(0.0, s);
                } else {
                    convexity.violation(-g.min_eigenvalue, s);
                }
            }
            _ => {
                euler.skip();
                convexity.skip();
            }
        }
    }

    let mut properties = vec![
        positivity.finish(),
        value_homog.finish(),
        tensor_homog.finish(),
        euler.finish(),
        convexity.finish(),
    ];

    // For convolutions: the positivity inequality must agree with the sign
    // of the block quadratic form in random directions.
    if let Some(spec) = m.as_convolution() {
        let mut coupling = PropertyAccumulator::new("coupling-consistency", 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for s in samples {
            let v: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            if v.iter().all(|&c| c == 0.0) {
                coupling.skip();
                continue;
            }
            match check_positivity_condition(spec, s, &v) {
                Ok(check) => {
                    if check.condition_holds == (check.quadratic_form > 0.0) {
                        coupling.observe(0.0, s);
                    } else {
                        coupling.violation(check.quadratic_form.abs(), s);
                    }
                }
                Err(e) if e.is_sample_local() => coupling.skip(),
                Err(_) => coupling.skip(),
            }
        }
        properties.push(coupling.finish());
    }

    let all_passed = properties.iter().all(|p| p.passed);
    CheckReport {
        metric: m.describe(),
        dim: m.dim(),
        seed,
        samples_requested: samples.len(),
        properties,
        all_passed,
        tolerances: *tol,
    }
}
