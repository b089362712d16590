//! End-to-end classification runs: each probe is exercised against families
//! where the expected verdict is known in closed form, including the
//! unclassifiable path when a probe is starved of usable evidence.

use finsler::classify::{classify, plan_grids, probe_riemannian, Verdict, MIN_SAMPLES};
use finsler::metric::FinslerMetric;
use finsler::sample::TangentSample;
use finsler::sampler::{build_plan, default_domain};
use finsler::tol::Tolerances;
use finsler::zoo::{build, AlphaSpec, BetaSpec, ZooSpec};

fn classify_spec(spec: ZooSpec, seed: u64) -> (FinslerMetric, finsler::classify::ClassificationReport) {
    let m = build(&spec).unwrap();
    let dom = default_domain(&m);
    let (grid_x, grid_y) = plan_grids(m.dim(), 200);
    let plan = build_plan(&m, &dom, 200, grid_x, grid_y, seed).unwrap();
    let report = classify(&m, &plan, &Tolerances::default()).unwrap();
    (m, report)
}

#[test]
fn euclidean_norm_passes_every_probe() {
    let (_, r) = classify_spec(ZooSpec::Euclidean { dim: 4 }, 501);
    assert_eq!(r.riemannian.verdict, Verdict::Positive);
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Positive);
    assert_eq!(r.randers.verdict, Verdict::Positive);
    assert_eq!(r.euclidean.verdict, Verdict::Positive);
    // The fitted drift of a plain norm is zero.
    for fit in &r.randers_fits {
        for b in &fit.drift {
            assert!(b.abs() < 1e-8, "spurious drift component {b}");
        }
    }
}

#[test]
fn constant_quadratic_form_counts_as_flat() {
    let (_, r) = classify_spec(
        ZooSpec::ConstRiemann {
            matrix: vec![
                vec![2.0, 0.5, 0.0],
                vec![0.5, 1.5, 0.25],
                vec![0.0, 0.25, 1.0],
            ],
        },
        502,
    );
    assert_eq!(r.riemannian.verdict, Verdict::Positive);
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Positive);
    assert_eq!(r.randers.verdict, Verdict::Positive);
    // Flatness is about constancy, not about the form being the identity.
    assert_eq!(r.euclidean.verdict, Verdict::Positive);
}

#[test]
fn power_norm_at_unit_power_is_a_disguised_quadratic() {
    // With exponent one the power term collapses to a multiple of |y|^2.
    let (_, r) = classify_spec(
        ZooSpec::PowerNormMinkowski {
            coupling: 2.5,
            power: 1,
        },
        503,
    );
    assert_eq!(r.riemannian.verdict, Verdict::Positive);
    assert_eq!(r.euclidean.verdict, Verdict::Positive);
}

#[test]
fn quartic_plane_at_minimal_coupling_is_riemannian() {
    // At coupling 2 the quartic under the root is a perfect square and the
    // family degenerates to the plain planar norm.
    let (_, r) = classify_spec(ZooSpec::QuarticMinkowski { coupling: 2.0 }, 504);
    assert_eq!(r.riemannian.verdict, Verdict::Positive);
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Positive);
    assert_eq!(r.euclidean.verdict, Verdict::Positive);
}

#[test]
fn quartic_plane_above_minimal_coupling_is_minkowskian_only() {
    let (_, r) = classify_spec(ZooSpec::QuarticMinkowski { coupling: 3.0 }, 505);
    assert_eq!(r.riemannian.verdict, Verdict::Negative);
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Positive);
    assert_eq!(r.randers.verdict, Verdict::Negative);
    assert_eq!(r.euclidean.verdict, Verdict::Negative);
    // The deviation driving the Cartan verdict is genuinely large, not a
    // borderline numerical artifact.
    assert!(r.riemannian.max_deviation > 1e-2);
}

#[test]
fn drifting_randers_form_is_randers_and_nothing_else() {
    let beta = vec![
        BetaSpec::Linear {
            offset: 0.25,
            slope: vec![0.1, 0.0],
        },
        BetaSpec::Constant(0.1),
    ];
    let (_, r) = classify_spec(
        ZooSpec::Randers {
            alpha: AlphaSpec::Euclidean { dim: 2 },
            beta: beta.clone(),
            x_box: None,
        },
        506,
    );
    assert_eq!(r.randers.verdict, Verdict::Positive);
    assert_eq!(r.riemannian.verdict, Verdict::Negative);
    // The drift varies with the base point, so the tensor does too.
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Negative);
    assert_eq!(r.euclidean.verdict, Verdict::Negative);
    // The least-squares fits recover the exact drift at every base point.
    assert!(!r.randers_fits.is_empty());
    for fit in &r.randers_fits {
        for (i, b) in beta.iter().enumerate() {
            let expected = b.eval(&fit.x);
            assert!(
                (fit.drift[i] - expected).abs() < 1e-8,
                "drift component {i} fitted as {} but the field gives {expected}",
                fit.drift[i]
            );
        }
        let norm = fit.drift_norm.expect("fitted quadratic part is positive-definite");
        assert!(norm < 1.0);
        // The quadratic part is the plain unit form here.
        for (i, row) in fit.quad.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((q - expected).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn coupled_product_defeats_every_structure() {
    // A product whose two warping fields both vary couples base and fiber:
    // the Cartan tensor is nonzero and the tensor moves with the base point.
    let (_, r) = classify_spec(
        ZooSpec::FunkBlend {
            dim: 5,
            drift: 0.5,
        },
        507,
    );
    assert_eq!(r.riemannian.verdict, Verdict::Negative);
    assert_eq!(r.locally_minkowskian.verdict, Verdict::Negative);
    assert_ne!(r.randers.verdict, Verdict::Positive);
    assert_eq!(r.euclidean.verdict, Verdict::Negative);
}

#[test]
fn starved_probe_declines_to_classify() {
    // Hand the Cartan probe a batch where all but a handful of samples sit
    // outside the chart: it must refuse to decide rather than extrapolate.
    let m = build(&ZooSpec::Klein { dim: 2 }).unwrap();
    let mut samples = Vec::new();
    for i in 0..MIN_SAMPLES {
        let x = if i < 5 {
            vec![0.1 + 0.01 * i as f64, 0.0]
        } else {
            // Far outside the unit ball.
            vec![3.0 + i as f64, 1.0]
        };
        samples.push(TangentSample::new(x, vec![1.0, 0.5]).unwrap());
    }
    let outcome = probe_riemannian(&m, &samples, &Tolerances::default()).unwrap();
    assert_eq!(outcome.verdict, Verdict::Unclassifiable);
    assert_eq!(outcome.evaluated, 5);
    assert_eq!(outcome.skipped, MIN_SAMPLES - 5);
    let note = outcome.note.expect("an unclassifiable outcome explains itself");
    assert!(note.contains("5"), "note should count the usable samples: {note}");
}

#[test]
fn too_few_samples_is_an_error_not_a_verdict() {
    let m = build(&ZooSpec::Euclidean { dim: 2 }).unwrap();
    let samples = vec![TangentSample::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(); 3];
    let err = probe_riemannian(&m, &samples, &Tolerances::default()).unwrap_err();
    assert!(err.to_string().contains("3"));
}
