use std::f64::consts::PI;

use nalgebra::DMatrix;
use nehari::eigensolve::{lambda1, validate_hypotheses};
use nehari::weights::{preset, Profile};
use nehari::{build_domain, Domain, ProblemData, SolverError, SolverOptions};

fn problem(d: Domain, h: Profile, f: Profile, p: f64, gamma: f64) -> ProblemData {
    ProblemData::new(p, gamma, h.build(d, 1e-12).unwrap(), f.build(d, 1e-12).unwrap(), 1e-10).unwrap()
}

fn unit_h(d: Domain) -> ProblemData {
    problem(d, Profile::Constant { value: 1.0 }, Profile::Constant { value: -1.0 }, 2.0, 4.0)
}

fn discrete_laplace(d: &Domain) -> f64 {
    let n1 = (d.nodes_per_axis() - 1) as f64;
    d.dim() as f64 * 4.0 / d.spacing().powi(2) * (PI / (2.0 * n1)).sin().powi(2)
}

#[test]
fn unit_interval_matches_pi_squared() {
    let d = build_domain(1, 0.5, 201).unwrap();
    let r = lambda1(&unit_h(d), None, &SolverOptions::default()).unwrap();
    assert!((r.lambda1 - PI * PI).abs() < 0.01 * PI * PI, "{}", r.lambda1);
    let exact = discrete_laplace(&d);
    assert!((r.lambda1 - exact).abs() < 1e-6 * exact, "{} vs {}", r.lambda1, exact);
    assert!(r.residual <= 1e-6, "residual {}", r.residual);
    assert!(r.phi1.min_value() >= 0.0);
}

#[test]
fn unit_square_matches_two_pi_squared() {
    let d = build_domain(2, 0.5, 101).unwrap();
    let r = lambda1(&unit_h(d), None, &SolverOptions::default()).unwrap();
    let target = 2.0 * PI * PI;
    assert!((r.lambda1 - target).abs() < 0.02 * target, "{}", r.lambda1);
    let exact = discrete_laplace(&d);
    assert!((r.lambda1 - exact).abs() < 1e-6 * exact, "{} vs {}", r.lambda1, exact);
}

/// Dense generalized solve K u = λ M_h u through a Cholesky factor of K.
fn dense_lambda1(data: &ProblemData) -> f64 {
    let d = data.domain();
    let n = d.interior_len();
    let m = d.interior_per_axis();
    let mut k = DMatrix::<f64>::zeros(n, n);
    match d.dim() {
        1 => {
            for i in 0..n {
                k[(i, i)] = 2.0 / d.spacing();
                if i + 1 < n {
                    k[(i, i + 1)] = -1.0 / d.spacing();
                    k[(i + 1, i)] = -1.0 / d.spacing();
                }
            }
        }
        _ => {
            for j in 0..m {
                for i in 0..m {
                    let a = j * m + i;
                    k[(a, a)] = 4.0;
                    if i + 1 < m {
                        k[(a, a + 1)] = -1.0;
                        k[(a + 1, a)] = -1.0;
                    }
                    if j + 1 < m {
                        k[(a, a + m)] = -1.0;
                        k[(a + m, a)] = -1.0;
                    }
                }
            }
        }
    }
    let w = d.node_weight();
    let h = data.h().interior_values();
    let l = k.cholesky().unwrap().l();
    let linv = l.clone().try_inverse().unwrap();
    let mh = DMatrix::from_fn(n, n, |i, j| if i == j { h[i] * w } else { 0.0 });
    let c = &linv * mh * linv.transpose();
    let mu = c.symmetric_eigen().eigenvalues.max();
    1.0 / mu
}

#[test]
fn matches_dense_generalized_solve() {
    let d = build_domain(1, 10.0, 61).unwrap();
    let data = preset(d).unwrap();
    let r = lambda1(&data, None, &SolverOptions::default()).unwrap();
    let oracle = dense_lambda1(&data);
    assert!((r.lambda1 - oracle).abs() < 1e-6 * oracle, "{} vs {}", r.lambda1, oracle);

    let d2 = build_domain(2, 3.0, 17).unwrap();
    let data2 = problem(d2, Profile::Gaussian { peak: 1.0, far: -0.5, width: 1.5 }, Profile::Constant { value: -1.0 }, 2.0, 4.0);
    let r2 = lambda1(&data2, None, &SolverOptions::default()).unwrap();
    let oracle2 = dense_lambda1(&data2);
    assert!((r2.lambda1 - oracle2).abs() < 1e-6 * oracle2, "{} vs {}", r2.lambda1, oracle2);
}

#[test]
fn doubling_h_halves_lambda() {
    let d = build_domain(1, 10.0, 101).unwrap();
    let a = preset(d).unwrap();
    let h2: Vec<f64> = a.h().values().iter().map(|v| 2.0 * v).collect();
    let b = a.with_weights(nehari::WeightField::new(d, h2, 1e-12).unwrap(), a.f().clone()).unwrap();
    let opts = SolverOptions::default();
    let (la, lb) = (lambda1(&a, None, &opts).unwrap().lambda1, lambda1(&b, None, &opts).unwrap().lambda1);
    assert!((la - 2.0 * lb).abs() < 1e-8 * la);
}

#[test]
fn nested_masks_are_monotone() {
    let d = build_domain(1, 10.0, 101).unwrap();
    let data = preset(d).unwrap();
    let opts = SolverOptions::default();
    let mut last = 0.0;
    for r in [6.0, 4.0, 2.5, 1.5] {
        let mask: Vec<bool> = (0..d.interior_len()).map(|k| d.interior_position(k)[0].abs() < r).collect();
        let l = lambda1(&data, Some(&mask), &opts).unwrap().lambda1;
        assert!(l >= last - 1e-10, "mask radius {r}: {l} < {last}");
        last = l;
    }
}

#[test]
fn seeds_agree() {
    let d = build_domain(1, 10.0, 101).unwrap();
    let data = preset(d).unwrap();
    let a = lambda1(&data, None, &SolverOptions { seed: 1, ..Default::default() }).unwrap();
    let b = lambda1(&data, None, &SolverOptions { seed: 99, ..Default::default() }).unwrap();
    assert!(a.phi1.relative_distance(&b.phi1) < 1e-4);
}

#[test]
fn nonpositive_h_is_inadmissible() {
    let d = build_domain(1, 1.0, 21).unwrap();
    let data = problem(d, Profile::Constant { value: -1.0 }, Profile::Constant { value: -1.0 }, 2.0, 4.0);
    assert_eq!(lambda1(&data, None, &SolverOptions::default()).unwrap_err(), SolverError::NoAdmissibleField);
}

#[test]
fn hypotheses_on_preset_and_degenerate_weights() {
    let d = build_domain(1, 10.0, 101).unwrap();
    let data = preset(d).unwrap();
    let opts = SolverOptions::default();
    let eig = lambda1(&data, None, &opts).unwrap();
    let rep = validate_hypotheses(&data, &eig, &opts).unwrap();
    assert!(rep.f1 && rep.f_inf && rep.f_phi1);
    assert_eq!(rep.f2, None);

    let neg = problem(d, Profile::Constant { value: 1.0 }, Profile::Constant { value: -1.0 }, 2.0, 4.0);
    let eig = lambda1(&neg, None, &opts).unwrap();
    let rep = validate_hypotheses(&neg, &eig, &opts).unwrap();
    assert!(!rep.f1 && rep.f_inf);
}

#[test]
fn thickness_check_with_zero_annulus() {
    let d = build_domain(1, 10.0, 201).unwrap();
    let data = problem(
        d,
        Profile::Gaussian { peak: 1.0, far: -1.0, width: 2.0 },
        Profile::Annulus { inner: 1.0, radius: 0.5, gap: 1.0, far: -3.0 },
        2.0,
        4.0,
    );
    let opts = SolverOptions::default();
    let eig = lambda1(&data, None, &opts).unwrap();
    let rep = validate_hypotheses(&data, &eig, &opts).unwrap();
    let t = rep.thickness.expect("zero set present");
    assert_eq!(rep.f2, Some(true), "{t:?}");
    assert!(!rep.warnings.is_empty());
}
