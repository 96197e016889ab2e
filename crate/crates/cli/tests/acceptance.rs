//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::fs;
use std::process::{Command, ExitCode};

use nalgebra::DMatrix;
use nehari::branches::{solve_nminus, solve_nplus, sweep, BranchKind, SweepOutput};
use nehari::domain::dirichlet_energy;
use nehari::eigensolve::{lambda1, validate_hypotheses, EigenResult};
use nehari::extremal::{lambda_star, n0_probe, t0_rescale, ExtremeResult, Landmarks};
use nehari::functionals::{f_gamma, fiber_scale, h_lambda, monotonicity_gap, nehari_test, pde_residual, phi, phi_grad, reduced_j};
use nehari::weights::preset;
use nehari::{build_domain, Domain, Field, NehariClass, ProblemData, Profile, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EIG_PI2_REL: f64 = 0.01;
const EIG_2PI2_REL: f64 = 0.02;
const EIG_DENSE_REL: f64 = 1e-6;
const GRAD_REL: f64 = 1e-6;
const GRAD_FIELDS: usize = 100;
const FIBER_MEMBERS: usize = 200;
const FIBER_STATIONARY_REL: f64 = 1e-8;
const FIBER_REDUCED_REL: f64 = 1e-10;
const FIBER_HOMOGENEITY_REL: f64 = 1e-13;
const STAR_FLOOR: f64 = 1e-8;
const STAR_GAP: f64 = 0.05;
const STAR_F_ABS: f64 = 1e-6;
const BRANCH_SAMPLES: usize = 5;
const BRANCH_DELTA: f64 = 0.05;
const BRANCH_RESIDUAL: f64 = 1e-6;
const PROBE_TARGETS: usize = 3;
const PROBE_MARGIN: f64 = 1e-3;
const ZERO_RESIDUAL_FACTOR: f64 = 10.0;
const PAST_STEP: f64 = 0.01;
const PAST_RESIDUAL: f64 = 1e-6;
const SADDLE_RESIDUAL: f64 = 1e-5;
const SADDLE_DISTANCE: f64 = 1e-2;
const MONOTONE_PAIRS: usize = 50;
const MONOTONE_FACTOR: f64 = 1e-3;
const TAIL_MAX: f64 = 0.01;
const TRUNCATION_REL: f64 = 0.01;

struct Preset {
    data: ProblemData,
    eig: EigenResult,
    ex: ExtremeResult,
    marks: Landmarks,
}

impl Preset {
    fn new(half_width: f64, nodes: usize) -> Self {
        let data = preset(build_domain(1, half_width, nodes).unwrap()).unwrap();
        let opts = SolverOptions::default();
        let eig = lambda1(&data, None, &opts).unwrap();
        let ex = lambda_star(&data, &eig, &opts).unwrap();
        let marks = Landmarks::new(&eig, Some(&ex));
        Self { data, eig, ex, marks }
    }

    fn l1(&self) -> f64 {
        self.eig.lambda1
    }

    fn ls(&self) -> f64 {
        self.ex.lambda_star
    }

    fn interior(&self, frac: f64) -> f64 {
        self.l1() + frac * (self.ls() - self.l1())
    }
}

fn problem(d: Domain, h: Profile, f: Profile, p: f64, gamma: f64, eps: f64) -> ProblemData {
    ProblemData::new(p, gamma, h.build(d, 1e-12).unwrap(), f.build(d, 1e-12).unwrap(), eps).unwrap()
}

fn random_field(d: Domain, rng: &mut ChaCha8Rng) -> Field {
    Field::new(d, (0..d.interior_len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense generalized solve K u = λ M_h u for p = 2 through a Cholesky factor of K.
fn dense_lambda1(data: &ProblemData) -> f64 {
    let d = data.domain();
    let n = d.interior_len();
    let m = d.interior_per_axis();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let (diag, off) = if d.dim() == 1 { (2.0 / d.spacing(), -1.0 / d.spacing()) } else { (4.0, -1.0) };
    for j in 0..if d.dim() == 1 { 1 } else { m } {
        for i in 0..m {
            let a = j * m + i;
            k[(a, a)] = diag;
            if i + 1 < m {
                k[(a, a + 1)] = off;
                k[(a + 1, a)] = off;
            }
            if d.dim() == 2 && j + 1 < m {
                k[(a, a + m)] = off;
                k[(a + m, a)] = off;
            }
        }
    }
    let w = d.node_weight();
    let h = data.h().interior_values();
    let linv = k.cholesky().unwrap().l().try_inverse().unwrap();
    let mh = DMatrix::from_fn(n, n, |i, j| if i == j { h[i] * w } else { 0.0 });
    1.0 / (&linv * mh * linv.transpose()).symmetric_eigen().eigenvalues.max()
}

fn criterion_1() -> (bool, String) {
    let opts = SolverOptions::default();
    let unit = |dim, nodes| {
        let d = build_domain(dim, 0.5, nodes).unwrap();
        problem(d, Profile::Constant { value: 1.0 }, Profile::Constant { value: -1.0 }, 2.0, 4.0, 1e-10)
    };
    let l1d = lambda1(&unit(1, 201), None, &opts).unwrap().lambda1;
    let l2d = lambda1(&unit(2, 101), None, &opts).unwrap().lambda1;
    let e1 = (l1d - PI * PI).abs() / (PI * PI);
    let e2 = (l2d - 2.0 * PI * PI).abs() / (2.0 * PI * PI);

    let mut worst: f64 = 0.0;
    let d2 = build_domain(2, 3.0, 17).unwrap();
    let cases = [
        preset(build_domain(1, 10.0, 61).unwrap()).unwrap(),
        problem(d2, Profile::Gaussian { peak: 1.0, far: -0.5, width: 1.5 }, Profile::Constant { value: -1.0 }, 2.0, 4.0, 1e-10),
    ];
    for data in &cases {
        let l = lambda1(data, None, &opts).unwrap().lambda1;
        let oracle = dense_lambda1(data);
        worst = worst.max((l - oracle).abs() / oracle);
    }
    let ok = e1 < EIG_PI2_REL && e2 < EIG_2PI2_REL && worst < EIG_DENSE_REL;
    (ok, format!("1D rel err {e1:.3e}, 2D rel err {e2:.3e}, dense oracle worst rel {worst:.3e}"))
}

fn criterion_2() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let cases = [(1.5, 1e-6), (2.0, 1e-10), (3.0, 1e-10)];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    while count < GRAD_FIELDS {
        let (p, eps) = cases[count % 3];
        let d = if count % 2 == 0 { build_domain(1, 1.0, 14).unwrap() } else { build_domain(2, 1.0, 6).unwrap() };
        let data = problem(
            d,
            Profile::Gaussian { peak: 1.0, far: -0.5, width: 0.6 },
            Profile::Gaussian { peak: 2.0, far: -1.0, width: 0.4 },
            p,
            p + 1.3,
            eps,
        );
        let u = random_field(d, &mut rng);
        let g = phi_grad(&u, 0.7, &data);
        let gmax = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..u.len() {
            let eval = |t: f64| {
                let mut v = u.values().to_vec();
                v[i] += t;
                phi(&Field::new(d, v).unwrap(), 0.7, &data)
            };
            let h = 1e-5;
            let fd = (8.0 * (eval(h) - eval(-h)) - (eval(2.0 * h) - eval(-2.0 * h))) / (12.0 * h);
            worst = worst.max((fd - g.values()[i]).abs() / g.values()[i].abs().max(1e-3 * gmax));
        }
        count += 1;
    }
    (worst < GRAD_REL, format!("{count} fields, worst componentwise rel err {worst:.3e}"))
}

fn cone_member(d: Domain, rng: &mut ChaCha8Rng, wide: bool) -> Field {
    let c = rng.random_range(-0.1..0.1);
    let w = if wide { rng.random_range(0.8..1.1) } else { rng.random_range(0.15..0.3) };
    let a = rng.random_range(0.5..3.0);
    Field::from_fn(d, |x| {
        let r = ((x[0] - c).powi(2) + x[1] * x[1]).sqrt();
        a * (-(r / w).powi(2)).exp() * (1.0 + 0.1 * (7.0 * x[0]).sin())
    })
}

fn criterion_3() -> (bool, String) {
    let d = build_domain(1, 2.0, 81).unwrap();
    let data = problem(
        d,
        Profile::Gaussian { peak: 1.0, far: -0.5, width: 0.6 },
        Profile::Gaussian { peak: 1.0, far: -3.0, width: 0.4 },
        2.0,
        4.0,
        1e-10,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut stat, mut red, mut homo) = (0.0f64, 0.0f64, 0.0f64);
    let (mut members, mut tries, mut classes_ok) = (0, 0, true);
    while members < FIBER_MEMBERS && tries < 10 * FIBER_MEMBERS {
        tries += 1;
        let wide = tries % 2 == 0;
        let u = cone_member(d, &mut rng, wide);
        let lambda = if wide {
            let a = h_lambda(&u, 0.0, &data);
            1.5 * a / (a - h_lambda(&u, 1.0, &data))
        } else {
            0.0
        };
        let Ok(s) = fiber_scale(&u, lambda, &data) else { continue };
        members += 1;
        let w = u.scaled(s);
        let dphi = dot(phi_grad(&w, lambda, &data).values(), u.values());
        stat = stat.max(dphi.abs() / (h_lambda(&w, lambda, &data).abs() / s));
        let j = reduced_j(&u, lambda, &data).unwrap();
        let pw = phi(&w, lambda, &data);
        red = red.max((j - pw).abs() / pw.abs());
        for t in [0.5, 2.0, 10.0] {
            let jt = reduced_j(&u.scaled(t), lambda, &data).unwrap();
            homo = homo.max((jt - j).abs() / j.abs());
        }
        let expected = if j < 0.0 { NehariClass::Plus } else { NehariClass::Minus };
        classes_ok &= nehari_test(&w, lambda, &data, 1e-8).unwrap() == expected;
    }
    let ok =
        members == FIBER_MEMBERS && stat <= FIBER_STATIONARY_REL && red <= FIBER_REDUCED_REL && homo <= FIBER_HOMOGENEITY_REL && classes_ok;
    (ok, format!("{members} members, stationarity {stat:.2e}, reduced {red:.2e}, homogeneity {homo:.2e}, classes ok {classes_ok}"))
}

fn criterion_4(base: &Preset) -> (bool, String) {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut parts = vec![];
    let d = build_domain(1, 10.0, 201).unwrap();
    let h = Profile::Gaussian { peak: 1.0, far: -1.0, width: 2.0 };
    let variants = [
        problem(d, h.clone(), Profile::Gaussian { peak: 1.0, far: -2.0, width: 1.0 }, 2.0, 4.0, 1e-10),
        problem(d, h.clone(), Profile::Gaussian { peak: 2.0, far: -1.0, width: 0.5 }, 2.0, 4.0, 1e-10),
        problem(d, h, Profile::Annulus { inner: 1.0, radius: 0.7, gap: 0.5, far: -3.0 }, 2.0, 4.0, 1e-10),
    ];
    // the 5% margin is checked on the preset only; other weights need λ* > λ₁
    let mut check = |name: &str, data: &ProblemData, eig: &EigenResult, ex: &ExtremeResult, gap: f64| {
        let hyp = validate_hypotheses(data, eig, &opts).unwrap();
        let (l1, ls) = (eig.lambda1, ex.lambda_star);
        let f_star = f_gamma(&ex.u_star, data);
        let mut pass = ls >= l1 - STAR_FLOOR;
        if hyp.f_at_phi1 < 0.0 {
            pass &= ls > (1.0 + gap) * l1 && f_star.abs() <= STAR_F_ABS;
        }
        ok &= pass;
        parts.push(format!("{name}: ∫fφ₁^γ {:.1e}, λ₁ {l1:.5}, λ* {ls:.5}, F(u*) {f_star:.1e}", hyp.f_at_phi1));
    };
    check("preset", &base.data, &base.eig, &base.ex, STAR_GAP);
    for (k, data) in variants.iter().enumerate() {
        let eig = lambda1(data, None, &opts).unwrap();
        let ex = lambda_star(data, &eig, &opts).unwrap();
        check(&format!("variant {}", k + 1), data, &eig, &ex, 0.0);
    }
    (ok, parts.join("; "))
}

fn criterion_5(s: &Preset) -> (bool, String) {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut last = f64::INFINITY;
    let mut worst_res: f64 = 0.0;
    for k in 0..BRANCH_SAMPLES {
        let frac = BRANCH_DELTA + (1.0 - 2.0 * BRANCH_DELTA) * (k as f64 + 0.5) / BRANCH_SAMPLES as f64;
        let l = s.interior(frac);
        let (Ok(p), Ok(m)) = (solve_nplus(l, &s.data, &s.marks, None, &opts), solve_nminus(l, &s.data, &s.marks, None, &opts)) else {
            return (false, format!("solve failed at λ = {l}"));
        };
        worst_res = worst_res.max(p.report.residual).max(m.report.residual);
        ok &= p.report.phi < 0.0 && 0.0 < m.report.phi;
        ok &= p.report.phi <= last;
        last = p.report.phi;
    }
    ok &= worst_res <= BRANCH_RESIDUAL;
    (ok, format!("{BRANCH_SAMPLES} λ, worst residual {worst_res:.2e}, Ĵ⁺ at largest λ {last:.6e}"))
}

fn criterion_6(s: &Preset) -> (bool, String) {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut lowest = f64::INFINITY;
    for k in 1..=PROBE_TARGETS {
        let target = s.interior((1.0 - BRANCH_DELTA) * k as f64 / (PROBE_TARGETS + 1) as f64);
        match n0_probe(target, &s.data, &s.marks, &opts) {
            Ok(p) => {
                ok &= !p.found && p.best_quotient >= s.ls() - PROBE_MARGIN;
                lowest = lowest.min(p.best_quotient);
            }
            Err(_) => ok = false,
        }
    }
    let (_, w) = t0_rescale(&s.ex.u_star, s.ls(), &s.data).unwrap();
    let class = nehari_test(&w, s.ls(), &s.data, opts.class_tol).unwrap();
    let res = pde_residual(&w, s.ls(), &s.data).unwrap();
    ok &= class == NehariClass::Zero && res <= ZERO_RESIDUAL_FACTOR * opts.tol;
    (ok, format!("lowest probe quotient {lowest:.6} vs λ* {:.6}; rescaled u* class {class:?}, residual {res:.2e}", s.ls()))
}

fn criterion_7(s: &Preset, out: &SweepOutput, grid: &[f64]) -> (bool, String) {
    let mut ok = out.passes.len() == grid.len();
    let mut parts = vec![];
    for (k, &l) in grid.iter().enumerate() {
        let first = out.rows.iter().find(|r| r.lambda == l && r.branch == BranchKind::Restricted);
        let pass = out.passes.iter().find(|(pl, _)| *pl == l).map(|(_, r)| r);
        let (Some(Ok(bp)), Some(Ok(rep))) = (first.map(|r| &r.outcome), pass) else {
            ok = false;
            parts.push(format!("k={}: failed", k + 1));
            continue;
        };
        let h_mu0 = h_lambda(&bp.u, rep.mu0, &s.data);
        let c = rep.pass.c_lambda;
        ok &= h_mu0 < 0.0 && bp.report.residual <= PAST_RESIDUAL && bp.report.phi < 0.0;
        ok &= rep.j_first < c && c < 0.0 && rep.saddle.report.residual <= SADDLE_RESIDUAL && rep.distance > SADDLE_DISTANCE;
        parts.push(format!(
            "k={}: Φ₁ {:.4e}, c {c:.4e}, saddle res {:.1e}, dist {:.3}",
            k + 1,
            bp.report.phi,
            rep.saddle.report.residual,
            rep.distance
        ));
    }
    (ok, parts.join("; "))
}

fn criterion_8() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for p in [2.0, 3.0] {
        for k in 0..MONOTONE_PAIRS {
            let d = build_domain(1 + k % 2, 1.0, 13).unwrap();
            let (u, v) = (random_field(d, &mut rng), random_field(d, &mut rng));
            let diff: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
            let e = dirichlet_energy(&d, &diff, p, 0.0);
            let gap = monotonicity_gap(&u, &v, p);
            ok &= gap >= MONOTONE_FACTOR * e;
            worst = worst.min(gap / e);
        }
    }
    (ok, format!("{} pairs, smallest ratio {worst:.3e}", 2 * MONOTONE_PAIRS))
}

fn criterion_9() -> (bool, String) {
    let tmp = tempfile::TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[domain]\nnodes = 51\n[lambda]\nbelow = 3\nabove = 1\n[solver]\nseed = 11\n").unwrap();
    let mut tables = vec![];
    for out in ["a", "b"] {
        let status = Command::new(env!("CARGO_BIN_EXE_nehari")).arg(&cfg).arg("--out").arg(tmp.path().join(out)).status().unwrap();
        if status.code() != Some(0) {
            return (false, format!("run {out} exited with {status}"));
        }
        tables.push(fs::read(tmp.path().join(out).join("branches.csv")).unwrap());
    }
    (tables[0] == tables[1], format!("{} bytes per table", tables[0].len()))
}

fn criterion_10(s: &Preset, out: &SweepOutput) -> (bool, String) {
    let opts = SolverOptions::default();
    let l = s.interior(0.5);
    let p = solve_nplus(l, &s.data, &s.marks, None, &opts).unwrap();
    let m = solve_nminus(l, &s.data, &s.marks, None, &opts).unwrap();
    let saddle = out.passes.first().and_then(|(_, r)| r.as_ref().ok()).map(|r| r.saddle.report.tail_fraction);
    let tails = [p.report.tail_fraction, m.report.tail_fraction, saddle.unwrap_or(f64::INFINITY)];
    let tail = tails.iter().cloned().fold(0.0, f64::max);

    let wide = Preset::new(2.0 * s.data.domain().half_width(), 2 * s.data.domain().nodes_per_axis() - 1);
    let pw = solve_nplus(l, &wide.data, &wide.marks, None, &opts).unwrap();
    let dstar = (wide.ls() - s.ls()).abs() / s.ls();
    let dj = (pw.report.phi - p.report.phi).abs() / p.report.phi.abs();
    let ok = tail < TAIL_MAX && dstar < TRUNCATION_REL && dj < TRUNCATION_REL;
    (ok, format!("max tail {tail:.2e}; doubling L: λ* rel change {dstar:.2e}, Ĵ⁺ rel change {dj:.2e}"))
}

fn main() -> ExitCode {
    let s = Preset::new(10.0, 201);
    let grid: Vec<f64> = (1..=3).map(|k| s.ls() * (1.0 + PAST_STEP * k as f64)).collect();
    let past = sweep(&grid, &s.data, &s.marks, &SolverOptions::default());

    let results = [
        ("eigenvalue oracles", criterion_1()),
        ("gradient correctness", criterion_2()),
        ("fibering suite", criterion_3()),
        ("extreme-value ordering", criterion_4(&s)),
        ("two-branch regime", criterion_5(&s)),
        ("N0 dichotomy probe", criterion_6(&s)),
        ("past-λ* regime", criterion_7(&s, &past, &grid)),
        ("p-Laplacian monotonicity", criterion_8()),
        ("determinism", criterion_9()),
        ("truncation adequacy", criterion_10(&s, &past)),
    ];
    let mut failed = 0;
    for (k, (name, (ok, detail))) in results.iter().enumerate() {
        println!("{} criterion {} ({name}): {detail}", if *ok { "PASS" } else { "FAIL" }, k + 1);
        failed += usize::from(!ok);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
