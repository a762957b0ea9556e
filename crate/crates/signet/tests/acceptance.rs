use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use signet::oracle::{fd_assemble, fd_solve, fd_spectrum, sample_source, FdEigen};
use signet_core::basis::{biorthogonal_family, gram_matrix, riesz_transform, Weight};
use signet_core::evolution::{evolve_heat, evolve_schrodinger, SpectralState, SubspaceX};
use signet_core::graph::{build_star, build_tadpole2, build_tadpole3, Boundary, Network};
use signet_core::roots::bisect;
use signet_core::spectra::{
    det2_positivity, dispersion_general, spectrum_star_equilateral_pseudo, spectrum_star_equilateral_standard,
    spectrum_star_irrational_standard, spectrum_star_mixed_standard, spectrum_tadpole_standard, Family, Operator, Spectrum,
};
use signet_core::stationary::{solve_stationary, SourceTerm};
use signet_core::wellposed::{assemble_transmission, resonance_verdict, SourceMoments};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_offdiag_dev(g: &nalgebra::DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}

fn unit_star(d: usize, n: usize, km: f64) -> Network {
    let k: Vec<f64> = (0..n).map(|j| if j < d { 1.0 } else { km }).collect();
    build_star(&vec![1.0; n], &k, &vec![Boundary::Dirichlet; n]).unwrap()
}

fn thresholds() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        for d in 1..n {
            let det = |k: f64| {
                let net = unit_star(d, n, k);
                assemble_transmission(&net, &SourceMoments::zero(n)).unwrap().determinant()
            };
            let want = -(d as f64) / (n - d) as f64;
            let root = bisect(&det, 2.0 * want, 0.5 * want).unwrap();
            worst = worst.max((root - want).abs());
        }
    }
    outcome(worst < 1e-10, format!("28 partitions, max |k- - (-D/(N-D))| = {worst:.2e}"))
}

fn random_star(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<Boundary>) {
    let n = rng.random_range(2..=8);
    let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    let k: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.random_range(0.1..5.0);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect();
    let b = (0..n).map(|_| if rng.random_bool(0.7) { Boundary::Dirichlet } else { Boundary::Neumann }).collect();
    (l, k, b)
}

fn mixed_boundary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut resonant, mut mismatches, mut worst) = (0, 0, 0.0f64);
    let mut done = 0;
    while done < 500 {
        let (l, mut k, b) = random_star(&mut rng);
        let dir: Vec<usize> = (0..l.len()).filter(|&j| b[j] == Boundary::Dirichlet).collect();
        // every other sample is pushed onto the resonant set
        if done % 2 == 1 && dir.len() >= 2 {
            let last = *dir.last().unwrap();
            let rest: f64 = dir[..dir.len() - 1].iter().map(|&j| k[j] / l[j]).sum();
            k[last] = -rest * l[last];
            if k[last].abs() < 0.05 {
                continue;
            }
        }
        done += 1;
        let net = build_star(&l, &k, &b).unwrap();
        let v = resonance_verdict(&net).unwrap();
        let flux: Vec<f64> = dir.iter().map(|&j| k[j] / l[j]).collect();
        let sum: f64 = flux.iter().sum();
        let scale = flux.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let zero = sum.abs() <= 1e-10 * scale;
        resonant += zero as usize;
        if v.well_posed == zero {
            mismatches += 1;
        }
        worst = worst.max((v.critical_value.unwrap() - sum).abs() / scale);
        worst = worst.max((v.determinant.abs() - sum.abs()).abs() / scale);
    }
    outcome(mismatches == 0 && worst < 1e-10, format!("500 stars ({resonant} on the zero set), {mismatches} verdict mismatches, max margin disagreement {worst:.2e}"))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn tadpoles() -> Outcome {
    let mut flagged = 0;
    for (i, a) in grid(0.1, 4.0, 40).enumerate() {
        for b in grid(0.1, 4.0, 40) {
            let (k1, k2) = if i % 2 == 0 { (a, -b) } else { (-a, b) };
            let net = build_tadpole2(1.3, 0.7, k1, k2).unwrap();
            if !resonance_verdict(&net).unwrap().well_posed {
                flagged += 1;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for l1 in grid(0.2, 3.0, 50) {
        for l2 in grid(0.2, 3.0, 50) {
            let det = |k2: f64| {
                let net = build_tadpole3([l1, l2, 1.0], [1.0, k2, 1.0]).unwrap();
                assemble_transmission(&net, &SourceMoments::zero(3)).unwrap().determinant()
            };
            let want = -l2 / l1;
            let k2 = bisect(&det, 2.0 * want, 0.5 * want).unwrap();
            worst = worst.max((-1.0 / k2 - l1 / l2).abs() / (l1 / l2));
        }
    }
    outcome(flagged == 0 && worst < 1e-8, format!("tadpole2 flagged {flagged}/1600, tadpole3 locus max rel err {worst:.2e} over 2500 points"))
}

fn nearest(fd: &[FdEigen], lambda: f64) -> f64 {
    fd.iter().map(|e| e.lambda).min_by(|a, b| (a - lambda).abs().partial_cmp(&(b - lambda).abs()).unwrap()).unwrap()
}

struct FamilyReport {
    label: String,
    worst_err: f64,
    ratio_range: (f64, f64),
    outliers: Vec<String>,
}

fn standard_family_report(d: usize, n: usize, km: f64) -> FamilyReport {
    let s = spectrum_star_equilateral_standard(d, n, km, 10).unwrap();
    let mut picked: Vec<(Family, f64)> = Vec::new();
    for fam in [Family::NuPositiveTrig, Family::ThetaNegativeTrig, Family::DispersionA, Family::DispersionB] {
        let mut ls: Vec<f64> = s.pairs().filter(|p| p.family == fam && p.lambda != 0.0).map(|p| p.lambda).collect();
        ls.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        picked.extend(ls.into_iter().take(8).map(|l| (fam, l)));
    }
    let lo = picked.iter().map(|p| p.1).fold(0.0, f64::min) * 1.05 - 1.0;
    let hi = picked.iter().map(|p| p.1).fold(0.0, f64::max) * 1.05 + 1.0;
    let fd: Vec<Vec<FdEigen>> = [1e-3, 5e-4]
        .par_iter()
        .map(|&h| fd_spectrum(&fd_assemble(&s.network, h, Operator::Standard).unwrap(), (lo, hi)).unwrap())
        .collect();
    let mut rep = FamilyReport { label: format!("({d},{n},{km})"), worst_err: 0.0, ratio_range: (f64::INFINITY, 0.0), outliers: Vec::new() };
    for (fam, l) in picked {
        let e1 = (nearest(&fd[0], l) - l).abs();
        let e2 = (nearest(&fd[1], l) - l).abs();
        let rel = e1 / l.abs();
        let ratio = e1 / e2;
        rep.worst_err = rep.worst_err.max(rel);
        rep.ratio_range = (rep.ratio_range.0.min(ratio), rep.ratio_range.1.max(ratio));
        if rel >= 1e-3 || !(3.5..=4.5).contains(&ratio) {
            rep.outliers.push(format!("{}({l:.4}) rel {rel:.2e} ratio {ratio:.2}", fam.name()));
        }
    }
    rep
}

fn standard_vs_oracle() -> Outcome {
    let configs = [(1, 2, -1.0), (2, 3, -0.5), (2, 3, -3.0), (1, 3, -0.25)];
    let reps: Vec<FamilyReport> = configs.par_iter().map(|&(d, n, k)| standard_family_report(d, n, k)).collect();
    let pass = reps.iter().all(|r| r.outliers.is_empty());
    let detail = reps
        .iter()
        .map(|r| {
            let mut s = format!("{} rel err {:.2e} ratios [{:.2}, {:.2}]", r.label, r.worst_err, r.ratio_range.0, r.ratio_range.1);
            if !r.outliers.is_empty() {
                s.push_str(&format!(" outliers: {}", r.outliers.join(", ")));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn gram30(s: &Spectrum, weight: &Weight) -> f64 {
    let modes = s.modes();
    assert!(modes.len() >= 30, "{} modes", modes.len());
    let fs: Vec<_> = modes[..30].iter().map(|m| m.function).collect();
    max_offdiag_dev(&gram_matrix(&fs, weight).unwrap())
}

fn orthonormality() -> Outcome {
    let r2 = 2f64.sqrt();
    let mixed = build_star(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0, -2.0, -2.0], &[Boundary::Dirichlet, Boundary::Neumann, Boundary::Dirichlet, Boundary::Neumann]).unwrap();
    let spectra = [
        ("star(2,3,-0.5)", spectrum_star_equilateral_standard(2, 3, -0.5, 30)),
        ("star(1,3,-0.25)", spectrum_star_equilateral_standard(1, 3, -0.25, 30)),
        ("star(1,sqrt2,sqrt3)", spectrum_star_irrational_standard(&[1.0, r2, 3f64.sqrt()], 2, -0.5, 30)),
        ("star-mixed", spectrum_star_mixed_standard(mixed.partition_summary().unwrap(), -2.0, &mixed.lengths(), 30)),
        ("tadpole(1,sqrt2,-0.5)", spectrum_tadpole_standard(1.0, r2, -0.5, 30)),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, s) in spectra {
        let dev = gram30(&s.unwrap(), &Weight::Plain);
        worst = worst.max(dev);
        parts.push(format!("{label} {dev:.2e}"));
    }
    outcome(worst < 1e-9, format!("max |G - I| over 30 modes: {}", parts.join(", ")))
}

fn pseudo_exactness() -> Outcome {
    let configs = [(1, 2, -1.5), (2, 3, -0.5), (1, 3, -0.25), (3, 5, -0.3)];
    let levels = 10;
    let results: Vec<(f64, bool, f64, String)> = configs
        .par_iter()
        .map(|&(d, n, km)| {
            let s = spectrum_star_equilateral_pseudo(d, n, km, levels).unwrap();
            let mut exact: f64 = 0.0;
            let mut mult_ok = s.positive.len() >= levels;
            for (i, p) in s.positive.iter().take(levels).enumerate() {
                let m = (i + 1) as f64;
                exact = exact.max((p.lambda - m * m * PI * PI / 4.0).abs() / p.lambda);
                mult_ok &= p.multiplicity == if i % 2 == 0 { 1 } else { n - 1 };
            }
            let top = ((levels as f64 + 0.5) * PI / 2.0).powi(2);
            let fd = fd_spectrum(&fd_assemble(&s.network, 1e-3, Operator::Pseudo).unwrap(), (0.5, top)).unwrap();
            let mut fd_ok = fd.len() == levels;
            let mut fd_err: f64 = 0.0;
            for (i, e) in fd.iter().enumerate().take(levels) {
                let m = (i + 1) as f64;
                let want = m * m * PI * PI / 4.0;
                fd_err = fd_err.max((e.lambda - want).abs() / want);
                fd_ok &= e.multiplicity == if i % 2 == 0 { 1 } else { n - 1 };
            }
            let sizes: Vec<String> = fd.iter().map(|e| e.multiplicity.to_string()).collect();
            (exact, mult_ok && fd_ok && fd_err < 1e-3, fd_err, format!("({d},{n},{km}) clusters [{}]", sizes.join(" ")))
        })
        .collect();
    let exact = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let fd_err = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let pass = exact < 1e-12 && results.iter().all(|r| r.1);
    let labels: Vec<String> = results.into_iter().map(|r| r.3).collect();
    outcome(pass, format!("closed-form max rel err {exact:.1e}, FD max rel err {fd_err:.2e}; {}", labels.join("; ")))
}

fn riesz_certificate() -> Outcome {
    let mut gram: f64 = 0.0;
    let mut resid: f64 = 0.0;
    for (d, n, km) in [(2, 3, -0.5), (1, 3, -0.25), (3, 5, -0.3)] {
        let s = spectrum_star_equilateral_pseudo(d, n, km, 30).unwrap();
        gram = gram.max(gram30(&riesz_transform(&s, km).unwrap(), &Weight::Plain));
        resid = resid.max(biorthogonal_family(&s, 30).unwrap().residual);
    }
    outcome(gram < 1e-9 && resid < 1e-8, format!("3 stars, riesz max |G - I| {gram:.2e}, biorthogonal residual {resid:.2e} at truncation 30"))
}

fn det2_samples() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = 0;
    let mut least = f64::INFINITY;
    for _ in 0..10_000 {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = sign * rng.random_range(1e-3..5.0);
        let b = sign * rng.random_range(1e-3..5.0);
        let s = 10.0 - rng.random_range(0.0..10.0);
        let v = det2_positivity(a, b, s);
        bad += (v <= 0.0) as usize;
        least = least.min(v);
    }
    outcome(bad == 0, format!("10000 samples, {bad} nonpositive, min {least:.3e}"))
}

fn evolution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut drift: f64 = 0.0;
    for (d, n, km) in [(2, 3, -0.5), (1, 3, -0.25), (2, 3, -3.0)] {
        let s = spectrum_star_equilateral_standard(d, n, km, 12).unwrap();
        let st = SpectralState::zero(&s, 20).unwrap();
        // norms through the quadrature Gram of the actual mode functions
        let fs: Vec<_> = st.modes.iter().collect();
        let g = gram_matrix(&fs, &Weight::Plain).unwrap().map(|x| Complex64::new(x, 0.0));
        let l2 = |c: &[Complex64]| {
            let v = nalgebra::DVector::from_column_slice(c);
            (v.adjoint() * &g * &v)[(0, 0)].re.sqrt()
        };
        for _ in 0..5 {
            let c: Vec<Complex64> = (0..20).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let st = st.with_coefficients(c).unwrap();
            let n0 = l2(&st.coefficients);
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let n = l2(&evolve_schrodinger(&st, t).unwrap().coefficients);
                drift = drift.max((n - n0).abs() / n0);
            }
        }
    }
    // heat on X: only the negative mode nearest zero is active
    let (d, n, km) = (2, 3, -3.0);
    let s = spectrum_star_equilateral_standard(d, n, km, 12).unwrap();
    let st = SpectralState::zero(&s, 20).unwrap();
    let j = st.lambdas.iter().position(|&l| l < 0.0).unwrap();
    let lam = st.lambdas[j];
    let a1 = (lam / km).sqrt();
    let sq = (-km).sqrt();
    let dispersion = dispersion_general(a1, sq, d as f64 / (sq * (n - d) as f64)).abs();
    let mut c = vec![Complex64::new(0.0, 0.0); 20];
    c[j] = Complex64::new(1.0, 0.0);
    for (i, z) in c.iter_mut().enumerate() {
        if st.lambdas[i] >= 0.0 {
            *z = Complex64::new(1.0 / (i + 1) as f64, 0.0);
        }
    }
    let st = st.with_coefficients(c).unwrap();
    let x = SubspaceX::new(1);
    let mut growth: f64 = 0.0;
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let got = evolve_heat(&st, t, Some(&x)).unwrap().coefficients[j].re;
        let want = (km.abs() * a1 * a1 * t).exp();
        growth = growth.max((got - want).abs() / want);
    }
    let pass = drift < 1e-10 && growth < 1e-9 && dispersion < 1e-9;
    outcome(pass, format!("schrodinger max norm drift {drift:.2e}; heat growth factor max rel err {growth:.2e} (a1 = {a1:.10}, dispersion residual {dispersion:.1e})"))
}

fn stationary() -> Outcome {
    let cases = [
        ("interval (0.6, 0.4) k (1, -2.5)", build_star(&[0.6, 0.4], &[1.0, -2.5], &[Boundary::Dirichlet; 2]).unwrap()),
        ("3-star (2,3,-0.5)", unit_star(2, 3, -0.5)),
    ];
    let results: Vec<(f64, String)> = cases
        .par_iter()
        .map(|(label, net)| {
            let psi = solve_stationary(net, &SourceTerm::constant(net.num_edges(), 1.0)).unwrap();
            let disc = fd_assemble(net, 1e-4, Operator::Standard).unwrap();
            let fd = fd_solve(&disc, &sample_source(&disc, |_, _| 1.0)).unwrap();
            let dist = fd.l2_distance(|e, x| psi.eval(e, x));
            (dist, format!("{label} L2 {dist:.2e} (norm {:.3e})", fd.l2_norm()))
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    outcome(worst < 1e-6, results.into_iter().map(|r| r.1).collect::<Vec<_>>().join(", "))
}

fn main() -> ExitCode {
    let criteria: [(fn() -> Outcome, Duration); 10] = [
        (thresholds, Duration::from_secs(1)),
        (mixed_boundary, Duration::from_secs(5)),
        (tadpoles, Duration::from_secs(5)),
        (standard_vs_oracle, Duration::from_secs(120)),
        (orthonormality, Duration::from_secs(10)),
        (pseudo_exactness, Duration::from_secs(60)),
        (riesz_certificate, Duration::from_secs(10)),
        (det2_samples, Duration::from_secs(1)),
        (evolution, Duration::from_secs(10)),
        (stationary, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.pass && took <= *budget;
        failed += !pass as usize;
        println!("{} criterion {}: {} [{:.2} s, budget {} s]", if pass { "PASS" } else { "FAIL" }, i + 1, o.detail, took.as_secs_f64(), budget.as_secs());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
