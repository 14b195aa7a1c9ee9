//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qha_core::approx::{approximate_identity_sweep, non_increasing_within, toeplitz_approximation};
use qha_core::conv::{
    adjoint_duality_residuals, random_finite_rank, toeplitz_via_convolution, trace_identity_residual,
    OperatorConvolution,
};
use qha_core::experiments::{ball_points, invariance_check, quantization_sweep, QuantizationConfig};
use qha_core::fock::{kernel_coefficients, parity_matrix, rank_one, spectral_norm, Basis, FockOperator, FockParams};
use qha_core::quadrature::gaussian_grid;
use qha_core::toeplitz::{berezin, toeplitz};
use qha_core::weyl::weyl;
use qha_core::{ApproxConfig, ConvolutionConfig, Symbol};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn origin() -> Vec<Complex64> {
    vec![c(0.0, 0.0)]
}

fn bump() -> Symbol {
    Symbol::gaussian_bump(origin(), 4.0)
}

fn check(ok: bool, failures: &mut Vec<String>, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            summary
        } else {
            format!("{summary}; failed: {}", failures.join("; "))
        },
    }
}

fn exact_quadrature_identities() -> Outcome {
    let start = Instant::now();
    let p = FockParams::new(1, 1.0, 30, 40).unwrap();
    let basis = Basis::new(&p);
    let grid = gaussian_grid(&p);
    let dim = p.dim();
    let mut gram = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..grid.len() {
        let e = nalgebra::DVector::from_vec(basis.eval_all(&p, grid.node(i)));
        gram += &e * e.adjoint() * c(grid.weight(i), 0.0);
    }
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let ortho = (gram - &id).camax();
    let t_one = (toeplitz(&p, &Symbol::constant(1.0)).unwrap().matrix - &id).camax();
    let t_r2 = toeplitz(&p, &Symbol::norm_squared(1)).unwrap();
    let diag = DMatrix::from_fn(dim, dim, |a, b| if a == b { c(p.t * (a as f64 + 1.0), 0.0) } else { c(0.0, 0.0) });
    let r2_err = (t_r2.matrix - diag).camax();
    let u = parity_matrix(p);
    let parity_exact = (&u * &u).matrix == id;
    let elapsed = start.elapsed();

    let mut failures = Vec::new();
    check(ortho <= 1e-12, &mut failures, format!("orthonormality {ortho:.2e}"));
    check(t_one <= 1e-12, &mut failures, format!("T_1 {t_one:.2e}"));
    check(r2_err <= 1e-12, &mut failures, format!("T_|w|^2 {r2_err:.2e}"));
    check(parity_exact, &mut failures, "parity not an exact involution");
    check(elapsed < Duration::from_secs(5), &mut failures, format!("runtime {elapsed:?}"));
    outcome(
        failures,
        format!("orthonormality {ortho:.1e}, T_1 {t_one:.1e}, T_|w|^2 {r2_err:.1e}, parity exact {parity_exact}, {elapsed:.2?}"),
    )
}

fn commutation_residual(d: usize, z: Complex64, w: Complex64) -> f64 {
    let p = FockParams::with_degree(1, 1.0, d).unwrap();
    let phase = Complex64::from_polar(1.0, -(z * w.conj()).im / p.t);
    let lhs = &weyl(&p, &[z]) * &weyl(&p, &[w]);
    let rhs = weyl(&p, &[z + w]).scale(phase);
    spectral_norm(&(&lhs - &rhs).trusted_block())
}

fn inverse_residual(d: usize, z: Complex64) -> f64 {
    let p = FockParams::with_degree(1, 1.0, d).unwrap();
    let block = (&weyl(&p, &[z]) * &weyl(&p, &[-z])).trusted_block();
    let k = block.nrows();
    spectral_norm(&(block - DMatrix::identity(k, k)))
}

fn weyl_algebra() -> Outcome {
    let pairs = [
        (c(0.6, 0.8), c(-0.3, 0.9)),
        (c(1.0, 0.0), c(0.0, 1.0)),
        (c(-0.7, 0.7), c(0.5, -0.5)),
        (c(0.2, -0.4), c(0.9, 0.1)),
        (c(0.0, -1.0), c(-1.0, 0.0)),
    ];
    let mut failures = Vec::new();
    let mut worst40: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    for (z, w) in pairs {
        let r20 = commutation_residual(20, z, w);
        let r40 = commutation_residual(40, z, w);
        worst40 = worst40.max(r40);
        worst_ratio = worst_ratio.min(r20 / r40);
        check(r40 <= 1e-6, &mut failures, format!("commutation {r40:.2e} at z={z}, w={w}"));
        check(r20 >= 10.0 * r40, &mut failures, format!("D 20->40 only {:.1}x at z={z}, w={w}", r20 / r40));
    }
    let mut worst_inv: f64 = 0.0;
    for k in 0..8 {
        let z = Complex64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4);
        worst_inv = worst_inv.max(inverse_residual(40, z));
        worst_inv = worst_inv.max(inverse_residual(40, z * 0.5));
    }
    check(worst_inv <= 1e-8, &mut failures, format!("W_z W_-z {worst_inv:.2e}"));
    outcome(
        failures,
        format!("commutation {worst40:.1e} (D=40), min decrease {worst_ratio:.0}x, W_z W_-z {worst_inv:.1e}"),
    )
}

fn berezin_closed_form() -> Outcome {
    let p = FockParams::with_degree(1, 1.0, 40).unwrap();
    let basis = Basis::new(&p);
    let r = (p.t * p.d as f64).sqrt() / 2.0;
    let centres = [c(0.0, 0.0), c(r, 0.0), c(-0.5 * r, 0.6 * r), Complex64::from_polar(r, 2.5)];
    let points = ball_points(1, r, 17);
    let mut worst: f64 = 0.0;
    for z0 in centres {
        let k0 = kernel_coefficients(&p, &basis, &[z0]).vector;
        let b = berezin(&rank_one(&k0, &k0).unwrap());
        for z in &points {
            let want = (-(z[0] - z0).norm_sqr() / p.t).exp();
            worst = worst.max((b.eval(z) - want).norm());
        }
    }
    let mut failures = Vec::new();
    check(worst <= 1e-8, &mut failures, format!("max error {worst:.2e}"));
    outcome(failures, format!("max error {worst:.1e} over |z|,|z0| <= {r:.3}"))
}

fn convolution_identities() -> Outcome {
    let p = FockParams::with_degree(1, 1.0, 20).unwrap();
    let cfg = ConvolutionConfig::for_params(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut failures = Vec::new();
    let mut worst_trace: f64 = 0.0;
    for k in 0..20 {
        let a = random_finite_rank(&p, 1 + k % 3, &mut rng);
        let b = random_finite_rank(&p, 1 + (k + 1) % 3, &mut rng);
        let r = trace_identity_residual(&a, &b, &cfg).unwrap();
        worst_trace = worst_trace.max(r);
        check(r <= 1e-4, &mut failures, format!("trace identity pair {k}: {r:.2e}"));
    }
    let f = Symbol::heat_kernel(1, 1.0);
    let pc = FockOperator::projection_onto_constants(p);
    let mut worst_dual: f64 = 0.0;
    let mut cases = vec![(f.clone(), pc.clone(), pc.clone(), pc.clone())];
    for _ in 0..3 {
        cases.push((
            Symbol::gaussian_bump(vec![c(0.3, -0.2)], 1.5),
            random_finite_rank(&p, 1, &mut rng),
            random_finite_rank(&p, 1, &mut rng),
            random_finite_rank(&p, 1, &mut rng),
        ));
    }
    for (f, a1, a2, b) in &cases {
        for r in adjoint_duality_residuals(f, a1, a2, b, &cfg).unwrap() {
            worst_dual = worst_dual.max(r);
            check(r <= 1e-4, &mut failures, format!("duality {r:.2e}"));
        }
    }
    let a = random_finite_rank(&p, 2, &mut rng);
    let b = random_finite_rank(&p, 3, &mut rng);
    let ab = OperatorConvolution::new(&a, &b).unwrap();
    let ba = OperatorConvolution::new(&b, &a).unwrap();
    let mut worst_comm: f64 = 0.0;
    for z in ball_points(1, p.trusted_radius(), 9) {
        worst_comm = worst_comm.max((ab.eval(&z) - ba.eval(&z)).norm());
    }
    check(worst_comm <= 1e-6, &mut failures, format!("commutativity {worst_comm:.2e}"));
    outcome(
        failures,
        format!("trace {worst_trace:.1e} (20 pairs), duality {worst_dual:.1e}, commutativity {worst_comm:.1e}"),
    )
}

fn two_pipeline_toeplitz() -> Outcome {
    let p = FockParams::with_degree(1, 1.0, 30).unwrap();
    let cfg = ConvolutionConfig::for_params(&p);
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (name, f) in [
        ("gaussian bump", Symbol::gaussian_bump(vec![c(0.5, -0.3)], 2.0)),
        ("plane wave", Symbol::plane_wave(vec![c(1.0, 0.5)])),
    ] {
        let direct = toeplitz(&p, &f).unwrap();
        let via = toeplitz_via_convolution(&p, &f, &cfg).unwrap();
        let rel = (&direct - &via).frobenius_norm() / direct.frobenius_norm();
        check(rel <= 1e-4, &mut failures, format!("{name} {rel:.2e}"));
        parts.push(format!("{name} {rel:.1e}"));
    }
    outcome(failures, parts.join(", "))
}

fn approximate_identity() -> Outcome {
    let start = Instant::now();
    let p = FockParams::with_degree(1, 1.0, 40).unwrap();
    let a = toeplitz(&p, &bump()).unwrap();
    let rows = approximate_identity_sweep(&a, &[1.0, 0.5, 0.25, 0.125], &ConvolutionConfig::for_params(&p)).unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    check(non_increasing_within(&errors, 0.1), &mut failures, "not decreasing within 10%");
    check(errors.windows(2).all(|w| w[1] < w[0] * 1.1), &mut failures, "slack exceeded");
    check(elapsed < Duration::from_secs(60), &mut failures, format!("runtime {elapsed:?}"));
    outcome(failures, format!("errors {}, {elapsed:.1?}", fmt_list(&errors)))
}

fn toeplitz_scheme() -> Outcome {
    let start = Instant::now();
    let p = FockParams::with_degree(1, 1.0, 40).unwrap();
    let cfg = ApproxConfig::for_params(&p);
    let k0 = kernel_coefficients(&p, &Basis::new(&p), &origin()).vector;
    let targets = [
        ("toeplitz(gaussian bump)", toeplitz(&p, &bump()).unwrap()),
        ("weyl(0.5)", weyl(&p, &[c(0.5, 0.0)])),
        ("rank_one(k_0, k_0)", rank_one(&k0, &k0).unwrap()),
    ];
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (name, a) in &targets {
        let report = toeplitz_approximation(a, name, &[1, 2, 4, 8], &cfg).unwrap();
        let errors = report.errors();
        check(report.is_non_increasing(), &mut failures, format!("{name} not non-increasing"));
        check(report.final_at_most(1.0 / 3.0), &mut failures, format!("{name} final > initial/3"));
        check(report.all_dominated(), &mut failures, format!("{name} domination violated"));
        parts.push(format!("{name} {}", fmt_list(&errors)));
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(300), &mut failures, format!("runtime {elapsed:?}"));
    outcome(failures, format!("{}; {elapsed:.1?}", parts.join("; ")))
}

fn quantization() -> Outcome {
    let cfg = QuantizationConfig::new(FockParams::with_degree(1, 1.0, 16).unwrap());
    let report = quantization_sweep(&bump(), &bump(), &[1.0, 0.5, 0.25, 0.125], &cfg).unwrap();
    let op = report.column("product_defect").unwrap();
    let sup = report.column("heat_defect").unwrap();
    let strictly = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let mut failures = Vec::new();
    check(report.is_decreasing_within(0.15), &mut failures, "slack exceeded");
    check(strictly(&op), &mut failures, "operator defect not strictly decreasing");
    check(strictly(&sup), &mut failures, "heat defect not strictly decreasing");
    let degrees: Vec<usize> = report.records.iter().map(|r| r.params.d).collect();
    check(degrees.windows(2).all(|w| w[1] > w[0]), &mut failures, "model not rebuilt per t");
    outcome(
        failures,
        format!("||T_fT_g - T_fg|| {}, sup defect {}, D per t {degrees:?}", fmt_list(&op), fmt_list(&sup)),
    )
}

fn invariance() -> Outcome {
    let p = FockParams::with_degree(1, 1.0, 40).unwrap();
    let horizontal = Symbol::HorizontalGaussian {
        width: 2.0,
        amplitude: c(1.0, 0.0),
    };
    let lambdas = [0.25, 0.5, 1.0];
    let inv = invariance_check(&p, &horizontal, &[vec![c(0.0, 1.0)]], &lambdas).unwrap();
    let radial = invariance_check(&p, &Symbol::gaussian_bump(origin(), 2.0), &[vec![c(1.0, 0.0)]], &lambdas).unwrap();
    let control = radial.samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let mut failures = Vec::new();
    check(inv.max_residual <= 1e-6, &mut failures, format!("horizontal {:.2e}", inv.max_residual));
    check(control >= 0.01, &mut failures, format!("negative control only {control:.2e}"));
    outcome(
        failures,
        format!("horizontal {:.1e}, radial control min {control:.3}", inv.max_residual),
    )
}

fn determinism_outputs() -> Vec<u8> {
    let mut out = Vec::new();
    let p = FockParams::with_degree(1, 1.0, 16).unwrap();
    let cfg = ConvolutionConfig {
        resolution: 96,
        ..ConvolutionConfig::for_params(&p)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_finite_rank(&p, 2, &mut rng);
    let fa = qha_core::conv::conv_fun_op(&Symbol::heat_kernel(1, 0.5), &a, &cfg).unwrap();
    qha_core::fock::io::write_operator(&fa, &mut out).unwrap();
    let b = random_finite_rank(&p, 3, &mut rng);
    out.extend(format!("{:?}\n", trace_identity_residual(&a, &b, &cfg).unwrap()).bytes());
    let mut acfg = ApproxConfig::for_params(&p);
    acfg.convolution = cfg;
    let report = toeplitz_approximation(&weyl(&p, &[c(0.5, 0.0)]), "weyl", &[1, 2], &acfg).unwrap();
    report.write_csv(&mut out).unwrap();
    out.extend(report.to_json().unwrap().bytes());
    let qcfg = QuantizationConfig::new(FockParams::with_degree(1, 1.0, 8).unwrap());
    quantization_sweep(&bump(), &bump(), &[1.0, 0.5], &qcfg)
        .unwrap()
        .write_csv(&mut out)
        .unwrap();
    out
}

fn determinism() -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(determinism_outputs)
    };
    let one = run(1);
    let four = run(4);
    let again = run(4);
    let mut failures = Vec::new();
    check(one == four, &mut failures, "1 vs 4 threads differ");
    check(four == again, &mut failures, "repeated 4-thread runs differ");
    outcome(failures, format!("{} bytes compared across 1, 4, 4 threads", one.len()))
}

fn fmt_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact quadrature identities", exact_quadrature_identities),
        ("weyl algebra", weyl_algebra),
        ("berezin closed form", berezin_closed_form),
        ("convolution identities", convolution_identities),
        ("two-pipeline toeplitz", two_pipeline_toeplitz),
        ("approximate identity", approximate_identity),
        ("toeplitz approximation scheme", toeplitz_scheme),
        ("quantization sweep", quantization),
        ("invariance", invariance),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let status = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failed += 1;
        }
        println!("{label}: {status} ({}) [{:.1?}]", result.detail, start.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
