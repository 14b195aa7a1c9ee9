use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use qha_core::approx::toeplitz_approximation;
use qha_core::experiments::{
    approximate_identity_report, compactness_diagnostic, invariance_check, quantization_sweep, QuantizationConfig,
    SweepReport,
};
use qha_core::fock::io::{write_operator_with_metadata, write_singular_values_csv};
use qha_core::toeplitz::berezin;
use qha_core::ApproxConfig;

use crate::config::RunConfig;
use crate::output::Output;
use crate::spec::{parse_list, parse_point, parse_symbol, Target};
use crate::verify::{self, VerifyOptions};
use crate::{ApproxArgs, CliError, ExportBerezinArgs, ExportOperatorArgs, Status, SweepArgs, SweepKind, VerifyArgs};

fn args(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn report_written(out: &Output) {
    for path in out.written() {
        println!("wrote {}", path.display());
    }
}

fn stages(text: &str) -> Result<Vec<usize>, CliError> {
    let stages: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("stages must be positive integers, got {text:?}")))?;
    if stages.is_empty() || stages.contains(&0) {
        return Err(CliError::Usage(format!("stages must be positive integers, got {text:?}")));
    }
    Ok(stages)
}

fn fmt_residual(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"))
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<Status, CliError> {
    if a.points == 0 {
        return Err(CliError::Usage("points must be positive".into()));
    }
    let embedded = cfg.embedded(
        "verify",
        &args(&[("pairs", a.pairs.to_string()), ("points", a.points.to_string())]),
    );
    let mut out = Output::new(&cfg.run.output, embedded)?;
    let records = verify::run(
        cfg,
        &VerifyOptions {
            pairs: a.pairs,
            points: a.points,
        },
    );
    for r in &records {
        out.json(&format!("verify/{}.json", r.identity), serde_json::to_value(r).expect("record serializes"))?;
    }
    out.csv("verify/summary.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["identity", "residual", "tolerance", "passed", "flags"])?;
        for r in &records {
            w.write_record([
                r.identity.clone(),
                r.residual.map_or_else(String::new, |v| v.to_string()),
                r.tolerance.to_string(),
                r.passed.to_string(),
                r.flags.join("|"),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    for r in &records {
        let flags = if r.flags.is_empty() {
            String::new()
        } else {
            format!(" [{}]", r.flags.join(", "))
        };
        println!(
            "{:<24} {} (tolerance {:.0e}) {}{flags}",
            r.identity,
            if r.passed { "PASS" } else { "FAIL" },
            r.tolerance,
            fmt_residual(r.residual),
        );
    }
    report_written(&out);
    let failed: Vec<&str> = records.iter().filter(|r| !r.passed).map(|r| r.identity.as_str()).collect();
    Ok(if failed.is_empty() {
        Status::Passed
    } else {
        Status::ToleranceFailure(format!("identities failed: {}", failed.join(", ")))
    })
}

pub fn approx(cfg: &RunConfig, a: &ApproxArgs) -> Result<Status, CliError> {
    let p = cfg.params();
    let target = Target::parse(&a.target, p.n)?;
    let stages = stages(&a.stages)?;
    let embedded = cfg.embedded("approx", &args(&[("target", a.target.clone()), ("stages", a.stages.clone())]));
    let mut out = Output::new(&cfg.run.output, embedded)?;
    let op = target.build(&p, cfg.run.seed)?;
    let mut acfg = ApproxConfig::for_params(&p);
    acfg.convolution = cfg.convolution();
    acfg.slack = cfg.tolerance("approx_slack");
    let report = toeplitz_approximation(&op, &target.label, &stages, &acfg)?;
    out.csv("approx.csv", |buf| report.write_csv(buf))?;
    let monotone = report.is_non_increasing();
    let dominated = report.all_dominated();
    out.json(
        "approx.json",
        json!({
            "report": report,
            "checks": { "non_increasing": monotone, "dominated": dominated },
        }),
    )?;
    for s in &report.stages {
        println!(
            "N={:<3} op_error {:.4e}  baseline {:.4e}  bound {:.4e}  l1_residual {:.3e}  nodes {}",
            s.stage,
            s.op_error,
            s.baseline_error,
            s.bound,
            s.fit.l1_residual,
            s.fit.node_count()
        );
    }
    report_written(&out);
    let mut failures = Vec::new();
    if !monotone {
        failures.push("errors not non-increasing within approx_slack");
    }
    if !dominated {
        failures.push("domination bound violated");
    }
    Ok(if failures.is_empty() {
        Status::Passed
    } else {
        Status::ToleranceFailure(failures.join("; "))
    })
}

fn default_direction(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = Complex64::new(0.0, 1.0);
    v
}

pub fn sweep(cfg: &RunConfig, a: &SweepArgs) -> Result<Status, CliError> {
    let p = cfg.params();
    let values = a.values.as_deref().map(parse_list).transpose()?;
    if values.as_ref().is_some_and(|v| v.is_empty()) {
        return Err(CliError::Usage("values must not be empty".into()));
    }
    let kind = match a.kind {
        SweepKind::Quantization => "quantization",
        SweepKind::ApproxIdentity => "approx-identity",
        SweepKind::Compactness => "compactness",
        SweepKind::Invariance => "invariance",
    };
    let mut recorded = vec![("kind", kind.to_string())];
    let mut checks = serde_json::Map::new();
    let mut extra = serde_json::Map::new();
    let mut failure = None;

    let report: SweepReport = match a.kind {
        SweepKind::Quantization => {
            let f_text = a.symbol.clone().unwrap_or_else(|| "gaussian-bump".into());
            let g_text = a.symbol_g.clone().unwrap_or_else(|| f_text.clone());
            let f = parse_symbol(&f_text, p.n)?;
            let g = parse_symbol(&g_text, p.n)?;
            let ts = values.unwrap_or_else(|| vec![p.t, p.t / 2.0, p.t / 4.0, p.t / 8.0]);
            recorded.extend([("symbol", f_text), ("symbol_g", g_text), ("values", join(&ts))]);
            let report = quantization_sweep(&f, &g, &ts, &QuantizationConfig::new(p))?;
            let slack = cfg.tolerance("quantization_slack");
            let ok = report.is_decreasing_within(slack);
            checks.insert("decreasing".into(), ok.into());
            if !ok {
                failure = Some(format!("quantization columns not decreasing within {slack}"));
            }
            report
        }
        SweepKind::ApproxIdentity => {
            let text = a.target.clone().unwrap_or_else(|| "toeplitz:gaussian-bump".into());
            let target = Target::parse(&text, p.n)?;
            let ss = values.unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125]);
            recorded.extend([("target", text), ("values", join(&ss))]);
            let op = target.build(&p, cfg.run.seed)?;
            let report = approximate_identity_report(&op, &target.label, &ss, &cfg.convolution())?;
            let slack = cfg.tolerance("decrease_slack");
            let ok = report.is_decreasing_within(slack);
            checks.insert("decreasing".into(), ok.into());
            if !ok {
                failure = Some(format!("approximate identity errors not decreasing within {slack}"));
            }
            report
        }
        SweepKind::Compactness => {
            let text = a.target.clone().unwrap_or_else(|| "identity".into());
            let target = Target::parse(&text, p.n)?;
            let r = p.trusted_radius();
            let radii = values.unwrap_or_else(|| (0..=8).map(|k| 2.0 * r * k as f64 / 8.0).collect());
            recorded.extend([("target", text), ("values", join(&radii)), ("angles", a.angles.to_string())]);
            let op = target.build(&p, cfg.run.seed)?;
            let profile = compactness_diagnostic(&op, &radii, a.angles)?;
            extra.insert("singular_values".into(), json!(profile.singular_values));
            let report = profile.to_report(&target.label);
            let embedded = cfg.embedded("sweep", &args(&recorded));
            let mut out = Output::new(&cfg.run.output, embedded)?;
            out.csv("sweep-compactness-singular-values.csv", |buf| {
                write_singular_values_csv(&profile.singular_values, buf)
            })?;
            return finish(cfg, out, kind, report, checks, extra, failure);
        }
        SweepKind::Invariance => {
            let text = a.symbol.clone().unwrap_or_else(|| "horizontal(width=2)".into());
            let f = parse_symbol(&text, p.n)?;
            let direction = match &a.direction {
                Some(d) => parse_point(d, p.n)?,
                None => default_direction(p.n),
            };
            let lambdas = values.unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
            recorded.extend([
                ("symbol", text),
                ("direction", a.direction.clone().unwrap_or_else(|| "i".into())),
                ("values", join(&lambdas)),
            ]);
            let inv = invariance_check(&p, &f, &[direction], &lambdas)?;
            let invariant = inv.max_residual <= cfg.tolerance("invariance");
            checks.insert("invariant".into(), invariant.into());
            extra.insert("max_residual".into(), json!(inv.max_residual));
            extra.insert(
                "flags".into(),
                json!(if invariant { vec![] } else { vec!["negative_control"] }),
            );
            inv.to_report()
        }
    };
    let embedded = cfg.embedded("sweep", &args(&recorded));
    let out = Output::new(&cfg.run.output, embedded)?;
    finish(cfg, out, kind, report, checks, extra, failure)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn finish(
    cfg: &RunConfig,
    mut out: Output,
    kind: &str,
    mut report: SweepReport,
    checks: serde_json::Map<String, serde_json::Value>,
    extra: serde_json::Map<String, serde_json::Value>,
    failure: Option<String>,
) -> Result<Status, CliError> {
    report.seed = Some(cfg.run.seed);
    report.tolerances = cfg.tolerances.clone();
    out.csv(&format!("sweep-{kind}.csv"), |buf| report.write_csv(buf))?;
    let mut sidecar: serde_json::Value =
        serde_json::from_str(&report.sidecar(out.config())?).map_err(|e| CliError::Failed(e.to_string()))?;
    sidecar["checks"] = checks.into();
    for (k, v) in extra {
        sidecar[k] = v;
    }
    out.json(&format!("sweep-{kind}.json"), sidecar)?;
    println!("{},{}", report.parameter, report.columns.join(","));
    for r in &report.records {
        let cols: Vec<String> = r.values.iter().map(|v| format!("{v:.4e}")).collect();
        println!("{},{}{}", r.parameter, cols.join(","), if r.flagged { " (flagged)" } else { "" });
    }
    report_written(&out);
    Ok(match failure {
        None => Status::Passed,
        Some(msg) => Status::ToleranceFailure(msg),
    })
}

pub fn export_operator(cfg: &RunConfig, a: &ExportOperatorArgs) -> Result<Status, CliError> {
    let p = cfg.params();
    let target = Target::parse(&a.target, p.n)?;
    let embedded = cfg.embedded("export-operator", &args(&[("target", a.target.clone())]));
    let mut out = Output::new(&cfg.run.output, embedded)?;
    let op = target.build(&p, cfg.run.seed)?;
    let mut bytes = Vec::new();
    write_operator_with_metadata(&op, Some(out.config()), &mut bytes)?;
    bytes.push(b'\n');
    out.raw(&a.file, &bytes)?;
    report_written(&out);
    Ok(Status::Passed)
}

pub fn export_berezin(cfg: &RunConfig, a: &ExportBerezinArgs) -> Result<Status, CliError> {
    let p = cfg.params();
    let target = Target::parse(&a.target, p.n)?;
    let extent = a.extent.unwrap_or_else(|| p.trusted_radius());
    if !(extent > 0.0 && extent.is_finite()) || a.points < 2 {
        return Err(CliError::Usage("extent must be positive and points at least 2".into()));
    }
    let embedded = cfg.embedded(
        "export-berezin",
        &args(&[
            ("target", a.target.clone()),
            ("extent", extent.to_string()),
            ("points", a.points.to_string()),
        ]),
    );
    let mut out = Output::new(&cfg.run.output, embedded)?;
    let op = target.build(&p, cfg.run.seed)?;
    let b = berezin(&op);
    let grid = b.grid(extent, a.points)?;
    out.csv("berezin.csv", |buf| grid.write_csv(buf))?;
    out.json(
        "berezin.json",
        json!({
            "target": target.label,
            "extent": extent,
            "points_per_axis": a.points,
            "samples": grid.len(),
            "flagged": grid.flagged.iter().filter(|f| **f).count(),
            "max_abs": grid.max_abs(),
        }),
    )?;
    report_written(&out);
    Ok(Status::Passed)
}
