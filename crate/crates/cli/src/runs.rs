//! Subcommand implementations.

use crate::pac_config::PacConfig;
use crate::report::{rows_to_csv, rows_to_json, Row};
use crate::{Failure, Format};
use chainbound::dist::ChannelFile;
use chainbound::engine::{evaluate_preset, fmt17, preset_by_name, PresetInput, Scope};
use chainbound::mc::McConfig;
use chainbound::nets::RefiningNetSequence;
use chainbound::pac::{alpha_heuristic_bound, chained_pac_bound, PacReport};
use chainbound::toy::{
    toy1_analytic, toy1_engine, toy1_mc_unchained, toy2_gap_analytic, toy2_gap_quadrature,
    toy2_mc_unchained, toy2_w1_brackets, Toy1Config,
};
use std::path::Path;

/// Parse "dyadic:DIM:KMAX", "nested-dyadic:DIM:KMAX", "circle:KMAX" or
/// "nested-circle:KMAX".
pub fn parse_net(spec: &str) -> chainbound::Result<RefiningNetSequence> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usize_at = |i: usize| -> chainbound::Result<usize> {
        parts
            .get(i)
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| chainbound::Error::BadConfig(format!("bad net spec: {spec}")))
    };
    match parts.first().copied() {
        Some("dyadic") if parts.len() == 3 => {
            RefiningNetSequence::dyadic_box(usize_at(1)?, usize_at(2)?)
        }
        Some("nested-dyadic") if parts.len() == 3 => {
            RefiningNetSequence::nested_dyadic_box(usize_at(1)?, usize_at(2)?)
        }
        Some("circle") if parts.len() == 2 => RefiningNetSequence::circle(usize_at(1)?),
        Some("nested-circle") if parts.len() == 2 => {
            RefiningNetSequence::nested_circle(usize_at(1)?)
        }
        _ => Err(chainbound::Error::BadConfig(format!(
            "bad net spec {spec:?}; expected dyadic:DIM:KMAX, nested-dyadic:DIM:KMAX, \
             circle:KMAX or nested-circle:KMAX"
        ))),
    }
}

fn parse_k_star_spec(spec: &str) -> Result<Vec<u32>, Failure> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u32 = a.parse().map_err(|_| Failure::parse(format!("bad k-star range {spec}")))?;
        let hi: u32 = b.parse().map_err(|_| Failure::parse(format!("bad k-star range {spec}")))?;
        if lo == 0 || hi < lo {
            return Err(Failure::parse(format!("bad k-star range {spec}")));
        }
        Ok((lo..=hi).collect())
    } else {
        let k: u32 = spec.parse().map_err(|_| Failure::parse(format!("bad k-star {spec}")))?;
        if k == 0 {
            return Err(Failure::parse("k-star must be >= 1"));
        }
        Ok(vec![k])
    }
}

pub fn run_toy1(
    k_star_spec: &str,
    resolution: Option<u32>,
    mc_samples: u64,
    seed: u64,
    format: Format,
) -> Result<String, Failure> {
    let k_stars = parse_k_star_spec(k_star_spec)?;
    let mut rows = Vec::new();
    for &k_star in &k_stars {
        let res = resolution.unwrap_or(k_star + 10);
        let cfg = Toy1Config::new(k_star, res).map_err(Failure::from_lib)?;
        let analytic = toy1_analytic(&cfg);
        let engine = toy1_engine(&cfg).map_err(Failure::from_lib)?;
        let mc = toy1_mc_unchained(&cfg, &McConfig::new(mc_samples, seed))
            .map_err(Failure::from_lib)?;
        let engine_grad = engine.b_grad.certified_total();
        rows.extend([
            Row::new(k_star, "gap", "analytic", analytic.gap),
            Row::new(k_star, "gap", "engine", engine.gap),
            Row::new(k_star, "b_l", "analytic", analytic.b_l),
            Row::new(k_star, "b_l", "engine", engine.b_l),
            Row::new(k_star, "b_ltilde", "analytic", analytic.b_ltilde),
            Row::new(k_star, "b_ltilde", "engine", engine.b_ltilde),
            Row::new(k_star, "b_ltilde", "mc", mc.mean).with_stderr(mc.stderr),
            Row::new(k_star, "b_grad", "analytic", analytic.b_grad),
            Row::new(k_star, "b_grad_series", "analytic", analytic.b_grad_series),
            Row::new(k_star, "b_grad", "engine", engine_grad),
            Row::new(k_star, "b_cmi", "analytic", analytic.b_cmi),
            Row::new(k_star, "ratio_grad_over_ltilde", "analytic", analytic.b_grad / analytic.b_ltilde),
            Row::new(k_star, "ratio_grad_over_ltilde", "engine", engine_grad / engine.b_ltilde),
        ]);
    }
    let config = serde_json::json!({
        "subcommand": "toy1",
        "k_star": k_star_spec,
        "resolution": resolution,
        "mc_samples": mc_samples,
        "seed": seed,
    });
    Ok(render(format, &config, &rows))
}

pub fn run_toy2(a_values: &[f64], samples: u64, seed: u64, format: Format) -> Result<String, Failure> {
    let mut rows = Vec::new();
    for &a in a_values {
        let gap = toy2_gap_analytic(a).map_err(Failure::from_lib)?;
        let quad = toy2_gap_quadrature(a);
        let (lo, hi) = toy2_w1_brackets(a).map_err(Failure::from_lib)?;
        let est = toy2_mc_unchained(a, &McConfig::new(samples, seed)).map_err(Failure::from_lib)?;
        rows.extend([
            Row::new(a, "gap_closed_form", "analytic", gap),
            Row::new(a, "gap_quadrature", "analytic", quad),
            Row::new(a, "w1_lower", "analytic", lo),
            Row::new(a, "w1_upper", "analytic", hi),
            Row::new(a, "b_l", "mc", est.mean).with_stderr(est.stderr),
        ]);
    }
    let config = serde_json::json!({
        "subcommand": "toy2",
        "a": a_values,
        "samples": samples,
        "seed": seed,
    });
    Ok(render(format, &config, &rows))
}

fn render(format: Format, config: &serde_json::Value, rows: &[Row]) -> String {
    match format {
        Format::Csv => rows_to_csv(config, rows),
        Format::Json => rows_to_json(config, rows),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_bounds(
    channel_path: &Path,
    preset_name: &str,
    xi: f64,
    m: u32,
    net_spec: Option<&str>,
    k_trunc: Option<usize>,
    power_p: Option<f64>,
    tail_cap: Option<f64>,
    format: Format,
) -> Result<String, Failure> {
    let text = std::fs::read_to_string(channel_path).map_err(Failure::io)?;
    let file: ChannelFile = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("channel JSON: {e}")))?;
    let channel = file.into_channel().map_err(Failure::from_lib)?;
    let mut preset = preset_by_name(preset_name).map_err(Failure::from_lib)?;
    if let Some(p) = power_p {
        preset = preset.with_power_exponent(p).map_err(Failure::from_lib)?;
    }
    let net = net_spec.map(parse_net).transpose().map_err(Failure::from_lib)?;
    let channels;
    let input = match preset.scope {
        Scope::Full => PresetInput::Full(&channel),
        Scope::PerSample => {
            channels = vec![channel.clone()];
            PresetInput::PerSample(&channels)
        }
        Scope::SuperSample | Scope::PerSampleSuperSample => {
            return Err(Failure::parse(format!(
                "preset {preset_name} needs a super-sample channel, which has no file schema; \
                 use the library API"
            )));
        }
    };
    let report = evaluate_preset(&preset, input, xi, m, net.as_ref(), k_trunc, tail_cap)
        .map_err(Failure::from_lib)?;
    let config = serde_json::json!({
        "subcommand": "bounds",
        "channel": channel_path.display().to_string(),
        "preset": preset_name,
        "xi": xi,
        "m": m,
        "net": net_spec,
        "k_trunc": k_trunc,
        "power_p": power_p,
        "tail_cap": tail_cap,
        "preset_flagged": preset.flagged,
        "preset_note": preset.note,
    });
    Ok(match format {
        Format::Json => {
            let doc = serde_json::json!({
                "config": config,
                "report": serde_json::from_str::<serde_json::Value>(&report.to_json())
                    .expect("report is valid JSON"),
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => format!("# config: {config}\n{}", report.to_csv()),
    })
}

pub fn run_pac(config_path: &Path, format: Format) -> Result<String, Failure> {
    let text = std::fs::read_to_string(config_path).map_err(Failure::io)?;
    let parsed: PacConfig =
        serde_json::from_str(&text).map_err(|e| Failure::parse(format!("pac config: {e}")))?;
    let resolved = parsed.resolve().map_err(Failure::from_lib)?;
    let report: PacReport = match (&resolved.schedule, resolved.alpha) {
        (Some(schedule), None) => {
            chained_pac_bound(resolved.xi, resolved.m, &resolved.net, schedule, &resolved.posterior)
                .map_err(Failure::from_lib)?
        }
        (None, Some(alpha)) => alpha_heuristic_bound(
            resolved.xi,
            resolved.m,
            &resolved.net,
            alpha,
            &resolved.deltas,
            &resolved.posterior,
        )
        .map_err(Failure::from_lib)?,
        _ => unreachable!("resolve() enforces exactly one schedule source"),
    };
    Ok(match format {
        Format::Json => {
            let doc = serde_json::json!({ "config": resolved.config, "report": report });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = format!("# config: {}\n", resolved.config);
            out.push_str("row,k,eps_prev,kl,lambda,delta,term\n");
            for l in &report.per_level {
                out.push_str(&format!(
                    "level,{},{},{},{},{},{}\n",
                    l.k,
                    fmt17(l.eps_prev),
                    fmt17(l.kl),
                    fmt17(l.lambda),
                    fmt17(l.delta),
                    fmt17(l.term)
                ));
            }
            out.push_str(&format!(
                "total,,,,,,{}\nprefix,,,,,,{}\n",
                fmt17(report.value),
                fmt17(report.prefix_term)
            ));
            out
        }
    })
}

pub fn run_check(suite: &str, seed: u64) -> Result<(String, bool), Failure> {
    let reports = chainbound::checks::run_suite(suite, seed).map_err(Failure::from_lib)?;
    let mut out = String::new();
    let mut all_passed = true;
    for r in &reports {
        all_passed &= r.passed();
        out.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "suite": r.suite,
                "cases": r.cases,
                "failures": r.failures.len(),
                "pass": r.passed(),
                "seed": seed,
            })
        ));
        for f in r.failures.iter().take(5) {
            out.push_str(&format!("# counterexample[{}]: {f}\n", r.suite));
        }
    }
    Ok((out, all_passed))
}
