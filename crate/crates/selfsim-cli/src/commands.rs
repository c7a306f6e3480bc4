//! One function per subcommand, each producing a `Report` plus optional CSV
//! rows. Everything certified flows through `BallValue`, never bare floats.

use std::fs;

use rayon::prelude::*;
use serde_json::{json, Value};

use selfsim::algebra::{mahler_measure, mtilde_of_poly, Verdict};
use selfsim::ball::{PrecisionContext, RealBall};
use selfsim::dyadic::Dyadic;
use selfsim::entropy::{
    default_t_grid, dimension_bracket, garsia_entropy_bracket, lb_phi_check,
    level_entropy_at_scale, phi_nu, AtomicDistribution, ExactEntropy, GarsiaRow, SmoothMethod,
};
use selfsim::ifs::atoms::detect_exact_overlaps;
use selfsim::ifs::mitm::{delta_n, delta_n_exhaustive, exp_separation_probe, near_overlap_search, MitmParams};
use selfsim::ifs::{parse_rational_str, IFSSpec};
use selfsim::intpoly::IntPoly;
use selfsim::report::{ball_json, BallValue, Report};
use selfsim::{Error, Result};

use crate::{Cli, Command, Method, SweepQuantity};

pub struct Csv {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub command: String,
    pub config_echo: Value,
    pub report: Report,
    pub csv: Option<Csv>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let ctx = cli.context();
    match &cli.command {
        Command::Mahler { poly } => mahler_cmd(cli, &ctx, poly.as_deref()),
        Command::Height { poly } => height_cmd(cli, &ctx, poly.as_deref()),
        Command::Overlap { n_max } => overlap_cmd(cli, &ctx, *n_max),
        Command::Deltan { n, exhaustive } => deltan_cmd(cli, &ctx, *n, *exhaustive),
        Command::SepProbe { c, n_max } => sep_probe_cmd(cli, &ctx, c, *n_max),
        Command::NearOverlap { n, radius } => near_overlap_cmd(cli, &ctx, *n, radius),
        Command::Garsia { levels, n_max } => garsia_cmd(cli, &ctx, levels.as_deref(), *n_max),
        Command::ScaleEntropy { n, scale } => scale_entropy_cmd(cli, &ctx, *n, scale),
        Command::Phi {
            a,
            a_list,
            method,
            samples,
        } => phi_cmd(cli, &ctx, *a, a_list.as_deref(), *method, *samples),
        Command::Dim { n_max } => dim_cmd(cli, &ctx, *n_max),
        Command::LbphiCheck {
            n_max,
            a,
            method,
            samples,
        } => lbphi_cmd(cli, &ctx, *n_max, *a, *method, *samples),
        Command::Sweep {
            lambda_grid,
            quantity,
            n,
        } => sweep_cmd(cli, &ctx, lambda_grid, *quantity, *n),
    }
}

fn command_name(cli: &Cli) -> String {
    match &cli.command {
        Command::Mahler { .. } => "mahler",
        Command::Height { .. } => "height",
        Command::Overlap { .. } => "overlap",
        Command::Deltan { .. } => "deltan",
        Command::SepProbe { .. } => "sep-probe",
        Command::NearOverlap { .. } => "near-overlap",
        Command::Garsia { .. } => "garsia",
        Command::ScaleEntropy { .. } => "scale-entropy",
        Command::Phi { .. } => "phi",
        Command::Dim { .. } => "dim",
        Command::LbphiCheck { .. } => "lbphi-check",
        Command::Sweep { .. } => "sweep",
    }
    .to_string()
}

fn load_config(cli: &Cli, ctx: &PrecisionContext) -> Result<(IFSSpec, Value)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("this command needs --config".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {}", path.display(), e)))?;
    let echo: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{} is not JSON: {}", path.display(), e)))?;
    let ifs = IFSSpec::from_value(&echo, ctx)?;
    Ok((ifs, echo))
}

fn mitm_params(cli: &Cli) -> MitmParams {
    match cli.memory_cap {
        // rough 128-byte estimate per half-table entry
        Some(bytes) => MitmParams {
            memory_cap: (bytes / 128).max(1024),
        },
        None => MitmParams::default(),
    }
}

fn smooth_method(method: Method, samples: u64, seed: u64) -> (SmoothMethod, String) {
    match method {
        Method::Quadrature => (SmoothMethod::Quadrature, "quadrature".into()),
        Method::Montecarlo => (
            SmoothMethod::MonteCarlo { samples, seed },
            format!("monte-carlo(samples={}, seed={})", samples, seed),
        ),
    }
}

fn parse_int_poly(s: &str) -> Result<IntPoly> {
    let mut coeffs = Vec::new();
    for part in s.split(',') {
        let q = parse_rational_str(part.trim())?;
        if !q.is_integer() {
            return Err(Error::InvalidInput(format!(
                "polynomial coefficients must be integers, got {}",
                part.trim()
            )));
        }
        coeffs.push(q.to_integer());
    }
    Ok(IntPoly::new(coeffs))
}

/// The polynomial argument, or the contraction's minimal polynomial.
fn poly_arg(cli: &Cli, ctx: &PrecisionContext, arg: Option<&str>) -> Result<(IntPoly, Value)> {
    match arg {
        Some(s) => {
            let f = parse_int_poly(s)?;
            Ok((f, Value::Null))
        }
        None => {
            let (ifs, echo) = load_config(cli, ctx)?;
            let alg = ifs.lam().as_algebraic().ok_or_else(|| {
                Error::InvalidInput(
                    "the configured contraction is numeric; pass --poly instead".into(),
                )
            })?;
            Ok((alg.minpoly().clone(), echo))
        }
    }
}

fn one_based(word: &[u32]) -> Vec<u32> {
    word.iter().map(|d| d + 1).collect()
}

fn exact_terms_json(e: &ExactEntropy) -> Value {
    Value::Array(
        e.terms()
            .iter()
            .map(|(b, c)| json!([b.to_string(), c.to_string()]))
            .collect(),
    )
}

fn garsia_rows_json(rows: &[GarsiaRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "atoms": r.atoms,
                    "entropy": ball_json(&r.value),
                    "ratio": ball_json(&r.ratio),
                    "entropy_terms": exact_terms_json(&r.entropy),
                })
            })
            .collect(),
    )
}

fn garsia_rows_csv(rows: &[GarsiaRow]) -> Csv {
    let headers = ["n", "atoms", "entropy", "entropy_radius", "ratio", "ratio_radius"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body = rows
        .iter()
        .map(|r| {
            let h = BallValue::from_ball(&r.value);
            let q = BallValue::from_ball(&r.ratio);
            vec![
                r.n.to_string(),
                r.atoms.to_string(),
                h.center.to_string(),
                h.radius.to_string(),
                q.center.to_string(),
                q.radius.to_string(),
            ]
        })
        .collect();
    Csv {
        headers,
        rows: body,
    }
}

fn mahler_cmd(cli: &Cli, ctx: &PrecisionContext, poly: Option<&str>) -> Result<Outcome> {
    let (f, echo) = poly_arg(cli, ctx, poly)?;
    let m = mahler_measure(&f, cli.precision, ctx)?;
    let mt = mtilde_of_poly(&f, cli.precision, ctx)?;
    let report = Report::new("mahler_measure", ball_json(&m), "certified", cli.precision)
        .with_provenance(&["algebra.mahler_measure", "algebra.mtilde_of_poly"])
        .with_details(json!({
            "poly": f.to_coeff_strings(),
            "mtilde": ball_json(&mt.mtilde),
            "abs_leading_coefficient": mt.abs_constant.to_string(),
            "identity_consistent": mt.identity_consistent,
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn height_cmd(cli: &Cli, ctx: &PrecisionContext, poly: Option<&str>) -> Result<Outcome> {
    let (f, echo) = poly_arg(cli, ctx, poly)?;
    let deg = f
        .degree()
        .filter(|d| *d > 0)
        .ok_or_else(|| Error::InvalidInput("height needs a positive-degree polynomial".into()))?;
    let m = mahler_measure(&f, cli.precision, ctx)?;
    // absolute logarithmic height log M(f) / deg f, the same for every root
    let d_ball = RealBall::exact(Dyadic::from_f64(deg as f64).expect("small integer"));
    let h = m.ln(cli.precision).div(&d_ball, cli.precision);
    let report = Report::new("height", ball_json(&h), "certified", cli.precision)
        .with_provenance(&["algebra.mahler_measure"])
        .with_details(json!({
            "poly": f.to_coeff_strings(),
            "degree": deg,
            "mahler": ball_json(&m),
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn overlap_cmd(cli: &Cli, ctx: &PrecisionContext, n_max: usize) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let hit = detect_exact_overlaps(&ifs, n_max)?;
    let (value, details) = match &hit {
        Some(w) => {
            let (w1, w2) = w.one_based();
            (
                json!(w.n),
                json!({"found": true, "n": w.n, "word1": w1, "word2": w2, "n_max": n_max}),
            )
        }
        None => (Value::Null, json!({"found": false, "n_max": n_max})),
    };
    let report = Report::new("first_overlap_level", value, "certified", cli.precision)
        .with_provenance(&["ifs.detect_exact_overlaps"])
        .with_details(details);
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn deltan_cmd(cli: &Cli, ctx: &PrecisionContext, n: usize, exhaustive: bool) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let params = mitm_params(cli);
    let (rep, method, prov) = if exhaustive {
        (
            delta_n_exhaustive(&ifs, n)?,
            "exhaustive",
            "ifs.delta_n_exhaustive",
        )
    } else {
        (delta_n(&ifs, n, &params)?, "meet-in-the-middle", "ifs.delta_n")
    };
    let report = Report::new("delta_n", ball_json(&rep.delta), method, cli.precision)
        .with_provenance(&[prov])
        .with_details(json!({
            "n": rep.n,
            "delta_exact": rep.delta_exact.as_ref().map(|d| d.to_string()),
            "witness": rep.witness.as_ref().map(|(a, b)| json!([one_based(a), one_based(b)])),
            "overlap_word_pairs": u64::try_from(rep.overlap_word_pairs).unwrap_or(u64::MAX),
            "overlap_example": rep
                .overlap_example
                .as_ref()
                .map(|(a, b)| json!([one_based(a), one_based(b)])),
            "certified": rep.certified,
            "unresolved_pairs": rep.unresolved_pairs,
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn verdict_str(v: &Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Unknown => "unknown",
    }
}

fn sep_probe_cmd(cli: &Cli, ctx: &PrecisionContext, c: &str, n_max: usize) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let c = parse_rational_str(c)?;
    let rep = exp_separation_probe(&ifs, &c, n_max, &mitm_params(cli))?;
    let rows_json: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "delta": ball_json(&r.delta),
                "threshold": r.threshold.to_string(),
                "verdict": verdict_str(&r.verdict),
            })
        })
        .collect();
    let csv = Csv {
        headers: ["n", "delta", "delta_radius", "threshold", "verdict"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: rep
            .rows
            .iter()
            .map(|r| {
                let b = BallValue::from_ball(&r.delta);
                vec![
                    r.n.to_string(),
                    b.center.to_string(),
                    b.radius.to_string(),
                    r.threshold.to_string(),
                    verdict_str(&r.verdict).to_string(),
                ]
            })
            .collect(),
    };
    let report = Report::new(
        "exponential_separation_levels",
        json!(rep.holding.len()),
        "meet-in-the-middle",
        cli.precision,
    )
    .with_provenance(&["ifs.exp_separation_probe", "ifs.delta_n"])
    .with_details(json!({"c": rep.c.to_string(), "holding": rep.holding, "rows": rows_json}));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: Some(csv),
    })
}

fn near_overlap_cmd(cli: &Cli, ctx: &PrecisionContext, n: usize, radius: &str) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let r = parse_rational_str(radius)?;
    let rep = near_overlap_search(&ifs, n, &r, &mitm_params(cli))?;
    let dset = ifs.difference_set()?;
    let hits: Vec<Value> = rep
        .hits
        .iter()
        .map(|h| {
            json!({
                "coefficients": h.poly.coeff_strings(&dset),
                "value": ball_json(&h.value),
                "certified_zero": h.certified_zero,
                "ambiguous": h.ambiguous,
            })
        })
        .collect();
    let value = rep
        .hits
        .first()
        .map(|h| ball_json(&h.value))
        .unwrap_or(Value::Null);
    let report = Report::new("smallest_poly_value", value, "meet-in-the-middle", cli.precision)
        .with_provenance(&["ifs.near_overlap_search"])
        .with_details(json!({
            "n": rep.n,
            "radius": rep.radius.to_string(),
            "hit_count": rep.hits.len(),
            "hits": hits,
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn parse_levels(levels: Option<&str>, n_max: usize) -> Result<Vec<usize>> {
    match levels {
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad level {:?}", p.trim())))
            })
            .collect(),
        None => {
            if n_max == 0 {
                return Err(Error::InvalidInput("n-max must be positive".into()));
            }
            Ok((1..=n_max).collect())
        }
    }
}

fn garsia_cmd(
    cli: &Cli,
    ctx: &PrecisionContext,
    levels: Option<&str>,
    n_max: usize,
) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let list = parse_levels(levels, n_max)?;
    let bracket = garsia_entropy_bracket(&ifs, &list)?;
    let report = Report::new(
        "entropy_upper_bracket",
        ball_json(&bracket.upper),
        "certified",
        cli.precision,
    )
    .with_provenance(&["entropy.garsia_entropy_bracket", "ifs.level_n_atoms"])
    .with_details(json!({
        "argmin_n": bracket.argmin_n,
        "bracket_terms": exact_terms_json(&bracket.upper_exact),
        "rows": garsia_rows_json(&bracket.rows),
    }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: Some(garsia_rows_csv(&bracket.rows)),
    })
}

fn scale_entropy_cmd(cli: &Cli, ctx: &PrecisionContext, n: usize, scale: &str) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let r = parse_rational_str(scale)?;
    let s = level_entropy_at_scale(&ifs, n, &r)?;
    let report = Report::new("entropy_at_scale", ball_json(&s.value), "breakpoint-sweep", cli.precision)
        .with_provenance(&["entropy.level_entropy_at_scale", "ifs.level_n_atoms"])
        .with_details(json!({
            "n": n,
            "scale": r.to_string(),
            "segments": s.segments,
            "exact": s.exact.is_some(),
            "exact_terms": s.exact.as_ref().map(exact_terms_json),
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number {:?}", p.trim())))
        })
        .collect()
}

fn phi_cmd(
    cli: &Cli,
    ctx: &PrecisionContext,
    a: Option<f64>,
    a_list: Option<&str>,
    method: Method,
    samples: u64,
) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let dilations = match (a, a_list) {
        (Some(a), None) => vec![a],
        (None, Some(list)) => parse_f64_list(list)?,
        (None, None) => return Err(Error::InvalidInput("pass --a or --a-list".into())),
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("--a and --a-list are mutually exclusive".into()))
        }
    };
    let nu = AtomicDistribution::translation_measure(&ifs)?;
    let (m, method_name) = smooth_method(method, samples, cli.seed);

    let mut rows_json = Vec::with_capacity(dilations.len());
    let mut csv_rows = Vec::with_capacity(dilations.len());
    let mut single = None;
    for &a in &dilations {
        let rep = phi_nu(&nu, a, &default_t_grid(a), &m)?;
        rows_json.push(json!({
            "a": rep.a,
            "estimate": rep.estimate,
            "error": rep.error,
            "best_t": rep.best_t,
        }));
        csv_rows.push(vec![
            rep.a.to_string(),
            rep.estimate.to_string(),
            rep.error.to_string(),
            rep.best_t.to_string(),
        ]);
        single = Some(rep);
    }
    let (value, error) = if dilations.len() == 1 {
        let rep = single.expect("one dilation");
        (json!(rep.estimate), Some(rep.error))
    } else {
        (Value::Null, None)
    };
    let mut report = Report::new("phi_lower_estimate", value, method_name, cli.precision)
        .with_provenance(&["entropy.phi_nu", "entropy.smoothed_entropy"])
        .with_details(json!({"rows": rows_json, "atoms": nu.len()}));
    if let Some(e) = error {
        report = report.with_error(e);
    }
    let csv = Csv {
        headers: ["a", "phi_estimate", "error", "best_t"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: csv_rows,
    };
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: Some(csv),
    })
}

fn dim_cmd(cli: &Cli, ctx: &PrecisionContext, n_max: usize) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let rep = dimension_bracket(&ifs, n_max)?;
    let overlap = rep.overlap.as_ref().map(|w| {
        let (w1, w2) = w.one_based();
        json!({"n": w.n, "word1": w1, "word2": w2})
    });
    let report = Report::new("dimension_upper_bound", ball_json(&rep.upper_dim), "certified", cli.precision)
        .with_provenance(&[
            "entropy.dimension_bracket",
            "entropy.garsia_entropy_bracket",
            "ifs.detect_exact_overlaps",
        ])
        .with_details(json!({
            "n_max": rep.n_max,
            "chi": ball_json(&rep.chi),
            "entropy_bracket": ball_json(&rep.bracket),
            "argmin_n": rep.argmin_n,
            "natural_upper": ball_json(&rep.natural_upper),
            "overlap": overlap,
            "rows": garsia_rows_json(&rep.rows),
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: Some(garsia_rows_csv(&rep.rows)),
    })
}

fn lbphi_cmd(
    cli: &Cli,
    ctx: &PrecisionContext,
    n_max: usize,
    a: Option<f64>,
    method: Method,
    samples: u64,
) -> Result<Outcome> {
    let (ifs, echo) = load_config(cli, ctx)?;
    let eta = ifs.lam().as_algebraic().ok_or_else(|| {
        Error::InvalidInput("the consistency check needs an exact algebraic contraction".into())
    })?;
    let nu = AtomicDistribution::translation_measure(&ifs)?;
    let (m, method_name) = smooth_method(method, samples, cli.seed);
    let rep = lb_phi_check(eta, &nu, n_max, a, &m, ctx)?;
    let report = Report::new("lower_bound_slack", json!(rep.slack), method_name, cli.precision)
        .with_provenance(&[
            "entropy.lb_phi_check",
            "entropy.garsia_entropy_bracket",
            "entropy.phi_nu",
            "algebra.mtilde",
        ])
        .with_details(json!({
            "a": rep.a,
            "upper_bracket": ball_json(&rep.upper),
            "argmin_n": rep.argmin_n,
            "phi_estimate": rep.phi.estimate,
            "phi_error": rep.phi.error,
            "phi_best_t": rep.phi.best_t,
            "consistent": rep.consistent,
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: None,
    })
}

fn parse_grid(s: &str) -> Result<Vec<String>> {
    // "start:end:step" (inclusive) or "v1,v2,..."
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(
                "grid ranges take the form start:end:step".into(),
            ));
        }
        let start = parse_rational_str(parts[0].trim())?;
        let end = parse_rational_str(parts[1].trim())?;
        let step = parse_rational_str(parts[2].trim())?;
        if step <= parse_rational_str("0")? {
            return Err(Error::InvalidInput("the grid step must be positive".into()));
        }
        let mut out = Vec::new();
        let mut v = start;
        while v <= end {
            out.push(v.to_string());
            v += step.clone();
        }
        Ok(out)
    } else if s.trim().is_empty() {
        Ok(Vec::new())
    } else {
        Ok(s.split(',').map(|p| p.trim().to_string()).collect())
    }
}

fn sweep_cmd(
    cli: &Cli,
    ctx: &PrecisionContext,
    grid: &str,
    quantity: SweepQuantity,
    n: usize,
) -> Result<Outcome> {
    let (_, echo) = load_config(cli, ctx)?;
    let lambdas = parse_grid(grid)?;
    let params = mitm_params(cli);

    struct Row {
        lambda: String,
        value: Option<BallValue>,
        extra: Value,
        error: Option<String>,
    }

    // grid values are exact rationals, so every row runs in certified mode;
    // per-row failures are recorded and the sweep continues
    let rows: Vec<Row> = lambdas
        .par_iter()
        .map(|lam| {
            let run = || -> Result<(BallValue, Value)> {
                let mut cfg = echo.clone();
                cfg["lambda"] = json!({ "decimal": lam });
                let ifs = IFSSpec::from_value(&cfg, ctx)?;
                match quantity {
                    SweepQuantity::Deltan => {
                        let rep = delta_n(&ifs, n, &params)?;
                        let overlaps = u64::try_from(rep.overlap_word_pairs).unwrap_or(u64::MAX);
                        Ok((
                            BallValue::from_ball(&rep.delta),
                            json!({"overlap_word_pairs": overlaps}),
                        ))
                    }
                    SweepQuantity::Garsia => {
                        let list: Vec<usize> = (1..=n).collect();
                        let b = garsia_entropy_bracket(&ifs, &list)?;
                        Ok((
                            BallValue::from_ball(&b.upper),
                            json!({"argmin_n": b.argmin_n}),
                        ))
                    }
                    SweepQuantity::Dim => {
                        let b = dimension_bracket(&ifs, n)?;
                        Ok((
                            BallValue::from_ball(&b.upper_dim),
                            json!({"overlap_found": b.overlap.is_some()}),
                        ))
                    }
                }
            };
            match run() {
                Ok((value, extra)) => Row {
                    lambda: lam.clone(),
                    value: Some(value),
                    extra,
                    error: None,
                },
                Err(e) => Row {
                    lambda: lam.clone(),
                    value: None,
                    extra: Value::Null,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let quantity_name = match quantity {
        SweepQuantity::Deltan => "delta_n",
        SweepQuantity::Garsia => "entropy_upper_bracket",
        SweepQuantity::Dim => "dimension_upper_bound",
    };
    let rows_json: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "lambda": r.lambda,
                "value": r.value.map(|v| json!({"center": v.center, "radius": v.radius})),
                "extra": r.extra,
                "error": r.error,
            })
        })
        .collect();
    let csv = Csv {
        headers: ["lambda", "value", "radius", "status"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: rows
            .iter()
            .map(|r| match (&r.value, &r.error) {
                (Some(v), _) => vec![
                    r.lambda.clone(),
                    v.center.to_string(),
                    v.radius.to_string(),
                    "ok".to_string(),
                ],
                (None, Some(e)) => vec![r.lambda.clone(), String::new(), String::new(), e.clone()],
                (None, None) => unreachable!("a row has a value or an error"),
            })
            .collect(),
    };
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let report = Report::new("sweep", Value::Null, "certified(per-row)", cli.precision)
        .with_provenance(&["cli.sweep"])
        .with_details(json!({
            "quantity": quantity_name,
            "n": n,
            "rows": rows_json,
            "row_count": rows.len(),
            "failed_rows": failed,
        }));
    Ok(Outcome {
        command: command_name(cli),
        config_echo: echo,
        report,
        csv: Some(csv),
    })
}
