use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kstab::arcs::{
    arc_chow, arc_flag_direct, birkhoff_factor, det_pole_order, induced_flag, invariant_exponents, random_family,
    ArcChowReport, ArcDegree, ArcFactorization, ArcFlag, LaurentMatrix,
};
use kstab::convexfn::{sublevel_body, ConvexPL};
use kstab::corpus::corpus;
use kstab::filtration::{convex_transform, Filtration};
use kstab::invariants::{
    chow_instability_test, filtration_invariants, stability_threshold, vanishing_witness, InstabilityReport,
    InvariantOptions, InvariantReport, Trend, WitnessReport,
};
use kstab::io::{ArcSpec, FiltrationSpec, FunctionSpec, PolytopeSpec};
use kstab::rational::{parse, render, QReport};
use kstab::riemann::{
    convex_sum_lower_bound, count_remainder_constant, fit_sum_constant, jensen_sweep, sweep_csv, SumBoundReport,
    SweepRow,
};
use kstab::Rational;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::output::{csv, json, Envelope, Output};
use crate::{Cli, Command, Format};

pub fn run(cli: &Cli) -> Result<Output> {
    let ks = degrees(cli)?;
    match &cli.command {
        Command::Fut => fut(cli, &ks),
        Command::Chow { reference, required } => chow(cli, &ks, reference.as_deref(), *required),
        Command::Norm => norm(cli, &ks),
        Command::Transform { levels } => transform(cli, &ks, *levels),
        Command::Witness { lambda } => witness(cli, &ks, lambda.as_deref()),
        Command::Bounds {
            trials,
            max_n,
            c,
            lower,
        } => bounds(cli, &ks, *trials, *max_n, c, lower),
        Command::Arc { size, order } => arc(cli, &ks, *size, *order),
        Command::Corpus => run_corpus(cli, &ks),
    }
}

fn degrees(cli: &Cli) -> Result<Vec<u32>> {
    if cli.kmin == 0 || cli.stride == 0 {
        bail!("--kmin and --stride must be positive");
    }
    if cli.kmin > cli.kmax {
        bail!("empty degree range {}..={}", cli.kmin, cli.kmax);
    }
    Ok((cli.kmin..=cli.kmax).step_by(cli.stride as usize).collect())
}

fn rational_arg(name: &str, s: &str) -> Result<Rational> {
    parse(s).map_err(|e| anyhow!("--{name}: {e}"))
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses JSON, reporting the field path together with line and column on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| anyhow!("{origin}: field `{}`: {}", e.path(), e.inner()))
}

fn input<T: DeserializeOwned>(cli: &Cli) -> Result<Option<T>> {
    match &cli.input {
        None => Ok(None),
        Some(p) => parse_json(&read_text(p)?, &p.display().to_string()).map(Some),
    }
}

fn required_input<T: DeserializeOwned>(cli: &Cli) -> Result<T> {
    input(cli)?.ok_or_else(|| anyhow!("this command needs --input"))
}

fn params(cli: &Cli, ks: &[u32], extra: serde_json::Value) -> serde_json::Value {
    let mut p = json!({
        "kmin": cli.kmin,
        "kmax": cli.kmax,
        "stride": cli.stride,
        "degrees": ks,
        "tolerance": cli.tolerance,
    });
    if let (Some(p), serde_json::Value::Object(e)) = (p.as_object_mut(), extra) {
        p.extend(e);
    }
    p
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fut => "fut",
        Command::Chow { .. } => "chow",
        Command::Norm => "norm",
        Command::Transform { .. } => "transform",
        Command::Witness { .. } => "witness",
        Command::Bounds { .. } => "bounds",
        Command::Arc { .. } => "arc",
        Command::Corpus => "corpus",
    }
}

fn envelope<I: Serialize, R: Serialize>(
    cli: &Cli,
    params: serde_json::Value,
    input: Option<I>,
    diagnostic: bool,
    report: R,
) -> Result<String> {
    json(&Envelope {
        command: command_name(&cli.command),
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        params,
        input,
        diagnostic,
        report,
    })
}

fn finish(cli: &Cli, json_text: String, csv_text: String, diagnostic: bool) -> Output {
    Output {
        text: match cli.format {
            Format::Json => json_text,
            Format::Csv => csv_text,
        },
        parts: Vec::new(),
        diagnostic,
        format: cli.format,
    }
}

fn q(r: &QReport) -> String {
    render(&r.exact)
}

fn load_filtration(cli: &Cli) -> Result<(FiltrationSpec, Filtration)> {
    let spec: FiltrationSpec = required_input(cli)?;
    let chi = spec.build()?;
    Ok((spec, chi))
}

fn invariants(cli: &Cli, chi: &Filtration, ks: &[u32]) -> Result<InvariantReport> {
    let mut opts = InvariantOptions::new(ks.to_vec(), chi.polytope().dim());
    opts.tolerance = cli.tolerance;
    Ok(filtration_invariants(chi, &opts)?)
}

const FUT_HEADER: [&str; 11] = [
    "k",
    "d",
    "w",
    "s",
    "fut",
    "norm2",
    "norm2_lemma",
    "chow",
    "spread",
    "norm_inf",
    "exact_series",
];

fn fut_rows(rep: &InvariantReport) -> Vec<Vec<String>> {
    rep.rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.d.to_string(),
                r.w.to_string(),
                r.s.to_string(),
                q(&r.fut),
                q(&r.norm2),
                q(&r.norm2_lemma),
                q(&r.chow),
                r.spread.to_string(),
                q(&r.norm_inf),
                r.exact_series.to_string(),
            ]
        })
        .collect()
}

fn fut(cli: &Cli, ks: &[u32]) -> Result<Output> {
    let (spec, chi) = load_filtration(cli)?;
    let rep = invariants(cli, &chi, ks)?;
    let flag = rep.non_convergent;
    let c = csv("fut", cli.seed, &FUT_HEADER, &fut_rows(&rep));
    Ok(finish(
        cli,
        envelope(cli, params(cli, ks, json!({})), Some(spec), flag, &rep)?,
        c,
        flag,
    ))
}

#[derive(Serialize)]
struct ChowRow {
    k: u32,
    chow: QReport,
    fut: QReport,
}

#[derive(Serialize)]
struct ChowReport {
    rows: Vec<ChowRow>,
    chow: Trend,
    fut: Trend,
    non_convergent: bool,
    instability: Option<InstabilityReport>,
    instability_skipped: Option<String>,
}

fn chow(cli: &Cli, ks: &[u32], reference: Option<&str>, required: usize) -> Result<Output> {
    let (spec, chi) = load_filtration(cli)?;
    let reference = reference.map(|s| rational_arg("reference", s)).transpose()?;
    let rep = invariants(cli, &chi, ks)?;
    let (instability, skipped) = match chow_instability_test(&chi, ks, reference.as_ref(), required) {
        Ok(r) => (Some(r), None),
        Err(kstab::Error::UnsupportedVariant(m)) => (None, Some(m)),
        Err(e) => return Err(e.into()),
    };
    let out = ChowReport {
        rows: rep
            .rows
            .iter()
            .map(|r| ChowRow {
                k: r.k,
                chow: r.chow.clone(),
                fut: r.fut.clone(),
            })
            .collect(),
        chow: rep.chow,
        fut: rep.fut,
        non_convergent: rep.non_convergent,
        instability,
        instability_skipped: skipped,
    };
    let flag = out.non_convergent;
    let rows: Vec<Vec<String>> = out
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), q(&r.chow), q(&r.fut)])
        .collect();
    let c = csv("chow", cli.seed, &["k", "chow", "fut"], &rows);
    let p = params(
        cli,
        ks,
        json!({ "required": required, "reference": reference.as_ref().map(render) }),
    );
    Ok(finish(cli, envelope(cli, p, Some(spec), flag, &out)?, c, flag))
}

#[derive(Serialize)]
struct NormRow {
    k: u32,
    norm2: QReport,
    norm2_lemma: QReport,
    norm_inf: QReport,
}

#[derive(Serialize)]
struct NormReport {
    rows: Vec<NormRow>,
    norm2: Trend,
    norm_inf: Trend,
    norm2_exact: Option<QReport>,
    norm_inf_exact: Option<QReport>,
    verdict: String,
    non_convergent: bool,
}

fn norm(cli: &Cli, ks: &[u32]) -> Result<Output> {
    let (spec, chi) = load_filtration(cli)?;
    let rep = invariants(cli, &chi, ks)?;
    let out = NormReport {
        rows: rep
            .rows
            .iter()
            .map(|r| NormRow {
                k: r.k,
                norm2: r.norm2.clone(),
                norm2_lemma: r.norm2_lemma.clone(),
                norm_inf: r.norm_inf.clone(),
            })
            .collect(),
        norm2: rep.norm2,
        norm_inf: rep.norm_inf,
        norm2_exact: rep.norm2_exact,
        norm_inf_exact: rep.norm_inf_exact,
        verdict: rep.norm_verdict,
        non_convergent: rep.non_convergent,
    };
    let flag = out.non_convergent;
    let rows: Vec<Vec<String>> = out
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), q(&r.norm2), q(&r.norm2_lemma), q(&r.norm_inf)])
        .collect();
    let c = csv("norm", cli.seed, &["k", "norm2", "norm2_lemma", "norm_inf"], &rows);
    Ok(finish(
        cli,
        envelope(cli, params(cli, ks, json!({})), Some(spec), flag, &out)?,
        c,
        flag,
    ))
}

#[derive(Serialize)]
struct Envelopes {
    k: u32,
    function: FunctionSpec,
    #[serde(with = "kstab::rational::serde_q")]
    integral: Rational,
}

#[derive(Serialize)]
struct Sublevel {
    #[serde(with = "kstab::rational::serde_q")]
    t: Rational,
    body: Option<PolytopeSpec>,
}

#[derive(Serialize)]
struct TransformReport {
    transform: Option<FunctionSpec>,
    envelopes: Vec<Envelopes>,
    sublevel_source: String,
    sublevels: Vec<Sublevel>,
}

fn transform(cli: &Cli, ks: &[u32], levels: u32) -> Result<Output> {
    let (spec, chi) = load_filtration(cli)?;
    let ct = convex_transform(&chi, ks)?;
    let (source, g): (String, &ConvexPL) = match &ct.g {
        Some(g) => ("transform".into(), g),
        None => {
            let (k, g) = ct.envelopes.last().expect("nonempty degree range");
            (format!("envelope k={k}"), g)
        }
    };
    let levels = levels.max(1);
    let (lo, hi) = (g.min(), g.max());
    let sublevels = (0..=levels)
        .map(|j| {
            let t = &lo + (&hi - &lo) * Rational::new(j.into(), levels.into());
            Sublevel {
                body: sublevel_body(g, &t).as_ref().map(PolytopeSpec::of),
                t,
            }
        })
        .collect();
    let report = TransformReport {
        transform: ct.g.as_ref().map(|g| FunctionSpec::of(g, false)),
        envelopes: ct
            .envelopes
            .iter()
            .map(|(k, g)| Envelopes {
                k: *k,
                function: FunctionSpec::of(g, false),
                integral: kstab::exactgeom::integrate_pl(g),
            })
            .collect(),
        sublevel_source: source,
        sublevels,
    };
    let n = chi.polytope().dim();
    let mut header: Vec<String> = vec!["k".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend(["g".into(), "envelope".into()]);
    let mut rows = Vec::new();
    for (k, env) in &ct.envelopes {
        let sample = chi.table(*k)?.g_values();
        for (x, v) in sample.points.iter().zip(&sample.values) {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(render));
            row.push(render(v));
            row.push(render(&env.value(x)));
            rows.push(row);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let c = csv("transform", cli.seed, &header, &rows);
    let p = params(cli, ks, json!({ "levels": levels }));
    Ok(finish(cli, envelope(cli, p, Some(spec), false, &report)?, c, false))
}

#[derive(Serialize)]
struct WitnessOut {
    source: String,
    threshold: QReport,
    #[serde(flatten)]
    result: WitnessReport,
}

fn witness(cli: &Cli, ks: &[u32], lambda: Option<&str>) -> Result<Output> {
    let (spec, chi) = load_filtration(cli)?;
    let (source, g) = match chi.base_function() {
        Some(f) => ("function".to_string(), f.clone()),
        None => {
            let k = *ks.last().expect("nonempty degree range");
            (format!("envelope k={k}"), chi.table(k)?.envelope()?)
        }
    };
    let threshold = stability_threshold(&g);
    let lambda = match lambda {
        Some(s) => rational_arg("lambda", s)?,
        None => threshold.clone(),
    };
    let result = vanishing_witness(&g, &lambda)?;
    let row = vec![
        render(&result.lambda),
        render(&threshold),
        result
            .witness
            .as_ref()
            .map_or(String::new(), |w| w.vertex_index.to_string()),
        result.witness.as_ref().map_or(String::new(), |w| render(&w.eps)),
    ];
    let c = csv(
        "witness",
        cli.seed,
        &["lambda", "threshold", "vertex_index", "eps"],
        &[row],
    );
    let out = WitnessOut {
        source,
        threshold: threshold.into(),
        result,
    };
    let p = params(cli, ks, json!({ "lambda": render(&lambda) }));
    Ok(finish(cli, envelope(cli, p, Some(spec), false, &out)?, c, false))
}

#[derive(Serialize)]
struct CountConstant {
    n: usize,
    #[serde(with = "kstab::rational::serde_q")]
    constant: Rational,
}

#[derive(Serialize)]
struct SweepReport {
    trials: usize,
    max_n: usize,
    violations: usize,
    #[serde(with = "kstab::rational::serde_q")]
    min_slack: Rational,
    rows: Vec<SweepRow>,
    count_remainder_constants: Vec<CountConstant>,
}

#[derive(Serialize)]
struct FunctionBounds {
    #[serde(with = "kstab::rational::serde_q")]
    fitted_constant: Rational,
    rows: Vec<SumBoundReport>,
    violations: usize,
}

fn bounds(cli: &Cli, ks: &[u32], trials: usize, max_n: usize, c: &str, lower: &str) -> Result<Output> {
    let c = rational_arg("c", c)?;
    let lower = rational_arg("lower", lower)?;
    let p = params(
        cli,
        ks,
        json!({ "trials": trials, "max_n": max_n, "c": render(&c), "L": render(&lower) }),
    );
    if let Some(spec) = input::<FunctionSpec>(cli)? {
        let f = spec.build(None)?;
        let cn = fit_sum_constant(&f, &c, ks, &lower)?;
        let rows = ks
            .iter()
            .map(|&k| convex_sum_lower_bound(&f, &c, k, &lower, &cn))
            .collect::<kstab::Result<Vec<_>>>()?;
        let violations = rows.iter().filter(|r| r.slack.is_negative()).count();
        let text = format!("# kstab bounds seed={}\n{}", cli.seed, sweep_csv(&rows));
        let rep = FunctionBounds {
            fitted_constant: cn,
            rows,
            violations,
        };
        let flag = violations > 0;
        return Ok(finish(cli, envelope(cli, p, Some(spec), flag, &rep)?, text, flag));
    }
    if max_n == 0 || trials == 0 {
        bail!("--trials and --max-n must be positive");
    }
    let rows = jensen_sweep(cli.seed, trials, max_n, cli.kmax)?;
    let count_remainder_constants = (1..=max_n)
        .map(|n| {
            Ok(CountConstant {
                n,
                constant: count_remainder_constant(&c, n, ks)?,
            })
        })
        .collect::<kstab::Result<Vec<_>>>()?;
    let reports: Vec<SumBoundReport> = rows.iter().map(|r| r.report.clone()).collect();
    let violations = reports.iter().filter(|r| r.slack.is_negative()).count();
    let text = format!("# kstab bounds seed={}\n{}", cli.seed, sweep_csv(&reports));
    let rep = SweepReport {
        trials,
        max_n,
        violations,
        min_slack: reports.iter().map(|r| r.slack.clone()).min().expect("trials > 0"),
        rows,
        count_remainder_constants,
    };
    let flag = violations > 0;
    Ok(finish(cli, envelope(cli, p, None::<()>, flag, &rep)?, text, flag))
}

#[derive(Serialize)]
struct MatrixReport {
    det_valuation: i64,
    invariant_exponents: Vec<i64>,
    factorization: ArcFactorization,
    flag: ArcFlag,
    direct_order: usize,
    flags_agree: bool,
}

#[derive(Serialize)]
struct FamilyReport {
    degrees: Vec<ArcDegree>,
    chow: Option<ArcChowReport>,
    chow_skipped: Option<String>,
}

fn matrix_report(g: &LaurentMatrix, order: Option<usize>) -> Result<MatrixReport> {
    let fac = birkhoff_factor(g, order)?;
    let flag = induced_flag(&fac)?;
    let span = (fac.lambda.last().expect("nonempty") - fac.lambda[0]) as usize;
    let direct_order = fac.order.max(span + 1);
    let direct = arc_flag_direct(g, direct_order)?;
    Ok(MatrixReport {
        det_valuation: det_pole_order(g)?,
        invariant_exponents: invariant_exponents(g)?,
        flags_agree: direct == flag,
        direct_order,
        flag,
        factorization: fac,
    })
}

fn arc(cli: &Cli, ks: &[u32], size: usize, order: Option<usize>) -> Result<Output> {
    let spec = match input::<ArcSpec>(cli)? {
        Some(s) => s,
        None => {
            if size == 0 {
                bail!("--size must be positive");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            ArcSpec::Matrix {
                matrix: random_family(&mut rng, size, -1, 2),
                order,
            }
        }
    };
    let p = params(cli, ks, json!({ "size": size, "order": order }));
    match &spec {
        ArcSpec::Matrix { matrix, order: o } => {
            let rep = matrix_report(matrix, order.or(*o))?;
            let flag = rep.factorization.residual_order.is_some() || !rep.flags_agree;
            let levels = kstab::arcs::valuation_levels(&rep.flag);
            let top = *rep.factorization.lambda.last().expect("nonempty");
            let rows: Vec<Vec<String>> = rep
                .factorization
                .lambda
                .iter()
                .zip(&levels)
                .enumerate()
                .map(|(j, (l, v))| vec![j.to_string(), l.to_string(), (top - l).to_string(), v.to_string()])
                .collect();
            let c = csv(
                "arc",
                cli.seed,
                &["j", "lambda", "weight_level", "coordinate_level"],
                &rows,
            );
            Ok(finish(cli, envelope(cli, p, Some(&spec), flag, &rep)?, c, flag))
        }
        _ => {
            let fam = spec.family(ks)?;
            let ks: Vec<u32> = ks.iter().copied().filter(|k| fam.degrees().contains(k)).collect();
            if ks.is_empty() {
                bail!("no degree of the family lies in the requested range");
            }
            let degrees = ks.iter().map(|&k| fam.degree(k)).collect::<kstab::Result<Vec<_>>>()?;
            let (chow, skipped) = match arc_chow(&fam, &ks, None) {
                Ok(r) => (Some(r), None),
                Err(e @ kstab::Error::InsufficientDegrees { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let flag = degrees.iter().any(|d| d.residual_order.is_some())
                || chow.as_ref().is_some_and(|c| c.rows.iter().any(|r| !r.holds));
            let rows: Vec<Vec<String>> = match &chow {
                Some(c) => c
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.k.to_string(),
                            r.trace.to_string(),
                            r.shift.to_string(),
                            r.d.to_string(),
                            r.w.to_string(),
                            q(&r.chow_tilde),
                            q(&r.chow),
                            q(&r.difference),
                            r.holds.to_string(),
                        ]
                    })
                    .collect(),
                None => Vec::new(),
            };
            let c = csv(
                "arc",
                cli.seed,
                &[
                    "k",
                    "trace",
                    "shift",
                    "d",
                    "w",
                    "chow_tilde",
                    "chow",
                    "difference",
                    "holds",
                ],
                &rows,
            );
            let rep = FamilyReport {
                degrees,
                chow,
                chow_skipped: skipped,
            };
            Ok(finish(cli, envelope(cli, p, Some(&spec), flag, &rep)?, c, flag))
        }
    }
}

#[derive(Serialize)]
struct CorpusJob<'a> {
    name: &'a str,
    description: &'a str,
    non_convergent: bool,
    fut: &'a Trend,
    norm2: &'a Trend,
    norm_verdict: &'a str,
}

fn run_corpus(cli: &Cli, ks: &[u32]) -> Result<Output> {
    let kmax = *ks.last().expect("nonempty degree range");
    let entries = corpus(kmax)?;
    let reports: Vec<Result<InvariantReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = entries
            .iter()
            .map(|e| s.spawn(move || invariants(cli, &e.build()?, ks)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow!("corpus job panicked"))))
            .collect()
    });
    let mut parts = Vec::new();
    let mut summary = Vec::new();
    let mut csv_rows = Vec::new();
    let mut flag = false;
    let p = params(cli, ks, json!({}));
    for (e, rep) in entries.iter().zip(&reports) {
        let rep = rep.as_ref().map_err(|err| anyhow!("{}: {err:#}", e.name))?;
        flag |= rep.non_convergent;
        let doc = json(&Envelope {
            command: "fut",
            version: env!("CARGO_PKG_VERSION"),
            seed: cli.seed,
            params: p.clone(),
            input: Some(&e.spec),
            diagnostic: rep.non_convergent,
            report: rep,
        })?;
        let body = match cli.format {
            Format::Json => doc,
            Format::Csv => csv("fut", cli.seed, &FUT_HEADER, &fut_rows(rep)),
        };
        let ext = if cli.format == Format::Json { "json" } else { "csv" };
        parts.push((format!("{}.{ext}", e.name), body));
        summary.push(CorpusJob {
            name: &e.name,
            description: &e.description,
            non_convergent: rep.non_convergent,
            fut: &rep.fut,
            norm2: &rep.norm2,
            norm_verdict: &rep.norm_verdict,
        });
        for row in fut_rows(rep) {
            let mut r = vec![e.name.clone()];
            r.extend(row);
            csv_rows.push(r);
        }
    }
    let mut header = vec!["name"];
    header.extend(FUT_HEADER);
    let text = match cli.format {
        Format::Json => envelope(cli, p, None::<()>, flag, &summary)?,
        Format::Csv => csv("corpus", cli.seed, &header, &csv_rows),
    };
    Ok(Output {
        text,
        parts: if cli.out.is_some() { parts } else { Vec::new() },
        diagnostic: flag,
        format: cli.format,
    })
}
