use serde::{Deserialize, Serialize};

use pspin::airy::{AiryFamily, KernelMode};
use pspin::asymptotics::{
    binet_check, blackhole_density_compare, central_charge_negative, large_p_check, zeta_identity_holds, DensityConfig,
    LargePVerdict,
};
use pspin::correlators::{
    assemble_genus, finite_n_evaluate, lookup, one_point_series, one_point_symbolic, one_point_value, two_point_table,
    FiniteNSource, Mark, PValue, TableJson, TauCorrelator,
};
use pspin::moments::{GradeAssembly, Reducer};
use pspin::oracle::{mc_trace_moments, verify_moment_identities, McConfig, OracleReport};
use pspin::tautology::{dilaton_check, one_point_table, selection_check, string_check, TautologyReport};
use pspin::Q;

use crate::output::{csv_rows, emit, json, render_table, CliError, CliResult};
use crate::{Check, DensityArgs, Format, IntersectArgs, Mode, VerifyArgs};

const GOLDEN: &str = include_str!("../fixtures/golden.json");

#[derive(Debug, Deserialize)]
struct GoldenEntry {
    source: String,
    p: i64,
    genus: u32,
    m: Vec<u32>,
    j: Vec<i64>,
    num: String,
    den: String,
}

fn kernel(m: Mode) -> KernelMode {
    match m {
        Mode::Real => KernelMode::Real,
        Mode::Contour => KernelMode::Contour,
    }
}

fn parse_p(s: &str) -> CliResult<Option<i64>> {
    if s == "symbolic" {
        return Ok(None);
    }
    s.parse::<i64>()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("--p must be an integer or \"symbolic\", got {s:?}")))
}

/// Decimal ("2.25") or fraction ("9/4") as an exact rational.
pub fn parse_rational(s: &str) -> CliResult<Q> {
    let bad = || CliError::Usage(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n.into(), d.into()));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let v: Q = format!("{int}{frac}/1{}", "0".repeat(frac.len())).parse().map_err(|_| bad())?;
    Ok(if neg { -v } else { v })
}

fn compute_table(args: &IntersectArgs, p: Option<i64>) -> CliResult<(PValue, Vec<TauCorrelator>)> {
    let g = args.genus;
    match (args.points, p) {
        (1, None) => {
            let t = if g == 0 { Vec::new() } else { one_point_symbolic(g)?.into_iter().filter(|t| t.genus == g).collect() };
            Ok((PValue::Symbolic, t))
        }
        (1, Some(p)) => {
            if g == 0 {
                return Ok((PValue::int(p), Vec::new()));
            }
            match one_point_value(p, g) {
                Ok(t) => Ok((PValue::int(p), vec![t])),
                Err(pspin::Error::Domain(msg)) => {
                    eprintln!("note: {msg}");
                    Ok((PValue::int(p), Vec::new()))
                }
                Err(e) => Err(e.into()),
            }
        }
        (2, None) => Err(CliError::Usage("two-point tables need an integer p >= 3".into())),
        (2, Some(p)) if p < 3 => Err(CliError::Usage(format!("two-point tables need p >= 3, got {p}"))),
        (2, Some(p)) => Ok((PValue::int(p), two_point_table(p as u32, g, kernel(args.mode))?)),
        (n, _) => Err(CliError::Usage(format!("--points must be 1 or 2, got {n}"))),
    }
}

fn golden_check(p: i64, genus: u32, points: u32, table: &[TauCorrelator]) -> CliResult<bool> {
    let fixtures: Vec<GoldenEntry> = serde_json::from_str(GOLDEN).map_err(|e| CliError::Io(format!("golden fixtures: {e}")))?;
    let mut ok = true;
    let mut seen = 0;
    for f in fixtures.iter().filter(|f| f.p == p && f.genus == genus && f.m.len() as u32 == points) {
        seen += 1;
        let marks: Vec<Mark> = f.m.iter().zip(&f.j).map(|(&m, &j)| Mark::new(m, j)).collect();
        let want = format!("{}/{}", f.num, f.den).parse::<Q>().map_err(|e| CliError::Io(format!("golden fixtures: {e}")))?;
        let got = lookup(table, &marks);
        let line = match &got {
            Some(v) if *v == want => "ok",
            _ => "DRIFT",
        };
        if line != "ok" {
            ok = false;
        }
        let shown = got.map(|v| v.to_string()).unwrap_or_else(|| "missing".into());
        let label: Vec<String> = marks.iter().map(|k| format!("tau_{{{},{}}}", k.m, k.j)).collect();
        eprintln!("golden {line}: <{}>_{genus} = {shown}, reference {want} ({})", label.join(" "), f.source);
    }
    if seen == 0 {
        eprintln!("golden: no reference values for p={p} genus={genus} points={points}");
    }
    Ok(ok)
}

pub fn intersect(args: &IntersectArgs) -> CliResult<bool> {
    let p = parse_p(&args.p)?;
    let (pv, table) = compute_table(args, p)?;
    let tj = TableJson::from_table(&pv, args.genus, args.points, &table);
    let body = render_table(args.out.format, &tj, &table)?;
    let summary = render_table(Format::Text, &tj, &table)?;
    let stem = format!("intersect_p{}_g{}_n{}", args.p, args.genus, args.points);
    emit(&args.out, &stem, &body, &summary)?;
    if args.golden {
        return match p {
            Some(p) => golden_check(p, args.genus, args.points, &table),
            None => {
                eprintln!("golden: reference values exist only for integer p");
                Ok(true)
            }
        };
    }
    Ok(true)
}

fn tautology_output(args: &VerifyArgs, stem: &str, report: &TautologyReport) -> CliResult<bool> {
    let pass = report.all_pass();
    let summary = format!("{}{}: {}\n", report, stem, if pass { "pass" } else { "FAIL" });
    let body = match args.out.format {
        Format::Json => json(report)?,
        Format::Csv => csv_rows(
            &["identity", "lhs", "rhs", "pass", "difference"],
            &report
                .checked
                .iter()
                .map(|c| vec![c.identity.clone(), c.lhs.clone(), c.rhs.join(" + "), c.pass.to_string(), c.difference.clone()])
                .collect::<Vec<_>>(),
        )?,
        Format::Text => summary.clone(),
    };
    emit(&args.out, stem, &body, &summary)?;
    Ok(pass)
}

fn oracle_output(args: &VerifyArgs, stem: &str, reports: &[OracleReport]) -> CliResult<bool> {
    let pass = !reports.is_empty() && reports.iter().all(|r| r.pass);
    let mut summary = String::new();
    for r in reports {
        summary.push_str(&format!(
            "{} {}: lhs {} rhs {} diff {:e} tol {:e}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.identity,
            r.lhs,
            r.rhs,
            r.abs_diff,
            r.tolerance
        ));
    }
    summary.push_str(&format!("{stem}: {}\n", if pass { "pass" } else { "FAIL" }));
    let body = match args.out.format {
        Format::Json => json(&reports)?,
        Format::Csv => csv_rows(
            &["identity", "lhs", "rhs", "abs_diff", "tolerance", "pass"],
            &reports
                .iter()
                .map(|r| {
                    vec![
                        r.identity.clone(),
                        r.lhs.to_string(),
                        r.rhs.to_string(),
                        r.abs_diff.to_string(),
                        r.tolerance.to_string(),
                        r.pass.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Text => summary.clone(),
    };
    emit(&args.out, stem, &body, &summary)?;
    Ok(pass)
}

#[derive(Serialize)]
struct CancellationLine {
    p: u32,
    genus: u32,
    mode: String,
    pass: bool,
    boundary_terms: usize,
    integer_grade_ode_terms: usize,
    detail: String,
}

fn cancellation(args: &VerifyArgs) -> CliResult<bool> {
    if args.p < 3 {
        return Err(CliError::Usage(format!("cancellation needs p >= 3, got {}", args.p)));
    }
    let mut lines = Vec::new();
    for mode in [KernelMode::Contour, KernelMode::Real] {
        let reducer = Reducer::new(AiryFamily::new(args.p, mode)?);
        for g in 1..=args.genus {
            let line = match assemble_genus(&reducer, g) {
                Ok(a) => {
                    let fractional = a
                        .ode_integer
                        .values()
                        .any(|c| c.residues_mod_p().into_iter().any(|r| !GradeAssembly::is_integer_residue(args.p, g, r)));
                    CancellationLine {
                        p: args.p,
                        genus: g,
                        mode: format!("{mode:?}").to_lowercase(),
                        pass: !fractional,
                        boundary_terms: a.boundary.len(),
                        integer_grade_ode_terms: a.ode_integer.len(),
                        detail: String::new(),
                    }
                }
                Err(e @ pspin::Error::Cancellation(_)) => CancellationLine {
                    p: args.p,
                    genus: g,
                    mode: format!("{mode:?}").to_lowercase(),
                    pass: false,
                    boundary_terms: 0,
                    integer_grade_ode_terms: 0,
                    detail: e.to_string(),
                },
                Err(e) => return Err(e.into()),
            };
            lines.push(line);
        }
    }
    let pass = lines.iter().all(|l| l.pass);
    let mut summary = String::new();
    for l in &lines {
        summary.push_str(&format!(
            "{} p={} genus={} {}: {} boundary products, {} ODE-constant terms on integer grades{}\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.p,
            l.genus,
            l.mode,
            l.boundary_terms,
            l.integer_grade_ode_terms,
            if l.detail.is_empty() { String::new() } else { format!(" ({})", l.detail) }
        ));
    }
    summary.push_str(&format!("cancellation: {}\n", if pass { "pass" } else { "FAIL" }));
    let body = match args.out.format {
        Format::Json => json(&lines)?,
        Format::Csv => csv_rows(
            &["p", "genus", "mode", "pass", "boundary_terms", "integer_grade_ode_terms", "detail"],
            &lines
                .iter()
                .map(|l| {
                    vec![
                        l.p.to_string(),
                        l.genus.to_string(),
                        l.mode.clone(),
                        l.pass.to_string(),
                        l.boundary_terms.to_string(),
                        l.integer_grade_ode_terms.to_string(),
                        l.detail.clone(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Text => summary.clone(),
    };
    emit(&args.out, "verify_cancellation", &body, &summary)?;
    Ok(pass)
}

fn two_and_one(args: &VerifyArgs) -> CliResult<(Vec<TauCorrelator>, Vec<TauCorrelator>)> {
    if args.p < 3 {
        return Err(CliError::Usage(format!("two-point checks need p >= 3, got {}", args.p)));
    }
    Ok((two_point_table(args.p, args.genus, KernelMode::Real)?, one_point_table(args.p as i64, args.genus)))
}

pub fn verify(args: &VerifyArgs) -> CliResult<bool> {
    match args.check {
        Check::String => {
            let (two, one) = two_and_one(args)?;
            tautology_output(args, "verify_string", &string_check(&two, &one, args.genus))
        }
        Check::Dilaton => {
            let (two, one) = two_and_one(args)?;
            tautology_output(args, "verify_dilaton", &dilaton_check(&two, &one, args.genus))
        }
        Check::Selection => {
            let (two, one) = two_and_one(args)?;
            let mut r = selection_check(args.p as i64, &two);
            r.merge(selection_check(args.p as i64, &one));
            tautology_output(args, "verify_selection", &r)
        }
        Check::Cancellation => cancellation(args),
        Check::AiryQuad => {
            let tol = args.tol.unwrap_or(1e-6);
            let mut reports = Vec::new();
            for &a in &args.a {
                reports.extend(verify_moment_identities(a, tol)?);
            }
            oracle_output(args, "verify_airy_quad", &reports)
        }
        Check::Mc => {
            let src = FiniteNSource::new(args.eigenvalues.clone())?;
            let exact = finite_n_evaluate(&src, &args.s)?;
            let mc = mc_trace_moments(&McConfig {
                eigenvalues: args.eigenvalues.clone(),
                samples: args.samples,
                seed: args.seed,
                insertions: vec![args.s.clone()],
            })?;
            let sigmas = args.tol.unwrap_or(3.0);
            let r = OracleReport::new(
                "finite-N residue formula vs Monte Carlo",
                serde_json::json!({
                    "eigenvalues": args.eigenvalues, "s": args.s, "samples": args.samples,
                    "seed": args.seed, "stderr": mc[0].stderr, "sigmas": sigmas
                }),
                mc[0].estimate,
                exact,
                sigmas * mc[0].stderr,
            );
            oracle_output(args, "verify_mc", &[r])
        }
        Check::Binet => {
            let tol = args.tol.unwrap_or(1e-8);
            let b = binet_check(args.z)?;
            let reports = [
                OracleReport::new("digamma integral representation", serde_json::json!({"z": args.z}), b.lhs, b.rhs, tol),
                OracleReport::new(
                    "log-sinh bridge d/ds(s U(s)) = 1/s - 1/2 - 1/(e^s - 1)",
                    serde_json::json!({"grid": [0.05, 0.3, 1.0, 2.5, 7.0]}),
                    b.bridge_max_diff,
                    0.0,
                    1e-6,
                ),
            ];
            oracle_output(args, "verify_binet", &reports)
        }
        Check::Largep => largep(args),
    }
}

fn largep(args: &VerifyArgs) -> CliResult<bool> {
    let terms = one_point_series(args.genus)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for t in &terms {
        let r = large_p_check(&t.coefficient, t.genus)?;
        let zeta = zeta_identity_holds(t.genus)?;
        let ok = r.verdict == LargePVerdict::Matches && zeta;
        pass &= ok;
        rows.push(vec![
            t.genus.to_string(),
            r.leading_degree.to_string(),
            r.leading_coefficient.clone(),
            r.expected.clone(),
            format!("{:?}", r.verdict).to_lowercase(),
            zeta.to_string(),
        ]);
    }
    let mut summary = String::new();
    for r in &rows {
        summary.push_str(&format!(
            "{} genus {}: leading p^{} coefficient {} expected {} ({}), zeta identity {}\n",
            if r[4] == "matches" && r[5] == "true" { "PASS" } else { "FAIL" },
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            r[5]
        ));
    }
    summary.push_str(&format!("largep: {}\n", if pass { "pass" } else { "FAIL" }));
    let header = ["genus", "leading_degree", "leading_coefficient", "expected", "verdict", "zeta_identity"];
    let body = match args.out.format {
        Format::Json => {
            let v: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| header.iter().zip(r).map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect())
                .collect();
            json(&v)?
        }
        Format::Csv => csv_rows(&header, &rows)?,
        Format::Text => summary.clone(),
    };
    emit(&args.out, "verify_largep", &body, &summary)?;
    Ok(pass)
}

pub fn density(args: &DensityArgs) -> CliResult<bool> {
    let charge = match &args.central_charge {
        Some(s) => {
            let k = parse_rational(s)?;
            Some((k.clone(), central_charge_negative(&k)?))
        }
        None => None,
    };
    if !(args.e_min > 0.0) {
        return Err(CliError::Usage(format!("--e-min must be positive (the density has a pole at E = 0), got {}", args.e_min)));
    }
    if !(args.epsilon > 0.0) {
        return Err(CliError::Usage(format!("--epsilon must be positive, got {}", args.epsilon)));
    }
    let mut cfg = DensityConfig::linear(args.e_min, args.e_max, args.samples)?;
    cfg.epsilon = args.epsilon;
    let fit = blackhole_density_compare(&cfg)?;
    let mut summary = format!(
        "affine fit rho_matrix = alpha rho_bh + beta on [{}, {}] ({} points): alpha {} beta {} max residual {:e}\n\
         max residual with the -1/(2E) term removed: {:e}\n",
        args.e_min,
        args.e_max,
        args.samples,
        fit.alpha,
        fit.beta,
        fit.max_residual,
        fit.max_residual_without_pole_term
    );
    if let Some((k, c)) = &charge {
        summary.push_str(&format!("central charge at k' = {k}: {c}\n"));
    }
    let body = match args.out.format {
        Format::Json => json(&serde_json::json!({
            "fit": fit,
            "central_charge": charge.as_ref().map(|(k, c)| serde_json::json!({"k": k.to_string(), "value": c.to_string()})),
        }))?,
        Format::Csv => csv_rows(
            &["E", "rho_matrix", "rho_bh", "residual"],
            &fit.rows
                .iter()
                .map(|r| vec![r.e.to_string(), r.rho_matrix.to_string(), r.rho_bh.to_string(), r.residual.to_string()])
                .collect::<Vec<_>>(),
        )?,
        Format::Text => summary.clone(),
    };
    emit(&args.out, "density", &body, &summary)?;
    Ok(true)
}
