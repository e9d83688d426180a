//! One function per subcommand. Each returns the report plus any side files;
//! nothing is written here.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use weyllab::counterexamples::{self, counterexample_ratio, exponent_fit, jarnik_curve, weyl_example_set, MAX_JARNIK_K};
use weyllab::expsum::{eval_direct, eval_grid, CoefficientVector, GridPoint, Preset, TorusGrid};
use weyllab::incidence::{self, count_incidences, incidence_records, incidence_scale, PointFamily};
use weyllab::io::{read_coefficients, read_weight_records, write_weight_records};
use weyllab::kernel::{
    bilinear_bound, bilinear_forms, decompose, dyadic_pigeonhole, sup_norm_report, ArcBump, BoxFunction, Piece,
    Smoothness,
};
use weyllab::levelsets::{
    adversarial_selection, l4_bound, l4_on_selection, level_count_bound, local_l2_bound, local_l2_on_selection,
    strip_statistics, BoxSelection,
};
use weyllab::rationals::{
    arc_centres, dirichlet_approx, dirichlet_approx_rational, farey_layer, major_arc_membership, ramanujan_sum,
    ArcCutoff,
};
use weyllab::weights::{
    decompose_weight_by_level, greedy_adversarial, is_one_dimensional, mu_regime_report, random_one_dimensional,
    tube_sup, weighted_ratio, TubeMode, Weight,
};

use crate::args::*;
use crate::parse::{perfect_square_root, Real};
use crate::report::Report;
use crate::CliError;

/// A finished command: the JSON report, an optional CSV rendering of it,
/// side files to write, and the number of violated bounds.
#[derive(Debug)]
pub struct Output {
    pub report: Report,
    pub csv: Option<String>,
    pub files: Vec<(PathBuf, String)>,
    pub violations: usize,
}

impl Output {
    fn new(report: Report) -> Self {
        Self { report, csv: None, files: Vec::new(), violations: 0 }
    }
}

type Res<T> = Result<T, CliError>;

fn bad<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Invalid(msg.into()))
}

fn params<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

pub fn coefficients(source: &str, n: Option<usize>, seed: u64) -> Res<CoefficientVector> {
    if let Ok(p) = source.parse::<Preset>() {
        let Some(n) = n else {
            return bad(format!("--N is required for preset '{source}'"));
        };
        return Ok(p.build(n, seed)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return bad(format!("'{source}' is neither a preset nor a readable coefficient file"));
    }
    let a = read_coefficients(File::open(path)?)?;
    if let Some(n) = n {
        if n != a.n_max() {
            return bad(format!("--N {n} but the file has {} coefficients", a.n_max()));
        }
    }
    Ok(a)
}

fn csv_string<T: serde::Serialize>(rows: &[T]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(weyllab::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

// ---------------------------------------------------------------- eval

/// `sum a_n e(n x + n^2 t)` with phases reduced exactly in integers.
fn eval_exact(a: &CoefficientVector, x: (i64, u64), t: (i64, u64)) -> Complex64 {
    let (p1, q1) = (x.0 as i128, x.1 as i128);
    let (p2, q2) = (t.0 as i128, t.1 as i128);
    a.iter()
        .map(|(n, c)| {
            let n = n as i128;
            let u = (n * p1).rem_euclid(q1) as f64 / q1 as f64;
            let v = ((n * n).rem_euclid(q2) * p2.rem_euclid(q2)).rem_euclid(q2) as f64 / q2 as f64;
            c * weyllab::expsum::e(u + v)
        })
        .sum()
}

pub fn eval(args: &EvalArgs) -> Res<Output> {
    let a = coefficients(&args.coeffs.coeffs, args.coeffs.n, args.coeffs.seed)?;
    let mut rows = Vec::new();
    for &(x, t) in &args.points {
        let v = match (x, t) {
            (Real::Fraction(p1, q1), Real::Fraction(p2, q2)) => eval_exact(&a, (p1, q1), (p2, q2)),
            (Real::Decimal(0.0), Real::Fraction(p2, q2)) => eval_exact(&a, (0, 1), (p2, q2)),
            _ => eval_direct(&a, &[(x.value(), t.value())])?[0],
        };
        rows.push(json!({ "x": x, "t": t, "re": v.re, "im": v.im, "abs": v.norm() }));
    }
    let metrics = json!({ "n_max": a.n_max(), "l2_norm": a.l2_norm(), "values": rows });
    Ok(Output::new(Report::new("eval", params(args), metrics)))
}

// ----------------------------------------------------------- levelsets

#[derive(Debug, serde::Serialize)]
struct LevelRow {
    lambda: f64,
    count: usize,
    bound: f64,
    ratio: f64,
}

pub fn levelsets(args: &LevelsetArgs) -> Res<Output> {
    let a = coefficients(&args.coeffs.coeffs, args.coeffs.n, args.coeffs.seed)?;
    let n = a.n_max();
    let grid = TorusGrid::new(n, args.x_oversample, args.t_oversample)?;
    grid.check_sampling()?;
    let stats = strip_statistics(&a, &grid)?;
    let lambdas = if args.lambdas.is_empty() { stats.lambda_windows() } else { args.lambdas.clone() };
    let (lo, hi) = ((n as f64).powf(0.25), (n as f64).sqrt());
    let mut rows = Vec::new();
    for &l in &lambdas {
        if l < lo || l > hi {
            log::warn!("lambda = {l} outside [N^1/4, N^1/2]; the count bound is not claimed there");
        }
        let count = stats.count(l)?;
        let bound = level_count_bound(n, l);
        rows.push(LevelRow { lambda: l, count, bound, ratio: count as f64 / bound });
    }
    let worst = rows.iter().max_by(|x, y| x.ratio.total_cmp(&y.ratio));
    let mut metrics = json!({
        "n_max": n,
        "l2_norm": a.l2_norm(),
        "strips": n,
        "rows": rows,
    });
    if args.rescaled {
        let r = (n * n) as f64;
        metrics["rescaled"] = json!({
            "r_scale": n * n,
            "tube_length": r,
            "tube_width": r.sqrt(),
            "note": "strip j is the horizontal tube T_j of B_R; lambda is unchanged since |G(x,t)| = |f(x/N, t/R)|",
        });
    }
    if let Some(m) = args.boxes {
        let sel = adversarial_selection(&a, &grid, m)?;
        metrics["boxes"] = box_norms(&a, &sel)?;
    }
    let mut report = Report::new("levelsets", params(args), metrics);
    if let Some(w) = worst {
        report = report.with_ratio(w.count as f64, w.bound);
    }
    let mut out = Output::new(report);
    out.csv = Some(csv_string(&rows)?);
    Ok(out)
}

fn box_norms(a: &CoefficientVector, sel: &BoxSelection) -> Res<Value> {
    let m = sel.len();
    let l2 = local_l2_on_selection(a, sel)?;
    let b2 = local_l2_bound(a, m);
    let mut v = json!({
        "M": m,
        "measure": sel.measure(),
        "local_l2": l2,
        "local_l2_bound": b2,
        "local_l2_ratio": l2 / b2,
    });
    if sel.covers_all_strips() {
        let l4 = l4_on_selection(a, sel)?;
        v["l4"] = json!(l4);
        v["l4_bound"] = json!(l4_bound(a));
        v["l4_ratio"] = json!(l4 / l4_bound(a));
    }
    Ok(v)
}

// ----------------------------------------------------------- incidence

#[derive(Debug, Deserialize)]
struct PointRecord {
    j: usize,
    t: f64,
}

fn read_points(path: &Path, n: usize) -> Res<PointFamily> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(File::open(path)?);
    let mut members = BTreeMap::new();
    for rec in rd.deserialize() {
        let rec: PointRecord = rec.map_err(weyllab::Error::from)?;
        if members.insert(rec.j, rec.t).is_some() {
            return bad(format!("strip {} listed twice", rec.j));
        }
    }
    Ok(PointFamily::new(n, members)?)
}

fn dyadics_up_to(n: usize) -> Vec<u64> {
    (0..).map(|e| 1u64 << e).take_while(|&q| q as usize <= n).collect()
}

fn q_scales(text: &str, n: usize) -> Res<Vec<u64>> {
    if text == "all" {
        return Ok(dyadics_up_to(n));
    }
    match text.parse::<u64>() {
        Ok(q) => Ok(vec![q]),
        Err(_) => bad(format!("--Q must be a dyadic integer or 'all', got '{text}'")),
    }
}

pub fn incidence(args: &IncidenceArgs) -> Res<Output> {
    let n = args.n;
    let qs = q_scales(&args.q_scale, n)?;
    let family = match args.family {
        Family::Random => PointFamily::random(n, args.m.unwrap_or(n), args.seed)?,
        Family::Sharp => {
            let q = match (args.q, qs.as_slice()) {
                (Some(q), _) => q,
                (None, [q]) => *q,
                _ => return bad("--family sharp with --Q all needs --q"),
            };
            incidence::sharpness_configuration(q, args.m.unwrap_or(n), n)?
        }
        Family::File => match &args.points {
            Some(p) => read_points(p, n)?,
            None => return bad("--family file needs --points"),
        },
    };
    let m = family.len();
    let mut rows = Vec::new();
    for &q in &qs {
        let count = count_incidences(&family, q, args.tol_mult)?;
        let scale = incidence_scale(m, q, n);
        rows.push(json!({ "Q": q, "count": count, "bound": scale, "ratio": count as f64 / scale }));
    }
    let mut metrics = json!({ "N": n, "M": m, "rows": rows });
    if args.records {
        if qs.len() != 1 || m > 512 {
            return bad("--records needs a single Q and at most 512 points");
        }
        metrics["records"] = serde_json::to_value(incidence_records(&family, qs[0], args.tol_mult)?).unwrap();
    }
    let worst = rows
        .iter()
        .max_by(|x, y| x["ratio"].as_f64().unwrap().total_cmp(&y["ratio"].as_f64().unwrap()))
        .cloned();
    let mut report = Report::new("incidence", params(args), metrics);
    if let Some(w) = worst {
        report = report.with_ratio(w["count"].as_f64().unwrap(), w["bound"].as_f64().unwrap());
    }
    let mut out = Output::new(report);
    out.csv = Some(csv_string(
        &rows.iter().map(|r| (r["Q"].as_u64().unwrap(), r["count"].as_u64().unwrap(), r["bound"].as_f64().unwrap(), r["ratio"].as_f64().unwrap())).collect::<Vec<_>>(),
    )?);
    Ok(out)
}

// -------------------------------------------------------------- kernel

fn cutoff(c: Cutoff) -> ArcCutoff {
    match c {
        Cutoff::Desk => ArcCutoff::Desk,
        Cutoff::LogPower => ArcCutoff::LogPower,
    }
}

fn bump(s: Smooth) -> ArcBump {
    ArcBump::new(match s {
        Smooth::C2 => Smoothness::C2,
        Smooth::C3 => Smoothness::C3,
    })
}

/// `M` distinct random strips, each with a uniformly placed grid box.
pub fn random_selection(grid: &TorusGrid, m: usize, seed: u64) -> Res<BoxSelection> {
    if m == 0 || m > grid.n_max {
        return bad(format!("M = {m} outside 1..={}", grid.n_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = grid.rows_per_strip();
    let mut strips = sample(&mut rng, grid.n_max, m).into_vec();
    strips.sort_unstable();
    let boxes = strips
        .into_iter()
        .map(|s| {
            let xi = rng.random_range(0..grid.nx());
            let ti = s * per + rng.random_range(0..=per - grid.t_oversample);
            (s + 1, GridPoint { xi, ti })
        })
        .collect();
    Ok(BoxSelection::new(*grid, boxes)?)
}

fn piece_name(p: Piece) -> String {
    match p {
        Piece::Full => "full".into(),
        Piece::Major(q) => format!("Q={q}"),
        Piece::Minor => "minor".into(),
    }
}

pub fn kernel(args: &KernelArgs) -> Res<Output> {
    let n = args.n;
    let grid = TorusGrid::standard(n)?;
    let dec = decompose(&grid, bump(args.smoothness), cutoff(args.cutoff))?;
    let mut out = match args.report {
        KernelReport::Sup => {
            let rep = sup_norm_report(&dec)?;
            let worst = rep
                .major
                .iter()
                .chain(std::iter::once(&rep.minor))
                .max_by(|x, y| x.ratio.total_cmp(&y.ratio))
                .copied()
                .expect("at least the minor piece");
            let metrics = serde_json::to_value(&rep).unwrap();
            Output::new(Report::new("kernel", params(args), metrics).with_ratio(worst.sup, worst.bound))
        }
        KernelReport::Bilinear => {
            let a = CoefficientVector::random_phase(n, args.seed)?;
            let mut rows = Vec::new();
            let mut pigeon = Vec::new();
            let mut worst: Option<(f64, f64)> = None;
            for &m in &args.m {
                let sel = match args.selection {
                    Selection::Adversarial => adversarial_selection(&a, &grid, m)?,
                    Selection::Random => random_selection(&grid, m, args.seed)?,
                };
                let h = BoxFunction::random(&sel, args.seed);
                let bound = bilinear_bound(&h);
                for (p, v) in bilinear_forms(&dec, &h, None, None)? {
                    let ratio = v.norm() / bound;
                    if worst.is_none_or(|w| ratio > w.0 / w.1) {
                        worst = Some((v.norm(), bound));
                    }
                    rows.push(json!({ "M": m, "piece": piece_name(p), "re": v.re, "im": v.im, "abs": v.norm(), "bound": bound, "ratio": ratio }));
                }
                let ph = dyadic_pigeonhole(&h)?;
                let norm = h.l2_norm_sq();
                let (w1, w2) = (ph.first(), ph.second());
                pigeon.push(json!({
                    "M": m,
                    "lambda_1": w1.lambda, "samples_1": w1.indices.len(), "measure_1": w1.measure,
                    "lambda_2": w2.lambda, "samples_2": w2.indices.len(), "measure_2": w2.measure,
                    "l2_norm_sq": norm,
                    "holds": norm >= w1.lambda.powi(2) * w1.measure && norm >= w2.lambda.powi(2) * w2.measure,
                }));
            }
            let metrics = json!({ "N": n, "rows": rows, "pigeonhole": pigeon });
            let mut report = Report::new("kernel", params(args), metrics);
            if let Some((v, b)) = worst {
                report = report.with_ratio(v, b);
            }
            Output::new(report)
        }
    };
    if let Some(path) = &args.rows_csv {
        out.files.push((path.clone(), kernel_rows_csv(&dec)?));
    }
    Ok(out)
}

fn kernel_rows_csv(dec: &weyllab::kernel::KernelDecomposition) -> Res<String> {
    let grid = *dec.grid();
    let field = eval_grid(&CoefficientVector::ones(grid.n_max)?, &grid)?;
    let qs = dec.q_values();
    let maxima = field.map_rows(|_, row| row.iter().map(|v| v.norm()).fold(0.0, f64::max));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row".to_string(), "t".into(), "full".into()];
    header.extend(qs.iter().map(|q| format!("Q={q}")));
    header.push("minor".into());
    w.write_record(&header).map_err(weyllab::Error::from)?;
    for (k, m) in maxima.iter().enumerate() {
        let mut rec = vec![k.to_string(), grid.t_of(k).to_string(), m.to_string()];
        for &q in &qs {
            rec.push((m * dec.factor(Piece::Major(q), k)?.abs()).to_string());
        }
        rec.push((m * dec.factor(Piece::Minor, k)?.abs()).to_string());
        w.write_record(&rec).map_err(weyllab::Error::from)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?).unwrap())
}

// ------------------------------------------------------------- weights

fn mode(m: Mode) -> TubeMode {
    match m {
        Mode::Horizontal => TubeMode::Horizontal,
        Mode::All => TubeMode::AllDirections,
    }
}

pub fn square_root_scale(r: u64) -> Res<u64> {
    match perfect_square_root(r) {
        Some(n) => Ok(n),
        None => bad(format!("R = {r} is not a perfect square n^2")),
    }
}

fn build_weight(args: &WeightsArgs, n: u64, a: &CoefficientVector) -> Res<Weight> {
    let r = (n * n) as f64;
    Ok(match args.weight {
        WeightKind::Uniform => Weight::uniform(n, r)?,
        WeightKind::Weyl => weyl_example_set(n)?.capped_to(r)?,
        WeightKind::Greedy => greedy_adversarial(a)?,
        WeightKind::Random1d => random_one_dimensional(n, args.seed)?,
        WeightKind::Lattice => Weight::root_lattice(n)?,
        WeightKind::File => match &args.weight_file {
            Some(p) => Weight::from_records(n, &read_weight_records(File::open(p)?)?)?,
            None => return bad("--weight file needs --weight-file"),
        },
    })
}

pub fn weights(args: &WeightsArgs) -> Res<Output> {
    let n = square_root_scale(args.r_scale)?;
    let a = coefficients(&args.coeffs, Some(n as usize), args.seed)?;
    let w = build_weight(args, n, &a)?;
    let mut out = match args.action {
        WeightAction::Ratio => {
            let rep = weighted_ratio(&a, &w, mode(args.mode))?;
            let dec = decompose_weight_by_level(&w, &a)?;
            let table = match mu_regime_report(&dec, mode(args.mode)) {
                Ok(rows) => serde_json::to_value(rows).unwrap(),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let metrics = json!({
                "N": n,
                "R": n * n,
                "total": w.total(),
                "numerator": rep.numerator,
                "tube_sup": rep.tube,
                "denominator": rep.denominator,
                "ratio": rep.ratio,
                "discard_mass": dec.discard.total(),
                "regime_table": table,
            });
            let report = Report::new("weights", params(args), metrics);
            let report = if rep.numerator == 0.0 { report.with_ratio(0.0, rep.denominator) } else { report.with_ratio(rep.numerator, rep.denominator) };
            Output::new(report)
        }
        WeightAction::OneDim => {
            let rep = is_one_dimensional(&w)?;
            let metrics = json!({ "N": n, "R": n * n, "total": w.total(), "max_ratio": rep.max_ratio, "witness": rep.witness, "holds": rep.holds() });
            Output::new(Report::new("weights", params(args), metrics).with_ratio(rep.max_ratio, 1.0))
        }
    };
    if let Some(p) = &args.weight_out {
        let mut buf = Vec::new();
        write_weight_records(w.records()?, &mut buf)?;
        out.files.push((p.clone(), String::from_utf8(buf).unwrap()));
    }
    Ok(out)
}

// ------------------------------------------------------ counterexample

pub fn counterexample(args: &CounterexampleArgs) -> Res<Output> {
    match args.kind {
        Kind::Jarnik => {
            let mut rows = Vec::new();
            let mut table_rows = Vec::new();
            let mut samples = Vec::new();
            let mut last = None;
            for &k in &args.k {
                if k as u64 > MAX_JARNIK_K {
                    return bad(format!("k = {k} exceeds {MAX_JARNIK_K}"));
                }
                let table = jarnik_curve(k as u64)?;
                let rep = counterexample_ratio(&table)?;
                let r = rep.r_scale as f64;
                samples.push((r, rep.ratio));
                rows.push(json!({
                    "k": k,
                    "N": rep.n_max,
                    "R": rep.r_scale,
                    "support_size": rep.support_size,
                    "support_floor": (rep.n_max as f64).powf(2.0 / 3.0) / 10.0,
                    "ratio": rep.ratio,
                    "tube_sup": rep.tube.mass,
                    "tube_constant": rep.tube.mass / r.sqrt(),
                }));
                table_rows.push((k, rep.n_max, rep.r_scale, rep.support_size, rep.ratio, rep.tube.mass));
                last = Some((table, rep));
            }
            let Some((table, rep)) = last else {
                return bad("--k needs at least one value");
            };
            let fit = exponent_fit(&samples);
            let metrics = json!({
                "N": rep.n_max,
                "R": rep.r_scale,
                "support_size": rep.support_size,
                "ratio": rep.ratio,
                "tube_sup": rep.tube.mass,
                "exponent_fit": fit,
                "rows": rows,
            });
            let mut out = Output::new(Report::new("counterexample", params(args), metrics).with_ratio(rep.numerator, rep.tube.mass.sqrt() * rep.norm_sq));
            out.csv = Some(format!("k,N,R,support_size,ratio,tube_sup\n{}", csv_string(&table_rows)?));
            if let Some(p) = &args.csv {
                let vals: Vec<(u64, i64)> = table.values.iter().map(|(&n, &v)| (n, v)).collect();
                let mut s = String::from("n,v_n\n");
                s.push_str(&csv_string(&vals)?);
                out.files.push((p.clone(), s));
            }
            Ok(out)
        }
        Kind::Weyl => {
            let Some(r_scale) = args.r_scale else {
                return bad("--kind weyl needs --N (the ball scale R)");
            };
            let n = square_root_scale(r_scale)?;
            let r = r_scale as f64;
            let raw = weyl_example_set(n)?;
            let w = raw.capped_to(r)?;
            let ones = CoefficientVector::ones(n as usize)?;
            let rep = weighted_ratio(&ones, &w, TubeMode::Horizontal)?;
            let all = tube_sup(&w, TubeMode::AllDirections)?;
            let cells = raw.records()?.len();
            let metrics = json!({
                "N": n,
                "R": r_scale,
                "support_size": cells,
                "denominators": counterexamples::weyl_denominators(n),
                "total_mass": raw.total(),
                "ratio": rep.ratio,
                "tube_sup": rep.tube.mass,
                "tube_sup_all_directions": all.mass,
                "one_dim_ratio": is_one_dimensional(&w)?.max_ratio,
                "exponent_fit": Value::Null,
            });
            let mut out = Output::new(Report::new("counterexample", params(args), metrics).with_ratio(rep.numerator, rep.denominator));
            if let Some(p) = &args.csv {
                let mut buf = Vec::new();
                write_weight_records(raw.records()?, &mut buf)?;
                out.files.push((p.clone(), String::from_utf8(buf).unwrap()));
            }
            Ok(out)
        }
    }
}

// ----------------------------------------------------------- rationals

pub fn rationals(args: &RationalsArgs) -> Res<Output> {
    let (metrics, ratio) = match &args.op {
        RationalOp::Ramanujan { q, n } => (json!({ "q": q, "n": n, "value": ramanujan_sum(*q, *n)? }), None),
        RationalOp::Dirichlet { t, n } => {
            let f = match *t {
                Real::Fraction(p, q) => {
                    let whole = p.div_euclid(q as i64);
                    let g = dirichlet_approx_rational(p.rem_euclid(q as i64) as u128, q as u128, *n)?;
                    weyllab::ReducedFraction::new(g.num() + whole * g.den() as i64, g.den() as i64)?
                }
                Real::Decimal(v) => dirichlet_approx(v, *n)?,
            };
            let err = (t.value() - f.to_f64()).abs();
            let bound = 1.0 / (f.den() as f64 * *n as f64);
            (json!({ "t": t, "a": f.num(), "q": f.den(), "fraction": f.to_string(), "error": err, "bound": bound }), Some((err, bound)))
        }
        RationalOp::Farey { q_scale } => {
            let layer = farey_layer(*q_scale)?;
            let fr: Vec<String> = layer.fractions().iter().map(|f| f.to_string()).collect();
            (json!({ "Q": q_scale, "count": fr.len(), "torus_classes": arc_centres(*q_scale).len(), "fractions": fr }), None)
        }
        RationalOp::Arc { t, q_scale, n } => {
            let hit = major_arc_membership(t.value(), *q_scale, *n, ArcCutoff::Desk)?;
            (json!({ "t": t, "Q": q_scale, "N": n, "centre": hit.map(|f| f.to_string()) }), None)
        }
    };
    let mut report = Report::new("rationals", params(args), metrics);
    if let Some((m, b)) = ratio {
        report = report.with_ratio(m, b);
    }
    Ok(Output::new(report))
}
