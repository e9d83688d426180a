//! The bound battery at one scale: every inequality instance becomes a
//! ledger row `measured` vs `bound`, with `constant = measured / bound`
//! checked against a fixed threshold. Lower bounds are entered with the
//! roles swapped so that every row reads "constant <= threshold".

use serde::Serialize;
use serde_json::json;
use weyllab::counterexamples::{counterexample_ratio, exponent_fit, jarnik_curve, weyl_example_set};
use weyllab::expsum::{eval_at_grid_points, eval_grid, CoefficientVector, GridPoint, TorusGrid};
use weyllab::incidence::{count_incidences, incidence_scale, sharpness_configuration, PointFamily};
use weyllab::kernel::{bilinear_bound, bilinear_forms, decompose, sup_norm_report, ArcBump, BoxFunction};
use weyllab::levelsets::{
    adversarial_selection, l4_bound, l4_on_selection, level_count_bound, local_l2_bound, local_l2_on_selection,
    strip_statistics,
};
use weyllab::rationals::{gcd, ramanujan_sum, ArcCutoff};
use weyllab::weights::{
    decompose_weight_by_level, greedy_adversarial, mu_regime_report, random_one_dimensional,
    weighted_ratio, TubeMode, Weight,
};

use crate::args::SuiteArgs;
use crate::commands::{random_selection, Output};
use crate::report::Report;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub name: &'static str,
    /// The inequality this row instantiates.
    pub anchor: &'static str,
    #[serde(rename = "N")]
    pub n: u64,
    /// Instance parameters (preset, seed, lambda, Q, M, ...).
    pub param: String,
    pub measured: f64,
    pub bound: f64,
    pub constant: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Ledger {
    rows: Vec<LedgerRow>,
}

impl Ledger {
    /// `measured <= threshold * bound`.
    fn upper(&mut self, name: &'static str, anchor: &'static str, n: u64, param: String, measured: f64, bound: f64, threshold: f64) {
        let constant = if bound > 0.0 { measured / bound } else if measured == 0.0 { 0.0 } else { f64::INFINITY };
        self.rows.push(LedgerRow { name, anchor, n, param, measured, bound, constant, threshold, pass: constant <= threshold });
    }

    /// `measured >= bound`, entered as `bound / measured <= 1`.
    fn lower(&mut self, name: &'static str, anchor: &'static str, n: u64, param: String, measured: f64, bound: f64) {
        let constant = if measured > 0.0 { bound / measured } else { f64::INFINITY };
        self.rows.push(LedgerRow { name, anchor, n, param, measured, bound, constant, threshold: 1.0, pass: constant <= 1.0 });
    }
}

const A_ORACLE: &str = "grid evaluation agrees with direct summation";
const A_RAMANUJAN: &str = "|c_q(n)| <= gcd(q, n)";
const A_GAUSS: &str = "|Gauss sum| = sqrt(q) for odd prime q";
const A_LEVEL: &str = "#_lambda <= C N^2 lambda^-4 log N";
const A_LEVEL_SHARP: &str = "#_lambda >= N^2 lambda^-4 / (C log N) for the Weyl sum";
const A_L4: &str = "||f||_L4(E) <= C N^eps N^-1/4 ||a||";
const A_LOCAL: &str = "||f||_L2(E_M) <= C N^eps M^1/4 N^-1 ||a||";
const A_INC: &str = "incidences <= C N^eps Q M";
const A_INC_SHARP: &str = "incidences >= Q M / C for the row configuration";
const A_RECON: &str = "K = sum_Q K_Q + K' exactly";
const A_MAJOR: &str = "sup |K_Q| <= C N Q^-1/2";
const A_MINOR: &str = "sup |K'| <= C N^1/2 (log N)^3";
const A_BILINEAR: &str = "|<K_piece * h1_E, h1_E>| <= C N^eps M^1/2 N^-2 ||h||^2";
const A_UNIFORM: &str = "uniform weight ratio = R^-1/4";
const A_WEIGHTED: &str = "int |G|^2 w <= C R^eps sup_T w(T)^1/2 R ||a||^2";
const A_REGIME: &str = "mu^2 w_mu(B_R) <= C R^eps R sup_T w_mu(T)^1/2";
const A_AVERAGE: &str = "sup_T w(T) >= w(B_R) / R^1/2";
const A_JARNIK: &str = "|I| >= N^2/3 / C on the convex lattice curve";
const A_TUBE: &str = "lattice weight w(T) <= C R^1/2";
const A_GROWTH: &str = "counterexample ratio grows like R^(1/12 - eps)";

fn random_points(grid: &TorusGrid, count: usize, seed: u64) -> Vec<GridPoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| GridPoint { xi: rng.random_range(0..grid.nx()), ti: rng.random_range(0..grid.nt()) })
        .collect()
}

pub fn run(args: &SuiteArgs) -> Result<Output, CliError> {
    let n = args.n;
    if n < 8 {
        return Err(CliError::Invalid(format!("suite needs N >= 8, got {n}")));
    }
    let nu = n as u64;
    let ln_n = (n as f64).ln();
    let mut l = Ledger::default();
    let grid = TorusGrid::standard(n)?;
    let randoms: Vec<(String, CoefficientVector)> = args
        .seeds
        .iter()
        .map(|&s| Ok((format!("random-phase seed={s}"), CoefficientVector::random_phase(n, s)?)))
        .collect::<Result<_, weyllab::Error>>()?;
    let ones = CoefficientVector::ones(n)?;

    // evaluation
    for (&seed, (tag, a)) in args.seeds.iter().zip(&randoms) {
        let field = eval_grid(a, &grid)?;
        let pts = random_points(&grid, 256, seed);
        let direct = eval_at_grid_points(a, &grid, &pts)?;
        let err = pts.iter().zip(direct).map(|(p, d)| (field.row(p.ti)[p.xi] - d).norm()).fold(0.0, f64::max);
        l.upper("oracle", A_ORACLE, nu, tag.clone(), err, 1e-9 * (n as f64).sqrt() * a.l2_norm(), 1.0);
    }

    // arithmetic
    let mut worst = 0.0f64;
    for q in 1..=64u64 {
        for m in -64..=64i64 {
            let c = ramanujan_sum(q, m)?;
            worst = worst.max(c.unsigned_abs() as f64 / gcd(q, m.unsigned_abs()) as f64);
        }
    }
    l.upper("ramanujan", A_RAMANUJAN, nu, "q<=64 |n|<=64".into(), worst, 1.0, 1.0);
    let mut dev = 0.0f64;
    for q in (3..=61u64).filter(|&p| (2..p).all(|d| p % d != 0)) {
        let pts: Vec<(f64, f64)> = (1..q).map(|a| (0.0, a as f64 / q as f64)).collect();
        for v in weyllab::kernel::kernel_eval(q as usize, &pts)? {
            dev = dev.max((v.norm() - (q as f64).sqrt()).abs());
        }
    }
    l.upper("gauss", A_GAUSS, nu, "odd primes q<=61".into(), dev, 1e-9, 1.0);

    // level sets
    let mut presets = vec![("ones".to_string(), ones.clone())];
    presets.extend(randoms.iter().cloned());
    for (tag, a) in &presets {
        let stats = strip_statistics(a, &grid)?;
        let mut sharp = 0.0f64;
        let mut sharp_bound = 0.0;
        for (lambda, count) in stats.counts() {
            let bound = level_count_bound(n, lambda);
            l.upper("levelset", A_LEVEL, nu, format!("{tag} lambda={lambda}"), count as f64, bound, 100.0);
            let floor = bound / (100.0 * ln_n * ln_n);
            if tag == "ones" && (sharp_bound == 0.0 || count as f64 / floor > sharp / sharp_bound) {
                sharp = count as f64;
                sharp_bound = floor;
            }
        }
        if tag == "ones" {
            l.lower("levelset-sharp", A_LEVEL_SHARP, nu, tag.clone(), sharp, sharp_bound);
        }
        let sel = adversarial_selection(a, &grid, n)?;
        l.upper("l4", A_L4, nu, tag.clone(), l4_on_selection(a, &sel)?, l4_bound(a), 100.0 * ln_n);
        for m in [1usize, 4, 16, 64].into_iter().filter(|&m| m <= n) {
            let sel = adversarial_selection(a, &grid, m)?;
            l.upper("local-l2", A_LOCAL, nu, format!("{tag} M={m}"), local_l2_on_selection(a, &sel)?, local_l2_bound(a, m), 100.0 * ln_n);
        }
    }

    // incidences
    let qs: Vec<u64> = (0..).map(|e| 1u64 << e).take_while(|&q| q <= nu).collect();
    for &seed in &args.seeds {
        let fam = PointFamily::random(n, n, seed)?;
        for &q in &qs {
            let c = count_incidences(&fam, q, 1.0)? as f64;
            l.upper("incidence", A_INC, nu, format!("seed={seed} Q={q}"), c, incidence_scale(n, q, n), 100.0);
        }
    }
    for &q in qs.iter().filter(|&&q| 10 * q <= nu) {
        let fam = sharpness_configuration(q, n, n)?;
        let c = count_incidences(&fam, q, 1.0)? as f64;
        l.upper("incidence", A_INC, nu, format!("sharp q={q}"), c, incidence_scale(fam.len(), q, n), 100.0);
        l.lower("incidence-sharp", A_INC_SHARP, nu, format!("q={q} M={n}"), c, (q * nu) as f64 / 100.0);
    }

    // kernel
    let dec = decompose(&grid, ArcBump::default(), ArcCutoff::Desk)?;
    let rep = sup_norm_report(&dec)?;
    l.upper("reconstruction", A_RECON, nu, String::new(), rep.reconstruction_error, 1e-10 * n as f64, 1.0);
    for e in &rep.major {
        l.upper("major-sup", A_MAJOR, nu, format!("{:?}", e.piece), e.sup, e.bound, 10.0);
    }
    l.upper("minor-sup", A_MINOR, nu, String::new(), rep.minor.sup, rep.minor.bound, 10.0);
    for (&seed, (tag, a)) in args.seeds.iter().zip(&randoms) {
        for m in [1usize, 4, 16].into_iter().filter(|&m| m <= n && m * n <= 1024) {
            for (kind, sel) in [("adversarial", adversarial_selection(a, &grid, m)?), ("random", random_selection(&grid, m, seed)?)] {
                let h = BoxFunction::random(&sel, seed);
                let bound = bilinear_bound(&h);
                for (piece, v) in bilinear_forms(&dec, &h, None, None)? {
                    l.upper("bilinear", A_BILINEAR, nu, format!("{tag} {kind} M={m} {piece:?}"), v.norm(), bound, 100.0 * ln_n);
                }
            }
        }
    }

    // weights
    let r = (nu * nu) as f64;
    let ln_r = r.ln();
    let uni = Weight::uniform(nu, r)?;
    let u = weighted_ratio(&ones, &uni, TubeMode::Horizontal)?;
    l.upper("uniform", A_UNIFORM, nu, String::new(), (u.ratio / r.powf(-0.25) - 1.0).abs(), 1.0, 0.1);
    let mut battery: Vec<(String, Weight)> = vec![("uniform".into(), uni), ("greedy ones".into(), greedy_adversarial(&ones)?)];
    for &seed in &args.seeds {
        battery.push((format!("random-1d seed={seed}"), random_one_dimensional(nu, seed)?));
    }
    if r.powf(1.0 / 6.0) >= 2.0 {
        battery.push(("weyl".into(), weyl_example_set(nu)?.capped_to(r)?));
    }
    for (tag, w) in &battery {
        let rep = weighted_ratio(&ones, w, TubeMode::Horizontal)?;
        l.upper("weighted", A_WEIGHTED, nu, tag.clone(), rep.numerator, rep.denominator, 100.0 * ln_r);
        l.lower("tube-average", A_AVERAGE, nu, tag.clone(), rep.tube.mass, w.total() / r.sqrt());
        if tag == "weyl" {
            for row in mu_regime_report(&decompose_weight_by_level(w, &ones)?, TubeMode::Horizontal)? {
                l.upper("regime", A_REGIME, nu, format!("weyl mu={}", row.mu), row.lhs, row.rhs, 100.0 * ln_r);
            }
        }
    }
    for (tag, a) in &randoms {
        let g = greedy_adversarial(a)?;
        let rep = weighted_ratio(a, &g, TubeMode::Horizontal)?;
        l.upper("weighted", A_WEIGHTED, nu, format!("greedy {tag}"), rep.numerator, rep.denominator, 100.0 * ln_r);
    }

    // counterexamples (fixed scales, independent of N)
    let mut samples = Vec::new();
    for k in [8u64, 16, 32] {
        let t = jarnik_curve(k)?;
        let size = t.support_size() as f64;
        l.lower("jarnik-support", A_JARNIK, t.n_max, format!("k={k}"), size, (t.n_max as f64).powf(2.0 / 3.0) / 10.0);
        let rep = counterexample_ratio(&t)?;
        let rr = rep.r_scale as f64;
        l.upper("lattice-tube", A_TUBE, t.n_max, format!("k={k}"), rep.tube.mass, rr.sqrt(), 4.0);
        samples.push((rr, rep.ratio));
    }
    let slope = exponent_fit(&samples).unwrap_or(0.0);
    l.lower("growth", A_GROWTH, 0, "k=8,16,32".into(), slope, 0.04);

    let violations = l.rows.iter().filter(|r| !r.pass).count();
    let mut by_name: std::collections::BTreeMap<&str, (usize, f64, f64)> = Default::default();
    for row in &l.rows {
        let e = by_name.entry(row.name).or_insert((0, 0.0, row.threshold));
        e.0 += 1;
        e.1 = e.1.max(row.constant);
    }
    let summary: Vec<_> = by_name
        .iter()
        .map(|(k, (count, max, thr))| json!({ "name": k, "rows": count, "max_constant": max, "threshold": thr }))
        .collect();
    let worst = l.rows.iter().max_by(|a, b| (a.constant / a.threshold).total_cmp(&(b.constant / b.threshold))).cloned();
    let metrics = json!({ "N": n, "rows": l.rows.len(), "violations": violations, "summary": summary });
    let params = json!({ "N": n, "seeds": args.seeds });
    let mut report = Report::new("suite", params, metrics);
    if let Some(w) = worst {
        report = report.with_ratio(w.constant, w.threshold);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &l.rows {
        w.serialize(row).map_err(weyllab::Error::from)?;
    }
    let ledger = String::from_utf8(w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?).unwrap();
    let mut out = Output { report, csv: Some(ledger.clone()), files: Vec::new(), violations };
    if let Some(p) = &args.ledger {
        out.files.push((p.clone(), ledger));
    }
    Ok(out)
}
