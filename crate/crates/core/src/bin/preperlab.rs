use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use preperlab::corpus::{run_scan, summary_json, write_csv, CorpusSpec, RunConfig, CSV_COLUMNS};
use preperlab::dynamics::{find_preperiodic, UnicriticalMap};
use preperlab::exactnum::{is_prime_u64, BigRat};
use preperlab::geometry::{
    energy, gamma_limit, geometry_report, refine_weights, telescoping_check, TreeMeasure, WeightVector,
};
use preperlab::heights::{
    hexagon_scan, prop84_gap, quadrilateral_scan, triple_scan, AdelicThresholds, ScanOptions, TupleScan,
};
use preperlab::report::fmt_real;
use preperlab::Error;

const SCAN_HELP: &str = "\
CSV columns, in order:
  d, c, portrait_size, max_period, lemma82_margin, coprimality_violations,
  quantization, quantization_violations, global_diameter_residual,
  top_quality, top_kind, min_prop84_gap, adelic_good_fraction,
  escape_rule_residual, f3_residual

quantization lists \"p:pass\" or \"p:fail(n)\" for each bad prime p not
dividing d with d | v_p(c), separated by ';', or \"-\" when there is none.
Empty cells mean the quantity is undefined for that map.

The CSV goes to --csv PATH, or to stdout when no path is given. With --json
the corpus summary is printed to stdout as JSON; otherwise a short text
summary goes to stderr.";

#[derive(Parser)]
#[command(
    name = "preperlab",
    version,
    about = "Rational preperiodic points of z^d + c and their arithmetic"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON output for capacity, hexagons, abc-triples and scan (portrait
    /// and geometry always print JSON).
    #[arg(long, global = true)]
    json: bool,
    /// Write the scan table to this file.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<std::path::PathBuf>,
    /// Seed for tuple sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for corpus scans.
    #[arg(long, global = true, env = "PREPERLAB_WORKERS")]
    workers: Option<usize>,
    /// Iteration cap for escape rates.
    #[arg(long = "n-max", global = true, default_value_t = 64)]
    n_max: usize,
}

#[derive(Args)]
struct MapArgs {
    /// Degree d ≥ 2.
    #[arg(short, long, default_value_t = 2)]
    d: u32,
    /// Parameter c as "a/b".
    #[arg(short, long, allow_hyphen_values = true, value_parser = parse_rat)]
    c: BigRat,
}

#[derive(Subcommand)]
enum Command {
    /// All rational preperiodic points with tails and periods.
    Portrait(MapArgs),
    /// Disk-tree geometry of the portrait at a bad prime p ∤ d.
    Geometry {
        #[command(flatten)]
        map: MapArgs,
        #[arg(short, long)]
        p: u64,
        /// ε for the level-2 equidistribution test.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Deepest level listed in the clusters.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Energies, telescoping residuals and the capacity limit of a tree measure.
    Capacity {
        #[arg(short, long, default_value_t = 2)]
        d: u32,
        /// v_p(c), negative and divisible by d.
        #[arg(long = "vp-c", allow_hyphen_values = true)]
        vp_c: i64,
        /// d² comma-separated level-2 weights summing to 1, or "uniform".
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long = "m-max", default_value_t = 5)]
        m_max: u32,
    },
    /// Ranked hexagons (or quadrilaterals) built from the portrait.
    Hexagons {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Scan quadrilaterals instead.
        #[arg(long)]
        quadrilaterals: bool,
    },
    /// abc triples from pairs of periodic points of equal period.
    AbcTriples {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Run every check over a corpus of maps.
    #[command(after_help = SCAN_HELP)]
    Scan {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        degrees: Vec<u32>,
        #[arg(long = "a-max", default_value_t = 50)]
        a_max: i64,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
        denominators: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_rat)]
        exclude: Vec<BigRat>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long = "tuple-budget", default_value_t = 20_000)]
        tuple_budget: u64,
        /// Divisor of h(c) in the good-prime condition.
        #[arg(long = "good-divisor", default_value_t = 600.0)]
        good_divisor: f64,
        /// Divisor of h(c) in the archimedean condition.
        #[arg(long = "arch-divisor", default_value_t = 800.0)]
        arch_divisor: f64,
    },
}

fn parse_rat(s: &str) -> Result<BigRat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn map_of(m: &MapArgs) -> Result<UnicriticalMap, Error> {
    UnicriticalMap::new(m.d, m.c.clone())
}

fn print_json(v: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn portrait(m: &MapArgs) -> Result<(), Error> {
    let f = map_of(m)?;
    print_json(&find_preperiodic(&f).to_json())
}

fn geometry(m: &MapArgs, p: u64, eps: f64, levels: u32) -> Result<(), Error> {
    let f = map_of(m)?;
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    let portrait = find_preperiodic(&f);
    let pts = portrait.values();
    let report = geometry_report(&f, &pts, p, eps, levels)?;
    let mut v = serde_json::to_value(&report)?;
    v["schema"] = 1.into();
    v["d"] = f.degree().into();
    v["c"] = f.c().to_string().into();
    v["n_points"] = pts.len().into();
    if pts.len() < 2 {
        v["note"] = format!("portrait has {} point(s); diameter and margin are undefined", pts.len()).into();
    }
    print_json(&v)
}

fn parse_weights(s: &str, d: u32) -> Result<WeightVector, Error> {
    if s.trim() == "uniform" {
        return Ok(WeightVector::uniform(d, 2));
    }
    let w = s
        .split(',')
        .map(|x| x.parse::<BigRat>())
        .collect::<Result<Vec<_>, _>>()?;
    WeightVector::new(d, 2, w)
}

fn capacity(d: u32, vp_c: i64, weights: &str, m_max: u32, json: bool) -> Result<(), Error> {
    if d < 2 {
        return Err(Error::InvalidDegree(d));
    }
    let k2 = parse_weights(weights, d)?;
    if vp_c >= 0 || vp_c % d as i64 != 0 {
        return Err(Error::Precondition(format!(
            "v_p(c) = {vp_c} must be negative and divisible by d = {d}"
        )));
    }
    if m_max < 2 {
        return Err(Error::Parse("--m-max must be at least 2".into()));
    }
    // Every quantity is a multiple of λ_p(c), so any prime p ∤ d will do.
    let p = (2u64..)
        .find(|&q| is_prime_u64(q) && !(d as u64).is_multiple_of(q))
        .unwrap();
    let f = UnicriticalMap::new(
        d,
        BigRat::from_i64(p as i64)
            .pow(vp_c.unsigned_abs() as u32)
            .recip()
            .unwrap(),
    )?;
    let pb = BigUint::from(p);
    let mut rows = Vec::new();
    for m in 2..=m_max {
        let e = energy(&TreeMeasure::new(refine_weights(&k2, m)?, &pb, &f)?);
        let r = telescoping_check(&k2, &f, &pb, m)?;
        rows.push((m, e, r));
    }
    let limit = gamma_limit(&k2, &f, &pb)?;
    if json {
        let v = serde_json::json!({
            "schema": 1,
            "d": d,
            "vp_c": vp_c,
            "weights": k2.weights(),
            "rows": rows.iter().map(|(m, e, r)| serde_json::json!({
                "m": m, "energy": e, "telescoping_residual": r
            })).collect::<Vec<_>>(),
            "gamma_exponent": limit,
        });
        return print_json(&v);
    }
    let mut out = io::stdout().lock();
    let ws: Vec<String> = k2.weights().iter().map(|w| w.to_string()).collect();
    writeln!(out, "d = {d}, v_p(c) = {vp_c}, k2 = ({})", ws.join(", "))?;
    writeln!(out, "{:>3}  {:<28}  telescoping residual", "m", "I(mu_k(m))")?;
    for (m, e, r) in &rows {
        writeln!(out, "{m:>3}  {:<28}  {r}", format!("{e}·λ_v(c)"))?;
    }
    writeln!(out, "log γ(mu_k) = {limit}·λ_v(c)")?;
    Ok(())
}

fn print_scan(scan: &TupleScan, json: bool, extra: Option<(&str, f64)>) -> Result<(), Error> {
    if json {
        let mut v = serde_json::to_value(scan)?;
        v["schema"] = 1.into();
        if let Some((k, x)) = extra {
            v[k] = preperlab::report::sig12(x).into();
        }
        return print_json(&v);
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{} candidates, {} evaluated{}, {} degenerate",
        scan.candidates,
        scan.evaluated,
        if scan.sampled { " (sampled)" } else { "" },
        scan.degenerate
    )?;
    for r in &scan.top {
        let coords: Vec<String> = r.coords.coords().iter().map(|x| x.to_string()).collect();
        writeln!(
            out,
            "({})  h = {}  rad = {}  quality = {}",
            coords.join(", "),
            fmt_real(r.h),
            fmt_real(r.rad),
            r.quality.map(fmt_real).unwrap_or_else(|| "undefined".into())
        )?;
    }
    if let Some(x) = scan.stats.adelic_good_fraction {
        writeln!(out, "adelically good differences: {}", fmt_real(x))?;
    }
    if let Some(x) = scan.stats.lemma82_max_margin {
        writeln!(out, "max of h(p_i − p_j) − h(c)/d − log 4: {}", fmt_real(x))?;
    }
    if let Some((k, x)) = extra {
        writeln!(out, "{k}: {}", fmt_real(x))?;
    }
    Ok(())
}

fn scan_options(g: &Global, budget: u64) -> ScanOptions {
    ScanOptions {
        budget,
        seed: g.seed,
        ..ScanOptions::default()
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Portrait(m) => portrait(m),
        Command::Geometry { map, p, eps, levels } => geometry(map, *p, *eps, *levels),
        Command::Capacity {
            d,
            vp_c,
            weights,
            m_max,
        } => capacity(*d, *vp_c, weights, *m_max, g.json),
        Command::Hexagons {
            map,
            budget,
            quadrilaterals,
        } => {
            let f = map_of(map)?;
            let portrait = find_preperiodic(&f);
            let opts = scan_options(g, *budget);
            let scan = if *quadrilaterals {
                quadrilateral_scan(&f, &portrait, &opts)?
            } else {
                hexagon_scan(&f, &portrait, &opts)?
            };
            print_scan(&scan, g.json, None)
        }
        Command::AbcTriples { map, xi, budget } => {
            if !(0.0..1.0).contains(xi) {
                return Err(Error::Precondition(format!("ξ = {xi} is outside [0, 1)")));
            }
            let f = map_of(map)?;
            let portrait = find_preperiodic(&f);
            let scan = triple_scan(&f, &portrait, &scan_options(g, *budget))?;
            let mut gap: Option<f64> = None;
            for r in &scan.top {
                let c = r.coords.coords();
                // Recover (p1, p2) from p1^d and −p2^d only through the portrait.
                for a in portrait.periodic_points() {
                    for b in portrait.periodic_points() {
                        if a.z.pow(f.degree()) == c[0] && -b.z.pow(f.degree()) == c[1] {
                            if let Ok(x) = prop84_gap(&f, &portrait, &a.z, &b.z, *xi) {
                                gap = Some(gap.map_or(x, |y: f64| y.min(x)));
                            }
                        }
                    }
                }
            }
            print_scan(&scan, g.json, gap.map(|x| ("min_prop84_gap", x)))
        }
        Command::Scan {
            degrees,
            a_max,
            denominators,
            exclude,
            eps,
            tuple_budget,
            good_divisor,
            arch_divisor,
        } => {
            let corpus = CorpusSpec {
                degrees: degrees.clone(),
                a_max: *a_max,
                denominators: denominators.clone(),
                exclude: exclude.clone(),
            };
            let config = RunConfig {
                n_max_escape: g.n_max,
                epsilons: vec![*eps],
                thresholds: AdelicThresholds {
                    good_prime: 1.0 / good_divisor,
                    arch: 1.0 / arch_divisor,
                },
                seed: g.seed,
                workers: g.workers.unwrap_or(1),
                tuple_budget: *tuple_budget,
            };
            let results = run_scan(&corpus, &config)?;
            match &g.csv {
                Some(path) => write_csv(BufWriter::new(File::create(path)?), &results)?,
                None if !g.json => write_csv(io::stdout().lock(), &results)?,
                None => {}
            }
            let summary = summary_json(&corpus, &config, &results);
            if g.json {
                print_json(&summary)
            } else {
                eprintln!(
                    "{} maps, {} points, {} coprimality violations, {} quantization violations ({} columns: {})",
                    summary["maps"],
                    summary["total_points"],
                    summary["coprimality_violations"],
                    summary["quantization_violations"],
                    CSV_COLUMNS.len(),
                    CSV_COLUMNS.join(",")
                );
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
