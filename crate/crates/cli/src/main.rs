use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lgf_core::diffop::{
    indicial_data, irreducibility_probe, read_operator, symmetric_square, symmetric_square_order, DiffOperator,
    OdeFile, Point, ProbeOptions, SymSquareOptions,
};
use lgf_core::exec::{self, Policy};
use lgf_core::field::{parse_rational, rational_display, rational_mod, Rationals};
use lgf_core::guess::{
    fit_ode_formula, guess_ode, lowest_order_ode, minimal_ode, optimal_pair, reconstruct_exact, scan_triples,
    MinimalOptions, OdeCandidate, OdeFormula, ScanOptions,
};
use lgf_core::guess::formula::minimal_pair;
use lgf_core::landau::{compare_with_ode, extremal_singularities, landau_singularities, predict_order, to_f64};
use lgf_core::modular::{nth_prime, PrimeField};
use lgf_core::pipeline::{run_pipeline, verify_paper_tables, Cache, PipelineOptions};
use lgf_core::retprob::{large_d_return_expansion, return_probability, to_decimal, watson_r3, RetProbOptions};
use lgf_core::series::io::{read_series, series_to_string, SeriesFile};
use lgf_core::series::{
    generic_d_fit, generic_d_samples, integers_mod, inverse_d_expansion, lgf_series_exact, lgf_series_mod_with,
    rescaled_infinite_d_series, PowerSeries,
};

#[derive(Parser)]
#[command(name = "lgf", version, about = "Lattice Green functions of the fcc lattice: series, ODEs and analyses")]
struct Cli {
    /// Worker threads (0 keeps the default pool).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PrimeArg {
    /// Index into the descending list of 62-bit primes.
    #[arg(long, default_value_t = 0)]
    prime_index: usize,
}

impl PrimeArg {
    fn field(&self) -> Result<PrimeField> {
        Ok(PrimeField::new(nth_prime(self.prime_index))?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Series coefficients of LGF_d, exact or modulo a prime.
    GenSeries {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        terms: usize,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nullspace of the (Q, D) ansatz for a modular series.
    GuessOde {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        q: usize,
        #[arg(long = "deg")]
        deg: usize,
        /// Writes the first basis vector as an operator file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scans (Q, D, f) triples and fits the ODE formula.
    FitFormula {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 20)]
        guard: usize,
        #[arg(long, default_value_t = 20)]
        q_max: usize,
    },
    /// Minimal-order operator via the optimal one.
    MinOde {
        #[arg(long)]
        series: PathBuf,
        /// `m,q,C`; fitted from the series when absent.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value_t = 20)]
        guard: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact operator from modular ones; the last file only verifies.
    Reconstruct {
        #[arg(required = true, num_args = 2..)]
        odes: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Landau singularities, optionally compared with an exact operator.
    Landau {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Local exponents of an exact operator.
    Exponents {
        #[arg(long)]
        ode: PathBuf,
        /// Points such as `0`, `1`, `-7`, `3/2` or `inf`.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Order of the symmetric square modulo a prime.
    Symsquare {
        #[arg(long)]
        ode: PathBuf,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long, default_value_t = 11)]
        cap: usize,
        /// Permits base orders above the cap.
        #[arg(long)]
        allow_large: bool,
        /// Builds the operator instead of measuring the order.
        #[arg(long)]
        operator: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Right-factor search on series solutions modulo a prime.
    ProbeIrreducible {
        #[arg(long)]
        ode: PathBuf,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Ansatz `Q,D`.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        f0: Option<usize>,
        /// Exponent removed before expanding.
        #[arg(long)]
        gauge: Option<String>,
        #[arg(long, default_value_t = 0x9e37)]
        seed: u64,
    },
    /// Return probability, or its large-d expansion.
    Retprob {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 10)]
        digits: usize,
        #[arg(long)]
        ode: Option<PathBuf>,
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value_t = 7)]
        order: usize,
    },
    /// Generic-dimension series, 1/d expansion and the rescaled limit.
    GenericD {
        #[arg(long, default_value_t = 8)]
        terms: usize,
        #[arg(long, default_value_t = 5)]
        order: usize,
        /// Length of the rescaled series fed to the guesser.
        #[arg(long, default_value_t = 30)]
        y_terms: usize,
    },
    /// Runs the pipeline for each dimension and checks the published tables.
    VerifyTables {
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5])]
        dims: Vec<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// End-to-end run for one dimension.
    Run {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, default_value_t = 0)]
    prime_index: usize,
    #[arg(long, default_value_t = 8)]
    initial_primes: usize,
    #[arg(long, default_value_t = 10)]
    digits: usize,
    /// Cache root; defaults to `LGF_CACHE_DIR`.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

impl RunArgs {
    fn options(&self, jobs: usize) -> PipelineOptions {
        PipelineOptions {
            terms: self.terms,
            first_prime_index: self.prime_index,
            initial_primes: self.initial_primes,
            digits: Some(self.digits),
            jobs: jobs.max(1),
            verbose: self.verbose,
            ..Default::default()
        }
    }

    fn cache(&self, d: usize) -> Cache {
        match &self.cache {
            Some(root) => Cache::at(root, d),
            None => Cache::from_env(d),
        }
    }
}

fn read_series_file(path: &Path) -> Result<SeriesFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_series(BufReader::new(f))?)
}

fn mod_series(path: &Path) -> Result<PowerSeries<PrimeField>> {
    match read_series_file(path)? {
        SeriesFile::Mod(_, s) => Ok(s),
        SeriesFile::Exact(..) => bail!("{}: expected a modular series", path.display()),
    }
}

fn read_ode(path: &Path) -> Result<OdeFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_operator(BufReader::new(f))?)
}

fn exact_ode(path: &Path) -> Result<DiffOperator<Rationals>> {
    match read_ode(path)? {
        OdeFile::Exact(l) => Ok(l),
        OdeFile::Mod(_) => bail!("{}: expected an exact operator", path.display()),
    }
}

fn mod_ode(path: &Path, prime: PrimeArg) -> Result<DiffOperator<PrimeField>> {
    match read_ode(path)? {
        OdeFile::Mod(l) => Ok(l),
        OdeFile::Exact(l) => Ok(l.reduce(prime.field()?)?),
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_point(s: &str) -> Result<Point<BigRational>> {
    match s {
        "inf" | "infinity" => Ok(Point::Infinity),
        _ => Ok(Point::Finite(parse_rational(s)?)),
    }
}

fn mod_point(s: &str, f: &PrimeField) -> Result<Point<u64>> {
    Ok(match parse_point(s)? {
        Point::Infinity => Point::Infinity,
        Point::Finite(x) => Point::Finite(rational_mod(&x, f.modulus()).ok_or_else(|| anyhow!("{s} has no image mod p"))?),
    })
}

fn parse_pair(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| anyhow!("bad integer '{t}': {e}")))
        .collect()
}

fn rationals(v: &[BigRational]) -> Vec<String> {
    v.iter().map(rational_display).collect()
}

fn policy(jobs: usize) -> Policy {
    if jobs == 1 {
        Policy::Sequential
    } else {
        Policy::default()
    }
}

fn run(cli: Cli) -> Result<Value> {
    let jobs = cli.jobs;
    if jobs > 0 {
        exec::set_threads(jobs);
    }
    let policy = policy(jobs);
    Ok(match cli.command {
        Command::GenSeries {
            d,
            terms,
            exact,
            prime,
            out,
        } => {
            if d < 2 || terms == 0 {
                bail!("need d >= 2 and terms >= 1");
            }
            let text = if exact {
                series_to_string(d, &lgf_series_exact(d, terms))
            } else {
                series_to_string(d, &lgf_series_mod_with(d, terms, prime.field()?.modulus(), policy)?)
            };
            if out.is_none() {
                print!("{text}");
                return Ok(Value::Null);
            }
            write_out(&out, &text)?;
            json!({ "d": d, "terms": terms, "exact": exact, "out": out })
        }
        Command::GuessOde { series, q, deg, out } => {
            let s = mod_series(&series)?;
            let c = guess_ode(&s, q, deg)?;
            if c.f() > 0 {
                if let Some(p) = &out {
                    fs::write(p, c.to_text(0))?;
                }
            }
            json!({ "Q": q, "D": deg, "p": c.p, "f": c.f(), "pivots": c.pivots, "order": (c.f() > 0).then(|| c.operator(0).order()) })
        }
        Command::FitFormula { series, guard, q_max } => {
            let s = mod_series(&series)?;
            let triples = scan_triples(
                &s,
                &ScanOptions {
                    guard,
                    q_max,
                    policy,
                    ..Default::default()
                },
            )?;
            let formula = fit_ode_formula(&triples)?;
            json!({
                "triples": triples,
                "formula": formula,
                "d_app": formula.d_app(),
                "optimal": optimal_pair(&formula)?,
                "minimal": minimal_pair(&formula),
            })
        }
        Command::MinOde {
            series,
            formula,
            guard,
            out,
        } => {
            let s = mod_series(&series)?;
            let formula = match formula {
                Some(t) => match parse_pair(&t)?.as_slice() {
                    &[m, q, c] => OdeFormula::new(m, q, c),
                    _ => bail!("--formula expects m,q,C"),
                },
                None => fit_ode_formula(&scan_triples(
                    &s,
                    &ScanOptions {
                        guard,
                        policy,
                        ..Default::default()
                    },
                )?)?,
            };
            let m = minimal_ode(
                &s,
                &formula,
                &MinimalOptions {
                    guard,
                    policy,
                    ..Default::default()
                },
            )?;
            if let Some(p) = &out {
                fs::write(p, m.minimal.to_text(0))?;
            }
            json!({
                "formula": formula,
                "optimal": m.optimal_pair,
                "optimal_f": m.optimal.f(),
                "minimal_Q": m.minimal.q,
                "minimal_D": m.minimal.d,
                "minimal_f": m.minimal.f(),
                "order": m.minimal.operator(0).order(),
            })
        }
        Command::Reconstruct { odes, out } => {
            let mut cands = Vec::with_capacity(odes.len());
            for p in &odes {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                cands.push(OdeCandidate::read(BufReader::new(f))?);
            }
            let extra = cands.pop().unwrap();
            let r = reconstruct_exact(&cands, &extra)?;
            if let Some(p) = &out {
                fs::write(p, r.operator.to_text())?;
            }
            json!({
                "order": r.operator.order(),
                "degree": r.operator.degree(),
                "primes_used": r.primes_used,
                "verified_with": extra.p,
                "discarded": r.discarded,
                "max_coefficient_bits": r.operator.max_coefficient_bits(),
            })
        }
        Command::Landau { d, compare } => {
            if d < 3 {
                bail!("d must be at least 3");
            }
            let table = landau_singularities(d);
            let mut v = json!({
                "table": table,
                "extremal": extremal_singularities(d),
                "predicted_order": predict_order(d),
            });
            if let Some(p) = compare {
                v["comparison"] = serde_json::to_value(compare_with_ode(&exact_ode(&p)?, &table)?)?;
            }
            v
        }
        Command::Exponents { ode, at } => {
            let l = exact_ode(&ode)?;
            let reports = at
                .iter()
                .map(|s| Ok(indicial_data(&l, &parse_point(s)?)?.report()))
                .collect::<Result<Vec<_>>>()?;
            serde_json::to_value(reports)?
        }
        Command::Symsquare {
            ode,
            prime,
            cap,
            allow_large,
            operator,
            seed,
            out,
        } => {
            let l = mod_ode(&ode, prime)?;
            let opts = SymSquareOptions { cap, allow_large };
            let order = if operator {
                let s = symmetric_square(&l, &opts)?;
                if let Some(p) = &out {
                    fs::write(p, s.to_text())?;
                }
                s.order()
            } else {
                symmetric_square_order(&l, &opts, &mut ChaCha8Rng::seed_from_u64(seed))?
            };
            let r = l.order();
            json!({ "base_order": r, "generic_order": r * (r + 1) / 2, "order": order, "p": l.field.modulus() })
        }
        Command::ProbeIrreducible {
            ode,
            prime,
            at,
            samples,
            pair,
            f0,
            gauge,
            seed,
        } => {
            let l = mod_ode(&ode, prime)?;
            let f = l.field;
            let pair = match pair {
                Some(t) => match parse_pair(&t)?.as_slice() {
                    &[q, d] if q >= 0 && d >= 0 => Some((q as usize, d as usize)),
                    _ => bail!("--pair expects Q,D"),
                },
                None => None,
            };
            let gauge = gauge
                .map(|g| rational_mod(&parse_rational(&g)?, f.modulus()).ok_or_else(|| anyhow!("gauge has no image mod p")))
                .transpose()?;
            let opts = ProbeOptions {
                samples,
                seed,
                pair,
                f0,
                gauge,
                policy,
                ..Default::default()
            };
            serde_json::to_value(irreducibility_probe(&l, &mod_point(&at, &f)?, &opts)?)?
        }
        Command::Retprob {
            d,
            digits,
            ode,
            asymptotic,
            order,
        } => {
            if asymptotic {
                let g = generic_d_fit(&generic_d_samples(order + 1), order + 1)?;
                let e = large_d_return_expansion(&g, order)?;
                let mut v = json!({ "coefficients": e.display(), "rescaled": e.rescaled().iter().map(BigInt::to_string).collect::<Vec<_>>() });
                if let Some(d) = d {
                    let (sum, err) = e.optimal_truncation(d as i64);
                    v["at_d"] = json!({
                        "d": d,
                        "value": rational_display(&sum),
                        "approx": format!("{:.12}", to_f64(&sum)),
                        "smallest_term": rational_display(&err),
                    });
                }
                v
            } else {
                let d = d.ok_or_else(|| anyhow!("--d is required"))?;
                let ode = ode.ok_or_else(|| anyhow!("--ode is required"))?;
                let l = exact_ode(&ode)?;
                let est = return_probability(d, digits, &l, &RetProbOptions::default())?;
                let mut v = serde_json::to_value(est.report())?;
                if d == 3 {
                    v["watson"] = json!(to_decimal(&watson_r3(digits + 5).value, digits));
                }
                v
            }
        }
        Command::GenericD { terms, order, y_terms } => {
            let n = terms.max(order + 1).max(y_terms);
            let g = generic_d_fit(&generic_d_samples(n), n)?;
            let inv = inverse_d_expansion(&g, order)?;
            let r = large_d_return_expansion(&g, order.max(2))?;
            let y = rescaled_infinite_d_series(&g, y_terms)?;
            let f = PrimeField::new(nth_prime(0))?;
            let ys = PowerSeries::new(f, integers_mod(&y, f));
            let op = lowest_order_ode(&ys, 4, 5, policy)?;
            json!({
                "numerators": g.numer.iter().take(terms).map(|p| rationals(p)).collect::<Vec<_>>(),
                "inverse_d": inv.coeffs.iter().map(|p| rationals(p)).collect::<Vec<_>>(),
                "return_expansion": r.display(),
                "y_series": y.iter().map(BigInt::to_string).collect::<Vec<_>>(),
                "y_operator": op.map(|c| json!({ "Q": c.q, "D": c.d, "f": c.f(), "order": c.operator(0).order() })),
            })
        }
        Command::VerifyTables { dims, run } => {
            let mut runs = Vec::new();
            for d in dims {
                runs.push(run_pipeline(d, &run.cache(d), &run.options(jobs))?);
            }
            let report = verify_paper_tables(&runs)?;
            json!({ "all_pass": report.all_pass(), "cells": report.cells })
        }
        Command::Run { d, run } => {
            if d < 3 {
                bail!("d must be at least 3");
            }
            serde_json::to_value(run_pipeline(d, &run.cache(d), &run.options(jobs))?.summary())?
        }
    })
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Value::Null) => {}
        Ok(v) => println!("{}", serde_json::to_string_pretty(&v).expect("serializable")),
        Err(e) => {
            let v = json!({ "error": format!("{e:#}") });
            eprintln!("{}", serde_json::to_string_pretty(&v).unwrap());
            std::process::exit(1);
        }
    }
}
