//! End-to-end runs per dimension: series mod p, formula fit, minimal ODEs
//! per prime, exact reconstruction and analyses.

pub mod cache;
pub mod tables;

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::diffop::{indicial_data, read_operator, DiffOperator, LocalReport, OdeFile, Point};
use crate::error::{Error, Result};
use crate::exec::{self, Policy};
use crate::field::Rationals;
use crate::guess::formula::{minimal_pair, optimal_pair, OdeFormula, OptimalPair, ScanOptions, Triple};
use crate::guess::minimal::{minimal_ode, MinimalOptions};
use crate::guess::reconstruct::{matches_candidate, ExactReconstructor};
use crate::guess::{fit_ode_formula, guess_ode_with, scan_triples, OdeCandidate};
use crate::landau::{compare_with_ode, landau_singularities, LandauComparison};
use crate::modular::nth_prime;
use crate::retprob::{return_probability, EstimateReport, IntegerRecurrence, RetProbOptions};
use crate::series::io::{read_series, series_to_string, SeriesFile};
use crate::series::{lgf_integers, lgf_scale, lgf_series_mod_with, PowerSeries};
use crate::modular::PrimeField;

pub use cache::{sha256_hex, Artifact, Cache, RunManifest, StageRecord, CACHE_ENV};
pub use tables::{verify_paper_tables, TableCell, TableReport, P11_COEFFICIENTS};

/// Scan length, guard rows and largest order for the formula fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionDefaults {
    pub terms: usize,
    pub guard: usize,
    pub q_max: usize,
}

pub fn dimension_defaults(d: usize) -> DimensionDefaults {
    let (terms, guard, q_max) = match d {
        0..=3 => (60, 10, 12),
        4 => (100, 20, 16),
        5 => (150, 20, 20),
        6 => (250, 10, 20),
        7 => (460, 20, 20),
        _ => (1700, 20, 24),
    };
    DimensionDefaults { terms, guard, q_max }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub terms: Option<usize>,
    pub guard: Option<usize>,
    pub q_max: Option<usize>,
    pub first_prime_index: usize,
    pub initial_primes: usize,
    /// Primes added per failed reconstruction attempt.
    pub grow: usize,
    pub max_primes: usize,
    /// Decimal places for the return probability; `None` skips it.
    pub digits: Option<usize>,
    pub analyses: bool,
    pub jobs: usize,
    pub policy: Policy,
    pub verbose: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            terms: None,
            guard: None,
            q_max: None,
            first_prime_index: 0,
            initial_primes: 8,
            grow: 2,
            max_primes: 64,
            digits: Some(10),
            analyses: true,
            jobs: 1,
            policy: Policy::default(),
            verbose: false,
        }
    }
}

impl PipelineOptions {
    fn resolved(&self, d: usize) -> DimensionDefaults {
        let def = dimension_defaults(d);
        DimensionDefaults {
            terms: self.terms.unwrap_or(def.terms),
            guard: self.guard.unwrap_or(def.guard),
            q_max: self.q_max.unwrap_or(def.q_max),
        }
    }

    fn log(&self, msg: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("{}", msg());
        }
    }
}

/// Formula stage output, cached as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaStage {
    pub d: usize,
    pub prime: u64,
    pub terms: usize,
    pub guard: usize,
    pub triples: Vec<Triple>,
    pub formula: OdeFormula,
    pub d_app: i64,
    pub optimal: OptimalPair,
    pub minimal: OptimalPair,
}

impl FormulaStage {
    /// Per-prime series length covering the chosen route plus guard rows.
    pub fn series_len(&self, scan_terms: usize) -> usize {
        let need = if self.direct_minimal() {
            self.minimal.terms_required
        } else {
            self.optimal.terms_required
        };
        scan_terms.max(need + self.guard)
    }

    /// Whether guessing at the minimal point is no more expensive than the
    /// optimal route.
    pub fn direct_minimal(&self) -> bool {
        self.minimal.terms_required <= self.optimal.terms_required
    }

    /// Smaller of the two term counts.
    pub fn cheapest_terms(&self) -> usize {
        self.minimal.terms_required.min(self.optimal.terms_required)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub exponents: Vec<LocalReport>,
    pub landau: LandauComparison,
    pub return_probability: Option<EstimateReport>,
}

#[derive(Clone, Debug)]
pub struct PipelineArtifacts {
    pub d: usize,
    pub series_len: usize,
    pub formula: FormulaStage,
    pub candidates: Vec<OdeCandidate>,
    pub primes_used: Vec<u64>,
    pub verify_prime: u64,
    /// θ basis, primitive.
    pub exact: DiffOperator<Rationals>,
    pub exact_sha256: String,
    pub analysis: Option<Analysis>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub d: usize,
    pub series_len: usize,
    pub formula: FormulaStage,
    pub primes_used: Vec<u64>,
    pub verify_prime: u64,
    pub order: usize,
    pub degree: usize,
    pub exact_sha256: String,
    pub max_coefficient_bits: u64,
    pub analysis: Option<Analysis>,
    pub seconds: f64,
}

impl PipelineArtifacts {
    pub fn summary(&self) -> PipelineSummary {
        PipelineSummary {
            d: self.d,
            series_len: self.series_len,
            formula: self.formula.clone(),
            primes_used: self.primes_used.clone(),
            verify_prime: self.verify_prime,
            order: self.exact.order(),
            degree: self.exact.degree(),
            exact_sha256: self.exact_sha256.clone(),
            max_coefficient_bits: self.exact.max_coefficient_bits(),
            analysis: self.analysis.clone(),
            seconds: self.seconds,
        }
    }
}

fn series_file(p: u64, n: usize) -> String {
    format!("series/p{p}-n{n}.txt")
}

fn ode_file(p: u64) -> String {
    format!("ode/p{p}.ode")
}

fn parse_mod_series(text: &str) -> Result<PowerSeries<PrimeField>> {
    match read_series(text.as_bytes())? {
        SeriesFile::Mod(_, s) => Ok(s),
        SeriesFile::Exact(..) => Err(Error::ModeMismatch),
    }
}

/// Series modulo `p`, cached.
pub fn series_stage(cache: &Cache, d: usize, p: u64, n: usize, policy: Policy) -> Result<(PowerSeries<PrimeField>, Artifact)> {
    let art = cache.stage("series", &series_file(p, n), &[format!("d={d} p={p} N={n}")], || {
        Ok(series_to_string(d, &lgf_series_mod_with(d, n, p, policy)?))
    })?;
    Ok((parse_mod_series(&art.text)?, art))
}

/// Scans `(Q, D)` at one prime and fits the formula, cached.
pub fn formula_stage(cache: &Cache, d: usize, opts: &PipelineOptions) -> Result<(FormulaStage, Artifact)> {
    let cfg = opts.resolved(d);
    let p = nth_prime(opts.first_prime_index);
    let (series, s_art) = series_stage(cache, d, p, cfg.terms, opts.policy)?;
    let inputs = vec![s_art.sha256.clone(), format!("guard={} q_max={}", cfg.guard, cfg.q_max)];
    let art = cache.stage("formula", "formula.json", &inputs, || {
        let scan = ScanOptions {
            guard: cfg.guard,
            q_max: cfg.q_max,
            policy: opts.policy,
            ..Default::default()
        };
        let triples = scan_triples(&series, &scan)?;
        let formula = fit_ode_formula(&triples)?;
        let stage = FormulaStage {
            d,
            prime: p,
            terms: cfg.terms,
            guard: cfg.guard,
            triples,
            formula,
            d_app: formula.d_app(),
            optimal: optimal_pair(&formula)?,
            minimal: minimal_pair(&formula),
        };
        serde_json::to_string_pretty(&stage).map_err(|e| Error::Parse(e.to_string()))
    })?;
    let stage: FormulaStage = serde_json::from_str(&art.text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((stage, art))
}

/// Minimal-order candidate at one prime, cached.
pub fn minimal_stage(
    cache: &Cache,
    d: usize,
    p: u64,
    fs: &FormulaStage,
    formula_sha: &str,
    policy: Policy,
) -> Result<(OdeCandidate, Artifact)> {
    let n = fs.series_len(fs.terms);
    let (series, s_art) = series_stage(cache, d, p, n, policy)?;
    let inputs = vec![formula_sha.to_string(), s_art.sha256.clone()];
    let art = cache.stage("minimal", &ode_file(p), &inputs, || {
        let cand = if fs.direct_minimal() {
            let c = guess_ode_with(&series, fs.minimal.q, fs.minimal.d, policy)?;
            if c.f() != 1 {
                return Err(Error::FormulaInconsistent(c.f()));
            }
            c
        } else {
            let mo = MinimalOptions {
                guard: fs.guard,
                policy,
                ..Default::default()
            };
            minimal_ode(&series, &fs.formula, &mo)?.minimal
        };
        Ok(cand.to_text(0))
    })?;
    Ok((OdeCandidate::read(art.text.as_bytes())?, art))
}

/// Checks that `l` reproduces the integer sequence of `LGF_d` and every residue
/// of `series`.
pub fn check_against_series(d: usize, l: &DiffOperator<Rationals>, series: &PowerSeries<PrimeField>) -> Result<()> {
    let scale = BigInt::from(lgf_scale(d));
    let rec = IntegerRecurrence::new(l, &scale);
    let n = series.truncation();
    let sing = rec.singular_indices(n);
    let seed_len = (sing.last().map_or(0, |s| s + 1) + 8).min(n);
    let seed = lgf_integers(d, seed_len);
    let u = rec.extend(&seed, n)?;
    let f = series.field;
    let s = f.from_u64(lgf_scale(d));
    let mut pw = 1u64;
    for (i, ui) in u.iter().enumerate() {
        let got = f.mul(crate::field::Field::from_bigint(&f, ui), f.inv(pw).ok_or(Error::BadPrime(f.modulus()))?);
        if got != series.coeffs[i] {
            return Err(Error::ExtensionMismatch(i));
        }
        pw = f.mul(pw, s);
    }
    Ok(())
}

fn exponent_reports(l: &DiffOperator<Rationals>) -> Result<Vec<LocalReport>> {
    let pts = [
        Point::Finite(BigRational::from_integer(0.into())),
        Point::Infinity,
        Point::Finite(BigRational::one()),
    ];
    pts.iter().map(|p| Ok(indicial_data(l, p)?.report())).collect()
}

pub fn analyse(d: usize, l: &DiffOperator<Rationals>, digits: Option<usize>) -> Result<Analysis> {
    let landau = compare_with_ode(l, &landau_singularities(d))?;
    let rp = match digits {
        Some(k) => Some(return_probability(d, k, l, &RetProbOptions::default())?.report()),
        None => None,
    };
    Ok(Analysis {
        exponents: exponent_reports(l)?,
        landau,
        return_probability: rp,
    })
}

/// Reads the exact operator stored by a previous run, if any.
pub fn cached_exact(cache: &Cache) -> Result<Option<DiffOperator<Rationals>>> {
    let Some(dir) = cache.dir() else {
        return Ok(None);
    };
    let path = dir.join("exact.ode");
    if !path.exists() {
        return Ok(None);
    }
    let m = cache.manifest()?;
    let text = std::fs::read_to_string(&path)?;
    match m.latest("exact.ode") {
        Some(r) if r.sha256 == sha256_hex(text.as_bytes()) => match read_operator(text.as_bytes())? {
            OdeFile::Exact(op) => Ok(Some(op)),
            OdeFile::Mod(_) => Err(Error::ModeMismatch),
        },
        _ => Ok(None),
    }
}

/// Full run for dimension `d`.
pub fn run_pipeline(d: usize, cache: &Cache, opts: &PipelineOptions) -> Result<PipelineArtifacts> {
    if d < 3 {
        return Err(Error::Invalid(format!("pipeline needs d >= 3, got {d}")));
    }
    let t0 = Instant::now();
    let (fs, f_art) = formula_stage(cache, d, opts)?;
    opts.log(|| {
        format!(
            "d={d}: formula (m,q,C)=({},{},{}) D_app={} optimal ({},{}) minimal ({},{})",
            fs.formula.m, fs.formula.q, fs.formula.c, fs.d_app, fs.optimal.q, fs.optimal.d, fs.minimal.q, fs.minimal.d
        )
    });
    let series_len = fs.series_len(fs.terms);
    let mut cands: Vec<(OdeCandidate, String)> = Vec::new();
    let mut next = opts.first_prime_index;
    let mut want = opts.initial_primes.max(2);
    loop {
        if want > opts.max_primes {
            return Err(Error::NeedMorePrimes(cands.len()));
        }
        let batch: Vec<u64> = (next..opts.first_prime_index + want).map(nth_prime).collect();
        next = opts.first_prime_index + want;
        let results = exec::map_slice(opts.policy, &batch, |&p| {
            minimal_stage(cache, d, p, &fs, &f_art.sha256, opts.policy)
        });
        for (p, r) in batch.iter().zip(results) {
            match r {
                Ok((c, art)) => cands.push((c, art.sha256)),
                Err(Error::BadPrime(_)) | Err(Error::SingularIndex(_)) | Err(Error::FormulaInconsistent(_)) => {
                    opts.log(|| format!("d={d}: prime {p} discarded"));
                }
                Err(e) => return Err(e),
            }
        }
        opts.log(|| format!("d={d}: {} candidates", cands.len()));
        if cands.len() >= 2 {
            let (used, verify) = cands.split_at(cands.len() - 1);
            let mut rec = ExactReconstructor::new();
            for (c, _) in used {
                rec.add(c.clone())?;
            }
            match rec.reconstruct() {
                Ok(out) if matches_candidate(&out.operator, &verify[0].0) => {
                    let (first_series, _) = series_stage(cache, d, fs.prime, fs.terms, opts.policy)?;
                    check_against_series(d, &out.operator, &first_series)?;
                    let inputs: Vec<String> = cands.iter().map(|(_, h)| h.clone()).collect();
                    let art = cache.stage("exact", "exact.ode", &inputs, || Ok(out.operator.to_text()))?;
                    let analysis = if opts.analyses {
                        Some(analyse(d, &out.operator, opts.digits)?)
                    } else {
                        None
                    };
                    if let Some(a) = &analysis {
                        let text = serde_json::to_string_pretty(a).map_err(|e| Error::Parse(e.to_string()))?;
                        cache.stage("analysis", "analysis.json", &[art.sha256.clone()], || Ok(text))?;
                    }
                    return Ok(PipelineArtifacts {
                        d,
                        series_len,
                        formula: fs,
                        candidates: cands.iter().map(|(c, _)| c.clone()).collect(),
                        primes_used: out.primes_used,
                        verify_prime: verify[0].0.p,
                        exact: out.operator,
                        exact_sha256: art.sha256,
                        analysis,
                        seconds: t0.elapsed().as_secs_f64(),
                    });
                }
                Ok(_) => opts.log(|| format!("d={d}: verification prime disagrees")),
                Err(Error::NeedMorePrimes(_)) => {}
                Err(e) => return Err(e),
            }
        }
        want += opts.grow.max(1);
    }
}
