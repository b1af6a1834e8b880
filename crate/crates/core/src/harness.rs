//! Orchestration: a JSONL count cache, the congruence sweeps, the charpoly
//! and Picard pipelines, and the reproduction reports.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::branchgeom::{self, Family, FiberSpec, GeomError};
use crate::counter::{self, CountError, CountOptions, CountRecord, Method};
use crate::ffield::is_prime;
use crate::picard_rm::{self, PicardError, PicardReport, Reduction, RmCandidates};
use crate::poly::rat;
use crate::zeta::{self, CharPolyPair, TranscendentalPoly, ZetaError};
use crate::RatPoly;

/// Stamped on every cache line; entries from other versions are ignored.
pub const ENGINE_VERSION: &str = "k3rm-count-1";

pub const CACHE_FILE: &str = "counts.jsonl";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cache line {line} is malformed: {reason}")]
    CacheCorrupt { line: usize, reason: String },
    #[error("cache conflict for {key}: stored ({stored_prime}, {stored_k3}), computed ({new_prime}, {new_k3})")]
    CacheConflict { key: String, stored_prime: u64, stored_k3: u64, new_prime: u64, new_k3: u64 },
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub family: Family,
    pub p: u64,
    pub t: u64,
    pub k: u32,
    pub method: Method,
}

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/p={}/t={}/k={}/{}", self.family, self.p, self.t, self.k, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub n_prime: u64,
    pub n_k3: u64,
    pub engine_version: String,
}

/// On-disk shape: fixed key order, every integer a decimal string.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheLine {
    family: Family,
    p: String,
    t: String,
    k: String,
    method: Method,
    n_prime: String,
    n_k3: String,
    engine_version: String,
}

impl CacheEntry {
    pub fn from_record(r: &CountRecord) -> Self {
        CacheEntry {
            key: CacheKey { family: r.fiber.family, p: r.fiber.p, t: r.fiber.t, k: r.k, method: r.method },
            n_prime: r.n_prime,
            n_k3: r.n_k3,
            engine_version: ENGINE_VERSION.to_string(),
        }
    }

    pub fn to_record(&self) -> Result<CountRecord, HarnessError> {
        Ok(CountRecord {
            fiber: FiberSpec::new(self.key.family, self.key.p, self.key.t)?,
            k: self.key.k,
            n_prime: self.n_prime,
            n_k3: self.n_k3,
            method: self.key.method,
            wall_time_secs: 0.0,
        })
    }

    pub fn to_json_line(&self) -> String {
        let line = CacheLine {
            family: self.key.family,
            p: self.key.p.to_string(),
            t: self.key.t.to_string(),
            k: self.key.k.to_string(),
            method: self.key.method,
            n_prime: self.n_prime.to_string(),
            n_k3: self.n_k3.to_string(),
            engine_version: self.engine_version.clone(),
        };
        serde_json::to_string(&line).expect("plain strings serialize")
    }

    pub fn parse_json_line(s: &str) -> Result<Self, String> {
        let l: CacheLine = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let int = |field: &str, v: &str| v.parse::<u64>().map_err(|e| format!("{field}: {e}"));
        Ok(CacheEntry {
            key: CacheKey {
                family: l.family,
                p: int("p", &l.p)?,
                t: int("t", &l.t)?,
                k: int("k", &l.k)?.try_into().map_err(|_| "k out of range".to_string())?,
                method: l.method,
            },
            n_prime: int("n_prime", &l.n_prime)?,
            n_k3: int("n_k3", &l.n_k3)?,
            engine_version: l.engine_version,
        })
    }
}

/// Append-only JSONL store of counts.
pub struct CountCache {
    path: PathBuf,
    entries: HashMap<CacheKey, CacheEntry>,
}

impl CountCache {
    /// Loads `dir/counts.jsonl`, creating the directory if needed.
    pub fn open(dir: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let mut entries = HashMap::new();
        if path.exists() {
            for (n, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let e = CacheEntry::parse_json_line(&line)
                    .map_err(|reason| HarnessError::CacheCorrupt { line: n + 1, reason })?;
                if e.engine_version == ENGINE_VERSION {
                    entries.insert(e.key, e);
                }
            }
        }
        Ok(CountCache { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: &CacheKey) -> Option<&CacheEntry> {
        self.entries.get(key)
    }

    /// Writes one line and flushes. Re-appending an identical entry is a
    /// no-op; a differing one is a [`HarnessError::CacheConflict`].
    pub fn append(&mut self, entry: CacheEntry) -> Result<CacheEntry, HarnessError> {
        if let Some(old) = self.entries.get(&entry.key) {
            if old.n_prime != entry.n_prime || old.n_k3 != entry.n_k3 {
                return Err(HarnessError::CacheConflict {
                    key: entry.key.to_string(),
                    stored_prime: old.n_prime,
                    stored_k3: old.n_k3,
                    new_prime: entry.n_prime,
                    new_k3: entry.n_k3,
                });
            }
            return Ok(old.clone());
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", entry.to_json_line())?;
        f.flush()?;
        self.entries.insert(entry.key, entry.clone());
        Ok(entry)
    }
}

/// Counts through an optional cache, tallying how many were computed.
pub struct CountProvider {
    cache: Option<Mutex<CountCache>>,
    pub options: CountOptions,
    computed: AtomicU64,
}

impl CountProvider {
    pub fn new(cache: Option<CountCache>, options: CountOptions) -> Self {
        CountProvider { cache: cache.map(Mutex::new), options, computed: AtomicU64::new(0) }
    }

    pub fn uncached() -> Self {
        Self::new(None, CountOptions::default())
    }

    /// Number of counts actually computed (cache misses).
    pub fn computed(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn count(&self, fiber: &FiberSpec, k: u32, method: Method) -> Result<CountRecord, HarnessError> {
        let key = CacheKey { family: fiber.family, p: fiber.p, t: fiber.t, k, method };
        if let Some(cache) = &self.cache {
            if let Some(e) = cache.lock().unwrap().lookup(&key) {
                return e.to_record();
            }
        }
        let record = counter::count_k3(fiber, k, method, &self.options)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        if let Some(cache) = &self.cache {
            cache.lock().unwrap().append(CacheEntry::from_record(&record))?;
        }
        Ok(record)
    }
}

/// Primes `p <= bound` by trial division.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (3..=bound).filter(|&p| is_prime(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub p: u64,
    pub t: u64,
    pub observed: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: Family,
    pub modulus: u64,
    pub residues: Vec<u64>,
    pub p_max: u64,
    pub primes: Vec<u64>,
    pub fibers_checked: u64,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const NAIVE_SWEEP_LIMIT: u64 = 10_000;
pub const FIBRED_SWEEP_LIMIT: u64 = 100_000;

/// Checks `#X_t(F_p)` against the family's formula for every good `t` and
/// every prime `p <= p_max` in the congruence classes.
pub fn rm_sweep(
    family: Family,
    p_max: u64,
    method: Method,
    provider: &CountProvider,
) -> Result<SweepReport, HarnessError> {
    let limit = match method {
        Method::Naive => NAIVE_SWEEP_LIMIT,
        Method::Fibration => FIBRED_SWEEP_LIMIT,
    };
    if p_max > limit {
        return Err(HarnessError::BadParameter(format!("p_max {p_max} exceeds {limit} for the {method} engine")));
    }
    if method == Method::Fibration && family != Family::Qw5 {
        return Err(CountError::WrongFamily(family).into());
    }
    let (modulus, residues) = match family {
        Family::Qw5 => (5, vec![2, 3]),
        Family::Qw2 => (8, vec![3, 5]),
    };
    let primes: Vec<u64> = primes_up_to(p_max).into_iter().filter(|&p| family.in_congruence_class(p)).collect();
    let mut fibers = Vec::new();
    for &p in &primes {
        for t in 0..p {
            if branchgeom::good_fiber(family, p, t)? {
                fibers.push(FiberSpec::new(family, p, t)?);
            }
        }
    }
    let results: Vec<Result<Option<SweepFailure>, HarnessError>> = fibers
        .par_iter()
        .map(|f| {
            let r = provider.count(f, 1, method)?;
            let expected = family.expected_k3_count(f.p);
            Ok((r.n_k3 != expected).then_some(SweepFailure { p: f.p, t: f.t, observed: r.n_k3, expected }))
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    Ok(SweepReport { family, modulus, residues, p_max, primes, fibers_checked: fibers.len() as u64, failures })
}

/// Output of the charpoly pipeline for one fibre.
#[derive(Debug, Clone)]
pub struct CharPolyRun {
    pub fiber: FiberSpec,
    pub counts: Vec<CountRecord>,
    pub charpoly: CharPolyPair,
    pub transcendental: TranscendentalPoly,
    /// `k` values whose counts were not needed to fix the polynomial.
    pub held_out: Vec<u32>,
}

/// Counts `k = 1..=kmax` (at least 3), adds `k = 4` if the sign of the
/// functional equation is not forced or `verify` is set, and assembles.
pub fn charpoly_pipeline(
    fiber: &FiberSpec,
    kmax: u32,
    verify: bool,
    method: Method,
    provider: &CountProvider,
) -> Result<CharPolyRun, HarnessError> {
    let arrangement = branchgeom::lines(fiber)?;
    let mut counts = Vec::new();
    for k in 1..=kmax.max(3) {
        counts.push(provider.count(fiber, k, method)?);
    }
    let cp = match zeta::assemble_charpoly(fiber, &counts[..3], &arrangement.sigma) {
        Ok(cp) => {
            if verify && counts.len() < 4 {
                counts.push(provider.count(fiber, 4, method)?);
            }
            if counts.len() > 3 {
                zeta::assemble_charpoly(fiber, &counts, &arrangement.sigma)?;
            }
            cp
        }
        Err(ZetaError::AmbiguousSign { .. }) => {
            if counts.len() < 4 {
                counts.push(provider.count(fiber, 4, method)?);
            }
            zeta::assemble_charpoly(fiber, &counts, &arrangement.sigma)?
        }
        Err(e) => return Err(e.into()),
    };
    let used = if cp.unknown_factor.coeff(3) == BigInt::from(0) { 4 } else { 3 };
    let held_out = counts.iter().map(|c| c.k).filter(|&k| k > used).collect();
    let transcendental = zeta::split_transcendental(&cp);
    Ok(CharPolyRun { fiber: *fiber, counts, charpoly: cp, transcendental, held_out })
}

/// Everything the Picard report needs from one reduction.
#[derive(Debug, Clone)]
pub struct ReductionRun {
    pub run: CharPolyRun,
    pub reduction: Reduction,
    pub rm: Option<RmCandidates>,
}

pub fn reduction_pipeline(fiber: &FiberSpec, provider: &CountProvider) -> Result<ReductionRun, HarnessError> {
    let run = charpoly_pipeline(fiber, 3, false, Method::Naive, provider)?;
    let rank = picard_rm::geometric_picard_rank(&run.transcendental);
    let disc = picard_rm::artin_tate_disc_class(&run.charpoly, &run.transcendental)?;
    let rm = picard_rm::rm_quadratic_candidates(&run.transcendental).ok();
    let reduction = Reduction { p: fiber.p, t: fiber.t, rank, disc };
    Ok(ReductionRun { run, reduction, rm })
}

/// Van Luijk's comparison of two reductions. The `delta` candidates come
/// from the reductions where `chi^tr_{p^n}` is a square for no `n <= 2`.
pub fn picard_pipeline(
    first: &FiberSpec,
    second: &FiberSpec,
    rm_certificate: bool,
    provider: &CountProvider,
) -> Result<(PicardReport, [ReductionRun; 2]), HarnessError> {
    let a = reduction_pipeline(first, provider)?;
    let b = reduction_pipeline(second, provider)?;
    let mut report = picard_rm::rank_and_field_bounds([a.reduction.clone(), b.reduction.clone()], 16, rm_certificate)?;
    let informative: Vec<&RmCandidates> =
        [&a, &b].iter().filter_map(|r| r.rm.as_ref()).filter(|c| c.square_tests.iter().all(|&(_, sq)| !sq)).collect();
    if let Some(first) = informative.first() {
        let mut deltas = first.deltas.clone();
        for other in &informative[1..] {
            deltas.retain(|d| other.deltas.contains(d));
        }
        report.delta_candidates = deltas;
        report.galois_group = Some(first.galois_group);
    }
    Ok((report, [a, b]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DicksonFailure {
    pub p: u64,
    pub v0: u64,
    pub v1: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DicksonReport {
    pub p_max: u64,
    pub primes: Vec<u64>,
    pub pairs_checked: u64,
    pub failures: Vec<DicksonFailure>,
}

/// For every `p = 2, 3 mod 5` up to `p_max` and every `(v0, v1)` in `F_p^2`:
/// the normalized quintic is the Dickson polynomial and `P` permutes `F_p`.
pub fn dickson_suite(p_max: u64) -> Result<DicksonReport, HarnessError> {
    if p_max > counter::PERMUTATION_TEST_LIMIT {
        return Err(HarnessError::BadParameter(format!("p_max {p_max} exceeds {}", counter::PERMUTATION_TEST_LIMIT)));
    }
    let primes: Vec<u64> = primes_up_to(p_max).into_iter().filter(|&p| Family::Qw5.in_congruence_class(p)).collect();
    let per_prime: Vec<(u64, Vec<DicksonFailure>)> = primes
        .par_iter()
        .map(|&p| {
            let field = crate::ffield::make_field(p, 1).expect("p is an odd prime");
            let zero = field.zero();
            let mut failures = Vec::new();
            for v0 in 0..p {
                for v1 in 0..p {
                    let fail = |reason: String| DicksonFailure { p, v0, v1, reason };
                    let form = match counter::QuinticFiberForm::new(&zero, &field.from_u64(v0), &field.from_u64(v1)) {
                        Ok(f) => f,
                        Err(e) => {
                            failures.push(fail(e.to_string()));
                            continue;
                        }
                    };
                    if let Err(e) = counter::dickson_normalize(&form) {
                        failures.push(fail(e.to_string()));
                    }
                    match counter::is_permutation_polynomial(&form.coeffs) {
                        Ok(true) => {}
                        Ok(false) => failures.push(fail("not a permutation polynomial".into())),
                        Err(e) => failures.push(fail(e.to_string())),
                    }
                }
            }
            (p * p, failures)
        })
        .collect();
    let pairs_checked = per_prime.iter().map(|x| x.0).sum();
    let failures = per_prime.into_iter().flat_map(|x| x.1).collect();
    Ok(DicksonReport { p_max, primes, pairs_checked, failures })
}

/// One checked value of a reproduction report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub observed: String,
    pub expected: String,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(label: impl Into<String>, observed: impl ToString, expected: impl ToString) -> Self {
        let (observed, expected) = (observed.to_string(), expected.to_string());
        ReportRow { label: label.into(), pass: observed == expected, observed, expected }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub target: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn render_table(&self) -> String {
        let w = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.target);
        for r in &self.rows {
            let mark = if r.pass { "PASS" } else { "FAIL" };
            out += &format!("  {mark}  {:<w$}  {}", r.label, r.observed);
            if !r.pass {
                out += &format!("  (expected {})", r.expected);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Lemma65,
    Example18,
    Example51,
}

impl std::str::FromStr for Target {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lemma6.5" => Ok(Target::Lemma65),
            "example1.8" => Ok(Target::Example18),
            "example5.1" => Ok(Target::Example51),
            other => Err(HarnessError::BadParameter(format!("unknown target {other:?}"))),
        }
    }
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Lemma65 => "lemma6.5",
            Target::Example18 => "example1.8",
            Target::Example51 => "example5.1",
        }
    }
}

fn quartic(c: [(i64, i64); 5]) -> RatPoly {
    RatPoly::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
}

/// `Z^4 - 4/3 Z^2 + 1`.
pub fn printed_chi_tr_3() -> RatPoly {
    quartic([(1, 1), (0, 1), (-4, 3), (0, 1), (1, 1)])
}

/// `Z^4 - 14/19 Z^3 + 34/19 Z^2 - 14/19 Z + 1`.
pub fn printed_chi_tr_19() -> RatPoly {
    quartic([(1, 1), (-14, 19), (34, 19), (-14, 19), (1, 1)])
}

fn reduction_rows(report: &PicardReport, runs: &[ReductionRun; 2]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (r, printed, disc) in [(&runs[0], printed_chi_tr_3(), -1), (&runs[1], printed_chi_tr_19(), -11)] {
        let p = r.reduction.p;
        rows.push(ReportRow::new(format!("chi^tr_{p}"), &r.run.transcendental.chi_tr, &printed));
        rows.push(ReportRow::new(format!("rank (p={p}, t={})", r.reduction.t), r.reduction.rank, 18));
        rows.push(ReportRow::new(format!("disc class (p={p})"), &r.reduction.disc, disc));
    }
    let deltas: Vec<String> = report.delta_candidates.iter().map(ToString::to_string).collect();
    rows.push(ReportRow::new("delta set", format!("{{{}}}", deltas.join(", ")), "{5}"));
    let galois = report.galois_group.map(|g| g.to_string()).unwrap_or_else(|| "-".into());
    rows.push(ReportRow::new("Gal(chi^tr_19)", galois, "D4"));
    rows
}

pub fn reproduce(target: Target, provider: &CountProvider) -> Result<Report, HarnessError> {
    let tau1 = FiberSpec::new(Family::Qw5, 3, 0)?;
    let tau2 = FiberSpec::new(Family::Qw5, 19, 15)?;
    let rows = match target {
        Target::Lemma65 => {
            let (report, runs) = picard_pipeline(&tau1, &tau2, false, provider)?;
            reduction_rows(&report, &runs)
        }
        Target::Example18 => {
            let sweep = rm_sweep(Family::Qw5, 100, Method::Fibration, provider)?;
            let (report, runs) = picard_pipeline(&tau1, &tau2, true, provider)?;
            let mut rows = vec![ReportRow::new("qw5 sweep failures (p <= 100)", sweep.failures.len(), 0)];
            rows.extend(reduction_rows(&report, &runs));
            rows.push(ReportRow::new("rank Pic (generic)", format!("{:?}", report.rank_interval), "(16, 16)"));
            rows.push(ReportRow::new("[E:Q]", format!("{:?}", report.e_degree), "Some(2)"));
            rows
        }
        Target::Example51 => {
            let sweep = rm_sweep(Family::Qw2, 50, Method::Naive, provider)?;
            let fiber = FiberSpec::new(Family::Qw2, 5, 1)?;
            let arr = branchgeom::lines(&fiber)?;
            let rec = provider.count(&fiber, 1, Method::Naive)?;
            vec![
                ReportRow::new("qw2 sweep failures (p <= 50)", sweep.failures.len(), 0),
                ReportRow::new("sigma (p=5, t=1)", arr.sigma.cycle_notation(), "(12)(34)(5)(6)"),
                ReportRow::new("#X'(F_5)", rec.n_prime, 31),
                ReportRow::new("#X(F_5)", rec.n_k3, 46),
            ]
        }
    };
    Ok(Report { target: target.name().into(), rows })
}

/// `"num/den"` strings, ascending.
pub fn rat_poly_json(p: &RatPoly) -> Value {
    Value::Array(p.coeffs().iter().map(|c| Value::String(c.to_string())).collect())
}

pub fn charpoly_json(run: &CharPolyRun) -> Value {
    let cp = &run.charpoly;
    json!({
        "fiber": run.fiber,
        "counts": run.counts.iter().map(|c| json!({"k": c.k, "n_prime": c.n_prime.to_string(), "n_k3": c.n_k3.to_string()})).collect::<Vec<_>>(),
        "held_out_k": run.held_out,
        "untwisted": cp.untwisted.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "twisted": rat_poly_json(&cp.twisted),
        "sign": cp.sign,
        "cyclotomic_factors": run.transcendental.removed.iter().map(|&(d, m)| json!({"d": d, "multiplicity": m})).collect::<Vec<_>>(),
        "chi_tr": rat_poly_json(&run.transcendental.chi_tr),
        "chi_tr_display": run.transcendental.chi_tr.to_string(),
        "unit_circle_defect": cp.unit_circle_defect(),
    })
}
