//! Exhaustive information-theoretic audits on small instances.
//!
//! Each audit enumerates every realisation of the uniform randomness in
//! play (files `W`, user randomness `U`, common randomness `S`), builds
//! the exact distribution of what a party observes, and decides the
//! privacy condition by exact rational comparisons. Mutual information is
//! reported in bits for display only.

mod table;

pub use table::{DistTable, Entropy};

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix};
use crate::grs::check_mds;
use crate::scheme::{
    build_selection_matrix, encode_storage, Answers, CommonRandomness, Database, QueryPlan, SchemeParams,
    SelectionMatrix, StorageMatrix,
};

pub const DEFAULT_CEILING: u128 = 10_000_000;
/// Environment variable that overrides [`DEFAULT_CEILING`].
pub const CEILING_ENV: &str = "SPIR_ENUM_CEILING";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditConfig {
    /// Largest number of elementary events a single enumeration may visit.
    pub ceiling: u128,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { ceiling: DEFAULT_CEILING }
    }
}

impl AuditConfig {
    pub fn from_env() -> Self {
        let ceiling = std::env::var(CEILING_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CEILING);
        AuditConfig { ceiling }
    }
}

/// Deliberately broken variants used to show the audits have teeth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mutant {
    #[default]
    None,
    /// `U ≡ 0`: queries equal the selection matrix.
    NoRandomization,
    /// `S ≡ 0`: answers carry no mask.
    NoMask,
    /// Only `M+T−2` mask terms (`S_{M+T−1} ≡ 0`).
    ShortMask,
}

impl Mutant {
    pub fn name(self) -> &'static str {
        match self {
            Mutant::None => "none",
            Mutant::NoRandomization => "no-randomization",
            Mutant::NoMask => "no-mask",
            Mutant::ShortMask => "short-mask",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Exhaustive,
    Structural,
}

/// What an exhaustive user-privacy audit enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewKind {
    /// `(Q_𝒯, A_𝒯, D_𝒯, S)` over uniform `W, U, S`.
    Full,
    /// `Q_𝒯` over uniform `U`. The answers are a fixed function of
    /// `(Q_𝒯, D_𝒯, S)` and `(D_𝒯, S)` is independent of `(U, κ)`, so the full
    /// view's law is the same κ-independent push-forward of `law(Q_𝒯) ⊗
    /// law(D_𝒯, S)`; equality of `law(Q_𝒯 | κ)` across κ decides the full view.
    QueriesOnly,
    Structural,
    Database,
    Entropy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrivacyReport {
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub mutual_information_bits: f64,
    pub enumeration_size: u128,
    pub view: ViewKind,
    pub notes: Vec<String>,
}

impl PrivacyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl fmt::Display for PrivacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        writeln!(f, "verdict: {verdict}")?;
        writeln!(f, "view: {:?}", self.view)?;
        writeln!(f, "elementary events: {}", self.enumeration_size)?;
        writeln!(f, "mutual information: {:.6} bits", self.mutual_information_bits)?;
        if let Some(w) = &self.witness {
            writeln!(f, "witness: {w}")?;
        }
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceVerdict {
    pub independent: bool,
    /// An `(x, y)` with `P(x, y) ≠ P(x)P(y)`.
    pub witness: Option<String>,
    pub mutual_information_bits: f64,
}

/// Exact test of `P(x, y) = P(x)P(y)` for every `x`, `y` in the supports.
pub fn independence_verdict<X, Y>(joint: &DistTable<(X, Y)>) -> IndependenceVerdict
where
    X: std::hash::Hash + Eq + Clone + fmt::Debug,
    Y: std::hash::Hash + Eq + Clone + fmt::Debug,
{
    let px = joint.marginal(|(x, _)| x.clone());
    let py = joint.marginal(|(_, y)| y.clone());
    let total = joint.total() as u128;
    let mut witness = None;
    'outer: for (x, cx) in px.iter() {
        for (y, cy) in py.iter() {
            let cxy = joint.count(&(x.clone(), y.clone())) as u128;
            if cxy * total != cx as u128 * cy as u128 {
                witness = Some(format!(
                    "P(x={x:?}, y={y:?}) = {}/{} but P(x)P(y) = {}",
                    cxy,
                    total,
                    px.probability(x) * py.probability(y)
                ));
                break 'outer;
            }
        }
    }
    let mi = px.entropy().add(&py.entropy()).sub(&joint.entropy());
    IndependenceVerdict { independent: witness.is_none(), witness, mutual_information_bits: mi.bits().max(0.0) }
}

/// One realisation of all protocol randomness.
pub(crate) struct Event {
    pub db: Database,
    pub storage: StorageMatrix,
    pub plan: QueryPlan,
    pub common: CommonRandomness,
}

impl Event {
    fn answers(&self, params: &SchemeParams) -> Answers {
        Answers::compute(params, &self.storage, &self.plan, &self.common).expect("consistent event")
    }
}

/// Which randomness sources an enumeration ranges over.
#[derive(Clone, Copy, Debug)]
struct EventSpace<'a> {
    params: &'a SchemeParams,
    mutant: Mutant,
    database: bool,
    user: bool,
    common: bool,
}

impl<'a> EventSpace<'a> {
    fn new(params: &'a SchemeParams, mutant: Mutant, database: bool, user: bool, common: bool) -> Self {
        EventSpace { params, mutant, database, user, common }
    }

    fn db_symbols(&self) -> usize {
        if self.database {
            self.params.query_len() * self.params.storage_dim()
        } else {
            0
        }
    }

    fn user_symbols(&self) -> usize {
        if self.user && self.mutant != Mutant::NoRandomization {
            self.params.rounds() * self.params.query_len() * self.params.collusion()
        } else {
            0
        }
    }

    /// Free mask columns per round.
    fn mask_cols(&self) -> usize {
        match (self.common, self.mutant) {
            (false, _) | (true, Mutant::NoMask) => 0,
            (true, Mutant::ShortMask) => self.params.mask_len() - 1,
            (true, _) => self.params.mask_len(),
        }
    }

    fn common_symbols(&self) -> usize {
        self.params.rounds() * self.mask_cols()
    }

    fn free_symbols(&self) -> usize {
        self.db_symbols() + self.user_symbols() + self.common_symbols()
    }

    fn events(&self) -> u128 {
        (self.params.field().modulus() as u128).checked_pow(self.free_symbols() as u32).unwrap_or(u128::MAX)
    }

    fn check(&self, config: &AuditConfig) -> Result<u128> {
        let events = self.events();
        if events > config.ceiling {
            return Err(Error::EnumerationTooLarge { events, ceiling: config.ceiling });
        }
        Ok(events)
    }

    /// Visits every event, each with weight one.
    fn for_each(&self, selection: &SelectionMatrix, mut visit: impl FnMut(&Event)) {
        let p = self.params;
        let f = p.field();
        let q = f.modulus();
        let (nd, nu) = (self.db_symbols(), self.user_symbols());
        let cols = self.mask_cols();
        let mut digits = vec![0u32; self.free_symbols()];
        loop {
            let fe = |v: u32| f.elem(v as u64);
            let db = if self.database {
                let w =
                    FieldMatrix::from_fn(f, p.query_len(), p.storage_dim(), |r, c| fe(digits[r * p.storage_dim() + c]));
                Database::new(p, w).expect("shape")
            } else {
                Database::zero(p)
            };
            let u_digits = &digits[nd..nd + nu];
            let randomness: Vec<FieldMatrix> = (0..p.rounds())
                .map(|r| {
                    FieldMatrix::from_fn(f, p.query_len(), p.collusion(), |i, t| {
                        if nu == 0 {
                            Fe::ZERO
                        } else {
                            fe(u_digits[(r * p.query_len() + i) * p.collusion() + t])
                        }
                    })
                })
                .collect();
            let s_digits = &digits[nd + nu..];
            let s = FieldMatrix::from_fn(f, p.rounds(), p.mask_len(), |r, j| {
                if j < cols {
                    fe(s_digits[r * cols + j])
                } else {
                    Fe::ZERO
                }
            });
            let storage = encode_storage(p, &db).expect("shape");
            let plan = QueryPlan::with_selection(p, selection.clone(), randomness).expect("shape");
            let common = CommonRandomness::new(p, s).expect("shape");
            visit(&Event { db, storage, plan, common });

            // odometer
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return;
                }
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

fn values(v: &[Fe]) -> impl Iterator<Item = u32> + '_ {
    v.iter().map(|e| e.value())
}

/// The colluding view of `subset` in one event.
fn subset_view(params: &SchemeParams, event: &Event, subset: &[usize], include_answers: bool) -> Vec<u32> {
    let mut out: Vec<u32> = subset.iter().flat_map(|&n| event.plan.node_queries(n)).map(|e| e.value()).collect();
    if include_answers {
        let answers = event.answers(params);
        for r in 0..params.rounds() {
            out.extend(subset.iter().map(|&n| answers.get(r, n).value()));
        }
        for &n in subset {
            out.extend(values(&event.storage.shard(n)));
        }
        if !subset.is_empty() {
            out.extend(values(event.common.matrix().entries()));
        }
    }
    out
}

/// Exact law of a node subset's view when the user wants file `k`.
pub fn enumerate_views(
    params: &SchemeParams,
    k: usize,
    subset: &[usize],
    include_answers: bool,
    mutant: Mutant,
    config: &AuditConfig,
) -> Result<DistTable<Vec<u32>>> {
    if subset.iter().any(|&n| n >= params.servers()) {
        return Err(Error::InvalidParams("subset names a node that does not exist".into()));
    }
    let space = EventSpace::new(params, mutant, include_answers, true, include_answers);
    space.check(config)?;
    let selection = build_selection_matrix(params, k)?;
    let mut table = DistTable::new();
    space.for_each(&selection, |e| table.add(subset_view(params, e, subset, include_answers), 1));
    Ok(table)
}

fn fmt_subset(subset: &[usize]) -> String {
    format!("{{{}}}", subset.iter().map(|n| (n + 1).to_string()).join(","))
}

/// User privacy against every `T`-subset of colluding servers.
pub fn verify_user_privacy(
    params: &SchemeParams,
    mode: AuditMode,
    mutant: Mutant,
    config: &AuditConfig,
) -> Result<PrivacyReport> {
    if mode == AuditMode::Structural {
        if mutant != Mutant::None {
            return Err(Error::InvalidParams("mutants are only meaningful in exhaustive mode".into()));
        }
        // every T columns of G_Q invertible ⇒ Q_𝒯 uniform whatever E is
        let ok = check_mds(params.query_code().generator());
        return Ok(PrivacyReport {
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            witness: (!ok).then(|| "a T×T submatrix of G_Q is singular".to_string()),
            mutual_information_bits: 0.0,
            enumeration_size: 0,
            view: ViewKind::Structural,
            notes: vec![format!("checked all C({}, {}) column subsets of G_Q", params.servers(), params.collusion())],
        });
    }

    let include_answers = EventSpace::new(params, Mutant::None, true, true, true).check(config).is_ok();
    let per_k = EventSpace::new(params, mutant, include_answers, true, include_answers).check(config)?;
    let subsets: Vec<Vec<usize>> = (0..params.servers()).combinations(params.collusion()).collect();
    // joint[s] is the table of (κ, view of subset s) with κ uniform
    let mut joint: Vec<DistTable<(usize, Vec<u32>)>> = vec![DistTable::new(); subsets.len()];
    for k in 0..params.files() {
        let selection = build_selection_matrix(params, k)?;
        let space = EventSpace::new(params, mutant, include_answers, true, include_answers);
        space.for_each(&selection, |e| {
            for (s, subset) in subsets.iter().enumerate() {
                joint[s].add((k, subset_view(params, e, subset, include_answers)), 1);
            }
        });
    }
    let mut report = PrivacyReport {
        verdict: Verdict::Pass,
        witness: None,
        mutual_information_bits: 0.0,
        enumeration_size: per_k * params.files() as u128,
        view: if include_answers { ViewKind::Full } else { ViewKind::QueriesOnly },
        notes: Vec::new(),
    };
    for (subset, table) in subsets.iter().zip(&joint) {
        let v = independence_verdict(table);
        report.mutual_information_bits = report.mutual_information_bits.max(v.mutual_information_bits);
        report.notes.push(format!(
            "subset {}: {} (I = {:.6} bits)",
            fmt_subset(subset),
            if v.independent { "identical across file indexes" } else { "depends on the file index" },
            v.mutual_information_bits
        ));
        if !v.independent && report.verdict == Verdict::Pass {
            report.verdict = Verdict::Fail;
            report.witness = Some(format!("subset {}: {}", fmt_subset(subset), v.witness.unwrap_or_default()));
        }
    }
    Ok(report)
}

/// Database privacy: the user's view `(A_[1:N], Q, κ)` is independent of
/// the undesired files. The queries for other indexes are a fixed function
/// of `(Q, κ)`, so the per-κ tables cover the whole query scheme.
pub fn verify_database_privacy(params: &SchemeParams, mutant: Mutant, config: &AuditConfig) -> Result<PrivacyReport> {
    if params.files() == 1 {
        return Ok(PrivacyReport {
            verdict: Verdict::Pass,
            witness: None,
            mutual_information_bits: 0.0,
            enumeration_size: 0,
            view: ViewKind::Database,
            notes: vec!["single file: there are no other files to protect".into()],
        });
    }
    let space = EventSpace::new(params, mutant, true, true, true);
    let per_k = space.check(config)?;
    let mut report = PrivacyReport {
        verdict: Verdict::Pass,
        witness: None,
        mutual_information_bits: 0.0,
        enumeration_size: per_k * params.files() as u128,
        view: ViewKind::Database,
        notes: Vec::new(),
    };
    let mut mi_sum = 0.0;
    for k in 0..params.files() {
        let selection = build_selection_matrix(params, k)?;
        let mut joint: DistTable<(Vec<u32>, Vec<u32>)> = DistTable::new();
        space.for_each(&selection, |e| {
            let others: Vec<u32> =
                (0..params.files()).filter(|&j| j != k).flat_map(|j| e.db.file(params, j)).map(|x| x.value()).collect();
            let answers = e.answers(params);
            let mut view: Vec<u32> =
                (0..params.rounds()).flat_map(|r| values(answers.round(r)).collect::<Vec<_>>()).collect();
            view.extend(values(e.plan.matrix(params).entries()));
            joint.add((others, view), 1);
        });
        let v = independence_verdict(&joint);
        mi_sum += v.mutual_information_bits;
        report.notes.push(format!("κ = {}: I(W_other ; view) = {:.6} bits", k + 1, v.mutual_information_bits));
        if !v.independent && report.verdict == Verdict::Pass {
            report.verdict = Verdict::Fail;
            report.witness = Some(format!("κ = {}: {}", k + 1, v.witness.unwrap_or_default()));
        }
    }
    report.mutual_information_bits = mi_sum / params.files() as f64;
    Ok(report)
}

/// Entropies `H(A_𝒩 | Q_𝒩)` and `H(A_𝒩 | W_k, Q_𝒩)` for every node set of
/// `set_size`, compared exactly across the desired index.
pub fn entropy_symmetry_check(params: &SchemeParams, set_size: usize, config: &AuditConfig) -> Result<PrivacyReport> {
    if set_size > params.servers() {
        return Err(Error::InvalidParams(format!("set size {set_size} exceeds N")));
    }
    let space = EventSpace::new(params, Mutant::None, true, true, true);
    let per_run = space.check(config)?;
    let q = params.field().modulus() as u64;
    let files = params.files();
    let sets: Vec<Vec<usize>> = (0..params.servers()).combinations(set_size).collect();
    let mut report = PrivacyReport {
        verdict: Verdict::Pass,
        witness: None,
        mutual_information_bits: 0.0,
        enumeration_size: per_run * (files * sets.len()) as u128,
        view: ViewKind::Entropy,
        notes: Vec::new(),
    };
    for set in &sets {
        // cond[k'] = H(A|Q) under index k'; given[k][k'] = H(A|W_k,Q) under index k'
        let mut cond = Vec::with_capacity(files);
        let mut given = vec![Vec::with_capacity(files); files];
        for want in 0..files {
            let selection = build_selection_matrix(params, want)?;
            // outcome: (answers, queries, all files)
            let mut table: DistTable<(Vec<u32>, Vec<u32>, Vec<u32>)> = DistTable::new();
            space.for_each(&selection, |e| {
                let answers = e.answers(params);
                let a: Vec<u32> = (0..params.rounds())
                    .flat_map(|r| set.iter().map(move |&n| (r, n)))
                    .map(|(r, n)| answers.get(r, n).value())
                    .collect();
                let qv: Vec<u32> = set.iter().flat_map(|&n| e.plan.node_queries(n)).map(|x| x.value()).collect();
                table.add((a, qv, values(e.db.matrix().entries()).collect()), 1);
            });
            let hq = table.marginal(|(_, q, _)| q.clone()).entropy();
            let haq = table.marginal(|(a, q, _)| (a.clone(), q.clone())).entropy();
            cond.push(haq.sub(&hq));
            for (k, g) in given.iter_mut().enumerate() {
                let file_of = |w: &Vec<u32>| {
                    let len = params.file_len();
                    w[k * len..(k + 1) * len].to_vec()
                };
                let hwq = table.marginal(|(_, q, w)| (file_of(w), q.clone())).entropy();
                let hawq = table.marginal(|(a, q, w)| (a.clone(), file_of(w), q.clone())).entropy();
                g.push(hawq.sub(&hwq));
            }
        }
        let label = fmt_subset(set);
        report.notes.push(format!("𝒩 = {label}: H(A|Q) = [{}]", cond.iter().map(|h| h.describe(q)).join(", ")));
        if let Some(w) = (1..files).find(|&w| cond[w] != cond[0]) {
            if report.verdict == Verdict::Pass {
                report.verdict = Verdict::Fail;
                report.witness = Some(format!(
                    "𝒩 = {label}: H(A|Q) is {} for index 1 but {} for index {}",
                    cond[0].describe(q),
                    cond[w].describe(q),
                    w + 1
                ));
            }
        }
        for (k, g) in given.iter().enumerate() {
            report.notes.push(format!(
                "𝒩 = {label}: H(A|W_{},Q) = [{}]",
                k + 1,
                g.iter().map(|h| h.describe(q)).join(", ")
            ));
            if let Some(w) = (1..files).find(|&w| g[w] != g[0]) {
                if report.verdict == Verdict::Pass {
                    report.verdict = Verdict::Fail;
                    report.witness = Some(format!(
                        "𝒩 = {label}: H(A|W_{},Q) is {} for index 1 but {} for index {}",
                        k + 1,
                        g[0].describe(q),
                        g[w].describe(q),
                        w + 1
                    ));
                }
            }
        }
    }
    Ok(report)
}
