use rand::Rng;

use super::selection::{build_selection_matrix, SelectionMatrix};
use super::storage::{Database, StorageMatrix};
use super::SchemeParams;
use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix};
use crate::rng;

/// The user's queries for one retrieval of file `k`.
///
/// Round `r` uses randomness `U^{(r)}` (a `(N−M−T+1)K × T` matrix whose
/// columns are `U_1..U_T`). Node `n` receives `Ũ^{(r)}_n + E^{(r)}_n` where
/// `Ũ^{(r)} = U^{(r)} · G_Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    selection: SelectionMatrix,
    randomness: Vec<FieldMatrix>,
    /// `queries[round][node]`
    queries: Vec<Vec<Vec<Fe>>>,
}

impl QueryPlan {
    pub fn new(params: &SchemeParams, k: usize, randomness: Vec<FieldMatrix>) -> Result<Self> {
        let selection = build_selection_matrix(params, k)?;
        Self::with_selection(params, selection, randomness)
    }

    /// Builds queries around an already validated selection matrix.
    pub fn with_selection(
        params: &SchemeParams,
        selection: SelectionMatrix,
        randomness: Vec<FieldMatrix>,
    ) -> Result<Self> {
        if randomness.len() != params.rounds()
            || randomness.iter().any(|u| u.rows() != params.query_len() || u.cols() != params.collusion())
        {
            return Err(Error::DimensionMismatch(format!(
                "expected {} randomness matrices of {}x{}",
                params.rounds(),
                params.query_len(),
                params.collusion()
            )));
        }
        let f = params.field();
        let gq = params.query_code().generator();
        let mut queries = Vec::with_capacity(params.rounds());
        for (r, u) in randomness.iter().enumerate() {
            let mixed = u.mul(gq)?;
            let round = (0..params.servers())
                .map(|n| {
                    let mut q = mixed.column(n);
                    if let Some(i) = selection.pick(r, n) {
                        q[i] = f.add(q[i], Fe::ONE);
                    }
                    q
                })
                .collect();
            queries.push(round);
        }
        Ok(QueryPlan { selection, randomness, queries })
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, k: usize, rng: &mut R) -> Result<Self> {
        let f = params.field();
        let u = (0..params.rounds())
            .map(|_| FieldMatrix::from_fn(f, params.query_len(), params.collusion(), |_, _| rng::uniform(f, rng)))
            .collect();
        Self::new(params, k, u)
    }

    pub fn from_seed(params: &SchemeParams, k: usize, seed: u64) -> Result<Self> {
        Self::random(params, k, &mut rng::stream(seed, rng::USER_STREAM))
    }

    /// All-zero user randomness: the queries equal `E`.
    pub fn unrandomized(params: &SchemeParams, k: usize) -> Result<Self> {
        let z = FieldMatrix::zeros(params.field(), params.query_len(), params.collusion());
        Self::new(params, k, vec![z; params.rounds()])
    }

    pub fn file(&self) -> usize {
        self.selection.file()
    }

    pub fn selection(&self) -> &SelectionMatrix {
        &self.selection
    }

    pub fn randomness(&self) -> &[FieldMatrix] {
        &self.randomness
    }

    pub fn query(&self, round: usize, node: usize) -> &[Fe] {
        &self.queries[round][node]
    }

    /// Node `n`'s `M` round vectors, concatenated.
    pub fn node_queries(&self, node: usize) -> Vec<Fe> {
        self.queries.iter().flat_map(|round| round[node].iter().copied()).collect()
    }

    /// The stacked `M(N−M−T+1)K × N` query matrix.
    pub fn matrix(&self, params: &SchemeParams) -> FieldMatrix {
        let ql = params.query_len();
        FieldMatrix::from_fn(params.field(), params.rounds() * ql, params.servers(), |row, n| {
            self.queries[row / ql][n][row % ql]
        })
    }
}

/// Symbols `S_j^{(r)}` shared by all servers: `M` rounds × `M+T−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonRandomness {
    s: FieldMatrix,
}

impl CommonRandomness {
    pub fn new(params: &SchemeParams, s: FieldMatrix) -> Result<Self> {
        if s.rows() != params.rounds() || s.cols() != params.mask_len() || s.field() != params.field() {
            return Err(Error::DimensionMismatch(format!(
                "common randomness is {}x{}, expected {}x{}",
                s.rows(),
                s.cols(),
                params.rounds(),
                params.mask_len()
            )));
        }
        Ok(CommonRandomness { s })
    }

    pub fn zero(params: &SchemeParams) -> Self {
        CommonRandomness { s: FieldMatrix::zeros(params.field(), params.rounds(), params.mask_len()) }
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Self {
        let f = params.field();
        CommonRandomness { s: FieldMatrix::from_fn(f, params.rounds(), params.mask_len(), |_, _| rng::uniform(f, rng)) }
    }

    pub fn from_seed(params: &SchemeParams, seed: u64) -> Self {
        Self::random(params, &mut rng::stream(seed, rng::DEALER_STREAM))
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.s
    }

    pub fn round(&self, round: usize) -> &[Fe] {
        self.s.row(round)
    }

    /// Node `n`'s additive mask in `round`: `φ_nψ_n Σ_j S_j^{(r)} λ_n^{j−1}`.
    pub fn node_mask(&self, params: &SchemeParams, node: usize, round: usize) -> Fe {
        mask_value(params, node, self.round(round))
    }
}

fn mask_value(params: &SchemeParams, node: usize, s_row: &[Fe]) -> Fe {
    let f = params.field();
    s_row.iter().enumerate().fold(Fe::ZERO, |acc, (j, &s)| f.add(acc, f.mul(s, params.mask_coefficient(node, j))))
}

/// `A_n^{(r)} = ⟨Q_n^{(r)}, D_n⟩ + φ_nψ_n Σ_j S_j^{(r)} λ_n^{j−1}`.
pub fn node_answer(params: &SchemeParams, node: usize, query: &[Fe], shard: &[Fe], s_row: &[Fe]) -> Result<Fe> {
    if query.len() != params.query_len() || shard.len() != params.query_len() {
        return Err(Error::DimensionMismatch(format!(
            "query of length {} against shard of length {}, expected {}",
            query.len(),
            shard.len(),
            params.query_len()
        )));
    }
    if s_row.len() != params.mask_len() {
        return Err(Error::DimensionMismatch(format!("{} mask symbols, expected {}", s_row.len(), params.mask_len())));
    }
    if node >= params.servers() {
        return Err(Error::DimensionMismatch(format!("node {} does not exist", node + 1)));
    }
    let f = params.field();
    Ok(f.add(f.dot(query, shard), mask_value(params, node, s_row)))
}

/// Downloaded symbols, `values[round][node]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answers {
    values: Vec<Vec<Fe>>,
}

impl Answers {
    pub fn new(params: &SchemeParams, values: Vec<Vec<Fe>>) -> Result<Self> {
        if values.len() != params.rounds() || values.iter().any(|r| r.len() != params.servers()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} rounds of {} answers",
                params.rounds(),
                params.servers()
            )));
        }
        Ok(Answers { values })
    }

    pub fn compute(
        params: &SchemeParams,
        storage: &StorageMatrix,
        plan: &QueryPlan,
        common: &CommonRandomness,
    ) -> Result<Self> {
        let shards = storage.shards();
        let values = (0..params.rounds())
            .map(|r| {
                (0..params.servers())
                    .map(|n| node_answer(params, n, plan.query(r, n), &shards[n], common.round(r)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Answers { values })
    }

    pub fn get(&self, round: usize, node: usize) -> Fe {
        self.values[round][node]
    }

    pub fn round(&self, round: usize) -> &[Fe] {
        &self.values[round]
    }

    pub fn count(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }
}

/// `X_j^{(r)} = Σ_{t+m=j+1} ⟨U_t^{(r)}, W_m⟩`, indexed `[round][j]`.
///
/// Independent of the decoder; used to check that stage 1 recovers
/// exactly `X_j^{(r)} + S_j^{(r)}`.
pub fn compute_masked_unknowns(
    params: &SchemeParams,
    randomness: &[FieldMatrix],
    db: &Database,
) -> Result<Vec<Vec<Fe>>> {
    let w = db.matrix();
    if randomness.len() != params.rounds()
        || randomness.iter().any(|u| u.rows() != w.rows() || u.cols() != params.collusion())
    {
        return Err(Error::DimensionMismatch("randomness does not match the database".into()));
    }
    let f = params.field();
    let w_cols: Vec<Vec<Fe>> = (0..params.storage_dim()).map(|m| w.column(m)).collect();
    Ok(randomness
        .iter()
        .map(|u| {
            let mut x = vec![Fe::ZERO; params.mask_len()];
            for t in 0..params.collusion() {
                let ut = u.column(t);
                for (m, wm) in w_cols.iter().enumerate() {
                    x[t + m] = f.add(x[t + m], f.dot(&ut, wm));
                }
            }
            x
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::encode_storage;

    fn micro() -> SchemeParams {
        SchemeParams::new(2, 1, 1, 2, 3).unwrap()
    }

    #[test]
    fn zero_randomness_gives_e() {
        for (n, m, t) in [(2, 1, 1), (4, 2, 2), (7, 2, 1)] {
            let p = SchemeParams::new(n, m, t, 2, 0).unwrap();
            for k in 0..2 {
                let plan = QueryPlan::unrandomized(&p, k).unwrap();
                assert_eq!(plan.matrix(&p), *plan.selection().matrix());
            }
        }
    }

    #[test]
    fn hand_evaluated_micro_queries() {
        let p = micro();
        let f = p.field();
        let u = FieldMatrix::from_rows(f, &[[1], [2]]).unwrap();
        let plan = QueryPlan::new(&p, 0, vec![u]).unwrap();
        assert_eq!(plan.query(0, 0), &[f.elem(2), f.elem(2)]);
        assert_eq!(plan.query(0, 1), &[f.elem(1), f.elem(2)]);
    }

    #[test]
    fn seeded_plans_are_deterministic() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let a = QueryPlan::from_seed(&p, 1, 0xfeed).unwrap();
        let b = QueryPlan::from_seed(&p, 1, 0xfeed).unwrap();
        assert_eq!(a, b);
        let c = QueryPlan::from_seed(&p, 1, 0xbeef).unwrap();
        assert_ne!(a.matrix(&p), c.matrix(&p));
    }

    #[test]
    fn plan_rejects_bad_randomness_shape() {
        let p = micro();
        let u = FieldMatrix::zeros(p.field(), 3, 1);
        assert!(matches!(QueryPlan::new(&p, 0, vec![u]), Err(Error::DimensionMismatch(_))));
        assert!(QueryPlan::new(&p, 2, vec![]).is_err());
    }

    #[test]
    fn micro_answers() {
        let p = micro();
        let f = p.field();
        let s = [f.elem(2)];
        let d = [f.elem(2), f.elem(1)];
        let a1 = node_answer(&p, 0, &[f.elem(2), f.elem(2)], &d, &s).unwrap();
        let a2 = node_answer(&p, 1, &[f.elem(1), f.elem(2)], &d, &s).unwrap();
        assert_eq!((a1, a2), (f.elem(2), f.elem(0)));
        let z = node_answer(&p, 0, &[Fe::ZERO; 2], &d, &[Fe::ZERO]).unwrap();
        assert_eq!(z, Fe::ZERO);
        assert!(node_answer(&p, 0, &[Fe::ZERO; 3], &d, &s).is_err());
        assert!(node_answer(&p, 0, &[Fe::ZERO; 2], &d, &[]).is_err());
    }

    #[test]
    fn answers_expand_into_masked_sums_plus_selection() {
        // ⟨Ũ_n + E_n, D_n⟩ + mask = φψ Σ_j (X_j + S_j) λ^j + ⟨E_n, D_n⟩
        let mut spec = super::super::ParamsSpec::new(5, 2, 2, 2, 7);
        spec.phi = Some(vec![3, 1, 4, 1, 5]);
        spec.psi = Some(vec![2, 6, 5, 3, 5]);
        let p = spec.build().unwrap();
        let f = p.field();
        let mut r = rng::stream(11, 9);
        let db = Database::random(&p, &mut r);
        let storage = encode_storage(&p, &db).unwrap();
        let plan = QueryPlan::random(&p, 1, &mut r).unwrap();
        let s = CommonRandomness::random(&p, &mut r);
        let answers = Answers::compute(&p, &storage, &plan, &s).unwrap();
        let x = compute_masked_unknowns(&p, plan.randomness(), &db).unwrap();
        for round in 0..p.rounds() {
            for n in 0..p.servers() {
                let mut expect = f.dot(&plan.selection().slice(&p, round, n), &storage.shard(n));
                for j in 0..p.mask_len() {
                    let y = f.add(x[round][j], s.round(round)[j]);
                    expect = f.add(expect, f.mul(y, p.mask_coefficient(n, j)));
                }
                assert_eq!(answers.get(round, n), expect);
            }
        }
    }

    #[test]
    fn masked_unknowns_small_cases() {
        let p = micro();
        let f = p.field();
        let db = Database::from_files(&p, &[vec![f.elem(2)], vec![f.elem(1)]]).unwrap();
        let zero = vec![FieldMatrix::zeros(f, 2, 1)];
        assert_eq!(compute_masked_unknowns(&p, &zero, &db).unwrap(), vec![vec![Fe::ZERO]]);
        let u = vec![FieldMatrix::from_rows(f, &[[1], [2]]).unwrap()];
        // ⟨(1,2),(2,1)⟩ = 4 ≡ 1
        assert_eq!(compute_masked_unknowns(&p, &u, &db).unwrap(), vec![vec![f.elem(1)]]);
    }

    #[test]
    fn common_randomness_shape() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let s = CommonRandomness::from_seed(&p, 3);
        assert_eq!((s.matrix().rows(), s.matrix().cols()), (2, 3));
        assert_eq!(s, CommonRandomness::from_seed(&p, 3));
        assert!(CommonRandomness::new(&p, FieldMatrix::zeros(p.field(), 3, 2)).is_err());
    }
}
