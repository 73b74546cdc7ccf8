use super::query::{Answers, QueryPlan};
use super::SchemeParams;
use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix};

/// Intermediate values produced while decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeTrace {
    /// Stage-1 solutions `X_j^{(r)} + S_j^{(r)}`, indexed `[round][j]`.
    pub masked_sums: Vec<Vec<Fe>>,
    /// `⟨E_n^{(r)}, D_n⟩` for each active node, in recovery-matrix order.
    pub retrieved: Vec<Fe>,
    pub file: Vec<Fe>,
}

/// The `N × N` system for one round: masked-sum columns `φ_nψ_nλ_n^j`,
/// then one unit column per active node.
pub fn round_system(params: &SchemeParams, active: &[usize]) -> FieldMatrix {
    let n = params.servers();
    let ml = params.mask_len();
    FieldMatrix::from_fn(params.field(), n, ml + active.len(), |row, col| {
        if col < ml {
            params.mask_coefficient(row, col)
        } else if active[col - ml] == row {
            Fe::ONE
        } else {
            Fe::ZERO
        }
    })
}

pub fn decode(params: &SchemeParams, plan: &QueryPlan, answers: &Answers) -> Result<Vec<Fe>> {
    decode_with_trace(params, plan, answers).map(|t| t.file)
}

pub fn decode_with_trace(params: &SchemeParams, plan: &QueryPlan, answers: &Answers) -> Result<DecodeTrace> {
    let ml = params.mask_len();
    let mut masked_sums = Vec::with_capacity(params.rounds());
    let mut retrieved = Vec::with_capacity(params.file_len());
    for r in 0..params.rounds() {
        let active = plan.selection().active_nodes(r);
        let system = round_system(params, &active);
        if system.cols() != params.servers() {
            return Err(Error::SingularMatrix);
        }
        let solution = system.solve(answers.round(r))?;
        masked_sums.push(solution[..ml].to_vec());
        retrieved.extend_from_slice(&solution[ml..]);
    }
    let file = plan.selection().recovery_matrix(params).solve(&retrieved)?;
    Ok(DecodeTrace { masked_sums, retrieved, file })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{encode_storage, CommonRandomness, Database};

    #[test]
    fn micro_decode() {
        let p = SchemeParams::new(2, 1, 1, 2, 3).unwrap();
        let f = p.field();
        let u = FieldMatrix::from_rows(f, &[[1], [2]]).unwrap();
        let plan = QueryPlan::new(&p, 0, vec![u]).unwrap();
        let answers = Answers::new(&p, vec![vec![f.elem(2), f.elem(0)]]).unwrap();
        assert_eq!(decode(&p, &plan, &answers).unwrap(), vec![f.elem(2)]);
        // stage 1 system: columns (mask, unit at node 1)
        let sys = round_system(&p, &[0]);
        assert_eq!(sys, FieldMatrix::from_rows(f, &[[1, 1], [1, 0]]).unwrap());
    }

    #[test]
    fn zero_database_decodes_to_zero() {
        for (n, m, t) in [(2, 1, 1), (4, 2, 2), (6, 2, 1), (8, 3, 2)] {
            let p = SchemeParams::new(n, m, t, 2, 0).unwrap();
            let storage = encode_storage(&p, &Database::zero(&p)).unwrap();
            for k in 0..2 {
                let plan = QueryPlan::from_seed(&p, k, 99).unwrap();
                let s = CommonRandomness::from_seed(&p, 5);
                let a = Answers::compute(&p, &storage, &plan, &s).unwrap();
                assert_eq!(decode(&p, &plan, &a).unwrap(), vec![Fe::ZERO; p.file_len()]);
            }
        }
    }
}
