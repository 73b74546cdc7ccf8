//! Selection matrix `E`.
//!
//! `E` has `M` round blocks of `(N−M−T+1)K` rows and one column per node.
//! In each round a node's slice is either zero or a unit vector `e_i` that
//! picks row `i` of the desired file's block. Every construction goes
//! through [`SelectionMatrix::validate`], which enforces:
//!
//! * (E1) each round slice is zero or a single unit vector inside file `k`'s block;
//! * (E2) each round has exactly `N−M−T+1` nonzero slices;
//! * (E3) each file row is picked at exactly `M` distinct nodes over the rounds;
//! * (E4) the resulting `L × L` recovery system is invertible.

use super::{SchemeParams, SelectionCase};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionMatrix {
    file: usize,
    dense: FieldMatrix,
    /// `picks[round][node]`: index into the query vector, if any.
    picks: Vec<Vec<Option<usize>>>,
}

/// Writes an `M`-round cyclic ladder onto columns `first..first+M`.
///
/// Column `first + c` picks `base + ((r − c) mod M)` in round `r` whenever
/// that offset is below `width`.
fn ladder(picks: &mut [Vec<Option<usize>>], first: usize, width: usize, base: usize) {
    let m = picks.len();
    for (r, round) in picks.iter_mut().enumerate() {
        for c in 0..m {
            let offset = (r + m - c) % m;
            if offset < width {
                round[first + c] = Some(base + offset);
            }
        }
    }
}

/// Local (file-relative) picks for the template matching `params`.
pub(crate) fn template(params: &SchemeParams) -> Vec<Vec<Option<usize>>> {
    let m = params.rounds();
    let mut picks = vec![vec![None; params.servers()]; m];
    match params.selection_case() {
        SelectionCase::Shifted => ladder(&mut picks, 0, params.block_len(), 0),
        SelectionCase::Blocked => {
            let beta = params.beta();
            ladder(&mut picks, 0, beta, 0);
            for g in 0..params.alpha() {
                ladder(&mut picks, m * (g + 1), m, beta + g * m);
            }
        }
    }
    picks
}

pub fn build_selection_matrix(params: &SchemeParams, k: usize) -> Result<SelectionMatrix> {
    params.check_file(k)?;
    let offset = k * params.block_len();
    let picks: Vec<Vec<Option<usize>>> =
        template(params).into_iter().map(|round| round.into_iter().map(|p| p.map(|i| i + offset)).collect()).collect();
    let ql = params.query_len();
    let mut dense = FieldMatrix::zeros(params.field(), params.rounds() * ql, params.servers());
    for (r, round) in picks.iter().enumerate() {
        for (n, pick) in round.iter().enumerate() {
            if let Some(i) = pick {
                dense.set(r * ql + i, n, Fe::ONE);
            }
        }
    }
    SelectionMatrix::validate(params, k, dense)
}

impl SelectionMatrix {
    /// Parses a dense `E` for file `k`, enforcing (E1)–(E4).
    pub fn validate(params: &SchemeParams, k: usize, dense: FieldMatrix) -> Result<Self> {
        params.check_file(k)?;
        let (ql, n, m, b) = (params.query_len(), params.servers(), params.rounds(), params.block_len());
        if dense.rows() != m * ql || dense.cols() != n {
            return Err(Error::SelectionInvalid {
                contract: "shape",
                detail: format!("{}x{}, expected {}x{n}", dense.rows(), dense.cols(), m * ql),
            });
        }
        let block = k * b..(k + 1) * b;
        let mut picks = vec![vec![None; n]; m];
        for r in 0..m {
            for node in 0..n {
                let nz: Vec<usize> = (0..ql).filter(|&i| !dense.get(r * ql + i, node).is_zero()).collect();
                match nz.as_slice() {
                    [] => {}
                    [i] if dense.get(r * ql + i, node) == Fe::ONE && block.contains(i) => {
                        picks[r][node] = Some(*i);
                    }
                    _ => {
                        return Err(Error::SelectionInvalid {
                            contract: "E1",
                            detail: format!(
                                "round {} node {} slice is not a unit vector in file block",
                                r + 1,
                                node + 1
                            ),
                        })
                    }
                }
            }
            let active = picks[r].iter().filter(|p| p.is_some()).count();
            if active != b {
                return Err(Error::SelectionInvalid {
                    contract: "E2",
                    detail: format!("round {} has {active} active nodes, expected {b}", r + 1),
                });
            }
        }
        for i in block.clone() {
            let mut nodes: Vec<usize> = picks
                .iter()
                .flat_map(|round| round.iter().enumerate().filter(move |(_, p)| **p == Some(i)).map(|(n, _)| n))
                .collect();
            let count = nodes.len();
            nodes.sort_unstable();
            nodes.dedup();
            if count != m || nodes.len() != m {
                return Err(Error::SelectionInvalid {
                    contract: "E3",
                    detail: format!(
                        "row {} picked {count} times at {} distinct nodes",
                        i - block.start + 1,
                        nodes.len()
                    ),
                });
            }
        }
        let sel = SelectionMatrix { file: k, dense, picks };
        if !sel.recovery_matrix(params).is_invertible() {
            return Err(Error::SelectionInvalid { contract: "E4", detail: "recovery system is singular".into() });
        }
        Ok(sel)
    }

    pub fn file(&self) -> usize {
        self.file
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.dense
    }

    pub fn pick(&self, round: usize, node: usize) -> Option<usize> {
        self.picks[round][node]
    }

    /// Nodes with a nonzero slice in `round`, ascending.
    pub fn active_nodes(&self, round: usize) -> Vec<usize> {
        (0..self.picks[round].len()).filter(|&n| self.picks[round][n].is_some()).collect()
    }

    /// Slice `E_n^{(r)}` as a vector of length `(N−M−T+1)K`.
    pub fn slice(&self, params: &SchemeParams, round: usize, node: usize) -> Vec<Fe> {
        let mut v = vec![Fe::ZERO; params.query_len()];
        if let Some(i) = self.picks[round][node] {
            v[i] = Fe::ONE;
        }
        v
    }

    /// The `L × L` system mapping file symbols to the retrieved values.
    ///
    /// Rows follow rounds, then active nodes ascending; column
    /// `i·M + m` holds `G_S[m][n]` for the picked local row `i`.
    pub fn recovery_matrix(&self, params: &SchemeParams) -> FieldMatrix {
        let (l, m) = (params.file_len(), params.storage_dim());
        let gs = params.storage_code().generator();
        let base = self.file * params.block_len();
        let mut rows = Vec::with_capacity(l);
        for round in &self.picks {
            for (node, pick) in round.iter().enumerate() {
                if let Some(i) = pick {
                    let mut row = vec![Fe::ZERO; l];
                    for j in 0..m {
                        row[(i - base) * m + j] = gs.get(j, node);
                    }
                    rows.push(row);
                }
            }
        }
        let count = rows.len();
        FieldMatrix::from_elems(params.field(), count, l, rows.concat()).expect("rows have length L")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn picks_of(params: &SchemeParams, k: usize) -> Vec<Vec<Option<usize>>> {
        let s = build_selection_matrix(params, k).unwrap();
        (0..params.rounds()).map(|r| (0..params.servers()).map(|n| s.pick(r, n)).collect()).collect()
    }

    #[test]
    fn micro_example() {
        let p = SchemeParams::new(2, 1, 1, 2, 3).unwrap();
        assert_eq!(picks_of(&p, 0), vec![vec![Some(0), None]]);
        assert_eq!(picks_of(&p, 1), vec![vec![Some(1), None]]);
        let e = build_selection_matrix(&p, 1).unwrap();
        assert_eq!(*e.matrix(), FieldMatrix::from_rows(p.field(), &[[0, 0], [1, 0]]).unwrap());
    }

    #[test]
    fn shifted_case_n4_m2_t2() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        assert_eq!(picks_of(&p, 0), vec![vec![Some(0), None, None, None], vec![None, Some(0), None, None]]);
    }

    #[test]
    fn shifted_ladder_matches_displayed_template() {
        // N−M−T+1 = 2 ≤ M = 3: column 1 = e1,e2,0; column 2 = 0,e1,e2; column 3 = e2,0,e1
        let p = SchemeParams::new(5, 3, 1, 2, 0).unwrap();
        let s = picks_of(&p, 0);
        let col = |c: usize| s.iter().map(|r| r[c]).collect::<Vec<_>>();
        assert_eq!(col(0), vec![Some(0), Some(1), None]);
        assert_eq!(col(1), vec![None, Some(0), Some(1)]);
        assert_eq!(col(2), vec![Some(1), None, Some(0)]);
        assert_eq!(col(3), vec![None; 3]);
    }

    #[test]
    fn blocked_case_layout() {
        // N−M−T+1 = 5 = 2·2 + 1, so α = 2, β = 1
        let p = SchemeParams::new(7, 2, 1, 2, 0).unwrap();
        assert_eq!((p.alpha(), p.beta()), (2, 1));
        let s = picks_of(&p, 0);
        // β-wide ladder on the first M columns
        assert_eq!((s[0][0], s[1][0]), (Some(0), None));
        assert_eq!((s[0][1], s[1][1]), (None, Some(0)));
        // full ladders over e_{β+1}.. on the next 2M columns
        assert_eq!((s[0][2], s[1][2]), (Some(1), Some(2)));
        assert_eq!((s[0][3], s[1][3]), (Some(2), Some(1)));
        assert_eq!((s[0][4], s[1][4]), (Some(3), Some(4)));
        assert_eq!((s[0][5], s[1][5]), (Some(4), Some(3)));
        assert_eq!((s[0][6], s[1][6]), (None, None));
    }

    #[test]
    fn contracts_hold_on_grid() {
        for n in 2..=8 {
            for m in 1..n {
                for t in 1..=(n - m) {
                    let p = SchemeParams::new(n, m, t, 3, 0).unwrap();
                    for k in 0..3 {
                        build_selection_matrix(&p, k).unwrap_or_else(|e| panic!("N={n} M={m} T={t} k={k}: {e}"));
                    }
                }
            }
        }
    }

    #[test]
    fn validation_catches_broken_matrices() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let good = build_selection_matrix(&p, 0).unwrap().matrix().clone();
        let ql = p.query_len();

        // E1: pick outside the file block
        let mut e = good.clone();
        e.set(0, 0, Fe::ZERO);
        e.set(1, 0, Fe::ONE);
        assert!(matches!(SelectionMatrix::validate(&p, 0, e), Err(Error::SelectionInvalid { contract: "E1", .. })));

        // E2: an extra active node in round 1
        let mut e = good.clone();
        e.set(0, 2, Fe::ONE);
        assert!(matches!(SelectionMatrix::validate(&p, 0, e), Err(Error::SelectionInvalid { contract: "E2", .. })));

        // E3: same node picks row 1 in both rounds
        let mut e = good.clone();
        e.set(ql, 1, Fe::ZERO);
        e.set(ql, 0, Fe::ONE);
        assert!(matches!(SelectionMatrix::validate(&p, 0, e), Err(Error::SelectionInvalid { contract: "E3", .. })));

        // wrong file index for a valid file-1 matrix
        assert!(SelectionMatrix::validate(&p, 1, good.clone()).is_err());
        assert!(SelectionMatrix::validate(&p, 0, good).is_ok());
    }

    #[test]
    fn recovery_matrix_is_square_and_full_rank() {
        let p = SchemeParams::new(5, 2, 2, 2, 0).unwrap();
        let r = build_selection_matrix(&p, 1).unwrap().recovery_matrix(&p);
        assert_eq!((r.rows(), r.cols()), (p.file_len(), p.file_len()));
        assert_eq!(r.rank(), p.file_len());
    }
}
