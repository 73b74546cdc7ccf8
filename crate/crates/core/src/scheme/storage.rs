use rand::Rng;

use super::SchemeParams;
use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix};
use crate::rng;

/// The message matrix `W`: `K` stacked blocks of `N−M−T+1` rows, `M` columns.
///
/// File `k` (0-based) occupies rows `k·(N−M−T+1) .. (k+1)·(N−M−T+1)`; its
/// `L` symbols are read row-major from that block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    w: FieldMatrix,
}

impl Database {
    pub fn new(params: &SchemeParams, w: FieldMatrix) -> Result<Self> {
        if w.rows() != params.query_len() || w.cols() != params.storage_dim() || w.field() != params.field() {
            return Err(Error::DimensionMismatch(format!(
                "database is {}x{}, expected {}x{}",
                w.rows(),
                w.cols(),
                params.query_len(),
                params.storage_dim()
            )));
        }
        Ok(Database { w })
    }

    pub fn zero(params: &SchemeParams) -> Self {
        Database { w: FieldMatrix::zeros(params.field(), params.query_len(), params.storage_dim()) }
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Self {
        let f = params.field();
        let w = FieldMatrix::from_fn(f, params.query_len(), params.storage_dim(), |_, _| rng::uniform(f, rng));
        Database { w }
    }

    /// Assembles `W` from `K` files of `L` symbols each.
    pub fn from_files(params: &SchemeParams, files: &[Vec<Fe>]) -> Result<Self> {
        if files.len() != params.files() || files.iter().any(|f| f.len() != params.file_len()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} files of {} symbols",
                params.files(),
                params.file_len()
            )));
        }
        let data: Vec<Fe> = files.iter().flatten().copied().collect();
        let w = FieldMatrix::from_elems(params.field(), params.query_len(), params.storage_dim(), data)?;
        Ok(Database { w })
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.w
    }

    pub fn file(&self, params: &SchemeParams, k: usize) -> Vec<Fe> {
        let b = params.block_len();
        self.w.entries()[k * b * params.storage_dim()..(k + 1) * b * params.storage_dim()].to_vec()
    }
}

/// The shard matrix `D = W · G_S`; column `n` is node `n`'s shard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageMatrix {
    d: FieldMatrix,
}

impl StorageMatrix {
    pub fn matrix(&self) -> &FieldMatrix {
        &self.d
    }

    pub fn shard(&self, node: usize) -> Vec<Fe> {
        self.d.column(node)
    }

    pub fn shards(&self) -> Vec<Vec<Fe>> {
        (0..self.d.cols()).map(|n| self.d.column(n)).collect()
    }
}

pub fn encode_storage(params: &SchemeParams, db: &Database) -> Result<StorageMatrix> {
    if db.w.rows() != params.query_len() || db.w.cols() != params.storage_dim() {
        return Err(Error::DimensionMismatch("database does not match parameters".into()));
    }
    Ok(StorageMatrix { d: db.w.mul(params.storage_code().generator())? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replication_when_m_is_one() {
        let p = SchemeParams::new(2, 1, 1, 2, 3).unwrap();
        let f = p.field();
        let db = Database::from_files(&p, &[vec![f.elem(2)], vec![f.elem(1)]]).unwrap();
        let d = encode_storage(&p, &db).unwrap();
        assert_eq!(*d.matrix(), FieldMatrix::from_rows(f, &[[2, 2], [1, 1]]).unwrap());
    }

    #[test]
    fn zero_database_gives_zero_shards() {
        let p = SchemeParams::new(5, 2, 1, 3, 0).unwrap();
        assert!(encode_storage(&p, &Database::zero(&p)).unwrap().matrix().is_zero());
    }

    #[test]
    fn shards_match_direct_product() {
        let mut spec = super::super::ParamsSpec::new(4, 2, 2, 2, 5);
        spec.phi = Some(vec![1, 2, 3, 4]);
        let p = spec.build().unwrap();
        let f = p.field();
        let files = vec![vec![f.elem(1), f.elem(0)], vec![f.elem(0), f.elem(1)]];
        let db = Database::from_files(&p, &files).unwrap();
        let d = encode_storage(&p, &db).unwrap();
        // independent evaluation: D[l][n] = φ_n (w_{l,1} + λ_n w_{l,2})
        let phi = [1u64, 2, 3, 4];
        for n in 0..4 {
            let lam = (n + 1) as u64;
            for l in 0..2 {
                let w = db.matrix().row(l);
                let expect = phi[n] * (w[0].value() as u64 + lam * w[1].value() as u64);
                assert_eq!(d.matrix().get(l, n), f.elem(expect));
            }
        }
    }

    #[test]
    fn any_m_shards_determine_the_database() {
        let p = SchemeParams::new(5, 3, 1, 2, 0).unwrap();
        let mut r = rng::stream(3, 0);
        let db = Database::random(&p, &mut r);
        let d = encode_storage(&p, &db).unwrap();
        use itertools::Itertools;
        for cols in (0..5).combinations(3) {
            let g = p.storage_code().generator().select_columns(&cols);
            let w = d.matrix().select_columns(&cols).mul(&g.inverse().unwrap()).unwrap();
            assert_eq!(&w, db.matrix());
        }
    }

    #[test]
    fn file_extraction_and_shape_errors() {
        let p = SchemeParams::new(3, 1, 1, 3, 0).unwrap();
        let f = p.field();
        let files: Vec<Vec<Fe>> = (0..3).map(|k| vec![f.elem(k), f.elem(k + 1)]).collect();
        let db = Database::from_files(&p, &files).unwrap();
        for (k, file) in files.iter().enumerate() {
            assert_eq!(&db.file(&p, k), file);
        }
        assert!(Database::from_files(&p, &files[..2]).is_err());
        assert!(Database::new(&p, FieldMatrix::zeros(f, 2, 1)).is_err());
    }
}
