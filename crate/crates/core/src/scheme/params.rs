use std::fmt;

use crate::error::{Error, Result};
use crate::field::{smallest_prime_above, Fe, PrimeField};
use crate::grs::{default_points, query_generator, storage_generator, unit_multipliers, GrsCode};

/// Which selection-matrix template applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionCase {
    /// `N−M−T+1 ≤ M`: a single cyclic ladder over the first `M` nodes.
    Shifted,
    /// `N−M−T+1 > M`: a `β`-wide ladder plus `α` full ladders.
    Blocked,
}

/// Raw, unvalidated scheme configuration.
///
/// `modulus = 0` picks the smallest prime above `n`. Missing points default
/// to `λ_n = n`, which needs `q > N`; explicit points only need `q ≥ N`.
/// Missing multipliers default to all-ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamsSpec {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub files: usize,
    pub modulus: u32,
    pub points: Option<Vec<u64>>,
    pub phi: Option<Vec<u64>>,
    pub psi: Option<Vec<u64>>,
    /// Permit `K = 1`, where both privacy conditions hold vacuously.
    pub allow_single_file: bool,
}

impl ParamsSpec {
    pub fn new(n: usize, m: usize, t: usize, files: usize, modulus: u32) -> Self {
        ParamsSpec { n, m, t, files, modulus, ..Default::default() }
    }

    pub fn build(&self) -> Result<SchemeParams> {
        let &ParamsSpec { n, m, t, files, modulus, .. } = self;
        if n == 0 || m == 0 || t == 0 {
            return Err(Error::InvalidParams("N, M and T must all be at least 1".into()));
        }
        if files == 0 || (files == 1 && !self.allow_single_file) {
            return Err(Error::InvalidParams("K must be at least 2 (K = 1 needs the single-file flag)".into()));
        }
        if n < m + t {
            return Err(Error::TooFewServers { n, m, t });
        }
        if n >= u16::MAX as usize {
            return Err(Error::InvalidParams("too many servers".into()));
        }
        let q = if modulus == 0 { smallest_prime_above(n as u32) } else { modulus };
        let field = PrimeField::new(q)?;
        if (q as usize) < n || (q as usize == n && self.points.is_none()) {
            return Err(Error::ModulusTooSmall { q, n });
        }
        let coords = |v: &Option<Vec<u64>>, default: Vec<Fe>, what: &str| -> Result<Vec<Fe>> {
            match v {
                None => Ok(default),
                Some(v) if v.len() != n => {
                    Err(Error::DimensionMismatch(format!("{what} has {} entries, expected {n}", v.len())))
                }
                Some(v) => v.iter().map(|&x| field.canonical(x.min(u32::MAX as u64) as u32)).collect(),
            }
        };
        let points = coords(&self.points, default_points(n, field), "λ")?;
        let phi = coords(&self.phi, unit_multipliers(n), "Φ")?;
        let psi = coords(&self.psi, unit_multipliers(n), "Ψ")?;
        let storage = storage_generator(&points, &phi, m, field)?;
        let query = query_generator(&points, &psi, t, field)?;
        Ok(SchemeParams { n, m, t, files, field, storage, query })
    }
}

/// Validated scheme parameters together with both generator matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    n: usize,
    m: usize,
    t: usize,
    files: usize,
    field: PrimeField,
    storage: GrsCode,
    query: GrsCode,
}

impl SchemeParams {
    /// Default codes (`λ_n = n`, unit multipliers); `q = 0` auto-picks.
    pub fn new(n: usize, m: usize, t: usize, files: usize, q: u32) -> Result<Self> {
        ParamsSpec::new(n, m, t, files, q).build()
    }

    pub fn servers(&self) -> usize {
        self.n
    }

    pub fn storage_dim(&self) -> usize {
        self.m
    }

    pub fn collusion(&self) -> usize {
        self.t
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// `N−M−T+1`, rows of `W` per file and symbols retrieved per round.
    pub fn block_len(&self) -> usize {
        self.n - self.m - self.t + 1
    }

    /// `L = M(N−M−T+1)`.
    pub fn file_len(&self) -> usize {
        self.m * self.block_len()
    }

    /// Length of a shard and of every per-round query vector.
    pub fn query_len(&self) -> usize {
        self.block_len() * self.files
    }

    /// `M+T−1`, the number of masked interference sums per round.
    pub fn mask_len(&self) -> usize {
        self.m + self.t - 1
    }

    pub fn rounds(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> usize {
        self.block_len() / self.m
    }

    pub fn beta(&self) -> usize {
        self.block_len() % self.m
    }

    pub fn selection_case(&self) -> SelectionCase {
        if self.block_len() <= self.m {
            SelectionCase::Shifted
        } else {
            SelectionCase::Blocked
        }
    }

    pub fn storage_code(&self) -> &GrsCode {
        &self.storage
    }

    pub fn query_code(&self) -> &GrsCode {
        &self.query
    }

    pub fn point(&self, node: usize) -> Fe {
        self.storage.points()[node]
    }

    /// `φ_n ψ_n`, the per-node scale of the Schur-product code.
    pub fn answer_scale(&self, node: usize) -> Fe {
        self.field.mul(self.storage.multipliers()[node], self.query.multipliers()[node])
    }

    /// Coefficient `φ_n ψ_n λ_n^j` of masked sum `j` in node `n`'s answer.
    pub fn mask_coefficient(&self, node: usize, j: usize) -> Fe {
        self.field.mul(self.answer_scale(node), self.field.pow(self.point(node), j as u64))
    }

    pub fn check_file(&self, k: usize) -> Result<()> {
        if k >= self.files {
            return Err(Error::InvalidParams(format!("file index {} outside 1..={}", k + 1, self.files)));
        }
        Ok(())
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} M={} T={} K={} q={}", self.n, self.m, self.t, self.files, self.field.modulus())
    }
}
