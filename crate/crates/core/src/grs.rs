//! Generalized Reed-Solomon generator matrices.
//!
//! A GRS code of dimension `k` over evaluation points `λ` with column
//! multipliers `v` has generator `Vandermonde(λ, k) · diag(v)`, i.e. entry
//! `(j, n)` is `v_n · λ_n^j`. The storage code uses dimension `M` with
//! multipliers `Φ`; the query code uses dimension `T` with `Ψ`. Both share
//! the same points so that their Schur product has the minimum dimension.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldMatrix, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrsCode {
    points: Vec<Fe>,
    multipliers: Vec<Fe>,
    generator: FieldMatrix,
}

impl GrsCode {
    pub fn new(points: &[Fe], multipliers: &[Fe], dim: usize, field: PrimeField) -> Result<Self> {
        if points.len() != multipliers.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} evaluation points but {} multipliers",
                points.len(),
                multipliers.len()
            )));
        }
        if dim > points.len() {
            return Err(Error::DimensionMismatch(format!("dimension {dim} exceeds length {}", points.len())));
        }
        if points.iter().any(|p| p.value() >= field.modulus())
            || multipliers.iter().any(|p| p.value() >= field.modulus())
        {
            return Err(Error::InvalidParams("code coordinates outside the field".into()));
        }
        if !points.iter().all_unique() {
            return Err(Error::InvalidPoints);
        }
        if multipliers.iter().any(|m| m.is_zero()) {
            return Err(Error::ZeroMultiplier);
        }
        let generator = FieldMatrix::from_fn(field, dim, points.len(), |j, n| {
            field.mul(multipliers[n], field.pow(points[n], j as u64))
        });
        Ok(GrsCode { points: points.to_vec(), multipliers: multipliers.to_vec(), generator })
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn len(&self) -> usize {
        self.generator.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Fe] {
        &self.points
    }

    pub fn multipliers(&self) -> &[Fe] {
        &self.multipliers
    }

    pub fn generator(&self) -> &FieldMatrix {
        &self.generator
    }

    pub fn field(&self) -> PrimeField {
        self.generator.field()
    }

    pub fn is_mds(&self) -> bool {
        check_mds(&self.generator)
    }
}

/// `G_S = Vandermonde(λ, M) · diag(Φ)`.
pub fn storage_generator(points: &[Fe], phi: &[Fe], m: usize, field: PrimeField) -> Result<GrsCode> {
    GrsCode::new(points, phi, m, field)
}

/// `G_Q = Vandermonde(λ, T) · diag(Ψ)`.
pub fn query_generator(points: &[Fe], psi: &[Fe], t: usize, field: PrimeField) -> Result<GrsCode> {
    GrsCode::new(points, psi, t, field)
}

/// True iff every `rows × rows` column-submatrix of `generator` is
/// invertible. Checks all `C(cols, rows)` subsets.
pub fn check_mds(generator: &FieldMatrix) -> bool {
    let k = generator.rows();
    if k > generator.cols() {
        return false;
    }
    (0..generator.cols()).combinations(k).all(|cols| generator.select_columns(&cols).is_invertible())
}

/// Dimension of the span of all componentwise products `a_i ⊙ b_j` of rows.
pub fn schur_product_dim(a: &FieldMatrix, b: &FieldMatrix) -> Result<usize> {
    if a.cols() != b.cols() || a.field() != b.field() {
        return Err(Error::DimensionMismatch(format!(
            "codes of length {} and {} (or different fields)",
            a.cols(),
            b.cols()
        )));
    }
    let f = a.field();
    let n = a.cols();
    let products =
        FieldMatrix::from_fn(f, a.rows() * b.rows(), n, |r, c| f.mul(a.get(r / b.rows(), c), b.get(r % b.rows(), c)));
    Ok(products.rank())
}

/// `λ_n = n` for `n = 1..=N`.
pub fn default_points(n: usize, field: PrimeField) -> Vec<Fe> {
    (1..=n as u64).map(|v| field.elem(v)).collect()
}

pub fn unit_multipliers(n: usize) -> Vec<Fe> {
    vec![Fe::ONE; n]
}
