#![allow(dead_code)]

use spir_core::scheme::ParamsSpec;
use spir_core::SchemeParams;

/// Every `(N, M, T)` with `2 ≤ N ≤ max_n` and `M + T ≤ N`.
pub fn grid(max_n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for m in 1..n {
            for t in 1..=n - m {
                out.push((n, m, t));
            }
        }
    }
    out
}

pub fn params(n: usize, m: usize, t: usize, k: usize, q: u32) -> SchemeParams {
    SchemeParams::new(n, m, t, k, q).unwrap()
}

/// `(N, M, T, K, q)`; when `q = N` the points `λ_n = n mod q` are used.
pub fn small(n: usize, m: usize, t: usize, k: usize, q: u32) -> SchemeParams {
    let mut spec = ParamsSpec::new(n, m, t, k, q);
    if q as usize == n {
        spec.points = Some((1..=n as u64).map(|v| v % q as u64).collect());
    }
    spec.build().unwrap()
}

pub fn label(p: &SchemeParams) -> String {
    format!("({},{},{},{},{})", p.servers(), p.storage_dim(), p.collusion(), p.files(), p.field().modulus())
}
