//! Capacity and secrecy-rate formulas, and the rates a session achieves.
//!
//! Everything is an exact rational over `u64`. Rates count field symbols;
//! every symbol is uniform over `F_q`, so symbol ratios equal bit ratios.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::scheme::SchemeParams;
use crate::sim::{Kind, Transcript};

pub type Rational = Ratio<u64>;

/// Linear-scheme capacity: `1 − (M+T−1)/N` when `N ≥ M+T`, else `0`.
pub fn capacity(n: usize, m: usize, t: usize) -> Rational {
    if n == 0 || m == 0 || t == 0 || n < m + t {
        return Rational::from_integer(0);
    }
    Rational::new((n - m - t + 1) as u64, n as u64)
}

/// Minimum secrecy rate `(M+T−1)/(N−M−T+1)`.
pub fn secrecy_lower_bound(n: usize, m: usize, t: usize) -> Result<Rational> {
    if m == 0 || t == 0 || n < m + t {
        return Err(Error::InvalidRegime);
    }
    Ok(Rational::new((m + t - 1) as u64, (n - m - t + 1) as u64))
}

/// Retrieved file symbols per downloaded answer symbol.
pub fn measure_rate(transcript: &Transcript) -> Result<Rational> {
    let downloaded: usize = transcript
        .messages()
        .iter()
        .filter(|m| m.to_user() && m.kind() == Some(Kind::Answer))
        .map(|m| m.payload_len())
        .sum();
    if downloaded == 0 {
        return Err(Error::IncompleteTranscript("no answers were downloaded".into()));
    }
    let Some(file) = transcript.decoded() else {
        return Err(Error::IncompleteTranscript("no decoded file".into()));
    };
    Ok(Rational::new(file.len() as u64, downloaded as u64))
}

/// Shared randomness per file symbol: `M(M+T−1)/L`.
pub fn measure_secrecy_rate(params: &SchemeParams) -> Rational {
    Rational::new((params.rounds() * params.mask_len()) as u64, params.file_len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RateReport {
    pub capacity: Rational,
    pub achieved_rate: Rational,
    pub secrecy_bound: Rational,
    pub achieved_secrecy: Rational,
}

impl RateReport {
    pub fn from_transcript(params: &SchemeParams, transcript: &Transcript) -> Result<Self> {
        let (n, m, t) = (params.servers(), params.storage_dim(), params.collusion());
        let report = RateReport {
            capacity: capacity(n, m, t),
            achieved_rate: measure_rate(transcript)?,
            secrecy_bound: secrecy_lower_bound(n, m, t)?,
            achieved_secrecy: measure_secrecy_rate(params),
        };
        assert!(report.achieved_rate <= report.capacity, "rate above capacity: {report:?}");
        assert!(report.achieved_secrecy >= report.secrecy_bound, "secrecy below bound: {report:?}");
        Ok(report)
    }

    pub fn is_optimal(&self) -> bool {
        self.achieved_rate == self.capacity && self.achieved_secrecy == self.secrecy_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u64, b: u64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(4, 2, 2), r(1, 4));
        assert_eq!(capacity(2, 1, 1), r(1, 2));
        assert_eq!(capacity(3, 2, 2), r(0, 1));
        assert_eq!(capacity(8, 1, 1), r(7, 8));
    }

    #[test]
    fn secrecy_bound_examples() {
        assert_eq!(secrecy_lower_bound(4, 2, 2), Ok(r(3, 1)));
        assert_eq!(secrecy_lower_bound(2, 1, 1), Ok(r(1, 1)));
        assert_eq!(secrecy_lower_bound(8, 2, 2), Ok(r(3, 5)));
        assert_eq!(secrecy_lower_bound(3, 2, 2), Err(Error::InvalidRegime));
    }

    #[test]
    fn secrecy_rate_examples() {
        let rate = |n, m, t| measure_secrecy_rate(&SchemeParams::new(n, m, t, 2, 0).unwrap());
        assert_eq!(rate(4, 2, 2), r(3, 1));
        assert_eq!(rate(2, 1, 1), r(1, 1));
        assert_eq!(rate(3, 1, 1), r(1, 2));
    }

    #[test]
    fn capacity_nondecreasing_in_n() {
        for m in 1..5 {
            for t in 1..5 {
                for n in 1..20 {
                    assert!(capacity(n, m, t) <= capacity(n + 1, m, t));
                }
            }
        }
    }

    #[test]
    fn achieved_secrecy_meets_bound_on_grid() {
        for n in 2..=8 {
            for m in 1..n {
                for t in 1..=(n - m) {
                    let p = SchemeParams::new(n, m, t, 2, 0).unwrap();
                    assert_eq!(measure_secrecy_rate(&p), secrecy_lower_bound(n, m, t).unwrap());
                }
            }
        }
    }
}
