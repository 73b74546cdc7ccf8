use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_rational::Ratio;

/// Exact finite distribution: outcome counts over a uniform event space.
///
/// `P(o) = counts[o] / total`. All comparisons are integer
/// cross-multiplications, so no floating point enters a verdict.
#[derive(Clone, Debug)]
pub struct DistTable<O> {
    counts: HashMap<O, u64>,
    total: u64,
}

impl<O: Hash + Eq + Clone> Default for DistTable<O> {
    fn default() -> Self {
        DistTable { counts: HashMap::new(), total: 0 }
    }
}

impl<O: Hash + Eq + Clone> DistTable<O> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(outcome: O) -> Self {
        let mut t = Self::new();
        t.add(outcome, 1);
        t
    }

    pub fn add(&mut self, outcome: O, weight: u64) {
        *self.counts.entry(outcome).or_insert(0) += weight;
        self.total += weight;
    }

    /// Merges another partition of the same event space.
    pub fn merge(&mut self, other: DistTable<O>) {
        for (o, c) in other.counts {
            *self.counts.entry(o).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, outcome: &O) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn probability(&self, outcome: &O) -> Ratio<u64> {
        Ratio::new(self.count(outcome), self.total)
    }

    /// Sum of all probabilities; exactly one for any non-empty table.
    pub fn mass(&self) -> Ratio<u64> {
        Ratio::new(self.counts.values().sum(), self.total)
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, u64)> {
        self.counts.iter().map(|(o, &c)| (o, c))
    }

    pub fn marginal<P: Hash + Eq + Clone>(&self, f: impl Fn(&O) -> P) -> DistTable<P> {
        let mut out = DistTable::new();
        for (o, &c) in &self.counts {
            out.add(f(o), c);
        }
        out
    }

    /// `true` iff both tables assign every outcome the same probability.
    pub fn same_distribution(&self, other: &DistTable<O>) -> bool {
        self.first_difference(other).is_none()
    }

    /// An outcome whose probability differs between the two tables.
    pub fn first_difference(&self, other: &DistTable<O>) -> Option<O> {
        let (a, b) = (self.total as u128, other.total as u128);
        let differs = |o: &O| self.count(o) as u128 * b != other.count(o) as u128 * a;
        self.counts.keys().find(|o| differs(o)).or_else(|| other.counts.keys().find(|o| differs(o))).cloned()
    }

    pub fn entropy(&self) -> Entropy {
        Entropy::of_counts(self.counts.values().copied(), self.total)
    }

    pub fn is_uniform_over(&self, support: u128) -> bool {
        self.counts.len() as u128 == support && {
            let first = self.counts.values().next().copied();
            self.counts.values().all(|&c| Some(c) == first)
        }
    }
}

/// Exact entropy as a rational combination `Σ c_p · ln p` over primes `p`.
///
/// Logarithms of distinct primes are linearly independent over the
/// rationals, so two entropies are equal as real numbers exactly when their
/// coefficient maps are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Entropy {
    terms: BTreeMap<u64, Ratio<i128>>,
}

fn factorize(mut n: u64, cache: &mut HashMap<u64, Vec<(u64, i128)>>) -> Vec<(u64, i128)> {
    if let Some(f) = cache.get(&n) {
        return f.clone();
    }
    let key = n;
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    cache.insert(key, out.clone());
    out
}

impl Entropy {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `H = Σ (c/T)(ln T − ln c)` for outcome counts `c` summing to `T`.
    pub fn of_counts(counts: impl IntoIterator<Item = u64>, total: u64) -> Self {
        let mut cache = HashMap::new();
        let mut numer: BTreeMap<u64, i128> = BTreeMap::new();
        let total_f = factorize(total, &mut cache);
        for c in counts {
            if c == 0 {
                continue;
            }
            for &(p, e) in &total_f {
                *numer.entry(p).or_insert(0) += c as i128 * e;
            }
            for (p, e) in factorize(c, &mut cache) {
                *numer.entry(p).or_insert(0) -= c as i128 * e;
            }
        }
        let mut h = Entropy::zero();
        for (p, v) in numer {
            if v != 0 {
                h.terms.insert(p, Ratio::new(v, total as i128));
            }
        }
        h
    }

    pub fn sub(&self, other: &Entropy) -> Entropy {
        let mut out = self.clone();
        for (&p, &c) in &other.terms {
            let e = out.terms.entry(p).or_insert_with(|| Ratio::from_integer(0));
            *e -= c;
            if *e == Ratio::from_integer(0) {
                out.terms.remove(&p);
            }
        }
        out
    }

    pub fn add(&self, other: &Entropy) -> Entropy {
        let mut neg = Entropy::zero();
        for (&p, &c) in &other.terms {
            neg.terms.insert(p, -c);
        }
        self.sub(&neg)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nats(&self) -> f64 {
        self.terms.iter().map(|(&p, c)| (*c.numer() as f64 / *c.denom() as f64) * (p as f64).ln()).sum()
    }

    pub fn bits(&self) -> f64 {
        self.nats() / std::f64::consts::LN_2
    }

    pub fn in_log_base(&self, q: u64) -> f64 {
        self.nats() / (q as f64).ln()
    }

    /// The exact value in `log q` units when `q` is prime and the entropy
    /// only involves `ln q`.
    pub fn exact_in_log_prime(&self, q: u64) -> Option<Ratio<i128>> {
        match self.terms.len() {
            0 => Some(Ratio::from_integer(0)),
            1 => self.terms.get(&q).copied(),
            _ => None,
        }
    }

    /// Human-readable value in `log q` units, exact when possible.
    pub fn describe(&self, q: u64) -> String {
        match self.exact_in_log_prime(q) {
            Some(r) => format!("{r} log{q}"),
            None => format!("{:.6} log{q}", self.in_log_base(q)),
        }
    }
}
