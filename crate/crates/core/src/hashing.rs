//! Seeded k-wise independent Bernoulli samplers.
//!
//! A random polynomial of degree `k - 1` over a prime field is a k-wise
//! independent hash family (Carter-Wegman). Thresholding its value turns it
//! into a coin with bias `(threshold + 1) / P`, where `threshold = floor(p·P)`.
//! Production samplers use the Mersenne prime `2^61 - 1`; [`SmallPrime`]
//! exists so the family can be enumerated exhaustively in tests.

use crate::error::{check_probability, Error, Result};
use crate::graph::{Edge, VertexId};

/// `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64 generator, used to expand seeds into hash coefficients.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix_finalize(self.state)
    }
}

/// Derives the `index`-th child seed of `seed`: the `(index + 1)`-th output
/// of a SplitMix64 stream started at `seed`.
#[inline]
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    splitmix_finalize(seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Arithmetic modulo a prime below `2^62`.
pub trait PrimeField: Copy + Send + Sync + std::fmt::Debug {
    fn modulus(&self) -> u64;

    /// Reduces an arbitrary integer into `[0, P)`.
    fn reduce_wide(&self, x: u128) -> u64;

    #[inline]
    fn reduce(&self, x: u64) -> u64 {
        self.reduce_wide(x as u128)
    }

    /// `a·b + c mod P` for reduced inputs.
    #[inline]
    fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        self.reduce_wide(a as u128 * b as u128 + c as u128)
    }

    /// Evaluates the polynomial with coefficients `coeffs` (leading first)
    /// at the reduced point `x`.
    #[inline]
    fn horner(&self, coeffs: &[u64], x: u64) -> u64 {
        match coeffs.split_first() {
            Some((&lead, rest)) => rest.iter().fold(lead, |acc, &c| self.mul_add(acc, x, c)),
            None => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mersenne61;

impl Mersenne61 {
    /// Folds `t = acc·x + c` (with `x, c < P`) to a congruent value below
    /// `acc + 2^61`, without fully reducing.
    #[inline(always)]
    fn fold(t: u128) -> u64 {
        (t as u64 & MERSENNE_61) + (t >> 61) as u64
    }

    #[inline(always)]
    fn finish(s: u64) -> u64 {
        let s = (s & MERSENNE_61) + (s >> 61);
        if s >= MERSENNE_61 {
            s - MERSENNE_61
        } else {
            s
        }
    }
}

impl PrimeField for Mersenne61 {
    #[inline]
    fn modulus(&self) -> u64 {
        MERSENNE_61
    }

    #[inline]
    fn horner(&self, coeffs: &[u64], x: u64) -> u64 {
        // each step adds less than 2^61 to the accumulator bound
        debug_assert!(coeffs.len() <= 8);
        if let &[a, b, c, d] = coeffs {
            // Estrin: (a·x + b)·x² + (c·x + d), two multiplies deep
            let x = x as u128;
            let x2 = Self::fold(x * x) as u128;
            let hi = Self::fold(a as u128 * x + b as u128) as u128;
            let lo = Self::fold(c as u128 * x + d as u128) as u128;
            return Self::finish(Self::fold(hi * x2 + lo));
        }
        let Some((&lead, rest)) = coeffs.split_first() else {
            return 0;
        };
        let acc = rest
            .iter()
            .fold(lead, |acc, &c| Self::fold(acc as u128 * x as u128 + c as u128));
        Self::finish(acc)
    }

    #[inline]
    fn reduce(&self, x: u64) -> u64 {
        Self::finish(x)
    }

    #[inline]
    fn reduce_wide(&self, x: u128) -> u64 {
        // 2^61 ≡ 1, so fold the high bits onto the low ones twice
        let folded = (x as u64 & MERSENNE_61) as u128 + (x >> 61);
        let s = (folded as u64 & MERSENNE_61) + (folded >> 61) as u64;
        if s >= MERSENNE_61 {
            s - MERSENNE_61
        } else {
            s
        }
    }
}

/// A small prime field for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallPrime(u64);

impl SmallPrime {
    pub fn new(p: u64) -> Result<Self> {
        let is_prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
        if !is_prime || p >= 1 << 32 {
            return Err(Error::param(format!("{p} is not a prime below 2^32")));
        }
        Ok(SmallPrime(p))
    }
}

impl PrimeField for SmallPrime {
    fn modulus(&self) -> u64 {
        self.0
    }

    fn reduce_wide(&self, x: u128) -> u64 {
        (x % self.0 as u128) as u64
    }
}

/// A polynomial of degree `N - 1` over `F`, leading coefficient first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Polynomial<F, const N: usize> {
    field: F,
    coeffs: [u64; N],
}

impl<F: PrimeField, const N: usize> Polynomial<F, N> {
    /// Fails unless every coefficient is reduced and the leading one is nonzero.
    pub fn new(field: F, coeffs: [u64; N]) -> Result<Self> {
        let modulus = field.modulus();
        if coeffs.iter().any(|&c| c >= modulus) {
            return Err(Error::param("polynomial coefficient out of field range"));
        }
        if N > 0 && coeffs[0] == 0 {
            return Err(Error::param("leading coefficient must be nonzero"));
        }
        Ok(Polynomial { field, coeffs })
    }

    /// Draws coefficients uniformly by rejection from a SplitMix64 stream,
    /// redrawing the leading coefficient while it is zero.
    pub fn from_seed(field: F, seed: u64) -> Self {
        let modulus = field.modulus();
        let shift = modulus.leading_zeros();
        let mut rng = SplitMix64::new(seed);
        let mut coeffs = [0u64; N];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = loop {
                let x = rng.next_u64() >> shift;
                if x < modulus && (i > 0 || x != 0) {
                    break x;
                }
            };
        }
        Polynomial { field, coeffs }
    }

    pub fn field(&self) -> F {
        self.field
    }

    pub fn coefficients(&self) -> &[u64; N] {
        &self.coeffs
    }

    /// Evaluates at `x` (already reduced) by Horner's rule.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.field.horner(&self.coeffs, x)
    }
}

/// `x, x², x³` of a reduced point, for evaluating many cubic hashes at one
/// key with independent multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPowers([u64; 3]);

impl KeyPowers {
    #[inline]
    pub fn new(x: u64) -> Self {
        let f = Mersenne61;
        let x = f.reduce(x);
        let x2 = f.mul_add(x, x, 0);
        KeyPowers([x, x2, f.mul_add(x2, x, 0)])
    }
}

impl Polynomial<Mersenne61, 4> {
    /// Same value as [`Polynomial::eval`] at the point `powers` was built from.
    #[inline]
    pub fn eval_powers(&self, powers: &KeyPowers) -> u64 {
        let [a, b, c, d] = self.coeffs;
        let [x, x2, x3] = powers.0;
        // three products below 2^122 each, plus d: no u128 overflow
        let sum = a as u128 * x3 as u128 + b as u128 * x2 as u128 + c as u128 * x as u128 + d as u128;
        Mersenne61::finish(Mersenne61::fold(sum))
    }
}

/// Largest accepted hash value for probability `p`, capped at `P`.
pub fn threshold_for(p: f64, modulus: u64) -> u64 {
    let t = (p * modulus as f64).floor();
    if t >= modulus as f64 {
        modulus
    } else {
        t as u64
    }
}

/// Packs an edge into a field element: `min·2^32 + max`, reduced.
#[inline]
pub fn edge_key<F: PrimeField>(field: &F, e: Edge) -> u64 {
    if e.v() >> 32 == 0 {
        field.reduce(e.u() << 32 | e.v())
    } else {
        field.reduce_wide(((e.u() as u128) << 32) + e.v() as u128)
    }
}

/// A coin on vertices.
pub trait VertexSample {
    fn sample_vertex(&self, v: VertexId) -> bool;
    fn p(&self) -> f64;
}

/// A coin on edges.
pub trait EdgeSample {
    fn sample_edge(&self, e: Edge) -> bool;
    fn q(&self) -> f64;
}

/// Maps vertices to one of `colors()` classes.
pub trait VertexColoring {
    fn color(&self, v: VertexId) -> u64;
    fn colors(&self) -> u64;
}

/// Pairwise independent vertex coin with `Pr[1] ≈ p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSampler<F = Mersenne61> {
    hash: Polynomial<F, 2>,
    threshold: u64,
    always: bool,
    p: f64,
}

impl VertexSampler<Mersenne61> {
    pub fn new(seed: u64, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self::build(Polynomial::from_seed(Mersenne61, seed), p))
    }
}

impl<F: PrimeField> VertexSampler<F> {
    pub fn with_hash(hash: Polynomial<F, 2>, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self::build(hash, p))
    }

    fn build(hash: Polynomial<F, 2>, p: f64) -> Self {
        let modulus = hash.field().modulus();
        let threshold = threshold_for(p, modulus);
        VertexSampler {
            hash,
            threshold,
            always: threshold >= modulus - 1,
            p,
        }
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn hash(&self) -> &Polynomial<F, 2> {
        &self.hash
    }
}

impl<F: PrimeField> VertexSample for VertexSampler<F> {
    #[inline]
    fn sample_vertex(&self, v: VertexId) -> bool {
        self.always || self.hash.eval(self.hash.field().reduce(v)) <= self.threshold
    }

    fn p(&self) -> f64 {
        self.p
    }
}

/// Four-wise independent edge coin with `Pr[1] ≈ q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSampler<F = Mersenne61> {
    hash: Polynomial<F, 4>,
    threshold: u64,
    always: bool,
    q: f64,
}

impl EdgeSampler<Mersenne61> {
    pub fn new(seed: u64, q: f64) -> Result<Self> {
        check_probability("q", q)?;
        Ok(Self::build(Polynomial::from_seed(Mersenne61, seed), q))
    }
}

impl<F: PrimeField> EdgeSampler<F> {
    pub fn with_hash(hash: Polynomial<F, 4>, q: f64) -> Result<Self> {
        check_probability("q", q)?;
        Ok(Self::build(hash, q))
    }

    fn build(hash: Polynomial<F, 4>, q: f64) -> Self {
        let modulus = hash.field().modulus();
        let threshold = threshold_for(q, modulus);
        EdgeSampler {
            hash,
            threshold,
            always: threshold >= modulus - 1,
            q,
        }
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }
}

impl EdgeSampler<Mersenne61> {
    /// Evaluates the coin on the powers of a precomputed [`edge_key`].
    #[inline]
    pub fn sample_powers(&self, powers: &KeyPowers) -> bool {
        self.always || self.hash.eval_powers(powers) <= self.threshold
    }

    /// Evaluates the coin on a precomputed [`edge_key`].
    #[inline]
    pub fn sample_key(&self, key: u64) -> bool {
        self.always || self.hash.eval(key) <= self.threshold
    }
}

impl<F: PrimeField> EdgeSample for EdgeSampler<F> {
    #[inline]
    fn sample_edge(&self, e: Edge) -> bool {
        self.always || self.hash.eval(edge_key(&self.hash.field(), e)) <= self.threshold
    }

    fn q(&self) -> f64 {
        self.q
    }
}

/// Pairwise independent coloring into `[k]`: `h(v) mod k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorHash {
    hash: Polynomial<Mersenne61, 2>,
    k: u64,
}

impl ColorHash {
    pub fn new(seed: u64, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("color count k must be at least 1"));
        }
        Ok(ColorHash {
            hash: Polynomial::from_seed(Mersenne61, seed),
            k,
        })
    }
}

impl VertexColoring for ColorHash {
    #[inline]
    fn color(&self, v: VertexId) -> u64 {
        self.hash.eval(Mersenne61.reduce(v)) % self.k
    }

    fn colors(&self) -> u64 {
        self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mersenne_reduction_matches_modulo() {
        let f = Mersenne61;
        for x in [0u128, 1, MERSENNE_61 as u128, MERSENNE_61 as u128 + 5, u128::MAX >> 6, (MERSENNE_61 as u128 - 1).pow(2)] {
            assert_eq!(f.reduce_wide(x), (x % MERSENNE_61 as u128) as u64, "{x}");
        }
    }

    proptest! {
        #[test]
        fn mersenne_mul_add(a in 0..MERSENNE_61, b in 0..MERSENNE_61, c in 0..MERSENNE_61) {
            let want = ((a as u128 * b as u128 + c as u128) % MERSENNE_61 as u128) as u64;
            prop_assert_eq!(Mersenne61.mul_add(a, b, c), want);
        }

        #[test]
        fn edge_sampler_ignores_endpoint_order(seed: u64, a in 0u64..1 << 40, b in 0u64..1 << 40) {
            prop_assume!(a != b);
            let g = EdgeSampler::new(seed, 0.5).unwrap();
            prop_assert_eq!(
                g.sample_edge(Edge::new(a, b).unwrap()),
                g.sample_edge(Edge::new(b, a).unwrap())
            );
        }
    }

    proptest! {
        #[test]
        fn powers_match_horner(seed in any::<u64>(), key in any::<u64>()) {
            let poly = Polynomial::<Mersenne61, 4>::from_seed(Mersenne61, seed);
            prop_assert_eq!(poly.eval_powers(&KeyPowers::new(key)), poly.eval(Mersenne61.reduce(key)));
        }

        #[test]
        fn lazy_horner_matches_generic(c in proptest::array::uniform4(0..MERSENNE_61), x in 0..MERSENNE_61) {
            let generic = c.iter().fold(0, |acc, &k| Mersenne61.mul_add(acc, x, k));
            prop_assert_eq!(Mersenne61.horner(&c, x), generic);
        }
    }

    #[test]
    fn lazy_horner_extremes() {
        let top = MERSENNE_61 - 1;
        for x in [0, 1, top] {
            let c = [top; 4];
            let generic = c.iter().fold(0, |acc, &k| Mersenne61.mul_add(acc, x, k));
            assert_eq!(Mersenne61.horner(&c, x), generic);
        }
    }

    #[test]
    fn edge_key_matches_wide_formula() {
        for (a, b) in [(0, 1), (5, 1 << 31), ((1 << 32) - 2, (1 << 32) - 1), (3, 1 << 40), (1 << 50, u64::MAX)] {
            let e = Edge::new(a, b).unwrap();
            let want = ((((a as u128) << 32) + b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(edge_key(&Mersenne61, e), want, "{a} {b}");
            assert_eq!(edge_key(&SmallPrime::new(31).unwrap(), e), ((((a as u128) << 32) + b as u128) % 31) as u64);
        }
    }

    #[test]
    fn p_one_accepts_everything() {
        let f = VertexSampler::new(3, 1.0).unwrap();
        assert_eq!(f.threshold(), MERSENNE_61);
        assert!((0..10_000u64).all(|v| f.sample_vertex(v.wrapping_mul(0x1234_5678_9abc))));
        let g = EdgeSampler::new(3, 1.0).unwrap();
        assert!((1..5_000u64).all(|v| g.sample_edge(Edge::new(0, v).unwrap())));
    }

    #[test]
    fn rejects_bad_probabilities() {
        for p in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(VertexSampler::new(1, p).is_err());
            assert!(EdgeSampler::new(1, p).is_err());
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let a = VertexSampler::new(42, 0.3).unwrap();
        let b = VertexSampler::new(42, 0.3).unwrap();
        assert_eq!(a, b);
        assert!((0..1000).all(|v| a.sample_vertex(v) == b.sample_vertex(v)));
        let c = VertexSampler::new(43, 0.3).unwrap();
        assert_ne!(a.hash().coefficients(), c.hash().coefficients());
    }

    #[test]
    fn keys_reduce_mod_p() {
        let f = VertexSampler::new(9, 0.5).unwrap();
        for v in [0u64, 1, 17, 1 << 40] {
            assert_eq!(f.sample_vertex(v), f.sample_vertex(v + MERSENNE_61));
        }
    }

    #[test]
    fn leading_coefficient_never_zero() {
        let field = SmallPrime::new(2).unwrap();
        for seed in 0..200 {
            let h: Polynomial<_, 4> = Polynomial::from_seed(field, seed);
            assert_eq!(h.coefficients()[0], 1);
        }
        assert!(Polynomial::new(field, [0, 1]).is_err());
    }

    #[test]
    fn small_prime_validation() {
        assert!(SmallPrime::new(31).is_ok());
        assert!(SmallPrime::new(33).is_err());
        assert!(SmallPrime::new(1).is_err());
    }

    #[test]
    fn exhaustive_small_field_acceptance_count() {
        let field = SmallPrime::new(31).unwrap();
        for p in [0.1, 0.25, 0.5, 0.9] {
            for a in 1..31 {
                for b in 0..31 {
                    let f = VertexSampler::with_hash(Polynomial::new(field, [a, b]).unwrap(), p).unwrap();
                    let accepted = (0..31).filter(|&v| f.sample_vertex(v)).count() as u64;
                    assert_eq!(accepted, f.threshold() + 1);
                }
            }
        }
    }

    #[test]
    fn empirical_rates_match_p_and_q() {
        let f = VertexSampler::new(11, 0.25).unwrap();
        let hits = (0..100_000u64).filter(|&i| f.sample_vertex(mix_seed(5, i))).count();
        let rate = hits as f64 / 1e5;
        assert!((0.24..=0.26).contains(&rate), "{rate}");

        let g = EdgeSampler::new(12, 0.5).unwrap();
        let hits = (0..100_000u64)
            .filter(|&i| g.sample_edge(Edge::new(i, i + 1 + (mix_seed(6, i) >> 40)).unwrap()))
            .count();
        let rate = hits as f64 / 1e5;
        assert!((0.49..=0.51).contains(&rate), "{rate}");
    }

    #[test]
    fn colors_stay_in_range() {
        let c = ColorHash::new(1, 3).unwrap();
        assert!((0..1000).all(|v| c.color(v) < 3));
        assert!(ColorHash::new(1, 0).is_err());
    }
}
