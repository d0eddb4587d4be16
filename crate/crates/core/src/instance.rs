//! Problem instances, witnesses, seeded generators and brute-force oracles.
//!
//! The oracles here share no code with the algorithms they validate: the
//! three-set oracle is a plain triple loop, the cross-check is a two-pointer
//! sweep, and the k-LDT oracle enumerates `A^k` exhaustively.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact integer standing in for a real input.
pub type Scalar = i64;

/// Exclusive bound on `|Scalar|`.
pub const SCALAR_BOUND: i64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetId {
    A,
    B,
    C,
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetId::A => "A",
            SetId::B => "B",
            SetId::C => "C",
        })
    }
}

pub(crate) fn check_scalar(v: i128) -> Result<Scalar> {
    if v.abs() >= SCALAR_BOUND as i128 {
        Err(Error::ScalarOutOfRange(v))
    } else {
        Ok(v as Scalar)
    }
}

fn sorted_checked(mut v: Vec<Scalar>) -> Result<Vec<Scalar>> {
    for &x in &v {
        check_scalar(x as i128)?;
    }
    v.sort_unstable();
    Ok(v)
}

/// Three sorted input sets. Duplicates are kept; ties are broken by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeSumInstance {
    a: Vec<Scalar>,
    b: Vec<Scalar>,
    c: Vec<Scalar>,
}

impl ThreeSumInstance {
    /// Validates the scalar bound and sorts each list.
    pub fn new(a: Vec<Scalar>, b: Vec<Scalar>, c: Vec<Scalar>) -> Result<Self> {
        Ok(Self { a: sorted_checked(a)?, b: sorted_checked(b)?, c: sorted_checked(c)? })
    }

    pub fn a(&self) -> &[Scalar] {
        &self.a
    }

    pub fn b(&self) -> &[Scalar] {
        &self.b
    }

    pub fn c(&self) -> &[Scalar] {
        &self.c
    }

    pub fn set(&self, id: SetId) -> &[Scalar] {
        match id {
            SetId::A => &self.a,
            SetId::B => &self.b,
            SetId::C => &self.c,
        }
    }

    pub fn is_balanced(&self) -> bool {
        self.a.len() == self.b.len() && self.b.len() == self.c.len()
    }

    /// Largest of the three set sizes.
    pub fn size(&self) -> usize {
        self.a.len().max(self.b.len()).max(self.c.len())
    }

    /// Builds the witness for sorted positions `(i, j, l)`.
    pub fn witness(&self, i: usize, j: usize, l: usize) -> Witness {
        Witness { indices: vec![i, j, l], values: vec![self.a[i], self.b[j], self.c[l]] }
    }

    /// `true` when the witness cites positions whose values sum to zero.
    pub fn verifies(&self, w: &Witness) -> bool {
        if w.indices.len() != 3 {
            return false;
        }
        let (i, j, l) = (w.indices[0], w.indices[1], w.indices[2]);
        i < self.a.len()
            && j < self.b.len()
            && l < self.c.len()
            && self.a[i] as i128 + self.b[j] as i128 + self.c[l] as i128 == 0
    }
}

/// `phi(x_1..x_k) = alpha_0 + sum alpha_i x_i` over `A^k`, `k` odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KLdtInstance {
    k: usize,
    alphas: Vec<Scalar>,
    a: Vec<Scalar>,
}

impl KLdtInstance {
    pub fn new(k: usize, alphas: Vec<Scalar>, a: Vec<Scalar>) -> Result<Self> {
        if k < 3 || k % 2 == 0 {
            return Err(Error::InvalidKLdt(format!("k must be odd and at least 3, got {k}")));
        }
        if alphas.len() != k + 1 {
            return Err(Error::InvalidKLdt(format!("expected {} coefficients, got {}", k + 1, alphas.len())));
        }
        if alphas[1..].iter().any(|&x| x == 0) {
            return Err(Error::InvalidKLdt("alpha_1..alpha_k must be nonzero".into()));
        }
        for &x in &alphas {
            check_scalar(x as i128)?;
        }
        Ok(Self { k, alphas, a: sorted_checked(a)? })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[Scalar] {
        &self.alphas
    }

    pub fn a(&self) -> &[Scalar] {
        &self.a
    }

    /// Evaluates `phi` on sorted positions.
    pub fn eval(&self, indices: &[usize]) -> i128 {
        debug_assert_eq!(indices.len(), self.k);
        let mut acc = self.alphas[0] as i128;
        for (t, &i) in indices.iter().enumerate() {
            acc += self.alphas[t + 1] as i128 * self.a[i] as i128;
        }
        acc
    }

    pub fn witness(&self, indices: Vec<usize>) -> Witness {
        let values = indices.iter().map(|&i| self.a[i]).collect();
        Witness { indices, values }
    }

    pub fn verifies(&self, w: &Witness) -> bool {
        w.indices.len() == self.k && w.indices.iter().all(|&i| i < self.a.len()) && self.eval(&w.indices) == 0
    }
}

/// Positions and values of a zero: `(i, j, l)` into `(A, B, C)`, or a
/// `k`-tuple of positions into `A` for k-LDT.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub indices: Vec<usize>,
    pub values: Vec<Scalar>,
}

/// Instance families produced by [`generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    Planted,
    NoSolutionParity,
    Clustered,
}

impl Distribution {
    pub const ALL: [Distribution; 4] =
        [Distribution::Uniform, Distribution::Planted, Distribution::NoSolutionParity, Distribution::Clustered];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Planted => "planted",
            Distribution::NoSolutionParity => "no-solution-parity",
            Distribution::Clustered => "clustered",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDistribution(s.to_string()))
    }
}

/// Half-width of the value range for size `n`: about `n^3 / 2`, so a
/// uniform instance has roughly one expected witness near the top of the
/// desk-scale range.
fn value_range(n: usize) -> i64 {
    let cube = (n as i128).pow(3) / 2;
    cube.clamp(8, 1i128 << 38) as i64
}

/// Generates a balanced instance with `|A| = |B| = |C| = n`.
pub fn generate(kind: Distribution, n: usize, seed: u64) -> Result<ThreeSumInstance> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = value_range(n);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Scalar> { (0..n).map(|_| rng.gen_range(-r..=r)).collect() };
    let (a, b, c) = match kind {
        Distribution::Uniform => (draw(&mut rng), draw(&mut rng), draw(&mut rng)),
        Distribution::Planted => {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let mut c = draw(&mut rng);
            let x = a[rng.gen_range(0..n)];
            let y = b[rng.gen_range(0..n)];
            c[rng.gen_range(0..n)] = -x - y;
            (a, b, c)
        }
        Distribution::NoSolutionParity => {
            let half = (r / 2).max(1);
            let odd = |rng: &mut ChaCha8Rng| -> Vec<Scalar> {
                (0..n).map(|_| 2 * rng.gen_range(-half..half) + 1).collect()
            };
            (odd(&mut rng), odd(&mut rng), odd(&mut rng))
        }
        Distribution::Clustered => {
            let centers: Vec<Scalar> = (0..4).map(|_| rng.gen_range(-r..=r)).collect();
            let w = (n as i64 / 8).max(2);
            let clustered = |rng: &mut ChaCha8Rng| -> Vec<Scalar> {
                (0..n).map(|_| centers[rng.gen_range(0..centers.len())] + rng.gen_range(-w..=w)).collect()
            };
            (clustered(&mut rng), clustered(&mut rng), clustered(&mut rng))
        }
    };
    ThreeSumInstance::new(a, b, c)
}

/// Generates a balanced instance whose pairwise sums `a_i + b_j` are all
/// distinct. `A` is drawn first; each `b` is redrawn until no difference
/// `b - b'` with an earlier `b'` is a difference of two elements of `A`.
pub fn generate_distinct_sums(n: usize, seed: u64) -> Result<ThreeSumInstance> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: i64 = 1 << 36;
    let mut a: Vec<Scalar> = Vec::with_capacity(n);
    let mut seen = HashSet::new();
    while a.len() < n {
        let x = rng.gen_range(-r..=r);
        if seen.insert(x) {
            a.push(x);
        }
    }
    let diffs: HashSet<i64> = a.iter().flat_map(|&x| a.iter().map(move |&y| x - y)).collect();
    let mut b: Vec<Scalar> = Vec::with_capacity(n);
    while b.len() < n {
        let x = rng.gen_range(-r..=r);
        if b.iter().all(|&y| !diffs.contains(&(x - y))) {
            b.push(x);
        }
    }
    let c = (0..n).map(|_| rng.gen_range(-r..=r)).collect();
    ThreeSumInstance::new(a, b, c)
}

/// Generates a k-LDT instance over `n` inputs. Coefficients are drawn from
/// small ranges unless supplied; input values are drawn from a range scaled
/// so that witnesses are neither certain nor rare.
pub fn generate_kldt(k: usize, n: usize, seed: u64, alphas: Option<&[Scalar]>) -> Result<KLdtInstance> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = match alphas {
        Some(a) => a.to_vec(),
        None => {
            let mut v = vec![rng.gen_range(-6..=6)];
            for _ in 0..k {
                let mut x = 0;
                while x == 0 {
                    x = rng.gen_range(-3..=3);
                }
                v.push(x);
            }
            v
        }
    };
    let tuples = (n as f64).powi(k as i32);
    let r = ((tuples / 64.0) as i64).clamp(2, 1 << 20);
    let a = (0..n).map(|_| rng.gen_range(-r..=r)).collect();
    KLdtInstance::new(k, alphas, a)
}

/// Reference semantics: first witness in lexicographic `(i, j, l)` order.
pub fn three_sum_oracle(inst: &ThreeSumInstance) -> Option<Witness> {
    for (i, &a) in inst.a.iter().enumerate() {
        for (j, &b) in inst.b.iter().enumerate() {
            let Ok(target) = Scalar::try_from(-(a as i128 + b as i128)) else {
                continue;
            };
            // branch-free chunks so the inner loop vectorizes
            let mut base = 0;
            for chunk in inst.c.chunks(8) {
                if chunk.iter().fold(false, |hit, &c| hit | (c == target)) {
                    let l = base + chunk.iter().position(|&c| c == target).unwrap_or_default();
                    return Some(inst.witness(i, j, l));
                }
                base += chunk.len();
            }
        }
    }
    None
}

/// `O(|C|(|A| + |B|))` cross-check of [`three_sum_oracle`] on existence.
pub fn three_sum_two_pointer(inst: &ThreeSumInstance) -> Option<Witness> {
    let (a, b) = (&inst.a, &inst.b);
    if a.is_empty() || b.is_empty() {
        return None;
    }
    for (l, &c) in inst.c.iter().enumerate() {
        let target = -(c as i128);
        let (mut i, mut j) = (0usize, b.len());
        while i < a.len() && j > 0 {
            let s = a[i] as i128 + b[j - 1] as i128;
            match s.cmp(&target) {
                std::cmp::Ordering::Equal => return Some(inst.witness(i, j - 1, l)),
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j -= 1,
            }
        }
    }
    None
}

/// Exhaustive scan of `A^k` (with repetition), lexicographic order.
pub fn k_ldt_oracle(inst: &KLdtInstance) -> Option<Witness> {
    let n = inst.a.len();
    let k = inst.k;
    if n == 0 {
        return None;
    }
    let mut idx = vec![0usize; k];
    loop {
        if inst.eval(&idx) == 0 {
            return Some(inst.witness(idx));
        }
        let mut t = k;
        loop {
            if t == 0 {
                return None;
            }
            t -= 1;
            idx[t] += 1;
            if idx[t] < n {
                break;
            }
            idx[t] = 0;
        }
    }
}

/// On-disk instance format. Integers travel as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceFile {
    KLdt {
        k: usize,
        alphas: Vec<String>,
        #[serde(rename = "A")]
        a: Vec<String>,
    },
    ThreeSum {
        #[serde(rename = "A")]
        a: Vec<String>,
        #[serde(rename = "B")]
        b: Vec<String>,
        #[serde(rename = "C")]
        c: Vec<String>,
    },
}

/// A parsed instance file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyInstance {
    ThreeSum(ThreeSumInstance),
    KLdt(KLdtInstance),
}

fn to_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn parse_all(v: &[String]) -> Result<Vec<Scalar>> {
    v.iter()
        .map(|s| {
            let x: i128 = s.trim().parse().map_err(|_| Error::Format(format!("`{s}` is not a decimal integer")))?;
            check_scalar(x)
        })
        .collect()
}

impl From<&ThreeSumInstance> for InstanceFile {
    fn from(inst: &ThreeSumInstance) -> Self {
        InstanceFile::ThreeSum { a: to_strings(&inst.a), b: to_strings(&inst.b), c: to_strings(&inst.c) }
    }
}

impl From<&KLdtInstance> for InstanceFile {
    fn from(inst: &KLdtInstance) -> Self {
        InstanceFile::KLdt { k: inst.k, alphas: to_strings(&inst.alphas), a: to_strings(&inst.a) }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<AnyInstance> {
        match self {
            InstanceFile::ThreeSum { a, b, c } => {
                Ok(AnyInstance::ThreeSum(ThreeSumInstance::new(parse_all(&a)?, parse_all(&b)?, parse_all(&c)?)?))
            }
            InstanceFile::KLdt { k, alphas, a } => {
                Ok(AnyInstance::KLdt(KLdtInstance::new(k, parse_all(&alphas)?, parse_all(&a)?)?))
            }
        }
    }
}

pub fn to_json(file: &InstanceFile) -> String {
    serde_json::to_string(file).expect("instance files always serialize")
}

pub fn from_json(text: &str) -> Result<AnyInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_sums_are_distinct() {
        let inst = generate_distinct_sums(40, 9).unwrap();
        let sums: HashSet<i64> = inst.a().iter().flat_map(|&x| inst.b().iter().map(move |&y| x + y)).collect();
        assert_eq!(sums.len(), 1600);
    }

    #[test]
    fn parity_instances_are_all_odd_and_empty() {
        let inst = generate(Distribution::NoSolutionParity, 4, 1).unwrap();
        for id in [SetId::A, SetId::B, SetId::C] {
            assert!(inst.set(id).iter().all(|v| v.rem_euclid(2) == 1));
        }
        assert_eq!(three_sum_oracle(&inst), None);
    }

    #[test]
    fn planted_instances_have_a_witness() {
        let inst = generate(Distribution::Planted, 8, 7).unwrap();
        let w = three_sum_oracle(&inst).expect("planted");
        assert!(inst.verifies(&w));
    }

    #[test]
    fn uniform_oracles_agree() {
        let inst = generate(Distribution::Uniform, 64, 3).unwrap();
        assert_eq!(three_sum_oracle(&inst).is_some(), three_sum_two_pointer(&inst).is_some());
    }

    #[test]
    fn generator_is_deterministic_and_validates() {
        assert_eq!(generate(Distribution::Clustered, 50, 9).unwrap(), generate(Distribution::Clustered, 50, 9).unwrap());
        assert_eq!(generate(Distribution::Uniform, 0, 1), Err(Error::EmptyInstance));
        assert!(matches!("gaussian".parse::<Distribution>(), Err(Error::UnknownDistribution(_))));
        assert_eq!("no-solution-parity".parse::<Distribution>().unwrap(), Distribution::NoSolutionParity);
    }

    #[test]
    fn oracle_small_cases() {
        let inst = ThreeSumInstance::new(vec![1], vec![2], vec![-3]).unwrap();
        let w = three_sum_oracle(&inst).unwrap();
        assert_eq!(w.indices, vec![0, 0, 0]);
        assert_eq!(w.values, vec![1, 2, -3]);

        let inst = ThreeSumInstance::new(vec![1], vec![2], vec![4]).unwrap();
        assert_eq!(three_sum_oracle(&inst), None);

        // -5 + 2 + 3 is the first zero in lexicographic order
        let inst = ThreeSumInstance::new(vec![-5, 1, 4], vec![0, 2], vec![-6, 3]).unwrap();
        let w = three_sum_oracle(&inst).unwrap();
        assert_eq!(w.values, vec![-5, 2, 3]);
        assert_eq!(w.indices, vec![0, 1, 1]);
    }

    #[test]
    fn kldt_oracle_small_cases() {
        let inst = KLdtInstance::new(3, vec![0, 1, 1, 1], vec![-3, 1, 2]).unwrap();
        let w = k_ldt_oracle(&inst).unwrap();
        assert!(inst.verifies(&w));
        let mut vals = w.values.clone();
        vals.sort();
        assert_eq!(vals, vec![-3, 1, 2]);

        let inst = KLdtInstance::new(5, vec![0, 1, 1, 1, 1, 1], vec![-4, 1]).unwrap();
        let w = k_ldt_oracle(&inst).unwrap();
        let mut vals = w.values.clone();
        vals.sort();
        assert_eq!(vals, vec![-4, 1, 1, 1, 1]);

        let inst = KLdtInstance::new(3, vec![0, 2, 1, -1], vec![1, 3, 5]).unwrap();
        let w = k_ldt_oracle(&inst).unwrap();
        assert!(inst.verifies(&w));
        // 2*1 + 1 - 3 = 0 comes first in lex order
        assert_eq!(w.values, vec![1, 1, 3]);
    }

    #[test]
    fn kldt_validation() {
        assert!(KLdtInstance::new(4, vec![0; 5], vec![1]).is_err());
        assert!(KLdtInstance::new(3, vec![0, 1, 0, 1], vec![1]).is_err());
        assert!(KLdtInstance::new(3, vec![0, 1, 1], vec![1]).is_err());
    }

    #[test]
    fn scalar_bound_is_enforced() {
        assert!(matches!(ThreeSumInstance::new(vec![1 << 40], vec![], vec![]), Err(Error::ScalarOutOfRange(_))));
        assert!(ThreeSumInstance::new(vec![(1 << 40) - 1], vec![], vec![]).is_ok());
    }

    #[test]
    fn json_round_trip_uses_decimal_strings() {
        let inst = ThreeSumInstance::new(vec![3, -1], vec![1_000_000_000_000], vec![-7]).unwrap();
        let text = to_json(&InstanceFile::from(&inst));
        assert!(text.contains("\"1000000000000\""));
        assert_eq!(from_json(&text).unwrap(), AnyInstance::ThreeSum(inst));

        let k = KLdtInstance::new(5, vec![0, 1, 1, 1, 1, 1], vec![-4, 1]).unwrap();
        let text = to_json(&InstanceFile::from(&k));
        assert!(text.starts_with("{\"k\":5"));
        assert_eq!(from_json(&text).unwrap(), AnyInstance::KLdt(k));

        assert!(matches!(from_json("{\"A\":[\"x\"],\"B\":[],\"C\":[]}"), Err(Error::Format(_))));
    }
}
