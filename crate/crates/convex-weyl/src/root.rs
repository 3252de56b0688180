//! Exact integer model of finite root systems.
//!
//! Roots are stored as integer coefficient vectors in the simple-root basis.
//! The symmetrized bilinear form (Cartan matrix times its symmetrizer) is the
//! single source of truth for lengths and pairings; everything is exact — no
//! floating point anywhere.

use std::collections::HashMap;

use num_rational::Ratio;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the total rank; keeps every exhaustive Weyl enumeration at
/// desk scale (covers all exceptional types and small products).
pub const RANK_CAP: usize = 8;

/// A root, as an exact integer coefficient vector in the simple-root basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    pub coeffs: Vec<i64>,
}

impl Root {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Root { coeffs }
    }

    /// Height: the coefficient sum (positive for positive roots).
    pub fn height(&self) -> i64 {
        self.coeffs.iter().sum()
    }
}

/// Cartan datum: series code, rank, Cartan matrix, and its symmetrizer.
///
/// Convention: `cartan[i][j] = ⟨α_j, α_i∨⟩ = 2(α_i, α_j)/(α_i, α_i)`, so the
/// symmetrized Gram matrix is `(α_i, α_j) = d_i · cartan[i][j]` with
/// `d_i = (α_i, α_i)/2` the symmetrizer entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanDatum {
    pub code: String,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub symmetrizer: Vec<i64>,
}

impl CartanDatum {
    /// Parse a series code such as `"A2"`, `"B3"`, `"G2"`, or a product
    /// `"A1xA1"` (block-diagonal Cartan matrix).
    pub fn from_code(code: &str) -> Result<Self> {
        let mut blocks: Vec<Vec<Vec<i64>>> = Vec::new();
        for part in code.split(['x', '*']) {
            blocks.push(series_block(part)?);
        }
        let rank: usize = blocks.iter().map(|b| b.len()).sum();
        let mut cartan = vec![vec![0i64; rank]; rank];
        let mut off = 0;
        for b in &blocks {
            let n = b.len();
            for i in 0..n {
                for j in 0..n {
                    cartan[off + i][off + j] = b[i][j];
                }
            }
            off += n;
        }
        Self::from_matrix(code.to_string(), cartan)
    }

    /// Validate an explicit Cartan matrix and compute its symmetrizer.
    pub fn from_matrix(code: String, cartan: Vec<Vec<i64>>) -> Result<Self> {
        let rank = cartan.len();
        if rank == 0 {
            return Err(Error::InvalidCartan("empty matrix".into()));
        }
        if rank > RANK_CAP {
            return Err(Error::InvalidCartan(format!(
                "rank {rank} exceeds the cap of {RANK_CAP}"
            )));
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != rank {
                return Err(Error::InvalidCartan(format!(
                    "row {i} has length {} in a rank-{rank} matrix",
                    row.len()
                )));
            }
            if row[i] != 2 {
                return Err(Error::InvalidCartan(format!(
                    "diagonal entry ({i},{i}) is {}, must be 2",
                    row[i]
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if i != j && v > 0 {
                    return Err(Error::InvalidCartan(format!(
                        "off-diagonal entry ({i},{j}) is {v}, must be ≤ 0"
                    )));
                }
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                if (cartan[i][j] == 0) != (cartan[j][i] == 0) {
                    return Err(Error::InvalidCartan(format!(
                        "entries ({i},{j}) and ({j},{i}) must vanish together"
                    )));
                }
            }
        }
        let symmetrizer = compute_symmetrizer(&cartan)?;
        // Positive definiteness of the symmetrized Gram matrix, via exact
        // leading principal minors.
        let gram: Vec<Vec<i128>> = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| symmetrizer[i] as i128 * cartan[i][j] as i128)
                    .collect()
            })
            .collect();
        for k in 1..=rank {
            if leading_minor(&gram, k) <= 0 {
                return Err(Error::InvalidCartan(format!(
                    "symmetrized matrix is not positive definite (leading {k}×{k} minor ≤ 0)"
                )));
            }
        }
        Ok(CartanDatum {
            code,
            rank,
            cartan,
            symmetrizer,
        })
    }
}

fn series_block(part: &str) -> Result<Vec<Vec<i64>>> {
    let part = part.trim();
    let mut chars = part.chars();
    let series = chars
        .next()
        .ok_or_else(|| Error::InvalidCartan("empty series code".into()))?;
    let n: usize = chars
        .as_str()
        .parse()
        .map_err(|_| Error::InvalidCartan(format!("cannot parse rank in '{part}'")))?;
    let bad = |msg: &str| Error::InvalidCartan(format!("'{part}': {msg}"));
    let chain = |n: usize| -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            m[i][i] = 2;
            if i + 1 < n {
                m[i][i + 1] = -1;
                m[i + 1][i] = -1;
            }
        }
        m
    };
    match series {
        'A' => {
            if n < 1 {
                return Err(bad("A_n needs n ≥ 1"));
            }
            Ok(chain(n))
        }
        'B' => {
            if n < 2 {
                return Err(bad("B_n needs n ≥ 2"));
            }
            let mut m = chain(n);
            // Last simple root short: ⟨α_{n-2}, α_{n-1}∨⟩ = −2.
            m[n - 1][n - 2] = -2;
            Ok(m)
        }
        'C' => {
            if n < 2 {
                return Err(bad("C_n needs n ≥ 2"));
            }
            let mut m = chain(n);
            // Last simple root long: ⟨α_{n-1}, α_{n-2}∨⟩ = −2.
            m[n - 2][n - 1] = -2;
            Ok(m)
        }
        'D' => {
            if n < 3 {
                return Err(bad("D_n needs n ≥ 3"));
            }
            let mut m = chain(n - 1);
            for row in &mut m {
                row.push(0);
            }
            m.push(vec![0; n]);
            m[n - 1][n - 1] = 2;
            // Node n-1 attaches to node n-3 (fork).
            m[n - 1][n - 3] = -1;
            m[n - 3][n - 1] = -1;
            Ok(m)
        }
        'E' => {
            if !(6..=8).contains(&n) {
                return Err(bad("E_n needs n ∈ {6,7,8}"));
            }
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                m[i][i] = 2;
            }
            // Bourbaki numbering: chain 1–3–4–5–…–n with 2 attached to 4.
            let mut edge = |a: usize, b: usize| {
                m[a - 1][b - 1] = -1;
                m[b - 1][a - 1] = -1;
            };
            edge(1, 3);
            edge(3, 4);
            edge(2, 4);
            for k in 4..n {
                edge(k, k + 1);
            }
            Ok(m)
        }
        'F' => {
            if n != 4 {
                return Err(bad("F_n needs n = 4"));
            }
            Ok(vec![
                vec![2, -1, 0, 0],
                vec![-1, 2, -1, 0],
                vec![0, -2, 2, -1],
                vec![0, 0, -1, 2],
            ])
        }
        'G' => {
            if n != 2 {
                return Err(bad("G_n needs n = 2"));
            }
            Ok(vec![vec![2, -1], vec![-3, 2]])
        }
        _ => Err(bad("unknown series letter")),
    }
}

/// Minimal positive integer diagonal `d` with `d_i a_ij = d_j a_ji`,
/// spread across the Dynkin graph per connected component.
fn compute_symmetrizer(cartan: &[Vec<i64>]) -> Result<Vec<i64>> {
    let n = cartan.len();
    let mut d: Vec<Option<Ratio<i64>>> = vec![None; n];
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Ratio::one());
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let di = d[i].unwrap();
            for j in 0..n {
                if i == j || cartan[i][j] == 0 {
                    continue;
                }
                // d_j = d_i · a_ij / a_ji
                let dj = di * Ratio::new(cartan[i][j], cartan[j][i]);
                match d[j] {
                    None => {
                        d[j] = Some(dj);
                        stack.push(j);
                    }
                    Some(prev) => {
                        if prev != dj {
                            return Err(Error::InvalidCartan(
                                "matrix is not symmetrizable".into(),
                            ));
                        }
                    }
                }
            }
        }
    }
    // Scale each connected component is unnecessary: scale globally to the
    // least common denominator, then divide by the overall gcd.
    let mut lcm: i64 = 1;
    for v in d.iter().flatten() {
        lcm = num_integer_lcm(lcm, *v.denom());
    }
    let mut out: Vec<i64> = d
        .into_iter()
        .map(|v| {
            let v = v.unwrap() * Ratio::from_integer(lcm);
            debug_assert!(v.is_integer() && v.is_positive());
            v.to_integer()
        })
        .collect();
    let mut g = 0i64;
    for &v in &out {
        g = num_integer_gcd(g, v);
    }
    if g > 1 {
        for v in &mut out {
            *v /= g;
        }
    }
    Ok(out)
}

fn num_integer_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / num_integer_gcd(a, b) * b
    }
}

/// Exact leading `k×k` principal minor via fraction-free Bareiss elimination.
fn leading_minor(m: &[Vec<i128>], k: usize) -> i128 {
    let mut a: Vec<Vec<i128>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
    det_bareiss(&mut a)
}

/// Exact determinant of a square integer matrix (destructive Bareiss).
pub(crate) fn det_bareiss(a: &mut Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            // Pivot search.
            let mut found = None;
            for r in k + 1..n {
                if a[r][k] != 0 {
                    found = Some(r);
                    break;
                }
            }
            match found {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// The full root system: all roots in canonical order, sign markers, the
/// addition table, and the Cartan pairing. Immutable after construction.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub datum: CartanDatum,
    roots: Vec<Root>,
    index: HashMap<Vec<i64>, usize>,
    positive: Vec<bool>,
    neg_of: Vec<usize>,
    simple_idx: Vec<usize>,
    addition: HashMap<(usize, usize), usize>,
}

/// Construct the full root system generated from the simple roots by simple
/// reflections, in the canonical (height, then lexicographic) order.
pub fn build_root_system(datum: CartanDatum) -> Result<RootSystem> {
    RootSystem::build(datum)
}

impl RootSystem {
    pub fn build(datum: CartanDatum) -> Result<Self> {
        let rank = datum.rank;
        let mut set: HashMap<Vec<i64>, ()> = HashMap::new();
        let mut queue: Vec<Vec<i64>> = Vec::new();
        for i in 0..rank {
            let mut v = vec![0i64; rank];
            v[i] = 1;
            set.insert(v.clone(), ());
            queue.push(v);
        }
        while let Some(v) = queue.pop() {
            for i in 0..rank {
                let w = simple_reflect(&datum, &v, i);
                if !set.contains_key(&w) {
                    set.insert(w.clone(), ());
                    queue.push(w);
                }
            }
        }
        let mut roots: Vec<Root> = set.into_keys().map(Root::new).collect();
        roots.sort_by(|a, b| {
            (a.height(), &a.coeffs).cmp(&(b.height(), &b.coeffs))
        });
        let index: HashMap<Vec<i64>, usize> = roots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.coeffs.clone(), i))
            .collect();
        let mut positive = Vec::with_capacity(roots.len());
        for r in &roots {
            let pos = r.coeffs.iter().all(|&c| c >= 0);
            let neg = r.coeffs.iter().all(|&c| c <= 0);
            if pos == neg {
                return Err(Error::Internal(format!(
                    "mixed-sign root generated: {:?}",
                    r.coeffs
                )));
            }
            positive.push(pos);
        }
        let neg_of: Vec<usize> = roots
            .iter()
            .map(|r| {
                let neg: Vec<i64> = r.coeffs.iter().map(|&c| -c).collect();
                *index.get(&neg).ok_or(()).expect("root set closed under negation")
            })
            .collect();
        let simple_idx: Vec<usize> = (0..rank)
            .map(|i| {
                let mut v = vec![0i64; rank];
                v[i] = 1;
                index[&v]
            })
            .collect();
        let mut addition = HashMap::new();
        for a in 0..roots.len() {
            for b in 0..roots.len() {
                let sum: Vec<i64> = roots[a]
                    .coeffs
                    .iter()
                    .zip(&roots[b].coeffs)
                    .map(|(x, y)| x + y)
                    .collect();
                if let Some(&s) = index.get(&sum) {
                    addition.insert((a, b), s);
                }
            }
        }
        Ok(RootSystem {
            datum,
            roots,
            index,
            positive,
            neg_of,
            simple_idx,
            addition,
        })
    }

    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn num_positive(&self) -> usize {
        self.roots.len() / 2
    }

    pub fn root(&self, i: usize) -> &Root {
        &self.roots[i]
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn index_of(&self, r: &Root) -> Option<usize> {
        self.index.get(&r.coeffs).copied()
    }

    pub fn index_of_coeffs(&self, coeffs: &[i64]) -> Option<usize> {
        self.index.get(coeffs).copied()
    }

    /// Index of a root, or a `ForeignRoot` error.
    pub fn require(&self, r: &Root) -> Result<usize> {
        self.index_of(r)
            .ok_or_else(|| Error::ForeignRoot(r.coeffs.clone()))
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.positive[i]
    }

    pub fn negate(&self, i: usize) -> usize {
        self.neg_of[i]
    }

    pub fn height(&self, i: usize) -> i64 {
        self.roots[i].height()
    }

    /// Index of the `i`-th simple root.
    pub fn simple(&self, i: usize) -> usize {
        self.simple_idx[i]
    }

    pub fn positive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roots.len()).filter(move |&i| self.positive[i])
    }

    /// Root addition: `Some(a+b)` iff `a+b ∈ Φ` (never defined for `a = −b`).
    pub fn add_indices(&self, a: usize, b: usize) -> Option<usize> {
        self.addition.get(&(a, b)).copied()
    }

    /// Symmetrized bilinear form `(a, b)` on arbitrary coefficient vectors.
    pub fn inner(&self, a: &[i64], b: &[i64]) -> i64 {
        let d = &self.datum;
        let mut s = 0i64;
        for i in 0..d.rank {
            if a[i] == 0 {
                continue;
            }
            for j in 0..d.rank {
                s += a[i] * b[j] * d.symmetrizer[i] * d.cartan[i][j];
            }
        }
        s
    }

    /// Cartan pairing `⟨a, b∨⟩ = 2(a,b)/(b,b)` between root indices.
    pub fn pairing_indices(&self, a: usize, b: usize) -> i64 {
        let av = &self.roots[a].coeffs;
        let bv = &self.roots[b].coeffs;
        let num = 2 * self.inner(av, bv);
        let den = self.inner(bv, bv);
        debug_assert!(den > 0 && num % den == 0);
        num / den
    }

    /// `⟨v, α_i∨⟩` for an arbitrary coefficient vector against a simple
    /// coroot; always an integer by the Cartan-matrix convention.
    pub fn pairing_with_simple_coroot(&self, v: &[i64], i: usize) -> i64 {
        (0..self.datum.rank)
            .map(|j| v[j] * self.datum.cartan[i][j])
            .sum()
    }

    /// The simple reflection `s_i` as a permutation of the root index set.
    pub fn simple_reflection_perm(&self, i: usize) -> Vec<usize> {
        (0..self.roots.len())
            .map(|r| {
                let v = simple_reflect(&self.datum, &self.roots[r].coeffs, i);
                self.index[&v]
            })
            .collect()
    }

    /// Reflection in an arbitrary root, as a root-index permutation.
    pub fn reflection_perm(&self, b: usize) -> Vec<usize> {
        (0..self.roots.len())
            .map(|a| {
                let k = self.pairing_indices(a, b);
                let v: Vec<i64> = self.roots[a]
                    .coeffs
                    .iter()
                    .zip(&self.roots[b].coeffs)
                    .map(|(x, y)| x - k * y)
                    .collect();
                self.index[&v]
            })
            .collect()
    }
}

fn simple_reflect(datum: &CartanDatum, v: &[i64], i: usize) -> Vec<i64> {
    let k: i64 = (0..datum.rank).map(|j| v[j] * datum.cartan[i][j]).sum();
    let mut w = v.to_vec();
    w[i] -= k;
    w
}

/// Root addition at the `Root` value level.
pub fn add_roots(rs: &RootSystem, a: &Root, b: &Root) -> Result<Option<Root>> {
    let ai = rs.require(a)?;
    let bi = rs.require(b)?;
    Ok(rs.add_indices(ai, bi).map(|s| rs.root(s).clone()))
}

/// Cartan pairing `⟨a, b∨⟩` at the `Root` value level.
pub fn cartan_pairing(rs: &RootSystem, a: &Root, b: &Root) -> Result<i64> {
    let ai = rs.require(a)?;
    let bi = rs.require(b)?;
    Ok(rs.pairing_indices(ai, bi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use std::collections::HashSet;

    fn rs(code: &str) -> RootSystem {
        build_root_system(CartanDatum::from_code(code).unwrap()).unwrap()
    }

    /// Independent closure oracle: generate the root set by closing the
    /// simple roots under *all* reflections, with rational arithmetic over
    /// the symmetrized Gram matrix (different code path from production,
    /// which uses integer simple reflections only).
    fn closure_oracle(datum: &CartanDatum) -> HashSet<Vec<i64>> {
        let n = datum.rank;
        let gram: Vec<Vec<Ratio<i64>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Ratio::from_integer(datum.symmetrizer[i] * datum.cartan[i][j]))
                    .collect()
            })
            .collect();
        let form = |a: &[Ratio<i64>], b: &[Ratio<i64>]| -> Ratio<i64> {
            let mut s = Ratio::from_integer(0);
            for i in 0..n {
                for j in 0..n {
                    s += a[i] * b[j] * gram[i][j];
                }
            }
            s
        };
        let to_r = |v: &[i64]| -> Vec<Ratio<i64>> {
            v.iter().map(|&c| Ratio::from_integer(c)).collect()
        };
        let mut set: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: Vec<Vec<i64>> = Vec::new();
        for i in 0..n {
            let mut v = vec![0i64; n];
            v[i] = 1;
            set.insert(v.clone());
            queue.push(v);
        }
        while let Some(v) = queue.pop() {
            let snapshot: Vec<Vec<i64>> = set.iter().cloned().collect();
            for b in snapshot {
                let vr = to_r(&v);
                let br = to_r(&b);
                let k = Ratio::from_integer(2) * form(&vr, &br) / form(&br, &br);
                assert!(k.is_integer());
                let refl: Vec<i64> = (0..n).map(|i| v[i] - k.to_integer() * b[i]).collect();
                if set.insert(refl.clone()) {
                    queue.push(refl);
                }
            }
        }
        // Close under negation as well (reflections of α in α give −α, so
        // this is automatic; keep it explicit for the oracle's honesty).
        let negs: Vec<Vec<i64>> = set.iter().map(|v| v.iter().map(|c| -c).collect()).collect();
        set.extend(negs);
        set
    }

    #[track_caller]
    fn assert_counts(code: &str, total: usize, positive: usize) {
        let r = rs(code);
        assert_eq!(r.num_roots(), total, "total roots of {code}");
        assert_eq!(r.num_positive(), positive, "positive roots of {code}");
        let oracle = closure_oracle(&r.datum);
        assert_eq!(oracle.len(), total, "oracle count for {code}");
        for root in r.roots() {
            assert!(oracle.contains(&root.coeffs));
        }
    }

    #[test]
    fn root_counts_match_closure_oracle() {
        assert_counts("A1", 2, 1);
        assert_counts("A2", 6, 3);
        assert_counts("A3", 12, 6);
        assert_counts("B2", 8, 4);
        assert_counts("B3", 18, 9);
        assert_counts("C3", 18, 9);
        assert_counts("D4", 24, 12);
        assert_counts("G2", 12, 6);
        assert_counts("F4", 48, 24);
        assert_counts("A1xA1", 4, 2);
        assert_counts("A2xA1", 8, 4);
    }

    #[test]
    fn negation_and_sign_split() {
        for code in ["A3", "B3", "G2", "A1xA1"] {
            let r = rs(code);
            for i in 0..r.num_roots() {
                let n = r.negate(i);
                assert_ne!(i, n);
                assert_eq!(r.negate(n), i);
                assert_ne!(r.is_positive(i), r.is_positive(n));
            }
        }
    }

    #[test]
    fn reflection_closure_invariant() {
        for code in ["A2", "B2", "G2", "B3"] {
            let r = rs(code);
            for b in 0..r.num_roots() {
                let perm = r.reflection_perm(b);
                // Involutive permutation of the root set.
                for a in 0..r.num_roots() {
                    assert_eq!(perm[perm[a]], a);
                }
                assert_eq!(perm[b], r.negate(b));
            }
        }
    }

    #[test]
    fn addition_table_symmetry() {
        for code in ["A2", "B2", "G2"] {
            let r = rs(code);
            for a in 0..r.num_roots() {
                for b in 0..r.num_roots() {
                    assert_eq!(r.add_indices(a, b), r.add_indices(b, a));
                }
                assert_eq!(r.add_indices(a, r.negate(a)), None);
            }
        }
    }

    #[test]
    fn a2_addition_examples() {
        let r = rs("A2");
        let a1 = r.simple(0);
        let a2 = r.simple(1);
        let sum = r.add_indices(a1, a2).unwrap();
        assert_eq!(r.root(sum).coeffs, vec![1, 1]);
        assert_eq!(r.add_indices(a1, a1), None);
    }

    #[test]
    fn cartan_pairing_examples() {
        let a2 = rs("A2");
        let (s1, s2) = (a2.simple(0), a2.simple(1));
        assert_eq!(a2.pairing_indices(s1, s1), 2);
        assert_eq!(a2.pairing_indices(s1, s2), -1);

        let g2 = rs("G2");
        // In our G2 convention the first simple root is long.
        let (long, short) = (g2.simple(0), g2.simple(1));
        assert!(g2.inner(&g2.root(long).coeffs, &g2.root(long).coeffs)
            > g2.inner(&g2.root(short).coeffs, &g2.root(short).coeffs));
        assert_eq!(g2.pairing_indices(long, short), -3);
        assert_eq!(g2.pairing_indices(short, long), -1);
    }

    #[test]
    fn positive_count_equals_reflection_count() {
        for code in ["A3", "B3", "G2", "D4"] {
            let r = rs(code);
            let mut reflections: HashSet<Vec<usize>> = HashSet::new();
            for b in 0..r.num_roots() {
                reflections.insert(r.reflection_perm(b));
            }
            assert_eq!(reflections.len(), r.num_positive());
        }
    }

    #[test]
    fn bad_cartan_rejected() {
        assert!(CartanDatum::from_matrix("bad".into(), vec![vec![1]]).is_err());
        assert!(CartanDatum::from_matrix(
            "bad".into(),
            vec![vec![2, 1], vec![1, 2]]
        )
        .is_err());
        // Affine A1 matrix: symmetrizable but not positive definite.
        assert!(CartanDatum::from_matrix(
            "bad".into(),
            vec![vec![2, -2], vec![-2, 2]]
        )
        .is_err());
        // Vanishing pattern asymmetric.
        assert!(CartanDatum::from_matrix(
            "bad".into(),
            vec![vec![2, 0], vec![-1, 2]]
        )
        .is_err());
        assert!(CartanDatum::from_code("Z9").is_err());
        assert!(CartanDatum::from_code("A9").is_err());
    }

    #[test]
    fn canonical_order_is_height_then_lex() {
        let r = rs("B3");
        for w in r.roots().windows(2) {
            let ka = (w[0].height(), &w[0].coeffs);
            let kb = (w[1].height(), &w[1].coeffs);
            assert!(ka < kb);
        }
    }
}
