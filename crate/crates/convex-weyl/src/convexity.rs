//! Convexity theory for twisted Weyl elements: the inversion set `Δ_x`, the
//! sign-change counts `n_x`, quasi-convexity/convexity certificates, the
//! subadditivity and order harnesses, and the standard-convex chamber search.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::RootSystem;
use crate::twisted::{
    enumerate_weyl, is_elliptic, twisted_inverse, DiagramAut, TwistedClass, TwistedElement,
};

/// `Δ_x = Φ⁺ ∩ x(Φ⁻)`: the positive roots whose `x`-preimage is negative.
/// Returned sorted in canonical root order.
pub fn delta_set(rs: &RootSystem, x: &TwistedElement) -> Vec<usize> {
    let mut out: Vec<usize> = (0..rs.num_roots())
        .filter(|&a| !rs.is_positive(a) && rs.is_positive(x.act_index(a)))
        .map(|a| x.act_index(a))
        .collect();
    out.sort();
    out
}

/// `n_x(a)`: the least `i ≥ 1` with `x^i(a)` of the opposite sign to `a`.
/// Well-defined exactly when `x` is elliptic; bounded by the order of the
/// root permutation.
pub fn n_value(rs: &RootSystem, x: &TwistedElement, a: usize) -> Result<u32> {
    if !is_elliptic(rs, x) {
        return Err(Error::NotElliptic(
            "n_x is only well-defined for elliptic x".into(),
        ));
    }
    n_value_unchecked(rs, x, a)
}

fn n_value_unchecked(rs: &RootSystem, x: &TwistedElement, a: usize) -> Result<u32> {
    let sign = rs.is_positive(a);
    let bound = x.order();
    let mut cur = a;
    for i in 1..=bound {
        cur = x.act_index(cur);
        if rs.is_positive(cur) != sign {
            return Ok(i as u32);
        }
    }
    Err(Error::Internal(format!(
        "no sign change within the permutation order for root {a}; element not elliptic?"
    )))
}

fn n_table(rs: &RootSystem, x: &TwistedElement) -> Result<Vec<u32>> {
    (0..rs.num_roots())
        .map(|a| n_value_unchecked(rs, x, a))
        .collect()
}

/// Full convexity certificate for an elliptic `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    /// `Δ_x`, sorted root indices.
    pub delta_x: Vec<usize>,
    /// `n_x` on every root, aligned with the canonical root order.
    pub n_table: Vec<u32>,
    /// `n_{x⁻¹}` on every root.
    pub n_table_inv: Vec<u32>,
    /// Quasi-convexity violations `(α, β, α+β)` for `x` (same-sign pairs).
    pub qc_violations: Vec<(usize, usize, usize)>,
    /// Same for `x⁻¹`.
    pub qc_violations_inv: Vec<(usize, usize, usize)>,
    /// Violations among mixed-sign pairs (one positive, one negative), for
    /// `x` and `x⁻¹` together; only populated when requested. Tracks whether
    /// the inclusive reading of the defining condition would change the
    /// verdict.
    pub mixed_violations: Vec<(usize, usize, usize)>,
    /// `x` and `x⁻¹` both quasi-convex (same-sign reading).
    pub convex: bool,
}

/// Quasi-convexity violations of a single element against a given `n`-table:
/// same-sign pairs `α, β` with `α+β ∈ Φ` and `n(α+β) > max(n(α), n(β))`.
fn qc_violations(rs: &RootSystem, n: &[u32]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..rs.num_roots() {
        for b in (a + 1)..rs.num_roots() {
            if rs.is_positive(a) != rs.is_positive(b) {
                continue;
            }
            if let Some(s) = rs.add_indices(a, b) {
                if n[s] > n[a].max(n[b]) {
                    out.push((a, b, s));
                }
            }
        }
    }
    out
}

fn mixed_violations(rs: &RootSystem, n: &[u32], n_inv: &[u32]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..rs.num_roots() {
        for b in (a + 1)..rs.num_roots() {
            if rs.is_positive(a) == rs.is_positive(b) {
                continue;
            }
            if let Some(s) = rs.add_indices(a, b) {
                if n[s] > n[a].max(n[b]) || n_inv[s] > n_inv[a].max(n_inv[b]) {
                    out.push((a, b, s));
                }
            }
        }
    }
    out
}

/// Compute the certificate over same-sign pairs (the defining reading).
pub fn convexity_certificate(
    rs: &RootSystem,
    sigma: &DiagramAut,
    x: &TwistedElement,
) -> Result<ConvexityCertificate> {
    convexity_certificate_with(rs, sigma, x, false)
}

/// Certificate variant that additionally scans mixed-sign pairs.
pub fn convexity_certificate_with(
    rs: &RootSystem,
    sigma: &DiagramAut,
    x: &TwistedElement,
    include_mixed: bool,
) -> Result<ConvexityCertificate> {
    if !is_elliptic(rs, x) {
        return Err(Error::NotElliptic(
            "convexity certificates require an elliptic element".into(),
        ));
    }
    let x_inv = twisted_inverse(rs, sigma, x)?;
    let n = n_table(rs, x)?;
    let n_inv = n_table(rs, &x_inv)?;
    let v = qc_violations(rs, &n);
    let v_inv = qc_violations(rs, &n_inv);
    let mixed = if include_mixed {
        mixed_violations(rs, &n, &n_inv)
    } else {
        Vec::new()
    };
    let convex = v.is_empty() && v_inv.is_empty();
    Ok(ConvexityCertificate {
        delta_x: delta_set(rs, x),
        n_table: n,
        n_table_inv: n_inv,
        qc_violations: v,
        qc_violations_inv: v_inv,
        mixed_violations: mixed,
        convex,
    })
}

/// The convex members of a conjugacy class (empty for non-elliptic classes;
/// expected nonempty for elliptic ones, which is checked by the test suites,
/// not assumed here).
pub fn convex_elements_of_class(
    rs: &RootSystem,
    sigma: &DiagramAut,
    cls: &TwistedClass,
) -> Vec<TwistedElement> {
    if !cls.elliptic {
        return Vec::new();
    }
    cls.members
        .iter()
        .filter(|m| {
            convexity_certificate(rs, sigma, m)
                .map(|c| c.convex)
                .unwrap_or(false)
        })
        .cloned()
        .collect()
}

/// Subadditivity harness: for a quasi-convex elliptic `x`, checks
/// `n_x(iα + jβ) ≤ max(n_x(α), n_x(β))` over all `α, β ∈ Φ⁺` and `i, j ≥ 1`
/// with `iα + jβ ∈ Φ`. Returns the violations (expected empty).
pub fn subadditive_check(
    rs: &RootSystem,
    x: &TwistedElement,
) -> Result<Vec<(usize, usize, i64, i64, usize)>> {
    if !is_elliptic(rs, x) {
        return Err(Error::NotElliptic("subadditivity requires elliptic x".into()));
    }
    let n = n_table(rs, x)?;
    if !qc_violations(rs, &n).is_empty() {
        return Err(Error::Precondition(
            "subadditive_check requires a quasi-convex element".into(),
        ));
    }
    let max_coeff = rs
        .roots()
        .iter()
        .flat_map(|r| r.coeffs.iter().map(|c| c.abs()))
        .max()
        .unwrap_or(1);
    let mut out = Vec::new();
    let positives: Vec<usize> = rs.positive_indices().collect();
    for &a in &positives {
        for &b in &positives {
            if b < a {
                continue;
            }
            for i in 1..=max_coeff {
                for j in 1..=max_coeff {
                    let v: Vec<i64> = rs
                        .root(a)
                        .coeffs
                        .iter()
                        .zip(&rs.root(b).coeffs)
                        .map(|(&ca, &cb)| i * ca + j * cb)
                        .collect();
                    if let Some(s) = rs.index_of_coeffs(&v) {
                        if n[s] > n[a].max(n[b]) {
                            out.push((a, b, i, j, s));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Bounded decision procedure for membership in the nonnegative integer
/// cone spanned by a set of positive roots. Memoized per instance.
pub struct Cone<'a> {
    rs: &'a RootSystem,
    generators: Vec<usize>,
    memo: HashMap<(usize, Vec<i64>), bool>,
}

impl<'a> Cone<'a> {
    pub fn new(rs: &'a RootSystem, generators: Vec<usize>) -> Self {
        Cone {
            rs,
            generators,
            memo: HashMap::new(),
        }
    }

    /// Is `target` a `ℤ_{≥0}`-combination of the generators (zero counts)?
    pub fn contains(&mut self, target: &[i64]) -> bool {
        self.rec(0, target.to_vec())
    }

    fn rec(&mut self, k: usize, target: Vec<i64>) -> bool {
        if target.iter().all(|&c| c == 0) {
            return true;
        }
        // Every generator is a positive root, so heights are ≥ 1 and any
        // representable target has nonnegative height.
        let height: i64 = target.iter().sum();
        if height <= 0 || k >= self.generators.len() {
            return false;
        }
        let key = (k, target.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let g = self.rs.root(self.generators[k]).coeffs.clone();
        let mut ok = false;
        let mut t = target.clone();
        // Multiplicity 0, 1, 2, … of generator k, then move on.
        loop {
            if self.rec(k + 1, t.clone()) {
                ok = true;
                break;
            }
            for (ti, gi) in t.iter_mut().zip(&g) {
                *ti -= gi;
            }
            if t.iter().sum::<i64>() < 0 {
                break;
            }
        }
        self.memo.insert(key, ok);
        ok
    }
}

/// A violation of the order harness: which clause failed on which pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderViolation {
    pub clause: u8,
    pub alpha: usize,
    pub beta: usize,
}

/// Order harness for a convex elliptic `x`: over all root pairs `(α, β)`
/// with `β − α ∈ ℤ_{≥0}Δ_x`, checks
/// (1) `α ∈ Φ⁺ ⇒ n_{x⁻¹}(β) ≤ n_{x⁻¹}(α)` and
/// (2) `α, x⁻¹(α) ∈ Φ⁻ ⇒ β ∈ Φ⁺ or n_x(β) ≤ n_x(α)`.
/// Returns the violations (expected empty).
pub fn order_lemma_check(
    rs: &RootSystem,
    sigma: &DiagramAut,
    x: &TwistedElement,
) -> Result<Vec<OrderViolation>> {
    let cert = convexity_certificate(rs, sigma, x)?;
    if !cert.convex {
        return Err(Error::Precondition(
            "order_lemma_check requires a convex element".into(),
        ));
    }
    let x_inv = twisted_inverse(rs, sigma, x)?;
    let mut cone = Cone::new(rs, cert.delta_x.clone());
    let mut out = Vec::new();
    for a in 0..rs.num_roots() {
        for b in 0..rs.num_roots() {
            if a == b {
                continue;
            }
            let diff: Vec<i64> = rs
                .root(b)
                .coeffs
                .iter()
                .zip(&rs.root(a).coeffs)
                .map(|(&cb, &ca)| cb - ca)
                .collect();
            if !cone.contains(&diff) {
                continue;
            }
            if rs.is_positive(a) && cert.n_table_inv[b] > cert.n_table_inv[a] {
                out.push(OrderViolation {
                    clause: 1,
                    alpha: a,
                    beta: b,
                });
            }
            if !rs.is_positive(a)
                && !rs.is_positive(x_inv.act_index(a))
                && !rs.is_positive(b)
                && cert.n_table[b] > cert.n_table[a]
            {
                out.push(OrderViolation {
                    clause: 2,
                    alpha: a,
                    beta: b,
                });
            }
        }
    }
    Ok(out)
}

/// A Levi subsystem: `Φ ∩ (ℝ-span of the generators)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviSubsystem {
    /// All roots of the subsystem, sorted root indices.
    pub roots: Vec<usize>,
    /// The generating subset used to build it.
    pub generators: Vec<usize>,
}

impl LeviSubsystem {
    /// Build from generator root indices: take the rational span, intersect
    /// with `Φ`.
    pub fn generate(rs: &RootSystem, generators: Vec<usize>) -> Self {
        let basis = row_echelon(
            generators
                .iter()
                .map(|&g| rs.root(g).coeffs.clone())
                .collect(),
        );
        let roots: Vec<usize> = (0..rs.num_roots())
            .filter(|&r| in_span(&basis, &rs.root(r).coeffs))
            .collect();
        LeviSubsystem { roots, generators }
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Set-wise stability under a twisted element's action.
    pub fn stable_under(&self, x: &TwistedElement) -> bool {
        let set: std::collections::HashSet<usize> = self.roots.iter().copied().collect();
        self.roots.iter().all(|&r| set.contains(&x.act_index(r)))
    }
}

/// Exact rational row echelon basis of a set of integer vectors.
fn row_echelon(rows: Vec<Vec<i64>>) -> Vec<Vec<num_rational::Ratio<i64>>> {
    use num_rational::Ratio;
    use num_traits::Zero;
    let mut basis: Vec<Vec<Ratio<i64>>> = Vec::new();
    for row in rows {
        let mut v: Vec<Ratio<i64>> = row.into_iter().map(Ratio::from_integer).collect();
        for b in &basis {
            let lead = b.iter().position(|c| !c.is_zero()).unwrap();
            if !v[lead].is_zero() {
                let f = v[lead] / b[lead];
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= f * bi;
                }
            }
        }
        if v.iter().any(|c| !c.is_zero()) {
            basis.push(v);
            basis.sort_by_key(|b| b.iter().position(|c| !c.is_zero()).unwrap());
        }
    }
    basis
}

fn in_span(basis: &[Vec<num_rational::Ratio<i64>>], target: &[i64]) -> bool {
    use num_rational::Ratio;
    use num_traits::Zero;
    let mut v: Vec<Ratio<i64>> = target.iter().map(|&c| Ratio::from_integer(c)).collect();
    for b in basis {
        let lead = b.iter().position(|c| !c.is_zero()).unwrap();
        if !v[lead].is_zero() {
            let f = v[lead] / b[lead];
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= f * bi;
            }
        }
    }
    v.iter().all(|c| c.is_zero())
}

/// All Levi subsystems of a root system (deduplicated spans of subsets of
/// positive roots, including the empty/torus one), in a deterministic order.
pub fn all_levi_subsystems(rs: &RootSystem) -> Vec<LeviSubsystem> {
    let positives: Vec<usize> = rs.positive_indices().collect();
    let rank = rs.rank();
    let mut seen: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    // A subsystem of rank d is spanned by d of its positive roots, so
    // subsets of size ≤ rank suffice.
    let mut subset = Vec::new();
    fn rec(
        rs: &RootSystem,
        positives: &[usize],
        start: usize,
        rank: usize,
        subset: &mut Vec<usize>,
        seen: &mut HashMap<Vec<usize>, Vec<usize>>,
    ) {
        let levi = LeviSubsystem::generate(rs, subset.clone());
        seen.entry(levi.roots.clone())
            .or_insert_with(|| subset.clone());
        if subset.len() == rank {
            return;
        }
        for i in start..positives.len() {
            subset.push(positives[i]);
            rec(rs, positives, i + 1, rank, subset, seen);
            subset.pop();
        }
    }
    rec(rs, &positives, 0, rank, &mut subset, &mut seen);
    let mut out: Vec<LeviSubsystem> = seen
        .into_iter()
        .map(|(roots, generators)| LeviSubsystem { roots, generators })
        .collect();
    out.sort_by(|a, b| (a.roots.len(), &a.roots).cmp(&(b.roots.len(), &b.roots)));
    out
}

/// Result of the standard-convex chamber search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StandardConvexResult {
    /// Root-index permutation of the chamber element `u ∈ W` (identity-based
    /// transport: the relabeled relative position is `u⁻¹ x0 u`); `None`
    /// when the search failed.
    pub chamber_element: Option<Vec<usize>>,
    /// The new simple roots `u(Δ)` in original coordinates.
    pub new_simple_roots: Vec<usize>,
    /// The relabeled relative position `u⁻¹ x0 u`.
    pub x_new: TwistedElement,
    /// The Levi is generated by a subset of the new simple roots.
    pub levi_is_standard: bool,
    /// The relabeled element is convex.
    pub x_convex: bool,
}

/// Brute-force chamber search: find `u ∈ W` (canonical enumeration order)
/// such that the Levi becomes standard and the relabeled relative position
/// `u⁻¹ x0 u` is convex. Non-existence returns both flags false (the test
/// suites treat that as a failure; the library does not).
pub fn find_standard_convex(
    rs: &RootSystem,
    sigma: &DiagramAut,
    levi: &LeviSubsystem,
    x0: &TwistedElement,
) -> Result<StandardConvexResult> {
    if !is_elliptic(rs, x0) {
        return Err(Error::NotElliptic(
            "standard-convex search requires an elliptic element".into(),
        ));
    }
    if !levi.stable_under(x0) {
        return Err(Error::Precondition(
            "the Levi subsystem is not stable under x0".into(),
        ));
    }
    let weyl = enumerate_weyl(rs, crate::twisted::DEFAULT_WEYL_CAP)?;
    for u in &weyl {
        let u_inv = {
            let mut inv = vec![0usize; u.len()];
            for (i, &v) in u.iter().enumerate() {
                inv[v] = i;
            }
            inv
        };
        // Levi standard in the chamber u(Δ) ⟺ u⁻¹(Φ_M) is generated by a
        // subset of Δ.
        let moved: Vec<usize> = levi.roots.iter().map(|&r| u_inv[r]).collect();
        if !generated_by_simple_subset(rs, &moved) {
            continue;
        }
        // Relabeled relative position.
        let action: Vec<usize> = (0..rs.num_roots())
            .map(|a| u_inv[x0.act_index(u[a])])
            .collect();
        let x_new = TwistedElement {
            action,
            sigma_power: x0.sigma_power,
        };
        let cert = convexity_certificate(rs, sigma, &x_new)?;
        if cert.convex {
            let new_simple_roots: Vec<usize> = (0..rs.rank()).map(|i| u[rs.simple(i)]).collect();
            return Ok(StandardConvexResult {
                chamber_element: Some(u.clone()),
                new_simple_roots,
                x_new,
                levi_is_standard: true,
                x_convex: true,
            });
        }
    }
    Ok(StandardConvexResult {
        chamber_element: None,
        new_simple_roots: Vec::new(),
        x_new: x0.clone(),
        levi_is_standard: false,
        x_convex: false,
    })
}

/// Is the given root subset generated by a subset of the simple roots?
/// Criterion: every positive member that is not the sum of two positive
/// members (an indecomposable) must be a simple root of `Φ`, and the
/// subsystem must be the full Levi span of those simples.
fn generated_by_simple_subset(rs: &RootSystem, subset: &[usize]) -> bool {
    let set: std::collections::HashSet<usize> = subset.iter().copied().collect();
    let positives: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&r| rs.is_positive(r))
        .collect();
    let simples: std::collections::HashSet<usize> = (0..rs.rank()).map(|i| rs.simple(i)).collect();
    let mut base = Vec::new();
    for &r in &positives {
        let decomposable = positives.iter().any(|&a| {
            positives
                .iter()
                .any(|&b| rs.add_indices(a, b) == Some(r) && a != r && b != r)
        });
        if !decomposable {
            if !simples.contains(&r) {
                return false;
            }
            base.push(r);
        }
    }
    // The simples found must regenerate the subsystem (Levi property).
    let levi = LeviSubsystem::generate(rs, base);
    levi.roots.iter().copied().collect::<std::collections::HashSet<_>>() == set
}
