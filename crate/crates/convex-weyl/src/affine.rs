//! Affine roots and the enlarged set with torus slices, apartment points,
//! jump sets, the twisted Frobenius action on affine roots, F-orbit orders
//! and sign-change sequences, and all Howe-datum bookkeeping: stratum
//! classification i(α)/r(α), subgroup support thresholds, level labels with
//! their symmetry, and the orbit pairing `O♭ = {h − f : f ∈ O}`.

use std::collections::HashSet;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::convexity::LeviSubsystem;
use crate::error::{Error, Result};
use crate::root::RootSystem;
use crate::twisted::TwistedElement;

pub type Rat = Ratio<i64>;

/// An element of the enlarged set of affine roots `Φ̃ = Φ_aff ⊔ ℤ_{≥0}`:
/// either `f = (α_f, n_f)` or a torus slice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AffineRoot {
    /// Torus slice at an integer level.
    Slice { level: u64 },
    /// `f = (α_f, n_f)` with `α_f` a root index and `n_f ∈ ℤ`.
    Vector { root: usize, level: i64 },
}

impl AffineRoot {
    pub fn vector_part(&self) -> Option<usize> {
        match self {
            AffineRoot::Vector { root, .. } => Some(*root),
            AffineRoot::Slice { .. } => None,
        }
    }
}

/// A point of the apartment, in rational coordinates: `coords[i] = α_i(x)`
/// for the simple roots `α_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApartmentPoint {
    pub coords: Vec<Rat>,
}

impl ApartmentPoint {
    pub fn origin(rank: usize) -> Self {
        ApartmentPoint {
            coords: vec![Rat::zero(); rank],
        }
    }

    /// Parse from a JSON array whose entries are integers or strings like
    /// `"1/2"`.
    pub fn from_config(v: &serde_json::Value, rank: usize) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Config("point must be an array".into()))?;
        if arr.len() != rank {
            return Err(Error::Config(format!(
                "point has {} coordinates, rank is {rank}",
                arr.len()
            )));
        }
        let coords = arr.iter().map(parse_rat).collect::<Result<Vec<_>>>()?;
        Ok(ApartmentPoint { coords })
    }
}

/// Parse a rational from a JSON integer or an `"a/b"` / `"a"` string.
pub fn parse_rat(v: &serde_json::Value) -> Result<Rat> {
    if let Some(n) = v.as_i64() {
        return Ok(Rat::from_integer(n));
    }
    if let Some(s) = v.as_str() {
        let mut parts = s.splitn(2, '/');
        let num: i64 = parts
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad rational {s:?}")))?;
        let den: i64 = match parts.next() {
            Some(d) => d
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad rational {s:?}")))?,
            None => 1,
        };
        if den == 0 {
            return Err(Error::Config(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(num, den));
    }
    Err(Error::Config(format!("cannot parse rational from {v}")))
}

/// `α(x)` for a root index.
pub fn eval_root_at(rs: &RootSystem, root: usize, pt: &ApartmentPoint) -> Rat {
    rs.root(root)
        .coeffs
        .iter()
        .zip(&pt.coords)
        .map(|(&c, x)| Rat::from_integer(c) * x)
        .sum()
}

/// `f(x) = α_f(x) + n_f` for vector roots, the level for slices.
pub fn eval_affine(rs: &RootSystem, f: &AffineRoot, pt: &ApartmentPoint) -> Rat {
    match f {
        AffineRoot::Vector { root, level } => {
            eval_root_at(rs, *root, pt) + Rat::from_integer(*level)
        }
        AffineRoot::Slice { level } => Rat::from_integer(*level as i64),
    }
}

/// The twisted Frobenius action on `Φ̃` at an F-fixed apartment point:
/// `F(α, n) = (x(α), n + α(pt) − x(α)(pt))`, trivial on slices. The level
/// `f(pt)` is preserved by construction.
pub struct AffineFrobenius<'a> {
    pub rs: &'a RootSystem,
    pub x: TwistedElement,
    pub pt: ApartmentPoint,
}

impl<'a> AffineFrobenius<'a> {
    /// Rejects points not fixed by the induced action (the translation
    /// parts must be integral).
    pub fn new(rs: &'a RootSystem, x: TwistedElement, pt: ApartmentPoint) -> Result<Self> {
        if pt.coords.len() != rs.rank() {
            return Err(Error::Config("point rank mismatch".into()));
        }
        for i in 0..rs.rank() {
            let a = rs.simple(i);
            let shift = eval_root_at(rs, a, &pt) - eval_root_at(rs, x.act_index(a), &pt);
            if !shift.is_integer() {
                return Err(Error::Precondition(format!(
                    "point is not fixed by the twisted action: α_{i} shifts by {shift}"
                )));
            }
        }
        Ok(AffineFrobenius { rs, x, pt })
    }

    pub fn apply(&self, f: &AffineRoot) -> AffineRoot {
        match f {
            AffineRoot::Slice { level } => AffineRoot::Slice { level: *level },
            AffineRoot::Vector { root, level } => {
                let img = self.x.act_index(*root);
                let shift = eval_root_at(self.rs, *root, &self.pt)
                    - eval_root_at(self.rs, img, &self.pt);
                debug_assert!(shift.is_integer());
                AffineRoot::Vector {
                    root: img,
                    level: level + shift.to_integer(),
                }
            }
        }
    }
}

/// The jump set `J = {f(x) ≥ 0 : f ∈ Φ̃}`: periodic with period 1,
/// determined by the fractional parts of the root evaluations (0 is always
/// present via the slices).
#[derive(Clone, Debug)]
pub struct Jumps {
    /// Sorted distinct fractional parts in `[0, 1)`, containing 0.
    pub fracs: Vec<Rat>,
}

pub fn jumps(rs: &RootSystem, pt: &ApartmentPoint) -> Jumps {
    let mut fracs: Vec<Rat> = vec![Rat::zero()];
    for a in 0..rs.num_roots() {
        let v = eval_root_at(rs, a, pt);
        fracs.push(v - v.floor());
    }
    fracs.sort();
    fracs.dedup();
    Jumps { fracs }
}

impl Jumps {
    /// `r+ = min{s ∈ J : s > r}`.
    pub fn r_plus(&self, r: Rat) -> Rat {
        self.fracs
            .iter()
            .map(|&j| {
                let k = (r - j).floor().to_integer() + 1;
                j + Rat::from_integer(k)
            })
            .min()
            .unwrap()
    }

    /// `r− = max{s ∈ J : s < r}`; absent below the minimum of `J`.
    pub fn r_minus(&self, r: Rat) -> Option<Rat> {
        self.fracs
            .iter()
            .filter_map(|&j| {
                let mut k = (r - j).ceil().to_integer() - 1;
                if j + Rat::from_integer(k) >= r {
                    k -= 1;
                }
                let cand = j + Rat::from_integer(k);
                (!cand.is_negative()).then_some(cand)
            })
            .max()
    }

    pub fn contains(&self, r: Rat) -> bool {
        !r.is_negative() && self.fracs.contains(&(r - r.floor()))
    }
}

/// All `f ∈ Φ̃` with `0 ≤ f(x) ≤ bound`, including the torus slices.
pub fn build_affine_roots(rs: &RootSystem, pt: &ApartmentPoint, bound: Rat) -> Vec<AffineRoot> {
    let mut out = Vec::new();
    if bound.is_negative() {
        return out;
    }
    for level in 0..=bound.floor().to_integer() {
        out.push(AffineRoot::Slice {
            level: level as u64,
        });
    }
    for a in 0..rs.num_roots() {
        let v = eval_root_at(rs, a, pt);
        let lo = (-v).ceil().to_integer();
        let hi = (bound - v).floor().to_integer();
        for level in lo..=hi {
            out.push(AffineRoot::Vector { root: a, level });
        }
    }
    out.sort();
    out
}

/// An F-orbit on `Φ̃`, with an in-orbit order `f < F(f) < ⋯` from a base
/// representative.
#[derive(Clone, Debug)]
pub struct FOrbit {
    /// Base first, then its successive F-images.
    pub members: Vec<AffineRoot>,
    /// The common level `O(x)`.
    pub level: Rat,
    pub is_slice: bool,
    /// Whether the orbit meets `Δ̃⁺` (vector part in `Δ_x`).
    pub meets_delta: bool,
}

fn orbit_of(frob: &AffineFrobenius, start: &AffineRoot) -> Vec<AffineRoot> {
    let mut members = vec![start.clone()];
    let mut cur = frob.apply(start);
    while cur != *start {
        members.push(cur.clone());
        cur = frob.apply(&cur);
    }
    members
}

/// Partition a list of affine roots into F-orbits (closed under F), sorted
/// by (level, torus-slices-first at equal level); each orbit containing a
/// vector root with part in `Δ_x` is based at its first such member.
///
/// With `require_elliptic`, a vector orbit missing `Δ̃⁺` is an error: for an
/// elliptic acting element every orbit meets it.
pub fn f_orbits_and_order(
    frob: &AffineFrobenius,
    roots: &[AffineRoot],
    delta_x: &[usize],
    require_elliptic: bool,
) -> Result<Vec<FOrbit>> {
    let delta: HashSet<usize> = delta_x.iter().copied().collect();
    let mut seen: HashSet<AffineRoot> = HashSet::new();
    let mut orbits = Vec::new();
    let mut sorted_roots = roots.to_vec();
    sorted_roots.sort();
    for f in &sorted_roots {
        if seen.contains(f) {
            continue;
        }
        let mut members = orbit_of(frob, f);
        for m in &members {
            seen.insert(m.clone());
        }
        let level = eval_affine(frob.rs, f, &frob.pt);
        debug_assert!(members
            .iter()
            .all(|m| eval_affine(frob.rs, m, &frob.pt) == level));
        let is_slice = matches!(f, AffineRoot::Slice { .. });
        // Rotate so the base lies in Δ̃⁺ (picking the smallest such member).
        let base_pos = members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.vector_part().is_some_and(|a| delta.contains(&a)))
            .min_by_key(|(_, m)| (*m).clone())
            .map(|(i, _)| i);
        let meets_delta = base_pos.is_some();
        if let Some(p) = base_pos {
            members.rotate_left(p);
        }
        if require_elliptic && !is_slice && !meets_delta {
            return Err(Error::NotElliptic(format!(
                "F-orbit of {f:?} does not meet Δ̃⁺; the acting element is not elliptic"
            )));
        }
        orbits.push(FOrbit {
            members,
            level,
            is_slice,
            meets_delta,
        });
    }
    orbits.sort_by_key(|o| (o.level, !o.is_slice, o.members.clone()));
    Ok(orbits)
}

/// An orbit together with its sign-change sequence
/// `0 = a_0 < a_1 < ⋯ < a_{2b} = #O`.
#[derive(Clone, Debug)]
pub struct OrbitProfile {
    /// In-orbit order starting from the base (in `−Δ̃⁺`).
    pub members: Vec<AffineRoot>,
    pub base: AffineRoot,
    pub a_sequence: Vec<usize>,
}

impl OrbitProfile {
    /// The number of sign changes `b(f)`.
    pub fn b(&self) -> usize {
        (self.a_sequence.len() - 1) / 2
    }
}

/// Compute the unique sequence with `F^{a_{2i}}(f) ∈ −Δ̃⁺`,
/// `F^{a_{2i−1}}(f) ∈ Δ̃⁺`, and no `±Δ̃⁺` membership strictly between
/// markers, scanning the full orbit from a base `f ∈ −Δ̃⁺`.
pub fn sign_change_sequence(
    rs: &RootSystem,
    delta_x: &[usize],
    orbit: &FOrbit,
    base: &AffineRoot,
) -> Result<OrbitProfile> {
    let delta: HashSet<usize> = delta_x.iter().copied().collect();
    let neg_delta: HashSet<usize> = delta_x.iter().map(|&d| rs.negate(d)).collect();
    let in_neg = |f: &AffineRoot| f.vector_part().is_some_and(|a| neg_delta.contains(&a));
    let in_pos = |f: &AffineRoot| f.vector_part().is_some_and(|a| delta.contains(&a));
    if !in_neg(base) {
        return Err(Error::Precondition(
            "sign-change base must lie in −Δ̃⁺".into(),
        ));
    }
    let pos = orbit
        .members
        .iter()
        .position(|m| m == base)
        .ok_or_else(|| Error::Precondition("base is not a member of the orbit".into()))?;
    let mut members = orbit.members.clone();
    members.rotate_left(pos);
    let n = members.len();
    let mut a_sequence = Vec::new();
    for (k, m) in members.iter().enumerate() {
        let neg = in_neg(m);
        let pos_mark = in_pos(m);
        if !(neg || pos_mark) {
            continue;
        }
        let parity_neg = a_sequence.len() % 2 == 0;
        if (neg && !parity_neg) || (pos_mark && parity_neg) {
            return Err(Error::Internal(format!(
                "sign-change alternation fails at offset {k}"
            )));
        }
        a_sequence.push(k);
    }
    if a_sequence.len() % 2 != 0 || a_sequence.is_empty() {
        return Err(Error::Internal(
            "sign-change markers do not close up to an even count".into(),
        ));
    }
    a_sequence.push(n);
    Ok(OrbitProfile {
        members,
        base: base.clone(),
        a_sequence,
    })
}

/// The discrete part of a Howe datum: a nested chain of Levi subsystems
/// `∅ ⊆ Φ_0 ⊊ Φ_1 ⊊ ⋯ ⊊ Φ_d = Φ` with depths `r_0 < ⋯ < r_{d−1} ≤ r_d`
/// (for `d = 0` a single depth `r_0 ≥ 0`).
#[derive(Clone, Debug)]
pub struct HoweDatum {
    pub chain: Vec<LeviSubsystem>,
    pub depths: Vec<Rat>,
}

impl HoweDatum {
    /// `chain[i]` lists subsets of simple-root indices generating `Φ_i`;
    /// the last entry must generate all of `Φ`. An acting element, when
    /// supplied, must stabilize every `Φ_i`.
    pub fn new(
        rs: &RootSystem,
        chain_simple: &[Vec<usize>],
        depths: Vec<Rat>,
        x: Option<&TwistedElement>,
    ) -> Result<HoweDatum> {
        if chain_simple.is_empty() || chain_simple.len() != depths.len() {
            return Err(Error::Config(
                "Howe datum needs equal-length nonempty chain and depth lists".into(),
            ));
        }
        let mut chain = Vec::new();
        for gens in chain_simple {
            let roots: Vec<usize> = gens
                .iter()
                .map(|&i| {
                    if i < rs.rank() {
                        Ok(rs.simple(i))
                    } else {
                        Err(Error::Config(format!("simple-root index {i} out of range")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            chain.push(LeviSubsystem::generate(rs, roots));
        }
        if chain.last().unwrap().roots.len() != rs.num_roots() {
            return Err(Error::Config("the chain must end at the full system".into()));
        }
        for w in chain.windows(2) {
            let prev: HashSet<usize> = w[0].roots.iter().copied().collect();
            if !w[1].roots.iter().any(|r| !prev.contains(r))
                || w[0].roots.iter().any(|r| !w[1].roots.contains(r))
            {
                return Err(Error::Config(
                    "chain must be strictly nested from Φ_0 on".into(),
                ));
            }
        }
        let d = depths.len() - 1;
        if d == 0 {
            if depths[0].is_negative() {
                return Err(Error::Config("depth r_0 must be ≥ 0".into()));
            }
        } else {
            if !depths[0].is_positive() {
                return Err(Error::Config("depths must start above r_{−1} = 0".into()));
            }
            for (i, w) in depths.windows(2).enumerate() {
                let strict = i + 2 < depths.len();
                if (strict && w[0] >= w[1]) || (!strict && w[0] > w[1]) {
                    return Err(Error::Config(
                        "depths must satisfy r_0 < ⋯ < r_{d−1} ≤ r_d".into(),
                    ));
                }
            }
        }
        if let Some(x) = x {
            for (i, levi) in chain.iter().enumerate() {
                if !levi.stable_under(x) {
                    return Err(Error::Precondition(format!(
                        "Φ_{i} is not stable under the acting element"
                    )));
                }
            }
        }
        Ok(HoweDatum { chain, depths })
    }

    /// Parse `{"chain": [[...], ...], "depths": [...]}` from config JSON.
    pub fn from_config(
        rs: &RootSystem,
        v: &serde_json::Value,
        x: Option<&TwistedElement>,
    ) -> Result<HoweDatum> {
        let chain = v
            .get("chain")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Config("Howe datum needs a \"chain\" array".into()))?
            .iter()
            .map(|set| {
                set.as_array()
                    .ok_or_else(|| Error::Config("chain entries must be arrays".into()))?
                    .iter()
                    .map(|i| {
                        i.as_u64()
                            .map(|i| i as usize)
                            .ok_or_else(|| Error::Config("chain indices must be integers".into()))
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let depths = v
            .get("depths")
            .and_then(|dd| dd.as_array())
            .ok_or_else(|| Error::Config("Howe datum needs a \"depths\" array".into()))?
            .iter()
            .map(parse_rat)
            .collect::<Result<Vec<_>>>()?;
        HoweDatum::new(rs, &chain, depths, x)
    }

    pub fn d(&self) -> usize {
        self.depths.len() - 1
    }

    /// `r_{i−1}` with `r_{−1} = 0`.
    fn depth_below(&self, i: usize) -> Rat {
        if i == 0 {
            Rat::zero()
        } else {
            self.depths[i - 1]
        }
    }
}

/// `i(α)` = the unique stratum with `α ∈ Φ_i ∖ Φ_{i−1}`, and
/// `r(α) = r_{i(α)−1}`.
pub fn howe_classify(datum: &HoweDatum, root: usize) -> (usize, Rat) {
    for (i, levi) in datum.chain.iter().enumerate() {
        if levi.roots.contains(&root) {
            return (i, datum.depth_below(i));
        }
    }
    unreachable!("the chain exhausts Φ");
}

/// Membership flags of an affine root in the four Howe-datum supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SupportFlags {
    pub in_k: bool,
    pub in_k_plus: bool,
    pub in_h: bool,
    pub in_e: bool,
}

/// Threshold tests against the stratum depth `r(α_f) = r_{i−1}`:
/// `𝕂` at `≥ r_{i−1}/2`, `𝕂⁺` strictly above, `ℍ` like `𝕂` but strict on
/// the 0-th stratum, `𝔼` from the derived-part rule (`> r_{i−1}/2` at the
/// matching stratum, or `> r_{i−1}`). Torus slices follow the 0-th / the
/// derived-torus rule.
pub fn howe_support(
    rs: &RootSystem,
    datum: &HoweDatum,
    f: &AffineRoot,
    pt: &ApartmentPoint,
) -> SupportFlags {
    let val = eval_affine(rs, f, pt);
    match f {
        AffineRoot::Slice { .. } => {
            let e_threshold = (0..datum.chain.len())
                .filter(|&i| !datum.chain[i].is_empty())
                .map(|i| datum.depth_below(i))
                .min();
            SupportFlags {
                in_k: true,
                in_k_plus: val.is_positive(),
                in_h: val.is_positive(),
                in_e: e_threshold.is_some_and(|t| val > t),
            }
        }
        AffineRoot::Vector { root, .. } => {
            let (i, r) = howe_classify(datum, *root);
            let half = r / Rat::from_integer(2);
            SupportFlags {
                in_k: val >= half,
                in_k_plus: val > half,
                in_h: if i == 0 { val.is_positive() } else { val >= half },
                // The stratum condition of the first clause is automatic at
                // i = i(α_f); the second clause is subsumed since r ≥ r/2.
                in_e: val > half || val > r,
            }
        }
    }
}

/// The level labels of a Howe datum at truncation level `r`: the `s_i`, the `C^i` partition, and
/// the `O/O♭` orbit pairing.
#[derive(Clone, Debug)]
pub struct LevelLabels {
    /// `0 = s_0 < ⋯ < s_m = r`.
    pub s_values: Vec<Rat>,
    /// `C^0, …, C^m` (sorted member lists).
    pub partition: Vec<Vec<AffineRoot>>,
    /// Each unordered pair `(O, O♭)` once, `O` at level ≤ r/2.
    pub orbit_pairs: Vec<(Vec<AffineRoot>, Vec<AffineRoot>)>,
}

/// Compute the level labels for a Howe datum with `d ≥ 1`: the label set
/// comes from `{f(x) : f ∈ Φ̃_r^0 ∖ Φ̃_M}` with `M = Φ_{d−1}`, and every
/// internal invariant (`s_i + s_{m−i} = r`, disjoint exhaustion by the
/// `C^i`, the pairing involution, middle-level self-pairing) is verified,
/// failures surfacing as hard errors.
pub fn howe_levels(datum: &HoweDatum, r: Rat, frob: &AffineFrobenius) -> Result<LevelLabels> {
    let rs = frob.rs;
    let pt = &frob.pt;
    if datum.d() == 0 {
        return Err(Error::Precondition(
            "level labels need a datum with d ≥ 1".into(),
        ));
    }
    if !r.is_integer() || !r.is_positive() {
        return Err(Error::Precondition(
            "level labels are computed at an integer level r ≥ 1".into(),
        ));
    }
    let m_roots: HashSet<usize> = datum.chain[datum.d() - 1].roots.iter().copied().collect();
    let window = build_affine_roots(rs, pt, r);
    // Label set: evaluations of vector roots outside Φ̃_M in [0, r].
    let mut s_values: Vec<Rat> = window
        .iter()
        .filter(|f| f.vector_part().is_some_and(|a| !m_roots.contains(&a)))
        .map(|f| eval_affine(rs, f, pt))
        .collect();
    s_values.push(Rat::zero());
    s_values.push(r);
    s_values.sort();
    s_values.dedup();
    let m = s_values.len() - 1;
    for i in 0..=m {
        if s_values[i] + s_values[m - i] != r {
            return Err(Error::Internal(format!(
                "label symmetry fails: s_{i} + s_{} = {} ≠ {r}",
                m - i,
                s_values[i] + s_values[m - i]
            )));
        }
    }
    // C^0: all vector roots at level 0; C^i (0 < i < m): Φ̃ ∖ Φ̃_M at s_i;
    // C^m: everything at level r (slice included).
    let mut partition: Vec<Vec<AffineRoot>> = vec![Vec::new(); m + 1];
    for f in &window {
        let val = eval_affine(rs, f, pt);
        match f {
            AffineRoot::Vector { root, .. } => {
                if val.is_zero() {
                    partition[0].push(f.clone());
                } else if val == r {
                    partition[m].push(f.clone());
                } else if !m_roots.contains(root) {
                    if let Ok(i) = s_values.binary_search(&val) {
                        partition[i].push(f.clone());
                    }
                }
            }
            AffineRoot::Slice { .. } => {
                if val == r {
                    partition[m].push(f.clone());
                }
            }
        }
    }
    for c in partition.iter_mut() {
        c.sort();
    }
    // Disjoint exhaustion of Φ̃_r^0 ∖ Φ̃_M.
    for f in &window {
        if f.vector_part().is_none_or(|a| m_roots.contains(&a)) {
            continue;
        }
        let count = partition.iter().filter(|c| c.contains(f)).count();
        if count != 1 {
            return Err(Error::Internal(format!(
                "{f:?} lies in {count} of the C^i instead of exactly one"
            )));
        }
    }
    // D = {vector f ∉ Φ̃_M : 0 < f(x) < r}, its F-orbits, and O♭ = {h − f}.
    let d_set: Vec<AffineRoot> = window
        .iter()
        .filter(|f| {
            f.vector_part().is_some_and(|a| !m_roots.contains(&a)) && {
                let v = eval_affine(rs, f, pt);
                v.is_positive() && v < r
            }
        })
        .cloned()
        .collect();
    let r_int = r.to_integer();
    let flat = |o: &[AffineRoot]| -> Vec<AffineRoot> {
        let mut out: Vec<AffineRoot> = o
            .iter()
            .map(|f| match f {
                AffineRoot::Vector { root, level } => AffineRoot::Vector {
                    root: rs.negate(*root),
                    level: r_int - level,
                },
                AffineRoot::Slice { .. } => unreachable!("D contains no slices"),
            })
            .collect();
        out.sort();
        out
    };
    let mut seen: HashSet<Vec<AffineRoot>> = HashSet::new();
    let mut orbit_pairs = Vec::new();
    let mut covered: HashSet<AffineRoot> = HashSet::new();
    for f in &d_set {
        if covered.contains(f) {
            continue;
        }
        let mut orbit = orbit_of(frob, f);
        for g in &orbit {
            covered.insert(g.clone());
            if !d_set.contains(g) {
                return Err(Error::Internal("D is not F-stable".into()));
            }
        }
        orbit.sort();
        let pair = flat(&orbit);
        if flat(&pair) != orbit {
            return Err(Error::Internal("orbit pairing is not an involution".into()));
        }
        // At the middle level r/2 the partner stays at the same level (it
        // may be the orbit itself or a distinct one); elsewhere the partner
        // sits at the reflected level r − s.
        let level = eval_affine(rs, &orbit[0], pt);
        if eval_affine(rs, &pair[0], pt) != r - level {
            return Err(Error::Internal(
                "orbit pairing does not reflect the level".into(),
            ));
        }
        if seen.contains(&orbit) {
            continue;
        }
        seen.insert(orbit.clone());
        seen.insert(pair.clone());
        if level + level <= r {
            orbit_pairs.push((orbit, pair));
        } else {
            orbit_pairs.push((pair, orbit));
        }
    }
    orbit_pairs.sort();
    Ok(LevelLabels {
        s_values,
        partition,
        orbit_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root::{build_root_system, CartanDatum};
    use crate::twisted::DiagramAut;

    fn a1() -> RootSystem {
        build_root_system(CartanDatum::from_code("A1").unwrap()).unwrap()
    }

    fn a2() -> RootSystem {
        build_root_system(CartanDatum::from_code("A2").unwrap()).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn jumps_origin_and_midpoint() {
        let rs = a1();
        let origin = ApartmentPoint::origin(1);
        let j = jumps(&rs, &origin);
        assert_eq!(j.fracs, vec![Rat::zero()]);
        assert_eq!(j.r_plus(Rat::zero()), Rat::from_integer(1));
        assert_eq!(j.r_minus(Rat::zero()), None);
        let mid = ApartmentPoint {
            coords: vec![rat(1, 2)],
        };
        let j = jumps(&rs, &mid);
        assert_eq!(j.fracs, vec![Rat::zero(), rat(1, 2)]);
        assert_eq!(j.r_plus(Rat::zero()), rat(1, 2));
        assert_eq!(j.r_plus(rat(1, 2)), Rat::from_integer(1));
        // r+ and r− are mutually inverse away from the minimum.
        for k in 1..8 {
            let r = rat(k, 2);
            assert_eq!(j.r_minus(j.r_plus(r)), Some(j.r_plus(r) - rat(1, 2)));
            assert_eq!(j.r_plus(j.r_minus(r).unwrap()), r);
        }
    }

    #[test]
    fn affine_root_windows() {
        let rs = a2();
        let origin = ApartmentPoint::origin(2);
        // Bound 0: the six (α, 0) plus slice 0.
        let w0 = build_affine_roots(&rs, &origin, Rat::zero());
        assert_eq!(w0.len(), 7);
        // Bound 1: (α, 0), (α, 1) plus slices {0, 1}.
        let w1 = build_affine_roots(&rs, &origin, Rat::from_integer(1));
        assert_eq!(w1.len(), 14);
        // Half-integral levels at a midpoint in A1.
        let rs1 = a1();
        let mid = ApartmentPoint {
            coords: vec![rat(1, 2)],
        };
        let w = build_affine_roots(&rs1, &mid, Rat::from_integer(1));
        let levels: Vec<Rat> = w.iter().map(|f| eval_affine(&rs1, f, &mid)).collect();
        assert!(levels.contains(&rat(1, 2)));
    }

    #[test]
    fn a1_twist_orbits_pair_per_level() {
        let rs = a1();
        let sigma = DiagramAut::identity(1);
        let x = TwistedElement::from_word(&rs, &[0], &sigma, 0).unwrap();
        let origin = ApartmentPoint::origin(1);
        let frob = AffineFrobenius::new(&rs, x.clone(), origin.clone()).unwrap();
        let roots = build_affine_roots(&rs, &origin, Rat::from_integer(2));
        let delta = crate::convexity::delta_set(&rs, &x);
        let orbits = f_orbits_and_order(&frob, &roots, &delta, true).unwrap();
        for o in &orbits {
            if o.is_slice {
                assert_eq!(o.members.len(), 1);
            } else {
                assert_eq!(o.members.len(), 2);
                assert!(o.meets_delta);
            }
        }
        // Levels ascend, slices first at equal level.
        for w in orbits.windows(2) {
            assert!(w[0].level < w[1].level || (w[0].level == w[1].level && w[0].is_slice));
        }
    }

    #[test]
    fn a2_coxeter_level_zero_orbit() {
        let rs = a2();
        let sigma = DiagramAut::identity(2);
        let x = TwistedElement::from_word(&rs, &[0, 1], &sigma, 0).unwrap();
        let origin = ApartmentPoint::origin(2);
        let frob = AffineFrobenius::new(&rs, x.clone(), origin.clone()).unwrap();
        let a1_root = rs.index_of_coeffs(&[1, 0]).unwrap();
        let orbit = orbit_of(
            &frob,
            &AffineRoot::Vector {
                root: a1_root,
                level: 0,
            },
        );
        // The x-cycle of α1 has size 3.
        assert_eq!(orbit.len(), 3);
    }

    #[test]
    fn sign_change_basic_profiles() {
        let rs = a1();
        let sigma = DiagramAut::identity(1);
        let x = TwistedElement::from_word(&rs, &[0], &sigma, 0).unwrap();
        let origin = ApartmentPoint::origin(1);
        let frob = AffineFrobenius::new(&rs, x.clone(), origin.clone()).unwrap();
        let delta = crate::convexity::delta_set(&rs, &x);
        let roots = build_affine_roots(&rs, &origin, Rat::from_integer(1));
        let orbits = f_orbits_and_order(&frob, &roots, &delta, true).unwrap();
        let o = orbits
            .iter()
            .find(|o| !o.is_slice && o.level == Rat::from_integer(1))
            .unwrap();
        let neg = rs.index_of_coeffs(&[-1]).unwrap();
        let base = AffineRoot::Vector {
            root: neg,
            level: 1,
        };
        let profile = sign_change_sequence(&rs, &delta, o, &base).unwrap();
        assert_eq!(profile.a_sequence, vec![0, 1, 2]);
        assert_eq!(profile.b(), 1);
        // Base outside −Δ̃⁺ rejected.
        let bad = o
            .members
            .iter()
            .find(|f| f.vector_part() == Some(rs.index_of_coeffs(&[1]).unwrap()))
            .unwrap();
        assert!(sign_change_sequence(&rs, &delta, o, bad).is_err());
    }

    #[test]
    fn howe_classification_and_thresholds() {
        let rs = a2();
        // d = 1: Φ_0 = A1-subsystem from the first simple root.
        let datum = HoweDatum::new(
            &rs,
            &[vec![0], vec![0, 1]],
            vec![Rat::from_integer(2), Rat::from_integer(2)],
            None,
        )
        .unwrap();
        let a1_root = rs.index_of_coeffs(&[1, 0]).unwrap();
        let a12 = rs.index_of_coeffs(&[1, 1]).unwrap();
        assert_eq!(howe_classify(&datum, a1_root), (0, Rat::zero()));
        assert_eq!(howe_classify(&datum, a12), (1, Rat::from_integer(2)));
        let origin = ApartmentPoint::origin(2);
        // Level 0 in the 0-th stratum: in 𝕂, not in 𝕂⁺.
        let f0 = AffineRoot::Vector {
            root: a1_root,
            level: 0,
        };
        let fl = howe_support(&rs, &datum, &f0, &origin);
        assert!(fl.in_k && !fl.in_k_plus && !fl.in_h);
        // α ∉ Φ_0, level 1 = r_0/2: 𝕂 and ℍ but not 𝕂⁺.
        let f1 = AffineRoot::Vector {
            root: a12,
            level: 1,
        };
        let fl = howe_support(&rs, &datum, &f1, &origin);
        assert!(fl.in_k && fl.in_h && !fl.in_k_plus && !fl.in_e);
        // Level 2: all four.
        let f2 = AffineRoot::Vector {
            root: a12,
            level: 2,
        };
        let fl = howe_support(&rs, &datum, &f2, &origin);
        assert!(fl.in_k && fl.in_k_plus && fl.in_h && fl.in_e);
        // Monotonicity on the whole window.
        for f in build_affine_roots(&rs, &origin, Rat::from_integer(3)) {
            let fl = howe_support(&rs, &datum, &f, &origin);
            assert!(!fl.in_k_plus || fl.in_k);
            assert!(!fl.in_e || fl.in_h);
            assert!(!fl.in_h || fl.in_k);
        }
    }

    #[test]
    fn howe_datum_validation() {
        let rs = a2();
        // Chain must end at Φ.
        assert!(HoweDatum::new(&rs, &[vec![0]], vec![Rat::from_integer(1)], None).is_err());
        // Depths must increase.
        assert!(HoweDatum::new(
            &rs,
            &[vec![], vec![0], vec![0, 1]],
            vec![Rat::from_integer(2), Rat::from_integer(1), Rat::from_integer(2)],
            None,
        )
        .is_err());
        // d = 0 with r_0 = 0 is the degenerate datum.
        assert!(HoweDatum::new(&rs, &[vec![0, 1]], vec![Rat::zero()], None).is_ok());
        // Non-nested chain rejected.
        assert!(HoweDatum::new(
            &rs,
            &[vec![0], vec![1], vec![0, 1]],
            vec![Rat::from_integer(1), Rat::from_integer(2), Rat::from_integer(2)],
            None,
        )
        .is_err());
        // Stability against a stabilizing element.
        let sigma = DiagramAut::identity(2);
        let s1 = TwistedElement::from_word(&rs, &[0], &sigma, 0).unwrap();
        assert!(HoweDatum::new(
            &rs,
            &[vec![0], vec![0, 1]],
            vec![Rat::from_integer(1), Rat::from_integer(1)],
            Some(&s1),
        )
        .is_ok());
        let cox = TwistedElement::from_word(&rs, &[0, 1], &sigma, 0).unwrap();
        assert!(HoweDatum::new(
            &rs,
            &[vec![0], vec![0, 1]],
            vec![Rat::from_integer(1), Rat::from_integer(1)],
            Some(&cox),
        )
        .is_err());
    }

    #[test]
    fn sl2_level_labels() {
        let rs = a1();
        let sigma = DiagramAut::identity(1);
        let x = TwistedElement::from_word(&rs, &[0], &sigma, 0).unwrap();
        let origin = ApartmentPoint::origin(1);
        let frob = AffineFrobenius::new(&rs, x, origin).unwrap();
        // d = 1 toral chain ∅ ⊊ Φ at depth 2.
        let datum = HoweDatum::new(
            &rs,
            &[vec![], vec![0]],
            vec![Rat::from_integer(2), Rat::from_integer(2)],
            None,
        )
        .unwrap();
        let labels = howe_levels(&datum, Rat::from_integer(2), &frob).unwrap();
        assert_eq!(
            labels.s_values,
            vec![Rat::zero(), Rat::from_integer(1), Rat::from_integer(2)]
        );
        assert_eq!(labels.partition.len(), 3);
        // C^0: the two level-0 vector roots; C^1: (±α, 1); C^2 includes the
        // slice at 2.
        assert_eq!(labels.partition[0].len(), 2);
        assert_eq!(labels.partition[1].len(), 2);
        assert!(labels
            .partition[2]
            .contains(&AffineRoot::Slice { level: 2 }));
        // The single middle orbit is self-paired.
        assert_eq!(labels.orbit_pairs.len(), 1);
        assert_eq!(labels.orbit_pairs[0].0, labels.orbit_pairs[0].1);
        // d = 0 rejected.
        let degenerate =
            HoweDatum::new(&rs, &[vec![0]], vec![Rat::zero()], None).unwrap();
        assert!(howe_levels(&degenerate, Rat::from_integer(2), &frob).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rat(&serde_json::json!(3)).unwrap(), Rat::from_integer(3));
        assert_eq!(parse_rat(&serde_json::json!("1/2")).unwrap(), rat(1, 2));
        assert_eq!(parse_rat(&serde_json::json!("-3/4")).unwrap(), rat(-3, 4));
        assert!(parse_rat(&serde_json::json!("1/0")).is_err());
        let pt = ApartmentPoint::from_config(&serde_json::json!(["1/2", 0]), 2).unwrap();
        assert_eq!(pt.coords, vec![rat(1, 2), Rat::zero()]);
    }
}
