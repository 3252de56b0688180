//! Twisted Weyl group elements `x = wσ`, their action on roots, ellipticity,
//! and conjugacy classes of the coset `Wσ` under `W`-conjugation.
//!
//! Elements are stored as permutations of the canonical root list (exact and
//! fast to compose); the integer matrix of the linear action is extracted on
//! demand for rank tests.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::{det_bareiss, Root, RootSystem};

/// Default cap on `|W|` for exhaustive enumeration.
pub const DEFAULT_WEYL_CAP: usize = 51840;

/// A diagram automorphism: a permutation of the simple-root indices that
/// preserves the Cartan matrix entrywise (hence `Φ⁺`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramAut {
    /// `perm[i]` is the image of simple index `i`.
    pub perm: Vec<usize>,
}

impl DiagramAut {
    pub fn identity(rank: usize) -> Self {
        DiagramAut {
            perm: (0..rank).collect(),
        }
    }

    /// Validate against a root system: must be a permutation preserving the
    /// Cartan matrix.
    pub fn new(rs: &RootSystem, perm: Vec<usize>) -> Result<Self> {
        let n = rs.rank();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::Config(format!(
                "sigma permutation has length {}, rank is {n}",
                perm.len()
            )));
        }
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Config("sigma is not a permutation".into()));
            }
            seen[p] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if rs.datum.cartan[perm[i]][perm[j]] != rs.datum.cartan[i][j] {
                    return Err(Error::Config(format!(
                        "sigma does not preserve the Cartan matrix at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DiagramAut { perm })
    }

    /// Parse the config form: `"id"` or a 1-based permutation array.
    pub fn from_config(rs: &RootSystem, v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) if s == "id" => Ok(Self::identity(rs.rank())),
            serde_json::Value::Array(arr) => {
                let perm: Vec<usize> = arr
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .and_then(|u| (u as usize).checked_sub(1))
                            .ok_or_else(|| {
                                Error::Config("sigma entries must be 1-based indices".into())
                            })
                    })
                    .collect::<Result<_>>()?;
                Self::new(rs, perm)
            }
            _ => Err(Error::Config(
                "sigma must be \"id\" or a permutation array".into(),
            )),
        }
    }

    /// The induced permutation of the full root index set (coefficient
    /// permutation extended linearly).
    pub fn root_perm(&self, rs: &RootSystem) -> Vec<usize> {
        (0..rs.num_roots())
            .map(|r| {
                let c = &rs.root(r).coeffs;
                let mut out = vec![0i64; rs.rank()];
                for i in 0..rs.rank() {
                    out[self.perm[i]] = c[i];
                }
                rs.index_of_coeffs(&out)
                    .expect("diagram automorphism permutes the root set")
            })
            .collect()
    }

    /// Multiplicative order of the automorphism.
    pub fn order(&self) -> usize {
        perm_order(&self.perm)
    }

    /// All diagram automorphisms of a root system (brute force over simple
    /// index permutations; rank ≤ 8 keeps this instant for all Dynkin types
    /// in practice because the Cartan-preservation check prunes hard).
    pub fn all(rs: &RootSystem) -> Vec<DiagramAut> {
        let n = rs.rank();
        let mut out = Vec::new();
        let mut perm: Vec<usize> = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(
            rs: &RootSystem,
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<DiagramAut>,
        ) {
            let n = rs.rank();
            let k = perm.len();
            if k == n {
                out.push(DiagramAut { perm: perm.clone() });
                return;
            }
            for p in 0..n {
                if used[p] {
                    continue;
                }
                // Partial Cartan-preservation check against chosen prefix.
                let ok = (0..k).all(|i| {
                    rs.datum.cartan[perm[i]][p] == rs.datum.cartan[i][k]
                        && rs.datum.cartan[p][perm[i]] == rs.datum.cartan[k][i]
                });
                if ok {
                    used[p] = true;
                    perm.push(p);
                    rec(rs, perm, used, out);
                    perm.pop();
                    used[p] = false;
                }
            }
        }
        rec(rs, &mut perm, &mut used, &mut out);
        out
    }
}

fn perm_order(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut order = 1usize;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut len = 0usize;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        order = order / gcd(order, len) * len;
    }
    order
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A twisted Weyl element `x = wσ^k`: the root action is `α ↦ w(σ^k(α))`,
/// stored as a permutation of the canonical root index list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistedElement {
    /// Root-index permutation of the composite action (first σ, then w).
    pub action: Vec<usize>,
    /// Exponent of σ in the ⟨σ⟩-component.
    pub sigma_power: usize,
}

impl TwistedElement {
    /// Identity element.
    pub fn identity(rs: &RootSystem) -> Self {
        TwistedElement {
            action: (0..rs.num_roots()).collect(),
            sigma_power: 0,
        }
    }

    /// Build `x = s_{i1}⋯s_{ik} · σ^sigma_power` from a Weyl word
    /// (simple-root indices) and a power of the diagram automorphism.
    pub fn from_word(
        rs: &RootSystem,
        word: &[usize],
        sigma: &DiagramAut,
        sigma_power: usize,
    ) -> Result<Self> {
        for &i in word {
            if i >= rs.rank() {
                return Err(Error::Config(format!(
                    "Weyl word letter {i} out of range for rank {}",
                    rs.rank()
                )));
            }
        }
        let order = sigma.order();
        let k = sigma_power % order;
        let sigma_perm = sigma.root_perm(rs);
        let mut action: Vec<usize> = (0..rs.num_roots()).collect();
        for _ in 0..k {
            action = compose(&sigma_perm, &action);
        }
        // Left-multiply by the word: w = s_{i1}∘⋯∘s_{ik} acting after σ^k.
        for &i in word.iter().rev() {
            let s = rs.simple_reflection_perm(i);
            action = compose(&s, &action);
        }
        Ok(TwistedElement {
            action,
            sigma_power: k,
        })
    }

    /// Apply the action to a root index.
    pub fn act_index(&self, a: usize) -> usize {
        self.action[a]
    }

    /// Apply the action to a `Root`.
    pub fn act(&self, rs: &RootSystem, a: &Root) -> Result<Root> {
        let i = rs.require(a)?;
        Ok(rs.root(self.action[i]).clone())
    }

    /// Order of the root permutation.
    pub fn order(&self) -> usize {
        perm_order(&self.action)
    }

    /// Integer matrix of the linear action in the simple-root basis:
    /// column `j` holds the coefficients of `x(α_j)`.
    pub fn matrix(&self, rs: &RootSystem) -> Vec<Vec<i64>> {
        let n = rs.rank();
        let mut m = vec![vec![0i64; n]; n];
        for j in 0..n {
            let img = &rs.root(self.action[rs.simple(j)]).coeffs;
            for i in 0..n {
                m[i][j] = img[i];
            }
        }
        m
    }
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&i| outer[i]).collect()
}

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// Product of two twisted elements in `W⋊⟨σ⟩`.
pub fn twisted_product(
    rs: &RootSystem,
    sigma: &DiagramAut,
    x: &TwistedElement,
    y: &TwistedElement,
) -> Result<TwistedElement> {
    check_same_system(rs, x)?;
    check_same_system(rs, y)?;
    Ok(TwistedElement {
        action: compose(&x.action, &y.action),
        sigma_power: (x.sigma_power + y.sigma_power) % sigma.order().max(1),
    })
}

/// Inverse of a twisted element.
pub fn twisted_inverse(
    rs: &RootSystem,
    sigma: &DiagramAut,
    x: &TwistedElement,
) -> Result<TwistedElement> {
    check_same_system(rs, x)?;
    let order = sigma.order().max(1);
    Ok(TwistedElement {
        action: invert_perm(&x.action),
        sigma_power: (order - x.sigma_power % order) % order,
    })
}

fn check_same_system(rs: &RootSystem, x: &TwistedElement) -> Result<()> {
    if x.action.len() != rs.num_roots() {
        return Err(Error::MixedSystems(format!(
            "element acts on {} roots, system has {}",
            x.action.len(),
            rs.num_roots()
        )));
    }
    Ok(())
}

/// Ellipticity: the linear action on `ℝΦ` has no nonzero fixed vector,
/// i.e. `det(M_x − I) ≠ 0` over `ℤ` (exact).
pub fn is_elliptic(rs: &RootSystem, x: &TwistedElement) -> bool {
    let n = rs.rank();
    let m = x.matrix(rs);
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[i][j] as i128 - if i == j { 1 } else { 0 })
                .collect()
        })
        .collect();
    det_bareiss(&mut a) != 0
}

/// A `W`-conjugacy class in the coset `Wσ^k`.
#[derive(Clone, Debug)]
pub struct TwistedClass {
    pub members: Vec<TwistedElement>,
    pub elliptic: bool,
}

/// Enumerate all elements of `W` as root-index permutations, in a
/// deterministic breadth-first order from the identity under right
/// multiplication by simple reflections.
pub fn enumerate_weyl(rs: &RootSystem, cap: usize) -> Result<Vec<Vec<usize>>> {
    let gens: Vec<Vec<usize>> = (0..rs.rank())
        .map(|i| rs.simple_reflection_perm(i))
        .collect();
    let id: Vec<usize> = (0..rs.num_roots()).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
    seen.insert(id.clone());
    order.push(id.clone());
    queue.push_back(id);
    while let Some(w) = queue.pop_front() {
        for g in &gens {
            let next = compose(&w, g);
            if seen.insert(next.clone()) {
                if order.len() >= cap {
                    return Err(Error::Budget(format!(
                        "|W| exceeds the enumeration cap {cap}; raise the cap to proceed"
                    )));
                }
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

/// Partition the coset `{wσ : w ∈ W}` into `W`-conjugacy classes, each
/// tagged elliptic or not. Class sizes sum to `|W|`.
pub fn enumerate_twisted_classes(
    rs: &RootSystem,
    sigma: &DiagramAut,
    cap: usize,
) -> Result<Vec<TwistedClass>> {
    let weyl = enumerate_weyl(rs, cap)?;
    let sigma_perm = sigma.root_perm(rs);
    let gens: Vec<Vec<usize>> = (0..rs.rank())
        .map(|i| rs.simple_reflection_perm(i))
        .collect();
    // Coset elements keyed by their action permutation; σ-part is constant.
    let mut remaining: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut coset_order: Vec<Vec<usize>> = Vec::new();
    for (k, w) in weyl.iter().enumerate() {
        let action = compose(w, &sigma_perm);
        remaining.insert(action.clone(), k);
        coset_order.push(action);
    }
    let mut classes = Vec::new();
    let mut assigned: HashSet<Vec<usize>> = HashSet::new();
    for seed in &coset_order {
        if assigned.contains(seed) {
            continue;
        }
        // Breadth-first orbit closure under conjugation by simple
        // reflections (they generate W).
        let mut orbit: Vec<Vec<usize>> = vec![seed.clone()];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(seed.clone());
        let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
        queue.push_back(seed.clone());
        while let Some(a) = queue.pop_front() {
            for g in &gens {
                // Simple reflections are involutions: u a u⁻¹ = g∘a∘g.
                let conj = compose(g, &compose(&a, g));
                if seen.insert(conj.clone()) {
                    orbit.push(conj.clone());
                    queue.push_back(conj);
                }
            }
        }
        // Deterministic member order: by position in the canonical coset
        // enumeration.
        orbit.sort_by_key(|a| remaining[a]);
        let members: Vec<TwistedElement> = orbit
            .iter()
            .map(|a| TwistedElement {
                action: a.clone(),
                sigma_power: 1 % sigma.order().max(1),
            })
            .collect();
        for a in &orbit {
            assigned.insert(a.clone());
        }
        let flags: Vec<bool> = members.iter().map(|m| is_elliptic(rs, m)).collect();
        let elliptic = flags[0];
        if flags.iter().any(|&f| f != elliptic) {
            return Err(Error::Internal(
                "ellipticity is not constant on a conjugacy class".into(),
            ));
        }
        classes.push(TwistedClass { members, elliptic });
    }
    Ok(classes)
}
