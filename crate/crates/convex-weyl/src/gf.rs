//! Exact finite fields `𝔽_{q^m}` with `q^m ≤ 64`.
//!
//! Elements are represented in the polynomial basis over the prime field and
//! encoded as small integers (base-`q` digit strings); all arithmetic is
//! precomputed into full operation tables at construction time, so every
//! field operation downstream is a table lookup. The modulus is a
//! deterministic (smallest-lexicographic) monic irreducible polynomial,
//! overridable via an explicit [`FieldSpec`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum supported field size.
pub const MAX_FIELD_SIZE: u64 = 64;

/// Serializable field description: `q` (prime), extension degree `m`, and
/// the monic irreducible modulus as coefficients `[c0, …, cm]` over `𝔽_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub q: u64,
    pub m: usize,
    pub modulus: Vec<u64>,
}

/// A field element, encoded as its index `Σ c_i q^i` in the enumeration of
/// `𝔽_{q^m}` by base-`q` digit strings of polynomial-basis coefficients.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Fq(pub u8);

/// A concrete finite field with all operation tables built.
#[derive(Clone, Debug)]
pub struct Field {
    pub spec: FieldSpec,
    pub size: usize,
    add_t: Vec<u8>,
    mul_t: Vec<u8>,
    neg_t: Vec<u8>,
    inv_t: Vec<u8>,
    frob_t: Vec<u8>,
}

impl Field {
    /// Build `𝔽_{q^m}` with the deterministic modulus for `(q, m)`.
    pub fn new(q: u64, m: usize) -> Result<Field> {
        let modulus = deterministic_modulus(q, m)?;
        Self::from_spec(FieldSpec { q, m, modulus })
    }

    /// Build from an explicit spec; the modulus is re-verified irreducible.
    pub fn from_spec(spec: FieldSpec) -> Result<Field> {
        let q = spec.q;
        let m = spec.m;
        if !is_prime(q) {
            return Err(Error::InvalidField(format!(
                "q = {q} must be prime (the modulus is serialized over 𝔽_q; \
                 every field of size ≤ {MAX_FIELD_SIZE} is reachable with prime q)"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidField("extension degree m must be ≥ 1".into()));
        }
        let size = q
            .checked_pow(m as u32)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| {
                Error::InvalidField(format!("q^m exceeds the cap of {MAX_FIELD_SIZE}"))
            })? as usize;
        if spec.modulus.len() != m + 1 || spec.modulus[m] != 1 {
            return Err(Error::InvalidField(
                "modulus must be monic of degree m, coefficients [c0..cm]".into(),
            ));
        }
        if spec.modulus.iter().any(|&c| c >= q) {
            return Err(Error::InvalidField("modulus coefficients must lie in 𝔽_q".into()));
        }
        if !is_irreducible(q, &spec.modulus) {
            return Err(Error::InvalidField(format!(
                "modulus {:?} is reducible over 𝔽_{q}",
                spec.modulus
            )));
        }

        // Polynomial-basis arithmetic for the table build only.
        let decode = |i: usize| -> Vec<u64> {
            let mut v = Vec::with_capacity(m);
            let mut i = i as u64;
            for _ in 0..m {
                v.push(i % q);
                i /= q;
            }
            v
        };
        let encode = |v: &[u64]| -> usize {
            let mut i = 0u64;
            for &c in v.iter().rev() {
                i = i * q + c;
            }
            i as usize
        };
        let mut add_t = vec![0u8; size * size];
        let mut mul_t = vec![0u8; size * size];
        let mut neg_t = vec![0u8; size];
        for a in 0..size {
            let av = decode(a);
            let negv: Vec<u64> = av.iter().map(|&c| (q - c) % q).collect();
            neg_t[a] = encode(&negv) as u8;
            for b in 0..size {
                let bv = decode(b);
                let sum: Vec<u64> = av.iter().zip(&bv).map(|(x, y)| (x + y) % q).collect();
                add_t[a * size + b] = encode(&sum) as u8;
                // Schoolbook product then reduction by the monic modulus.
                let mut prod = vec![0u64; 2 * m - 1];
                for (i, &x) in av.iter().enumerate() {
                    for (j, &y) in bv.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % q;
                    }
                }
                for d in (m..prod.len()).rev() {
                    let c = prod[d];
                    if c != 0 {
                        prod[d] = 0;
                        for k in 0..m {
                            let sub = (c * spec.modulus[k]) % q;
                            prod[d - m + k] = (prod[d - m + k] + q * q - sub) % q;
                        }
                    }
                }
                mul_t[a * size + b] = encode(&prod[..m]) as u8;
            }
        }
        let mut inv_t = vec![0u8; size];
        for a in 1..size {
            let mut found = None;
            for b in 1..size {
                if mul_t[a * size + b] == 1 {
                    found = Some(b as u8);
                    break;
                }
            }
            inv_t[a] = found
                .ok_or_else(|| Error::Internal(format!("no inverse for element {a}")))?;
        }
        let mut frob_t = vec![0u8; size];
        for a in 0..size {
            let mut acc = 1usize;
            for _ in 0..q {
                acc = mul_t[acc * size + a] as usize;
            }
            // acc = a^q computed as repeated multiplication (q ≤ 61).
            frob_t[a] = acc as u8;
        }
        Ok(Field {
            spec,
            size,
            add_t,
            mul_t,
            neg_t,
            inv_t,
            frob_t,
        })
    }

    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    pub fn one(&self) -> Fq {
        Fq(1)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add_t[a.0 as usize * self.size + b.0 as usize])
    }

    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg_t[a.0 as usize])
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.mul_t[a.0 as usize * self.size + b.0 as usize])
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a.0 == 0 {
            None
        } else {
            Some(Fq(self.inv_t[a.0 as usize]))
        }
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The `q`-power Frobenius `a ↦ a^q`.
    pub fn frob(&self, a: Fq) -> Fq {
        Fq(self.frob_t[a.0 as usize])
    }

    /// Unique `q`-th root: the `(m−1)`-fold `q`-power.
    pub fn q_root(&self, a: Fq) -> Fq {
        let mut r = a;
        for _ in 0..self.spec.m.saturating_sub(1) {
            r = self.frob(r);
        }
        r
    }

    /// Embedding of a prime-field integer.
    pub fn from_int(&self, n: u64) -> Fq {
        Fq((n % self.spec.q) as u8)
    }

    /// All elements in index order (deterministic).
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.size as u8).map(Fq)
    }

    /// A seeded-random element.
    pub fn random<R: rand::Rng>(&self, rng: &mut R) -> Fq {
        Fq(rng.gen_range(0..self.size as u64) as u8)
    }

    /// A seeded-random nonzero element.
    pub fn random_nonzero<R: rand::Rng>(&self, rng: &mut R) -> Fq {
        Fq(rng.gen_range(1..self.size as u64) as u8)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial-division irreducibility test for a monic polynomial over `𝔽_q`
/// (coefficients `[c0..cd]`). Exhaustive at desk size.
fn is_irreducible(q: u64, poly: &[u64]) -> bool {
    let d = poly.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    // Divide by every monic polynomial of degree 1..=d/2.
    for deg in 1..=d / 2 {
        let count = q.pow(deg as u32);
        for idx in 0..count {
            let mut div = Vec::with_capacity(deg + 1);
            let mut i = idx;
            for _ in 0..deg {
                div.push(i % q);
                i /= q;
            }
            div.push(1);
            if poly_rem_is_zero(q, poly, &div) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(q: u64, num: &[u64], div: &[u64]) -> bool {
    let mut rem: Vec<u64> = num.to_vec();
    let dd = div.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap();
        let top = rem.len() - 1;
        if lead != 0 {
            for k in 0..=dd {
                let sub = (lead * div[k]) % q;
                rem[top - dd + k] = (rem[top - dd + k] + q * q - sub) % q;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

/// The smallest-lexicographic monic irreducible polynomial of degree `m`
/// over `𝔽_q` (ordered by the constant-first digit string as an integer).
pub fn deterministic_modulus(q: u64, m: usize) -> Result<Vec<u64>> {
    if !is_prime(q) {
        return Err(Error::InvalidField(format!("q = {q} must be prime")));
    }
    if m == 0 {
        return Err(Error::InvalidField("extension degree m must be ≥ 1".into()));
    }
    let count = q
        .checked_pow(m as u32)
        .ok_or_else(|| Error::InvalidField("q^m overflow".into()))?;
    for idx in 0..count {
        let mut poly = Vec::with_capacity(m + 1);
        let mut i = idx;
        for _ in 0..m {
            poly.push(i % q);
            i /= q;
        }
        poly.push(1);
        if is_irreducible(q, &poly) {
            return Ok(poly);
        }
    }
    Err(Error::Internal(format!(
        "no irreducible polynomial of degree {m} over F_{q} found"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64, m: usize) -> Field {
        Field::new(q, m).unwrap()
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (q, m) in [(2, 1), (3, 1), (2, 2), (3, 2), (2, 3), (5, 1), (7, 1), (2, 6)] {
            let f = field(q, m);
            let els: Vec<Fq> = f.elements().collect();
            assert_eq!(els.len(), (q as usize).pow(m as u32));
            for &a in &els {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive_and_fixes_prime_field() {
        for (q, m) in [(2, 2), (3, 2), (2, 3), (2, 6)] {
            let f = field(q, m);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.frob(f.add(a, b)), f.add(f.frob(a), f.frob(b)));
                    assert_eq!(f.frob(f.mul(a, b)), f.mul(f.frob(a), f.frob(b)));
                }
                // a^q == pow(a, q).
                assert_eq!(f.frob(a), f.pow(a, q));
                // q-th root inverts the Frobenius.
                assert_eq!(f.frob(f.q_root(a)), a);
                assert_eq!(f.q_root(f.frob(a)), a);
            }
            for n in 0..q {
                let a = f.from_int(n);
                assert_eq!(f.frob(a), a);
            }
        }
    }

    #[test]
    fn f4_is_the_expected_field() {
        // 𝔽_4 = 𝔽_2[t]/(t²+t+1): smallest-lex modulus is [1,1,1].
        let f = field(2, 2);
        assert_eq!(f.spec.modulus, vec![1, 1, 1]);
        // t is the element of index 2 (digits [0,1]); t² = t+1 (index 3).
        let t = Fq(2);
        assert_eq!(f.mul(t, t), Fq(3));
        assert_eq!(f.frob(t), Fq(3));
    }

    #[test]
    fn moduli_are_deterministic_and_irreducible() {
        for (q, m) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6), (3, 1), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let a = deterministic_modulus(q, m).unwrap();
            let b = deterministic_modulus(q, m).unwrap();
            assert_eq!(a, b);
            assert!(is_irreducible(q, &a));
        }
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(Field::new(4, 1).is_err()); // non-prime q
        assert!(Field::new(2, 7).is_err()); // 128 > 64
        assert!(Field::from_spec(FieldSpec {
            q: 2,
            m: 2,
            modulus: vec![0, 0, 1], // t² reducible
        })
        .is_err());
        assert!(Field::from_spec(FieldSpec {
            q: 2,
            m: 2,
            modulus: vec![1, 1], // wrong degree
        })
        .is_err());
    }

    #[test]
    fn multiplicative_group_order() {
        for (q, m) in [(2, 2), (3, 2), (2, 4)] {
            let f = field(q, m);
            let size = f.size as u64;
            for a in f.elements().skip(1) {
                assert_eq!(f.pow(a, size - 1), f.one());
            }
        }
    }
}
