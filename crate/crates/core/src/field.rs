//! Exact finite-field arithmetic.
//!
//! Two flavours are provided behind the [`Field`] trait:
//!
//! * [`PrimeField`] — `GF(q)` for a prime `q`, elements stored as `u64`.
//!   Used by the graph-cohomology eigenspace oracle, which needs a field with
//!   `q ≡ 1 (mod n)` to split the action of `Z/nZ`.
//! * [`FiniteField`] — `GF(p^r)` in a polynomial basis with a deterministic
//!   modulus (the lexicographically smallest monic irreducible, see
//!   [`FiniteField::new`]). Used for branch-point coordinates and the
//!   Frobenius-semilinear operators on genus-0 components.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be >= 1")]
    BadDegree,
    #[error("field too large: p^r exceeds the supported range")]
    TooLarge,
    #[error("element has no inverse (zero)")]
    ZeroInverse,
    #[error("cannot parse field element `{0}`")]
    BadElement(String),
    #[error("elements belong to different fields")]
    FieldMismatch,
}

/// Minimal field interface needed by the dense linear algebra kernels.
pub trait Field {
    type El: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    /// `None` when `a` is zero.
    fn inv(&self, a: &Self::El) -> Option<Self::El>;
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m.is_multiple_of(2) {
        return m == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).is_some_and(|s| s <= m) {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factors of `m`, ascending, without multiplicity.
pub fn prime_factors(mut m: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// The smallest prime `q` with `q ≡ 1 (mod n)`, `q > floor`.
pub fn smallest_prime_one_mod(n: u64, floor: u64) -> u64 {
    let mut q = floor / n * n + 1;
    loop {
        if q > floor && q % n == 1 % n && is_prime(q) {
            return q;
        }
        q += n;
    }
}

// ---------------------------------------------------------------------------
// Prime fields

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(PrimeField { q })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn elem(&self, v: u64) -> u64 {
        v % self.q
    }

    pub fn elem_i64(&self, v: i64) -> u64 {
        let q = self.q as i64;
        (v.rem_euclid(q)) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u128) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &a);
            }
            a = self.mul(&a, &a);
            e >>= 1;
        }
        acc
    }

    /// An element of multiplicative order exactly `n` (requires `n | q-1`).
    pub fn root_of_unity(&self, n: u64) -> u64 {
        assert_eq!((self.q - 1) % n, 0, "no nth root of unity in GF({})", self.q);
        let cofactor = ((self.q - 1) / n) as u128;
        'outer: for g in 2..self.q {
            let w = self.pow(g, cofactor);
            // order of w divides n; check it is exactly n
            for l in prime_factors(n as u128) {
                if self.pow(w, (n as u128) / l) == 1 {
                    continue 'outer;
                }
            }
            return w;
        }
        unreachable!("GF({}) has a primitive root", self.q)
    }
}

impl Field for PrimeField {
    type El = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.q
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.q as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(*a, self.q as u128 - 2))
        }
    }
}

// ---------------------------------------------------------------------------
// Extension fields

/// `GF(p^r)` with elements as little-endian coefficient vectors over `GF(p)`.
///
/// The modulus is pinned bit-exactly: among all monic irreducibles
/// `x^r + c_{r-1}x^{r-1} + ... + c_0` over `GF(p)`, the one whose value
/// `sum c_i p^i` is smallest. The multiplicative generator returned by
/// [`FiniteField::generator`] is the element of smallest value with full
/// order, so `"g^k"` coordinates in component files are reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteField {
    p: u64,
    r: usize,
    /// monic modulus, length r+1, little-endian, modulus[r] == 1
    modulus: Vec<u64>,
}

pub type FfEl = Vec<u64>;

impl FiniteField {
    pub fn new(p: u64, r: usize) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if r == 0 {
            return Err(FieldError::BadDegree);
        }
        let bits = (r as u32) * (64 - p.leading_zeros());
        if bits > 120 {
            return Err(FieldError::TooLarge);
        }
        if r == 1 {
            return Ok(FiniteField { p, r, modulus: vec![0, 1] });
        }
        // scan non-leading coefficient vectors in value order
        let total = (p as u128).pow(r as u32);
        let mut v = 0u128;
        while v < total {
            let mut modulus = Vec::with_capacity(r + 1);
            let mut w = v;
            for _ in 0..r {
                modulus.push((w % p as u128) as u64);
                w /= p as u128;
            }
            modulus.push(1);
            if poly_is_irreducible(p, &modulus) {
                return Ok(FiniteField { p, r, modulus });
            }
            v += 1;
        }
        unreachable!("irreducible polynomials of every degree exist")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.r as u32)
    }

    /// Embed an integer via base-p digits: `value(elem(v)) == v` for `v < p^r`.
    pub fn elem(&self, mut v: u128) -> FfEl {
        let mut e = vec![0u64; self.r];
        for c in e.iter_mut() {
            *c = (v % self.p as u128) as u64;
            v /= self.p as u128;
        }
        e
    }

    pub fn from_int(&self, v: u64) -> FfEl {
        let mut e = vec![0u64; self.r];
        e[0] = v % self.p;
        e
    }

    pub fn value(&self, a: &FfEl) -> u128 {
        let mut v = 0u128;
        for &c in a.iter().rev() {
            v = v * self.p as u128 + c as u128;
        }
        v
    }

    pub fn pow(&self, a: &FfEl, mut e: u128) -> FfEl {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `a^(p^k)` — the k-fold Frobenius.
    pub fn frobenius(&self, a: &FfEl, k: u32) -> FfEl {
        let mut x = a.clone();
        for _ in 0..(k as usize % self.r.max(1)) {
            x = self.pow(&x, self.p as u128);
        }
        x
    }

    /// Smallest-value generator of the multiplicative group.
    pub fn generator(&self) -> FfEl {
        let q1 = self.order() - 1;
        let factors = prime_factors(q1);
        'outer: for v in 2..self.order() {
            let g = self.elem(v);
            for l in &factors {
                if self.pow(&g, q1 / l) == self.one() {
                    continue 'outer;
                }
            }
            return g;
        }
        // p = 2, r = 1: the unit group is trivial
        self.one()
    }

    /// All field elements in value order.
    pub fn elements(&self) -> impl Iterator<Item = FfEl> + '_ {
        (0..self.order()).map(move |v| self.elem(v))
    }

    /// Parse `"inf"`-less element syntax: `"g"`, `"g^k"`, or a decimal
    /// integer reduced into the prime subfield.
    pub fn parse_elem(&self, s: &str) -> Result<FfEl, FieldError> {
        if s == "g" {
            return Ok(self.generator());
        }
        if let Some(k) = s.strip_prefix("g^") {
            let k: u128 = k.parse().map_err(|_| FieldError::BadElement(s.into()))?;
            return Ok(self.pow(&self.generator(), k));
        }
        let v: u64 = s.parse().map_err(|_| FieldError::BadElement(s.into()))?;
        Ok(self.from_int(v))
    }

    pub fn render_elem(&self, a: &FfEl) -> String {
        let v = self.value(a);
        if v < self.p as u128 {
            return v.to_string();
        }
        // express as a generator power for readability
        let g = self.generator();
        let mut x = g.clone();
        for k in 1..self.order() {
            if &x == a {
                return format!("g^{k}");
            }
            x = self.mul(&x, &g);
        }
        v.to_string()
    }

    fn base_add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn base_mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
}

impl Field for FiniteField {
    type El = FfEl;

    fn zero(&self) -> FfEl {
        vec![0; self.r]
    }
    fn one(&self) -> FfEl {
        let mut e = vec![0; self.r];
        e[0] = 1 % self.p;
        e
    }
    fn is_zero(&self, a: &FfEl) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn add(&self, a: &FfEl, b: &FfEl) -> FfEl {
        a.iter().zip(b).map(|(&x, &y)| self.base_add(x, y)).collect()
    }
    fn sub(&self, a: &FfEl, b: &FfEl) -> FfEl {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.base_add(x, (self.p - y) % self.p))
            .collect()
    }
    fn neg(&self, a: &FfEl) -> FfEl {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }
    fn mul(&self, a: &FfEl, b: &FfEl) -> FfEl {
        // schoolbook convolution then reduction by the monic modulus
        let r = self.r;
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = self.base_add(prod[i + j], self.base_mul(x, y));
            }
        }
        for i in (r..2 * r - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            let shift = i - r;
            for j in 0..r {
                let m = self.modulus[j];
                if m != 0 {
                    let sub = self.base_mul(c, m);
                    prod[shift + j] = self.base_add(prod[shift + j], (self.p - sub) % self.p);
                }
            }
        }
        prod.truncate(r);
        prod
    }
    fn inv(&self, a: &FfEl) -> Option<FfEl> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }
}

// ---------------------------------------------------------------------------
// Table-backed small fields

/// Fully tabulated arithmetic for fields of order at most 64, used by the
/// hot enumeration loops. Elements are their value indices.
#[derive(Clone, Debug)]
pub struct SmallField {
    q: u16,
    p: u64,
    add: Vec<u16>,
    mul: Vec<u16>,
    inv: Vec<u16>,
    /// value -> value^p
    frob: Vec<u16>,
}

pub const SMALL_FIELD_MAX: u128 = 64;

impl SmallField {
    pub fn build(f: &FiniteField) -> Self {
        let q = f.order();
        assert!(q <= SMALL_FIELD_MAX, "field too large to tabulate");
        let q16 = q as u16;
        let els: Vec<FfEl> = f.elements().collect();
        let mut add = vec![0u16; (q * q) as usize];
        let mut mul = vec![0u16; (q * q) as usize];
        for a in 0..q as usize {
            for b in 0..q as usize {
                add[a * q as usize + b] = f.value(&f.add(&els[a], &els[b])) as u16;
                mul[a * q as usize + b] = f.value(&f.mul(&els[a], &els[b])) as u16;
            }
        }
        let inv = (0..q as usize)
            .map(|a| f.inv(&els[a]).map_or(0, |i| f.value(&i) as u16))
            .collect();
        let frob = (0..q as usize)
            .map(|a| f.value(&f.frobenius(&els[a], 1)) as u16)
            .collect();
        SmallField { q: q16, p: f.p(), add, mul, inv, frob }
    }

    /// Per-thread cache keyed by `(p, r)`.
    pub fn shared(p: u64, r: usize) -> std::rc::Rc<SmallField> {
        use std::cell::RefCell;
        use std::collections::HashMap;
        use std::rc::Rc;
        thread_local! {
            static CACHE: RefCell<HashMap<(u64, usize), Rc<SmallField>>> =
                RefCell::new(HashMap::new());
        }
        CACHE.with(|c| {
            c.borrow_mut()
                .entry((p, r))
                .or_insert_with(|| {
                    Rc::new(SmallField::build(&FiniteField::new(p, r).expect("valid field")))
                })
                .clone()
        })
    }

    #[inline]
    pub fn q(&self) -> u16 {
        self.q
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        self.inv[a as usize]
    }

    /// `a^(p^k)`.
    #[inline]
    pub fn frob_k(&self, mut a: u16, k: u32) -> u16 {
        for _ in 0..k {
            a = self.frob[a as usize];
        }
        a
    }

    pub fn neg(&self, a: u16) -> u16 {
        // -a = (p-1) * a
        let mut acc = 0u16;
        for _ in 0..(self.p - 1) {
            acc = self.add(acc, a);
        }
        acc
    }
}

// --- dense polynomials over GF(p), little-endian, used for modulus search ---

fn poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_mulmod(p: u64, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ((x as u128 * y as u128) % p as u128) as u64) % p;
        }
    }
    poly_rem(p, &mut prod, m);
    prod
}

fn poly_rem(p: u64, a: &mut Vec<u64>, m: &[u64]) {
    let dm = m.len() - 1;
    while a.len() > dm {
        let c = *a.last().unwrap();
        let da = a.len() - 1;
        if c != 0 {
            // m is monic
            for (j, &mj) in m.iter().enumerate().take(dm) {
                let sub = (c as u128 * mj as u128 % p as u128) as u64;
                let idx = da - dm + j;
                a[idx] = (a[idx] + p - sub) % p;
            }
        }
        a.pop();
        poly_trim(a);
        if a.is_empty() {
            break;
        }
    }
    if a.is_empty() {
        a.push(0);
    }
    poly_trim(a);
}

fn poly_gcd(p: u64, mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let mut r = a.clone();
        // make b monic for poly_rem
        let lead = *b.last().unwrap();
        let pf = PrimeField { q: p };
        let linv = pf.inv(&lead).unwrap();
        let monic: Vec<u64> = b.iter().map(|&c| pf.mul(&c, &linv)).collect();
        poly_rem(p, &mut r, &monic);
        a = b;
        b = r;
    }
    a
}

fn poly_pow_pk_mod(p: u64, m: &[u64], k: u32) -> Vec<u64> {
    // x^(p^k) mod m by k successive p-th powers
    let mut x = vec![0u64, 1];
    poly_rem(p, &mut x, m);
    for _ in 0..k {
        let mut acc = vec![1u64];
        let mut base = x.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(p, &acc, &base, m);
            }
            base = poly_mulmod(p, &base, &base, m);
            e >>= 1;
        }
        x = acc;
    }
    x
}

/// Rabin irreducibility test for a monic polynomial over `GF(p)`.
fn poly_is_irreducible(p: u64, m: &[u64]) -> bool {
    let r = (m.len() - 1) as u32;
    if r == 1 {
        return true;
    }
    let x = {
        let mut x = vec![0u64, 1];
        poly_rem(p, &mut x, m);
        x
    };
    // x^(p^r) == x mod m
    let xr = poly_pow_pk_mod(p, m, r);
    if xr != x {
        return false;
    }
    // gcd(x^(p^(r/l)) - x, m) == 1 for each prime l | r
    for l in prime_factors(r as u128) {
        let k = r / (l as u32);
        let xp = poly_pow_pk_mod(p, m, k);
        let mut diff = vec![0u64; xp.len().max(x.len())];
        for (i, &c) in xp.iter().enumerate() {
            diff[i] = c;
        }
        for (i, &c) in x.iter().enumerate() {
            diff[i] = (diff[i] + p - c) % p;
        }
        poly_trim(&mut diff);
        let g = poly_gcd(p, m.to_vec(), diff);
        if g.len() != 1 {
            return false;
        }
    }
    true
}
