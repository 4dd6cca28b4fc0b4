//! Cyclic covers of the projective line and their Frobenius-semilinear
//! operators.
//!
//! For a `Z/nZ`-cover of `P^1` with `n = p^t - 1`, branch points
//! `lambda_i` and local exponents `d_i` summing to `0 mod n`, the twisting
//! line bundle has degree `-s` with `s = deg(D)/n`, and `H^1` of it carries
//! the `p^t`-semilinear operator
//!
//! ```text
//! phi(x^-i) = h(x) * x^(-i p^t)   projected onto x^-1, ..., x^-(s-1),
//! ```
//!
//! where `h = prod over finite branch points of (x - lambda_i)^(d_i)` is the
//! trivializing section with the exponent at infinity absorbed into the
//! chart bookkeeping. The matrix entry at row `i`, column `j` is the
//! coefficient of `x^(p^t j - i)` in `h`. The invariant of interest is the
//! stable rank: the dimension of the intersection of images of all iterates.
//! The operator changes by a nonzero scalar under a different trivialization
//! and by conjugation under a Mobius change of coordinates; the stable rank
//! sees neither.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FfEl, FieldError, FiniteField};
use crate::matrix::Matrix;
use crate::padic::{Coeff, DigitContext, DigitError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum P1Error {
    #[error("branch points must be pairwise distinct")]
    RepeatedPoint,
    #[error("one exponent per branch point required")]
    LengthMismatch,
    #[error("exponent {0} not in {{0, ..., n-1}}")]
    ExponentOutOfRange(Coeff),
    #[error("exponent sum {0} not divisible by n = {1}")]
    NotKernel(Coeff, Coeff),
    #[error("matrix indices exceed the supported range; context too large")]
    TooLarge,
    #[error("the twisted character is trivial (s = 0): no operator")]
    TrivialCharacter,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Digit(#[from] DigitError),
}

/// A point of `P^1` over a finite field.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum PointP1 {
    Finite(FfEl),
    Infinity,
}

impl PointP1 {
    pub fn parse(field: &FiniteField, s: &str) -> Result<Self, FieldError> {
        if s == "inf" {
            Ok(PointP1::Infinity)
        } else {
            Ok(PointP1::Finite(field.parse_elem(s)?))
        }
    }

    pub fn render(&self, field: &FiniteField) -> String {
        match self {
            PointP1::Infinity => "inf".into(),
            PointP1::Finite(a) => field.render_elem(a),
        }
    }
}

/// Branch data of a cyclic cover of `P^1`: pairwise distinct points with
/// exponents in `{0, ..., n-1}` summing to a multiple of `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamifiedP1Cover {
    pub ctx: DigitContext,
    pub field: FiniteField,
    pub points: Vec<PointP1>,
    pub exps: Vec<Coeff>,
}

impl RamifiedP1Cover {
    pub fn new(
        ctx: DigitContext,
        field: FiniteField,
        points: Vec<PointP1>,
        exps: Vec<Coeff>,
    ) -> Result<Self, P1Error> {
        if points.len() != exps.len() {
            return Err(P1Error::LengthMismatch);
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(P1Error::RepeatedPoint);
                }
            }
        }
        for &d in &exps {
            if d >= ctx.n() {
                return Err(P1Error::ExponentOutOfRange(d));
            }
        }
        let deg: Coeff = exps.iter().sum();
        if !deg.is_multiple_of(ctx.n()) {
            return Err(P1Error::NotKernel(deg, ctx.n()));
        }
        Ok(RamifiedP1Cover { ctx, field, points, exps })
    }

    pub fn deg(&self) -> Coeff {
        self.exps.iter().sum()
    }

    pub fn s(&self) -> Coeff {
        self.deg() / self.ctx.n()
    }

    /// Exponents digit-shifted by `i`; same branch points.
    pub fn digit_shift(&self, i: u32) -> RamifiedP1Cover {
        let exps = self
            .exps
            .iter()
            .map(|&d| self.ctx.digit_shift(d, i).expect("in range"))
            .collect();
        RamifiedP1Cover { ctx: self.ctx, field: self.field.clone(), points: self.points.clone(), exps }
    }

    /// Exponents multiplied by `l` mod `n`; the `l`-th power twist.
    pub fn twist(&self, l: Coeff) -> Result<RamifiedP1Cover, P1Error> {
        if l == 0 || l >= self.ctx.n() {
            return Err(P1Error::ExponentOutOfRange(l));
        }
        let n = self.ctx.n();
        let exps = self.exps.iter().map(|&d| (l * d) % n).collect();
        Ok(RamifiedP1Cover { ctx: self.ctx, field: self.field.clone(), points: self.points.clone(), exps })
    }

    /// Applies the fractional-linear map `z -> (a z + b) / (c z + d)` to all
    /// branch points. `ad - bc` must be nonzero.
    pub fn mobius(&self, m: &[FfEl; 4]) -> Result<RamifiedP1Cover, P1Error> {
        let f = &self.field;
        let det = f.sub(&f.mul(&m[0], &m[3]), &f.mul(&m[1], &m[2]));
        if f.is_zero(&det) {
            return Err(P1Error::RepeatedPoint);
        }
        let points = self
            .points
            .iter()
            .map(|pt| match pt {
                PointP1::Infinity => {
                    if f.is_zero(&m[2]) {
                        PointP1::Infinity
                    } else {
                        PointP1::Finite(f.mul(&m[0], &f.inv(&m[2]).unwrap()))
                    }
                }
                PointP1::Finite(z) => {
                    let den = f.add(&f.mul(&m[2], z), &m[3]);
                    if f.is_zero(&den) {
                        PointP1::Infinity
                    } else {
                        let num = f.add(&f.mul(&m[0], z), &m[1]);
                        PointP1::Finite(f.mul(&num, &f.inv(&den).unwrap()))
                    }
                }
            })
            .collect();
        RamifiedP1Cover::new(self.ctx, f.clone(), points, self.exps.clone())
    }

    /// Moves a branch point to infinity when none is there, via
    /// `z -> 1/(z - a)` for the first branch point `a`.
    pub fn ensure_infinity(&self) -> Result<RamifiedP1Cover, P1Error> {
        if self.points.iter().any(|p| matches!(p, PointP1::Infinity)) {
            return Ok(self.clone());
        }
        let f = &self.field;
        let a = match &self.points[0] {
            PointP1::Finite(a) => a.clone(),
            PointP1::Infinity => unreachable!(),
        };
        // z -> 1 / (z - a)  ==  (0 z + 1) / (1 z - a)
        self.mobius(&[f.zero(), f.one(), f.one(), f.neg(&a)])
    }
}

/// A square matrix acting `p^twist`-semilinearly: `v -> A sigma(v)` with
/// `sigma` the entrywise `p^twist` power.
#[derive(Clone, Debug)]
pub struct SemilinearOperator {
    pub field: FiniteField,
    pub matrix: Matrix<FiniteField>,
    pub twist: u32,
}

impl SemilinearOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    fn sigma(&self, m: &Matrix<FiniteField>) -> Matrix<FiniteField> {
        m.map(|a| self.field.frobenius(a, self.twist))
    }

    /// Dimension of the intersection of images of all iterates: multiply in
    /// twisted copies of the matrix until the rank stops dropping.
    pub fn stable_rank(&self) -> u64 {
        let f = &self.field;
        if self.dim() == 0 {
            return 0;
        }
        let mut product = self.matrix.clone();
        let mut rank = product.rank(f);
        loop {
            product = self.matrix.mul(f, &self.sigma(&product));
            let next = product.rank(f);
            if next == rank {
                return rank as u64;
            }
            rank = next;
        }
    }

    /// Closed form: rank of a high power of the full conjugate product
    /// `N = A sigma(A) ... sigma^(m-1)(A)` where `sigma^m` is the identity
    /// on the coefficient field.
    pub fn stable_rank_by_norm(&self) -> u64 {
        let f = &self.field;
        if self.dim() == 0 {
            return 0;
        }
        let r = f.degree() as u32;
        let m = r / gcd_u32(r, self.twist % r.max(1));
        let mut norm = self.matrix.clone();
        let mut twisted = self.matrix.clone();
        for _ in 1..m.max(1) {
            twisted = self.sigma(&twisted);
            norm = norm.mul(f, &twisted);
        }
        // eventual rank of the linear map `norm`
        let mut power = norm.clone();
        let mut rank = power.rank(f);
        for _ in 0..self.dim() {
            power = power.mul(f, &norm);
            let next = power.rank(f);
            if next == rank {
                break;
            }
            rank = next;
        }
        rank as u64
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

/// Dense little-endian polynomial product `prod (x - lambda_i)^(d_i)` over
/// the finite branch points.
fn section_polynomial(c: &RamifiedP1Cover) -> Vec<FfEl> {
    let f = &c.field;
    let mut h = vec![f.one()];
    for (pt, &d) in c.points.iter().zip(&c.exps) {
        let PointP1::Finite(lam) = pt else { continue };
        let neg = f.neg(lam);
        for _ in 0..d {
            // multiply by (x - lam)
            let mut next = vec![f.zero(); h.len() + 1];
            for (k, coeff) in h.iter().enumerate() {
                next[k + 1] = f.add(&next[k + 1], coeff);
                next[k] = f.add(&next[k], &f.mul(coeff, &neg));
            }
            h = next;
        }
    }
    h
}

/// The semilinear operator on `H^1` of the twisting bundle, in the basis
/// `x^-1, ..., x^-(s-1)`. Errors when `s = 0` (trivial character).
pub fn cech_matrix(c: &RamifiedP1Cover) -> Result<SemilinearOperator, P1Error> {
    let s = c.s();
    if s == 0 {
        return Err(P1Error::TrivialCharacter);
    }
    let c = c.ensure_infinity()?;
    let f = c.field.clone();
    let h = section_polynomial(&c);
    let dim = (s - 1) as usize;
    let pt = (c.ctx.p() as Coeff).pow(c.ctx.t());
    // index bound p^t (s-1) must fit usize
    let max_index = pt
        .checked_mul(s)
        .filter(|&m| m < usize::MAX as Coeff)
        .ok_or(P1Error::TooLarge)?;
    let _ = max_index;
    let coeff = |k: Coeff| -> FfEl {
        if (k as usize) < h.len() {
            h[k as usize].clone()
        } else {
            f.zero()
        }
    };
    let matrix = Matrix::from_fn(dim, dim, |i, j| {
        let power = pt * (j as Coeff + 1) - (i as Coeff + 1);
        coeff(power)
    });
    Ok(SemilinearOperator { field: f, matrix, twist: c.ctx.t() })
}

/// The first generalized invariant of the cover: stable rank of the
/// semilinear operator; zero when the operator is empty or the character
/// trivial. Small coefficient fields take a fully tabulated path; the
/// generic path is kept alongside and the two are cross-checked in tests.
pub fn gamma(c: &RamifiedP1Cover) -> Result<u64, P1Error> {
    if c.s() <= 1 {
        return Ok(0);
    }
    if c.field.order() <= crate::field::SMALL_FIELD_MAX {
        return gamma_tabulated(c);
    }
    gamma_generic(c)
}

/// Reference path over the polynomial-basis field.
pub fn gamma_generic(c: &RamifiedP1Cover) -> Result<u64, P1Error> {
    if c.s() <= 1 {
        return Ok(0);
    }
    Ok(cech_matrix(c)?.stable_rank())
}

/// Table-backed path: same section polynomial and stable-rank iteration,
/// with elements as value indices into precomputed tables.
fn gamma_tabulated(c: &RamifiedP1Cover) -> Result<u64, P1Error> {
    use crate::field::SmallField;
    let s = c.s();
    let c = c.ensure_infinity()?;
    let f = SmallField::shared(c.field.p(), c.field.degree());
    // section polynomial over value indices
    let mut h: Vec<u16> = vec![1];
    for (pt, &d) in c.points.iter().zip(&c.exps) {
        let PointP1::Finite(lam) = pt else { continue };
        let neg = f.neg(c.field.value(lam) as u16);
        for _ in 0..d {
            let mut next = vec![0u16; h.len() + 1];
            for (k, &coeff) in h.iter().enumerate() {
                next[k + 1] = f.add(next[k + 1], coeff);
                next[k] = f.add(next[k], f.mul(coeff, neg));
            }
            h = next;
        }
    }
    let dim = (s - 1) as usize;
    let pt_pow = (c.ctx.p() as Coeff).pow(c.ctx.t());
    let coeff = |k: Coeff| -> u16 {
        if (k as usize) < h.len() {
            h[k as usize]
        } else {
            0
        }
    };
    let mut a = vec![0u16; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i * dim + j] = coeff(pt_pow * (j as Coeff + 1) - (i as Coeff + 1));
        }
    }
    let t = c.ctx.t();
    let rank = |m: &[u16]| -> usize {
        let mut m = m.to_vec();
        let mut rank = 0usize;
        for col in 0..dim {
            let Some(piv) = (rank..dim).find(|&r| m[r * dim + col] != 0) else { continue };
            for j in 0..dim {
                m.swap(rank * dim + j, piv * dim + j);
            }
            let pinv = f.inv(m[rank * dim + col]);
            for j in 0..dim {
                m[rank * dim + j] = f.mul(m[rank * dim + j], pinv);
            }
            for r in 0..dim {
                if r != rank && m[r * dim + col] != 0 {
                    let factor = f.neg(m[r * dim + col]);
                    for j in 0..dim {
                        let t = f.mul(factor, m[rank * dim + j]);
                        m[r * dim + j] = f.add(m[r * dim + j], t);
                    }
                }
            }
            rank += 1;
            if rank == dim {
                break;
            }
        }
        rank
    };
    if dim == 0 {
        return Ok(0);
    }
    let mut product = a.clone();
    let mut r = rank(&product);
    loop {
        // product <- a * sigma(product)
        let twisted: Vec<u16> = product.iter().map(|&x| f.frob_k(x, t)).collect();
        let mut next = vec![0u16; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let aik = a[i * dim + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..dim {
                    let t = f.mul(aik, twisted[k * dim + j]);
                    next[i * dim + j] = f.add(next[i * dim + j], t);
                }
            }
        }
        product = next;
        let nr = rank(&product);
        if nr == r {
            return Ok(r as u64);
        }
        r = nr;
    }
}

/// Certificate that the bundle misses every obstruction: the operator
/// product stays invertible, equivalently the invariant attains `s - 1`.
/// Vacuously true for `s <= 1`.
pub fn theta_exists(c: &RamifiedP1Cover) -> Result<bool, P1Error> {
    let s = c.s();
    if s <= 1 {
        return Ok(true);
    }
    Ok(gamma(c)? == (s - 1) as u64)
}

/// Upper bound `gamma <= s - 1` whenever the divisor is nonempty.
pub fn gamma_bound_check(c: &RamifiedP1Cover) -> Result<bool, P1Error> {
    let g = gamma(c)?;
    if c.deg() > 0 {
        Ok(g <= (c.s().saturating_sub(1)) as u64)
    } else {
        Ok(g == 0)
    }
}

/// The invariant is blind to simultaneous digit shift of the exponents —
/// the shifted data belongs to the Frobenius-twisted character.
pub fn frobenius_twist_invariance(c: &RamifiedP1Cover, i: u32) -> Result<bool, P1Error> {
    Ok(gamma(c)? == gamma(&c.digit_shift(i))?)
}

/// Classical ordinariness polynomial for `y^2 = x(x-1)(x-lam)`:
/// `H(lam) = sum_k binom((p-1)/2, k)^2 lam^k`.
pub fn hasse_polynomial_value(field: &FiniteField, lam: &FfEl) -> FfEl {
    let p = field.p();
    let m = (p - 1) / 2;
    let mut acc = field.zero();
    let mut lam_pow = field.one();
    for k in 0..=m {
        let b = binom_mod_p(p, m, k);
        let term = field.mul(&field.from_int(b), &lam_pow);
        // square the binomial coefficient
        let term = field.mul(&term, &field.from_int(b));
        acc = field.add(&acc, &term);
        lam_pow = field.mul(&lam_pow, lam);
    }
    acc
}

fn binom_mod_p(p: u64, n: u64, k: u64) -> u64 {
    // n < p here, so plain arithmetic mod p suffices
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num = num * ((n - i) as u128) % p as u128;
        den = den * ((i + 1) as u128) % p as u128;
    }
    let f = crate::field::PrimeField::new(p).unwrap();
    let d = f.inv(&((den % p as u128) as u64)).unwrap();
    f.mul(&((num % p as u128) as u64), &d)
}

/// Point count of `y^2 = x(x-1)(x-lam)` over the coefficient field,
/// including the point at infinity. Brute force.
pub fn elliptic_point_count(field: &FiniteField, lam: &FfEl) -> u64 {
    let mut count = 1u64; // infinity
    let q1 = field.order() - 1;
    for x in field.elements() {
        let fx = {
            let a = x.clone();
            let b = field.sub(&x, &field.one());
            let c = field.sub(&x, lam);
            field.mul(&field.mul(&a, &b), &c)
        };
        if field.is_zero(&fx) {
            count += 1;
        } else if field.pow(&fx, q1 / 2) == field.one() {
            count += 2;
        }
    }
    count
}

/// Ordinariness by counting: over a field of size `q = p^r`, the curve is
/// ordinary iff `#E != 1 mod p`.
pub fn elliptic_is_ordinary(field: &FiniteField, lam: &FfEl) -> bool {
    elliptic_point_count(field, lam) % field.p() != 1
}
