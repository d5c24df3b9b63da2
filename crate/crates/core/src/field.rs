//! Arithmetic in F_q for odd prime powers q = p^n.
//!
//! An element c_0 + c_1 t + ... + c_{n-1} t^{n-1} of F_p[t]/(modulus) is stored
//! as the integer c_0 + c_1 p + ... + c_{n-1} p^{n-1} in [0, q). Addition,
//! multiplication, negation, inversion, the absolute trace, the canonical additive
//! character and the quadratic character are all tabulated once at construction,
//! so every operation afterwards is a lookup.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported field order. Tables are q x q.
pub const MAX_FIELD_ORDER: u32 = 1024;

/// Default cap on the number of points of any grid F_q^d built from a context.
pub const DEFAULT_GRID_CAP: usize = 1 << 26;

/// The operations exposed by [`FieldContext::field_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

/// The finite field F_q together with its characters and Gauss sum.
///
/// Immutable after construction; share it behind an `Arc`.
#[derive(Clone)]
pub struct FieldContext {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    trace: Vec<u32>,
    chi: Vec<Complex64>,
    eta: Vec<i8>,
    gauss: Complex64,
    grid_cap: usize,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .field("grid_cap", &self.grid_cap)
            .finish()
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}

impl FieldContext {
    /// Builds F_q. For prime powers the modulus is the first monic irreducible
    /// polynomial of degree n in the order of its encoded lower coefficients,
    /// so `new(9)` uses t^2 + 1.
    pub fn new(q: u32) -> Result<Self> {
        let (p, n) = prime_power(q)?;
        let modulus = if n == 1 { Vec::new() } else { first_irreducible(p, n) };
        Self::build(p, n, modulus)
    }

    /// Builds F_{p^n} from an explicit monic modulus given low-to-high
    /// (`[1, 0, 1]` is t^2 + 1). An empty modulus means the prime field.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::Domain(format!("characteristic must be an odd prime, got {p}")));
        }
        if modulus.is_empty() {
            return Self::build(p, 1, modulus);
        }
        if modulus.len() < 2 {
            return Err(Error::Domain("modulus must have degree at least 1".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Domain(format!("modulus coefficients must lie in [0, {p})")));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(Error::Domain("modulus must be monic".into()));
        }
        if modulus.len() == 2 {
            // A linear modulus gives the prime field back.
            return Self::build(p, 1, Vec::new());
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Domain(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let n = (modulus.len() - 1) as u32;
        Self::build(p, n, modulus)
    }

    fn build(p: u32, n: u32, modulus: Vec<u32>) -> Result<Self> {
        let q64 = (p as u64).checked_pow(n).unwrap_or(u64::MAX);
        if q64 > MAX_FIELD_ORDER as u64 {
            return Err(Error::Resource(format!(
                "field order {p}^{n} exceeds the supported maximum {MAX_FIELD_ORDER}"
            )));
        }
        let q = q64 as u32;
        let qs = q as usize;
        let digits: Vec<Vec<u32>> = (0..q).map(|x| to_digits(x, p, n)).collect();

        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        for a in 0..qs {
            for b in a..qs {
                let s: Vec<u32> = digits[a].iter().zip(&digits[b]).map(|(x, y)| (x + y) % p).collect();
                let s = from_digits(&s, p);
                add[a * qs + b] = s;
                add[b * qs + a] = s;
                let m = if n == 1 {
                    ((a as u64 * b as u64) % p as u64) as u32
                } else {
                    from_digits(&poly_mulmod(&digits[a], &digits[b], &modulus, p), p)
                };
                mul[a * qs + b] = m;
                mul[b * qs + a] = m;
            }
        }
        let neg: Vec<u32> =
            (0..qs).map(|a| from_digits(&digits[a].iter().map(|&c| (p - c) % p).collect::<Vec<_>>(), p)).collect();

        let mut ctx = FieldContext {
            p,
            n,
            q,
            modulus,
            add,
            mul,
            neg,
            inv: vec![0; qs],
            trace: vec![0; qs],
            chi: vec![Complex64::new(1.0, 0.0); qs],
            eta: vec![0; qs],
            gauss: Complex64::new(0.0, 0.0),
            grid_cap: DEFAULT_GRID_CAP,
        };

        for a in 1..q {
            ctx.inv[a as usize] = ctx.pow(a, (q - 2) as u64);
        }
        let minus_one = ctx.neg[1];
        for x in 0..q {
            let mut frob = x;
            let mut tr = 0;
            for _ in 0..n {
                tr = ctx.add(tr, frob);
                frob = ctx.pow(frob, p as u64);
            }
            if tr >= p {
                return Err(Error::Internal(format!("trace of {x} left the prime subfield")));
            }
            ctx.trace[x as usize] = tr;
            ctx.chi[x as usize] = Complex64::from_polar(1.0, 2.0 * PI * tr as f64 / p as f64);
            if x != 0 {
                let e = ctx.pow(x, ((q - 1) / 2) as u64);
                ctx.eta[x as usize] = if e == 1 {
                    1
                } else if e == minus_one {
                    -1
                } else {
                    return Err(Error::Internal(format!("Euler criterion gave {e} for {x}")));
                };
            }
        }
        ctx.gauss = (1..q).map(|s| ctx.chi[s as usize] * ctx.eta[s as usize] as f64).sum();

        if cfg!(debug_assertions) && q <= 49 {
            ctx.check_axioms()?;
        }
        Ok(ctx)
    }

    /// Replaces the grid cap used by every grid built on this field.
    pub fn with_grid_cap(mut self, cap: usize) -> Self {
        self.grid_cap = cap;
        self
    }

    /// Fault-injection hook: makes [`gauss_sum`](Self::gauss_sum) return `g`.
    #[doc(hidden)]
    pub fn with_gauss_sum_override(mut self, g: Complex64) -> Self {
        self.gauss = g;
        self
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Field order as a `usize`, handy for indexing.
    pub fn size(&self) -> usize {
        self.q as usize
    }

    /// The monic modulus low-to-high; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.n == 1
    }

    pub fn grid_cap(&self) -> usize {
        self.grid_cap
    }

    /// Returns q^d, or a resource error when it exceeds the grid cap.
    pub fn grid_len(&self, d: usize) -> Result<usize> {
        let mut len: usize = 1;
        for _ in 0..d {
            len = len.checked_mul(self.q as usize).filter(|&l| l <= self.grid_cap).ok_or_else(|| {
                Error::Resource(format!("grid F_{}^{} exceeds the cap of {} points", self.q, d, self.grid_cap))
            })?;
        }
        Ok(len)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        Ok(self.inv[a as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// The image of an integer in the prime subfield.
    pub fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// The class of t in F_p[t]/(modulus). Prime fields return 1.
    pub fn generator(&self) -> u32 {
        if self.n == 1 {
            1
        } else {
            self.p
        }
    }

    /// Checked dispatch over [`ArithOp`]; validates indices.
    pub fn field_arith(&self, op: ArithOp, a: u32, b: Option<u32>) -> Result<u32> {
        self.check_element(a)?;
        let need_b = |b: Option<u32>| -> Result<u32> {
            let b = b.ok_or_else(|| Error::Domain(format!("{op:?} needs two operands")))?;
            self.check_element(b)?;
            Ok(b)
        };
        match op {
            ArithOp::Add => Ok(self.add(a, need_b(b)?)),
            ArithOp::Sub => Ok(self.sub(a, need_b(b)?)),
            ArithOp::Mul => Ok(self.mul(a, need_b(b)?)),
            ArithOp::Neg => Ok(self.neg(a)),
            ArithOp::Inv => self.inv(a),
        }
    }

    fn check_element(&self, a: u32) -> Result<()> {
        if a >= self.q {
            return Err(Error::Domain(format!("{a} is not an element of F_{}", self.q)));
        }
        Ok(())
    }

    /// Absolute trace F_q -> F_p, returned as an index in [0, p).
    #[inline]
    pub fn trace(&self, x: u32) -> u32 {
        self.trace[x as usize]
    }

    /// The canonical additive character exp(2 pi i Tr(x) / p).
    #[inline]
    pub fn additive_character(&self, x: u32) -> Complex64 {
        self.chi[x as usize]
    }

    /// Quadratic character: +1 on nonzero squares, -1 on non-squares, 0 at 0.
    #[inline]
    pub fn quadratic_character(&self, x: u32) -> i8 {
        self.eta[x as usize]
    }

    /// G_1 = sum over s != 0 of eta(s) chi(s).
    pub fn gauss_sum(&self) -> Complex64 {
        self.gauss
    }

    pub fn is_minus_one_square(&self) -> bool {
        self.eta[self.neg[1] as usize] == 1
    }

    /// Some x with x^2 = a, found by search.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        (0..self.q).find(|&x| self.mul(x, x) == a)
    }

    /// Exhaustive check of the field axioms. Cubic in q.
    pub fn check_axioms(&self) -> Result<()> {
        let q = self.q;
        let fail = |what: &str, a: u32, b: u32, c: u32| {
            Err(Error::Internal(format!("F_{q}: {what} fails at ({a}, {b}, {c})")))
        };
        for a in 0..q {
            if self.add(a, 0) != a || self.mul(a, 1) != a || self.add(a, self.neg(a)) != 0 {
                return fail("identity/negation", a, 0, 0);
            }
            if a != 0 && self.mul(a, self.inv[a as usize]) != 1 {
                return fail("inverse", a, 0, 0);
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return fail("commutativity", a, b, 0);
                }
                for c in 0..q {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return fail("associativity of *", a, b, c);
                    }
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return fail("associativity of +", a, b, c);
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return fail("distributivity", a, b, c);
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits q = p^n with p an odd prime.
fn prime_power(q: u32) -> Result<(u32, u32)> {
    if q < 3 {
        return Err(Error::Domain(format!("field order must be an odd prime power, got {q}")));
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    if p == 2 {
        return Err(Error::Domain(format!("characteristic 2 is not supported (q = {q})")));
    }
    let mut rest = q;
    let mut n = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(Error::Domain(format!("{q} is not a prime power")));
    }
    Ok((p, n))
}

fn to_digits(mut x: u32, p: u32, n: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn from_digits(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo the monic polynomial `m`, both low-to-high.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let deg = m.len() - 1;
    let mut r: Vec<u32> = a.to_vec();
    while r.len() > deg {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let off = r.len() - deg;
            for (i, &c) in m[..deg].iter().enumerate() {
                r[off + i] = (r[off + i] + p - (lead * c) % p) % p;
            }
        }
    }
    r.resize(deg, 0);
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

/// Trial division by every monic polynomial of degree at most deg/2.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let n = (m.len() - 1) as u32;
    for k in 1..=n / 2 {
        for code in 0..p.pow(k) {
            let mut divisor = to_digits(code, p, k);
            divisor.push(1);
            if poly_rem(m, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u32, n: u32) -> Vec<u32> {
    (0..p.pow(n))
        .map(|code| {
            let mut m = to_digits(code, p, n);
            m.push(1);
            m
        })
        .find(|m| m[0] != 0 && is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}
