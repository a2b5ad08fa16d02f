//! Exact arithmetic in finite fields GF(p^m) in a polynomial basis.
//!
//! A field is described by a [`FieldDesc`], a cheap-to-clone handle around the
//! validated `(p, m, modulus)` triple. Elements are encoded as integers
//! `c_0 + c_1 p + ... + c_{m-1} p^{m-1}` where `c_k` is the coefficient of
//! `x^k`. The raw `u64` API on [`FieldDesc`] is what the matrix and search
//! code use; [`Elem`] carries its field and checks compatibility.
//!
//! Fields up to 2^20 elements lazily build exp/log (and Zech) tables on first
//! use; larger fields fall back to schoolbook multiplication and
//! Pohlig–Hellman discrete logarithms.

mod poly;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{factorize, is_prime, solve_congruence};

const TABLE_LIMIT: u64 = 1 << 20;
const NONE: u32 = u32::MAX;

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    /// `zech[k] = log(1 + g^k)`, only for odd characteristic.
    zech: Vec<u32>,
}

struct Inner {
    p: u64,
    m: u32,
    modulus: Vec<u64>,
    size: u64,
    tables: OnceLock<Option<Tables>>,
    generator: OnceLock<u64>,
    order_factors: OnceLock<Vec<(u64, u32)>>,
}

/// A validated finite field GF(p^m).
#[derive(Clone)]
pub struct FieldDesc(Arc<Inner>);

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}
impl Eq for FieldDesc {}

impl std::hash::Hash for FieldDesc {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.m.hash(state);
        self.0.modulus.hash(state);
    }
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; {:?})", self.0.p, self.0.m, self.0.modulus)
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.0.p, self.0.m)
    }
}

fn default_cache() -> &'static Mutex<HashMap<(u64, u32), FieldDesc>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), FieldDesc>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds GF(p^m). Without an explicit modulus the lowest monic irreducible
/// (lexicographic on the low-to-high coefficient list) is used, and the
/// resulting descriptor is shared process-wide.
pub fn make_field(p: u64, m: u32, modulus: Option<Vec<u64>>) -> Result<FieldDesc> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::InvalidModulus(
            "extension degree must be at least 1".into(),
        ));
    }
    let size = p
        .checked_pow(m)
        .filter(|s| *s < (1u64 << 62))
        .ok_or(Error::FieldTooLarge { p, m })?;
    match modulus {
        None => {
            let mut cache = default_cache().lock().expect("field cache poisoned");
            if let Some(f) = cache.get(&(p, m)) {
                return Ok(f.clone());
            }
            let f = FieldDesc::from_parts(p, m, poly::lowest_irreducible(p, m), size);
            cache.insert((p, m), f.clone());
            Ok(f)
        }
        Some(modulus) => {
            if modulus.len() != m as usize + 1 {
                return Err(Error::InvalidModulus(format!(
                    "expected {} coefficients, got {}",
                    m + 1,
                    modulus.len()
                )));
            }
            if modulus.iter().any(|&c| c >= p) {
                return Err(Error::InvalidModulus("coefficient out of range".into()));
            }
            if modulus[m as usize] != 1 {
                return Err(Error::InvalidModulus("modulus is not monic".into()));
            }
            if !poly::is_irreducible(&modulus, p) {
                return Err(Error::InvalidModulus("modulus is reducible".into()));
            }
            let default = make_field(p, m, None)?;
            if default.modulus() == modulus.as_slice() {
                return Ok(default);
            }
            Ok(FieldDesc::from_parts(p, m, modulus, size))
        }
    }
}

/// GF(q^k) with the default modulus, for a prime power `q`.
pub fn field_of_order(q: u64, k: u32) -> Result<FieldDesc> {
    let (p, r) = crate::numtheory::prime_power(q).ok_or(Error::NotPrimePower(q))?;
    make_field(p, r * k, None)
}

impl FieldDesc {
    fn from_parts(p: u64, m: u32, modulus: Vec<u64>, size: u64) -> Self {
        FieldDesc(Arc::new(Inner {
            p,
            m,
            modulus,
            size,
            tables: OnceLock::new(),
            generator: OnceLock::new(),
            order_factors: OnceLock::new(),
        }))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn m(&self) -> u32 {
        self.0.m
    }
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }
    /// Number of elements, p^m.
    pub fn size(&self) -> u64 {
        self.0.size
    }
    /// Order of the multiplicative group.
    pub fn mult_order(&self) -> u64 {
        self.0.size - 1
    }

    pub fn zero(&self) -> u64 {
        0
    }
    pub fn one(&self) -> u64 {
        1
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, c: i64) -> u64 {
        c.rem_euclid(self.0.p as i64) as u64
    }

    pub fn digits(&self, a: u64) -> Vec<u64> {
        let p = self.0.p;
        let mut rest = a;
        (0..self.0.m)
            .map(|_| {
                let d = rest % p;
                rest /= p;
                d
            })
            .collect()
    }

    /// Encodes a coefficient list (low-to-high); coefficients are reduced mod p,
    /// and lists longer than `m` are reduced modulo the field modulus.
    pub fn from_digits(&self, coeffs: &[u64]) -> u64 {
        let p = self.0.p;
        let reduced: Vec<u64> = if coeffs.len() > self.0.m as usize {
            poly::rem(
                &coeffs.iter().map(|c| c % p).collect::<Vec<_>>(),
                &self.0.modulus,
                p,
            )
        } else {
            coeffs.iter().map(|c| c % p).collect()
        };
        reduced.iter().rev().fold(0u64, |acc, &c| acc * p + c)
    }

    fn tables(&self) -> Option<&Tables> {
        self.0
            .tables
            .get_or_init(|| (self.0.size <= TABLE_LIMIT).then(|| self.build_tables()))
            .as_ref()
    }

    fn build_tables(&self) -> Tables {
        let n = self.mult_order() as usize;
        let g = self.generator();
        let x_is_gen = self.0.m > 1 && g == self.0.p;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![NONE; self.0.size as usize];
        let mut cur = 1u64;
        for k in 0..n {
            exp[k] = cur as u32;
            log[cur as usize] = k as u32;
            cur = if x_is_gen {
                self.mul_by_x(cur)
            } else {
                self.mul_slow(cur, g)
            };
        }
        for k in n..2 * n {
            exp[k] = exp[k - n];
        }
        let p = self.0.p;
        let zech = if p == 2 {
            Vec::new()
        } else {
            (0..n)
                .map(|k| {
                    let e = exp[k] as u64;
                    let d0 = e % p;
                    let s = e - d0 + (d0 + 1) % p;
                    if s == 0 {
                        NONE
                    } else {
                        log[s as usize]
                    }
                })
                .collect()
        };
        Tables { exp, log, zech }
    }

    fn mul_by_x(&self, a: u64) -> u64 {
        let p = self.0.p;
        let m = self.0.m as usize;
        let mut d = self.digits(a);
        let top = d[m - 1];
        for k in (1..m).rev() {
            d[k] = d[k - 1];
        }
        d[0] = 0;
        if top != 0 {
            for (k, slot) in d.iter_mut().enumerate() {
                *slot = (*slot + p - top * self.0.modulus[k] % p) % p;
            }
        }
        self.from_digits(&d)
    }

    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.0.m == 1 {
            return a * b % self.0.p;
        }
        let prod = poly::mul(&self.digits(a), &self.digits(b), self.0.p);
        self.from_digits(&poly::rem(&prod, &self.0.modulus, self.0.p))
    }

    fn add_slow(&self, a: u64, b: u64) -> u64 {
        let p = self.0.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut scale = 1u64;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale = scale.wrapping_mul(p);
        }
        out
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.0.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        if self.0.m == 1 {
            return (a + b) % self.0.p;
        }
        if let Some(t) = self.tables() {
            let n = self.mult_order() as u32;
            let la = t.log[a as usize];
            let lb = t.log[b as usize];
            let diff = if lb >= la { lb - la } else { lb + n - la };
            let z = t.zech[diff as usize];
            if z == NONE {
                0
            } else {
                t.exp[(la + z) as usize] as u64
            }
        } else {
            self.add_slow(a, b)
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        let p = self.0.p;
        if p == 2 || a == 0 {
            return a;
        }
        if self.0.m == 1 {
            return p - a;
        }
        let mut rest = a;
        let mut out = 0u64;
        let mut scale = 1u64;
        while rest > 0 {
            out += ((p - rest % p) % p) * scale;
            rest /= p;
            scale *= p;
        }
        out
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.0.m == 1 {
            return a * b % self.0.p;
        }
        match self.tables() {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize] as u64,
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.mult_order();
        if let Some(t) = self.tables() {
            let l = (t.log[a as usize] as u128 * (e % n) as u128 % n as u128) as usize;
            return t.exp[l] as u64;
        }
        let mut e = e % n;
        let mut base = a;
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Power with a signed exponent; `None` for a negative power of zero.
    pub fn pow_signed(&self, a: u64, e: i64) -> Option<u64> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Some(self.pow(inv, e.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        if let Some(t) = self.tables() {
            let n = self.mult_order() as u32;
            let l = t.log[a as usize];
            return Some(t.exp[((n - l) % n) as usize] as u64);
        }
        Some(self.pow(a, self.mult_order() - 1))
    }

    pub fn div(&self, a: u64, b: u64) -> Option<u64> {
        Some(self.mul(a, self.inv(b)?))
    }

    /// `a^(p^e)`.
    pub fn frob(&self, a: u64, e: u32) -> u64 {
        let e = e % self.0.m;
        self.pow(a, self.0.p.pow(e))
    }

    /// Iterates all elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.0.size
    }

    fn order_factors(&self) -> &[(u64, u32)] {
        self.0
            .order_factors
            .get_or_init(|| factorize(self.mult_order()))
    }

    /// The first primitive element in encoding order.
    pub fn generator(&self) -> u64 {
        *self.0.generator.get_or_init(|| {
            let n = self.mult_order();
            if n == 1 {
                return 1;
            }
            let factors = self.order_factors().to_vec();
            let pow_slow = |a: u64, mut e: u64| {
                let mut base = a;
                let mut r = 1u64;
                while e > 0 {
                    if e & 1 == 1 {
                        r = self.mul_slow(r, base);
                    }
                    base = self.mul_slow(base, base);
                    e >>= 1;
                }
                r
            };
            (2..self.0.size)
                .find(|&g| factors.iter().all(|&(r, _)| pow_slow(g, n / r) != 1))
                .expect("multiplicative group is cyclic")
        })
    }

    /// Discrete logarithm to base [`FieldDesc::generator`].
    pub fn dlog(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        if let Some(t) = self.tables() {
            return Some(t.log[a as usize] as u64);
        }
        Some(self.pohlig_hellman(a))
    }

    fn pohlig_hellman(&self, a: u64) -> u64 {
        let n = self.mult_order();
        let g = self.generator();
        let mut x_total: i128 = 0;
        let mut modulus: i128 = 1;
        for &(r, e) in self.order_factors() {
            let re = r.pow(e);
            let g_r = self.pow(g, n / re);
            let h_r = self.pow(a, n / re);
            // generator of the order-r subgroup
            let gamma = self.pow(g_r, re / r);
            let mut x_k: u64 = 0;
            let mut r_pow = 1u64;
            for k in 0..e {
                let inv_part = self.inv(self.pow(g_r, x_k)).expect("nonzero");
                let h_k = self.pow(self.mul(inv_part, h_r), re / r / r_pow);
                let d = self.bsgs(gamma, h_k, r);
                x_k += d * r_pow;
                if k + 1 < e {
                    r_pow *= r;
                }
            }
            // CRT merge
            let (x0, _) = solve_congruence(modulus, x_k as i128 - x_total, re as i128)
                .expect("coprime moduli");
            x_total += modulus * x0;
            modulus *= re as i128;
            x_total = x_total.rem_euclid(modulus);
        }
        x_total as u64
    }

    fn bsgs(&self, gamma: u64, h: u64, order: u64) -> u64 {
        let s = (order as f64).sqrt().ceil() as u64 + 1;
        let mut baby = HashMap::with_capacity(s as usize);
        let mut cur = 1u64;
        for j in 0..s {
            baby.entry(cur).or_insert(j);
            cur = self.mul(cur, gamma);
        }
        let giant = self.inv(self.pow(gamma, s)).expect("nonzero");
        let mut y = h;
        for i in 0..=s {
            if let Some(&j) = baby.get(&y) {
                return (i * s + j) % order;
            }
            y = self.mul(y, giant);
        }
        unreachable!("element lies in the subgroup")
    }

    /// Smallest-exponent solution (in generator powers) of `x^e = a`.
    pub fn solve_power(&self, a: u64, e: u64) -> Option<u64> {
        if a == 0 {
            return Some(0);
        }
        let n = self.mult_order() as i128;
        let alpha = self.dlog(a)? as i128;
        let (x0, _) = solve_congruence(e as i128, alpha, n)?;
        Some(self.pow(self.generator(), x0 as u64))
    }

    /// Whether `a` lies in the subfield with `sub_size` elements.
    pub fn in_subfield(&self, a: u64, sub_size: u64) -> bool {
        self.pow(a, sub_size) == a
    }

    pub fn elem(&self, repr: u64) -> Elem {
        debug_assert!(repr < self.0.size);
        Elem {
            field: self.clone(),
            repr,
        }
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            p: self.0.p,
            m: self.0.m,
            modulus: self.0.modulus.clone(),
        }
    }

    pub fn ensure_same(&self, other: &FieldDesc) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

/// An element of a finite field, carrying its field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Elem {
    field: FieldDesc,
    repr: u64,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@GF({})", self.coeffs(), self.field)
    }
}

impl Elem {
    /// Builds an element from a low-to-high coefficient list.
    pub fn new(field: &FieldDesc, coeffs: &[u64]) -> Result<Elem> {
        if coeffs.len() > field.m() as usize || coeffs.iter().any(|&c| c >= field.p()) {
            return Err(Error::Invalid(format!(
                "coefficients {coeffs:?} do not describe an element of GF({field})"
            )));
        }
        Ok(field.elem(field.from_digits(coeffs)))
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }
    pub fn repr(&self) -> u64 {
        self.repr
    }
    pub fn coeffs(&self) -> Vec<u64> {
        self.field.digits(self.repr)
    }
    pub fn is_zero(&self) -> bool {
        self.repr == 0
    }

    fn with(&self, repr: u64) -> Elem {
        Elem {
            field: self.field.clone(),
            repr,
        }
    }

    pub fn add(&self, other: &Elem) -> Result<Elem> {
        self.field.ensure_same(&other.field)?;
        Ok(self.with(self.field.add(self.repr, other.repr)))
    }
    pub fn sub(&self, other: &Elem) -> Result<Elem> {
        self.field.ensure_same(&other.field)?;
        Ok(self.with(self.field.sub(self.repr, other.repr)))
    }
    pub fn mul(&self, other: &Elem) -> Result<Elem> {
        self.field.ensure_same(&other.field)?;
        Ok(self.with(self.field.mul(self.repr, other.repr)))
    }
    pub fn div(&self, other: &Elem) -> Result<Elem> {
        self.field.ensure_same(&other.field)?;
        let r = self
            .field
            .div(self.repr, other.repr)
            .ok_or(Error::DivisionByZero)?;
        Ok(self.with(r))
    }
    pub fn neg(&self) -> Elem {
        self.with(self.field.neg(self.repr))
    }
    pub fn inv(&self) -> Result<Elem> {
        Ok(self.with(self.field.inv(self.repr).ok_or(Error::DivisionByZero)?))
    }
    pub fn pow(&self, e: i64) -> Result<Elem> {
        Ok(self.with(
            self.field
                .pow_signed(self.repr, e)
                .ok_or(Error::DivisionByZero)?,
        ))
    }
    /// `x^(p^e)`.
    pub fn frobenius(&self, e: u32) -> Elem {
        self.with(self.field.frob(self.repr, e))
    }

    pub fn to_json(&self) -> ElemJson {
        ElemJson {
            p: self.field.p(),
            m: self.field.m(),
            modulus: self.field.modulus().to_vec(),
            coeffs: self.coeffs(),
        }
    }

    pub fn from_json(j: &ElemJson) -> Result<Elem> {
        let field = make_field(j.p, j.m, Some(j.modulus.clone()))?;
        Elem::new(&field, &j.coeffs)
    }
}

/// All elements of `field`, in encoding order.
pub fn enumerate(field: &FieldDesc) -> impl Iterator<Item = Elem> + '_ {
    field.elements().map(move |r| field.elem(r))
}

/// Solves the norm equation `x^(q+1) = a` in GF(q^2) for `a` in GF(q)^×.
///
/// Fields of at most 2^16 elements are scanned in enumeration order; larger
/// fields use a discrete logarithm. Both are deterministic.
pub fn solve_norm(field2: &FieldDesc, a: &Elem) -> Result<Elem> {
    field2.ensure_same(a.field())?;
    if !field2.m().is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "GF({field2}) is not a quadratic extension"
        )));
    }
    let q = field2.p().pow(field2.m() / 2);
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if !field2.in_subfield(a.repr(), q) {
        return Err(Error::NotInSubfield);
    }
    let x = if field2.size() <= 1 << 16 {
        field2
            .elements()
            .find(|&x| field2.pow(x, q + 1) == a.repr())
    } else {
        field2.solve_power(a.repr(), q + 1)
    };
    x.map(|x| field2.elem(x))
        .ok_or_else(|| Error::SearchExhausted("norm map is surjective; unreachable".into()))
}

/// A ring embedding of `src` into `dst`, fixed by the image of `x`.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: FieldDesc,
    dst: FieldDesc,
    image_of_generator: u64,
    powers: Vec<u64>,
}

impl Embedding {
    pub fn src(&self) -> &FieldDesc {
        &self.src
    }
    pub fn dst(&self) -> &FieldDesc {
        &self.dst
    }
    pub fn image_of_generator(&self) -> Elem {
        self.dst.elem(self.image_of_generator)
    }

    pub fn apply(&self, a: u64) -> u64 {
        let p = self.src.p();
        let mut rest = a;
        let mut acc = 0u64;
        for &pw in &self.powers {
            let c = rest % p;
            rest /= p;
            if c != 0 {
                acc = self
                    .dst
                    .add(acc, self.dst.mul(self.dst.from_int(c as i64), pw));
            }
        }
        acc
    }

    pub fn embed(&self, x: &Elem) -> Result<Elem> {
        self.src.ensure_same(x.field())?;
        Ok(self.dst.elem(self.apply(x.repr())))
    }
}

/// Finds an embedding by locating a root of `src`'s modulus inside the copy of
/// GF(p^{src.m}) in `dst`, scanning powers of a generator of that subgroup.
pub fn make_embedding(src: &FieldDesc, dst: &FieldDesc) -> Result<Embedding> {
    let err = || Error::NoEmbedding {
        src: src.to_string(),
        dst: dst.to_string(),
    };
    if src.p() != dst.p() || !dst.m().is_multiple_of(src.m()) {
        return Err(err());
    }
    let eval = |theta: u64| {
        src.modulus().iter().rev().fold(0u64, |acc, &c| {
            dst.add(dst.mul(acc, theta), dst.from_int(c as i64))
        })
    };
    let root = if src == dst {
        // identity: the class of x itself
        Some(if src.m() > 1 { src.p() } else { 0 })
    } else if eval(0) == 0 {
        Some(0)
    } else {
        let h = dst.pow(dst.generator(), dst.mult_order() / src.mult_order());
        let mut cur = 1u64;
        let mut found = None;
        for _ in 0..src.mult_order() {
            if eval(cur) == 0 {
                found = Some(cur);
                break;
            }
            cur = dst.mul(cur, h);
        }
        found
    };
    let theta = root.ok_or_else(err)?;
    let powers = (0..src.m())
        .scan(1u64, |acc, _| {
            let cur = *acc;
            *acc = dst.mul(*acc, theta);
            Some(cur)
        })
        .collect();
    Ok(Embedding {
        src: src.clone(),
        dst: dst.clone(),
        image_of_generator: theta,
        powers,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u64,
    pub m: u32,
    pub modulus: Vec<u64>,
}

impl FieldJson {
    pub fn to_field(&self) -> Result<FieldDesc> {
        make_field(self.p, self.m, Some(self.modulus.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemJson {
    pub p: u64,
    pub m: u32,
    pub modulus: Vec<u64>,
    pub coeffs: Vec<u64>,
}
