//! The symmetric-power action on big form matrices, normal forms,
//! twisted congruence solving, stabilizers and curve counts.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::classify::{case_shape_check, FormShape};
use crate::error::{Error, Result};
use crate::gf::{field_of_order, FieldDesc};
use crate::matff::{hermitian_decompose, is_hermitian, twisted_gram, Mat, MatJson, SurfaceSpec};
use crate::numtheory::{prime_power, solve_2var_mod, solve_congruence};
pub use crate::tetra::CaseId;
use crate::tetra::{common_field, on_surface, CurveSpec, Signature};

/// Rows `rows` of `φ_d(g)`: row k holds the t-coefficients of `u^(d−k)·v^k`
/// where `(u, v) = g·(s, t)`.
fn sympow_rows(g: &Mat, d: usize, rows: &[usize]) -> Vec<Vec<u64>> {
    let f = g.field();
    let (a, b, c, e) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    if b == 0 && c == 0 {
        return rows
            .iter()
            .map(|&k| {
                let mut row = vec![0; d + 1];
                row[k] = f.mul(f.pow(a, (d - k) as u64), f.pow(e, k as u64));
                row
            })
            .collect();
    }
    let powers = |x: u64, y: u64| {
        let mut out: Vec<Vec<u64>> = vec![vec![1]];
        for n in 0..d {
            let prev = &out[n];
            let mut next = vec![0; n + 2];
            for (k, &p) in prev.iter().enumerate() {
                next[k] = f.add(next[k], f.mul(p, x));
                next[k + 1] = f.add(next[k + 1], f.mul(p, y));
            }
            out.push(next);
        }
        out
    };
    let up = powers(a, b);
    let vp = powers(c, e);
    rows.iter()
        .map(|&k| {
            let (x, y) = (&up[d - k], &vp[k]);
            let mut row = vec![0; d + 1];
            for (r, &xr) in x.iter().enumerate() {
                if xr == 0 {
                    continue;
                }
                for (s, &ys) in y.iter().enumerate() {
                    row[r + s] = f.add(row[r + s], f.mul(xr, ys));
                }
            }
            row
        })
        .collect()
}

/// `φ_d(g)` for a 2×2 matrix `g`.
pub fn sympow(g: &Mat, d: usize) -> Result<Mat> {
    if (g.rows(), g.cols()) != (2, 2) {
        return Err(Error::Shape("sympow needs a 2x2 matrix".into()));
    }
    let rows: Vec<usize> = (0..=d).collect();
    Mat::from_rows(g.field(), &sympow_rows(g, d, &rows))
}

/// A sparse `(d+1)×(d+1)` form matrix attached to one of the cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigForm {
    pub case: CaseId,
    pub q: u64,
    field: FieldDesc,
    cells: BTreeMap<(usize, usize), u64>,
}

impl BigForm {
    pub fn new(case: CaseId, q: u64, field: &FieldDesc) -> Result<BigForm> {
        case.check(q)?;
        Ok(BigForm {
            case,
            q,
            field: field.clone(),
            cells: BTreeMap::new(),
        })
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    /// `d + 1`.
    pub fn size(&self) -> usize {
        self.case.degree(self.q).expect("validated at construction") as usize + 1
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.cells.get(&(r, c)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        if v == 0 {
            self.cells.remove(&(r, c));
        } else {
            self.cells.insert((r, c), v);
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    pub fn to_dense(&self) -> Mat {
        let n = self.size();
        let mut m = Mat::zeros(&self.field, n, n);
        for ((r, c), v) in self.cells() {
            m.set(r, c, v);
        }
        m
    }

    pub fn from_dense(case: CaseId, q: u64, m: &Mat) -> Result<BigForm> {
        let mut out = BigForm::new(case, q, m.field())?;
        if (m.rows(), m.cols()) != (out.size(), out.size()) {
            return Err(Error::Shape(format!(
                "expected a {0}x{0} matrix",
                out.size()
            )));
        }
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set(r, c, m.get(r, c));
            }
        }
        Ok(out)
    }

    pub fn embed_into(&self, field: &FieldDesc) -> Result<BigForm> {
        if &self.field == field {
            return Ok(self.clone());
        }
        let emb = crate::gf::make_embedding(&self.field, field)?;
        Ok(BigForm {
            case: self.case,
            q: self.q,
            field: field.clone(),
            cells: self
                .cells
                .iter()
                .map(|(&k, &v)| (k, emb.apply(v)))
                .collect(),
        })
    }

    pub fn scale(&self, c: u64) -> BigForm {
        let mut out = self.clone();
        out.cells = self
            .cells
            .iter()
            .map(|(&k, &v)| (k, self.field.mul(v, c)))
            .filter(|&(_, v)| v != 0)
            .collect();
        out
    }

    /// The scalar `c` with `self = c·other`, if any.
    pub fn proportional_to(&self, other: &BigForm) -> Option<u64> {
        if self.field != other.field || self.cells.len() != other.cells.len() {
            return None;
        }
        let (&k, &v) = other.cells.iter().next()?;
        let c = self.field.div(self.get(k.0, k.1), v)?;
        if c == 0 {
            return None;
        }
        other
            .cells
            .iter()
            .all(|(&(r, s), &w)| self.get(r, s) == self.field.mul(c, w))
            .then_some(c)
    }

    pub fn is_in_qprime(&self) -> bool {
        project_star(self).is_ok_and(|m| case_shape_check(&m, FormShape::of(self.case), self.q))
    }
}

/// Places a case-shaped 4×4 matrix at the case indices.
pub fn embed_qprime(b4: &Mat, case: CaseId, q: u64) -> Result<BigForm> {
    case.check(q)?;
    if !case_shape_check(b4, FormShape::of(case), q) {
        return Err(Error::BadShape);
    }
    let idx = case.indices(q)?;
    let mut out = BigForm::new(case, q, b4.field())?;
    for (l, &r) in idx.iter().enumerate() {
        for (m, &c) in idx.iter().enumerate() {
            out.set(r, c, b4.get(l, m));
        }
    }
    Ok(out)
}

/// The 4×4 core of a form supported on the case indices.
pub fn project_star(m: &BigForm) -> Result<Mat> {
    let idx = m.case.indices(m.q)?;
    let pos = |k: usize| idx.iter().position(|&x| x == k);
    let mut out = Mat::zeros(&m.field, 4, 4);
    for ((r, c), v) in m.cells() {
        match (pos(r), pos(c)) {
            (Some(l), Some(n)) => out.set(l, n, v),
            _ => return Err(Error::OutsideSupport),
        }
    }
    Ok(out)
}

/// `ᵗφ(g)·M·φ(g)^(q)`, over the smallest field holding both arguments.
pub fn act(m: &BigForm, g: &Mat) -> Result<BigForm> {
    if (g.rows(), g.cols()) != (2, 2) {
        return Err(Error::Shape("group elements are 2x2".into()));
    }
    let field = common_field(m.field(), g.field())?;
    let m = m.embed_into(&field)?;
    let g = g.embed_into(&field)?;
    Ok(act_same_field(&m, &g))
}

fn act_same_field(m: &BigForm, g: &Mat) -> BigForm {
    let f = &m.field;
    let q = m.q;
    let n = m.size();
    if g.get(0, 1) == 0 && g.get(1, 0) == 0 {
        let (a, e) = (g.get(0, 0), g.get(1, 1));
        let d = (n - 1) as u64;
        let weight = |k: usize| f.mul(f.pow(a, d - k as u64), f.pow(e, k as u64));
        let mut out = m.clone();
        out.cells = m
            .cells
            .iter()
            .map(|(&(l, c), &v)| ((l, c), f.mul(f.mul(weight(l), v), f.pow(weight(c), q))))
            .filter(|&(_, v)| v != 0)
            .collect();
        return out;
    }
    let rows: Vec<usize> = m
        .cells
        .keys()
        .flat_map(|&(r, c)| [r, c])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let phi = sympow_rows(g, n - 1, &rows);
    let row_of = |k: usize| &phi[rows.binary_search(&k).expect("row computed")];
    let phi_q: Vec<Vec<u64>> = phi
        .iter()
        .map(|r| r.iter().map(|&x| f.pow(x, q)).collect())
        .collect();
    let row_q = |k: usize| &phi_q[rows.binary_search(&k).expect("row computed")];
    let mut dense = vec![0u64; n * n];
    for (&(l, c), &v) in &m.cells {
        let left = row_of(l);
        let right = row_q(c);
        for (a, &x) in left.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let xv = f.mul(x, v);
            for (b, &y) in right.iter().enumerate() {
                if y != 0 {
                    let slot = &mut dense[a * n + b];
                    *slot = f.add(*slot, f.mul(xv, y));
                }
            }
        }
    }
    let mut out = BigForm {
        case: m.case,
        q,
        field: f.clone(),
        cells: BTreeMap::new(),
    };
    for (k, &v) in dense.iter().enumerate() {
        if v != 0 {
            out.cells.insert((k / n, k % n), v);
        }
    }
    out
}

fn rep_matrix(field: &FieldDesc, case: CaseId) -> Mat {
    match case {
        CaseId::C1 => Mat::from_ints(
            field,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, 0, -1, 0]],
        ),
        CaseId::C2 | CaseId::C3 => Mat::from_ints(
            field,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[-1, 0, 0, 0]],
        ),
    }
}

/// The normal form of each case for `q ≥ 3`.
pub fn canonical_rep(case: CaseId, q: u64) -> Result<Mat> {
    case.check(q)?;
    if q == 2 {
        return Err(Error::InvalidCase(
            "q = 2 has infinitely many classes and no single representative".into(),
        ));
    }
    Ok(rep_matrix(&field_of_order(q, 2)?, case))
}

/// The Hermitian member of the case-I shape with `a21 = 1`, `a13 = −1`.
pub fn hermitian_rep_c1(q: u64) -> Result<Mat> {
    let f = field_of_order(q, 2)?;
    Ok(Mat::from_ints(
        &f,
        &[&[0, 0, 0, -1], &[0, 1, 0, 0], &[0, 0, 1, 0], &[-1, 0, 0, 0]],
    ))
}

/// The form matrix the constructed curve of each case realizes.
pub fn construction_target(case: CaseId, q: u64) -> Result<Mat> {
    case.check(q)?;
    match case {
        CaseId::C1 => hermitian_rep_c1(q),
        _ => Ok(rep_matrix(&field_of_order(q, 2)?, case)),
    }
}

/// t-exponent and its complement for a cell of the 4×4 core.
fn cell_exponents(sig: Signature, q: u64, l: usize, m: usize) -> (u64, u64) {
    let e = sig.exponents();
    let t = e[l] + q * e[m];
    ((q + 1) * sig.d - t, t)
}

/// Finds `g = diag(λ, μ)` carrying a C2/C3 form with `b2 = 0` to the
/// canonical representative, over the first GF(q^(2m)) with `m ≤ max_ext`
/// where the two power equations are solvable.
pub fn normalize_to_rep(b4: &Mat, case: CaseId, q: u64, max_ext: u32) -> Result<Mat> {
    if case == CaseId::C1 {
        return Err(Error::InvalidCase(
            "diagonal normalization applies to C2 and C3".into(),
        ));
    }
    let rep = canonical_rep(case, q)?;
    if !case_shape_check(b4, FormShape::of(case), q) {
        return Err(Error::BadShape);
    }
    let sig = case.signature(q)?;
    let big_rep = embed_qprime(&rep, case, q)?;
    let start = embed_qprime(b4, case, q)?;
    let cells = [(0usize, 1usize), (1, 3)];
    for m in 1..=max_ext {
        let k = field_of_order(q, 2 * m)?;
        let n = i128::from(k.mult_order() as i64);
        let src = b4.embed_into(&k)?;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &(l, c) in &cells {
            let (alpha, beta) = cell_exponents(sig, q, l, c);
            let lg = k.dlog(src.get(l, c)).ok_or(Error::DivisionByZero)?;
            rows.push([alpha as i128, beta as i128]);
            rhs.push(-(lg as i128));
        }
        if let Some((x, y)) = solve_2var_mod(&rows, &rhs, n) {
            let rho = k.generator();
            let g = Mat::diag(&k, &[k.pow(rho, x as u64), k.pow(rho, y as u64)]);
            let moved = act(&start, &g)?;
            if moved == big_rep.embed_into(&k)? {
                return Ok(g);
            }
        }
    }
    // elementary divisors of the exponent system
    let coeffs: Vec<i128> = cells
        .iter()
        .flat_map(|&(l, c)| {
            let (a, b) = cell_exponents(sig, q, l, c);
            [a as i128, b as i128]
        })
        .collect();
    let first = coeffs
        .iter()
        .fold(0, |g, &c| crate::numtheory::gcd_i128(g, c));
    let det = (coeffs[0] * coeffs[3] - coeffs[1] * coeffs[2]).abs();
    Err(Error::SearchExhausted(format!(
        "no diagonal normalization over GF({q}^(2m)) for m <= {max_ext}; needs roots of orders {first} and {}",
        det / first
    )))
}

/// Cycles of a monomial matrix as `(indices, entries)` with
/// `T[idx[u]][idx[u+1]] = entries[u]`.
fn monomial_cycles(t: &Mat) -> Option<Vec<(Vec<usize>, Vec<u64>)>> {
    let n = t.rows();
    let mut target = vec![usize::MAX; n];
    for (r, slot) in target.iter_mut().enumerate() {
        let nz: Vec<usize> = (0..n).filter(|&c| t.get(r, c) != 0).collect();
        if nz.len() != 1 {
            return None;
        }
        *slot = nz[0];
    }
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut idx = Vec::new();
        let mut r = start;
        while !seen[r] {
            seen[r] = true;
            idx.push(r);
            r = target[r];
        }
        if r != start {
            return None;
        }
        let entries = idx.iter().map(|&r| t.get(r, target[r])).collect();
        cycles.push((idx, entries));
    }
    Some(cycles)
}

/// Largest number of free circulant coefficients tried per field.
const CIRCULANT_BUDGET: u64 = 1 << 22;

/// A k×k block `G` over `field` with `ᵗG·G^(q) = ε-weighted cyclic shift`.
///
/// `G = G′·Δ` where `G′ = Σ a_t P^t` (`a_0 = 1`) has `ᵗG′·G′^(q) = κP`, and
/// the diagonal `Δ` fixes the weights through `κ·δ_r·δ_(r+1)^q = ε_r`,
/// a linear recurrence on discrete logarithms.
fn cycle_block(field: &FieldDesc, q: u64, eps: &[u64]) -> Option<Vec<Vec<u64>>> {
    let f = field;
    let k = eps.len();
    if k == 1 {
        return f.solve_power(eps[0], q + 1).map(|x| vec![vec![x]]);
    }
    let free = (k - 2) as u32;
    let total = f
        .size()
        .checked_pow(free)
        .filter(|&t| t <= CIRCULANT_BUDGET)?;
    let n = f.mult_order() as i128;
    // q^(-1) = q^(2m-1) mod N
    let ext = f.m() / prime_power(q)?.1;
    let qinv = (1..ext).fold(1i128, |acc, _| acc * q as i128 % n);
    let logs: Vec<i128> = eps
        .iter()
        .map(|&e| f.dlog(e).map(|x| x as i128))
        .collect::<Option<_>>()?;
    let roots_of_unity: Vec<u64> = f
        .elements()
        .skip(1)
        .filter(|&x| f.pow(x, q + 1) == 1)
        .collect();
    for idx in 0..total {
        let mut a = vec![1u64];
        let mut rest = idx;
        for _ in 0..free {
            a.push(rest % f.size());
            rest /= f.size();
        }
        let norm_sum = a.iter().fold(0, |acc, &x| f.add(acc, f.pow(x, q + 1)));
        let last_candidates: Vec<u64> = if norm_sum == 0 {
            vec![0]
        } else {
            match f.solve_power(f.neg(norm_sum), q + 1) {
                Some(r) => roots_of_unity.iter().map(|&z| f.mul(r, z)).collect(),
                None => continue,
            }
        };
        for last in last_candidates {
            let mut a = a.clone();
            a.push(last);
            let c = |t: usize| {
                (0..k).fold(0, |acc, r| {
                    f.add(acc, f.mul(a[r], f.pow(a[(r + t) % k], q)))
                })
            };
            let kappa = c(1);
            if kappa == 0 || (2..k).any(|t| c(t) != 0) {
                continue;
            }
            let lk = f.dlog(kappa)? as i128;
            // x_r = coef_r·x_0 + off_r
            let (mut coef, mut off) = (1i128, 0i128);
            for &lr in &logs {
                coef = (-qinv * coef).rem_euclid(n);
                off = (qinv * (lr - lk - off)).rem_euclid(n);
            }
            let Some((x0, _)) = solve_congruence(coef - 1, -off, n) else {
                continue;
            };
            let mut xs = vec![x0];
            for r in 0..k - 1 {
                let next = (qinv * (logs[r] - lk - xs[r])).rem_euclid(n);
                xs.push(next);
            }
            let rho = f.generator();
            let delta: Vec<u64> = xs.iter().map(|&x| f.pow(rho, x as u64)).collect();
            let block = (0..k)
                .map(|u| {
                    (0..k)
                        .map(|v| f.mul(a[(v + k - u) % k], delta[v]))
                        .collect()
                })
                .collect();
            return Some(block);
        }
    }
    None
}

/// `G` with `ᵗG·G^(q) = T` for a monomial `T`, over the first suitable field.
fn monomial_factor(t: &Mat, q: u64, max_ext: u32) -> Result<Mat> {
    let cycles = monomial_cycles(t).ok_or_else(|| {
        Error::UnsupportedTarget("target is neither Hermitian nor monomial".into())
    })?;
    for m in 1..=max_ext {
        let k = field_of_order(q, 2 * m)?;
        if common_field(&k, t.field())? != k {
            continue;
        }
        let tk = t.embed_into(&k)?;
        let mut g = Mat::zeros(&k, t.rows(), t.cols());
        let mut ok = true;
        for (idx, _) in &cycles {
            let eps: Vec<u64> = (0..idx.len())
                .map(|u| tk.get(idx[u], idx[(u + 1) % idx.len()]))
                .collect();
            match cycle_block(&k, q, &eps) {
                Some(block) => {
                    for (u, row) in block.iter().enumerate() {
                        for (v, &x) in row.iter().enumerate() {
                            g.set(idx[u], idx[v], x);
                        }
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(g);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no circulant factorization over GF({q}^(2m)) for m <= {max_ext}"
    )))
}

/// `F` with `ᵗF·A·F^(q) = target`, via `A = ᵗH·H^(q)`, `target = ᵗG·G^(q)`
/// and `F = H⁻¹·G`.
pub fn twisted_congruence_solve(a: &Mat, target: &Mat, q: u64, max_ext: u32) -> Result<Mat> {
    let h = hermitian_decompose(a, q)?;
    if target.det()? == 0 {
        return Err(Error::Singular);
    }
    let f2 = field_of_order(q, 2)?;
    let g = if target.field() == &f2 && is_hermitian(target, q)? {
        hermitian_decompose(target, q)?
    } else {
        monomial_factor(target, q, max_ext)?
    };
    let k = g.field().clone();
    let f = h.embed_into(&k)?.inverse()?.mul(&g)?;
    let check = twisted_gram(&f, &a.embed_into(&k)?, q)?;
    if check != target.embed_into(&k)? {
        return Err(Error::Invalid(
            "twisted congruence failed verification".into(),
        ));
    }
    Ok(f)
}

/// A curve on a given surface together with the data used to build it.
#[derive(Clone, Debug)]
pub struct BuiltCurve {
    pub case: CaseId,
    pub curve: CurveSpec,
    pub target: Mat,
    pub on_surface: bool,
}

impl BuiltCurve {
    /// The 4×(d+1) frame acting on the full degree-d monomial vector.
    pub fn big_frame(&self) -> Result<Mat> {
        let d = self.curve.sig.d as usize;
        let idx = self.case.indices(self.curve.q)?;
        let f = &self.curve.frame;
        let mut out = Mat::zeros(f.field(), 4, d + 1);
        for r in 0..4 {
            for (c, &big) in idx.iter().enumerate() {
                out.set(r, big, f.get(r, c));
            }
        }
        Ok(out)
    }
}

pub fn build_curve(case: CaseId, q: u64, surf: &SurfaceSpec, max_ext: u32) -> Result<BuiltCurve> {
    case.check(q)?;
    if surf.q != q {
        return Err(Error::Invalid(format!(
            "surface has q = {}, expected {q}",
            surf.q
        )));
    }
    if !surf.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    if !surf.is_smooth() {
        return Err(Error::Singular);
    }
    let target = construction_target(case, q)?;
    let frame = twisted_congruence_solve(&surf.gram, &target, q, max_ext)?;
    let curve = CurveSpec::new(q, case.signature(q)?, frame)?;
    let on = on_surface(&curve, surf)?;
    Ok(BuiltCurve {
        case,
        curve,
        target,
        on_surface: on,
    })
}

/// Guard on `|search_field|⁴` for [`equivalent`].
pub const EQUIVALENCE_LIMIT: u64 = 1_000_000_000;

/// Scans `GL₂(search_field)` for `g` with `act(M, g) = N`, or `= c·N` when
/// `allow_scalar` holds (then `g` is only needed up to scalars).
pub fn equivalent(
    m: &BigForm,
    n: &BigForm,
    search_field: &FieldDesc,
    allow_scalar: bool,
) -> Result<Option<Mat>> {
    if (m.case, m.q) != (n.case, n.q) {
        return Err(Error::InvalidCase("forms belong to different cases".into()));
    }
    let size = search_field.size();
    if size.checked_pow(4).is_none_or(|s| s > EQUIVALENCE_LIMIT) {
        return Err(Error::SearchTooLarge(format!(
            "|GF({search_field})|^4 exceeds {EQUIVALENCE_LIMIT}"
        )));
    }
    let l = common_field(&common_field(m.field(), n.field())?, search_field)?;
    let m = m.embed_into(&l)?;
    let n = n.embed_into(&l)?;
    let emb = crate::gf::make_embedding(search_field, &l)?;
    let decode = |idx: u64| -> Option<Mat> {
        let digit = |x: u64, k: u32| x / size.pow(k) % size;
        let entries = if !allow_scalar {
            [digit(idx, 0), digit(idx, 1), digit(idx, 2), digit(idx, 3)]
        } else if idx < size.pow(3) {
            [1, digit(idx, 0), digit(idx, 1), digit(idx, 2)]
        } else {
            let r = idx - size.pow(3);
            [0, 1, digit(r, 0), digit(r, 1)]
        };
        let g = Mat::from_rows(
            &l,
            &[
                vec![emb.apply(entries[0]), emb.apply(entries[1])],
                vec![emb.apply(entries[2]), emb.apply(entries[3])],
            ],
        )
        .expect("2x2");
        (g.det().expect("square") != 0).then_some(g)
    };
    let total = if allow_scalar {
        size.pow(3) + size.pow(2)
    } else {
        size.pow(4)
    };
    let hit = (0..total).into_par_iter().find_map_first(|idx| {
        let g = decode(idx)?;
        let moved = act_same_field(&m, &g);
        let ok = if allow_scalar {
            moved.proportional_to(&n).is_some()
        } else {
            moved == n
        };
        ok.then_some(g)
    });
    Ok(hit)
}

/// A case-I parameter matrix `[[a11, a12, a13], [a21, a22, a23]]`.
pub type CaseOneParams = [[u64; 3]; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Q2Rep {
    pub label: String,
    pub params: CaseOneParams,
}

/// The three fixed q = 2 representatives of case I.
pub fn q2_representatives() -> Vec<Q2Rep> {
    vec![
        Q2Rep {
            label: "R1".into(),
            params: [[1, 0, 0], [0, 0, 1]],
        },
        Q2Rep {
            label: "R2".into(),
            params: [[0, 1, 1], [1, 0, 0]],
        },
        Q2Rep {
            label: "R3".into(),
            params: [[1, 1, 0], [0, 0, 1]],
        },
    ]
}

/// The one-parameter family `[[λ, 1, 0], [1, 0, 1]]`, `λ` encoded in GF(4).
pub fn q2_lambda_rep(lambda: u64) -> Q2Rep {
    Q2Rep {
        label: format!("L{lambda}"),
        params: [[lambda, 1, 0], [1, 0, 1]],
    }
}

/// The case-I matrix with the given parameters, over `field`.
pub fn inflate_case_one(params: &CaseOneParams, field: &FieldDesc) -> Result<Mat> {
    let [[a11, a12, a13], [a21, a22, a23]] = *params;
    let f = field;
    let rows = vec![
        vec![0, a11, a12, a13],
        vec![0, a21, a22, a23],
        vec![f.neg(a11), f.neg(a12), f.neg(a13), 0],
        vec![f.neg(a21), f.neg(a22), f.neg(a23), 0],
    ];
    Mat::from_rows(f, &rows)
}

/// The case-II form with `b1 = b3 = 1` and the given `b2`, for q = 2.
pub fn q2_c2_form(b2: u64) -> Result<Mat> {
    let f = field_of_order(2, 2)?;
    Mat::from_rows(
        &f,
        &[
            vec![0, 1, 0, b2],
            vec![0, 0, 0, 1],
            vec![0, 0, 1, 0],
            vec![1, b2, 0, 0],
        ],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabMode {
    /// `g = diag(1, μ)` for every `μ` in GF(q⁶)^×.
    DiagonalExhaustive,
    /// Every projective `g` in `GL₂(search field)`.
    FullSmall,
}

fn serialize_elements<S: Serializer>(v: &[Mat], s: S) -> std::result::Result<S::Ok, S::Error> {
    let json: Vec<MatJson> = v.iter().map(Mat::to_json).collect();
    json.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerReport {
    pub case: CaseId,
    pub q: u64,
    pub mode: String,
    pub search_field: String,
    pub candidates: u64,
    pub order: usize,
    pub closed: bool,
    pub cyclic: bool,
    pub predicted_order: u64,
    pub matches: bool,
    #[serde(serialize_with = "serialize_elements")]
    pub elements: Vec<Mat>,
}

/// Largest field scanned in diagonal mode.
pub const DIAGONAL_LIMIT: u64 = 1 << 26;
/// Largest `|field|³` scanned in full mode.
pub const FULL_LIMIT: u64 = 100_000_000;

/// `φ(g)*` scaled so that its first nonzero entry is 1.
fn projective_star(g: &Mat, case: CaseId, q: u64) -> Result<Mat> {
    let d = case.degree(q)? as usize;
    let idx = case.indices(q)?;
    let rows = sympow_rows(g, d, &idx);
    let f = g.field();
    let mut star = Mat::zeros(f, 4, 4);
    for (r, row) in rows.iter().enumerate() {
        for (c, &big) in idx.iter().enumerate() {
            star.set(r, c, row[big]);
        }
    }
    Ok(star.normalize_projective())
}

/// Whether `act(M, g) = c·M` for some scalar `c`.
fn fixes_up_to_scalar(m: &BigForm, g: &Mat) -> bool {
    act_same_field(m, g).proportional_to(m).is_some()
}

fn rep_in(case: CaseId, q: u64, field: &FieldDesc) -> Result<BigForm> {
    let rep = rep_matrix(&field_of_order(q, 2)?, case);
    embed_qprime(&rep, case, q)?.embed_into(field)
}

pub fn stabilizer_search(
    case: CaseId,
    q: u64,
    mode: StabMode,
    search_field: Option<&FieldDesc>,
) -> Result<StabilizerReport> {
    if case == CaseId::C1 {
        return Err(Error::InvalidCase(
            "stabilizer search covers C2 and C3".into(),
        ));
    }
    case.check(q)?;
    let field = match (mode, search_field) {
        (_, Some(f)) => f.clone(),
        (StabMode::DiagonalExhaustive, None) => field_of_order(q, 6)?,
        (StabMode::FullSmall, None) => field_of_order(q, 2)?,
    };
    let field = common_field(&field, &field_of_order(q, 2)?)?;
    let m = rep_in(case, q, &field)?;
    let size = field.size();
    let (candidates, found): (u64, Vec<Mat>) = match mode {
        StabMode::DiagonalExhaustive => {
            if size > DIAGONAL_LIMIT {
                return Err(Error::SearchTooLarge(format!(
                    "GF({field}) in diagonal mode"
                )));
            }
            let found = (1..size)
                .into_par_iter()
                .filter_map(|mu| {
                    let g = Mat::diag(&field, &[1, mu]);
                    fixes_up_to_scalar(&m, &g).then_some(g)
                })
                .collect();
            (size - 1, found)
        }
        StabMode::FullSmall => {
            if size.checked_pow(3).is_none_or(|s| s > FULL_LIMIT) {
                return Err(Error::SearchTooLarge(format!(
                    "GL2(GF({field})) in full mode"
                )));
            }
            let total = size.pow(3) + size.pow(2);
            let found = (0..total)
                .into_par_iter()
                .filter_map(|idx| {
                    let (a, b, c, e) = if idx < size.pow(3) {
                        (1, idx % size, idx / size % size, idx / size / size)
                    } else {
                        let r = idx - size.pow(3);
                        (0, 1, r % size, r / size)
                    };
                    let g = Mat::from_rows(&field, &[vec![a, b], vec![c, e]]).expect("2x2");
                    (g.det().expect("square") != 0 && fixes_up_to_scalar(&m, &g)).then_some(g)
                })
                .collect();
            (total, found)
        }
    };
    let mut elements = BTreeMap::new();
    for g in &found {
        let star = projective_star(g, case, q)?;
        elements.entry(star.data().to_vec()).or_insert(star);
    }
    let elements: Vec<Mat> = elements.into_values().collect();
    let (closed, cyclic) = group_checks(&elements);
    let predicted = stab_order(case, q)?
        .ok_or_else(|| Error::InvalidCase("no finite prediction for q = 2".into()))?;
    let predicted =
        u64::try_from(predicted).map_err(|_| Error::Invalid("order overflow".into()))?;
    Ok(StabilizerReport {
        case,
        q,
        mode: match mode {
            StabMode::DiagonalExhaustive => "diagonal_exhaustive".into(),
            StabMode::FullSmall => "full_small".into(),
        },
        search_field: format!("GF({})", field.size()),
        candidates,
        order: elements.len(),
        closed,
        cyclic,
        predicted_order: predicted,
        matches: elements.len() as u64 == predicted,
        elements,
    })
}

/// Closure under multiplication and existence of a generator, modulo scalars.
fn group_checks(elements: &[Mat]) -> (bool, bool) {
    if elements.is_empty() {
        return (false, false);
    }
    let set: HashSet<Vec<u64>> = elements.iter().map(|m| m.data().to_vec()).collect();
    let closed = elements.par_iter().all(|a| {
        elements
            .iter()
            .all(|b| set.contains(a.mul(b).expect("4x4").normalize_projective().data()))
    });
    let n = elements.len();
    let id = Mat::identity(elements[0].field(), 4);
    let cyclic = elements.par_iter().any(|g| {
        let mut p = g.clone();
        for k in 1..=n {
            if p == id {
                return k == n;
            }
            p = p.mul(g).expect("4x4").normalize_projective();
        }
        false
    });
    (closed, cyclic)
}

/// Random non-diagonal `g` over `field` that solve the stabilizer equation.
pub fn sample_nondiagonal(
    case: CaseId,
    q: u64,
    field: &FieldDesc,
    samples: u64,
    seed: u64,
) -> Result<Vec<Mat>> {
    case.check(q)?;
    let m = rep_in(case, q, field)?;
    let size = field.size();
    let hits = (0..samples)
        .into_par_iter()
        .filter_map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ s);
            loop {
                let e: Vec<u64> = (0..4).map(|_| rng.gen_range(0..size)).collect();
                if e[1] == 0 && e[2] == 0 {
                    continue;
                }
                let g = Mat::from_rows(field, &[vec![e[0], e[1]], vec![e[2], e[3]]]).expect("2x2");
                if g.det().expect("square") == 0 {
                    continue;
                }
                return fixes_up_to_scalar(&m, &g).then_some(g);
            }
        })
        .collect();
    Ok(hits)
}

/// `|Aut(X_A)| = q⁶(q⁴−1)(q³+1)(q²−1)`.
pub fn aut_order(q: u64) -> Result<u128> {
    prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let q = q as u128;
    Ok(q.pow(6) * (q.pow(4) - 1) * (q.pow(3) + 1) * (q.pow(2) - 1))
}

/// Predicted stabilizer order of one curve; `None` when the orbit count is infinite.
pub fn stab_order(case: CaseId, q: u64) -> Result<Option<u128>> {
    case.check(q)?;
    if q == 2 {
        return Ok(None);
    }
    let q = q as u128;
    Ok(Some(match case {
        CaseId::C1 => q.pow(2) * (q.pow(4) - 1),
        CaseId::C2 => q.pow(3) + 1,
        CaseId::C3 if q % 4 == 1 => q.pow(3).div_ceil(2),
        CaseId::C3 => (q.pow(3) + 1) / 4,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Finite(u128),
    Infinite,
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => match u64::try_from(*n) {
                Ok(v) => s.serialize_u64(v),
                Err(_) => s.serialize_str(&n.to_string()),
            },
            Count::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("infinite"),
        }
    }
}

/// `|T_d|` from the closed formulas.
pub fn count_td(case: CaseId, q: u64) -> Result<Count> {
    case.check(q)?;
    if q == 2 {
        return Ok(Count::Infinite);
    }
    let q = q as u128;
    let base = q.pow(6) * (q.pow(4) - 1) * (q.pow(2) - 1);
    Ok(Count::Finite(match case {
        CaseId::C1 => q.pow(4) * (q.pow(3) + 1) * (q.pow(2) - 1),
        CaseId::C2 => base,
        CaseId::C3 if q % 4 == 1 => 2 * base,
        CaseId::C3 => 4 * base,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct CountEntry {
    pub case: CaseId,
    pub d: u64,
    pub count: Count,
    pub aut: Count,
    pub stab: Option<Count>,
    /// `|Aut| / |Stab| = |T_d|` with zero remainder.
    pub quotient_ok: Option<bool>,
    /// Stabilizer order from the diagonal scan, when it ran.
    pub search_stab: Option<u64>,
    pub search_count: Option<Count>,
    pub matches: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub q: u64,
    pub entries: Vec<CountEntry>,
}

impl CountReport {
    pub fn has_mismatch(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.matches == Some(false) || e.quotient_ok == Some(false))
    }
}

/// Counts for every valid case; with `search` set, C2/C3 stabilizer orders
/// are recomputed by the diagonal scan when GF(q⁶) has at most `search_limit`
/// elements.
pub fn count_report(q: u64, search: bool, search_limit: u64) -> Result<CountReport> {
    let aut = aut_order(q)?;
    let mut entries = Vec::new();
    for case in CaseId::valid_for(q) {
        let count = count_td(case, q)?;
        let stab = stab_order(case, q)?;
        let quotient_ok = match (stab, count) {
            (Some(s), Count::Finite(c)) => Some(aut % s == 0 && aut / s == c),
            _ => None,
        };
        let scan = search
            && case != CaseId::C1
            && q >= 3
            && q.checked_pow(6).is_some_and(|n| n <= search_limit);
        let (search_stab, search_count, matches) = if scan {
            let r = stabilizer_search(case, q, StabMode::DiagonalExhaustive, None)?;
            let order = r.order as u128;
            let sc = if aut % order == 0 {
                Count::Finite(aut / order)
            } else {
                Count::Infinite
            };
            (Some(r.order as u64), Some(sc), Some(sc == count))
        } else {
            (None, None, None)
        };
        entries.push(CountEntry {
            case,
            d: case.degree(q)?,
            count,
            aut: Count::Finite(aut),
            stab: stab.map(Count::Finite),
            quotient_ok,
            search_stab,
            search_count,
            matches,
        });
    }
    Ok(CountReport { q, entries })
}
