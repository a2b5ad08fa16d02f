//! Dense matrices over finite fields and the Hermitian decomposition
//! `A = ᵗB·B^(q)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{make_embedding, solve_norm, Elem, Embedding, FieldDesc, FieldJson};
use crate::numtheory::prime_power;

/// A dense row-major matrix whose entries are raw encodings in `field`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    field: FieldDesc,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "Mat {}x{} over GF({}) [",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(field: &FieldDesc, rows: usize, cols: usize) -> Mat {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &FieldDesc, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for k in 0..n {
            m.set(k, k, 1);
        }
        m
    }

    /// Builds a matrix from raw encodings given row by row.
    pub fn from_rows(field: &FieldDesc, rows: &[Vec<u64>]) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        if rows.iter().flatten().any(|&v| v >= field.size()) {
            return Err(Error::Invalid("entry outside the field".into()));
        }
        Ok(Mat {
            field: field.clone(),
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    /// Builds a matrix from small integers mapped into the prime subfield.
    pub fn from_ints(field: &FieldDesc, rows: &[&[i64]]) -> Mat {
        let data: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| row.iter().map(|&c| field.from_int(c)).collect())
            .collect();
        Mat::from_rows(field, &data).expect("integer rows are well formed")
    }

    pub fn diag(field: &FieldDesc, entries: &[u64]) -> Mat {
        let mut m = Mat::zeros(field, entries.len(), entries.len());
        for (k, &e) in entries.iter().enumerate() {
            m.set(k, k, e);
        }
        m
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }
    pub fn entry(&self, r: usize, c: usize) -> Elem {
        self.field.elem(self.get(r, c))
    }
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn map(&self, f: impl Fn(u64) -> u64) -> Mat {
        Mat {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Mat {
        let f = &self.field;
        self.map(|v| f.mul(v, c))
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.field.ensure_same(&other.field)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape(
                "addition of differently sized matrices".into(),
            ));
        }
        let f = &self.field;
        Ok(Mat {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.field.ensure_same(&other.field)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b != 0 {
                        let cur = out.get(r, c);
                        out.set(r, c, f.add(cur, f.mul(a, b)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// `A^(p^e)`: Frobenius applied entrywise.
    pub fn entrywise_frobenius(&self, e: u32) -> Mat {
        let f = &self.field;
        self.map(|v| f.frob(v, e))
    }

    /// `A^(q)`: every entry raised to the power `q`.
    pub fn conj(&self, q: u64) -> Mat {
        let f = &self.field;
        self.map(|v| f.pow(v, q))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<u64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let f = &self.field;
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a = self.clone();
        let mut prev = 1u64;
        let mut negate = false;
        for k in 0..n - 1 {
            if a.get(k, k) == 0 {
                match (k + 1..n).find(|&r| a.get(r, k) != 0) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        negate = !negate;
                    }
                    None => return Ok(0),
                }
            }
            let pivot = a.get(k, k);
            let prev_inv = f.inv(prev).expect("previous pivot is nonzero");
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = f.sub(f.mul(pivot, a.get(i, j)), f.mul(a.get(i, k), a.get(k, j)));
                    a.set(i, j, f.mul(v, prev_inv));
                }
                a.set(i, k, 0);
            }
            prev = pivot;
        }
        let d = a.get(n - 1, n - 1);
        Ok(if negate { f.neg(d) } else { d })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = &self.field;
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| a.get(r, col) != 0) else {
                continue;
            };
            a.swap_rows(row, p);
            let inv = f.inv(a.get(row, col)).expect("pivot is nonzero");
            for c in 0..a.cols {
                let v = a.get(row, c);
                a.set(row, c, f.mul(v, inv));
            }
            for r in 0..a.rows {
                if r == row {
                    continue;
                }
                let factor = a.get(r, col);
                if factor != 0 {
                    for c in 0..a.cols {
                        let v = f.sub(a.get(r, c), f.mul(factor, a.get(row, c)));
                        a.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Mat::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut out = Mat::zeros(&self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, red.get(r, n + c));
            }
        }
        Ok(out)
    }

    /// Reinterprets the matrix in a larger field.
    pub fn embed(&self, emb: &Embedding) -> Result<Mat> {
        self.field.ensure_same(emb.src())?;
        Ok(Mat {
            field: emb.dst().clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| emb.apply(v)).collect(),
        })
    }

    /// Embeds into `dst` (a no-op when the fields already agree).
    pub fn embed_into(&self, dst: &FieldDesc) -> Result<Mat> {
        if &self.field == dst {
            return Ok(self.clone());
        }
        self.embed(&make_embedding(&self.field, dst)?)
    }

    /// Whether every row is a nonzero multiple of `other`'s, with one common factor.
    pub fn proportional_to(&self, other: &Mat) -> Option<u64> {
        if self.field != other.field || (self.rows, self.cols) != (other.rows, other.cols) {
            return None;
        }
        let f = &self.field;
        let k = other.data.iter().position(|&v| v != 0)?;
        let lambda = f.div(self.data[k], other.data[k])?;
        if lambda == 0 {
            return None;
        }
        self.data
            .iter()
            .zip(&other.data)
            .all(|(&a, &b)| a == f.mul(lambda, b))
            .then_some(lambda)
    }

    /// Scales so that the first nonzero entry (row-major) is 1.
    pub fn normalize_projective(&self) -> Mat {
        match self.data.iter().find(|&&v| v != 0) {
            Some(&v) => self.scale(self.field.inv(v).expect("nonzero")),
            None => self.clone(),
        }
    }

    pub fn to_json(&self) -> MatJson {
        MatJson {
            field: self.field.to_json(),
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|&v| self.field.digits(v)).collect(),
        }
    }

    pub fn from_json(j: &MatJson) -> Result<Mat> {
        let field = j.field.to_field()?;
        if j.entries.len() != j.rows * j.cols {
            return Err(Error::Shape(format!(
                "{} entries for a {}x{} matrix",
                j.entries.len(),
                j.rows,
                j.cols
            )));
        }
        let data = j
            .entries
            .iter()
            .map(|c| Elem::new(&field, c).map(|e| e.repr()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat {
            field,
            rows: j.rows,
            cols: j.cols,
            data,
        })
    }
}

/// `ᵗF·A·F^(q)`.
pub fn twisted_gram(f: &Mat, a: &Mat, q: u64) -> Result<Mat> {
    f.transpose().mul(a)?.mul(&f.conj(q))
}

/// Serialized matrix: `entries` are coefficient lists, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatJson {
    pub field: FieldJson,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<u64>>,
}

/// Checks that `field` is GF(q^(2k)) for some k ≥ 1 and that `q` is a prime power.
fn check_q(field: &FieldDesc, q: u64) -> Result<()> {
    let (p, r) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if field.p() != p || !field.m().is_multiple_of(2 * r) {
        return Err(Error::FieldMismatch {
            left: field.to_string(),
            right: format!("an extension of GF({q}^2)"),
        });
    }
    Ok(())
}

/// True iff `ᵗA = A^(q)`.
pub fn is_hermitian(a: &Mat, q: u64) -> Result<bool> {
    check_q(a.field(), q)?;
    if !a.is_square() {
        return Err(Error::Shape("Hermitian test needs a square matrix".into()));
    }
    Ok(a.transpose() == a.conj(q))
}

/// `h(x, y) = ᵗx·A·y^(q)`.
fn sesq(a: &Mat, x: &[u64], y: &[u64], q: u64) -> u64 {
    let f = a.field();
    let mut acc = 0;
    for (r, &xr) in x.iter().enumerate() {
        if xr == 0 {
            continue;
        }
        for (c, &yc) in y.iter().enumerate() {
            if yc == 0 {
                continue;
            }
            let t = f.mul(f.mul(xr, a.get(r, c)), f.pow(yc, q));
            acc = f.add(acc, t);
        }
    }
    acc
}

/// Factors an invertible Hermitian `A` over GF(q²) as `A = ᵗB·B^(q)`.
///
/// Sesquilinear Gram–Schmidt: pick an anisotropic vector (basis vectors first,
/// then `w_i + λ·w_j` in enumeration order), split it off, and repeat on its
/// orthogonal complement. This yields `ᵗP·A·P^(q) = D` with `D` diagonal over
/// GF(q)^×; norm roots of `D` give `Λ`, and `B = Λ·P⁻¹`.
pub fn hermitian_decompose(a: &Mat, q: u64) -> Result<Mat> {
    let f = a.field().clone();
    if f.size() != q * q {
        return Err(Error::FieldMismatch {
            left: f.to_string(),
            right: format!("GF({q}^2)"),
        });
    }
    if !is_hermitian(a, q)? {
        return Err(Error::NotHermitian);
    }
    if a.det()? == 0 {
        return Err(Error::Singular);
    }
    let n = a.rows();
    let mut remaining: Vec<Vec<u64>> = (0..n)
        .map(|k| (0..n).map(|c| u64::from(c == k)).collect())
        .collect();
    let mut chosen: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (idx, x, hxx) = find_anisotropic(a, &remaining, q).ok_or(Error::Singular)?;
        remaining.remove(idx);
        let hxx_inv = f.inv(hxx).expect("anisotropic");
        for y in remaining.iter_mut() {
            let c = f.mul(sesq(a, y, &x, q), hxx_inv);
            if c != 0 {
                for (yk, &xk) in y.iter_mut().zip(&x) {
                    *yk = f.sub(*yk, f.mul(c, xk));
                }
            }
        }
        chosen.push(x);
        diag.push(hxx);
    }
    // columns of P are the chosen vectors
    let mut p = Mat::zeros(&f, n, n);
    for (c, v) in chosen.iter().enumerate() {
        for (r, &e) in v.iter().enumerate() {
            p.set(r, c, e);
        }
    }
    let lambda: Vec<u64> = diag
        .iter()
        .map(|&d| solve_norm(&f, &f.elem(d)).map(|e| e.repr()))
        .collect::<Result<_>>()?;
    let b = Mat::diag(&f, &lambda).mul(&p.inverse()?)?;
    debug_assert_eq!(twisted_gram(&b, &Mat::identity(&f, n), q)?, *a);
    Ok(b)
}

/// Returns (index replaced, vector, h(x,x)).
fn find_anisotropic(a: &Mat, basis: &[Vec<u64>], q: u64) -> Option<(usize, Vec<u64>, u64)> {
    let f = a.field();
    for (k, w) in basis.iter().enumerate() {
        let h = sesq(a, w, w, q);
        if h != 0 {
            return Some((k, w.clone(), h));
        }
    }
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if i == j {
                continue;
            }
            for lam in f.elements().skip(1) {
                let v: Vec<u64> = basis[i]
                    .iter()
                    .zip(&basis[j])
                    .map(|(&x, &y)| f.add(x, f.mul(lam, y)))
                    .collect();
                let h = sesq(a, &v, &v, q);
                if h != 0 {
                    return Some((i, v, h));
                }
            }
        }
    }
    None
}

/// A seeded uniformly random invertible matrix (rejection sampling).
pub fn random_invertible(field: &FieldDesc, n: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_invertible_with(field, n, &mut rng)
}

pub fn random_invertible_with(field: &FieldDesc, n: usize, rng: &mut impl Rng) -> Mat {
    loop {
        let mut m = Mat::zeros(field, n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, rng.gen_range(0..field.size()));
            }
        }
        if m.det().expect("square") != 0 {
            return m;
        }
    }
}

/// A seeded invertible Hermitian matrix `ᵗC·C^(q)` over GF(q²).
pub fn random_hermitian_invertible(q: u64, n: usize, seed: u64) -> Result<Mat> {
    let f = crate::gf::field_of_order(q, 2)?;
    let c = random_invertible(&f, n, seed);
    twisted_gram(&c, &Mat::identity(&f, n), q)
}

/// A Hermitian surface `ᵗx·A·x^(q) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceSpec {
    pub q: u64,
    pub gram: Mat,
}

impl SurfaceSpec {
    pub fn new(q: u64, gram: Mat) -> Result<SurfaceSpec> {
        check_q(gram.field(), q)?;
        if (gram.rows(), gram.cols()) != (4, 4) {
            return Err(Error::Shape("surface Gram matrix must be 4x4".into()));
        }
        Ok(SurfaceSpec { q, gram })
    }

    /// The Fermat surface, `A = I`, over GF(q²).
    pub fn fermat(q: u64) -> Result<SurfaceSpec> {
        let f = crate::gf::field_of_order(q, 2)?;
        SurfaceSpec::new(q, Mat::identity(&f, 4))
    }

    pub fn is_smooth(&self) -> bool {
        self.gram.det().map(|d| d != 0).unwrap_or(false)
    }

    pub fn is_hermitian(&self) -> bool {
        is_hermitian(&self.gram, self.q).unwrap_or(false)
    }

    pub fn to_json(&self) -> SurfaceJson {
        SurfaceJson {
            q: self.q,
            gram: self.gram.to_json(),
        }
    }

    pub fn from_json(j: &SurfaceJson) -> Result<SurfaceSpec> {
        SurfaceSpec::new(j.q, Mat::from_json(&j.gram)?)
    }

    /// Evaluates `ᵗx·A·x^(q)` at a point over the Gram matrix's field.
    pub fn evaluate(&self, x: &[u64]) -> u64 {
        sesq(&self.gram, x, x, self.q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub q: u64,
    pub gram: MatJson,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    fn gf9() -> FieldDesc {
        make_field(3, 2, None).unwrap()
    }

    fn m1_star(f: &FieldDesc) -> Mat {
        Mat::from_ints(
            f,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, 0, -1, 0]],
        )
    }

    fn cofactor_det(m: &Mat) -> u64 {
        let f = m.field();
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0);
        }
        let mut acc = 0;
        for c in 0..n {
            let minor_rows: Vec<Vec<u64>> = (1..n)
                .map(|r| (0..n).filter(|&k| k != c).map(|k| m.get(r, k)).collect())
                .collect();
            let minor = Mat::from_rows(f, &minor_rows).unwrap();
            let term = f.mul(m.get(0, c), cofactor_det(&minor));
            acc = if c % 2 == 0 {
                f.add(acc, term)
            } else {
                f.sub(acc, term)
            };
        }
        acc
    }

    #[test]
    fn basic_ops() {
        let f = gf9();
        let m1 = m1_star(&f);
        assert_eq!(m1.rank(), 4);
        assert_eq!(Mat::identity(&f, 4).det().unwrap(), 1);
        let a = random_invertible(&f, 4, 1);
        let b = random_invertible(&f, 4, 2);
        assert_eq!(
            a.mul(&b).unwrap().transpose(),
            b.transpose().mul(&a.transpose()).unwrap()
        );
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Mat::identity(&f, 4));
        let sing = Mat::from_ints(&f, &[&[1, 2], &[2, 4]]);
        assert_eq!(sing.inverse(), Err(Error::Singular));
        assert!(matches!(a.mul(&sing), Err(Error::Shape(_))));
    }

    #[test]
    fn det_rank_inverse_agree_with_cofactor_oracle() {
        let f = gf9();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut m = Mat::zeros(&f, 4, 4);
            for r in 0..4 {
                for c in 0..4 {
                    // sparse-ish so singular cases appear
                    if rng.gen_bool(0.6) {
                        m.set(r, c, rng.gen_range(0..9));
                    }
                }
            }
            let d = cofactor_det(&m);
            assert_eq!(m.det().unwrap(), d);
            assert_eq!(m.rank() == 4, d != 0);
            assert_eq!(m.inverse().is_ok(), d != 0);
        }
    }

    #[test]
    fn hermitian_examples() {
        let f = gf9();
        assert!(is_hermitian(&Mat::identity(&f, 4), 3).unwrap());
        let m2 = Mat::from_ints(
            &f,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[-1, 0, 0, 0]],
        );
        assert!(!is_hermitian(&m2, 3).unwrap());
        let u = 3; // the class of x in GF(9), not in GF(3)
        assert_ne!(f.pow(u, 3), u);
        assert!(!is_hermitian(&Mat::diag(&f, &[u, u, u, u]), 3).unwrap());
        assert!(is_hermitian(&Mat::identity(&f, 4), 2).is_err());
    }

    #[test]
    fn decompose_examples() {
        let f = gf9();
        let id = Mat::identity(&f, 4);
        let b = hermitian_decompose(&id, 3).unwrap();
        assert_eq!(twisted_gram(&b, &id, 3).unwrap(), id);
        let a = Mat::diag(&f, &[2, 1, 1, 1]);
        let b = hermitian_decompose(&a, 3).unwrap();
        assert_eq!(twisted_gram(&b, &id, 3).unwrap(), a);
        assert_eq!(f.pow(b.get(0, 0), 4), 2);
        let m2 = m1_star(&f);
        assert_eq!(hermitian_decompose(&m2, 3), Err(Error::NotHermitian));
        let sing = Mat::diag(&f, &[1, 1, 1, 0]);
        assert_eq!(hermitian_decompose(&sing, 3), Err(Error::Singular));
    }

    #[test]
    fn decompose_isotropic_basis() {
        // antidiagonal form: every basis vector is isotropic
        let f = gf9();
        let j = Mat::from_ints(
            &f,
            &[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]],
        );
        let b = hermitian_decompose(&j, 3).unwrap();
        assert_eq!(twisted_gram(&b, &Mat::identity(&f, 4), 3).unwrap(), j);
        let f4 = make_field(2, 2, None).unwrap();
        let j4 = Mat::from_ints(&f4, &[&[0, 1], &[1, 0]]);
        let b = hermitian_decompose(&j4, 2).unwrap();
        assert_eq!(twisted_gram(&b, &Mat::identity(&f4, 2), 2).unwrap(), j4);
    }

    #[test]
    fn random_generators() {
        let f = gf9();
        assert_eq!(random_invertible(&f, 4, 42), random_invertible(&f, 4, 42));
        for seed in 0..20 {
            assert_ne!(random_invertible(&f, 4, seed).det().unwrap(), 0);
            let h = random_hermitian_invertible(3, 4, seed).unwrap();
            assert!(is_hermitian(&h, 3).unwrap());
            assert_ne!(h.det().unwrap(), 0);
        }
    }

    #[test]
    fn hermitian_values_lie_in_gf_q() {
        // q = 2: exhaustive over GF(4)^4
        let h = random_hermitian_invertible(2, 4, 3).unwrap();
        let f = h.field().clone();
        for idx in 0..256u64 {
            let x: Vec<u64> = (0..4).map(|k| (idx >> (2 * k)) & 3).collect();
            let v = sesq(&h, &x, &x, 2);
            assert!(f.in_subfield(v, 2));
        }
        // q = 3: sampled
        let h = random_hermitian_invertible(3, 4, 5).unwrap();
        let f = h.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let x: Vec<u64> = (0..4).map(|_| rng.gen_range(0..9)).collect();
            assert!(f.in_subfield(sesq(&h, &x, &x, 3), 3));
        }
    }

    #[test]
    fn json_roundtrip() {
        let f = gf9();
        let m = random_invertible(&f, 3, 9);
        let s = serde_json::to_string(&m.to_json()).unwrap();
        let back = Mat::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(s.starts_with("{\"field\":{\"p\":3,\"m\":2,\"modulus\":[1,0,1]}"));
    }

    #[test]
    fn surface_smoothness() {
        let s = SurfaceSpec::fermat(3).unwrap();
        assert!(s.is_smooth() && s.is_hermitian());
        let f = gf9();
        let sing = SurfaceSpec::new(3, Mat::diag(&f, &[1, 1, 1, 0])).unwrap();
        assert!(!sing.is_smooth());
        // (1, u, 0, 0) with u^4 = -1 lies on the Fermat surface
        let u = f
            .elements()
            .find(|&u| f.pow(u, 4) == f.from_int(-1))
            .unwrap();
        assert_eq!(s.evaluate(&[1, u, 0, 0]), 0);
    }
}
