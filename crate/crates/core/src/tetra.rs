//! Tetranomial signatures and the forms `f_B(d,i,j) = ᵗv·B·v^(q)` with
//! `v = ᵗ(s^d, s^(d−i)t^i, s^(d−j)t^j, t^d)`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{make_embedding, make_field, FieldDesc};
use crate::matff::{twisted_gram, Mat, MatJson, SurfaceSpec};
use crate::numtheory::{gcd, prime_power};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[u64; 3]", try_from = "[u64; 3]")]
pub struct Signature {
    pub d: u64,
    pub i: u64,
    pub j: u64,
}

impl From<Signature> for [u64; 3] {
    fn from(s: Signature) -> [u64; 3] {
        [s.d, s.i, s.j]
    }
}

impl TryFrom<[u64; 3]> for Signature {
    type Error = Error;
    fn try_from(v: [u64; 3]) -> Result<Signature> {
        Signature::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.d, self.i, self.j)
    }
}

impl Signature {
    /// Any triple with `1 ≤ i < j ≤ d−1`, not necessarily canonical.
    pub fn new(d: u64, i: u64, j: u64) -> Result<Signature> {
        if !(1 <= i && i < j && j < d) {
            return Err(Error::InvalidSignature(format!(
                "need 1 <= i < j <= d-1, got ({d},{i},{j})"
            )));
        }
        Ok(Signature { d, i, j })
    }

    /// `(d, d−j, d−i)`, the reversal `s ↔ t`.
    pub fn flip(self) -> Signature {
        Signature {
            d: self.d,
            i: self.d - self.j,
            j: self.d - self.i,
        }
    }

    pub fn scaled(self, n: u64) -> Signature {
        Signature {
            d: self.d * n,
            i: self.i * n,
            j: self.j * n,
        }
    }

    pub fn canonical(self) -> Signature {
        let g = gcd(gcd(self.d, self.i), self.j);
        let s = Signature {
            d: self.d / g,
            i: self.i / g,
            j: self.j / g,
        };
        let f = s.flip();
        if (f.i, f.j) < (s.i, s.j) {
            f
        } else {
            s
        }
    }

    pub fn is_canonical(self) -> bool {
        self.canonical() == self
    }

    /// The t-exponents of the four monomials of `v`.
    pub fn exponents(self) -> [u64; 4] {
        [0, self.i, self.j, self.d]
    }

    /// All canonical signatures with `d ≤ d_max`, ordered by `(d, i, j)`.
    pub fn all_canonical(d_max: u64) -> Vec<Signature> {
        let mut out = Vec::new();
        for d in 3..=d_max {
            for i in 1..d {
                for j in i + 1..d {
                    let s = Signature { d, i, j };
                    if s.is_canonical() {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

pub fn canonical_signature(d: u64, i: u64, j: u64) -> Result<Signature> {
    Ok(Signature::new(d, i, j)?.canonical())
}

/// `E[l][m] = e_l + q·e_m` with `e = (0, i, j, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentMatrix(pub [[u64; 4]; 4]);

pub fn exponent_matrix(sig: Signature, q: u64) -> ExponentMatrix {
    let e = sig.exponents();
    let mut out = [[0u64; 4]; 4];
    for (l, row) in out.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate() {
            *cell = e[l] + q * e[m];
        }
    }
    ExponentMatrix(out)
}

impl ExponentMatrix {
    /// Cells grouped by equal exponent, in increasing exponent order.
    pub fn groups(&self) -> BTreeMap<u64, Vec<(usize, usize)>> {
        let mut map: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
        for l in 0..4 {
            for m in 0..4 {
                map.entry(self.0[l][m]).or_default().push((l, m));
            }
        }
        map
    }
}

/// `f_B` as a map from t-exponent to coefficient; the s-exponent is the
/// complement in `total_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseForm {
    pub field: FieldDesc,
    pub total_degree: u64,
    pub terms: BTreeMap<u64, u64>,
}

impl SparseForm {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, s: u64, t: u64) -> u64 {
        let f = &self.field;
        self.terms.iter().fold(0, |acc, (&e, &c)| {
            let mono = f.mul(f.pow(s, self.total_degree - e), f.pow(t, e));
            f.add(acc, f.mul(c, mono))
        })
    }
}

pub fn expand_form(sig: Signature, q: u64, b: &Mat) -> Result<SparseForm> {
    if (b.rows(), b.cols()) != (4, 4) {
        return Err(Error::Shape("form matrix must be 4x4".into()));
    }
    let f = b.field();
    let em = exponent_matrix(sig, q);
    let mut terms = BTreeMap::new();
    for (e, cells) in em.groups() {
        let c = cells.iter().fold(0, |acc, &(l, m)| f.add(acc, b.get(l, m)));
        if c != 0 {
            terms.insert(e, c);
        }
    }
    Ok(SparseForm {
        field: f.clone(),
        total_degree: (q + 1) * sig.d,
        terms,
    })
}

pub fn is_identically_zero(sig: Signature, q: u64, b: &Mat) -> Result<bool> {
    Ok(expand_form(sig, q, b)?.is_zero())
}

/// The three curve families, named by their degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseId {
    C1,
    C2,
    C3,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::C1 => "C1",
            CaseId::C2 => "C2",
            CaseId::C3 => "C3",
        })
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<CaseId> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(CaseId::C1),
            "c2" => Ok(CaseId::C2),
            "c3" => Ok(CaseId::C3),
            _ => Err(Error::InvalidCase(format!("unknown case {s:?}"))),
        }
    }
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::C1, CaseId::C2, CaseId::C3];

    pub fn check(self, q: u64) -> Result<()> {
        if prime_power(q).is_none() {
            return Err(Error::NotPrimePower(q));
        }
        match self {
            CaseId::C2 if q % 2 == 1 => {
                Err(Error::InvalidCase(format!("C2 needs even q, got {q}")))
            }
            CaseId::C3 if q.is_multiple_of(2) => {
                Err(Error::InvalidCase(format!("C3 needs odd q, got {q}")))
            }
            _ => Ok(()),
        }
    }

    pub fn valid_for(q: u64) -> Vec<CaseId> {
        CaseId::ALL
            .into_iter()
            .filter(|c| c.check(q).is_ok())
            .collect()
    }

    /// The signature in the orientation used by the case shapes:
    /// `(q+1, 1, q)`, `((q+1)q, q+1, q²+1)` or half of the latter.
    pub fn signature(self, q: u64) -> Result<Signature> {
        self.check(q)?;
        let s = match self {
            CaseId::C1 => Signature::new(q + 1, 1, q)?,
            CaseId::C2 => Signature::new((q + 1) * q, q + 1, q * q + 1)?,
            CaseId::C3 => Signature::new((q + 1) * q / 2, q.div_ceil(2), (q * q).div_ceil(2))?,
        };
        Ok(s)
    }

    pub fn degree(self, q: u64) -> Result<u64> {
        Ok(self.signature(q)?.d)
    }

    /// Positions of the four monomials inside the degree-d monomial basis.
    pub fn indices(self, q: u64) -> Result<[usize; 4]> {
        Ok(self.signature(q)?.exponents().map(|e| e as usize))
    }
}

/// `x^lhs − x^rhs` in four variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Binomial {
    pub lhs: [u64; 4],
    pub rhs: [u64; 4],
}

fn monomial(f: &FieldDesc, x: &[u64], e: &[u64; 4]) -> u64 {
    x.iter()
        .zip(e)
        .fold(1, |acc, (&xi, &ei)| f.mul(acc, f.pow(xi, ei)))
}

fn d_monomial(f: &FieldDesc, x: &[u64], e: &[u64; 4], k: usize) -> u64 {
    let c = e[k] % f.p();
    if c == 0 {
        return 0;
    }
    let mut lowered = *e;
    lowered[k] -= 1;
    f.mul(f.from_int(c as i64), monomial(f, x, &lowered))
}

impl Binomial {
    pub fn evaluate(&self, f: &FieldDesc, x: &[u64]) -> u64 {
        f.sub(monomial(f, x, &self.lhs), monomial(f, x, &self.rhs))
    }

    pub fn gradient(&self, f: &FieldDesc, x: &[u64]) -> [u64; 4] {
        std::array::from_fn(|k| {
            f.sub(
                d_monomial(f, x, &self.lhs, k),
                d_monomial(f, x, &self.rhs, k),
            )
        })
    }
}

/// The binomial systems describing the standard curve of each case.
/// C3 reuses the C2 system.
pub fn defining_equations(case: CaseId, q: u64) -> Result<Vec<Binomial>> {
    case.check(q)?;
    let eqs = match case {
        CaseId::C1 => vec![
            Binomial {
                lhs: [0, q, 0, 0],
                rhs: [q - 1, 0, 1, 0],
            },
            Binomial {
                lhs: [0, 0, q, 0],
                rhs: [0, 1, 0, q - 1],
            },
            Binomial {
                lhs: [0, 1, 1, 0],
                rhs: [1, 0, 0, 1],
            },
        ],
        CaseId::C2 | CaseId::C3 => {
            let half = q * (q + 1) / 2;
            vec![
                Binomial {
                    lhs: [0, q, 0, 0],
                    rhs: [q - 1, 0, 0, 1],
                },
                Binomial {
                    lhs: [0, 0, q + 1, 0],
                    rhs: [0, 1, 0, q],
                },
                Binomial {
                    lhs: [0, half, half, 0],
                    rhs: [(q + 2) * (q - 1) / 2, 0, 0, (q * q + q + 2) / 2],
                },
            ]
        }
    };
    Ok(eqs)
}

pub fn jacobian(eqs: &[Binomial], field: &FieldDesc, point: &[u64]) -> Result<Mat> {
    if point.len() != 4 {
        return Err(Error::Shape("points have four coordinates".into()));
    }
    if point.iter().all(|&x| x == 0) {
        return Err(Error::Invalid(
            "the zero vector is not a projective point".into(),
        ));
    }
    let rows: Vec<Vec<u64>> = eqs
        .iter()
        .map(|e| e.gradient(field, point).to_vec())
        .collect();
    Mat::from_rows(field, &rows)
}

pub fn jacobian_rank(eqs: &[Binomial], field: &FieldDesc, point: &[u64]) -> Result<usize> {
    Ok(jacobian(eqs, field, point)?.rank())
}

/// Scales so that the first nonzero coordinate is 1.
pub fn normalize_point(f: &FieldDesc, x: &[u64]) -> Vec<u64> {
    match x.iter().find(|&&v| v != 0) {
        Some(&v) => {
            let inv = f.inv(v).expect("nonzero");
            x.iter().map(|&c| f.mul(c, inv)).collect()
        }
        None => x.to_vec(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeficientPoint {
    pub point: Vec<Vec<u64>>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmoothnessReport {
    pub case: CaseId,
    pub q: u64,
    pub sig: Signature,
    pub field: String,
    pub points_scanned: u64,
    pub all_on_equations: bool,
    pub deficient: Vec<DeficientPoint>,
}

impl SmoothnessReport {
    pub fn rank_at(&self, point: &[u64]) -> Option<usize> {
        let want: Vec<Vec<u64>> = point.iter().map(|&c| vec![c]).collect();
        self.deficient
            .iter()
            .find(|d| trim_coeffs(&d.point) == trim_coeffs(&want))
            .map(|d| d.rank)
    }
}

fn trim_coeffs(p: &[Vec<u64>]) -> Vec<Vec<u64>> {
    p.iter()
        .map(|c| {
            let mut c = c.clone();
            while c.last() == Some(&0) {
                c.pop();
            }
            c
        })
        .collect()
}

/// Runs every parameter `(s:t) ∈ P¹(param_field)` through the standard
/// curve of `case`, checks the defining equations there and records where
/// the Jacobian rank drops below 2.
pub fn smoothness_scan(case: CaseId, q: u64, param_field: &FieldDesc) -> Result<SmoothnessReport> {
    let sig = case.signature(q)?;
    let eqs = defining_equations(case, q)?;
    let (p, r) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if param_field.p() != p || !param_field.m().is_multiple_of(2 * r) {
        return Err(Error::FieldMismatch {
            left: param_field.to_string(),
            right: format!("an extension of GF({q}^2)"),
        });
    }
    let f = param_field;
    let image = |s: u64, t: u64| -> Vec<u64> {
        sig.exponents()
            .iter()
            .map(|&e| f.mul(f.pow(s, sig.d - e), f.pow(t, e)))
            .collect()
    };
    let params: Vec<(u64, u64)> = std::iter::once((0, 1))
        .chain(f.elements().map(|t| (1, t)))
        .collect();
    let results: Vec<(bool, Option<(Vec<u64>, usize)>)> = params
        .par_iter()
        .map(|&(s, t)| {
            let x = image(s, t);
            let on = eqs.iter().all(|e| e.evaluate(f, &x) == 0);
            let r = jacobian_rank(&eqs, f, &x).expect("image points are nonzero");
            (on, (r < 2).then(|| (normalize_point(f, &x), r)))
        })
        .collect();
    let mut deficient: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for (_, d) in &results {
        if let Some((pt, r)) = d {
            deficient.insert(pt.clone(), *r);
        }
    }
    Ok(SmoothnessReport {
        case,
        q,
        sig,
        field: f.to_string(),
        points_scanned: params.len() as u64,
        all_on_equations: results.iter().all(|(on, _)| *on),
        deficient: deficient
            .into_iter()
            .map(|(pt, rank)| DeficientPoint {
                point: pt.iter().map(|&c| f.digits(c)).collect(),
                rank,
            })
            .collect(),
    })
}

/// A parametrized curve `x = F·v(s,t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub q: u64,
    pub sig: Signature,
    pub frame: Mat,
}

impl CurveSpec {
    /// Rejects planar curves (non-invertible frames).
    pub fn new(q: u64, sig: Signature, frame: Mat) -> Result<CurveSpec> {
        if (frame.rows(), frame.cols()) != (4, 4) {
            return Err(Error::Shape("frame must be 4x4".into()));
        }
        if frame.det()? == 0 {
            return Err(Error::Singular);
        }
        Ok(CurveSpec { q, sig, frame })
    }

    pub fn standard(q: u64, sig: Signature, field: &FieldDesc) -> CurveSpec {
        CurveSpec {
            q,
            sig,
            frame: Mat::identity(field, 4),
        }
    }

    pub fn is_nonplanar(&self) -> bool {
        self.frame.det().map(|d| d != 0).unwrap_or(false)
    }

    pub fn point(&self, s: u64, t: u64) -> Vec<u64> {
        let f = self.frame.field();
        let v: Vec<u64> = self
            .sig
            .exponents()
            .iter()
            .map(|&e| f.mul(f.pow(s, self.sig.d - e), f.pow(t, e)))
            .collect();
        (0..4)
            .map(|r| (0..4).fold(0, |acc, c| f.add(acc, f.mul(self.frame.get(r, c), v[c]))))
            .collect()
    }

    pub fn to_json(&self) -> CurveJson {
        CurveJson {
            q: self.q,
            sig: self.sig,
            frame: self.frame.to_json(),
        }
    }

    pub fn from_json(j: &CurveJson) -> Result<CurveSpec> {
        CurveSpec::new(j.q, j.sig, Mat::from_json(&j.frame)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveJson {
    pub q: u64,
    pub sig: Signature,
    pub frame: MatJson,
}

/// The smallest field containing both arguments.
pub fn common_field(a: &FieldDesc, b: &FieldDesc) -> Result<FieldDesc> {
    if a.p() != b.p() {
        return Err(Error::FieldMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    if a == b {
        return Ok(a.clone());
    }
    let (ma, mb) = (a.m(), b.m());
    let m = ma / gcd(ma as u64, mb as u64) as u32 * mb;
    if m == ma {
        Ok(a.clone())
    } else if m == mb {
        Ok(b.clone())
    } else {
        make_field(a.p(), m, None)
    }
}

/// Symbolic containment: `ᵗF·A·F^(q)` must cancel in `f_B`.
pub fn on_surface(curve: &CurveSpec, surf: &SurfaceSpec) -> Result<bool> {
    if curve.q != surf.q {
        return Err(Error::Invalid(format!(
            "curve q = {} but surface q = {}",
            curve.q, surf.q
        )));
    }
    let k = common_field(curve.frame.field(), surf.gram.field())?;
    let frame = curve
        .frame
        .embed(&make_embedding(curve.frame.field(), &k)?)?;
    let gram = surf.gram.embed(&make_embedding(surf.gram.field(), &k)?)?;
    let b = twisted_gram(&frame, &gram, curve.q)?;
    is_identically_zero(curve.sig, curve.q, &b)
}
