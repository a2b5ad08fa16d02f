//! Brute-force classification of the signatures `(d,i,j)` that admit an
//! invertible `B` with `f_B ≡ 0`, for a concrete `q`.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{field_of_order, make_field, FieldDesc};
use crate::matff::{Mat, MatJson};
use crate::numtheory::prime_power;
use crate::tetra::{exponent_matrix, CaseId, Signature};

type Cell = (usize, usize);

/// `{B : f_B ≡ 0}` over GF(q²).
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    pub sig: Signature,
    pub q: u64,
    pub field: FieldDesc,
    pub forced_zero: Vec<Cell>,
    pub groups: Vec<Vec<Cell>>,
    pub basis: Vec<Mat>,
}

impl SolutionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The element `Σ c_k·basis_k`, with the basis reinterpreted in `field`.
    pub fn combination(&self, field: &FieldDesc, coeffs: &[u64]) -> Mat {
        let mut m = Mat::zeros(field, 4, 4);
        for (group, &c) in self.group_params().iter().zip(coeffs) {
            let (plus, minus) = *group;
            m.set(plus.0, plus.1, field.add(m.get(plus.0, plus.1), c));
            m.set(minus.0, minus.1, field.sub(m.get(minus.0, minus.1), c));
        }
        m
    }

    /// One `(plus, minus)` cell pair per basis element.
    fn group_params(&self) -> Vec<(Cell, Cell)> {
        self.groups
            .iter()
            .flat_map(|g| {
                let last = *g.last().expect("groups are nonempty");
                g[..g.len() - 1].iter().map(move |&c| (c, last))
            })
            .collect()
    }

    /// Rows or columns that no solution can touch.
    pub fn has_structural_zero_line(&self) -> bool {
        let mut rows = [false; 4];
        let mut cols = [false; 4];
        for g in &self.groups {
            for &(l, m) in g {
                rows[l] = true;
                cols[m] = true;
            }
        }
        rows.iter().chain(&cols).any(|&used| !used)
    }
}

pub fn solution_space(sig: Signature, q: u64) -> Result<SolutionSpace> {
    prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let field = field_of_order(q, 2)?;
    let mut forced_zero = Vec::new();
    let mut groups = Vec::new();
    for cells in exponent_matrix(sig, q).groups().into_values() {
        if cells.len() == 1 {
            forced_zero.push(cells[0]);
        } else {
            groups.push(cells);
        }
    }
    forced_zero.sort();
    let mut space = SolutionSpace {
        sig,
        q,
        field: field.clone(),
        forced_zero,
        groups,
        basis: Vec::new(),
    };
    let n = space.group_params().len();
    space.basis = (0..n)
        .map(|k| {
            let mut c = vec![0; n];
            c[k] = 1;
            space.combination(&field, &c)
        })
        .collect();
    Ok(space)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Exhaustive when small enough, otherwise randomized with an exact fallback.
    Auto,
    /// Every coefficient vector over GF(q²).
    Exhaustive,
    Random {
        trials: u32,
        ext_degree: u32,
        seed: u64,
    },
}

/// Exhaustive GF(q²) search is used up to this many bits of coefficient space.
pub const EXHAUSTIVE_BITS: f64 = 24.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvertibleVerdict {
    pub exists: bool,
    /// True when the verdict is a proof (a witness, or a completed exhaustive search).
    pub exact: bool,
    pub method: String,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<MatJson>,
    #[serde(skip)]
    pub witness_mat: Option<Mat>,
}

impl InvertibleVerdict {
    fn found(method: &str, trials: u64, w: Mat) -> InvertibleVerdict {
        InvertibleVerdict {
            exists: true,
            exact: true,
            method: method.into(),
            trials,
            witness: Some(w.to_json()),
            witness_mat: Some(w),
        }
    }

    fn none(method: &str, trials: u64, exact: bool) -> InvertibleVerdict {
        InvertibleVerdict {
            exists: false,
            exact,
            method: method.into(),
            trials,
            witness: None,
            witness_mat: None,
        }
    }
}

/// First coefficient vector over `field` (in encoding order) whose
/// combination is invertible.
fn exhaustive_over(space: &SolutionSpace, field: &FieldDesc) -> Option<(u64, Mat)> {
    let n = space.dim() as u32;
    let size = field.size();
    let total = size.checked_pow(n)?;
    let hit = (0..total).into_par_iter().find_first(|&idx| {
        let coeffs = digits(idx, size, n);
        space.combination(field, &coeffs).det().expect("square") != 0
    })?;
    Some((hit + 1, space.combination(field, &digits(hit, size, n))))
}

fn digits(mut idx: u64, base: u64, n: u32) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = idx % base;
            idx /= base;
            d
        })
        .collect()
}

/// Smallest subfield of GF(q²) with at least three elements.
fn small_subfield(space: &SolutionSpace) -> Result<FieldDesc> {
    let p = space.field.p();
    if p == 2 {
        make_field(2, 2, None)
    } else {
        make_field(p, 1, None)
    }
}

/// Whether some element of the span is invertible over the closure.
///
/// A structural zero row or column settles the negative at once. The
/// randomized path only ever certifies a positive; if it finds nothing it
/// falls back to an exhaustive search over a subfield of size ≥ 3, which is
/// exact because the determinant has degree at most 2 in each coefficient
/// (every coefficient touches exactly two cells).
pub fn exists_invertible(space: &SolutionSpace, strategy: Strategy) -> Result<InvertibleVerdict> {
    if space.dim() == 0 || space.has_structural_zero_line() {
        return Ok(InvertibleVerdict::none("structural", 0, true));
    }
    let bits = space.dim() as f64 * (space.field.size() as f64).log2();
    let strategy = match strategy {
        Strategy::Auto if bits <= EXHAUSTIVE_BITS => Strategy::Exhaustive,
        Strategy::Auto => Strategy::Random {
            trials: 40,
            ext_degree: 8,
            seed: 0,
        },
        s => s,
    };
    match strategy {
        Strategy::Exhaustive => {
            if bits > 40.0 {
                return Err(Error::SearchTooLarge(format!(
                    "{bits:.1} bits of coefficients"
                )));
            }
            let total = space.field.size().pow(space.dim() as u32);
            Ok(match exhaustive_over(space, &space.field) {
                Some((tried, w)) => InvertibleVerdict::found("exhaustive", tried, w),
                None => InvertibleVerdict::none("exhaustive", total, true),
            })
        }
        Strategy::Random {
            trials,
            ext_degree,
            seed,
        } => {
            let big = field_of_order(space.q, ext_degree)?;
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (space.sig.d << 32 | space.sig.i << 16 | space.sig.j),
            );
            for t in 0..trials {
                let coeffs: Vec<u64> = (0..space.dim())
                    .map(|_| rng.gen_range(0..big.size()))
                    .collect();
                let m = space.combination(&big, &coeffs);
                if m.det()? != 0 {
                    return Ok(InvertibleVerdict::found("random", u64::from(t) + 1, m));
                }
            }
            let small = small_subfield(space)?;
            let total = small.size().pow(space.dim() as u32);
            Ok(match exhaustive_over(space, &small) {
                Some((tried, w)) => {
                    let w = w.embed_into(&space.field)?;
                    InvertibleVerdict::found("subfield", u64::from(trials) + tried, w)
                }
                None => InvertibleVerdict::none("subfield", u64::from(trials) + total, true),
            })
        }
        Strategy::Auto => unreachable!(),
    }
}

/// The three shapes of admissible form matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FormShape {
    I,
    II,
    III,
}

impl fmt::Display for FormShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FormShape {
    pub fn of(case: CaseId) -> FormShape {
        match case {
            CaseId::C1 => FormShape::I,
            CaseId::C2 => FormShape::II,
            CaseId::C3 => FormShape::III,
        }
    }

    pub fn curve_case(self) -> CaseId {
        match self {
            FormShape::I => CaseId::C1,
            FormShape::II => CaseId::C2,
            FormShape::III => CaseId::C3,
        }
    }
}

/// Basis of the linear span of the case shape (side conditions dropped).
pub fn shape_basis(case: FormShape, q: u64, field: &FieldDesc) -> Vec<Mat> {
    let pairs: Vec<Vec<(Cell, i64)>> = match case {
        FormShape::I => {
            let mut v = vec![
                vec![((0, 1), 1), ((2, 0), -1)],
                vec![((0, 3), 1), ((2, 2), -1)],
                vec![((1, 1), 1), ((3, 0), -1)],
                vec![((1, 3), 1), ((3, 2), -1)],
            ];
            if q == 2 {
                v.push(vec![((0, 2), 1), ((2, 1), -1)]);
                v.push(vec![((1, 2), 1), ((3, 1), -1)]);
            }
            v
        }
        FormShape::II | FormShape::III => {
            let mut v = vec![
                vec![((0, 1), 1), ((3, 0), -1)],
                vec![((1, 3), 1), ((2, 2), -1)],
            ];
            if q == 2 {
                v.push(vec![((0, 3), 1), ((3, 1), -1)]);
            }
            v
        }
    };
    pairs
        .into_iter()
        .map(|cells| {
            let mut m = Mat::zeros(field, 4, 4);
            for ((l, c), s) in cells {
                m.set(l, c, field.from_int(s));
            }
            m
        })
        .collect()
}

fn span_rank(field: &FieldDesc, mats: &[Mat]) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<u64>> = mats.iter().map(|m| m.data().to_vec()).collect();
    Mat::from_rows(field, &rows).expect("flattened 4x4").rank()
}

/// Whether the solution space is exactly the span of the case shape.
pub fn space_matches_shape(space: &SolutionSpace, case: FormShape) -> bool {
    let f = &space.field;
    let shape = shape_basis(case, space.q, f);
    let a = span_rank(f, &space.basis);
    let b = span_rank(f, &shape);
    let joint: Vec<Mat> = space.basis.iter().chain(&shape).cloned().collect();
    a == b && span_rank(f, &joint) == a
}

/// Full membership test, including the sign ties and side conditions.
pub fn case_shape_check(b: &Mat, case: FormShape, q: u64) -> bool {
    if (b.rows(), b.cols()) != (4, 4) {
        return false;
    }
    let f = b.field();
    let g = |l: usize, m: usize| b.get(l, m);
    let neg = |l: usize, m: usize| f.neg(b.get(l, m));
    match case {
        FormShape::I => {
            let zeros = g(0, 0) == 0 && g(1, 0) == 0 && g(2, 3) == 0 && g(3, 3) == 0;
            let ties = (0..3).all(|k| g(2, k) == neg(0, k + 1) && g(3, k) == neg(1, k + 1));
            let rows = Mat::from_rows(f, &[b.row(0).to_vec(), b.row(1).to_vec()]).expect("2x4");
            let independent = rows.rank() == 2;
            let firsts = g(0, 1) != 0 || g(1, 1) != 0;
            let lasts = g(0, 3) != 0 || g(1, 3) != 0;
            let extra = q == 2 || (g(0, 2) == 0 && g(1, 2) == 0);
            zeros && ties && independent && firsts && lasts && extra
        }
        FormShape::II | FormShape::III => {
            let parity = match case {
                FormShape::II => q.is_multiple_of(2),
                _ => q % 2 == 1,
            };
            let support = [(0, 1), (0, 3), (1, 3), (2, 2), (3, 0), (3, 1)];
            let outside_zero = (0..4)
                .flat_map(|l| (0..4).map(move |m| (l, m)))
                .filter(|c| !support.contains(c))
                .all(|(l, m)| g(l, m) == 0);
            let ties = g(3, 0) == neg(0, 1) && g(3, 1) == neg(0, 3) && g(2, 2) == neg(1, 3);
            let nonzero = g(0, 1) != 0 && g(1, 3) != 0;
            let extra = q == 2 || g(0, 3) == 0;
            parity && outside_zero && ties && nonzero && extra
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MatchedCase {
    I,
    II,
    III,
    #[serde(rename = "unexpected")]
    Unexpected,
}

impl fmt::Display for MatchedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchedCase::Unexpected => f.write_str("unexpected"),
            other => fmt::Debug::fmt(other, f),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Admissible {
    /// Reported in the case orientation when one matches.
    pub sig: Signature,
    pub canonical: Signature,
    pub dim: usize,
    pub case: MatchedCase,
    pub shape_matches: bool,
    pub method: String,
    pub witness: Option<MatJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub q: u64,
    pub d_max: u64,
    pub admissible: Vec<Admissible>,
    pub signatures_examined: usize,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

impl ClassificationReport {
    pub fn signatures(&self) -> Vec<Signature> {
        self.admissible.iter().map(|a| a.sig).collect()
    }

    pub fn has_unexpected(&self) -> bool {
        self.admissible
            .iter()
            .any(|a| a.case == MatchedCase::Unexpected || !a.shape_matches)
    }
}

pub fn default_d_max(q: u64) -> u64 {
    (3 * (q + 1) * q).div_ceil(2)
}

/// Examines every canonical signature with `d ≤ d_max`.
///
/// An admissible signature that is the canonical form of one of the case
/// signatures is re-examined in that orientation, where its solution space
/// must coincide with the span of the case shape.
pub fn enumerate_admissible(q: u64, d_max: u64) -> Result<ClassificationReport> {
    prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if d_max < 3 {
        return Err(Error::Invalid(format!(
            "d_max must be at least 3, got {d_max}"
        )));
    }
    let start = Instant::now();
    let sigs = Signature::all_canonical(d_max);
    let found: Vec<Option<Admissible>> = sigs
        .par_iter()
        .map(|&sig| examine(sig, q))
        .collect::<Result<_>>()?;
    Ok(ClassificationReport {
        q,
        d_max,
        admissible: found.into_iter().flatten().collect(),
        signatures_examined: sigs.len(),
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn examine(sig: Signature, q: u64) -> Result<Option<Admissible>> {
    let space = solution_space(sig, q)?;
    let verdict = exists_invertible(&space, Strategy::Auto)?;
    if !verdict.exists {
        return Ok(None);
    }
    let oriented = CaseId::valid_for(q).into_iter().find_map(|c| {
        c.signature(q)
            .ok()
            .filter(|s| s.canonical() == sig)
            .map(|s| (c, s))
    });
    let entry = match oriented {
        Some((case, osig)) => {
            let lcase = FormShape::of(case);
            let ospace = solution_space(osig, q)?;
            let overdict = exists_invertible(&ospace, Strategy::Auto)?;
            let witness_ok = overdict
                .witness_mat
                .as_ref()
                .is_some_and(|w| case_shape_check(w, lcase, q));
            Admissible {
                sig: osig,
                canonical: sig,
                dim: ospace.dim(),
                case: match lcase {
                    FormShape::I => MatchedCase::I,
                    FormShape::II => MatchedCase::II,
                    FormShape::III => MatchedCase::III,
                },
                shape_matches: space_matches_shape(&ospace, lcase) && witness_ok,
                method: overdict.method,
                witness: overdict.witness,
            }
        }
        None => Admissible {
            sig,
            canonical: sig,
            dim: space.dim(),
            case: MatchedCase::Unexpected,
            shape_matches: false,
            method: verdict.method,
            witness: verdict.witness,
        },
    };
    Ok(Some(entry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tetra::is_identically_zero;

    fn sig(d: u64, i: u64, j: u64) -> Signature {
        Signature::new(d, i, j).unwrap()
    }

    #[test]
    fn solution_space_examples() {
        let s = solution_space(sig(3, 1, 2), 2).unwrap();
        assert_eq!(s.dim(), 6);
        assert!(space_matches_shape(&s, FormShape::I));

        let s = solution_space(sig(4, 1, 3), 3).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(s.forced_zero.contains(&(0, 2)) && s.forced_zero.contains(&(1, 2)));
        assert!(space_matches_shape(&s, FormShape::I));

        let s = solution_space(sig(5, 1, 3), 3).unwrap();
        assert_eq!(s.dim(), 1);
        let v = exists_invertible(&s, Strategy::Exhaustive).unwrap();
        assert!(!v.exists && v.exact);
        // the single solution has two zero rows
        let zero_rows = (0..4)
            .filter(|&r| s.basis[0].row(r).iter().all(|&x| x == 0))
            .count();
        assert!(zero_rows >= 2);
    }

    #[test]
    fn basis_elements_vanish() {
        for q in [2, 3, 4] {
            for s in Signature::all_canonical(9) {
                let space = solution_space(s, q).unwrap();
                for b in &space.basis {
                    assert!(is_identically_zero(s, q, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn invertible_examples() {
        let s = solution_space(sig(3, 1, 2), 2).unwrap();
        let f = &s.field;
        let rep = Mat::from_ints(
            f,
            &[&[0, 0, 0, -1], &[0, 1, 0, 0], &[0, 0, 1, 0], &[-1, 0, 0, 0]],
        );
        assert!(case_shape_check(&rep, FormShape::I, 2));
        assert_ne!(rep.det().unwrap(), 0);
        let v = exists_invertible(&s, Strategy::Auto).unwrap();
        assert!(v.exists);
        let w = v.witness_mat.unwrap();
        assert!(is_identically_zero(s.sig, 2, &w).unwrap());
        assert_ne!(w.det().unwrap(), 0);

        let empty = solution_space(sig(7, 2, 3), 5).unwrap();
        if empty.dim() == 0 {
            assert!(!exists_invertible(&empty, Strategy::Auto).unwrap().exists);
        }
    }

    #[test]
    fn exhaustive_and_random_agree() {
        for q in [2, 3] {
            for s in Signature::all_canonical(8) {
                let space = solution_space(s, q).unwrap();
                let bits = space.dim() as f64 * (space.field.size() as f64).log2();
                if bits > EXHAUSTIVE_BITS {
                    continue;
                }
                let a = exists_invertible(&space, Strategy::Exhaustive).unwrap();
                let b = exists_invertible(
                    &space,
                    Strategy::Random {
                        trials: 40,
                        ext_degree: 8,
                        seed: 3,
                    },
                )
                .unwrap();
                assert_eq!(a.exists, b.exists, "{s} q={q}");
            }
        }
    }

    #[test]
    fn shape_checks() {
        let f = field_of_order(3, 2).unwrap();
        let m1 = Mat::from_ints(
            &f,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, 0, -1, 0]],
        );
        assert!(case_shape_check(&m1, FormShape::I, 3));
        let f16 = field_of_order(4, 2).unwrap();
        let m2 = Mat::from_ints(
            &f16,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[-1, 0, 0, 0]],
        );
        assert!(case_shape_check(&m2, FormShape::II, 4));
        let m3 = Mat::from_ints(
            &f,
            &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0], &[-1, 0, 0, 0]],
        );
        assert!(case_shape_check(&m3, FormShape::III, 3));
        assert!(!case_shape_check(&m3, FormShape::II, 3));
        // a11 = a21 = 0
        let bad = Mat::from_ints(
            &f,
            &[&[0, 0, 0, 1], &[0, 0, 0, 2], &[0, 0, -1, 0], &[0, 0, -2, 0]],
        );
        assert!(!case_shape_check(&bad, FormShape::I, 3));
    }

    #[test]
    fn small_classifications() {
        // q = 2 also admits the self-flipped quartic (4,1,3)
        let r = enumerate_admissible(2, 12).unwrap();
        assert_eq!(
            r.signatures(),
            vec![sig(3, 1, 2), sig(4, 1, 3), sig(6, 3, 5)]
        );
        assert_eq!(r.admissible[1].case, MatchedCase::Unexpected);
        assert_eq!(r.admissible[1].dim, 3);
        assert!(r.has_unexpected());
        let r = enumerate_admissible(3, 12).unwrap();
        assert_eq!(r.signatures(), vec![sig(4, 1, 3), sig(6, 2, 5)]);
        assert!(!r.has_unexpected());
        assert_eq!(r.admissible[1].case, MatchedCase::III);
        assert_eq!(r.admissible[1].canonical, sig(6, 1, 4));
    }

    #[test]
    fn quartic_at_q2_by_hand() {
        // v = (s^4, s^3 t, s t^3, t^4): the six terms cancel in pairs
        let f = field_of_order(2, 2).unwrap();
        let (a, b, c) = (1, 2, 3);
        let m = Mat::from_rows(
            &f,
            &[
                vec![0, 0, b, 0],
                vec![0, a, 0, c],
                vec![a, 0, c, 0],
                vec![0, b, 0, 0],
            ],
        )
        .unwrap();
        assert_ne!(m.det().unwrap(), 0);
        let g = f.generator();
        for t in f.elements() {
            let v = [1, t, f.pow(t, 3), f.pow(t, 4)];
            let vq: Vec<u64> = v.iter().map(|&x| f.pow(x, 2)).collect();
            let mut acc = 0;
            for l in 0..4 {
                for k in 0..4 {
                    acc = f.add(acc, f.mul(f.mul(v[l], m.get(l, k)), vq[k]));
                }
            }
            assert_eq!(acc, 0, "t = {t}, generator {g}");
        }
        assert!(is_identically_zero(sig(4, 1, 3), 2, &m).unwrap());
    }

    #[test]
    fn raising_d_max_keeps_entries() {
        let small = enumerate_admissible(2, 8).unwrap().signatures();
        let large = enumerate_admissible(2, 14).unwrap().signatures();
        assert!(small.iter().all(|s| large.contains(s)));
    }

    #[test]
    fn report_json_shape() {
        let r = enumerate_admissible(3, 6).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["q"], 3);
        assert_eq!(v["admissible"][0]["sig"], serde_json::json!([4, 1, 3]));
        assert_eq!(v["admissible"][0]["case"], "I");
        assert_eq!(v["admissible"][0]["dim"], 4);
        assert!(v["admissible"][0]["witness"].is_object());
    }
}
