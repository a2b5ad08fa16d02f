//! Small integer helpers: primality, factorization, modular linear algebra.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`, `g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Decomposes `q = p^r` with `p` prime, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let f = factorize(q);
    match f.as_slice() {
        [(p, r)] => Some((*p, *r)),
        _ => None,
    }
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// All solutions of `a*x ≡ b (mod n)` as `(x0, step)`; the full set is `x0 + k*step`.
pub fn solve_congruence(a: i128, b: i128, n: i128) -> Option<(i128, i128)> {
    let a = a.rem_euclid(n);
    let b = b.rem_euclid(n);
    let (g, x, _) = ext_gcd(a, n);
    if b % g != 0 {
        return None;
    }
    let step = n / g;
    let x0 = ((x.rem_euclid(step)) * ((b / g).rem_euclid(step))).rem_euclid(step);
    Some((x0, step))
}

/// Solves `rows · (x, y) ≡ rhs (mod n)` for two unknowns.
///
/// Column operations bring the first two rows to lower-triangular form; the
/// remaining rows are checked against each candidate. Returns the solution
/// with the smallest `x` found by the triangular sweep.
pub fn solve_2var_mod(rows: &[[i128; 2]], rhs: &[i128], n: i128) -> Option<(i128, i128)> {
    assert_eq!(rows.len(), rhs.len());
    if rows.is_empty() {
        return Some((0, 0));
    }
    // unimodular V with rows[0]·V = (g, 0)
    let (a, b) = (rows[0][0].rem_euclid(n), rows[0][1].rem_euclid(n));
    let (g, s, t) = ext_gcd(a, b);
    let v = if g == 0 {
        [[1, 0], [0, 1]]
    } else {
        [[s, -b / g], [t, a / g]]
    };
    let tr = |r: &[i128; 2]| -> [i128; 2] {
        [
            (r[0] * v[0][0] + r[1] * v[1][0]).rem_euclid(n),
            (r[0] * v[0][1] + r[1] * v[1][1]).rem_euclid(n),
        ]
    };
    let t_rows: Vec<[i128; 2]> = rows.iter().map(tr).collect();
    let check = |w: (i128, i128)| {
        t_rows
            .iter()
            .zip(rhs)
            .all(|(r, &c)| (r[0] * w.0 + r[1] * w.1 - c).rem_euclid(n) == 0)
    };
    let (w1_0, step1) = solve_congruence(t_rows[0][0], rhs[0], n)?;
    let reps = n / step1;
    for k in 0..reps {
        let w1 = (w1_0 + k * step1).rem_euclid(n);
        // pick w2 from the first row with a nonzero second coefficient
        let pivot = t_rows.iter().zip(rhs).skip(1).find(|(r, _)| r[1] != 0);
        let w2 = match pivot {
            None => 0,
            Some((r, &c)) => match solve_congruence(r[1], c - r[0] * w1, n) {
                None => continue,
                Some((w2_0, step2)) => {
                    // scan the residue class for one satisfying all rows
                    let mut found = None;
                    let mut w2 = w2_0;
                    for _ in 0..(n / step2).min(1 << 20) {
                        if check((w1, w2)) {
                            found = Some(w2);
                            break;
                        }
                        w2 += step2;
                    }
                    match found {
                        Some(w2) => w2,
                        None => continue,
                    }
                }
            },
        };
        if check((w1, w2)) {
            let x = (v[0][0] * w1 + v[0][1] * w2).rem_euclid(n);
            let y = (v[1][0] * w1 + v[1][1] * w2).rem_euclid(n);
            return Some((x, y));
        }
    }
    None
}
