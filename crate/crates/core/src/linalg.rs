//! Exact rational linear algebra on small dense matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QMatrix = Vec<Vec<BigRational>>;

pub fn to_rational(m: &[Vec<BigInt>]) -> QMatrix {
    m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of { x : m x = 0 } with `cols` unknowns.
pub fn nullspace(m: &QMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn determinant(m: &QMatrix) -> BigRational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return BigRational::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let sub = &f * &a[c][j];
                a[i][j] -= sub;
            }
        }
    }
    det
}

pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn quad_form(m: &[Vec<BigInt>], x: &[BigRational]) -> BigRational {
    let mut s = BigRational::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            if !a.is_zero() && !x[i].is_zero() && !x[j].is_zero() {
                s += BigRational::from_integer(a.clone()) * &x[i] * &x[j];
            }
        }
    }
    s
}

pub fn quad_form_int(m: &[Vec<BigInt>], x: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (i, row) in m.iter().enumerate() {
        if x[i].is_zero() {
            continue;
        }
        for (j, a) in row.iter().enumerate() {
            s += a * &x[i] * &x[j];
        }
    }
    s
}

fn principal(m: &[Vec<BigInt>], s: &[usize]) -> QMatrix {
    s.iter()
        .map(|&i| s.iter().map(|&j| BigRational::from_integer(m[i][j].clone())).collect())
        .collect()
}

fn subsets_by_size(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks.into_iter().map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// Exact copositivity test for a symmetric integer matrix (at most ~16 rows).
/// Returns a nonnegative `x` with `xᵀ m x < 0` when `m` is not copositive.
///
/// Principal submatrices are visited by increasing size; a submatrix whose proper
/// principal submatrices are all copositive fails iff its inverse exists and is
/// entrywise nonpositive (Cottle, Habetler, Lemke).
pub fn copositivity_witness(m: &[Vec<BigInt>]) -> Option<Vec<BigRational>> {
    let n = m.len();
    if m.iter().all(|r| r.iter().all(|x| !x.is_negative())) {
        return None;
    }
    for s in subsets_by_size(n) {
        let sub = principal(m, &s);
        let Some(inv) = inverse(&sub) else { continue };
        if inv.iter().all(|r| r.iter().all(|x| !x.is_positive())) {
            let mut x = vec![BigRational::zero(); n];
            for (a, &i) in s.iter().enumerate() {
                x[i] = -inv[a].iter().cloned().sum::<BigRational>();
            }
            debug_assert!(quad_form(m, &x).is_negative());
            return Some(x);
        }
    }
    None
}

/// For a copositive matrix: nonnegative nonzero vectors on which the form vanishes and whose
/// support is minimal. The matrix is strictly copositive iff this is empty.
pub fn minimal_zeros(m: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let mut found: Vec<(u32, Vec<BigRational>)> = Vec::new();
    for s in subsets_by_size(n) {
        let mask: u32 = s.iter().map(|&i| 1u32 << i).sum();
        if found.iter().any(|(f, _)| f & mask == *f) {
            continue;
        }
        let sub = principal(m, &s);
        let ker = nullspace(&sub, s.len());
        if ker.len() != 1 {
            continue;
        }
        let v = &ker[0];
        let sign = if v.iter().all(|x| x.is_positive()) {
            BigRational::one()
        } else if v.iter().all(|x| x.is_negative()) {
            -BigRational::one()
        } else {
            continue;
        };
        let mut x = vec![BigRational::zero(); n];
        for (a, &i) in s.iter().enumerate() {
            x[i] = &v[a] * &sign;
        }
        found.push((mask, x));
    }
    found.into_iter().map(|(_, x)| x).collect()
}

/// A vector x with every entry positive and `m x = 0`, if one exists.
///
/// Such x exists iff the supports of the extreme rays of { x ≥ 0 : m x = 0 } cover every
/// coordinate; a ray has a support T whose column submatrix has a one-dimensional kernel.
pub fn positive_kernel_vector(m: &[Vec<BigInt>]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let q = to_rational(m);
    if n == 0 || nullspace(&q, n).is_empty() {
        return None;
    }
    let mut covered = vec![false; n];
    let mut sum = vec![BigRational::zero(); n];
    for t in subsets_by_size(n) {
        if t.iter().all(|&i| covered[i]) {
            continue;
        }
        let cols: QMatrix = q.iter().map(|r| t.iter().map(|&j| r[j].clone()).collect()).collect();
        let ker = nullspace(&cols, t.len());
        if ker.len() != 1 {
            continue;
        }
        let v = &ker[0];
        let sign = if v.iter().all(|x| x.is_positive()) {
            BigRational::one()
        } else if v.iter().all(|x| x.is_negative()) {
            -BigRational::one()
        } else {
            continue;
        };
        for (a, &i) in t.iter().enumerate() {
            sum[i] += &v[a] * &sign;
            covered[i] = true;
        }
        if covered.iter().all(|&c| c) {
            return Some(sum);
        }
    }
    None
}

/// Smallest positive integer multiple of a nonnegative rational vector with integer entries.
pub fn clear_denominators(x: &[BigRational]) -> Vec<BigInt> {
    let l = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| (v * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|v| v / &g).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn im(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn nullspace_and_inverse() {
        let m = to_rational(&im(&[&[1, 2, 3], &[2, 4, 6]]));
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let s: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(s.is_zero());
            }
        }
        let a = to_rational(&im(&[&[2, 1], &[1, 1]]));
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![q(1), q(-1)], vec![q(-1), q(2)]]);
        assert_eq!(determinant(&a), q(1));
        assert!(inverse(&to_rational(&im(&[&[1, 1], &[1, 1]]))).is_none());
    }

    #[test]
    fn copositivity_examples() {
        assert!(copositivity_witness(&im(&[&[8, -8], &[-8, 8]])).is_none());
        assert!(copositivity_witness(&im(&[&[4, -7], &[-7, 4]])).is_some());
        assert!(copositivity_witness(&im(&[&[-1]])).is_some());
        let z = minimal_zeros(&im(&[&[8, -8], &[-8, 8]]));
        assert_eq!(z, vec![vec![q(1), q(1)]]);
        assert!(minimal_zeros(&im(&[&[4, -1], &[-1, 4]])).is_empty());
    }

    #[test]
    fn positive_kernel() {
        let k = positive_kernel_vector(&im(&[&[8, -8], &[-8, 8]])).unwrap();
        assert_eq!(k[0], k[1]);
        assert!(k[0].is_positive());
        assert!(positive_kernel_vector(&im(&[&[1, 1], &[1, 1]])).is_none());
        assert!(positive_kernel_vector(&im(&[&[4, -1], &[-1, 4]])).is_none());
        let k = positive_kernel_vector(&im(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 0]])).unwrap();
        assert!(k.iter().all(|x| x.is_positive()));
    }

    #[test]
    fn denominators() {
        let x = vec![BigRational::new(1.into(), 3.into()), BigRational::new(1.into(), 2.into()), q(0)];
        assert_eq!(clear_denominators(&x), vec![BigInt::from(2), BigInt::from(3), BigInt::from(0)]);
    }

    proptest! {
        #[test]
        fn two_by_two_closed_form(a in -6i64..7, b in -6i64..7, c in -6i64..7) {
            let m = im(&[&[a, b], &[b, c]]);
            let expected = a >= 0 && c >= 0 && (b >= 0 || b * b <= a * c);
            let w = copositivity_witness(&m);
            prop_assert_eq!(w.is_none(), expected);
            if let Some(x) = w {
                prop_assert!(x.iter().all(|v| !v.is_negative()));
                prop_assert!(quad_form(&m, &x).is_negative());
            }
        }

        #[test]
        fn three_by_three_against_grid(e in proptest::collection::vec(-4i64..5, 6)) {
            let m = im(&[&[e[0], e[1], e[2]], &[e[1], e[3], e[4]], &[e[2], e[4], e[5]]]);
            match copositivity_witness(&m) {
                Some(x) => prop_assert!(quad_form(&m, &x).is_negative()),
                None => {
                    for x0 in 0..6i64 { for x1 in 0..6i64 { for x2 in 0..6i64 {
                        let x = [q(x0), q(x1), q(x2)];
                        prop_assert!(!quad_form(&m, &x).is_negative());
                    }}}
                    let strict = minimal_zeros(&m).is_empty();
                    for x0 in 0..4i64 { for x1 in 0..4i64 { for x2 in 0..4i64 {
                        if x0 + x1 + x2 == 0 { continue; }
                        let x = [q(x0), q(x1), q(x2)];
                        if strict { prop_assert!(quad_form(&m, &x).is_positive()); }
                    }}}
                    for z in minimal_zeros(&m) {
                        prop_assert!(quad_form(&m, &z).is_zero());
                    }
                }
            }
        }
    }
}
