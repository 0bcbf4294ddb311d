//! Exact rational elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type RationalMatrix = Vec<Vec<BigRational>>;

pub fn from_integers(rows: &[Vec<i128>]) -> RationalMatrix {
    rows.iter()
        .map(|row| row.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect()
}

pub fn transpose(a: &RationalMatrix, cols: usize) -> RationalMatrix {
    (0..cols).map(|c| a.iter().map(|row| row[c].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// The pivot is the first nonzero entry at or below the current row, so the
/// result depends only on the input.
pub fn rref(a: &mut RationalMatrix, cols: usize) -> Vec<usize> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let lead = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v /= &lead;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in 0..cols {
                    let delta = &factor * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn null_space(a: &RationalMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut reduced = a.clone();
    let pivots = rref(&mut reduced, cols);
    let free = (0..cols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut x = vec![BigRational::zero(); cols];
        x[f] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = -reduced[row][f].clone();
        }
        x
    })
    .collect()
}

/// Basis of `{w : wᵀ A = 0}`.
pub fn left_null_space(a: &RationalMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    null_space(&transpose(a, cols), rows)
}

/// Rescales to the primitive integer vector with a positive leading entry.
pub fn primitive(v: &[BigRational]) -> Vec<BigRational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &gcd * &sign))
        .collect()
}

pub fn dot(w: &[BigRational], x: &[BigInt]) -> BigRational {
    w.iter()
        .zip(x)
        .fold(BigRational::zero(), |acc, (a, b)| acc + a * BigRational::from_integer(b.clone()))
}
