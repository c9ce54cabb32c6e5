use num_complex::Complex64;

use super::series::FormSeries;
use crate::error::{Error, Result};

/// Square matrix with [`FormSeries`] entries, stored row by row.
pub type SeriesMatrix = Vec<Vec<FormSeries>>;

fn check_square(a: &SeriesMatrix) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("series matrix is not square".into()));
    }
    Ok(n)
}

fn minor(a: &SeriesMatrix, drop: &[usize]) -> SeriesMatrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| !drop.contains(j)).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Pfaffian as a signed sum over perfect matchings, expanding along the
/// first row. Needs an antisymmetric matrix of even size.
pub fn pfaffian(a: &SeriesMatrix) -> Result<FormSeries> {
    let n = check_square(a)?;
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Pfaffian needs a positive even size, got {n}")));
    }
    for i in 0..n {
        for j in 0..=i {
            if !(&a[i][j] + &a[j][i]).terms().all(|(_, z)| z.norm() <= 1e-14) {
                return Err(Error::InvalidArgument(format!("entries ({i},{j}) and ({j},{i}) are not opposite")));
            }
        }
    }
    Ok(pfaffian_unchecked(a))
}

fn pfaffian_unchecked(a: &SeriesMatrix) -> FormSeries {
    let n = a.len();
    let head = &a[0][1];
    if n == 2 {
        return head.clone();
    }
    let mut acc = FormSeries::zero(head.vars().clone(), head.dmax());
    for j in 1..n {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let rest = pfaffian_unchecked(&minor(a, &[0, j]));
        acc = &acc + &(&a[0][j] * &rest).scale(Complex64::new(sign, 0.0));
    }
    acc
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(a: &SeriesMatrix) -> Result<FormSeries> {
    let n = check_square(a)?;
    if n == 0 {
        return Err(Error::InvalidArgument("determinant of an empty series matrix".into()));
    }
    Ok(determinant_unchecked(a))
}

fn determinant_unchecked(a: &SeriesMatrix) -> FormSeries {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut acc = FormSeries::zero(a[0][0].vars().clone(), a[0][0].dmax());
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let sub: SeriesMatrix = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        acc = &acc + &(&a[0][j] * &determinant_unchecked(&sub)).scale(Complex64::new(sign, 0.0));
    }
    acc
}

/// Block-diagonal antisymmetric matrix with upper entries `blocks[i]`.
pub fn block_antisymmetric(blocks: &[FormSeries]) -> Result<SeriesMatrix> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one block".into()))?;
    let zero = FormSeries::zero(first.vars().clone(), first.dmax());
    let n = 2 * blocks.len();
    let mut m = vec![vec![zero; n]; n];
    for (i, b) in blocks.iter().enumerate() {
        m[2 * i][2 * i + 1] = b.clone();
        m[2 * i + 1][2 * i] = -b;
    }
    Ok(m)
}
