//! Helpers for dense operators on a product of site spaces.

use num_complex::Complex64;

use crate::operator::Matrix;
use crate::tree::SiteId;

/// Splits a flat index into mixed-radix digits, most significant first.
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

pub(crate) fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Re-expresses a dense operator whose tensor factors follow `from` in the
/// factor order `to`.
pub fn permute_sites(m: &Matrix, from: &[SiteId], from_dims: &[usize], to: &[SiteId]) -> Matrix {
    assert_eq!(from.len(), to.len());
    if from == to {
        return m.clone();
    }
    let pos: Vec<usize> = to.iter().map(|s| from.iter().position(|x| x == s).expect("same sites")).collect();
    let to_dims: Vec<usize> = pos.iter().map(|&p| from_dims[p]).collect();
    let n = m.nrows();
    // target flat index → source flat index
    let mut map = vec![0usize; n];
    let mut dig = vec![0usize; to.len()];
    let mut src = vec![0usize; to.len()];
    for (t, slot) in map.iter_mut().enumerate() {
        digits(t, &to_dims, &mut dig);
        for (k, &p) in pos.iter().enumerate() {
            src[p] = dig[k];
        }
        *slot = flatten(&src, from_dims);
    }
    Matrix::from_fn(n, n, |r, c| m[(map[r], map[c])])
}

/// Largest element-wise modulus of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn is_zero(m: &Matrix) -> bool {
    m.iter().all(|z| *z == Complex64::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permuting_a_kronecker_product_swaps_factors() {
        let a = Matrix::from_fn(2, 2, |r, c| Complex64::new((r * 2 + c) as f64, 0.0));
        let b = Matrix::from_fn(3, 3, |r, c| Complex64::new(0.0, (r * 3 + c) as f64));
        let ab = a.kronecker(&b);
        let ba = b.kronecker(&a);
        let p = permute_sites(&ab, &[SiteId(0), SiteId(1)], &[2, 3], &[SiteId(1), SiteId(0)]);
        assert_eq!(p, ba);
    }
}
