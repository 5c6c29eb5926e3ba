//! Integer lattices spanned by exponent differences.
//!
//! A function of the angles `θ ∈ T^n` that only involves characters
//! `e^{i k·θ}` with `k` in a rank-`d` lattice `L` factors through the map
//! `θ ↦ (v_1·θ, …, v_d·θ)` for any Z-basis `v` of `L`, and that map pushes the
//! Haar measure of `T^n` onto the Haar measure of `T^d`. The integrator uses
//! this to integrate over `d` angles instead of `n`.

use num_integer::Integer;

/// A Z-basis of the lattice spanned by `vectors`, in row echelon form, with
/// the integer coordinates of every input vector in that basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub basis: Vec<Vec<i64>>,
    pub coords: Vec<Vec<i64>>,
}

impl LatticeBasis {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// Row-reduces the vectors with unimodular integer operations.
///
/// Panics if the vectors have different lengths.
pub fn lattice_basis(vectors: &[Vec<i64>], n: usize) -> LatticeBasis {
    assert!(vectors.iter().all(|v| v.len() == n), "vectors must have length {n}");
    let mut rows: Vec<Vec<i64>> = vectors.iter().filter(|v| v.iter().any(|&x| x != 0)).cloned().collect();
    let mut basis = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..n {
        // gcd-reduce the column over the remaining rows until one nonzero entry is left
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            let pivot = rows[p].clone();
            for &i in &nonzero {
                if i != p {
                    let q = Integer::div_floor(&rows[i][col], &pivot[col]);
                    for (x, y) in rows[i].iter_mut().zip(&pivot) {
                        *x -= q * y;
                    }
                }
            }
        }
        if let Some(p) = rows.iter().position(|r| r[col] != 0) {
            let mut row = rows.swap_remove(p);
            if row[col] < 0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            basis.push(row);
            pivots.push(col);
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    debug_assert!(rows.is_empty());

    let coords = vectors
        .iter()
        .map(|v| {
            let mut rest = v.clone();
            let mut c = vec![0i64; basis.len()];
            for (i, (row, &col)) in basis.iter().zip(&pivots).enumerate() {
                let q = rest[col] / row[col];
                debug_assert_eq!(rest[col] % row[col], 0);
                c[i] = q;
                for (x, y) in rest.iter_mut().zip(row) {
                    *x -= q * y;
                }
            }
            debug_assert!(rest.iter().all(|&x| x == 0));
            c
        })
        .collect();
    LatticeBasis { basis, coords }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(l: &LatticeBasis, c: &[i64], n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for (ci, row) in c.iter().zip(&l.basis) {
            for (x, y) in v.iter_mut().zip(row) {
                *x += ci * y;
            }
        }
        v
    }

    #[test]
    fn single_diagonal_vector() {
        let l = lattice_basis(&[vec![-5, -5]], 2);
        assert_eq!(l.basis, vec![vec![5, 5]]);
        assert_eq!(l.coords, vec![vec![-1]]);
    }

    #[test]
    fn gcd_is_found() {
        // 4 and 6 span 2Z
        let l = lattice_basis(&[vec![4], vec![6]], 1);
        assert_eq!(l.basis, vec![vec![2]]);
        assert_eq!(l.coords, vec![vec![2], vec![3]]);
    }

    #[test]
    fn zero_vectors_give_rank_zero() {
        let l = lattice_basis(&[vec![0, 0, 0]], 3);
        assert_eq!(l.rank(), 0);
        assert_eq!(l.coords, vec![Vec::<i64>::new()]);
    }

    #[test]
    fn coordinates_reconstruct_inputs() {
        let vs = vec![vec![2, -3, 1], vec![4, 1, 0], vec![6, -2, 1], vec![0, 7, -2], vec![1, 1, 1]];
        let l = lattice_basis(&vs, 3);
        assert_eq!(l.rank(), 3);
        for (v, c) in vs.iter().zip(&l.coords) {
            assert_eq!(&reconstruct(&l, c, 3), v);
        }
    }

    #[test]
    fn dependent_vectors_reduce_rank() {
        let vs = vec![vec![1, 2, 0], vec![2, 4, 0], vec![3, 6, 0]];
        let l = lattice_basis(&vs, 3);
        assert_eq!(l.rank(), 1);
        assert_eq!(l.basis, vec![vec![1, 2, 0]]);
    }
}
