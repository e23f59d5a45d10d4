//! The aggregation (A) and distribution (D) operators, applied matrix-free.

use std::ops::{Add, Div, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};

/// `A f`: per group, the mean of the three samples that are not discarded.
pub fn aggregate<T>(area: &[T], codes: &[u8]) -> Result<Vec<T>>
where
    T: Copy + Zero + Add<Output = T> + Sub<Output = T> + Div<f64, Output = T>,
{
    if area.len() != 4 * codes.len() {
        return Err(Error::DimensionMismatch(format!(
            "aggregate: {} samples for {} groups",
            area.len(),
            codes.len()
        )));
    }
    Ok(area
        .chunks_exact(4)
        .zip(codes)
        .map(|(g, &c)| {
            let mut sum = T::zero();
            for (i, &v) in g.iter().enumerate() {
                if i as u8 != c {
                    sum = sum + v;
                }
            }
            sum / 3.0
        })
        .collect())
}

/// `D v`: each group value copied to its four samples.
pub fn distribute<T: Copy>(values: &[T]) -> Vec<T> {
    values.iter().flat_map(|&v| [v; 4]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Dense A, built row by row the way the block-diagonal matrix is
    /// written out: ones on the sensitive entries of each group, scaled by 1/3.
    fn dense_a(codes: &[u8]) -> Vec<Vec<f64>> {
        let n = codes.len();
        (0..n)
            .map(|g| {
                let mut row = vec![0.0; 4 * n];
                for q in 0..4 {
                    if q as u8 != codes[g] {
                        row[4 * g + q] = 1.0 / 3.0;
                    }
                }
                row
            })
            .collect()
    }

    fn dense_d(groups: usize) -> Vec<Vec<f64>> {
        (0..4 * groups)
            .map(|i| (0..groups).map(|g| if i / 4 == g { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn unit_vector_example() {
        let codes = [1, 3, 2, 0];
        let mut f = vec![0.0; 16];
        f[2] = 1.0;
        let out = aggregate(&f, &codes).unwrap();
        assert_eq!(out, vec![1.0 / 3.0, 0.0, 0.0, 0.0]);
        let a = dense_a(&codes);
        assert_eq!(a[0][..4], [1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(a[1][4..8], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
    }

    #[test]
    fn ones_map_to_ones() {
        let out = aggregate(&[1.0; 16], &[0, 1, 2, 3]).unwrap();
        for v in out {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn distribute_example() {
        assert_eq!(distribute(&[0.5]), vec![0.5; 4]);
    }

    #[test]
    fn length_mismatch() {
        assert!(aggregate(&[0.0; 7], &[0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_dense_matrices(f in prop::collection::vec(-1.0f64..1.0, 16), codes in prop::collection::vec(0u8..4, 4), v in prop::collection::vec(-1.0f64..1.0, 4)) {
            let fast = aggregate(&f, &codes).unwrap();
            let dense = matvec(&dense_a(&codes), &f);
            for (a, b) in fast.iter().zip(&dense) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            let d = distribute(&v);
            let dd = matvec(&dense_d(4), &v);
            prop_assert_eq!(d, dd);
        }

        #[test]
        fn a_after_d_is_identity(v in prop::collection::vec(-10.0f64..10.0, 1..40), seed in any::<u64>()) {
            let codes: Vec<u8> = (0..v.len()).map(|i| ((seed >> (i % 32 * 2)) & 3) as u8).collect();
            let back = aggregate(&distribute(&v), &codes).unwrap();
            for (a, b) in back.iter().zip(&v) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn da_is_idempotent(re in prop::collection::vec(-1.0f64..1.0, 64), im in prop::collection::vec(-1.0f64..1.0, 64), codes in prop::collection::vec(0u8..4, 16)) {
            let f: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let once = distribute(&aggregate(&f, &codes).unwrap());
            let twice = distribute(&aggregate(&once, &codes).unwrap());
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).norm() <= 1e-12);
            }
        }
    }
}
