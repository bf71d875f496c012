use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Subtracts the sample mean.
pub fn detrend(series: &[f64]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series.iter().map(|v| v - mean).collect()
}

/// Sample Pearson correlation; NaN when either input is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return f64::NAN;
    }
    let da = detrend(&a[..n]);
    let db = detrend(&b[..n]);
    let sab: f64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
    let saa: f64 = da.iter().map(|x| x * x).sum();
    let sbb: f64 = db.iter().map(|x| x * x).sum();
    sab / (saa * sbb).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with one reorthogonalization pass; outputs have unit norm and output
/// `j` spans the same space as inputs `0..=j`.
pub fn gram_schmidt_orthogonalize(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidSeries("columns differ in length"));
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for (j, col) in columns.iter().enumerate() {
        let original = dot(col, col).sqrt();
        let mut v = col.clone();
        for _pass in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(original > 0.0) || norm <= 1e-10 * original {
            return Err(Error::RankDeficient {
                columns: alloc::vec![format!("column {j}")],
            });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn detrend_examples() {
        assert_eq!(detrend(&[1.0, 2.0, 3.0]), vec![-1.0, 0.0, 1.0]);
        assert_eq!(detrend(&[4.5; 6]), vec![0.0; 6]);
        let x = [0.1, 7.3, -2.2, 1e3, 5.0];
        let once = detrend(&x);
        let twice = detrend(&once);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_examples() {
        let e1 = vec![1.0, 0.0, 0.0];
        let e12 = vec![1.0, 1.0, 0.0];
        let q = gram_schmidt_orthogonalize(&[e1.clone(), e12]).unwrap();
        assert_eq!(q[0], e1);
        assert!(dot(&q[0], &q[1]).abs() < 1e-15);
        assert!((q[1][1] - 1.0).abs() < 1e-15);

        let ortho = gram_schmidt_orthogonalize(&[vec![2.0, 0.0], vec![0.0, -3.0]]).unwrap();
        assert_eq!(ortho, vec![vec![1.0, 0.0], vec![0.0, -1.0]]);

        assert!(gram_schmidt_orthogonalize(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }

    #[test]
    fn random_columns_span_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..25).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let q = gram_schmidt_orthogonalize(&cols).unwrap();
        for i in 0..3 {
            assert!((dot(&q[i], &q[i]) - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(dot(&q[i], &q[j]).abs() < 1e-10);
            }
            // input i lies in span(q_0..=q_i)
            let mut resid = cols[i].clone();
            for qj in &q[..=i] {
                let c = dot(qj, &cols[i]);
                resid.iter_mut().zip(qj).for_each(|(x, y)| *x -= c * y);
            }
            assert!(dot(&resid, &resid).sqrt() < 1e-10);
        }
    }

    #[test]
    fn correlation_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[-1.0, -2.0, -3.0, -4.0]) + 1.0).abs() < 1e-15);
        assert!(correlation(&a, &[1.0; 4]).is_nan());
    }
}
