//! Radix-2 FFT and the circulant-embedding Toeplitz product.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ops;

fn transform(x: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
        if i < j {
            x.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = x[start + k];
                let b = x[start + k + len / 2] * w;
                x[start + k] = a + b;
                x[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
    ops::add((n as u64) * (bits as u64) * 2);
    Ok(())
}

/// Unnormalized forward DFT, `X_k = sum_j x_j exp(-2 pi i jk / n)`.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = x.to_vec();
    transform(&mut out, false)?;
    Ok(out)
}

/// Inverse of [`fft`] (includes the `1/n` factor).
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = x.to_vec();
    transform(&mut out, true)?;
    let scale = 1.0 / out.len() as f64;
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// `T x` for the Toeplitz matrix with the given first column and row, via a
/// circulant of power-of-two size at least `2n`.
pub fn toeplitz_matvec(first_col: &[f64], first_row: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let n = first_col.len();
    if first_row.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "Toeplitz column {n}, row {}, vector {}",
            first_row.len(),
            x.len()
        )));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    if first_col[0] != first_row[0] {
        return Err(Error::CornerMismatch);
    }
    let m = (2 * n).next_power_of_two();
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    for (i, &v) in first_col.iter().enumerate() {
        c[i].re = v;
    }
    for j in 1..n {
        c[m - j].re = first_row[j];
    }
    let mut xs = vec![Complex64::new(0.0, 0.0); m];
    for (i, &v) in x.iter().enumerate() {
        xs[i].re = v;
    }
    let cf = fft(&c)?;
    let xf = fft(&xs)?;
    let prod: Vec<Complex64> = cf.iter().zip(&xf).map(|(a, b)| a * b).collect();
    ops::add(m as u64);
    let y = ifft(&prod)?;
    Ok(y[..n].iter().map(|v| v.re).collect())
}

/// Dense Toeplitz matrix from its first column and row.
pub fn toeplitz_dense(first_col: &[f64], first_row: &[f64]) -> crate::DenseMatrix {
    let n = first_col.len();
    crate::DenseMatrix::from_fn(n, n, |i, j| if i >= j { first_col[i - j] } else { first_row[j - i] })
}
