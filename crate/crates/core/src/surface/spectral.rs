//! Two-dimensional FFT plumbing and Fourier symbols on the periodic grid.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Axis, Zip};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for an `nx × ny` grid (axis 0 is `x`).
pub struct Spectral {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// `2πi k` per axis with the Nyquist entry zeroed.
    dx_symbol: Vec<Complex64>,
    dy_symbol: Vec<Complex64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

/// Signed wavenumber of FFT bin `i` on an axis of length `n`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn derivative_symbol(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            if n.is_multiple_of(2) && i == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * PI * wavenumber(i, n) as f64)
            }
        })
        .collect()
}

impl Spectral {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            dx_symbol: derivative_symbol(nx),
            dy_symbol: derivative_symbol(ny),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn transform(&self, data: &mut Array2<Complex64>, along_x: &dyn Fft<f64>, along_y: &dyn Fft<f64>) {
        let mut buf = vec![Complex64::default(); self.nx.max(self.ny)];
        for mut row in data.axis_iter_mut(Axis(0)) {
            let b = &mut buf[..self.ny];
            b.iter_mut().zip(row.iter()).for_each(|(d, s)| *d = *s);
            along_y.process(b);
            row.iter_mut().zip(b.iter()).for_each(|(d, s)| *d = *s);
        }
        for mut col in data.axis_iter_mut(Axis(1)) {
            let b = &mut buf[..self.nx];
            b.iter_mut().zip(col.iter()).for_each(|(d, s)| *d = *s);
            along_x.process(b);
            col.iter_mut().zip(b.iter()).for_each(|(d, s)| *d = *s);
        }
    }

    /// Unnormalised forward transform of a real field.
    pub fn forward(&self, f: &Array2<f64>) -> Array2<Complex64> {
        let mut c = f.mapv(|x| Complex64::new(x, 0.0));
        self.transform(&mut c, self.fwd_x.as_ref(), self.fwd_y.as_ref());
        c
    }

    /// Inverse transform (normalised) keeping the real part.
    pub fn inverse_real(&self, mut c: Array2<Complex64>) -> Array2<f64> {
        self.transform(&mut c, self.inv_x.as_ref(), self.inv_y.as_ref());
        let scale = 1.0 / (self.nx * self.ny) as f64;
        c.mapv(|z| z.re * scale)
    }

    /// Multiplies the spectrum by `symbol(i, j)` and transforms back.
    pub fn apply<S>(&self, f: &Array2<f64>, symbol: S) -> Array2<f64>
    where
        S: Fn(usize, usize) -> Complex64,
    {
        let mut c = self.forward(f);
        c.indexed_iter_mut().for_each(|((i, j), z)| *z *= symbol(i, j));
        self.inverse_real(c)
    }

    pub fn dx_symbol(&self, i: usize) -> Complex64 {
        self.dx_symbol[i]
    }

    pub fn dy_symbol(&self, j: usize) -> Complex64 {
        self.dy_symbol[j]
    }

    /// Flat Laplacian symbol `−(2π)²(kx² + ky²)`, Nyquist modes included.
    pub fn laplacian_symbol(&self, i: usize, j: usize) -> f64 {
        let kx = wavenumber(i, self.nx) as f64;
        let ky = wavenumber(j, self.ny) as f64;
        -(2.0 * PI).powi(2) * (kx * kx + ky * ky)
    }

    pub fn dx(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply(f, |i, _| self.dx_symbol[i])
    }

    pub fn dy(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply(f, |_, j| self.dy_symbol[j])
    }

    pub fn dxy(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply(f, |i, j| self.dx_symbol[i] * self.dy_symbol[j])
    }

    pub fn laplacian(&self, f: &Array2<f64>) -> Array2<f64> {
        self.apply(f, |i, j| Complex64::new(self.laplacian_symbol(i, j), 0.0))
    }

    /// Mean-zero `u` with `Δu = g`; the mean of `g` is discarded.
    pub fn inverse_laplacian(&self, g: &Array2<f64>) -> Array2<f64> {
        self.apply(g, |i, j| {
            let l = self.laplacian_symbol(i, j);
            if l == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / l, 0.0)
            }
        })
    }

    /// Mean-zero `h` minimising `‖dh − (a dx + b dy)‖₂`.
    pub fn potential(&self, a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        let ca = self.forward(a);
        let cb = self.forward(b);
        let mut out = Array2::<Complex64>::zeros((self.nx, self.ny));
        Zip::indexed(&mut out)
            .and(&ca)
            .and(&cb)
            .for_each(|(i, j), o, &za, &zb| {
                let sx = self.dx_symbol[i];
                let sy = self.dy_symbol[j];
                let denom = sx.norm_sqr() + sy.norm_sqr();
                if denom > 0.0 {
                    *o = (sx.conj() * za + sy.conj() * zb) / denom;
                }
            });
        self.inverse_real(out)
    }

    /// Normalised Fourier coefficients `f̂ / (nx·ny)`.
    pub fn coefficients(&self, f: &Array2<f64>) -> Array2<Complex64> {
        let scale = 1.0 / (self.nx * self.ny) as f64;
        self.forward(f).mapv(|z| z * scale)
    }
}
