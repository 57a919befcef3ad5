//! Off-grid evaluation of periodic grid fields.

use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{wavenumber, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationMode {
    /// Periodic bicubic Hermite patches fed with spectral derivatives (`O(h⁴)`).
    #[default]
    Bicubic,
    /// Direct trigonometric summation; exact for band-limited data, `O(N²)` per point.
    Fourier,
}

#[derive(Debug, Clone)]
enum Data {
    Hermite {
        f: Array2<f64>,
        fx: Array2<f64>,
        fy: Array2<f64>,
        fxy: Array2<f64>,
    },
    Fourier(Array2<Complex64>),
}

/// A scalar grid field prepared for evaluation at arbitrary points of `T²`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    nx: usize,
    ny: usize,
    data: Data,
}

fn hermite_basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    ]
}

fn cell(coord: f64, n: usize) -> (usize, usize, f64) {
    let u = (coord - coord.floor()) * n as f64;
    let mut i = u.floor() as usize;
    let mut t = u - i as f64;
    if i >= n {
        i = n - 1;
        t = 1.0;
    }
    (i, (i + 1) % n, t)
}

impl Interpolant {
    pub fn new(spectral: &Spectral, f: &Array2<f64>, mode: InterpolationMode) -> Self {
        let (nx, ny) = spectral.shape();
        let data = match mode {
            InterpolationMode::Bicubic => Data::Hermite {
                f: f.clone(),
                fx: spectral.dx(f),
                fy: spectral.dy(f),
                fxy: spectral.dxy(f),
            },
            InterpolationMode::Fourier => Data::Fourier(spectral.coefficients(f)),
        };
        Self { nx, ny, data }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.data {
            Data::Hermite { f, fx, fy, fxy } => {
                let hx = 1.0 / self.nx as f64;
                let hy = 1.0 / self.ny as f64;
                let (i0, i1, tx) = cell(x, self.nx);
                let (j0, j1, ty) = cell(y, self.ny);
                let bx = hermite_basis(tx);
                let by = hermite_basis(ty);
                // Value and derivative weights per corner along each axis.
                let wx = [(i0, bx[0], bx[1] * hx), (i1, bx[2], bx[3] * hx)];
                let wy = [(j0, by[0], by[1] * hy), (j1, by[2], by[3] * hy)];
                let mut acc = 0.0;
                for &(i, vx, dx) in &wx {
                    for &(j, vy, dy) in &wy {
                        acc += vx * vy * f[[i, j]]
                            + dx * vy * fx[[i, j]]
                            + vx * dy * fy[[i, j]]
                            + dx * dy * fxy[[i, j]];
                    }
                }
                acc
            }
            Data::Fourier(c) => {
                let ex: Vec<Complex64> = (0..self.nx)
                    .map(|i| Complex64::from_polar(1.0, 2.0 * PI * wavenumber(i, self.nx) as f64 * x))
                    .collect();
                let ey: Vec<Complex64> = (0..self.ny)
                    .map(|j| Complex64::from_polar(1.0, 2.0 * PI * wavenumber(j, self.ny) as f64 * y))
                    .collect();
                let mut acc = 0.0;
                for (i, exi) in ex.iter().enumerate() {
                    let mut row = Complex64::new(0.0, 0.0);
                    for (j, eyj) in ey.iter().enumerate() {
                        row += c[[i, j]] * eyj;
                    }
                    acc += (row * exi).re;
                }
                acc
            }
        }
    }
}
