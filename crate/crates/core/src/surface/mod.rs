//! Periodic spectral calculus on the flat 2-torus `Σ = T²`.
//!
//! Scalar fields are `nx × ny` arrays indexed `[i, j]` at the collocation point
//! `(i/nx, j/ny)`. A 1-form `a dx + b dy` stores `(a, b)`, a 2-form `g dx∧dy`
//! stores `g`, and an area form `σ = ρ dx∧dy` stores a positive density `ρ`.
//!
//! Inputs are assumed band-limited; aliasing is the caller's responsibility.

mod diffeo;
mod interp;
mod spectral;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};

pub use diffeo::{flow_diffeo, flow_surface_field, GridDiffeo};
pub use interp::{Interpolant, InterpolationMode};
pub use spectral::{wavenumber, Spectral};

/// Smallest admissible grid size per axis.
pub const MIN_GRID: usize = 8;

/// Periodic `nx × ny` collocation grid with shared FFT plans.
#[derive(Clone)]
pub struct TorusGrid {
    nx: usize,
    ny: usize,
    spectral: Arc<Spectral>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusGrid({}×{})", self.nx, self.ny)
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_GRID || ny < MIN_GRID {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least {MIN_GRID}×{MIN_GRID}, got {nx}×{ny}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            spectral: Arc::new(Spectral::new(nx, ny)),
        })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 / self.nx as f64, j as f64 / self.ny as f64]
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros((self.nx, self.ny))
    }

    pub fn constant(&self, value: f64) -> Array2<f64> {
        Array2::from_elem((self.nx, self.ny), value)
    }

    /// Samples `f(x, y)` at every collocation point.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((self.nx, self.ny), |(i, j)| {
            let [x, y] = self.point(i, j);
            f(x, y)
        })
    }

    pub fn check(&self, f: &Array2<f64>) -> Result<()> {
        if f.dim() != (self.nx, self.ny) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn interpolant(&self, f: &Array2<f64>, mode: InterpolationMode) -> Result<Interpolant> {
        self.check(f)?;
        Ok(Interpolant::new(&self.spectral, f, mode))
    }
}

/// `σ = ρ dx∧dy` with `ρ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaForm {
    density: Array2<f64>,
}

impl AreaForm {
    pub fn new(grid: &TorusGrid, density: Array2<f64>) -> Result<Self> {
        grid.check(&density)?;
        let min = density.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || density.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "area density must be positive and finite (min {min})"
            )));
        }
        Ok(Self { density })
    }

    pub fn unit(grid: &TorusGrid) -> Self {
        Self::constant(grid, 1.0).expect("unit density is positive")
    }

    pub fn constant(grid: &TorusGrid, value: f64) -> Result<Self> {
        Self::new(grid, grid.constant(value))
    }

    pub fn density(&self) -> &Array2<f64> {
        &self.density
    }

    /// `∫σ`, the mean density on the unit-area torus.
    pub fn total_area(&self) -> f64 {
        mean(&self.density)
    }

    pub fn as_two_form(&self) -> TwoFormGrid {
        TwoFormGrid {
            density: self.density.clone(),
        }
    }
}

/// `a dx + b dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormGrid {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

impl OneFormGrid {
    pub fn new(grid: &TorusGrid, a: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        grid.check(&a)?;
        grid.check(&b)?;
        Ok(Self { a, b })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            a: grid.zeros(),
            b: grid.zeros(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.a).max(max_abs(&self.b))
    }

    /// Periods over the generator cycles, i.e. the component means.
    pub fn periods(&self) -> [f64; 2] {
        [mean(&self.a), mean(&self.b)]
    }
}

/// `g dx∧dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormGrid {
    pub density: Array2<f64>,
}

impl TwoFormGrid {
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.density)
    }
}

/// A vector field `X¹ ∂_x + X² ∂_y` on `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceField {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl SurfaceField {
    pub fn new(grid: &TorusGrid, x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        grid.check(&x)?;
        grid.check(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            x: grid.zeros(),
            y: grid.zeros(),
        }
    }

    pub fn constant(grid: &TorusGrid, c: [f64; 2]) -> Self {
        Self {
            x: grid.constant(c[0]),
            y: grid.constant(c[1]),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.x).max(max_abs(&self.y))
    }
}

pub fn mean(f: &Array2<f64>) -> f64 {
    f.sum() / f.len() as f64
}

pub fn max_abs(f: &Array2<f64>) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Objects the exterior derivative applies to.
pub trait Differentiable {
    type Output;
    fn exterior_derivative(&self, grid: &TorusGrid) -> Result<Self::Output>;
}

impl Differentiable for Array2<f64> {
    type Output = OneFormGrid;
    fn exterior_derivative(&self, grid: &TorusGrid) -> Result<OneFormGrid> {
        grid.check(self)?;
        Ok(OneFormGrid {
            a: grid.spectral.dx(self),
            b: grid.spectral.dy(self),
        })
    }
}

impl Differentiable for OneFormGrid {
    type Output = TwoFormGrid;
    fn exterior_derivative(&self, grid: &TorusGrid) -> Result<TwoFormGrid> {
        grid.check(&self.a)?;
        grid.check(&self.b)?;
        let by = grid.spectral.dx(&self.b);
        let ay = grid.spectral.dy(&self.a);
        Ok(TwoFormGrid { density: by - ay })
    }
}

/// Spectral exterior derivative of a scalar (giving a 1-form) or a 1-form
/// (giving a 2-form).
pub fn exterior_derivative<T: Differentiable>(grid: &TorusGrid, x: &T) -> Result<T::Output> {
    x.exterior_derivative(grid)
}

/// `∫_Σ g dx∧dy` by the trapezoidal rule.
pub fn integrate(grid: &TorusGrid, g: &TwoFormGrid) -> Result<f64> {
    grid.check(&g.density)?;
    Ok(mean(&g.density))
}

/// `∫_Σ h σ`.
pub fn integrate_scalar(grid: &TorusGrid, h: &Array2<f64>, sigma: &AreaForm) -> Result<f64> {
    grid.check(h)?;
    grid.check(&sigma.density)?;
    Ok(Zip::from(h).and(&sigma.density).fold(0.0, |acc, &a, &b| acc + a * b) / h.len() as f64)
}

/// `α = dh + p_x dx + p_y dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    /// Mean-zero potential `h`.
    pub potential: Array2<f64>,
    pub periods: [f64; 2],
    /// `‖dα‖∞`.
    pub closedness: f64,
    /// `‖dh + p − α‖∞`.
    pub reconstruction: f64,
}

impl HodgeSplit {
    pub fn is_exact(&self, tol: f64) -> bool {
        self.periods[0].abs().max(self.periods[1].abs()) <= tol
    }
}

/// Splits a closed 1-form into exact part and flat harmonic part. Fails with
/// the closedness residual when `‖dα‖∞ > closed_tol`.
pub fn hodge_split(grid: &TorusGrid, alpha: &OneFormGrid, closed_tol: f64) -> Result<HodgeSplit> {
    let closedness = exterior_derivative(grid, alpha)?.max_abs();
    if closedness > closed_tol {
        return Err(Error::NotClosed {
            residual: closedness,
        });
    }
    Ok(hodge_split_unchecked(grid, alpha, closedness))
}

pub(crate) fn hodge_split_unchecked(grid: &TorusGrid, alpha: &OneFormGrid, closedness: f64) -> HodgeSplit {
    let periods = alpha.periods();
    let potential = grid.spectral.potential(&alpha.a, &alpha.b);
    let dx = grid.spectral.dx(&potential);
    let dy = grid.spectral.dy(&potential);
    let ra = Zip::from(&dx)
        .and(&alpha.a)
        .fold(0.0f64, |m, &d, &a| m.max((d + periods[0] - a).abs()));
    let rb = Zip::from(&dy)
        .and(&alpha.b)
        .fold(0.0f64, |m, &d, &b| m.max((d + periods[1] - b).abs()));
    HodgeSplit {
        potential,
        periods,
        closedness,
        reconstruction: ra.max(rb),
    }
}

/// Largest mean tolerated by [`poisson_solve`].
pub const POISSON_MEAN_TOL: f64 = 1e-10;

/// Mean-zero `u` with `Δu = g`.
pub fn poisson_solve(grid: &TorusGrid, g: &Array2<f64>) -> Result<Array2<f64>> {
    grid.check(g)?;
    let m = mean(g);
    if m.abs() > POISSON_MEAN_TOL {
        return Err(Error::NonZeroMean { mean: m });
    }
    Ok(grid.spectral.inverse_laplacian(g))
}

pub fn laplacian(grid: &TorusGrid, u: &Array2<f64>) -> Result<Array2<f64>> {
    grid.check(u)?;
    Ok(grid.spectral.laplacian(u))
}

/// `ι_X σ = ρX¹ dy − ρX² dx`.
pub fn contract_area(grid: &TorusGrid, x: &SurfaceField, sigma: &AreaForm) -> Result<OneFormGrid> {
    grid.check(&x.x)?;
    grid.check(&x.y)?;
    grid.check(&sigma.density)?;
    let rho = &sigma.density;
    Ok(OneFormGrid {
        a: -(&x.y * rho),
        b: &x.x * rho,
    })
}

/// `‖d(ι_X σ)‖∞`, which vanishes exactly when `L_X σ = 0`.
pub fn area_preservation_residual(grid: &TorusGrid, x: &SurfaceField, sigma: &AreaForm) -> Result<f64> {
    Ok(exterior_derivative(grid, &contract_area(grid, x, sigma)?)?.max_abs())
}

/// The field with `ι_X σ = −dψ`: `X = (−∂_yψ/ρ, ∂_xψ/ρ)`.
pub fn surface_hamiltonian_field(grid: &TorusGrid, psi: &Array2<f64>, sigma: &AreaForm) -> Result<SurfaceField> {
    grid.check(&sigma.density)?;
    let d = exterior_derivative(grid, psi)?;
    let rho = &sigma.density;
    Ok(SurfaceField {
        x: -(&d.b / rho),
        y: &d.a / rho,
    })
}

/// `{ψ₁, ψ₂} = dψ₁(X_{ψ₂}) = (∂_yψ₁ ∂_xψ₂ − ∂_xψ₁ ∂_yψ₂)/ρ`.
///
/// With `ρ = 1`, `{cos(2πx)/2π, cos(2πy)/2π} = −sin(2πx) sin(2πy)`.
pub fn poisson_bracket(
    grid: &TorusGrid,
    psi1: &Array2<f64>,
    psi2: &Array2<f64>,
    sigma: &AreaForm,
) -> Result<Array2<f64>> {
    let d1 = exterior_derivative(grid, psi1)?;
    let x2 = surface_hamiltonian_field(grid, psi2, sigma)?;
    Ok(&d1.a * &x2.x + &d1.b * &x2.y)
}
