//! Grid diffeomorphisms of `T²` and flows of surface vector fields.

use ndarray::{Array2, Array3, Axis};
use rayon::prelude::*;

use super::{AreaForm, InterpolationMode, SurfaceField, TorusGrid};
use crate::error::{Error, Result};

/// `φ(p) = p + d(p)` sampled on the grid, with `d` periodic. Values are
/// unreduced lifts in `ℝ²`.
#[derive(Debug, Clone)]
pub struct GridDiffeo {
    grid: TorusGrid,
    displacement: Array3<f64>,
    /// `∂φ^a/∂x^b` as `(nx, ny, 4)` in row-major `[a][b]` order.
    jacobian: Array3<f64>,
}

impl GridDiffeo {
    pub fn identity(grid: &TorusGrid) -> Self {
        Self::from_displacement(grid, Array3::zeros((grid.nx(), grid.ny(), 2)))
            .expect("identity has unit Jacobian")
    }

    pub fn translation(grid: &TorusGrid, c: [f64; 2]) -> Self {
        let mut d = Array3::zeros((grid.nx(), grid.ny(), 2));
        d.index_axis_mut(Axis(2), 0).fill(c[0]);
        d.index_axis_mut(Axis(2), 1).fill(c[1]);
        Self::from_displacement(grid, d).expect("translations have unit Jacobian")
    }

    /// Samples a map whose lift minus the identity is periodic.
    pub fn from_map(grid: &TorusGrid, map: impl Fn(f64, f64) -> [f64; 2]) -> Result<Self> {
        let mut d = Array3::zeros((grid.nx(), grid.ny(), 2));
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let p = grid.point(i, j);
                let q = map(p[0], p[1]);
                d[[i, j, 0]] = q[0] - p[0];
                d[[i, j, 1]] = q[1] - p[1];
            }
        }
        Self::from_displacement(grid, d)
    }

    /// Rejects maps whose Jacobian determinant is not positive everywhere.
    pub fn from_displacement(grid: &TorusGrid, displacement: Array3<f64>) -> Result<Self> {
        if displacement.dim() != (grid.nx(), grid.ny(), 2) {
            return Err(Error::GridMismatch);
        }
        let sp = grid.spectral();
        let mut jacobian = Array3::zeros((grid.nx(), grid.ny(), 4));
        for a in 0..2 {
            let comp = displacement.index_axis(Axis(2), a).to_owned();
            let dx = sp.dx(&comp);
            let dy = sp.dy(&comp);
            jacobian.index_axis_mut(Axis(2), 2 * a).assign(&dx);
            jacobian.index_axis_mut(Axis(2), 2 * a + 1).assign(&dy);
        }
        jacobian.index_axis_mut(Axis(2), 0).mapv_inplace(|v| v + 1.0);
        jacobian.index_axis_mut(Axis(2), 3).mapv_inplace(|v| v + 1.0);
        let out = Self {
            grid: grid.clone(),
            displacement,
            jacobian,
        };
        let min_jacobian = out.min_jacobian();
        if !(min_jacobian > 0.0) {
            return Err(Error::MeshFolding { min_jacobian });
        }
        Ok(out)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn displacement(&self) -> &Array3<f64> {
        &self.displacement
    }

    /// `φ(x_i, y_j)` as an unreduced lift.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let p = self.grid.point(i, j);
        [p[0] + self.displacement[[i, j, 0]], p[1] + self.displacement[[i, j, 1]]]
    }

    pub fn jacobian(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let m = |k| self.jacobian[[i, j, k]];
        [[m(0), m(1)], [m(2), m(3)]]
    }

    pub fn jacobian_determinant(&self) -> Array2<f64> {
        Array2::from_shape_fn(self.grid.shape(), |(i, j)| {
            let m = self.jacobian(i, j);
            m[0][0] * m[1][1] - m[0][1] * m[1][0]
        })
    }

    pub fn min_jacobian(&self) -> f64 {
        self.jacobian_determinant()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest torus distance between `φ(p)` and `other(p)` over the grid.
    pub fn distance(&self, other: &GridDiffeo) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut m = 0.0f64;
        for (a, b) in self.displacement.iter().zip(other.displacement.iter()) {
            let d = a - b;
            m = m.max((d - d.round()).abs());
        }
        Ok(m)
    }

    pub fn distance_from_identity(&self) -> f64 {
        self.displacement
            .iter()
            .fold(0.0f64, |m, d| m.max((d - d.round()).abs()))
    }

    /// Density of `φ*σ`, i.e. `ρ(φ(p)) det Dφ(p)`.
    pub fn pullback_density(&self, sigma: &AreaForm, mode: InterpolationMode) -> Result<Array2<f64>> {
        let rho = self.grid.interpolant(sigma.density(), mode)?;
        let det = self.jacobian_determinant();
        Ok(Array2::from_shape_fn(self.grid.shape(), |(i, j)| {
            let q = self.point(i, j);
            rho.eval(q[0], q[1]) * det[[i, j]]
        }))
    }
}

/// Integrates every grid point under the time-dependent field
/// `velocity(t, x, y)` with `steps` RK4 steps over `[0, t_final]`.
pub fn flow_diffeo<F>(grid: &TorusGrid, velocity: F, t_final: f64, steps: usize) -> Result<GridDiffeo>
where
    F: Fn(f64, f64, f64) -> [f64; 2] + Sync,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be ≥ 1".into()));
    }
    let dt = t_final / steps as f64;
    let (nx, ny) = grid.shape();
    let finals: Vec<[f64; 2]> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let mut p = grid.point(k / ny, k % ny);
            for s in 0..steps {
                let t = s as f64 * dt;
                let k1 = velocity(t, p[0], p[1]);
                let k2 = velocity(t + dt / 2.0, p[0] + dt / 2.0 * k1[0], p[1] + dt / 2.0 * k1[1]);
                let k3 = velocity(t + dt / 2.0, p[0] + dt / 2.0 * k2[0], p[1] + dt / 2.0 * k2[1]);
                let k4 = velocity(t + dt, p[0] + dt * k3[0], p[1] + dt * k3[1]);
                for c in 0..2 {
                    p[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
            }
            p
        })
        .collect();
    let mut d = Array3::zeros((nx, ny, 2));
    for (k, q) in finals.iter().enumerate() {
        let (i, j) = (k / ny, k % ny);
        let p = grid.point(i, j);
        d[[i, j, 0]] = q[0] - p[0];
        d[[i, j, 1]] = q[1] - p[1];
    }
    GridDiffeo::from_displacement(grid, d)
}

/// Flow of an autonomous grid field, interpolated off-grid with `mode`.
pub fn flow_surface_field(
    grid: &TorusGrid,
    field: &SurfaceField,
    t_final: f64,
    steps: usize,
    mode: InterpolationMode,
) -> Result<GridDiffeo> {
    let fx = grid.interpolant(&field.x, mode)?;
    let fy = grid.interpolant(&field.y, mode)?;
    flow_diffeo(grid, |_, x, y| [fx.eval(x, y), fy.eval(x, y)], t_final, steps)
}

#[cfg(test)]
mod tests {
    use super::super::{max_abs, surface_hamiltonian_field};
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_gives_identity() {
        let g = TorusGrid::square(16).unwrap();
        let phi = flow_surface_field(&g, &SurfaceField::zeros(&g), 1.0, 10, InterpolationMode::Bicubic).unwrap();
        assert_eq!(phi.distance_from_identity(), 0.0);
    }

    #[test]
    fn constant_field_translates() {
        let g = TorusGrid::square(16).unwrap();
        let phi = flow_surface_field(&g, &SurfaceField::constant(&g, [0.3, 0.0]), 1.0, 7, InterpolationMode::Bicubic)
            .unwrap();
        let t = GridDiffeo::translation(&g, [0.3, 0.0]);
        assert!(phi.distance(&t).unwrap() < 1e-14);
        assert!((phi.min_jacobian() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn folding_maps_are_rejected() {
        let g = TorusGrid::square(32).unwrap();
        let r = GridDiffeo::from_map(&g, |x, y| [x + 0.3 * (2.0 * PI * x).sin(), y]);
        assert!(matches!(r, Err(Error::MeshFolding { .. })));
    }

    #[test]
    fn hamiltonian_flow_preserves_area_with_convergence() {
        let g = TorusGrid::square(32).unwrap();
        let sigma = AreaForm::unit(&g);
        let psi = g.sample(|x, y| 0.01 * ((2.0 * PI * x).cos() + (2.0 * PI * (x + y)).sin()));
        let field = surface_hamiltonian_field(&g, &psi, &sigma).unwrap();
        let err = |steps| {
            let phi = flow_surface_field(&g, &field, 1.0, steps, InterpolationMode::Fourier).unwrap();
            max_abs(&(phi.pullback_density(&sigma, InterpolationMode::Fourier).unwrap() - 1.0))
        };
        let coarse = err(4);
        let fine = err(8);
        assert!(fine < 1e-5, "fine residual {fine} coarse {coarse}");
        assert!(coarse / fine > 8.0, "ratio {}", coarse / fine);
    }
}
