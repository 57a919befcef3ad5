//! Moser reparametrisation: given `f` with `∫f*ω = ∫σ`, find `φ` with
//! `(f∘φ)*ω ≈ σ`.
//!
//! Along the path `ρ_t = (1−t)ρ + t s` (with `s` the pullback density) the
//! field `X_t = −∇u/ρ_t`, where `Δu = s − ρ`, satisfies `ι_{X_t}ω_t = −β` for
//! `β = −u_y dx + u_x dy`, `dβ = (s − ρ) dx∧dy`. Its time-one flow pulls
//! `f*ω` back to `σ`.

use serde::{Deserialize, Serialize};

use crate::embedding::{is_symplectic_embedding, reparametrize, Embedding};
use crate::error::{Error, Result};
use crate::surface::{flow_diffeo, mean, poisson_solve, AreaForm, GridDiffeo, InterpolationMode};

/// Largest tolerated difference of total areas.
pub const AREA_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserOptions {
    pub steps: usize,
    pub tol: f64,
    pub interpolation: InterpolationMode,
}

impl Default for MoserOptions {
    fn default() -> Self {
        Self {
            steps: 50,
            tol: 1e-4,
            interpolation: InterpolationMode::Bicubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserDiagnostics {
    /// `min_{t,p} ρ_t(p)`, attained at an endpoint.
    pub min_path_density: f64,
    pub steps: usize,
    /// Area mismatch removed before the Poisson solve.
    pub area_defect: f64,
    pub min_jacobian: f64,
}

#[derive(Debug, Clone)]
pub struct MoserResult {
    pub phi: GridDiffeo,
    pub embedding: Embedding,
    /// `‖(f∘φ)*ω − σ‖∞` recomputed from `embedding`.
    pub residual: f64,
    pub converged: bool,
    pub diagnostics: MoserDiagnostics,
}

pub fn moser_reparametrize(f: &Embedding, sigma: &AreaForm, steps: usize, tol: f64) -> Result<MoserResult> {
    moser_reparametrize_with(
        f,
        sigma,
        &MoserOptions {
            steps,
            tol,
            ..MoserOptions::default()
        },
    )
}

pub fn moser_reparametrize_with(f: &Embedding, sigma: &AreaForm, opts: &MoserOptions) -> Result<MoserResult> {
    let grid = f.grid();
    grid.check(sigma.density())?;
    if opts.steps == 0 {
        return Err(Error::InvalidArgument("steps must be ≥ 1".into()));
    }
    let s = f.pullback_density();
    let rho = sigma.density();
    let pullback = mean(s);
    let target = mean(rho);
    if (pullback - target).abs() > AREA_TOL {
        return Err(Error::AreaMismatch { pullback, target });
    }
    // ρ_t is affine in t, so its minimum sits at t = 0 or t = 1.
    let min_path_density = s.iter().chain(rho.iter()).copied().fold(f64::INFINITY, f64::min);
    if !(min_path_density > 0.0) {
        return Err(Error::NonPositivePath {
            min_density: min_path_density,
        });
    }
    let mut g = s - rho;
    let area_defect = mean(&g);
    g -= area_defect;
    let u = poisson_solve(grid, &g)?;
    let sp = grid.spectral();
    let mode = opts.interpolation;
    let ux = grid.interpolant(&sp.dx(&u), mode)?;
    let uy = grid.interpolant(&sp.dy(&u), mode)?;
    let rho_i = grid.interpolant(rho, mode)?;
    let s_i = grid.interpolant(s, mode)?;
    let phi = flow_diffeo(
        grid,
        |t, x, y| {
            let rt = (1.0 - t) * rho_i.eval(x, y) + t * s_i.eval(x, y);
            [-ux.eval(x, y) / rt, -uy.eval(x, y) / rt]
        },
        1.0,
        opts.steps,
    )?;
    let embedding = reparametrize(f, &phi, mode)?;
    let residual = is_symplectic_embedding(&embedding, sigma, opts.tol)?.residual;
    Ok(MoserResult {
        diagnostics: MoserDiagnostics {
            min_path_density,
            steps: opts.steps,
            area_defect,
            min_jacobian: phi.min_jacobian(),
        },
        phi,
        embedding,
        residual,
        converged: residual <= opts.tol,
    })
}

/// Solves `u + (a/2π) sin(2πu) = x` by Newton's method (`|a| < 1`).
pub fn sheared_inverse(a: f64, x: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut u = x;
    for _ in 0..50 {
        let r = u + a / tau * (tau * u).sin() - x;
        let d = 1.0 + a * (tau * u).cos();
        let step = r / d;
        u -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientModel;
    use crate::embedding::Embedding;
    use crate::surface::TorusGrid;
    use std::sync::Arc;

    fn model() -> Arc<AmbientModel> {
        Arc::new(AmbientModel::standard(2).unwrap())
    }

    #[test]
    fn normalised_embedding_is_fixed() {
        let g = TorusGrid::square(32).unwrap();
        let f = Embedding::flat(model(), &g).unwrap();
        let r = moser_reparametrize(&f, &AreaForm::unit(&g), 10, 1e-12).unwrap();
        assert!(r.residual <= 1e-12 && r.converged);
        assert!(r.phi.distance_from_identity() == 0.0);
    }

    #[test]
    fn sheared_family_matches_oracle() {
        let g = TorusGrid::square(64).unwrap();
        let a = 0.3;
        let f = Embedding::sheared(model(), &g, a).unwrap();
        let r = moser_reparametrize(&f, &AreaForm::unit(&g), 50, 1e-4).unwrap();
        assert!(r.residual <= 1e-4, "residual {}", r.residual);
        let oracle = GridDiffeo::from_map(&g, |x, y| [sheared_inverse(a, x), y]).unwrap();
        let d = r.phi.distance(&oracle).unwrap();
        assert!(d <= 1e-4, "oracle distance {d}");
        assert!(r.diagnostics.min_jacobian > 0.0);
    }

    #[test]
    fn area_mismatch_is_rejected() {
        let g = TorusGrid::square(16).unwrap();
        let f = Embedding::linear(model(), &g, vec![[2, 0], [0, 1], [0, 0], [0, 0]], &[0.0; 4]).unwrap();
        assert!(matches!(
            moser_reparametrize(&f, &AreaForm::unit(&g), 10, 1e-4),
            Err(Error::AreaMismatch { .. })
        ));
    }

    #[test]
    fn output_is_a_fixed_point() {
        let g = TorusGrid::square(64).unwrap();
        let f = Embedding::sheared(model(), &g, 0.2).unwrap();
        let sigma = AreaForm::unit(&g);
        let r = moser_reparametrize(&f, &sigma, 50, 1e-4).unwrap();
        let again = moser_reparametrize(&r.embedding, &sigma, 50, 1e-4).unwrap();
        assert!(again.phi.distance_from_identity() <= 1e-6);
    }

    #[test]
    fn newton_inverse() {
        for x in [0.0, 0.1, 0.5, 0.93] {
            let u = sheared_inverse(0.3, x);
            assert!((u + 0.3 / (2.0 * std::f64::consts::PI) * (2.0 * std::f64::consts::PI * u).sin() - x).abs() < 1e-15);
        }
    }
}
