//! Embeddings `f: Σ → M` as grid data: pullback forms, the 1-forms `α_v`,
//! the tangential/ω-orthogonal splitting, closed/exact classification,
//! Hamiltonian restrictions and reparametrisations.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::ambient::{hamiltonian_vector, AmbientModel, AmbientSymplectomorphism, ScalarHamiltonian};
use crate::error::{Error, Result};
use crate::surface::{
    self, exterior_derivative, AreaForm, GridDiffeo, InterpolationMode, OneFormGrid, SurfaceField, TorusGrid,
    TwoFormGrid,
};

/// Smallest accepted Gram determinant of the differential.
pub const IMMERSION_THRESHOLD: f64 = 1e-8;

/// One Fourier term `cos·cos(2π k·p) + sin·sin(2π k·p)` added to lift component `component`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftTerm {
    pub component: usize,
    pub frequency: [i64; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl LiftTerm {
    fn value(&self, x: f64, y: f64) -> f64 {
        let t = 2.0 * PI * (self.frequency[0] as f64 * x + self.frequency[1] as f64 * y);
        self.cos * t.cos() + self.sin * t.sin()
    }
}

/// A section of `f*TM`, globally trivialised: one `ℝ^{2n}` vector per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    data: Array3<f64>,
}

impl TangentField {
    pub fn new(grid: &TorusGrid, data: Array3<f64>) -> Result<Self> {
        let (nx, ny, _) = data.dim();
        if (nx, ny) != grid.shape() {
            return Err(Error::GridMismatch);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tangent field has non-finite values".into()));
        }
        Ok(Self {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn zeros(grid: &TorusGrid, dim: usize) -> Self {
        Self {
            data: Array3::zeros((grid.nx(), grid.ny(), dim)),
        }
    }

    pub fn constant(grid: &TorusGrid, v: &[f64]) -> Self {
        Self::from_fn(grid, v.len(), |_, _, out| out.copy_from_slice(v))
    }

    /// `fill(x, y, out)` writes the vector at `(x, y)` into `out`.
    pub fn from_fn(grid: &TorusGrid, dim: usize, fill: impl Fn(f64, f64, &mut [f64])) -> Self {
        let mut data = Array3::zeros((grid.nx(), grid.ny(), dim));
        let slice = data.as_slice_mut().expect("standard layout");
        for (k, chunk) in slice.chunks_mut(dim).enumerate() {
            let p = grid.point(k / grid.ny(), k % grid.ny());
            fill(p[0], p[1], chunk);
        }
        Self { data }
    }

    /// Stacks one grid array per ambient component.
    pub fn from_components(grid: &TorusGrid, components: &[Array2<f64>]) -> Result<Self> {
        let mut data = Array3::zeros((grid.nx(), grid.ny(), components.len()));
        for (c, comp) in components.iter().enumerate() {
            grid.check(comp)?;
            data.index_axis_mut(Axis(2), c).assign(comp);
        }
        Self::new(grid, data)
    }

    /// `scalar · e_c`.
    pub fn along(grid: &TorusGrid, dim: usize, c: usize, scalar: &Array2<f64>) -> Self {
        let mut out = Self::zeros(grid, dim);
        out.data.index_axis_mut(Axis(2), c).assign(scalar);
        out
    }

    pub fn dim(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn component(&self, c: usize) -> Array2<f64> {
        self.data.index_axis(Axis(2), c).to_owned()
    }

    /// Vector at flat point index `k = i·ny + j`.
    pub fn at(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.data.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: &self.data * s,
        }
    }

    /// `s(p) · v(p)` pointwise.
    pub fn scale_by(&self, s: &Array2<f64>) -> Self {
        let mut data = self.data.clone();
        for mut lane in data.axis_iter_mut(Axis(2)) {
            lane *= s;
        }
        Self { data }
    }
}

/// `v = τ_v + ξ_v` with `τ_v = DF·X` tangential and `ξ_v` ω-orthogonal to the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub tangential: TangentField,
    pub orthogonal: TangentField,
    pub coefficients: SurfaceField,
    /// `‖α_{ξ_v}‖∞`.
    pub orthogonality_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exact,
    ClosedNotExact,
    NotClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    /// Largest `‖dα‖∞` still counted as closed.
    pub closed: f64,
    /// Largest period magnitude still counted as exact.
    pub exact: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            closed: 1e-8,
            exact: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub closedness: f64,
    pub periods: [f64; 2],
    /// Mean-zero potential, present when the verdict is [`Verdict::Exact`].
    pub potential: Option<Array2<f64>>,
    pub verdict: Verdict,
}

/// Per-point differential columns `∂_xF`, `∂_yF`, each `(nx, ny, 2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Differential {
    pub dx: Array3<f64>,
    pub dy: Array3<f64>,
}

/// Residual of `f*ω = σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticCheck {
    pub residual: f64,
    pub is_symplectic: bool,
}

/// A map `f: T² → T^{2n}` given by a lift `F` on the grid and an integer
/// winding matrix `W` with `F(p + e_k) = F(p) + W e_k`.
#[derive(Debug, Clone)]
pub struct Embedding {
    model: Arc<AmbientModel>,
    grid: TorusGrid,
    lift: Array3<f64>,
    winding: Vec<[i64; 2]>,
    dx: Array3<f64>,
    dy: Array3<f64>,
    omegas: Vec<DMatrix<f64>>,
    pullback: Array2<f64>,
    min_gram: f64,
}

impl Embedding {
    /// Validates the shape and the immersion condition, then caches the
    /// differential, `ω` along the image and the pullback density.
    pub fn new(
        model: Arc<AmbientModel>,
        grid: &TorusGrid,
        lift: Array3<f64>,
        winding: Vec<[i64; 2]>,
    ) -> Result<Self> {
        let dim = model.dim();
        let (nx, ny, d) = lift.dim();
        if (nx, ny) != grid.shape() {
            return Err(Error::GridMismatch);
        }
        if d != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: d });
        }
        if winding.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: winding.len(),
            });
        }
        if lift.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("lift has non-finite values".into()));
        }
        let lift = lift.as_standard_layout().into_owned();
        let sp = grid.spectral();
        let mut dx = Array3::zeros((nx, ny, dim));
        let mut dy = Array3::zeros((nx, ny, dim));
        for c in 0..dim {
            let periodic = periodic_component(grid, &lift, &winding, c);
            let mut cx = sp.dx(&periodic);
            let mut cy = sp.dy(&periodic);
            cx += winding[c][0] as f64;
            cy += winding[c][1] as f64;
            dx.index_axis_mut(Axis(2), c).assign(&cx);
            dy.index_axis_mut(Axis(2), c).assign(&cy);
        }
        let mut out = Self {
            model,
            grid: grid.clone(),
            lift,
            winding,
            dx,
            dy,
            omegas: Vec::new(),
            pullback: grid.zeros(),
            min_gram: 0.0,
        };
        out.min_gram = (0..grid.len())
            .map(|k| {
                let (u, v) = (out.dx_at(k), out.dy_at(k));
                let uu: f64 = u.iter().map(|a| a * a).sum();
                let vv: f64 = v.iter().map(|a| a * a).sum();
                let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                uu * vv - uv * uv
            })
            .fold(f64::INFINITY, f64::min);
        if !(out.min_gram > IMMERSION_THRESHOLD) {
            return Err(Error::NotImmersed { min_gram: out.min_gram });
        }
        out.refresh_model_data();
        Ok(out)
    }

    fn refresh_model_data(&mut self) {
        let n = self.grid.len();
        self.omegas = (0..n).map(|k| self.model.omega_at(self.point(k))).collect();
        let ny = self.grid.ny();
        self.pullback = Array2::from_shape_fn(self.grid.shape(), |(i, j)| {
            let k = i * ny + j;
            crate::ambient::bilinear(&self.omegas[k], self.dx_at(k), self.dy_at(k))
        });
    }

    /// `f₀(x, y) = (x, y, 0, …, 0)`.
    pub fn flat(model: Arc<AmbientModel>, grid: &TorusGrid) -> Result<Self> {
        Self::sheared(model, grid, 0.0)
    }

    /// `f_a(x, y) = (x + (a/2π) sin(2πx), y, 0, …, 0)`.
    pub fn sheared(model: Arc<AmbientModel>, grid: &TorusGrid, a: f64) -> Result<Self> {
        let dim = model.dim();
        let terms = if a == 0.0 {
            Vec::new()
        } else {
            vec![LiftTerm {
                component: 0,
                frequency: [1, 0],
                cos: 0.0,
                sin: a / (2.0 * PI),
            }]
        };
        Self::from_terms(model, grid, standard_winding(dim), &vec![0.0; dim], &terms)
    }

    /// `F(p) = W p + offset`.
    pub fn linear(model: Arc<AmbientModel>, grid: &TorusGrid, winding: Vec<[i64; 2]>, offset: &[f64]) -> Result<Self> {
        Self::from_terms(model, grid, winding, offset, &[])
    }

    /// `F(p) = W p + offset + Σ terms`.
    pub fn from_terms(
        model: Arc<AmbientModel>,
        grid: &TorusGrid,
        winding: Vec<[i64; 2]>,
        offset: &[f64],
        terms: &[LiftTerm],
    ) -> Result<Self> {
        let dim = model.dim();
        if offset.len() != dim || winding.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: offset.len().min(winding.len()),
            });
        }
        if let Some(t) = terms.iter().find(|t| t.component >= dim) {
            return Err(Error::InvalidArgument(format!(
                "lift term component {} exceeds dimension {dim}",
                t.component
            )));
        }
        let lift = TangentField::from_fn(grid, dim, |x, y, out| {
            for (c, o) in out.iter_mut().enumerate() {
                *o = winding[c][0] as f64 * x + winding[c][1] as f64 * y + offset[c];
            }
            for t in terms {
                out[t.component] += t.value(x, y);
            }
        });
        Self::new(model, grid, lift.data, winding)
    }

    pub fn model(&self) -> &AmbientModel {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<AmbientModel> {
        &self.model
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn lift(&self) -> &Array3<f64> {
        &self.lift
    }

    pub fn winding(&self) -> &[[i64; 2]] {
        &self.winding
    }

    pub fn min_gram(&self) -> f64 {
        self.min_gram
    }

    /// `F` at flat point index `k = i·ny + j`.
    pub fn point(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.lift.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    pub fn dx_at(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.dx.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    pub fn dy_at(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.dy.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    /// `ω` at `f(p_k)`.
    pub fn omega(&self, k: usize) -> &DMatrix<f64> {
        &self.omegas[k]
    }

    pub fn pair(&self, k: usize, u: &[f64], v: &[f64]) -> f64 {
        crate::ambient::bilinear(&self.omegas[k], u, v)
    }

    /// Pullback density `s = ω(∂_xF, ∂_yF)`.
    pub fn pullback_density(&self) -> &Array2<f64> {
        &self.pullback
    }

    pub fn min_pullback(&self) -> f64 {
        self.pullback.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `f*ω` as an area form; fails unless `s > 0` everywhere.
    pub fn pullback_area_form(&self) -> Result<AreaForm> {
        let min_density = self.min_pullback();
        if !(min_density > 0.0) {
            return Err(Error::NotSymplecticSurface { min_density });
        }
        AreaForm::new(&self.grid, self.pullback.clone())
    }

    /// The same lift viewed in another ambient model of equal dimension.
    pub fn with_model(&self, model: Arc<AmbientModel>) -> Result<Self> {
        if model.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: model.dim(),
            });
        }
        let mut out = self.clone();
        out.model = model;
        out.refresh_model_data();
        Ok(out)
    }

    /// `F + h·v`, winding unchanged.
    pub fn displaced(&self, v: &TangentField, h: f64) -> Result<Self> {
        self.check_field(v)?;
        Self::new(
            self.model.clone(),
            &self.grid,
            &self.lift + &(v.data() * h),
            self.winding.clone(),
        )
    }

    pub fn check_field(&self, v: &TangentField) -> Result<()> {
        let (nx, ny, d) = v.data().dim();
        if (nx, ny) != self.grid.shape() {
            return Err(Error::GridMismatch);
        }
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }

    /// Periodic part `F − W p` of lift component `c`.
    pub fn periodic_part(&self, c: usize) -> Array2<f64> {
        periodic_component(&self.grid, &self.lift, &self.winding, c)
    }
}

fn periodic_component(grid: &TorusGrid, lift: &Array3<f64>, winding: &[[i64; 2]], c: usize) -> Array2<f64> {
    Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let p = grid.point(i, j);
        lift[[i, j, c]] - winding[c][0] as f64 * p[0] - winding[c][1] as f64 * p[1]
    })
}

/// `W = [e₁ e₂]`.
pub fn standard_winding(dim: usize) -> Vec<[i64; 2]> {
    let mut w = vec![[0, 0]; dim];
    w[0] = [1, 0];
    w[1] = [0, 1];
    w
}

pub fn differential_and_pullback(f: &Embedding) -> (Differential, TwoFormGrid) {
    (
        Differential {
            dx: f.dx.clone(),
            dy: f.dy.clone(),
        },
        TwoFormGrid {
            density: f.pullback.clone(),
        },
    )
}

/// `‖s − ρ‖∞` with its verdict at `tol`.
pub fn is_symplectic_embedding(f: &Embedding, sigma: &AreaForm, tol: f64) -> Result<SymplecticCheck> {
    f.grid.check(sigma.density())?;
    let residual = surface::max_abs(&(&f.pullback - sigma.density()));
    Ok(SymplecticCheck {
        residual,
        is_symplectic: residual <= tol,
    })
}

/// `α_v = ω(v, ∂_xF) dx + ω(v, ∂_yF) dy`.
pub fn alpha(f: &Embedding, v: &TangentField) -> Result<OneFormGrid> {
    f.check_field(v)?;
    let ny = f.grid.ny();
    let a = Array2::from_shape_fn(f.grid.shape(), |(i, j)| {
        let k = i * ny + j;
        f.pair(k, v.at(k), f.dx_at(k))
    });
    let b = Array2::from_shape_fn(f.grid.shape(), |(i, j)| {
        let k = i * ny + j;
        f.pair(k, v.at(k), f.dy_at(k))
    });
    Ok(OneFormGrid { a, b })
}

/// Tangential/ω-orthogonal splitting, pointwise `X = (b/s, −a/s)`.
pub fn split_tangent(f: &Embedding, v: &TangentField) -> Result<SplitResult> {
    let min_density = f.min_pullback();
    if !(min_density > 0.0) {
        return Err(Error::NotSymplecticSurface { min_density });
    }
    let al = alpha(f, v)?;
    let s = &f.pullback;
    let coefficients = SurfaceField {
        x: &al.b / s,
        y: -(&al.a / s),
    };
    let tangential = tangential_lift(f, &coefficients)?;
    let orthogonal = v.sub(&tangential);
    let orthogonality_residual = alpha(f, &orthogonal)?.max_abs();
    Ok(SplitResult {
        tangential,
        orthogonal,
        coefficients,
        orthogonality_residual,
    })
}

/// `DF·X` pointwise.
pub fn tangential_lift(f: &Embedding, x: &SurfaceField) -> Result<TangentField> {
    f.grid.check(&x.x)?;
    f.grid.check(&x.y)?;
    let dim = f.dim();
    let mut data = Array3::zeros((f.grid.nx(), f.grid.ny(), dim));
    let out = data.as_slice_mut().expect("standard layout");
    let xs = x.x.as_slice().expect("standard layout");
    let ys = x.y.as_slice().expect("standard layout");
    for k in 0..f.grid.len() {
        let (u, w) = (f.dx_at(k), f.dy_at(k));
        for c in 0..dim {
            out[k * dim + c] = u[c] * xs[k] + w[c] * ys[k];
        }
    }
    Ok(TangentField { data })
}

/// Closed/exact classification of `α_v`.
pub fn classify(f: &Embedding, v: &TangentField, tol: ClassifyTolerances) -> Result<Classification> {
    classify_one_form(&f.grid, &alpha(f, v)?, tol)
}

pub fn classify_one_form(grid: &TorusGrid, al: &OneFormGrid, tol: ClassifyTolerances) -> Result<Classification> {
    let closedness = exterior_derivative(grid, al)?.max_abs();
    if closedness > tol.closed {
        return Ok(Classification {
            closedness,
            periods: al.periods(),
            potential: None,
            verdict: Verdict::NotClosed,
        });
    }
    let split = surface::hodge_split_unchecked(grid, al, closedness);
    let exact = split.is_exact(tol.exact);
    Ok(Classification {
        closedness,
        periods: split.periods,
        verdict: if exact { Verdict::Exact } else { Verdict::ClosedNotExact },
        potential: exact.then_some(split.potential),
    })
}

/// `v(p) = V_H(f(p))`.
pub fn hamiltonian_restriction(f: &Embedding, h: &ScalarHamiltonian) -> Result<TangentField> {
    let dim = f.dim();
    let mut data = Array3::zeros((f.grid.nx(), f.grid.ny(), dim));
    let out = data.as_slice_mut().expect("standard layout");
    for k in 0..f.grid.len() {
        let v = hamiltonian_vector(&f.model, h, f.point(k))?;
        out[k * dim..(k + 1) * dim].copy_from_slice(v.as_slice());
    }
    Ok(TangentField { data })
}

/// `H∘f` on the grid.
pub fn compose_scalar(f: &Embedding, h: &ScalarHamiltonian) -> Array2<f64> {
    let ny = f.grid.ny();
    Array2::from_shape_fn(f.grid.shape(), |(i, j)| h.value(f.point(i * ny + j)))
}

/// `f∘φ`: winding part applied exactly, periodic part interpolated at `φ(p)`.
pub fn reparametrize(f: &Embedding, phi: &GridDiffeo, mode: InterpolationMode) -> Result<Embedding> {
    if phi.grid() != &f.grid {
        return Err(Error::GridMismatch);
    }
    let dim = f.dim();
    let parts = (0..dim)
        .map(|c| f.grid.interpolant(&f.periodic_part(c), mode))
        .collect::<Result<Vec<_>>>()?;
    let mut lift = Array3::zeros((f.grid.nx(), f.grid.ny(), dim));
    for i in 0..f.grid.nx() {
        for j in 0..f.grid.ny() {
            let q = phi.point(i, j);
            for c in 0..dim {
                lift[[i, j, c]] = f.winding[c][0] as f64 * q[0]
                    + f.winding[c][1] as f64 * q[1]
                    + parts[c].eval(q[0], q[1]);
            }
        }
    }
    Embedding::new(f.model.clone(), &f.grid, lift, f.winding.clone())
}

/// `v∘φ`, each component interpolated at `φ(p)`.
pub fn transport_field(v: &TangentField, phi: &GridDiffeo, mode: InterpolationMode) -> Result<TangentField> {
    let grid = phi.grid();
    let dim = v.dim();
    let parts = (0..dim)
        .map(|c| grid.interpolant(&v.component(c), mode))
        .collect::<Result<Vec<_>>>()?;
    let mut data = Array3::zeros((grid.nx(), grid.ny(), dim));
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let q = phi.point(i, j);
            for c in 0..dim {
                data[[i, j, c]] = parts[c].eval(q[0], q[1]);
            }
        }
    }
    TangentField::new(grid, data)
}

/// `φ∘f` for an affine symplectomorphism: lift `A F + c`, winding `A W`.
pub fn compose_ambient(map: &AmbientSymplectomorphism, f: &Embedding) -> Result<Embedding> {
    if !map.is_symplectic() {
        return Err(Error::NotSymplecticMap);
    }
    let dim = f.dim();
    if map.matrix().nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: map.matrix().nrows(),
        });
    }
    let mut lift = Array3::zeros(f.lift.dim());
    {
        let out = lift.as_slice_mut().expect("standard layout");
        for k in 0..f.grid.len() {
            let q = map.apply_lift(f.point(k));
            out[k * dim..(k + 1) * dim].copy_from_slice(q.as_slice());
        }
    }
    let a = map.matrix();
    let winding = (0..dim)
        .map(|r| {
            let mut w = [0i64; 2];
            for (col, wc) in w.iter_mut().enumerate() {
                *wc = (0..dim).map(|c| a[(r, c)] * f.winding[c][col]).sum();
            }
            w
        })
        .collect();
    Embedding::new(f.model.clone(), &f.grid, lift, winding)
}

/// Applies a per-point linear map `M(p)` to a field.
pub fn map_field(f: &Embedding, v: &TangentField, m: impl Fn(usize) -> DMatrix<f64>) -> Result<TangentField> {
    f.check_field(v)?;
    let dim = f.dim();
    let mut data = Array3::zeros((f.grid.nx(), f.grid.ny(), dim));
    let out = data.as_slice_mut().expect("standard layout");
    for k in 0..f.grid.len() {
        let w = m(k) * DVector::from_column_slice(v.at(k));
        out[k * dim..(k + 1) * dim].copy_from_slice(w.as_slice());
    }
    Ok(TangentField { data })
}
