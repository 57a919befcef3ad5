//! The ambient symplectic manifold: a flat torus `T^{2n}` carrying
//! `ω(q) = Ω + dη(q)` with `Ω` constant and `η` a real Fourier 1-form.
//!
//! Matrix convention, used everywhere in the crate: `ω(u, v) = uᵀ ω(q) v`,
//! and a vector field `V` is Hamiltonian for `H` when `ι_V ω = dH`, which in
//! coordinates reads `ω(q)ᵀ V = ∇H(q)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|det ω(q)|` the form is treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `cos · cos(2π k·q) + sin · sin(2π k·q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub frequency: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl FourierTerm {
    pub fn new(frequency: Vec<i64>, cos: f64, sin: f64) -> Self {
        Self { frequency, cos, sin }
    }

    pub fn sine(frequency: Vec<i64>, amplitude: f64) -> Self {
        Self::new(frequency, 0.0, amplitude)
    }

    pub fn cosine(frequency: Vec<i64>, amplitude: f64) -> Self {
        Self::new(frequency, amplitude, 0.0)
    }

    fn phase(&self, q: &[f64]) -> f64 {
        2.0 * PI
            * self
                .frequency
                .iter()
                .zip(q)
                .map(|(&k, &x)| k as f64 * x)
                .sum::<f64>()
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        let (s, c) = self.phase(q).sin_cos();
        self.cos * c + self.sin * s
    }

    /// Adds `∇(term)(q)` into `out`.
    pub fn add_gradient(&self, q: &[f64], out: &mut [f64]) {
        let (s, c) = self.phase(q).sin_cos();
        let d = 2.0 * PI * (-self.cos * s + self.sin * c);
        for (o, &k) in out.iter_mut().zip(&self.frequency) {
            *o += d * k as f64;
        }
    }

    /// Adds the Hessian of the term into `out` (row-major `dim × dim`).
    pub fn add_hessian(&self, q: &[f64], out: &mut DMatrix<f64>) {
        let d2 = -(2.0 * PI).powi(2) * self.value(q);
        for (a, &ka) in self.frequency.iter().enumerate() {
            for (b, &kb) in self.frequency.iter().enumerate() {
                out[(a, b)] += d2 * (ka * kb) as f64;
            }
        }
    }

    /// Adds the third derivative contracted with `dir` in its first slot.
    fn add_hessian_derivative(&self, q: &[f64], dir: &[f64], out: &mut DMatrix<f64>) {
        let (s, c) = self.phase(q).sin_cos();
        // d/dθ of (cos·c + sin·s) is (−cos·s + sin·c)
        let slope = -(2.0 * PI).powi(3) * (-self.cos * s + self.sin * c);
        let kd: f64 = self
            .frequency
            .iter()
            .zip(dir)
            .map(|(&k, &d)| k as f64 * d)
            .sum();
        for (a, &ka) in self.frequency.iter().enumerate() {
            for (b, &kb) in self.frequency.iter().enumerate() {
                out[(a, b)] += slope * kd * (ka * kb) as f64;
            }
        }
    }
}

/// One Fourier term of the `component`-th coefficient of the 1-form `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneFormTerm {
    pub component: usize,
    pub frequency: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl OneFormTerm {
    pub fn new(component: usize, term: FourierTerm) -> Self {
        Self {
            component,
            frequency: term.frequency,
            cos: term.cos,
            sin: term.sin,
        }
    }

    pub fn term(&self) -> FourierTerm {
        FourierTerm::new(self.frequency.clone(), self.cos, self.sin)
    }
}

/// `(T^{2n}, Ω + dη)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientModel {
    half_dim: usize,
    base: DMatrix<f64>,
    perturbation: Vec<(usize, FourierTerm)>,
}

/// The standard form `Σ dq_{2k} ∧ dq_{2k+1}` (0-based), i.e. `Ω[0,1] = Ω[2,3] = … = 1`.
pub fn standard_form(half_dim: usize) -> DMatrix<f64> {
    let dim = 2 * half_dim;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..half_dim {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

impl AmbientModel {
    pub fn standard(half_dim: usize) -> Result<Self> {
        Self::new(standard_form(half_dim), Vec::new())
    }

    pub fn new(base: DMatrix<f64>, perturbation: Vec<OneFormTerm>) -> Result<Self> {
        let dim = base.nrows();
        if dim < 4 || !dim.is_multiple_of(2) || base.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "base form must be square of even size ≥ 4, got {}×{}",
                base.nrows(),
                base.ncols()
            )));
        }
        let skew = (&base + base.transpose()).amax();
        if skew > 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "base form is not antisymmetric (‖Ω+Ωᵀ‖∞ = {skew:e})"
            )));
        }
        let det = base.clone().determinant();
        if det.abs() <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateForm { det });
        }
        let mut terms = Vec::with_capacity(perturbation.len());
        for t in perturbation {
            if t.component >= dim || t.frequency.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "η term on component {} with {} frequencies does not fit dimension {dim}",
                    t.component,
                    t.frequency.len()
                )));
            }
            terms.push((t.component, t.term()));
        }
        Ok(Self {
            half_dim: dim / 2,
            base,
            perturbation: terms,
        })
    }

    /// Same base form, perturbation replaced.
    pub fn with_perturbation(&self, perturbation: Vec<OneFormTerm>) -> Result<Self> {
        Self::new(self.base.clone(), perturbation)
    }

    /// The model with `η = 0`.
    pub fn constant_part(&self) -> Self {
        Self {
            half_dim: self.half_dim,
            base: self.base.clone(),
            perturbation: Vec::new(),
        }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn base_form(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn is_constant(&self) -> bool {
        self.perturbation.is_empty()
    }

    pub fn perturbation(&self) -> Vec<OneFormTerm> {
        self.perturbation
            .iter()
            .map(|(c, t)| OneFormTerm::new(*c, t.clone()))
            .collect()
    }

    fn check_point(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.len(),
            });
        }
        Ok(())
    }

    /// `ω(q) = Ω + dη(q)` with `(dη)_{ab} = ∂_a η_b − ∂_b η_a`.
    pub fn omega_at(&self, q: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut w = self.base.clone();
        let mut grad = vec![0.0; dim];
        for (b, term) in &self.perturbation {
            grad.iter_mut().for_each(|g| *g = 0.0);
            term.add_gradient(q, &mut grad);
            for (a, &g) in grad.iter().enumerate() {
                w[(a, *b)] += g;
                w[(*b, a)] -= g;
            }
        }
        w
    }

    /// `Σ_c dir_c ∂_c ω(q)`.
    pub fn omega_directional_derivative(&self, q: &[f64], dir: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for (b, term) in &self.perturbation {
            hess.fill(0.0);
            term.add_hessian(q, &mut hess);
            // Σ_c dir_c ∂_c ∂_a η_b
            let along = hess.transpose() * DVector::from_column_slice(dir);
            for a in 0..dim {
                out[(a, *b)] += along[a];
                out[(*b, a)] -= along[a];
            }
        }
        out
    }

    /// Second directional derivative `Σ dir_c dir_d ∂_c ∂_d ω(q)`.
    pub fn omega_second_directional_derivative(&self, q: &[f64], dir: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::zeros(dim, dim);
        let mut third = DMatrix::zeros(dim, dim);
        let d = DVector::from_column_slice(dir);
        for (b, term) in &self.perturbation {
            third.fill(0.0);
            term.add_hessian_derivative(q, dir, &mut third);
            let along = &third * &d;
            for a in 0..dim {
                out[(a, *b)] += along[a];
                out[(*b, a)] -= along[a];
            }
        }
        out
    }

    /// `ω(q)(u, v)`.
    pub fn pair(&self, q: &[f64], u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.omega_at(q), u, v)
    }
}

/// `uᵀ M v`.
pub fn bilinear(m: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, &ua) in u.iter().enumerate() {
        if ua == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (b, &vb) in v.iter().enumerate() {
            row += m[(a, b)] * vb;
        }
        acc += ua * row;
    }
    acc
}

fn check_nondegenerate(omega: &DMatrix<f64>) -> Result<()> {
    let det = omega.clone().determinant();
    if det.abs() <= DEGENERACY_THRESHOLD || !det.is_finite() {
        return Err(Error::DegenerateForm { det });
    }
    Ok(())
}

/// A real Fourier series `H: T^{2n} → ℝ` with exact derivatives.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarHamiltonian {
    pub terms: Vec<FourierTerm>,
}

impl ScalarHamiltonian {
    pub fn new(terms: Vec<FourierTerm>) -> Self {
        Self { terms }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(vec![FourierTerm::cosine(vec![0; dim], value)])
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(q)).sum()
    }

    pub fn gradient(&self, q: &[f64]) -> DVector<f64> {
        let mut g = vec![0.0; q.len()];
        for t in &self.terms {
            t.add_gradient(q, &mut g);
        }
        DVector::from_vec(g)
    }

    pub fn hessian(&self, q: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(q.len(), q.len());
        for t in &self.terms {
            t.add_hessian(q, &mut h);
        }
        h
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        for t in &self.terms {
            if t.frequency.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.frequency.len(),
                });
            }
        }
        Ok(())
    }
}

/// Solves `ω(q)ᵀ V = ∇H(q)`.
pub fn hamiltonian_vector(
    model: &AmbientModel,
    hamiltonian: &ScalarHamiltonian,
    q: &[f64],
) -> Result<DVector<f64>> {
    model.check_point(q)?;
    hamiltonian.check_dim(model.dim())?;
    let omega = model.omega_at(q);
    check_nondegenerate(&omega)?;
    let grad = hamiltonian.gradient(q);
    solve(omega.transpose(), &grad)
}

fn solve(m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let det = m.clone().determinant();
    m.lu()
        .solve(rhs)
        .ok_or(Error::DegenerateForm { det })
}

/// Reduces every coordinate into `[0, 1)`.
pub fn reduce_mod_one(q: &mut [f64]) {
    for x in q {
        *x -= x.floor();
        if *x >= 1.0 {
            *x = 0.0;
        }
    }
}

/// Flow of `V_H` for time `t_final`, classical RK4 with `steps` fixed steps,
/// reduced mod 1.
pub fn ham_flow(
    model: &AmbientModel,
    hamiltonian: &ScalarHamiltonian,
    q0: &[f64],
    t_final: f64,
    steps: usize,
) -> Result<DVector<f64>> {
    let mut q = ham_flow_lift(model, hamiltonian, q0, t_final, steps)?;
    reduce_mod_one(q.as_mut_slice());
    Ok(q)
}

/// As [`ham_flow`] but without reducing mod 1, so the result is a lift in `ℝ^{2n}`.
pub fn ham_flow_lift(
    model: &AmbientModel,
    hamiltonian: &ScalarHamiltonian,
    q0: &[f64],
    t_final: f64,
    steps: usize,
) -> Result<DVector<f64>> {
    let (q, _) = ham_flow_with_tangents(model, hamiltonian, q0, &[], t_final, steps)?;
    Ok(q)
}

/// Flows `q0` together with tangent vectors transported by the differential of
/// the flow (the linearised equation `δ' = DV_H(q) δ`), both with RK4.
/// Returns unreduced lifts.
pub fn ham_flow_with_tangents(
    model: &AmbientModel,
    hamiltonian: &ScalarHamiltonian,
    q0: &[f64],
    tangents: &[DVector<f64>],
    t_final: f64,
    steps: usize,
) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be ≥ 1".into()));
    }
    model.check_point(q0)?;
    hamiltonian.check_dim(model.dim())?;
    for t in tangents {
        if t.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: t.len(),
            });
        }
    }
    let dt = t_final / steps as f64;
    let mut q = DVector::from_column_slice(q0);
    let mut ts: Vec<DVector<f64>> = tangents.to_vec();

    // Right-hand side of the coupled system.
    let rhs = |q: &DVector<f64>, ts: &[DVector<f64>]| -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        let omega = model.omega_at(q.as_slice());
        check_nondegenerate(&omega)?;
        let omega_t = omega.transpose();
        let lu = omega_t.clone().lu();
        let det = omega_t.determinant();
        let v = lu
            .solve(&hamiltonian.gradient(q.as_slice()))
            .ok_or(Error::DegenerateForm { det })?;
        let mut dts = Vec::with_capacity(ts.len());
        if !ts.is_empty() {
            let hess = hamiltonian.hessian(q.as_slice());
            for d in ts {
                let dw = model.omega_directional_derivative(q.as_slice(), d.as_slice());
                let r = &hess * d - dw.transpose() * &v;
                dts.push(lu.solve(&r).ok_or(Error::DegenerateForm { det })?);
            }
        }
        Ok((v, dts))
    };

    let axpy = |base: &[DVector<f64>], k: &[DVector<f64>], h: f64| -> Vec<DVector<f64>> {
        base.iter().zip(k).map(|(b, k)| b + k * h).collect()
    };

    for _ in 0..steps {
        let (k1, l1) = rhs(&q, &ts)?;
        let (k2, l2) = rhs(&(&q + &k1 * (dt / 2.0)), &axpy(&ts, &l1, dt / 2.0))?;
        let (k3, l3) = rhs(&(&q + &k2 * (dt / 2.0)), &axpy(&ts, &l2, dt / 2.0))?;
        let (k4, l4) = rhs(&(&q + &k3 * dt), &axpy(&ts, &l3, dt))?;
        q += (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (dt / 6.0);
        for (i, t) in ts.iter_mut().enumerate() {
            *t += (&l1[i] + &l2[i] * 2.0 + &l3[i] * 2.0 + &l4[i]) * (dt / 6.0);
        }
    }
    Ok((q, ts))
}

/// The orthogonal polar factor of `−ω` (identity metric). This is the unique
/// `ω`-compatible structure that is also orthogonal.
pub fn compatible_j(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_nondegenerate(omega)?;
    let a = -omega;
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let p_inv = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(a * p_inv)
}

pub fn compatible_j_at(model: &AmbientModel, q: &[f64]) -> Result<DMatrix<f64>> {
    model.check_point(q)?;
    compatible_j(&model.omega_at(q))
}

/// `q ↦ A q + c mod 1` with `A ∈ GL(2n, ℤ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSymplectomorphism {
    matrix: DMatrix<i64>,
    translation: DVector<f64>,
    is_symplectic: bool,
    is_holomorphic: bool,
}

impl AmbientSymplectomorphism {
    /// The flags are evaluated against the model's base form `Ω` and its
    /// compatible structure `J₀`.
    pub fn new(matrix: DMatrix<i64>, translation: DVector<f64>, model: &AmbientModel) -> Result<Self> {
        let dim = model.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        if translation.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: translation.len(),
            });
        }
        let det = integer_determinant(&matrix);
        if det.abs() != 1 {
            return Err(Error::NotUnimodular { det });
        }
        let a = matrix.map(|x| x as f64);
        let omega = model.base_form();
        let is_symplectic = (a.transpose() * omega * &a - omega).amax() <= 1e-12;
        let j0 = compatible_j(omega)?;
        let is_holomorphic = (&a * &j0 - &j0 * &a).amax() <= 1e-12;
        Ok(Self {
            matrix,
            translation,
            is_symplectic,
            is_holomorphic,
        })
    }

    pub fn translation(translation: DVector<f64>, model: &AmbientModel) -> Result<Self> {
        let dim = model.dim();
        Self::new(DMatrix::identity(dim, dim), translation, model)
    }

    /// Exchanges the first two symplectic `ℝ²` factors.
    pub fn factor_swap(model: &AmbientModel) -> Result<Self> {
        let dim = model.dim();
        let mut a = DMatrix::<i64>::identity(dim, dim);
        for (i, j) in [(0, 2), (1, 3)] {
            a[(i, i)] = 0;
            a[(j, j)] = 0;
            a[(i, j)] = 1;
            a[(j, i)] = 1;
        }
        Self::new(a, DVector::zeros(dim), model)
    }

    pub fn matrix(&self) -> &DMatrix<i64> {
        &self.matrix
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|x| x as f64)
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn is_symplectic(&self) -> bool {
        self.is_symplectic
    }

    pub fn is_holomorphic(&self) -> bool {
        self.is_holomorphic
    }

    /// `A q + c` without reduction.
    pub fn apply_lift(&self, q: &[f64]) -> DVector<f64> {
        self.matrix_f64() * DVector::from_column_slice(q) + &self.translation
    }
}

pub fn apply_symplectomorphism(map: &AmbientSymplectomorphism, q: &[f64]) -> DVector<f64> {
    let mut out = map.apply_lift(q);
    reduce_mod_one(out.as_mut_slice());
    out
}

/// Exact determinant of a small integer matrix (Bareiss elimination).
pub fn integer_determinant(m: &DMatrix<i64>) -> i64 {
    let n = m.nrows();
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        return 1;
    }
    (sign * a[n - 1][n - 1]) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eta4() -> Vec<OneFormTerm> {
        vec![OneFormTerm::new(3, FourierTerm::sine(vec![1, 0, 0, 0], 1.0 / (2.0 * PI)))]
    }

    #[test]
    fn standard_form_entries() {
        let m = AmbientModel::standard(2).unwrap();
        let w = m.omega_at(&[0.3, 0.1, 0.7, 0.2]);
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(2, 3)], 1.0);
        assert_eq!(w[(1, 0)], -1.0);
        assert_eq!(w[(3, 2)], -1.0);
        assert_eq!(w.iter().filter(|x| **x != 0.0).count(), 4);
    }

    #[test]
    fn perturbation_adds_analytic_derivative() {
        let m = AmbientModel::standard(2).unwrap().with_perturbation(eta4()).unwrap();
        let w = m.omega_at(&[0.0; 4]);
        let mut expected = standard_form(2);
        expected[(0, 3)] = 1.0;
        expected[(3, 0)] = -1.0;
        assert!((w - expected).amax() < 1e-15);
        let w = m.omega_at(&[0.25, 0.0, 0.0, 0.0]);
        assert!((w - standard_form(2)).amax() < 1e-15);
    }

    #[test]
    fn omega_derivative_matches_central_difference() {
        let m = AmbientModel::standard(2)
            .unwrap()
            .with_perturbation(vec![
                OneFormTerm::new(3, FourierTerm::new(vec![1, 0, 1, 0], 0.1, 0.05)),
                OneFormTerm::new(1, FourierTerm::new(vec![0, 1, 0, 2], -0.07, 0.02)),
            ])
            .unwrap();
        let q = [0.13, 0.41, 0.77, 0.29];
        let dir = [0.3, -0.2, 0.5, 0.1];
        let h = 1e-5;
        let shift = |s: f64| -> Vec<f64> { q.iter().zip(&dir).map(|(a, b)| a + s * b).collect() };
        let fd = (m.omega_at(&shift(h)) - m.omega_at(&shift(-h))) / (2.0 * h);
        let exact = m.omega_directional_derivative(&q, &dir);
        assert!((fd - exact).amax() < 1e-8);
        let fd2 = (m.omega_directional_derivative(&shift(h), &dir)
            - m.omega_directional_derivative(&shift(-h), &dir))
            / (2.0 * h);
        let exact2 = m.omega_second_directional_derivative(&q, &dir);
        assert!((fd2 - exact2).amax() < 1e-6);
    }

    #[test]
    fn hamiltonian_vector_examples() {
        let m = AmbientModel::standard(2).unwrap();
        let h3 = ScalarHamiltonian::new(vec![FourierTerm::sine(vec![0, 0, 1, 0], 1.0 / (2.0 * PI))]);
        let v = hamiltonian_vector(&m, &h3, &[0.2, 0.6, 0.0, 0.9]).unwrap();
        assert!((v - DVector::from_vec(vec![0.0, 0.0, 0.0, -1.0])).amax() < 1e-15);
        let h1 = ScalarHamiltonian::new(vec![FourierTerm::sine(vec![1, 0, 0, 0], 1.0 / (2.0 * PI))]);
        let v = hamiltonian_vector(&m, &h1, &[0.0, 0.3, 0.4, 0.5]).unwrap();
        assert!((v - DVector::from_vec(vec![0.0, -1.0, 0.0, 0.0])).amax() < 1e-15);
        let c = ScalarHamiltonian::constant(4, 3.0);
        let v = hamiltonian_vector(&m, &c, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(v.amax(), 0.0);
    }

    #[test]
    fn hamiltonian_vector_contracts_to_dh() {
        let m = AmbientModel::standard(2).unwrap().with_perturbation(eta4()).unwrap();
        let h = ScalarHamiltonian::new(vec![
            FourierTerm::new(vec![1, 1, 0, 0], 0.2, 0.1),
            FourierTerm::new(vec![0, 0, 1, -1], 0.05, 0.3),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let v = hamiltonian_vector(&m, &h, &q).unwrap();
            let residual = m.omega_at(&q).transpose() * &v - h.gradient(&q);
            assert!(residual.amax() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let mut base = DMatrix::zeros(4, 4);
        base[(0, 1)] = 1.0;
        base[(1, 0)] = -1.0;
        assert!(matches!(
            AmbientModel::new(base, vec![]),
            Err(Error::DegenerateForm { .. })
        ));
    }

    #[test]
    fn flow_of_linear_example() {
        let m = AmbientModel::standard(2).unwrap();
        let h = ScalarHamiltonian::new(vec![FourierTerm::sine(vec![0, 0, 1, 0], 1.0 / (2.0 * PI))]);
        let q = ham_flow(&m, &h, &[0.0; 4], 0.5, 100).unwrap();
        assert!((q - DVector::from_vec(vec![0.0, 0.0, 0.0, 0.5])).amax() < 1e-14);
        let c = ScalarHamiltonian::constant(4, 1.0);
        let q0 = [0.1, 0.2, 0.3, 0.4];
        let q = ham_flow(&m, &c, &q0, 1.0, 10).unwrap();
        assert!((q - DVector::from_column_slice(&q0)).amax() < 1e-15);
        assert!(ham_flow(&m, &c, &q0, 1.0, 0).is_err());
    }

    #[test]
    fn flow_conserves_energy_at_fourth_order() {
        let m = AmbientModel::standard(2).unwrap().with_perturbation(eta4()).unwrap();
        let h = ScalarHamiltonian::new(vec![
            FourierTerm::new(vec![1, 0, 1, 0], 0.1, 0.05),
            FourierTerm::new(vec![0, 1, 0, 1], 0.02, 0.08),
        ]);
        let q0 = [0.1, 0.2, 0.3, 0.4];
        let drift = |steps: usize| {
            let q = ham_flow_lift(&m, &h, &q0, 1.0, steps).unwrap();
            (h.value(q.as_slice()) - h.value(&q0)).abs()
        };
        assert!(drift(200) <= 1e-8);
        let (coarse, fine) = (drift(10), drift(20));
        let order = (coarse / fine).log2();
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn transported_tangents_match_finite_differences() {
        let m = AmbientModel::standard(2).unwrap().with_perturbation(eta4()).unwrap();
        let h = ScalarHamiltonian::new(vec![FourierTerm::new(vec![1, 0, 1, 0], 0.1, 0.05)]);
        let q0 = [0.1, 0.2, 0.3, 0.4];
        let d = DVector::from_vec(vec![0.3, -0.1, 0.2, 0.5]);
        let (_, ts) = ham_flow_with_tangents(&m, &h, &q0, std::slice::from_ref(&d), 0.7, 200).unwrap();
        let eps = 1e-6;
        let plus: Vec<f64> = q0.iter().zip(d.iter()).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = q0.iter().zip(d.iter()).map(|(a, b)| a - eps * b).collect();
        let fd = (ham_flow_lift(&m, &h, &plus, 0.7, 200).unwrap()
            - ham_flow_lift(&m, &h, &minus, 0.7, 200).unwrap())
            / (2.0 * eps);
        assert!((fd - &ts[0]).amax() < 1e-7);
    }

    #[test]
    fn standard_j_is_block_rotation() {
        let m = AmbientModel::standard(2).unwrap();
        let j = compatible_j_at(&m, &[0.5; 4]).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        for k in 0..2 {
            expected[(2 * k, 2 * k + 1)] = -1.0;
            expected[(2 * k + 1, 2 * k)] = 1.0;
        }
        assert!((&j - expected).amax() < 1e-14);
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let je1: Vec<f64> = (&j * DVector::from_column_slice(&e1)).iter().copied().collect();
        assert!((m.pair(&[0.0; 4], &e1, &je1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn j_is_compatible_on_random_perturbed_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let eps: f64 = rng.gen_range(-0.3..0.3);
            let m = AmbientModel::standard(2)
                .unwrap()
                .with_perturbation(vec![
                    OneFormTerm::new(3, FourierTerm::sine(vec![1, 0, 0, 0], eps / (2.0 * PI))),
                    OneFormTerm::new(2, FourierTerm::cosine(vec![0, 1, 0, 0], eps / (4.0 * PI))),
                ])
                .unwrap();
            let q: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let w = m.omega_at(&q);
            let j = compatible_j_at(&m, &q).unwrap();
            let id = DMatrix::<f64>::identity(4, 4);
            assert!((&j * &j + &id).amax() <= 1e-10);
            assert!((j.transpose() * &w * &j - &w).amax() <= 1e-10);
            for _ in 0..5 {
                let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ju = &j * DVector::from_column_slice(&u);
                assert!(bilinear(&w, &u, ju.as_slice()) > 0.0);
            }
        }
    }

    #[test]
    fn symplectomorphism_examples() {
        let m = AmbientModel::standard(2).unwrap();
        let t = AmbientSymplectomorphism::translation(DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]), &m)
            .unwrap();
        let q = apply_symplectomorphism(&t, &[0.0; 4]);
        assert!((q - DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4])).amax() < 1e-15);

        let swap = AmbientSymplectomorphism::factor_swap(&m).unwrap();
        assert!(swap.is_symplectic() && swap.is_holomorphic());
        let q = apply_symplectomorphism(&swap, &[0.1, 0.2, 0.3, 0.4]);
        assert!((q - DVector::from_vec(vec![0.3, 0.4, 0.1, 0.2])).amax() < 1e-15);

        let id = AmbientSymplectomorphism::translation(DVector::zeros(4), &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let q: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            assert!((apply_symplectomorphism(&id, &q) - DVector::from_vec(q)).amax() < 1e-15);
        }

        let mut doubled = DMatrix::<i64>::identity(4, 4);
        doubled[(0, 0)] = 2;
        assert!(matches!(
            AmbientSymplectomorphism::new(doubled, DVector::zeros(4), &m),
            Err(Error::NotUnimodular { det: 2 })
        ));
        let mut shear = DMatrix::<i64>::identity(4, 4);
        shear[(0, 2)] = 1;
        let s = AmbientSymplectomorphism::new(shear, DVector::zeros(4), &m).unwrap();
        assert!(!s.is_symplectic());
    }

    #[test]
    fn integer_determinant_matches_float() {
        let m = DMatrix::from_row_slice(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        assert_eq!(integer_determinant(&m), 18);
        let p = DMatrix::from_row_slice(2, 2, &[0, 1, 1, 0]);
        assert_eq!(integer_determinant(&p), -1);
    }
}
