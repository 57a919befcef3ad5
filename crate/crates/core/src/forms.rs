//! The pairings `ω^D` and `ω_S` on sections of `f*TM`, the induced almost
//! complex structure `J̃`, a finite-difference closedness check for `ω^D`, and
//! Cauchy–Riemann residuals.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::ambient::{bilinear, compatible_j, AmbientModel};
use crate::embedding::{alpha, map_field, Embedding, TangentField};
use crate::error::{Error, Result};
use crate::surface::{mean, AreaForm, TwoFormGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    OmegaD,
    OmegaS,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    pub pairing: Pairing,
    pub value: f64,
    pub integrand: TwoFormGrid,
}

impl PairingResult {
    fn new(pairing: Pairing, density: Array2<f64>) -> Self {
        Self {
            pairing,
            value: mean(&density),
            integrand: TwoFormGrid { density },
        }
    }

    pub fn max_integrand(&self) -> f64 {
        self.integrand.max_abs()
    }
}

fn pointwise_pair(f: &Embedding, v1: &TangentField, v2: &TangentField) -> Result<Array2<f64>> {
    f.check_field(v1)?;
    f.check_field(v2)?;
    let ny = f.grid().ny();
    Ok(Array2::from_shape_fn(f.grid().shape(), |(i, j)| {
        let k = i * ny + j;
        f.pair(k, v1.at(k), v2.at(k))
    }))
}

/// `ω^D(v₁, v₂) = ∫ ω_{f}(v₁, v₂) σ`.
pub fn omega_d(f: &Embedding, v1: &TangentField, v2: &TangentField, sigma: &AreaForm) -> Result<PairingResult> {
    f.grid().check(sigma.density())?;
    let w = pointwise_pair(f, v1, v2)?;
    Ok(PairingResult::new(Pairing::OmegaD, w * sigma.density()))
}

/// `ω_S(v₁, v₂)` through its pointwise integrand
/// `2ω(v₁, v₂) s − 2(a₁b₂ − b₁a₂)`, where `s` is the pullback density and
/// `α_{vᵢ} = aᵢ dx + bᵢ dy`.
///
/// The minus sign is what contracting `ω∧ω` with `(v₁, v₂, ∂_xF, ∂_yF)`
/// produces; with it the integrand vanishes pointwise against tangential
/// fields whenever the partner is closed.
pub fn omega_s(f: &Embedding, v1: &TangentField, v2: &TangentField) -> Result<PairingResult> {
    let w = pointwise_pair(f, v1, v2)?;
    let a1 = alpha(f, v1)?;
    let a2 = alpha(f, v2)?;
    let s = f.pullback_density();
    let density = 2.0 * (&w * s) - 2.0 * (&a1.a * &a2.b - &a1.b * &a2.a);
    Ok(PairingResult::new(Pairing::OmegaS, density))
}

/// `J` at every image point of `f`, computed from `model`.
pub fn j_along(f: &Embedding, model: &AmbientModel) -> Result<Vec<DMatrix<f64>>> {
    if model.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: model.dim(),
        });
    }
    (0..f.grid().len())
        .map(|k| compatible_j(&model.omega_at(f.point(k))))
        .collect()
}

/// `(J̃v)(p) = J(f(p)) v(p)` with `J` compatible with `model`.
pub fn jtilde(f: &Embedding, v: &TangentField, model: &AmbientModel) -> Result<TangentField> {
    let js = j_along(f, model)?;
    map_field(f, v, |k| js[k].clone())
}

/// Cyclic finite-difference sum
/// `Σ_cyc [ω^D_{F+hVᵢ}(Vⱼ, Vₖ) − ω^D_{F−hVᵢ}(Vⱼ, Vₖ)] / 2h`
/// for constant extensions, returned in absolute value.
pub fn d_omega_d_fd(
    f: &Embedding,
    vs: [&TangentField; 3],
    h: f64,
    sigma: &AreaForm,
) -> Result<f64> {
    if !(1e-6..=1e-1).contains(&h) {
        return Err(Error::InvalidArgument(format!("step h = {h} outside [1e-6, 1e-1]")));
    }
    for v in vs {
        f.check_field(v)?;
    }
    f.grid().check(sigma.density())?;
    let model = f.model();
    let dim = f.dim();
    let rho = sigma.density().as_slice().expect("standard layout");
    let n = f.grid().len();
    let mut shifted = vec![0.0; dim];
    let mut omega_d_at = |shift: &TangentField, sign: f64, a: &TangentField, b: &TangentField| {
        let mut acc = 0.0;
        for (k, r) in rho.iter().enumerate().take(n) {
            for ((s, p), d) in shifted.iter_mut().zip(f.point(k)).zip(shift.at(k)) {
                *s = p + sign * h * d;
            }
            acc += bilinear(&model.omega_at(&shifted), a.at(k), b.at(k)) * r;
        }
        acc / n as f64
    };
    let mut total = 0.0;
    for c in 0..3 {
        let (vi, vj, vk) = (vs[c], vs[(c + 1) % 3], vs[(c + 2) % 3]);
        total += (omega_d_at(vi, 1.0, vj, vk) - omega_d_at(vi, -1.0, vj, vk)) / (2.0 * h);
    }
    Ok(total.abs())
}

/// `‖∂_yF − J(f) ∂_xF‖` pointwise (convention `j∂_x = ∂_y`).
pub fn cr_residual(f: &Embedding, model: &AmbientModel) -> Result<Array2<f64>> {
    let js = j_along(f, model)?;
    let ny = f.grid().ny();
    Ok(Array2::from_shape_fn(f.grid().shape(), |(i, j)| {
        let k = i * ny + j;
        let jx = &js[k] * DVector::from_column_slice(f.dx_at(k));
        jx.iter()
            .zip(f.dy_at(k))
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt()
    }))
}

/// `‖∂_y v − J ∂_x v‖` pointwise for a constant structure `J`.
pub fn cr_variation_residual(f: &Embedding, v: &TangentField, j: &DMatrix<f64>) -> Result<Array2<f64>> {
    f.check_field(v)?;
    if j.nrows() != f.dim() || j.ncols() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: j.nrows(),
        });
    }
    let sp = f.grid().spectral();
    let dim = f.dim();
    let vx: Vec<Array2<f64>> = (0..dim).map(|c| sp.dx(&v.component(c))).collect();
    let vy: Vec<Array2<f64>> = (0..dim).map(|c| sp.dy(&v.component(c))).collect();
    Ok(Array2::from_shape_fn(f.grid().shape(), |(p, q)| {
        let mut acc = 0.0;
        for r in 0..dim {
            let jx: f64 = (0..dim).map(|c| j[(r, c)] * vx[c][[p, q]]).sum();
            acc += (vy[r][[p, q]] - jx).powi(2);
        }
        acc.sqrt()
    }))
}

/// Per-point Euclidean norms of a field.
pub fn pointwise_norm(v: &TangentField) -> Array2<f64> {
    v.data().map_axis(Axis(2), |lane| lane.iter().map(|x| x * x).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{FourierTerm, OneFormTerm, ScalarHamiltonian};
    use crate::embedding::{hamiltonian_restriction, standard_winding, tangential_lift, LiftTerm};
    use crate::surface::{max_abs, surface_hamiltonian_field, SurfaceField, TorusGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    const TAU: f64 = 2.0 * PI;

    fn flat(n: usize) -> (TorusGrid, Embedding, AreaForm) {
        let g = TorusGrid::square(n).unwrap();
        let f = Embedding::flat(Arc::new(AmbientModel::standard(2).unwrap()), &g).unwrap();
        let s = AreaForm::unit(&g);
        (g, f, s)
    }

    fn perturbed_model(eps: f64) -> Arc<AmbientModel> {
        Arc::new(
            AmbientModel::standard(2)
                .unwrap()
                .with_perturbation(vec![OneFormTerm::new(3, FourierTerm::sine(vec![1, 0, 0, 0], eps / TAU))])
                .unwrap(),
        )
    }

    fn random_field(g: &TorusGrid, rng: &mut ChaCha8Rng) -> TangentField {
        let c: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        TangentField::from_fn(g, 4, |x, y, out| {
            for k in 0..4 {
                out[k] = c[k]
                    + c[k + 4] * (TAU * x).cos()
                    + c[k + 8] * (TAU * (x + y)).sin()
                    + c[k + 12] * (TAU * x).sin();
            }
        })
    }

    #[test]
    fn omega_d_examples() {
        let (g, f, s) = flat(32);
        let e3 = TangentField::constant(&g, &[0.0, 0.0, 1.0, 0.0]);
        let e4 = TangentField::constant(&g, &[0.0, 0.0, 0.0, 1.0]);
        assert!((omega_d(&f, &e3, &e4, &s).unwrap().value - 1.0).abs() < 1e-15);
        let cos = g.sample(|x, _| (TAU * x).cos());
        let u = TangentField::along(&g, 4, 3, &-&cos);
        let v = TangentField::along(&g, 4, 2, &cos);
        assert!((omega_d(&f, &u, &v, &s).unwrap().value - 0.5).abs() < 1e-14);
        assert_eq!(omega_d(&f, &u, &u, &s).unwrap().value, 0.0);
    }

    #[test]
    fn omega_s_examples() {
        let (g, f, _) = flat(32);
        let m4 = TangentField::constant(&g, &[0.0, 0.0, 0.0, -1.0]);
        let e3 = TangentField::constant(&g, &[0.0, 0.0, 1.0, 0.0]);
        assert!((omega_s(&f, &m4, &e3).unwrap().value - 2.0).abs() < 1e-14);
        let e1 = TangentField::constant(&g, &[1.0, 0.0, 0.0, 0.0]);
        let h = ScalarHamiltonian::new(vec![FourierTerm::new(vec![1, 1, 0, 1], 0.2, 0.1)]);
        let v = hamiltonian_restriction(&f, &h).unwrap();
        assert!(omega_s(&f, &e1, &v).unwrap().max_integrand() <= 1e-10);
        assert_eq!(omega_s(&f, &v, &v).unwrap().max_integrand(), 0.0);
    }

    #[test]
    fn jtilde_examples() {
        let (g, f, s) = flat(16);
        let e3 = TangentField::constant(&g, &[0.0, 0.0, 1.0, 0.0]);
        let je3 = jtilde(&f, &e3, f.model()).unwrap();
        assert!(je3.sub(&TangentField::constant(&g, &[0.0, 0.0, 0.0, 1.0])).max_abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = perturbed_model(0.3);
        let fp = Embedding::flat(model.clone(), &g).unwrap();
        for _ in 0..5 {
            let v = random_field(&g, &mut rng);
            let jv = jtilde(&fp, &v, &model).unwrap();
            let jjv = jtilde(&fp, &jv, &model).unwrap();
            assert!(jjv.add(&v).max_abs() < 1e-12);
            assert!(omega_d(&fp, &v, &jv, &s).unwrap().value > 0.0);
        }
    }

    #[test]
    fn closedness_on_constant_model_is_exact() {
        let (g, f, s) = flat(16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vs: Vec<_> = (0..3).map(|_| random_field(&g, &mut rng)).collect();
        for h in [1e-1, 1e-3, 1e-6] {
            assert!(d_omega_d_fd(&f, [&vs[0], &vs[1], &vs[2]], h, &s).unwrap() <= 1e-12);
        }
        assert!(d_omega_d_fd(&f, [&vs[0], &vs[0], &vs[2]], 1e-2, &s).unwrap() <= 1e-12);
        assert!(d_omega_d_fd(&f, [&vs[0], &vs[1], &vs[2]], 1.0, &s).is_err());
    }

    #[test]
    fn closedness_converges_at_second_order() {
        let g = TorusGrid::square(16).unwrap();
        let f = Embedding::flat(perturbed_model(0.5), &g).unwrap();
        let s = AreaForm::unit(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vs: Vec<_> = (0..3).map(|_| random_field(&g, &mut rng)).collect();
        let r = |h| d_omega_d_fd(&f, [&vs[0], &vs[1], &vs[2]], h, &s).unwrap();
        let mut h = 1e-2;
        for _ in 0..3 {
            let ratio = r(h) / r(h / 2.0);
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} at h {h}: {} {}", r(h), r(h / 2.0));
            h /= 2.0;
        }
    }

    #[test]
    fn cr_examples() {
        let (g, f, _) = flat(16);
        assert!(max_abs(&cr_residual(&f, f.model()).unwrap()) <= 1e-12);
        let fa = Embedding::sheared(f.model_arc().clone(), &g, 0.3).unwrap();
        assert!(max_abs(&cr_residual(&fa, fa.model()).unwrap()) > 0.1);
        let j0 = compatible_j(f.model().base_form()).unwrap();
        let v = TangentField::constant(&g, &[0.3, -1.0, 2.0, 0.5]);
        assert!(max_abs(&cr_variation_residual(&f, &v, &j0).unwrap()) < 1e-15);
        // J commutes with ∂ and is orthogonal, so J̃ preserves the residual pointwise.
        let w = TangentField::from_fn(&g, 4, |x, y, out| {
            out.copy_from_slice(&[(TAU * x).sin(), (TAU * y).cos(), 0.3, (TAU * (x + y)).sin()])
        });
        let jw = map_field(&f, &w, |_| j0.clone()).unwrap();
        let r = cr_variation_residual(&f, &w, &j0).unwrap();
        let rj = cr_variation_residual(&f, &jw, &j0).unwrap();
        assert!(max_abs(&r) > 1.0);
        assert!(max_abs(&(rj - r)) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn pairings_are_bilinear_and_antisymmetric(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
            let g = TorusGrid::square(16).unwrap();
            let f = Embedding::from_terms(perturbed_model(0.3), &g, standard_winding(4), &[0.0; 4], &[
                LiftTerm { component: 2, frequency: [1, 0], cos: 0.05, sin: 0.0 },
            ]).unwrap();
            let s = f.pullback_area_form().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (u, v, w) = (random_field(&g, &mut rng), random_field(&g, &mut rng), random_field(&g, &mut rng));
            let comb = u.scale(a).add(&v.scale(b));
            let d = |x: &TangentField, y: &TangentField| omega_d(&f, x, y, &s).unwrap().value;
            let sp = |x: &TangentField, y: &TangentField| omega_s(&f, x, y).unwrap().value;
            prop_assert!((d(&comb, &w) - a * d(&u, &w) - b * d(&v, &w)).abs() <= 1e-12);
            prop_assert!((sp(&comb, &w) - a * sp(&u, &w) - b * sp(&v, &w)).abs() <= 1e-12);
            prop_assert!((d(&u, &v) + d(&v, &u)).abs() <= 1e-12);
            prop_assert!((sp(&u, &v) + sp(&v, &u)).abs() <= 1e-12);
        }

        #[test]
        fn tangential_fields_degenerate_omega_s(seed in any::<u64>()) {
            let g = TorusGrid::square(32).unwrap();
            let f = Embedding::from_terms(perturbed_model(0.3), &g, standard_winding(4), &[0.0; 4], &[
                LiftTerm { component: 2, frequency: [0, 1], cos: 0.0, sin: 0.05 },
            ]).unwrap();
            let s = f.pullback_area_form().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = SurfaceField { x: g.constant(rng.gen_range(-1.0..1.0)), y: g.sample(|x, _| (TAU * x).sin()) };
            let tau = tangential_lift(&f, &x).unwrap();
            let h = ScalarHamiltonian::new(vec![FourierTerm::new(vec![1, 0, 1, 0], rng.gen_range(-0.2..0.2), 0.1)]);
            let psi = g.sample(|x, y| (TAU * (x - y)).cos() * 0.1);
            let v = hamiltonian_restriction(&f, &h).unwrap()
                .add(&tangential_lift(&f, &surface_hamiltonian_field(&g, &psi, &s).unwrap()).unwrap());
            prop_assert!(omega_s(&f, &tau, &v).unwrap().max_integrand() <= 1e-10);
        }
    }
}
