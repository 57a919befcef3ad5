//! Seeded generators of band-limited test fields.
//!
//! Every stream is keyed by the scenario seed and a label, so suites draw the
//! same fields regardless of which other suites run or in what order.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::ambient::{FourierTerm, ScalarHamiltonian};
use crate::embedding::{hamiltonian_restriction, split_tangent, tangential_lift, Embedding, TangentField};
use crate::error::Result;
use crate::surface::{max_abs, surface_hamiltonian_field, AreaForm, SurfaceField, TorusGrid};

use super::scenario::FieldSpec;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A random stream for `label` under `seed`.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    let h = Sha256::digest(format!("{seed}/{label}").as_bytes());
    ChaCha8Rng::seed_from_u64(u64::from_le_bytes(h[..8].try_into().expect("8 bytes")))
}

/// Draws band-limited fields for one embedding and area form.
pub struct Sampler<'a> {
    pub f: &'a Embedding,
    pub sigma: &'a AreaForm,
    pub spec: FieldSpec,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(f: &'a Embedding, sigma: &'a AreaForm, spec: FieldSpec, label: &str) -> Self {
        Self {
            f,
            sigma,
            spec,
            rng: stream(spec.seed, label),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn grid(&self) -> &TorusGrid {
        self.f.grid()
    }

    /// Fourier modes with `|k_x|, |k_y| ≤ bandwidth`, coefficients damped by
    /// `1/(1 + |k|²)` and the result rescaled to sup-norm `amplitude`.
    pub fn scalar(&mut self) -> Array2<f64> {
        let b = self.spec.bandwidth as i64;
        let mut terms = Vec::new();
        for kx in -b..=b {
            for ky in 0..=b {
                if ky == 0 && kx <= 0 {
                    continue;
                }
                let damp = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
                let c = self.rng.gen_range(-1.0..1.0) * damp;
                let s = self.rng.gen_range(-1.0..1.0) * damp;
                terms.push((kx as f64, ky as f64, c, s));
            }
        }
        let mut field = self.grid().sample(|x, y| {
            terms
                .iter()
                .map(|&(kx, ky, c, s)| {
                    let p = TAU * (kx * x + ky * y);
                    c * p.cos() + s * p.sin()
                })
                .sum()
        });
        let m = max_abs(&field);
        if m > 0.0 {
            field *= self.spec.amplitude / m;
        }
        field
    }

    /// A field with every component drawn by [`Sampler::scalar`].
    pub fn tangent(&mut self) -> TangentField {
        let dim = self.f.dim();
        let comps: Vec<Array2<f64>> = (0..dim).map(|_| self.scalar()).collect();
        TangentField::from_components(self.grid(), &comps).expect("finite fields on the grid")
    }

    /// A Hamiltonian on `T^{2n}` with a few modes of frequency in `{−1, 0, 1}`.
    pub fn hamiltonian(&mut self) -> ScalarHamiltonian {
        let dim = self.f.dim();
        let terms = (0..4)
            .map(|_| {
                let mut k: Vec<i64> = (0..dim).map(|_| self.rng.gen_range(-1..=1)).collect();
                if k.iter().all(|&x| x == 0) {
                    let c = self.rng.gen_range(0..dim);
                    k[c] = 1;
                }
                let scale = self.spec.amplitude / TAU;
                FourierTerm::new(k, self.rng.gen_range(-1.0..1.0) * scale, self.rng.gen_range(-1.0..1.0) * scale)
            })
            .collect();
        ScalarHamiltonian::new(terms)
    }

    /// `V_H ∘ f` for a random `H`.
    pub fn hamiltonian_restriction(&mut self) -> Result<TangentField> {
        let h = self.hamiltonian();
        hamiltonian_restriction(self.f, &h)
    }

    /// A random σ-Hamiltonian surface field `X_ψ` with its `ψ`.
    pub fn sigma_hamiltonian(&mut self) -> Result<(Array2<f64>, SurfaceField)> {
        let psi = self.scalar();
        let x = surface_hamiltonian_field(self.grid(), &psi, self.sigma)?;
        Ok((psi, x))
    }

    /// `DF·X_ψ` for a random `ψ`.
    pub fn sigma_hamiltonian_lift(&mut self) -> Result<TangentField> {
        let (_, x) = self.sigma_hamiltonian()?;
        tangential_lift(self.f, &x)
    }

    /// `DF·X` for `X = (c₁/ρ, c₂/ρ)`, whose `ι_X σ = c₁dy − c₂dx` is closed with
    /// nonzero periods.
    pub fn harmonic_lift(&mut self) -> Result<TangentField> {
        let c1 = self.rng.gen_range(-1.0..1.0) * self.spec.amplitude;
        let c2 = self.rng.gen_range(-1.0..1.0) * self.spec.amplitude;
        let rho = self.sigma.density();
        let x = SurfaceField::new(self.grid(), rho.mapv(|r| c1 / r), rho.mapv(|r| c2 / r))?;
        tangential_lift(self.f, &x)
    }

    /// The ω-orthogonal part of a random field.
    pub fn orthogonal(&mut self) -> Result<TangentField> {
        let v = self.tangent();
        Ok(split_tangent(self.f, &v)?.orthogonal)
    }

    /// `V_H∘f + ξ` with `ξ` ω-orthogonal: `α` is exact.
    pub fn exact(&mut self) -> Result<TangentField> {
        Ok(self.hamiltonian_restriction()?.add(&self.orthogonal()?))
    }

    /// An exact field plus `DF·X_ψ` and a harmonic lift: `α` is closed when
    /// `σ = f*ω`, generally with nonzero periods.
    pub fn closed(&mut self) -> Result<TangentField> {
        let e = self.exact()?;
        let w = self.sigma_hamiltonian_lift()?;
        let h = self.harmonic_lift()?;
        Ok(e.add(&w).add(&h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientModel, OneFormTerm};
    use crate::embedding::{classify, ClassifyTolerances, Verdict};
    use std::sync::Arc;

    fn setup() -> (Embedding, AreaForm) {
        let g = TorusGrid::square(32).unwrap();
        let model = AmbientModel::standard(2)
            .unwrap()
            .with_perturbation(vec![OneFormTerm::new(3, FourierTerm::sine(vec![1, 0, 0, 0], 0.05))])
            .unwrap();
        let f = Embedding::sheared(Arc::new(model), &g, 0.2).unwrap();
        let sigma = f.pullback_area_form().unwrap();
        (f, sigma)
    }

    #[test]
    fn streams_are_reproducible_and_label_dependent() {
        let a: u64 = stream(1, "x").gen();
        let b: u64 = stream(1, "x").gen();
        let c: u64 = stream(1, "y").gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scalar_has_requested_amplitude_and_band() {
        let (f, sigma) = setup();
        let spec = FieldSpec {
            bandwidth: 2,
            ..FieldSpec::default()
        };
        let mut s = Sampler::new(&f, &sigma, spec, "t");
        let h = s.scalar();
        assert!((max_abs(&h) - spec.amplitude).abs() < 1e-15);
        let coeffs = f.grid().spectral().coefficients(&h);
        for ((i, j), c) in coeffs.indexed_iter() {
            let kx = crate::surface::wavenumber(i, 32).abs();
            let ky = crate::surface::wavenumber(j, 32).abs();
            if kx > 2 || ky > 2 {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn generated_classes_classify_as_intended() {
        let (f, sigma) = setup();
        let mut s = Sampler::new(&f, &sigma, FieldSpec::default(), "classes");
        let tol = ClassifyTolerances::default();
        assert_eq!(classify(&f, &s.exact().unwrap(), tol).unwrap().verdict, Verdict::Exact);
        assert_eq!(classify(&f, &s.closed().unwrap(), tol).unwrap().verdict, Verdict::ClosedNotExact);
        assert_eq!(classify(&f, &s.tangent(), tol).unwrap().verdict, Verdict::NotClosed);
    }
}
