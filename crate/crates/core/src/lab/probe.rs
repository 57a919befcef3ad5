//! Report-only probe of the converse direction: fields that pair to zero with
//! every σ-Hamiltonian tangential field need not be ω-orthogonal.

use crate::embedding::{split_tangent, tangential_lift, Embedding, TangentField};
use crate::error::Result;
use crate::forms::{omega_d, pointwise_norm};
use crate::surface::{max_abs, surface_hamiltonian_field, AreaForm, SurfaceField};

use super::report::{Observation, SuiteReport};
use super::sampling::Sampler;
use super::Lab;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Lifts of `X_ψ` for the real Fourier basis `ψ` up to `bandwidth`, plus the
/// two harmonic directions `(1/ρ, 0)` and `(0, 1/ρ)`.
fn spanning_partners(f: &Embedding, sigma: &AreaForm, bandwidth: i64) -> Result<Vec<TangentField>> {
    let g = f.grid();
    let mut out = Vec::new();
    for kx in -bandwidth..=bandwidth {
        for ky in 0..=bandwidth {
            if ky == 0 && kx <= 0 {
                continue;
            }
            for phase in [0.0, 0.25] {
                let psi = g.sample(|x, y| (TAU * (kx as f64 * x + ky as f64 * y + phase)).cos() / TAU);
                out.push(tangential_lift(f, &surface_hamiltonian_field(g, &psi, sigma)?)?);
            }
        }
    }
    let rho = sigma.density();
    for c in [[1.0, 0.0], [0.0, 1.0]] {
        let x = SurfaceField::new(g, rho.mapv(|r| c[0] / r), rho.mapv(|r| c[1] / r))?;
        out.push(tangential_lift(f, &x)?);
    }
    Ok(out)
}

fn worst_pairing(f: &Embedding, v: &TangentField, partners: &[TangentField], sigma: &AreaForm) -> Result<f64> {
    partners
        .iter()
        .try_fold(0.0f64, |m, w| Ok(m.max(omega_d(f, v, w, sigma)?.value.abs())))
}

/// `‖τ_v‖∞ / ‖v‖∞`.
fn tangential_fraction(f: &Embedding, v: &TangentField) -> Result<f64> {
    let sp = split_tangent(f, v)?;
    Ok(max_abs(&pointwise_norm(&sp.tangential)) / max_abs(&pointwise_norm(v)).max(f64::MIN_POSITIVE))
}

pub fn probe_converse(lab: &Lab) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("probe_converse", false);
    let bandwidth = lab.scenario.fields.bandwidth as i64;

    // v = −cos(2πx) e₂ on the flat torus: tangential, yet it pairs to zero
    // with every symplectic tangential field.
    let model = std::sync::Arc::new(lab.model.constant_part());
    let f0 = Embedding::flat(model, &lab.grid)?;
    let unit = AreaForm::unit(&lab.grid);
    let c = lab.grid.sample(|x, _| -(TAU * x).cos());
    let v = TangentField::along(&lab.grid, f0.dim(), 1, &c);
    let partners = spanning_partners(&f0, &unit, bandwidth)?;
    rep.observe(
        Observation::new("counterexample_max_pairing", worst_pairing(&f0, &v, &partners, &unit)?)
            .with_note("v = −cos(2πx)e₂ on the flat torus against a spanning set of symplectic tangential fields"),
    );
    rep.observe(
        Observation::new("counterexample_tangential_fraction", tangential_fraction(&f0, &v)?)
            .with_note("1 means v lies entirely in the tangent plane"),
    );

    // v = −0.7 e₂ is closed but not exact and pairs to 0.7 with the lift of (1, 0).
    let mut c = vec![0.0; f0.dim()];
    c[1] = -0.7;
    let v = TangentField::constant(&lab.grid, &c);
    let e1 = tangential_lift(&f0, &SurfaceField::constant(&lab.grid, [1.0, 0.0]))?;
    rep.observe(
        Observation::new("closed_non_exact_pairing", omega_d(&f0, &v, &e1, &unit)?.value)
            .with_note("v = −0.7e₂ against the lift of (1, 0); nonzero as expected for a non-exact direction"),
    );

    // Random exact fields on the scenario embedding.
    let partners = spanning_partners(&lab.f, &lab.sigma, bandwidth)?;
    let mut sampler = Sampler::new(&lab.f, &lab.sigma, lab.scenario.fields, "probe_converse");
    for i in 0..lab.scenario.fields.samples.min(10) {
        let v = sampler.exact()?;
        rep.observe(Observation::new(
            format!("exact_{i}_max_pairing"),
            worst_pairing(&lab.f, &v, &partners, &lab.sigma)?,
        ));
        rep.observe(Observation::new(
            format!("exact_{i}_tangential_fraction"),
            tangential_fraction(&lab.f, &v)?,
        ));
    }
    Ok(rep)
}
