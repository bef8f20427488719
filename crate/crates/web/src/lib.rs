//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs nothing beyond `JSON.parse`. Errors come back as `{"error": "..."}`.

use qfluct_core::dynamics::{superoperator_matrix, superoperator_snapshots, PropagationConfig, Superoperator};
use qfluct_core::models::{build_three_level, Occupation, ThreeLevelParams};
use qfluct_core::operator::{coherence_l1, energy_basis, DensityMatrix, EnergyBasis, DEFAULT_DEGENERACY_TOL};
use qfluct_core::protocols::{energy_change_distribution, joint, DEFAULT_MERGE_TOL};
use qfluct_core::sampling::{coherence_extremes, sample_density_hs, DensitySampler, SamplerConfig};
use qfluct_core::statistics::{jarzynski_epm, second_moment_closed_form, shannon_entropy, thermal_state};
use qfluct_core::{Protocol, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Step used by the demo; coarser than the batch default to stay interactive.
const DEMO_DT: f64 = 1e-2;

fn params(drive: bool, bose: bool) -> ThreeLevelParams {
    ThreeLevelParams {
        include_drive: drive,
        occupation: if bose { Occupation::Bose } else { Occupation::Paper },
        ..ThreeLevelParams::paper()
    }
}

fn basis_of(p: &ThreeLevelParams) -> Result<EnergyBasis> {
    let model = build_three_level(p)?;
    energy_basis(model.h_free(), DEFAULT_DEGENERACY_TOL)
}

fn channel_at(p: &ThreeLevelParams, t: f64) -> Result<Superoperator> {
    let model = build_three_level(p)?;
    let dt = DEMO_DT.min(t.max(DEMO_DT * 1e-3));
    superoperator_matrix(&model, &PropagationConfig::new(0.0, t).with_dt(dt))
}

fn to_json(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Relative coherence contribution to the EPM second moment over time for a
/// seeded ensemble: the band envelope plus the least and most coherent states.
pub fn coherence_band_value(count: usize, seed: u64, t_f: f64, n_snapshots: usize, drive: bool) -> Result<Value> {
    let p = params(drive, false);
    let model = build_three_level(&p)?;
    let basis = basis_of(&p)?;
    let states = sample_density_hs(&SamplerConfig { dim: 3, count: count.max(1), seed });
    let ext = coherence_extremes(&states, &basis)?;
    let times = PropagationConfig::uniform_snapshots(0.0, t_f, n_snapshots.max(1));
    let config = PropagationConfig::new(0.0, t_f).with_dt(DEMO_DT).with_snapshots(times.clone());
    let channels = superoperator_snapshots(&model, &config)?;

    let (mut lower, mut upper, mut least, mut most) = (vec![], vec![], vec![], vec![]);
    for (_, map) in &channels {
        let values = states
            .iter()
            .map(|s| Ok(second_moment_closed_form(s, &basis, &basis, map)?.relative_coherence()))
            .collect::<Result<Vec<f64>>>()?;
        lower.push(values.iter().copied().fold(f64::INFINITY, f64::min));
        upper.push(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        least.push(values[ext.min_index]);
        most.push(values[ext.max_index]);
    }
    Ok(json!({
        "times": times,
        "lower": lower,
        "upper": upper,
        "min_cl1": { "index": ext.min_index, "coherence": ext.min_value, "values": least },
        "max_cl1": { "index": ext.max_index, "coherence": ext.max_value, "values": most },
    }))
}

/// EPM, TPM and MLL energy-change distributions at time `t` for a seeded
/// random state.
pub fn distributions_value(seed: u64, t: f64, drive: bool) -> Result<Value> {
    let p = params(drive, false);
    let basis = basis_of(&p)?;
    let rho = DensitySampler::new(seed).sample(3);
    let map = channel_at(&p, t)?;
    let mut out = serde_json::Map::new();
    for protocol in Protocol::ALL {
        let table = joint(protocol, &rho, &basis, &basis, &map)?;
        let dist = energy_change_distribution(&table, DEFAULT_MERGE_TOL);
        let atoms: Vec<Value> = dist
            .atoms()
            .iter()
            .map(|a| json!({ "delta_e": a.delta_e, "p": a.prob }))
            .collect();
        out.insert(
            protocol.name().to_string(),
            json!({ "atoms": atoms, "entropy": shannon_entropy(&table) }),
        );
    }
    out.insert("coherence_l1".into(), json!(coherence_l1(&rho, &basis)?));
    out.insert("purity".into(), json!(rho.purity()));
    Ok(Value::Object(out))
}

/// Both sides of the fluctuation relation for a Gibbs state at `beta` plus a
/// seeded coherence perturbation of relative size `strength` in `[0, 1)`.
pub fn jarzynski_value(beta: f64, strength: f64, seed: u64, t: f64, drive: bool) -> Result<Value> {
    let p = params(drive, true);
    let model = build_three_level(&p)?;
    let basis = basis_of(&p)?;
    let thermal = thermal_state(model.h_free(), beta)?;
    let mut sampler = DensitySampler::new(seed);
    let mut chi = qfluct_core::sampling::random_hermitian(&mut sampler, 3);
    for i in 0..3 {
        chi[(i, i)] = qfluct_core::C64::new(0.0, 0.0);
    }
    let spread = qfluct_core::operator::eigh(&chi)?.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
    let room = qfluct_core::operator::eigh(thermal.matrix())?.values()[0];
    let scale = if spread > 0.0 { strength.clamp(0.0, 0.99) * room / spread } else { 0.0 };
    let rho = DensityMatrix::new(thermal.matrix() + chi.scale(scale))?;
    let map = channel_at(&p, t)?;
    let r = jarzynski_epm(&rho, &basis, &basis, &map, beta)?;
    Ok(json!({
        "lhs": r.lhs,
        "rhs_thermal": r.rhs_thermal,
        "rhs_coherence": r.rhs_coherence,
        "unitality_residual": r.unitality_residual,
        "ratio_general": r.ratio_general,
        "ratio_measured": r.ratio_measured,
        "delta_f": r.thermal.delta_f,
        "coherence_l1": coherence_l1(&rho, &basis)?,
    }))
}

#[wasm_bindgen]
pub fn coherence_band(count: u32, seed: u32, t_f: f64, n_snapshots: u32, drive: bool) -> String {
    to_json(coherence_band_value(count as usize, seed as u64, t_f, n_snapshots as usize, drive))
}

#[wasm_bindgen]
pub fn distributions(seed: u32, t: f64, drive: bool) -> String {
    to_json(distributions_value(seed as u64, t, drive))
}

#[wasm_bindgen]
pub fn jarzynski(beta: f64, strength: f64, seed: u32, t: f64, drive: bool) -> String {
    to_json(jarzynski_value(beta, strength, seed as u64, t, drive))
}
