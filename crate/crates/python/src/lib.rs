//! Python bindings: rates, couplings, decoder failure rates and the exact
//! clean critical temperature.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use replab_core::decoder::logical_error_rate;
use replab_core::fss::exact_triangular_tc;
use replab_core::lattice::LatticeDims;
use replab_core::noise::{
    effective_rates_from_circuit, fundamental_probs, nishimori_couplings, CircuitNoiseParams, CouplingOptions,
    EffectiveRates,
};

fn err(e: replab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(p, q, r)` from circuit-level depolarizing rates.
#[pyfunction]
fn effective_rates(p_sp: f64, p_id: f64, p_1: f64, p_m: f64, p_2: f64) -> PyResult<(f64, f64, f64)> {
    let r = effective_rates_from_circuit(&CircuitNoiseParams {
        p_sp,
        p_id,
        p_1,
        p_m,
        p_2,
    })
    .map_err(err)?;
    Ok((r.p, r.q, r.r))
}

/// Cell probabilities `pi0..pi3`.
#[pyfunction]
fn cell_probabilities(p: f64, q: f64, r: f64) -> PyResult<[f64; 4]> {
    Ok(fundamental_probs(&EffectiveRates::new(p, q, r).map_err(err)?).pi)
}

/// `(J1, J2, J3, T_N)` with `J1 = 1`.
#[pyfunction]
fn couplings(p: f64, q: f64, r: f64) -> PyResult<(f64, f64, f64, f64)> {
    let rates = EffectiveRates::new(p, q, r).map_err(err)?;
    let nc = nishimori_couplings(&fundamental_probs(&rates), &CouplingOptions::default()).map_err(err)?;
    Ok((nc.j[0], nc.j[1], nc.j[2], nc.nishimori_temperature()))
}

/// `(rate, stderr)` of the matching decoder.
#[pyfunction]
#[pyo3(signature = (d, rounds, p, q, r, trials, seed=0))]
fn logical_failure_rate(
    d: usize,
    rounds: usize,
    p: f64,
    q: f64,
    r: f64,
    trials: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let dims = LatticeDims::new(d, rounds).map_err(err)?;
    let rates = EffectiveRates::new(p, q, r).map_err(err)?;
    let est = logical_error_rate(&dims, &rates, trials, seed).map_err(err)?;
    Ok((est.rate, est.stderr))
}

/// Critical temperature of the clean triangular ferromagnet.
#[pyfunction]
fn clean_tc(j1: f64, j2: f64, j3: f64) -> PyResult<f64> {
    exact_triangular_tc(j1, j2, j3).map_err(err)
}

#[pymodule]
fn replab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(effective_rates, m)?)?;
    m.add_function(wrap_pyfunction!(cell_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(couplings, m)?)?;
    m.add_function(wrap_pyfunction!(logical_failure_rate, m)?)?;
    m.add_function(wrap_pyfunction!(clean_tc, m)?)?;
    Ok(())
}
