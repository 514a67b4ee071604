use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sample::sample_feasible;
use crate::cpz::Cpz;
use crate::error::{shape, Error, Result};
use crate::id::FactorAssignment;
use crate::io::{NoiseRecord, Trajectory};
use crate::learning::{DataBatch, ModelSet, MonomialBasis, Transition};
use crate::reach::{ReachConfig, ReachResult};

/// Factor values drawn at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepWitness {
    pub input: FactorAssignment,
    pub noise: FactorAssignment,
}

/// A simulated trajectory together with every factor value that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTrace {
    pub states: Vec<DVector<f64>>,
    pub initial: FactorAssignment,
    pub steps: Vec<StepWitness>,
    /// Values of the model-set factors that reproduce the true system.
    pub noise_matrix_factors: FactorAssignment,
    pub seed: Option<u64>,
}

impl WitnessTrace {
    /// All recorded factors up to (excluding) step `k`, plus the model witness.
    pub fn factors_until(&self, k: usize) -> FactorAssignment {
        let mut out = self.initial.clone();
        out.extend(&self.noise_matrix_factors);
        for s in &self.steps[..k] {
            out.extend(&s.input);
            out.extend(&s.noise);
        }
        out
    }
}

/// Rolls `f` forward from a recorded trace; `simulate` uses this same path.
pub fn replay<F>(
    f: F,
    x0: &Cpz,
    inputs: &[Cpz],
    noise: &[Cpz],
    trace: &WitnessTrace,
) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
{
    if inputs.len() != noise.len() || trace.steps.len() != inputs.len() {
        return Err(shape("one input set, noise set and witness per step"));
    }
    let mut x = x0.eval_point(&trace.initial)?;
    let mut states = vec![x.clone()];
    for ((u, w), s) in inputs.iter().zip(noise).zip(&trace.steps) {
        let uk = u.eval_point(&s.input)?;
        let wk = w.eval_point(&s.noise)?;
        x = f(&x, &uk) + wk;
        states.push(x.clone());
    }
    Ok(states)
}

/// Simulates `x⁺ = f(x, u) + w` drawing `x₀`, every `uₖ` and `wₖ` from the given sets.
pub fn simulate<F, R>(
    f: F,
    x0: &Cpz,
    inputs: &[Cpz],
    noise: &[Cpz],
    rng: &mut R,
) -> Result<WitnessTrace>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
    R: Rng + ?Sized,
{
    if inputs.len() != noise.len() {
        return Err(shape("one input set and one noise set per step"));
    }
    let initial = sample_feasible(x0, rng)?;
    let mut steps = Vec::with_capacity(inputs.len());
    for (u, w) in inputs.iter().zip(noise) {
        steps.push(StepWitness {
            input: sample_feasible(u, rng)?,
            noise: sample_feasible(w, rng)?,
        });
    }
    let mut trace = WitnessTrace {
        states: Vec::new(),
        initial,
        steps,
        noise_matrix_factors: FactorAssignment::new(),
        seed: None,
    };
    trace.states = replay(f, x0, inputs, noise, &trace)?;
    Ok(trace)
}

pub fn simulate_lti<R: Rng + ?Sized>(
    phi: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    x0: &Cpz,
    inputs: &[Cpz],
    noise: &[Cpz],
    rng: &mut R,
) -> Result<WitnessTrace> {
    simulate(|x, u| phi * x + gamma * u, x0, inputs, noise, rng)
}

pub fn simulate_poly<R: Rng + ?Sized>(
    theta: &DMatrix<f64>,
    basis: &MonomialBasis,
    x0: &Cpz,
    inputs: &[Cpz],
    noise: &[Cpz],
    rng: &mut R,
) -> Result<WitnessTrace> {
    simulate(
        |x, u| {
            theta
                * basis.eval(
                    x.as_slice()
                        .iter()
                        .chain(u.as_slice())
                        .copied()
                        .collect::<Vec<_>>()
                        .as_slice(),
                )
        },
        x0,
        inputs,
        noise,
        rng,
    )
}

/// Trajectories with the noise factors behind every transition.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordedData {
    pub trajectories: Vec<Trajectory>,
    /// One record per transition, in trajectory order.
    pub noise: Vec<NoiseRecord>,
}

impl RecordedData {
    /// Noise factor values per transition, flattened in trajectory order.
    pub fn sigmas(&self) -> Vec<Vec<f64>> {
        self.noise.iter().map(|r| r.sigma.clone()).collect()
    }

    /// All transitions as one data batch, columns in trajectory order.
    pub fn batch(&self) -> Result<DataBatch> {
        let batches = self
            .trajectories
            .iter()
            .map(Trajectory::batch)
            .collect::<Result<Vec<_>>>()?;
        DataBatch::concat(&batches)
    }

    pub fn transitions(&self) -> Vec<Transition> {
        self.trajectories
            .iter()
            .flat_map(Trajectory::transitions)
            .collect()
    }
}

/// Generates `starts.len()` trajectories of `length` transitions with inputs drawn
/// from `input_set` and noise from `zw`; noise values are recorded in the factor
/// order of `zw`.
pub fn record_trajectories<F, R>(
    f: F,
    starts: &[DVector<f64>],
    input_set: &Cpz,
    zw: &Cpz,
    length: usize,
    rng: &mut R,
) -> Result<RecordedData>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
    R: Rng + ?Sized,
{
    let mut trajectories = Vec::with_capacity(starts.len());
    let mut noise = Vec::with_capacity(starts.len() * length);
    for (i, x0) in starts.iter().enumerate() {
        let mut states = vec![x0.clone()];
        let mut inputs = Vec::with_capacity(length);
        for k in 0..length {
            let u = input_set.eval_point(&sample_feasible(input_set, rng)?)?;
            let sigma = sample_feasible(zw, rng)?.values_for(zw.id())?;
            let w = zw.eval_aligned(&sigma);
            let next = f(&states[k], &u) + w;
            states.push(next);
            inputs.push(u);
            noise.push(NoiseRecord {
                traj: i as u64,
                k,
                sigma,
            });
        }
        trajectories.push(Trajectory {
            id: i as u64,
            states,
            inputs,
        });
    }
    Ok(RecordedData {
        trajectories,
        noise,
    })
}

/// Values of the noise-matrix factors of `model` that reproduce the recorded noise.
///
/// `sigmas` lists the noise factor values of every data column in the order the
/// batches were learned: the offline batch first, then each refinement batch.
pub fn noise_witness(model: &ModelSet, sigmas: &[Vec<f64>]) -> Result<FactorAssignment> {
    let mut out = FactorAssignment::new();
    let mut cursor = 0;
    for nc in &model.noise_columns {
        for col in &nc.column_ids {
            let sigma = sigmas.get(cursor).ok_or_else(|| {
                Error::InvalidArgument(format!("no recorded noise for data column {cursor}"))
            })?;
            if sigma.len() != col.len() {
                return Err(shape(format!(
                    "column {cursor}: {} values for {} factors",
                    sigma.len(),
                    col.len()
                )));
            }
            for (id, v) in col.iter().zip(sigma) {
                out.insert(*id, *v)?;
            }
            cursor += 1;
        }
    }
    Ok(out)
}

/// Simulates one trajectory through the factors a reach run injected: initial
/// state from the initial set, inputs and noise from the per-step sets with the
/// logged ids, and the model witness from the recorded data noise.
pub fn simulate_run<F, R>(
    f: F,
    cfg: &ReachConfig,
    result: &ReachResult,
    data_sigmas: &[Vec<f64>],
    rng: &mut R,
) -> Result<WitnessTrace>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
    R: Rng + ?Sized,
{
    let (inputs, noise): (Vec<Cpz>, Vec<Cpz>) = result.injected_sets(cfg)?.into_iter().unzip();
    let mut trace = simulate(f, &cfg.initial_set, &inputs, &noise, rng)?;
    if let Some(last) = result.model_history.last() {
        trace.noise_matrix_factors = noise_witness(&last.model, data_sigmas)?;
    }
    trace.seed = Some(cfg.seed);
    Ok(trace)
}

/// Largest deviation `max_k ‖R_k(σ) − x_k‖∞` between the reachable sets evaluated
/// at the recorded factors and the simulated states.
pub fn witness_error(result: &ReachResult, trace: &WitnessTrace) -> Result<f64> {
    if trace.states.len() != result.sets.len() {
        return Err(shape("trace and run have different horizons"));
    }
    let mut worst: f64 = 0.0;
    for (k, (set, x)) in result.sets.iter().zip(&trace.states).enumerate() {
        let y = set.eval_point(&trace.factors_until(k))?;
        worst = worst.max((y - x).amax());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{lti_gamma, lti_phi};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_is_deterministic_rollout() {
        let (phi, gamma) = (lti_phi(), lti_gamma());
        let x0 = Cpz::point(DVector::from_element(5, 1.0));
        let u = vec![Cpz::point(DVector::from_element(1, 10.0)); 3];
        let w = vec![Cpz::point(DVector::zeros(5)); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = simulate_lti(&phi, &gamma, &x0, &u, &w, &mut rng).unwrap();
        let mut x = DVector::from_element(5, 1.0);
        for k in 1..=3 {
            x = &phi * &x + &gamma * DVector::from_element(1, 10.0);
            assert_eq!(trace.states[k], x);
        }
    }

    #[test]
    fn replay_is_bitwise() {
        let (phi, gamma) = (lti_phi(), lti_gamma());
        let x0 = crate::systems::lti_initial_nonconvex();
        let u: Vec<Cpz> = (0..4).map(|_| crate::systems::lti_input_set()).collect();
        let w: Vec<Cpz> = (0..4).map(|_| crate::systems::lti_noise_set()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trace = simulate_lti(&phi, &gamma, &x0, &u, &w, &mut rng).unwrap();
        let again = replay(|x, v| &phi * x + &gamma * v, &x0, &u, &w, &trace).unwrap();
        assert_eq!(again, trace.states);
        let json = serde_json::to_string(&trace).unwrap();
        let back: WitnessTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, trace);
    }
}
