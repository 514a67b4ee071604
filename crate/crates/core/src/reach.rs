//! Reachable-set propagation for linear and polynomial systems with known or
//! data-driven models.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    add_exact, cartesian_exact, compact_cpz, hadamard_compact, hadamard_exact, map_linear,
    mul_cpmz_cpz, mul_cpmz_cpz_compact, pow_compact, pow_exact, project, reduce,
};
use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::{shape, Error, Result};
use crate::id::FactorId;
use crate::learning::{
    concat_noise, model_set_lti, model_set_poly, refine, regressor_matrix, DataBatch, ModelSet,
    MonomialBasis, Transition,
};
use crate::linalg::numerical_rank;

/// Parameters shared by the three algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachConfig {
    pub horizon: usize,
    /// Minimum number of online samples before a refinement is attempted.
    pub batch_length: usize,
    /// Generator order: when set, each new set is reduced to at most `order · n` generators.
    pub reduction_order: Option<usize>,
    pub seed: u64,
    pub noise_set: Cpz,
    /// Input set per step; the last entry is reused for later steps.
    pub input_sets: Vec<Cpz>,
    pub initial_set: Cpz,
    /// Use one input factor set for all steps instead of fresh factors per step.
    pub constant_input: bool,
    /// Merge equal monomials after every product. Exact; off only for accounting tests.
    pub compact: bool,
}

impl ReachConfig {
    pub fn new(
        initial_set: Cpz,
        input_set: Cpz,
        noise_set: Cpz,
        horizon: usize,
        batch_length: usize,
    ) -> Self {
        Self {
            horizon,
            batch_length,
            reduction_order: None,
            seed: 0,
            noise_set,
            input_sets: vec![input_set],
            initial_set,
            constant_input: false,
            compact: true,
        }
    }

    fn input_template(&self, k: usize) -> &Cpz {
        &self.input_sets[k.min(self.input_sets.len() - 1)]
    }

    fn validate(&self, min_batch: usize) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.input_sets.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one input set is required".into(),
            ));
        }
        if self.batch_length < min_batch {
            return Err(Error::InvalidArgument(format!(
                "batch length {} is below the required {min_batch}",
                self.batch_length
            )));
        }
        let nx = self.initial_set.dim();
        if self.noise_set.dim() != nx {
            return Err(shape(format!(
                "noise set has dimension {}, state has {nx}",
                self.noise_set.dim()
            )));
        }
        let nu = self.input_sets[0].dim();
        if self.input_sets.iter().any(|u| u.dim() != nu) {
            return Err(shape("input sets differ in dimension"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: usize,
    pub generators: usize,
    pub constraints: usize,
    pub factors: usize,
    pub millis: f64,
}

/// Factors injected at one step, in the factor order of the input/noise templates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFactors {
    pub step: usize,
    pub input_ids: Vec<FactorId>,
    pub noise_ids: Vec<FactorId>,
    /// Index into `model_history` of the model used for this step.
    pub model_version: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    /// First step propagated with this model.
    pub step: usize,
    pub model: ModelSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachResult {
    /// `sets[k]` encloses the states at time `k`; `sets[0]` is the initial set.
    pub sets: Vec<Cpz>,
    pub model_history: Vec<ModelSnapshot>,
    pub stats: Vec<StepStats>,
    pub factor_log: Vec<StepFactors>,
    pub seed: u64,
}

/// One LTI step `M ⊗ (R × U) ⊞ W`.
pub fn step_lti(m: &ModelSet, rk: &Cpz, uk: &Cpz, zw: &Cpz) -> Result<Cpz> {
    add_exact(&mul_cpmz_cpz(&m.set, &cartesian_exact(rk, uk))?, zw)
}

fn step_lti_compact(m: &Cpmz, rk: &Cpz, uk: &Cpz, zw: &Cpz) -> Result<Cpz> {
    let prod = mul_cpmz_cpz_compact(m, &cartesian_exact(rk, uk))?;
    Ok(compact_cpz(&add_exact(&prod, zw)?))
}

/// `h(Z)` as a set: row `j` is `∏ₗ Zₗ^{αⱼₗ}` with all factors shared with `Z`.
pub fn monomial_image(z: &Cpz, basis: &MonomialBasis) -> Result<Cpz> {
    monomial_image_impl(z, basis, false)
}

/// [`monomial_image`] with compaction after every product.
pub fn monomial_image_compact(z: &Cpz, basis: &MonomialBasis) -> Result<Cpz> {
    monomial_image_impl(z, basis, true)
}

fn monomial_image_impl(z: &Cpz, basis: &MonomialBasis, compact: bool) -> Result<Cpz> {
    if z.dim() != basis.n_z() {
        return Err(shape(format!(
            "basis has {} variables, set has dimension {}",
            basis.n_z(),
            z.dim()
        )));
    }
    let coords: Vec<Cpz> = (0..z.dim())
        .map(|l| project(z, &[l]))
        .collect::<Result<_>>()?;
    let mut rows: Vec<Cpz> = Vec::with_capacity(basis.len());
    for alpha in basis.exponents() {
        let mut m: Option<Cpz> = None;
        for (l, &e) in alpha.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = if compact {
                pow_compact(&coords[l], e)
            } else {
                pow_exact(&coords[l], e)
            };
            m = Some(match m {
                None => pw,
                Some(acc) if compact => hadamard_compact(&acc, &pw)?,
                Some(acc) => hadamard_exact(&acc, &pw)?,
            });
        }
        rows.push(m.unwrap_or_else(|| Cpz::point(nalgebra::DVector::from_element(1, 1.0))));
    }
    let mut out = rows
        .first()
        .cloned()
        .unwrap_or_else(|| Cpz::point(nalgebra::DVector::zeros(0)));
    for r in rows.iter().skip(1) {
        out = cartesian_exact(&out, r);
    }
    Ok(if compact { compact_cpz(&out) } else { out })
}

/// Template for fresh factor bookkeeping across steps.
struct Injector<'a> {
    cfg: &'a ReachConfig,
    constant_input: Option<(Cpz, Vec<FactorId>)>,
}

impl<'a> Injector<'a> {
    fn new(cfg: &'a ReachConfig) -> Self {
        let constant_input = cfg
            .constant_input
            .then(|| cfg.input_sets[0].with_fresh_ids());
        Self {
            cfg,
            constant_input,
        }
    }

    fn input(&self, k: usize) -> (Cpz, Vec<FactorId>) {
        match &self.constant_input {
            Some(u) => u.clone(),
            None => self.cfg.input_template(k).with_fresh_ids(),
        }
    }

    fn noise(&self) -> (Cpz, Vec<FactorId>) {
        self.cfg.noise_set.with_fresh_ids()
    }
}

fn finish_step(cfg: &ReachConfig, set: Cpz) -> Result<Cpz> {
    match cfg.reduction_order {
        Some(order) => reduce(&set, order.max(1) * set.dim()),
        None => Ok(set),
    }
}

fn stats_for(step: usize, s: &Cpz, millis: f64) -> StepStats {
    StepStats {
        step,
        generators: s.num_generators(),
        constraints: s.num_constraints(),
        factors: s.num_factors(),
        millis,
    }
}

type BatchFn<'a, T> = Box<dyn Fn(&DataBatch) -> Result<T> + 'a>;

/// Online refinement state: buffers transitions and refines when a batch is usable.
struct Refiner<'a> {
    buffer: Vec<Transition>,
    next_tag: u64,
    min_len: usize,
    learn: BatchFn<'a, ModelSet>,
    rank_ok: BatchFn<'a, bool>,
}

impl Refiner<'_> {
    /// Appends samples; returns the refined model when a batch became eligible.
    fn absorb(&mut self, incoming: &[Transition], current: &ModelSet) -> Result<Option<ModelSet>> {
        let mut model: Option<ModelSet> = None;
        for tr in incoming {
            self.buffer.push(tr.clone());
            if self.buffer.len() < self.min_len {
                continue;
            }
            let batch = DataBatch::from_transitions(&self.buffer)?.with_tag(self.next_tag);
            if !(self.rank_ok)(&batch)? {
                continue;
            }
            let fresh = (self.learn)(&batch)?;
            let base = model.as_ref().unwrap_or(current);
            model = Some(refine(base, &fresh)?);
            self.next_tag += 1;
            self.buffer.clear();
        }
        Ok(model)
    }
}

enum Dynamics<'a> {
    Lti,
    PolyModel {
        theta: &'a DMatrix<f64>,
        basis: &'a MonomialBasis,
    },
    PolyData {
        basis: &'a MonomialBasis,
    },
}

fn propagate(
    cfg: &ReachConfig,
    dynamics: Dynamics<'_>,
    initial_model: Option<ModelSet>,
    stream: &[Vec<Transition>],
    mut refiner: Option<Refiner<'_>>,
) -> Result<ReachResult> {
    let injector = Injector::new(cfg);
    let mut sets = vec![cfg.initial_set.clone()];
    let mut stats = vec![stats_for(0, &cfg.initial_set, 0.0)];
    let mut history: Vec<ModelSnapshot> = Vec::new();
    if let Some(m) = initial_model {
        history.push(ModelSnapshot { step: 0, model: m });
    }
    let mut factor_log = Vec::with_capacity(cfg.horizon);
    for k in 0..cfg.horizon {
        let started = Instant::now();
        if let (Some(r), Some(batch)) = (refiner.as_mut(), stream.get(k)) {
            let current = &history
                .last()
                .expect("data-driven runs start with a model")
                .model;
            if let Some(m) = r.absorb(batch, current)? {
                history.push(ModelSnapshot { step: k, model: m });
            }
        }
        let (uk, input_ids) = injector.input(k);
        let (wk, noise_ids) = injector.noise();
        let rk = sets.last().expect("nonempty");
        let next = match &dynamics {
            Dynamics::Lti => {
                let m = &history.last().expect("model").model;
                if cfg.compact {
                    step_lti_compact(&m.set, rk, &uk, &wk)?
                } else {
                    step_lti(m, rk, &uk, &wk)?
                }
            }
            Dynamics::PolyModel { theta, basis } => {
                let z = cartesian_exact(rk, &uk);
                if cfg.compact {
                    let h = monomial_image_compact(&z, basis)?;
                    compact_cpz(&add_exact(&map_linear(theta, &h)?, &wk)?)
                } else {
                    add_exact(&map_linear(theta, &monomial_image(&z, basis)?)?, &wk)?
                }
            }
            Dynamics::PolyData { basis } => {
                let m = &history.last().expect("model").model;
                let z = cartesian_exact(rk, &uk);
                if cfg.compact {
                    let h = monomial_image_compact(&z, basis)?;
                    compact_cpz(&add_exact(&mul_cpmz_cpz_compact(&m.set, &h)?, &wk)?)
                } else {
                    add_exact(&mul_cpmz_cpz(&m.set, &monomial_image(&z, basis)?)?, &wk)?
                }
            }
        };
        let next = finish_step(cfg, next)?;
        let millis = started.elapsed().as_secs_f64() * 1e3;
        stats.push(stats_for(k + 1, &next, millis));
        factor_log.push(StepFactors {
            step: k,
            input_ids,
            noise_ids,
            model_version: history.len().saturating_sub(1),
        });
        sets.push(next);
    }
    Ok(ReachResult {
        sets,
        model_history: history,
        stats,
        factor_log,
        seed: cfg.seed,
    })
}

/// Data-driven LTI reachability: offline model set, online refinement, exact propagation.
///
/// `stream[k]` holds the samples that arrive before step `k` is propagated.
pub fn run_lti(
    cfg: &ReachConfig,
    offline: &DataBatch,
    stream: &[Vec<Transition>],
) -> Result<ReachResult> {
    let nx = cfg.initial_set.dim();
    let nu = cfg.input_sets.first().map_or(0, Cpz::dim);
    cfg.validate(nx + nu)?;
    if offline.n_x() != nx || offline.n_u() != nu {
        return Err(shape("offline data dimensions differ from the sets"));
    }
    let mw = concat_noise(&cfg.noise_set, offline.len())?;
    let m0 = model_set_lti(&offline.clone().with_tag(0), &mw)?;
    let zw = cfg.noise_set.clone();
    let refiner = Refiner {
        buffer: Vec::new(),
        next_tag: 1,
        min_len: cfg.batch_length,
        learn: Box::new(move |b: &DataBatch| model_set_lti(b, &concat_noise(&zw, b.len())?)),
        rank_ok: Box::new(move |b: &DataBatch| Ok(numerical_rank(&b.stacked()) == nx + nu)),
    };
    propagate(cfg, Dynamics::Lti, Some(m0), stream, Some(refiner))
}

/// Model-based polynomial reachability `R_{k+1} = Θ h(R_k × U_k) ⊞ W`.
pub fn run_poly_model(
    cfg: &ReachConfig,
    theta: &DMatrix<f64>,
    basis: &MonomialBasis,
) -> Result<ReachResult> {
    cfg.validate(0)?;
    let nz = cfg.initial_set.dim() + cfg.input_sets[0].dim();
    if basis.n_z() != nz || theta.ncols() != basis.len() || theta.nrows() != cfg.initial_set.dim() {
        return Err(shape("Θ, basis and sets do not conform"));
    }
    propagate(cfg, Dynamics::PolyModel { theta, basis }, None, &[], None)
}

/// Data-driven polynomial reachability with online refinement.
pub fn run_poly_data(
    cfg: &ReachConfig,
    offline: &DataBatch,
    stream: &[Vec<Transition>],
    basis: &MonomialBasis,
) -> Result<ReachResult> {
    cfg.validate(basis.len())?;
    let mw = concat_noise(&cfg.noise_set, offline.len())?;
    let m0 = model_set_poly(&offline.clone().with_tag(0), basis, &mw)?;
    let zw = cfg.noise_set.clone();
    let ma = basis.len();
    let refiner = Refiner {
        buffer: Vec::new(),
        next_tag: 1,
        min_len: cfg.batch_length,
        learn: Box::new(move |b: &DataBatch| {
            model_set_poly(b, basis, &concat_noise(&zw, b.len())?)
        }),
        rank_ok: Box::new(move |b: &DataBatch| {
            Ok(numerical_rank(&regressor_matrix(b, basis)?) == ma)
        }),
    };
    propagate(
        cfg,
        Dynamics::PolyData { basis },
        Some(m0),
        stream,
        Some(refiner),
    )
}

impl ReachResult {
    /// The input and noise sets injected at each step, carrying the factor ids
    /// actually used, so simulators can draw witnesses for them.
    pub fn injected_sets(&self, cfg: &ReachConfig) -> Result<Vec<(Cpz, Cpz)>> {
        self.factor_log
            .iter()
            .map(|f| {
                let u = rename(cfg.input_template(f.step), &f.input_ids)?;
                let w = rename(&cfg.noise_set, &f.noise_ids)?;
                Ok((u, w))
            })
            .collect()
    }
}

fn rename(template: &Cpz, ids: &[FactorId]) -> Result<Cpz> {
    if template.id().len() != ids.len() {
        return Err(shape("logged ids do not match the template"));
    }
    let map: HashMap<FactorId, FactorId> = template
        .id()
        .iter()
        .copied()
        .zip(ids.iter().copied())
        .collect();
    template.relabel(&map)
}

/// Checks the factor discipline of a run: injected input and noise factors are
/// new at every step and never overlap the initial set or any model set.
pub fn audit_factor_ids(
    result: &ReachResult,
    initial: &Cpz,
    constant_input: bool,
) -> std::result::Result<(), String> {
    let mut owner: HashMap<FactorId, String> = HashMap::new();
    let mut claim = |id: FactorId, who: String| -> std::result::Result<(), String> {
        match owner.insert(id, who.clone()) {
            Some(prev) if prev != who => Err(format!("factor {id} used by {prev} and {who}")),
            _ => Ok(()),
        }
    };
    for id in initial.id() {
        claim(*id, "initial set".into())?;
    }
    for snap in &result.model_history {
        for id in snap.model.set.id() {
            claim(*id, "model sets".into())?;
        }
    }
    for f in &result.factor_log {
        let input_owner = if constant_input {
            "input".to_string()
        } else {
            format!("input at step {}", f.step)
        };
        for id in &f.input_ids {
            claim(*id, input_owner.clone())?;
        }
        for id in &f.noise_ids {
            claim(*id, format!("noise at step {}", f.step))?;
        }
    }
    Ok(())
}

/// Renames all factors of `sets` and `models` to `1..=K`, preserving their order.
pub fn canonical_ids(sets: &[Cpz], models: &[Cpmz]) -> (Vec<Cpz>, Vec<Cpmz>) {
    let all: BTreeSet<FactorId> = sets
        .iter()
        .flat_map(|s| s.id().iter().copied())
        .chain(models.iter().flat_map(|m| m.id().iter().copied()))
        .collect();
    let map: HashMap<FactorId, FactorId> = all
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, FactorId(i as u64 + 1)))
        .collect();
    (
        sets.iter()
            .map(|s| s.relabel(&map).expect("order-preserving renaming"))
            .collect(),
        models
            .iter()
            .map(|m| m.relabel(&map).expect("order-preserving renaming"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::FactorAssignment;
    use crate::learning::monomial_basis_custom;
    use nalgebra::DVector;

    #[test]
    fn parabola_image() {
        let z = Cpz::zonotope(DVector::zeros(1), DMatrix::from_element(1, 1, 1.0)).unwrap();
        let basis = monomial_basis_custom(1, vec![vec![1], vec![2]]).unwrap();
        for compact in [false, true] {
            let h = monomial_image_impl(&z, &basis, compact).unwrap();
            for a in [-1.0, -0.3, 0.0, 0.7] {
                let s = FactorAssignment::zip(z.id(), &[a]).unwrap();
                let v = h.eval_point(&s).unwrap();
                assert!((v[0] - a).abs() < 1e-15);
                assert!((v[1] - v[0] * v[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_basis_is_one() {
        let z = Cpz::zonotope(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let basis = monomial_basis_custom(2, vec![vec![0, 0]]).unwrap();
        let h = monomial_image(&z, &basis).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.c()[0], 1.0);
        assert_eq!(h.num_generators(), 0);
    }

    #[test]
    fn zero_theta_gives_noise_translate() {
        let x0 = Cpz::zonotope(
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 0.1),
        )
        .unwrap();
        let u = Cpz::point(DVector::zeros(0));
        let w = Cpz::zonotope(
            DVector::from_element(1, 0.5),
            DMatrix::from_element(1, 1, 0.01),
        )
        .unwrap();
        let basis = monomial_basis_custom(1, vec![vec![1], vec![2]]).unwrap();
        let cfg = ReachConfig::new(x0, u, w, 3, 0);
        let res = run_poly_model(&cfg, &DMatrix::zeros(1, 2), &basis).unwrap();
        for s in &res.sets[1..] {
            assert_eq!(s.c()[0], 0.5);
            assert_eq!(s.num_generators(), 1);
            assert_eq!(s.g()[(0, 0)], 0.01);
        }
    }
}
