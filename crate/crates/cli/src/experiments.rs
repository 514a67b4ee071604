//! The demo experiments: generate data from the configured system, run the
//! matching reachability algorithm and render its artifacts.

use czreach::learning::Transition;
use czreach::oracle::{boundary_cloud, record_trajectories, simulate_run, RecordedData};
use czreach::reach::{run_lti, run_poly_data, run_poly_model, ReachConfig, ReachResult};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig, SystemSpec};
use crate::error::CliError;
use crate::output::{sets_and_models, stats_csv, Artifacts, Cloud};
use crate::verify;

type Dynamics = Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>>;

fn dynamics(system: &SystemSpec) -> Result<Dynamics, CliError> {
    if let Some((phi, gamma)) = system.lti() {
        return Ok(Box::new(move |x, u| &phi * x + &gamma * u));
    }
    let theta = system.theta().expect("polynomial system");
    let basis = system.basis()?;
    Ok(Box::new(move |x, u| {
        let z: Vec<f64> = x.iter().chain(u.iter()).copied().collect();
        &theta * basis.eval(&z)
    }))
}

/// A finished reachability run with everything needed to render it.
pub struct DemoRun {
    pub cfg: ReachConfig,
    pub result: ReachResult,
    pub data_sigmas: Vec<Vec<f64>>,
    dynamics: Dynamics,
}

fn record<R: Rng>(
    f: &Dynamics,
    count: usize,
    length: usize,
    rc: &ReachConfig,
    rng: &mut R,
) -> Result<RecordedData, CliError> {
    let n = rc.initial_set.dim();
    let starts: Vec<DVector<f64>> = (0..count)
        .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)))
        .collect();
    Ok(record_trajectories(
        f,
        &starts,
        &rc.input_sets[0],
        &rc.noise_set,
        length,
        rng,
    )?)
}

/// Runs the reachability algorithm of a demo experiment.
pub fn run_demo(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<DemoRun, CliError> {
    cfg.validate()?;
    let system = cfg.system.as_ref().expect("validated");
    let f = dynamics(system)?;
    let set = |s: &Option<crate::config::SetSpec>| s.as_ref().expect("validated").build();
    let mut rc = ReachConfig::new(
        set(&cfg.initial_set)?,
        set(&cfg.input_set)?,
        set(&cfg.noise_set)?,
        cfg.horizon.expect("validated"),
        cfg.batch_length.unwrap_or(0),
    );
    rc.reduction_order = cfg.reduction_order;
    rc.seed = cfg.seed;

    let mut data_sigmas = Vec::new();
    let result = match cfg.experiment {
        Experiment::PolyModelDemo => {
            run_poly_model(&rc, &system.theta().expect("validated"), &system.basis()?)?
        }
        Experiment::LtiDemo | Experiment::PolyDataDemo => {
            let data = cfg.data.as_ref().expect("validated");
            let offline = record(
                &f,
                data.offline_trajectories,
                data.trajectory_length,
                &rc,
                rng,
            )?;
            let online = record(
                &f,
                data.online_trajectories,
                data.trajectory_length,
                &rc,
                rng,
            )?;
            let mut stream: Vec<Vec<Transition>> = vec![Vec::new(); data.online_step];
            stream.push(online.transitions());
            data_sigmas = offline.sigmas();
            data_sigmas.extend(online.sigmas());
            let batch = offline.batch()?;
            if cfg.experiment == Experiment::LtiDemo {
                run_lti(&rc, &batch, &stream)?
            } else {
                run_poly_data(&rc, &batch, &stream, &system.basis()?)?
            }
        }
        Experiment::Verify => unreachable!("verify is not a demo"),
    };
    Ok(DemoRun {
        cfg: rc,
        result,
        data_sigmas,
        dynamics: f,
    })
}

/// Runs an experiment and renders its artifacts. A failing verification still
/// returns its report; the caller decides the exit status from `passed`.
pub struct Outcome {
    pub artifacts: Artifacts,
    pub passed: bool,
    pub summary: String,
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome, CliError> {
    cfg.validate()?;
    if cfg.experiment == Experiment::Verify {
        let results = verify::run_all(cfg.seed, threads);
        let report = verify::report(&results);
        let passed = results.iter().all(|r| r.passed);
        let mut artifacts = Artifacts::default();
        artifacts.add("report.txt", report.clone());
        return Ok(Outcome {
            artifacts,
            passed,
            summary: report,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let run = run_demo(cfg, &mut rng)?;
    let mut artifacts = Artifacts::default();
    let (sets, models) = sets_and_models(cfg.experiment.name(), &run.result);
    artifacts.add("sets.json", sets);
    artifacts.add("model_history.json", models);
    artifacts.add("stats.csv", stats_csv(&run.result.stats));

    let mut traces = Vec::with_capacity(cfg.simulations);
    for _ in 0..cfg.simulations {
        traces.push(simulate_run(
            &run.dynamics,
            &run.cfg,
            &run.result,
            &run.data_sigmas,
            &mut rng,
        )?);
    }
    artifacts.add(
        "traces.json",
        serde_json::to_string_pretty(&traces).expect("traces serialize"),
    );
    for dims in cfg.projection_dims() {
        let d = [dims[0] - 1, dims[1] - 1];
        let mut cloud = Cloud {
            dims,
            points: Vec::new(),
            traces: traces
                .iter()
                .map(|t| t.states.iter().map(|x| [x[d[0]], x[d[1]]]).collect())
                .collect(),
        };
        for (k, set) in run.result.sets.iter().enumerate() {
            for p in boundary_cloud(set, d, cfg.cloud_samples, &mut rng)? {
                cloud.points.push((k, p));
            }
        }
        let stem = cloud.stem();
        artifacts.add(format!("projections/{stem}.csv"), cloud.csv());
        let title = format!("{}: x{} vs x{}", cfg.experiment.name(), dims[0], dims[1]);
        artifacts.add(format!("projections/{stem}.svg"), cloud.svg(&title));
    }
    let mut summary = String::new();
    for s in &run.result.stats {
        summary.push_str(&format!(
            "step {}: {} generators, {} constraints, {} factors, {:.3} ms\n",
            s.step, s.generators, s.constraints, s.factors, s.millis
        ));
    }
    Ok(Outcome {
        artifacts,
        passed: true,
        summary,
    })
}
