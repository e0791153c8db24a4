use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuits::{build_circuit, wrapped_max_abs};
use super::spec::{Backend, ExperimentSpec, InitInterval, ModelConfig};
use crate::costmodel::{estimate_runtime, measured_line_search_evals, CostParams};
use crate::error::{Error, Result};
use crate::freefermion::QaoaObjective;
use crate::models::{
    ground_energy_oracle, tfim_ground_energy, tfim_hamiltonian, xxz_hamiltonian, TfimSpec, XxzSpec,
};
use crate::optimizers::{self, Objective, OptimizerConfig, RunRecord, Scaled};
use crate::statevector::{CircuitObjective, LayerKind};

/// One finished run with the experiment context around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub size: usize,
    /// Position of the optimizer in the experiment's list.
    pub optimizer_index: usize,
    pub optimizer: String,
    pub backend: Backend,
    /// Estimated quantum runtime in units of one energy evaluation.
    pub runtime: f64,
    /// Largest wrapped `|κ|` over the `L_y` parameters at the end of the run.
    pub max_abs_y: Option<f64>,
    pub run: RunRecord,
}

/// `n` i.i.d. uniform draws from the interval, reproducible per seed.
pub fn sample_init(n: usize, seed: u64, interval: &InitInterval) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rng.random_range(interval.low..=interval.high))
        .collect()
}

/// Everything needed to run optimizers at one system size.
pub struct PreparedProblem {
    pub size: usize,
    pub backend: Backend,
    pub objective: Box<dyn Objective + Send>,
    pub ground_energy: f64,
    pub num_layers: usize,
    pub y_slots: Vec<usize>,
}

pub fn prepare_problem(spec: &ExperimentSpec, size: usize) -> Result<PreparedProblem> {
    spec.circuit.check_model(&spec.model)?;
    let backend = match spec.backend {
        Backend::Auto if spec.circuit.is_pure_qaoa() => Backend::FreeFermion,
        Backend::Auto => Backend::StateVector,
        Backend::FreeFermion if !spec.circuit.is_pure_qaoa() => {
            return Err(Error::InvalidConfig(
                "the free-fermion backend only simulates plain TFIM QAOA circuits".into(),
            ))
        }
        b => b,
    };

    if backend == Backend::FreeFermion {
        let ModelConfig::Tfim { field } = spec.model else {
            unreachable!("pure QAOA implies TFIM");
        };
        if !size.is_multiple_of(2) {
            return Err(Error::InvalidCircuit(format!(
                "circuits need an even qubit count, got {size}"
            )));
        }
        let tfim = TfimSpec::new(size, field)?;
        return Ok(PreparedProblem {
            size,
            backend,
            ground_energy: tfim_ground_energy(&tfim),
            objective: Box::new(QaoaObjective::new(tfim, size / 2)?),
            num_layers: size,
            y_slots: Vec::new(),
        });
    }

    let circuit = build_circuit(&spec.model, &spec.circuit, size)?;
    let (hamiltonian, ground_energy) = match spec.model {
        ModelConfig::Tfim { field } => {
            let tfim = TfimSpec::new(size, field)?;
            (tfim_hamiltonian(&tfim), tfim_ground_energy(&tfim))
        }
        ModelConfig::Xxz { anisotropy } => {
            let h = xxz_hamiltonian(&XxzSpec::new(size, anisotropy)?);
            let e0 = ground_energy_oracle(&h)?;
            (h, e0)
        }
    };
    Ok(PreparedProblem {
        size,
        backend,
        objective: Box::new(CircuitObjective::new(circuit.clone(), hamiltonian)?),
        ground_energy,
        num_layers: circuit.layers().len(),
        y_slots: circuit.slots_of_kind(LayerKind::Y),
    })
}

fn cost_params(spec: &ExperimentSpec, problem: &PreparedProblem, record: &RunRecord) -> CostParams {
    let n = problem.objective.num_params();
    let mut p = CostParams::defaults(n, spec.cost.bases.unwrap_or(spec.model.default_bases()));
    p.samples_metric = p.samples_energy / spec.cost.sample_ratio;
    p.depth = problem.num_layers as f64;
    p.timing = spec.cost.timing;
    p.monitoring = spec.cost.monitoring;
    p.line_search_evals = spec
        .cost
        .line_search_evals
        .or_else(|| measured_line_search_evals(record))
        .unwrap_or(p.line_search_evals);
    p
}

fn run_one(
    spec: &ExperimentSpec,
    problem: &PreparedProblem,
    optimizer_index: usize,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<ExperimentRecord> {
    let theta0 = sample_init(problem.objective.num_params(), seed, &spec.init);
    let rules = spec.stop.rules(&spec.model);
    let factor = spec.energy_units.factor(problem.size);
    let objective = Scaled {
        inner: problem.objective.as_ref(),
        factor,
    };
    let mut run = optimizers::run(
        &objective,
        problem.ground_energy * factor,
        config,
        &rules,
        &theta0,
        seed,
    )?;
    for point in &mut run.trace {
        point.energy /= factor;
    }
    if !spec.output.keep_traces {
        run.drop_trace();
    }
    let runtime = estimate_runtime(&run, &cost_params(spec, problem, &run), spec.cost.gradient);
    let max_abs_y =
        (!problem.y_slots.is_empty()).then(|| wrapped_max_abs(&run.final_params, &problem.y_slots));
    Ok(ExperimentRecord {
        size: problem.size,
        optimizer_index,
        optimizer: config.label(),
        backend: problem.backend,
        runtime,
        max_abs_y,
        run,
    })
}

/// Runs every (size, optimizer, seed) combination. Records come back sorted
/// by size, then optimizer position, then seed, whatever the worker count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let problems = spec
        .sorted_sizes()
        .into_iter()
        .map(|n| prepare_problem(spec, n))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (pi, _) in problems.iter().enumerate() {
        for (oi, _) in spec.optimizers.iter().enumerate() {
            for seed in 0..spec.seeds {
                jobs.push((pi, oi, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(pi, oi, seed)| run_one(spec, &problems[pi], oi, &spec.optimizers[oi], seed))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{CircuitConfig, EnergyUnits, StopConfig};
    use crate::optimizers::{AdamConfig, BfgsConfig, NatGradConfig};

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            name: None,
            sizes: vec![6, 4],
            seeds: 3,
            backend: Backend::Auto,
            workers: 1,
            model: ModelConfig::tfim(),
            energy_units: EnergyUnits::default(),
            circuit: CircuitConfig::qaoa(),
            init: InitInterval::default(),
            stop: StopConfig {
                max_epochs: 300,
                ..StopConfig::default()
            },
            optimizers: vec![
                OptimizerConfig::Adam(AdamConfig::new(0.06)),
                OptimizerConfig::Bfgs(BfgsConfig::default()),
                OptimizerConfig::NatGrad(NatGradConfig::new(0.5)),
            ],
            cost: Default::default(),
            output: Default::default(),
        }
    }

    #[test]
    fn init_is_seeded_and_in_range() {
        let iv = InitInterval::default();
        let a = sample_init(50, 3, &iv);
        assert_eq!(a, sample_init(50, 3, &iv));
        assert_ne!(a, sample_init(50, 4, &iv));
        assert!(a.iter().all(|x| (iv.low..=iv.high).contains(x)));
    }

    #[test]
    fn cross_product_in_canonical_order() {
        let records = run_experiment(&small_spec()).unwrap();
        assert_eq!(records.len(), 2 * 3 * 3);
        let keys: Vec<_> = records
            .iter()
            .map(|r| (r.size, r.optimizer_index, r.run.seed))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(records.iter().all(|r| r.backend == Backend::FreeFermion));
        assert!(records.iter().all(|r| r.run.trace.is_empty()));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = run_experiment(&small_spec()).unwrap();
        let three = run_experiment(&ExperimentSpec {
            workers: 3,
            ..small_spec()
        })
        .unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn forcing_free_fermion_on_y_circuit_fails() {
        let spec = ExperimentSpec {
            backend: Backend::FreeFermion,
            circuit: CircuitConfig::qaoa_y(crate::harness::YLayers::Positions(vec![1])),
            ..small_spec()
        };
        assert!(prepare_problem(&spec, 4).is_err());
    }
}
