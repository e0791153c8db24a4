//! End-to-end behaviour of the experiment harness on small problems.

mod common;

use vqebench::harness::{
    emit, prepare_problem, run_experiment, Backend, EnergyUnits, ExperimentSpec, OutputFormat,
};
use vqebench::models::{
    ground_energy_oracle, tfim_hamiltonian, xxz_hamiltonian, TfimSpec, XxzSpec,
};

const SMALL: &str = r#"
sizes = [4, 6]
seeds = 3

[model]
kind = "tfim"

[circuit]
variant = "qaoa"

[stop]
max_epochs = 300

[output]
keep_traces = true

[[optimizers]]
kind = "adam"
learning_rate = 0.06

[[optimizers]]
kind = "bfgs"
bounds = { lower = 0.0, upper = 6.283185307179586 }

[[optimizers]]
kind = "natgrad"
learning_rate = 0.5
"#;

fn small_spec() -> ExperimentSpec {
    ExperimentSpec::from_toml_str(SMALL).unwrap()
}

#[test]
fn runs_are_reproducible_across_worker_counts() {
    let one = run_experiment(&small_spec()).unwrap();
    let again = run_experiment(&small_spec()).unwrap();
    let parallel = run_experiment(&ExperimentSpec {
        workers: 4,
        ..small_spec()
    })
    .unwrap();
    assert_eq!(one.len(), 2 * 3 * 3);
    assert_eq!(one, again);
    assert_eq!(one, parallel);
}

#[test]
fn backends_produce_the_same_runs() {
    let ff = run_experiment(&ExperimentSpec {
        backend: Backend::FreeFermion,
        ..small_spec()
    })
    .unwrap();
    let sv = run_experiment(&ExperimentSpec {
        backend: Backend::StateVector,
        ..small_spec()
    })
    .unwrap();
    for (a, b) in ff.iter().zip(&sv) {
        assert_eq!(a.run.seed, b.run.seed);
        let da = a.run.trace[0].delta;
        let db = b.run.trace[0].delta;
        assert!((da - db).abs() <= 1e-10 * da.max(1.0), "{da} vs {db}");
    }
}

#[test]
fn small_tfim_problems_are_solved() {
    let records = run_experiment(&small_spec()).unwrap();
    for r in records.iter().filter(|r| r.optimizer_index != 0) {
        assert!(
            r.run.success,
            "{} N={} seed={}",
            r.optimizer, r.size, r.run.seed
        );
        assert!(r.run.delta_min <= 1e-10);
    }
}

#[test]
fn reported_energies_do_not_depend_on_objective_units() {
    let per_site = ExperimentSpec {
        energy_units: EnergyUnits::PerSite,
        ..small_spec()
    };
    let total = ExperimentSpec {
        energy_units: EnergyUnits::Total,
        ..small_spec()
    };
    let a = run_experiment(&per_site).unwrap();
    let b = run_experiment(&total).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let (ex, ey) = (x.run.trace[0].energy, y.run.trace[0].energy);
        assert!((ex - ey).abs() <= 1e-12 * ex.abs());
        let (dx, dy) = (x.run.trace[0].delta, y.run.trace[0].delta);
        assert!((dx - dy).abs() <= 1e-12 * dx.max(1e-300));
    }
}

#[test]
fn prepared_ground_energies_match_independent_diagonalization() {
    for n in [4usize, 6, 8] {
        let spec = small_spec();
        let problem = prepare_problem(&spec, n).unwrap();
        let exact = common::tfim_ground_by_momentum_blocks(n, 1.0);
        assert!((problem.ground_energy - exact).abs() <= 1e-10 * exact.abs());
    }
}

#[test]
fn momentum_oracle_agrees_with_dense_matrix() {
    for n in 2usize..=8 {
        for t in [0.0, 0.3, 1.0, 2.5] {
            let dense = common::dense_ground(&tfim_hamiltonian(&TfimSpec::new(n, t).unwrap()));
            let blocks = common::tfim_ground_by_momentum_blocks(n, t);
            assert!((dense - blocks).abs() < 1e-10, "N={n} t={t}");
        }
    }
}

#[test]
fn lanczos_ground_energy_matches_dense_for_xxz() {
    for n in [4usize, 6, 8, 10] {
        for delta in [0.5, 1.0, 1.5] {
            let h = xxz_hamiltonian(&XxzSpec::new(n, delta).unwrap());
            let dense = common::dense_ground(&h);
            let oracle = ground_energy_oracle(&h).unwrap();
            assert!((dense - oracle).abs() < 1e-9, "N={n} Δ={delta}");
        }
    }
}

#[test]
fn emitted_csv_has_one_row_per_run() {
    let spec = small_spec();
    let records = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit(
        &spec,
        &records,
        dir.path(),
        &[OutputFormat::Csv, OutputFormat::Json],
    )
    .unwrap();
    assert!(written.iter().all(|p| p.exists()));

    let mut reader = csv::Reader::from_path(dir.path().join("runs.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "size");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(&records) {
        assert_eq!(row[0].parse::<usize>().unwrap(), rec.size);
        assert_eq!(&row[1], rec.optimizer);
        assert_eq!(row[3].parse::<f64>().unwrap(), rec.run.delta_min);
    }

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["aggregates"].as_array().unwrap().len() >= 6);
}

#[test]
fn empty_experiment_emits_headers_only() {
    let spec = small_spec();
    let dir = tempfile::tempdir().unwrap();
    emit(&spec, &[], dir.path(), &[OutputFormat::Csv]).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("runs.csv")).unwrap();
    assert!(!reader.headers().unwrap().is_empty());
    assert_eq!(reader.records().count(), 0);
}

#[test]
fn spec_survives_a_toml_round_trip() {
    let spec = small_spec();
    let text = spec.to_toml_string().unwrap();
    assert_eq!(ExperimentSpec::from_toml_str(&text).unwrap(), spec);
}
