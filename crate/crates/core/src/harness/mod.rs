//! Experiment orchestration: circuit construction, seeded initialization,
//! parallel dispatch of runs, success classification, scaling fits and
//! result files.

mod analysis;
mod circuits;
mod emit;
mod experiment;
mod presets;
mod spec;

pub use analysis::{
    aggregate, classify, fit_optimizers, fit_scaling, fits_from_csv, jump_size, Aggregate,
    FitFilter, FitResult, OptimizerFit, SuccessRatio,
};
pub use circuits::{
    build_circuit, qaoa_circuit, qaoa_y_circuit, wrapped_max_abs, xxz_trotter_circuit,
    CircuitConfig, CircuitVariant, YLayers, YPreset,
};
pub use emit::{emit, render_svg, Summary, CSV_SCHEMA_VERSION, SUMMARY_SCHEMA_VERSION};
pub use experiment::{
    prepare_problem, run_experiment, sample_init, ExperimentRecord, PreparedProblem,
};
pub use presets::{preset, PRESET_NAMES};
pub use spec::{
    Backend, CostConfig, EnergyUnits, ExperimentSpec, InitInterval, ModelConfig, OutputConfig,
    OutputFormat, StopConfig,
};
