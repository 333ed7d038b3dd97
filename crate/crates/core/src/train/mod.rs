//! Adam, the epoch loop, evaluation, checkpoints and the parameter-budget
//! solver.

mod adam;
mod budget;
mod checkpoint;
mod compare;
mod metrics;
mod trainer;

pub use adam::{clip_global_norm, global_norm, AdamConfig, AdamState};
pub use budget::{solve_budget, solve_hidden_size, BudgetRow};
pub use checkpoint::{Checkpoint, FORMAT_VERSION, MAGIC};
pub use compare::{compare_at_budget, BudgetRun};
pub use metrics::{Clock, JsonLinesSink, MetricsRecord, MetricsSink, NullSink, SystemClock, TickClock};
pub use trainer::{
    evaluate, evaluate_nats, train, EpochSummary, EvalOptions, TrainConfig, TrainData, TrainOutcome,
};
