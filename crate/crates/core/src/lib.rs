//! Strategic linear classification.
//!
//! Agents respond to a published linear classifier by moving their features
//! at a seminorm-induced cost whenever the label change is worth it. This
//! crate evaluates those best responses, learns classifiers that stay correct
//! under them, and checks shattering and hardness constructions.

pub mod error;
pub mod generator;
pub mod hardness;
pub mod io;
pub mod learning;
pub mod geometry;
pub mod lp;
pub mod randomization;
pub mod serm;
pub mod strategic;
pub mod svc;

mod linalg;

pub use error::{Error, Result};
pub use geometry::{
    dual_norm, eval_seminorm, min_cost_to_hyperplane, polygon_gauge, ApproxConfig, BallPolytope, DualValue, Hyperplane,
    PNorm, Seminorm, DEFAULT_ETA,
};
pub use lp::{solve_lp, LinearProgram, LpSolution, Relation, Sense};
pub use strategic::{
    audit, best_response_label, best_response_point, classify_regime, predict_raw, separable_best_response_label,
    strategic_labels, strategic_loss, AuditRow, CostModel, DataPoint, InstanceMeta, Label, PreferenceRegime, Regime,
    StrategicInstance,
};
pub use generator::{generate_instance, CostSpec, GeneratorConfig, InstanceGenerator, PreferenceMode};
pub use serm::{
    check_solution, serm_bruteforce, serm_instancewise_adversarial, serm_invariant_essentially_adversarial,
    PointCheck, SermConfig, SermSolution, SermStatus,
};
