//! Orbit-based contraction checks on metric spaces: pointwise families
//! (Banach, Kannan, Chatterjea, Ćirić, F-contraction) and path-averaged
//! contractions, Picard iteration, and class-separation search.

pub mod check;
pub mod conditions;
pub mod config;
pub mod error;
pub mod maps;
pub mod metric;
pub mod pa;
pub mod picard;
pub mod report;
pub mod repro;
pub mod search;
pub mod tol;

pub use check::{
    check_condition, pa_alpha_by_n_min, sample_pairs, tightest_constant, CheckReport, Measure, PairSample, Tightest,
    Verdict, Witness,
};
pub use conditions::{evaluate_condition, ConditionSpec, Evaluation, FFunction, Family, PairDistances};
pub use error::{Error, Result};
pub use maps::{orbit_pair_distances, IterFlags, OrbitPairTable, SelfMap};
pub use metric::{verify_metric_axioms, AxiomReport, MetricSpace, Point};
pub use pa::{pa_ratio_profile, PaSums, ProfileRow};
pub use picard::{check_summability_bound, find_fixed_points, run_picard, BoundReport, PicardStatus, PicardTrace};
pub use search::{classify, search_separation, Classification, SeparationQuery, SeparationWitness};
pub use report::{Measurement, Provenance, Report, ReportVerdict};
pub use repro::{comparison_table, ComparisonTable, ReproOptions, Scenario};
