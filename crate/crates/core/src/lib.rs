//! Randomized list coloring of bipartite graphs.
//!
//! Part A is colored by sampling each vertex's color from a position-biased
//! distribution over its sorted list; a part-B vertex is *bad* when its
//! neighbors have used every color of its list. Bad vertices are repaired by
//! resampling their neighborhoods. Around this core sit coupon-collector
//! bounds on the probability of a bad vertex, an exact choosability oracle for
//! small graphs, a numerical check of the sampling coefficient, and an
//! experiment harness.

pub mod bias;
pub mod colorer;
pub mod coupon;
pub mod error;
pub mod graph;
pub mod harness;
pub mod lists;
pub mod optimizer;
pub mod oracle;
pub mod seed;

pub use bias::{
    list_size_k, normalizer_c, normalizer_c_exact, prob, rho, BiasProfile, ProfileKind,
};
pub use colorer::{moser_tardos_color, verify_proper, ColoringRun, PartialColoring, RunReport};
pub use coupon::{
    analytic_bound, exact_collection_prob, monte_carlo, product_bound, CouponInstance,
};
pub use error::{Error, Result};
pub use graph::{gen_regular_bipartite, BipartiteGraph};
pub use harness::{compare_profiles, run_experiment, ExperimentConfig, ResultTable, Summary};
pub use lists::{gen_lists, weight_stats, Color, ListAssignment, ListMode, Rational, WeightStats};
pub use optimizer::{
    branch_one_value, coefficient_certificate, h_objective, maximize_h, Certificate, ConstraintBox,
};
pub use oracle::{choosability, choosable, l_colorable, Choosability};
