//! Multi-step reasoning prompt constructors.

pub mod autocot;
pub mod cache;
pub mod compose;
pub mod cot;
pub mod kmeans;
pub mod selfplan;

pub use autocot::{autocot_build, autocot_spec, AutoCotConfig, DemoExemplar};
pub use cache::{DemoCache, DemoCacheKey};
pub use compose::compose_ape_cot;
pub use cot::cot_augment;
pub use kmeans::{kmeans, KMeansResult};
pub use selfplan::{parse_plan, selfplan_run, Plan, DEFAULT_MAX_PLAN_STEPS};
