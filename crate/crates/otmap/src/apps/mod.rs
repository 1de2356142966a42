//! Applications built on the OT core: plug-in Wasserstein barycenters and a
//! distribution-free independence test.

pub mod barycenter;
pub mod indep;

pub use barycenter::{plugin_barycenter, w2sq_to_quantile_law_1d, BarycenterEstimate};
pub use indep::{
    hsic_statistic, indep_test, null_quantile, null_sample, population_hsic,
    semi_discrete_rank_map, unit_cube_reference, GaussianKernel, IndepConfig, IndepTestResult,
    NullMarginals,
};
