//! Monte Carlo measurements of the large-sample behaviour of Pareto depth.

pub mod density;
pub mod lab;
pub mod probe;

pub use density::{sample_density, AxisDensity, SeparableDensity};
pub use lab::{
    continuum_comparison, evaluation_grid, mean_scaled_depth, scaled_depth_at, ContinuumRow,
    ContinuumTable, DepthField,
};
pub use probe::{
    convexity_defect, probe_points, quasiconcavity_probe, LevelReport, ProbeReport,
    DEFAULT_RESOLUTION,
};
