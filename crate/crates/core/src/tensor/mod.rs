//! Chart-based curvature engine.

pub mod chart;
pub mod curvature;
pub mod geodesic;

pub use chart::{conformal_jet, product_jet, AxisMap, DerivativeSource, Interval, MetricChart, MetricJet, Orientation};
pub use curvature::{
    christoffel, curvature, ricci_extremes, write_curvature_csv, Christoffel, CurvatureBundle, CurvatureNorms,
    RicciExtremes, Sampler, Tensor4, WeylSplit,
};
pub use geodesic::{geodesic, GeodesicRun};
