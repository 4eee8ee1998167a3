//! Metro-map drawings of set systems.
//!
//! Every set becomes a metro line and every element a station. The pipeline
//! condenses the input, extracts a path-based support graph, lays it out,
//! pushes edges toward octilinear directions, orders parallel lines, places
//! labels and renders the result.

pub mod geometry;
pub mod insertion;
pub mod labels;
pub mod layout;
pub mod lines;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod render;
pub mod sample;
pub mod schematize;
pub mod support;

pub use geometry::Point;
pub use model::{ElementId, InputError, InputFormat, SetId, SetSystem};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput, Preset};
pub use render::LayoutDocument;
