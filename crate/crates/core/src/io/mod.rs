//! Run configuration and file formats: trajectory CSV, JSON reports and
//! manifests, and SVG projections of ensemble point clouds.

mod config;
mod csv;
mod report;
mod svg;

pub use self::config::{
    CustomModel, InitialCondition, ModelKind, OutputPaths, Plane, PlotOptions, Recipe, RunConfig,
};
pub use self::csv::{export_ensemble, export_trajectory, import_trajectory, CSV_HEADER};
pub use self::report::{
    containment_summary, read_report, termination_summary, write_json, write_report,
    ContainmentSummary, DiagnosticResult, Report, RunManifest, TerminationSummary, SCHEMA_VERSION,
};
pub use self::svg::{projection_svg, render_projection, ProjectionSummary};
