//! Static SVG figures.
//!
//! Every renderer returns the document as a `String`. Numbers are printed
//! with fixed precision so identical inputs give byte-identical files.

mod color;
mod plots;
mod svg;
mod viridis_data;

pub use color::{viridis, Rgb, CYAN, MAGENTA, TEAL};
pub use plots::{
    binary_classes, difficulty_bars, difficulty_classes, grid_predictions, mesh_grid,
    normalize_min_max, outcome_bars, outcome_classes, render_bars, render_boundary,
    render_confusion, render_labeled_embedding, render_metric_bars, render_sensitivity, Bar,
    ClassStyle, MeshGrid, PlotKind, PlotSpec,
};
