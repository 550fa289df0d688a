use ndarray::{Array2, ArrayView2};

use super::color::{viridis, Rgb, CYAN, MAGENTA, TEAL};
use super::svg::{num, Svg};
use crate::error::{Error, Result};
use crate::eval::{ConfusionMatrix, Scenario, ScenarioReport};
use crate::explain::SensitivityMap;
use crate::ingest::{ClassDistribution, Outcome};
use crate::learners::{ClassifierKind, LabeledPoints, TrainedModel};

const BLACK: Rgb = Rgb(0, 0, 0);
const GREY: Rgb = Rgb(0x60, 0x60, 0x60);
const WHITE: Rgb = Rgb(0xFF, 0xFF, 0xFF);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Bars,
    Scatter,
    Boundary,
    Confusion,
    Sensitivity,
}

impl PlotKind {
    fn has_side_legend(self) -> bool {
        matches!(self, PlotKind::Scatter | PlotKind::Boundary | PlotKind::Sensitivity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    /// Boundary mesh resolution per axis.
    pub grid: usize,
    /// Legend names for class 0 and 1 of boundary plots.
    pub class_names: Option<[String; 2]>,
    /// Written as an XML comment right after the root element.
    pub comment: Option<String>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: impl Into<String>) -> Self {
        let (x_label, y_label) = match kind {
            PlotKind::Bars => ("", "Share of cases (%)"),
            PlotKind::Confusion => ("Predicted class", "True class"),
            _ => ("t-SNE 1", "t-SNE 2"),
        };
        PlotSpec {
            kind,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 640,
            height: 480,
            grid: 300,
            class_names: None,
            comment: None,
        }
    }

    fn svg(&self) -> Svg {
        Svg::new(self.width, self.height, self.comment.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassStyle {
    pub name: String,
    pub color: Rgb,
}

impl ClassStyle {
    fn new(name: &str, color: Rgb) -> Self {
        ClassStyle { name: name.into(), color }
    }
}

/// S, NR, F in teal, magenta, cyan.
pub fn outcome_classes() -> Vec<ClassStyle> {
    let colors = [TEAL, MAGENTA, CYAN];
    Outcome::ALL.iter().zip(colors).map(|(o, c)| ClassStyle::new(o.code(), c)).collect()
}

/// Difficulty levels 1 to 4 spread evenly over viridis.
pub fn difficulty_classes() -> Vec<ClassStyle> {
    (0..4)
        .map(|k| ClassStyle {
            name: format!("Level {}", k + 1),
            color: Rgb::from_unit(viridis(k as f64 / 3.0)),
        })
        .collect()
}

pub fn binary_classes(scenario: Scenario) -> Vec<ClassStyle> {
    let [a, b] = scenario.class_names();
    vec![ClassStyle::new(a, TEAL), ClassStyle::new(b, MAGENTA)]
}

/// Maps data coordinates into the plotting rectangle.
struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Axes {
    fn frame(spec: &PlotSpec) -> (f64, f64, f64, f64) {
        let legend = if spec.kind.has_side_legend() { 150.0 } else { 20.0 };
        (70.0, spec.width as f64 - legend, 40.0, spec.height as f64 - 55.0)
    }

    fn new(spec: &PlotSpec, x: (f64, f64), y: (f64, f64)) -> Self {
        let (left, right, top, bottom) = Axes::frame(spec);
        Axes { x, y, left, right, top, bottom }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.bottom - self.top)
    }

    fn draw(&self, svg: &mut Svg, spec: &PlotSpec) {
        let (l, r, t, b) = (self.left, self.right, self.top, self.bottom);
        for (x1, y1, x2, y2) in [(l, t, r, t), (r, t, r, b), (r, b, l, b), (l, b, l, t)] {
            svg.line(x1, y1, x2, y2, BLACK, 1.0);
        }
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            svg.line(xp, b, xp, b + 5.0, BLACK, 1.0);
            svg.text(xp, b + 18.0, 11.0, "middle", BLACK, &format!("{xv:.1}"));
            svg.line(l - 5.0, yp, l, yp, BLACK, 1.0);
            svg.text(l - 8.0, yp + 4.0, 11.0, "end", BLACK, &format!("{yv:.1}"));
        }
        svg.text((l + r) / 2.0, b + 40.0, 13.0, "middle", BLACK, &spec.x_label);
        svg.rotated_text(22.0, (t + b) / 2.0, 13.0, &spec.y_label);
        svg.text(spec.width as f64 / 2.0, 24.0, 15.0, "middle", BLACK, &spec.title);
    }
}

fn class_legend(svg: &mut Svg, spec: &PlotSpec, entries: &[(&str, Rgb)]) {
    let x = spec.width as f64 - 140.0;
    for (k, (name, color)) in entries.iter().enumerate() {
        let y = 50.0 + 20.0 * k as f64;
        svg.rect(x, y, 12.0, 12.0, *color, " stroke=\"#000000\" stroke-width=\"0.5\"");
        svg.text(x + 18.0, y + 10.5, 12.0, "start", BLACK, name);
    }
}

/// Uniform grid of cell centres over the padded bounding box of the points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshGrid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub resolution: usize,
}

impl MeshGrid {
    pub fn cell(&self) -> (f64, f64) {
        let g = self.resolution as f64;
        ((self.x.1 - self.x.0) / g, (self.y.1 - self.y.0) / g)
    }

    /// Centre of cell `(i, j)`; `i` runs along x and `j` along y.
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let (dx, dy) = self.cell();
        [self.x.0 + (i as f64 + 0.5) * dx, self.y.0 + (j as f64 + 0.5) * dy]
    }

    /// All centres, row `j * G + i`.
    pub fn centers(&self) -> Array2<f64> {
        let g = self.resolution;
        Array2::from_shape_fn((g * g, 2), |(r, k)| self.center(r % g, r / g)[k])
    }
}

/// Bounding box of `coords` padded by 5% of its span on every side. A flat
/// axis borrows the span of the other one.
pub fn mesh_grid(coords: ArrayView2<'_, f64>, resolution: usize) -> Result<MeshGrid> {
    if coords.nrows() == 0 || coords.ncols() != 2 {
        return Err(Error::InvalidInput("mesh grid needs a nonempty N x 2 array".into()));
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig("grid resolution must be positive".into()));
    }
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let range = |k: usize| {
        let col = coords.column(k);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (rx, ry) = (range(0), range(1));
    let (sx, sy) = (rx.1 - rx.0, ry.1 - ry.0);
    if sx == 0.0 && sy == 0.0 {
        return Err(Error::DegenerateBoundingBox);
    }
    let pad = |(lo, hi): (f64, f64), span: f64| {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * span * 1.1;
        (mid - half, mid + half)
    };
    Ok(MeshGrid {
        x: pad(rx, if sx > 0.0 { sx } else { sy }),
        y: pad(ry, if sy > 0.0 { sy } else { sx }),
        resolution,
    })
}

/// Model predictions at every grid centre, in [`MeshGrid::centers`] order.
pub fn grid_predictions(model: &TrainedModel, grid: &MeshGrid) -> Vec<usize> {
    model.predict(grid.centers().view())
}

/// Class regions of a fitted binary model under the scatter of the points.
pub fn render_boundary(model: &TrainedModel, points: &LabeledPoints, spec: &PlotSpec) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points to draw".into()));
    }
    let grid = mesh_grid(points.coords.view(), spec.grid)?;
    let preds = grid_predictions(model, &grid);
    let colors = [TEAL, MAGENTA];
    let axes = Axes::new(spec, grid.x, grid.y);
    let mut svg = spec.svg();
    let g = grid.resolution;
    let (dx, dy) = grid.cell();
    svg.open_group("id=\"field\" fill-opacity=\"0.35\" shape-rendering=\"crispEdges\"");
    for j in 0..g {
        let row = &preds[j * g..(j + 1) * g];
        let y_top = axes.py(grid.y.0 + (j + 1) as f64 * dy);
        let y_bot = axes.py(grid.y.0 + j as f64 * dy);
        let mut start = 0;
        while start < g {
            let class = row[start];
            let mut end = start + 1;
            while end < g && row[end] == class {
                end += 1;
            }
            let x0 = axes.px(grid.x.0 + start as f64 * dx);
            let x1 = axes.px(grid.x.0 + end as f64 * dx);
            svg.rect(x0, y_top, x1 - x0, y_bot - y_top, colors[class.min(1)], "");
            start = end;
        }
    }
    svg.close_group();
    svg.open_group("id=\"points\" stroke=\"#000000\" stroke-width=\"0.3\"");
    for (row, &label) in points.coords.rows().into_iter().zip(&points.labels) {
        svg.circle(axes.px(row[0]), axes.py(row[1]), 2.5, colors[label.min(1)], "");
    }
    svg.close_group();
    axes.draw(&mut svg, spec);
    let names = spec
        .class_names
        .clone()
        .unwrap_or_else(|| ["class 0".into(), "class 1".into()]);
    let [n0, n1] = points.class_counts();
    let mut legend = Vec::new();
    if n0 > 0 {
        legend.push((names[0].as_str(), TEAL));
    }
    if n1 > 0 {
        legend.push((names[1].as_str(), MAGENTA));
    }
    class_legend(&mut svg, spec, &legend);
    Ok(svg.finish())
}

/// Scatter of the embedding coloured by class; classes with no points are
/// left out of the legend.
pub fn render_labeled_embedding(
    coords: ArrayView2<'_, f64>,
    labels: &[usize],
    classes: &[ClassStyle],
    spec: &PlotSpec,
) -> Result<String> {
    if coords.nrows() != labels.len() {
        return Err(Error::InvalidInput(format!("{} points, {} labels", coords.nrows(), labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
        return Err(Error::InvalidInput(format!("no colour for class {bad}")));
    }
    let grid = mesh_grid(coords, 1)?;
    let axes = Axes::new(spec, grid.x, grid.y);
    let mut svg = spec.svg();
    svg.open_group("id=\"points\" stroke=\"#000000\" stroke-width=\"0.2\"");
    for (row, &label) in coords.rows().into_iter().zip(labels) {
        svg.circle(axes.px(row[0]), axes.py(row[1]), 2.2, classes[label].color, "");
    }
    svg.close_group();
    axes.draw(&mut svg, spec);
    let mut counts = vec![0usize; classes.len()];
    labels.iter().for_each(|&l| counts[l] += 1);
    let labelled: Vec<String> = classes
        .iter()
        .zip(&counts)
        .map(|(c, n)| format!("{} (n={n})", c.name))
        .collect();
    let legend: Vec<(&str, Rgb)> = classes
        .iter()
        .zip(&counts)
        .zip(&labelled)
        .filter(|((_, &n), _)| n > 0)
        .map(|((c, _), name)| (name.as_str(), c.color))
        .collect();
    class_legend(&mut svg, spec, &legend);
    Ok(svg.finish())
}

/// Maps the smallest value to 0 and the largest to 1; a constant input maps
/// to all zeros.
pub fn normalize_min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Embedding scatter coloured by one feature's combined attribution.
pub fn render_sensitivity(
    coords: ArrayView2<'_, f64>,
    map: &SensitivityMap,
    feature: usize,
    spec: &PlotSpec,
) -> Result<String> {
    if coords.nrows() != map.ids.len() {
        return Err(Error::InvalidInput(format!(
            "{} embedding rows, {} attribution rows",
            coords.nrows(),
            map.ids.len()
        )));
    }
    if feature >= map.features.len() {
        return Err(Error::InvalidInput(format!("no feature {feature}")));
    }
    let values = map.combined.column(feature).to_vec();
    let norm = normalize_min_max(&values);
    let grid = mesh_grid(coords, 1)?;
    let axes = Axes::new(spec, grid.x, grid.y);
    let mut svg = spec.svg();
    svg.open_group("id=\"points\"");
    for (row, t) in coords.rows().into_iter().zip(&norm) {
        svg.circle(axes.px(row[0]), axes.py(row[1]), 2.2, Rgb::from_unit(viridis(*t)), "");
    }
    svg.close_group();
    axes.draw(&mut svg, spec);

    let x = spec.width as f64 - 120.0;
    let (top, bottom) = (60.0, spec.height as f64 - 90.0);
    let steps = 64;
    let h = (bottom - top) / steps as f64;
    svg.open_group("id=\"legend\" shape-rendering=\"crispEdges\"");
    for k in 0..steps {
        let t = 1.0 - (k as f64 + 0.5) / steps as f64;
        svg.rect(x, top + k as f64 * h, 18.0, h, Rgb::from_unit(viridis(t)), "");
    }
    svg.close_group();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    svg.text(x + 24.0, top + 8.0, 11.0, "start", BLACK, &format!("{hi:.4}"));
    svg.text(x + 24.0, bottom, 11.0, "start", BLACK, &format!("{lo:.4}"));
    svg.text(x, top - 22.0, 12.0, "start", BLACK, "|φ|");
    svg.text(x, top - 8.0, 10.0, "start", BLACK, &map.features[feature]);
    Ok(svg.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    /// Fraction in [0, 1]; printed as a percentage.
    pub value: f64,
    pub count: Option<usize>,
    pub color: Rgb,
}

pub fn outcome_bars(dist: &ClassDistribution) -> Vec<Bar> {
    outcome_classes()
        .into_iter()
        .enumerate()
        .map(|(k, c)| Bar {
            label: c.name,
            value: dist.outcome[k],
            count: Some(dist.outcome_counts[k]),
            color: c.color,
        })
        .collect()
}

pub fn difficulty_bars(dist: &ClassDistribution) -> Vec<Bar> {
    difficulty_classes()
        .into_iter()
        .enumerate()
        .map(|(k, c)| Bar {
            label: c.name,
            value: dist.difficulty[k],
            count: Some(dist.difficulty_counts[k]),
            color: c.color,
        })
        .collect()
}

pub fn render_bars(bars: &[Bar], spec: &PlotSpec) -> Result<String> {
    if bars.is_empty() {
        return Err(Error::InvalidInput("no bars to draw".into()));
    }
    let top_value = bars.iter().map(|b| b.value).fold(0.0, f64::max).max(1e-12);
    let axes = Axes::new(spec, (0.0, bars.len() as f64), (0.0, top_value * 100.0 * 1.15));
    let mut svg = spec.svg();
    for (k, bar) in bars.iter().enumerate() {
        let pct = bar.value * 100.0;
        let x0 = axes.px(k as f64 + 0.15);
        let x1 = axes.px(k as f64 + 0.85);
        let y = axes.py(pct);
        svg.rect(x0, y, x1 - x0, axes.bottom - y, bar.color, " stroke=\"#000000\" stroke-width=\"0.5\"");
        let mid = 0.5 * (x0 + x1);
        svg.text(mid, y - 6.0, 12.0, "middle", BLACK, &format!("{pct:.1}%"));
        if let Some(n) = bar.count {
            svg.text(mid, y - 20.0, 10.0, "middle", GREY, &format!("n={n}"));
        }
        svg.text(mid, axes.bottom + 18.0, 12.0, "middle", BLACK, &bar.label);
    }
    let (l, r, t, b) = (axes.left, axes.right, axes.top, axes.bottom);
    svg.line(l, b, r, b, BLACK, 1.0);
    svg.line(l, t, l, b, BLACK, 1.0);
    svg.rotated_text(22.0, (t + b) / 2.0, 13.0, &spec.y_label);
    svg.text(spec.width as f64 / 2.0, 24.0, 15.0, "middle", BLACK, &spec.title);
    Ok(svg.finish())
}

/// One 2×2 heat grid per named confusion matrix, shaded by count relative
/// to the largest cell of that matrix.
pub fn render_confusion(cms: &[(String, ConfusionMatrix)], spec: &PlotSpec) -> Result<String> {
    if cms.is_empty() {
        return Err(Error::InvalidInput("no confusion matrices".into()));
    }
    let mut svg = spec.svg();
    let (left, right, top, bottom) = Axes::frame(spec);
    let panel_w = (right - left) / cms.len() as f64;
    let side = (panel_w - 30.0).min(bottom - top - 30.0).max(20.0);
    let cell = side / 2.0;
    for (p, (name, cm)) in cms.iter().enumerate() {
        let x0 = left + p as f64 * panel_w + 0.5 * (panel_w - side);
        let y0 = top + 20.0;
        let grid = cm.as_grid();
        let peak = grid.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
        for (r, row) in grid.iter().enumerate() {
            for (c, &count) in row.iter().enumerate() {
                let fill = Rgb::from_unit(viridis(count as f64 / peak));
                let (cx, cy) = (x0 + c as f64 * cell, y0 + r as f64 * cell);
                svg.rect(cx, cy, cell, cell, fill, " stroke=\"#FFFFFF\" stroke-width=\"1\"");
                let ink = if fill.luma() < 0.5 { WHITE } else { BLACK };
                svg.text(cx + cell / 2.0, cy + cell / 2.0 + 5.0, 14.0, "middle", ink, &count.to_string());
            }
        }
        svg.text(x0 + side / 2.0, y0 - 6.0, 12.0, "middle", BLACK, name);
        for k in 0..2 {
            let mid = k as f64 * cell + cell / 2.0;
            svg.text(x0 + mid, y0 + side + 14.0, 11.0, "middle", BLACK, &k.to_string());
            svg.text(x0 - 6.0, y0 + mid + 4.0, 11.0, "end", BLACK, &k.to_string());
        }
    }
    svg.text((left + right) / 2.0, bottom + 35.0, 13.0, "middle", BLACK, &spec.x_label);
    svg.rotated_text(22.0, (top + bottom) / 2.0, 13.0, &spec.y_label);
    svg.text(spec.width as f64 / 2.0, 24.0, 15.0, "middle", BLACK, &spec.title);
    Ok(svg.finish())
}

/// Grouped bars per classifier: CV accuracy (with ±sd whisker), then
/// hold-out precision, recall and F1.
pub fn render_metric_bars(report: &ScenarioReport, spec: &PlotSpec) -> Result<String> {
    let cells: Vec<_> = ClassifierKind::ALL
        .iter()
        .filter_map(|k| report.classifiers.get(k.short()).map(|c| (k.label(), c)))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidInput("report has no classifiers".into()));
    }
    let series: [(&str, Rgb); 4] = [
        ("Accuracy (CV)", TEAL),
        ("Precision", MAGENTA),
        ("Recall", CYAN),
        ("F1", Rgb::from_unit(viridis(0.0))),
    ];
    let axes = Axes::new(spec, (0.0, cells.len() as f64), (0.0, 1.15));
    let mut svg = spec.svg();
    let width = 0.8 / series.len() as f64;
    for (g, (label, cell)) in cells.iter().enumerate() {
        let h = &cell.holdout;
        let values = [cell.cv_accuracy_mean, h.precision, h.recall, h.f1];
        for (s, (&v, (_, color))) in values.iter().zip(&series).enumerate() {
            let a = g as f64 + 0.1 + s as f64 * width;
            let (x0, x1) = (axes.px(a), axes.px(a + width));
            let y = axes.py(v);
            svg.rect(x0, y, x1 - x0, axes.bottom - y, *color, " stroke=\"#000000\" stroke-width=\"0.5\"");
            let mid = 0.5 * (x0 + x1);
            if s == 0 {
                let sd = cell.cv_accuracy_sd;
                let (ya, yb) = (axes.py(v + sd), axes.py((v - sd).max(0.0)));
                svg.line(mid, ya, mid, yb, BLACK, 1.0);
                svg.line(mid - 3.0, ya, mid + 3.0, ya, BLACK, 1.0);
                svg.line(mid - 3.0, yb, mid + 3.0, yb, BLACK, 1.0);
                svg.text(mid, ya - 14.0, 9.0, "middle", BLACK, &format!("{v:.3}"));
                svg.text(mid, ya - 4.0, 9.0, "middle", GREY, &format!("±{sd:.3}"));
            } else {
                svg.text(mid, y - 4.0, 9.0, "middle", BLACK, &format!("{v:.3}"));
            }
        }
        svg.text(axes.px(g as f64 + 0.5), axes.bottom + 18.0, 12.0, "middle", BLACK, label);
    }
    let (l, r, t, b) = (axes.left, axes.right, axes.top, axes.bottom);
    svg.line(l, b, r, b, BLACK, 1.0);
    svg.line(l, t, l, b, BLACK, 1.0);
    for k in 0..=5 {
        let v = k as f64 * 0.2;
        svg.line(l - 5.0, axes.py(v), l, axes.py(v), BLACK, 1.0);
        svg.text(l - 8.0, axes.py(v) + 4.0, 11.0, "end", BLACK, &num(v));
    }
    for (s, (name, color)) in series.iter().enumerate() {
        let x = l + 10.0 + s as f64 * 120.0;
        svg.rect(x, t - 2.0, 10.0, 10.0, *color, "");
        svg.text(x + 14.0, t + 7.0, 11.0, "start", BLACK, name);
    }
    svg.rotated_text(22.0, (t + b) / 2.0, 13.0, "Score");
    svg.text(spec.width as f64 / 2.0, 24.0, 15.0, "middle", BLACK, &spec.title);
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::CombineRule;
    use crate::learners::{ClassifierConfig, KnnConfig};
    use ndarray::array;

    fn knn(coords: Array2<f64>, labels: Vec<usize>, k: usize) -> (TrainedModel, LabeledPoints) {
        let pts = LabeledPoints::new(coords, labels).unwrap();
        let m = TrainedModel::fit(&ClassifierConfig::Knn(KnnConfig { k }), &pts).unwrap();
        (m, pts)
    }

    fn fills(svg: &str, group: &str) -> Vec<String> {
        let start = svg.find(&format!("<g id=\"{group}\"")).unwrap();
        let end = start + svg[start..].find("</g>").unwrap();
        svg[start..end]
            .split("fill=\"")
            .skip(1)
            .map(|s| s[..7].to_string())
            .collect()
    }

    #[test]
    fn constant_model_fills_everything_teal() {
        let (m, pts) = knn(array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![0, 0, 1], 3);
        let spec = PlotSpec { grid: 40, ..PlotSpec::new(PlotKind::Boundary, "t") };
        let svg = render_boundary(&m, &pts, &spec).unwrap();
        let f = fills(&svg, "field");
        assert_eq!(f.len(), 40);
        assert!(f.iter().all(|c| c == "#008080"));
    }

    #[test]
    fn nearest_neighbour_field_follows_bisector() {
        let a = [0.3, -1.0];
        let b = [2.0, 1.5];
        let (m, _) = knn(array![[a[0], a[1]], [b[0], b[1]]], vec![0, 1], 1);
        let grid = mesh_grid(array![[a[0], a[1]], [b[0], b[1]]].view(), 300).unwrap();
        let preds = grid_predictions(&m, &grid);
        let d2 = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        let mut checked = 0;
        for j in 0..300 {
            for i in 0..300 {
                let c = grid.center(i, j);
                let (da, db) = (d2(c, a), d2(c, b));
                if da == db {
                    continue;
                }
                assert_eq!(preds[j * 300 + i], usize::from(db < da), "cell {i},{j}");
                checked += 1;
            }
        }
        assert!(checked > 89_000);
        let direct = m.predict(grid.centers().view());
        assert_eq!(direct, preds);
    }

    #[test]
    fn grid_padding_and_degeneracy() {
        let g = mesh_grid(array![[0.0, 0.0], [10.0, 20.0]].view(), 10).unwrap();
        assert!((g.x.0 + 0.5).abs() < 1e-12 && (g.x.1 - 10.5).abs() < 1e-12);
        assert!((g.y.0 + 1.0).abs() < 1e-12 && (g.y.1 - 21.0).abs() < 1e-12);
        assert_eq!(g.centers().nrows(), 100);
        let same = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(mesh_grid(same.view(), 10), Err(Error::DegenerateBoundingBox)));
        let flat = mesh_grid(array![[0.0, 3.0], [4.0, 3.0]].view(), 5).unwrap();
        assert!(flat.y.1 > flat.y.0);
    }

    #[test]
    fn min_max_contract() {
        let n = normalize_min_max(&[3.0, -1.0, 7.0, 2.0]);
        assert_eq!(n[1], 0.0);
        assert_eq!(n[2], 1.0);
        assert_eq!(normalize_min_max(&[2.0, 2.0]), vec![0.0, 0.0]);
    }

    fn map_with(values: Vec<f64>) -> SensitivityMap {
        let n = values.len();
        SensitivityMap {
            ids: (0..n).map(|i| i.to_string()).collect(),
            features: vec!["temporal".into()],
            phi_x: Array2::from_shape_vec((n, 1), values.clone()).unwrap(),
            phi_y: Array2::zeros((n, 1)),
            combined: Array2::from_shape_vec((n, 1), values).unwrap(),
            base: [0.0; 2],
            predictions: vec![[0.0; 2]; n],
            rule: CombineRule::Euclidean,
        }
    }

    #[test]
    fn sensitivity_colours_match_colormap() {
        let values = vec![0.1, 0.9, 0.35, 0.5, 0.2];
        let coords = Array2::from_shape_fn((5, 2), |(i, k)| (i * (k + 1)) as f64);
        let map = map_with(values.clone());
        let spec = PlotSpec::new(PlotKind::Sensitivity, "s");
        let svg = render_sensitivity(coords.view(), &map, 0, &spec).unwrap();
        let f = fills(&svg, "points");
        let norm = normalize_min_max(&values);
        for (c, t) in f.iter().zip(&norm) {
            assert_eq!(c, &Rgb::from_unit(viridis(*t)).to_string());
        }
        let flat = render_sensitivity(coords.view(), &map_with(vec![0.4; 5]), 0, &spec).unwrap();
        let f = fills(&flat, "points");
        assert!(f.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn bars_print_percentages_and_are_deterministic() {
        let bars: Vec<Bar> = [("S", 0.282), ("NR", 0.301), ("F", 0.417)]
            .iter()
            .zip(outcome_classes())
            .map(|((l, v), c)| Bar { label: l.to_string(), value: *v, count: None, color: c.color })
            .collect();
        let spec = PlotSpec::new(PlotKind::Bars, "Outcomes");
        let a = render_bars(&bars, &spec).unwrap();
        for p in ["28.2%", "30.1%", "41.7%"] {
            assert!(a.contains(&format!(">{p}<")), "{p}");
        }
        assert_eq!(a, render_bars(&bars, &spec).unwrap());
    }

    #[test]
    fn empty_class_left_out_of_legend() {
        let coords = array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]];
        let spec = PlotSpec::new(PlotKind::Scatter, "e");
        let svg = render_labeled_embedding(coords.view(), &[0, 2, 2], &outcome_classes(), &spec).unwrap();
        assert!(svg.contains(">S (n=1)<") && svg.contains(">F (n=2)<"));
        assert!(!svg.contains(">NR"));
        assert!(render_labeled_embedding(coords.view(), &[0, 3, 1], &outcome_classes(), &spec).is_err());
    }

    #[test]
    fn confusion_counts_printed() {
        let cm = ConfusionMatrix { tp: 12, fp: 3, tn: 40, fn_: 7 };
        let spec = PlotSpec::new(PlotKind::Confusion, "c");
        let svg = render_confusion(&[("kNN".into(), cm)], &spec).unwrap();
        for n in ["12", "3", "40", "7"] {
            assert!(svg.contains(&format!(">{n}</text>")));
        }
    }
}
