//! SVG charts of sweep results: mean λ per sweep value with ±1 std error bars,
//! one line per series.

use std::path::Path;

use plotters::prelude::*;

use crate::error::CliError;
use crate::sweep::Series;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl PlotStyle {
    pub fn for_parameter(parameter: &str) -> Self {
        PlotStyle {
            title: format!("Mean reliability vs {parameter}"),
            x_label: parameter.to_string(),
            y_label: "mean lambda".to_string(),
            width: 800,
            height: 560,
        }
    }
}

/// X coordinates for the sweep values: the values themselves when they are
/// all numeric, otherwise their positions with the values as tick labels.
enum Axis {
    Numeric,
    Categorical(Vec<String>),
}

impl Axis {
    fn of(series: &[Series]) -> Self {
        let numeric = series
            .iter()
            .flat_map(|s| &s.rows)
            .all(|r| r.param.parse::<f64>().is_ok_and(f64::is_finite));
        if numeric {
            return Axis::Numeric;
        }
        let mut labels: Vec<String> = Vec::new();
        for r in series.iter().flat_map(|s| &s.rows) {
            if !labels.contains(&r.param) {
                labels.push(r.param.clone());
            }
        }
        Axis::Categorical(labels)
    }

    fn x(&self, param: &str) -> f64 {
        match self {
            Axis::Numeric => param.parse().expect("checked numeric"),
            Axis::Categorical(labels) => labels.iter().position(|l| l == param).expect("label collected") as f64,
        }
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 0.5 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn draw_err<E: std::error::Error + Send + Sync>(e: DrawingAreaErrorKind<E>) -> CliError {
    CliError::Runtime(format!("plot: {e}"))
}

/// Writes the chart to `path` as a self-contained SVG.
pub fn emit_plot(series: &[Series], style: &PlotStyle, path: &Path) -> Result<(), CliError> {
    let rows: Vec<_> = series.iter().flat_map(|s| &s.rows).collect();
    if rows.is_empty() {
        return Err(CliError::Runtime("plot: no data rows".into()));
    }
    let axis = Axis::of(series);
    let xs: Vec<f64> = rows.iter().map(|r| axis.x(&r.param)).collect();
    let (x0, x1) = padded(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let y_lo = rows.iter().map(|r| r.mean_lambda - r.std_lambda).fold(0.0, f64::min);
    let y_hi = rows.iter().map(|r| r.mean_lambda + r.std_lambda).fold(1.0, f64::max);

    let root = SVGBackend::new(path, (style.width, style.height)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(&style.title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y_lo..y_hi * 1.02)
        .map_err(draw_err)?;

    let tick_label = |x: &f64| match &axis {
        Axis::Numeric => format!("{x}"),
        Axis::Categorical(labels) => {
            let i = x.round();
            if (x - i).abs() < 1e-6 && i >= 0.0 {
                labels.get(i as usize).cloned().unwrap_or_default()
            } else {
                String::new()
            }
        }
    };
    let ticks = match &axis {
        Axis::Numeric => 10,
        Axis::Categorical(labels) => labels.len(),
    };
    chart
        .configure_mesh()
        .x_desc(&style.x_label)
        .y_desc(&style.y_label)
        .x_labels(ticks)
        .x_label_formatter(&tick_label)
        .draw()
        .map_err(draw_err)?;

    for (i, s) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let points: Vec<(f64, f64)> = s.rows.iter().map(|r| (axis.x(&r.param), r.mean_lambda)).collect();
        let line = chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))
            .map_err(draw_err)?;
        if !s.label.is_empty() {
            line.label(&s.label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart
            .draw_series(points.iter().map(|&p| Circle::new(p, 4, color.filled())))
            .map_err(draw_err)?;
        chart
            .draw_series(s.rows.iter().map(|r| {
                ErrorBar::new_vertical(
                    axis.x(&r.param),
                    r.mean_lambda - r.std_lambda,
                    r.mean_lambda,
                    r.mean_lambda + r.std_lambda,
                    color.stroke_width(1),
                    8,
                )
            }))
            .map_err(draw_err)?;
    }
    if series.iter().any(|s| !s.label.is_empty()) {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)?;
    Ok(())
}
