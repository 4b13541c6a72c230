//! SVG figures. Every figure is built from the output tables alone.

use plotters::prelude::*;

use super::config::Scenario;
use super::table::Table;

type Series = (String, Vec<(f64, f64)>);

/// One chart: named polylines sharing axes.
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Force equal x/y ranges (for Bloch-plane projections).
    pub square: bool,
}

impl Panel {
    fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            square: false,
        }
    }

    fn with(mut self, label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        if !points.is_empty() {
            self.series.push((label.into(), points));
        }
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = x;
        for (_, pts) in &self.series {
            for &(a, b) in pts {
                x = (x.0.min(a), x.1.max(a));
                y = (y.0.min(b), y.1.max(b));
            }
        }
        let pad = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                return (0.0, 1.0);
            }
            let span = (hi - lo).max(1e-12 * lo.abs().max(1.0));
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        if self.square {
            let lo = x.0.min(y.0);
            let hi = x.1.max(y.1);
            let r = pad((lo, hi));
            return (r, r);
        }
        (pad(x), pad(y))
    }
}

/// Points `(x, y)` of two numeric columns, skipping rows where either is missing.
fn xy(table: &Table, x: &str, y: &str) -> Vec<(f64, f64)> {
    let (Some(xs), Some(ys)) = (table.column(x), table.column(y)) else {
        return Vec::new();
    };
    xs.into_iter()
        .zip(ys)
        .filter_map(|(a, b)| Some((a?, b?)))
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .collect()
}

/// Keeps at most `n` evenly spaced points; the figures do not need every sample.
fn thin(points: Vec<(f64, f64)>, n: usize) -> Vec<(f64, f64)> {
    if points.len() <= n {
        return points;
    }
    let stride = points.len().div_ceil(n);
    let last = *points.last().unwrap();
    let mut out: Vec<_> = points.into_iter().step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

const MAX_POINTS: usize = 1500;

pub fn render(panels: &[Panel], columns: usize) -> Result<String, String> {
    let rows = panels.len().div_ceil(columns);
    let height = if panels.iter().any(|p| p.square) { 420 } else { 340 };
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, (420 * columns as u32, height * rows as u32)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| e.to_string())?;
        let areas = root.split_evenly((rows, columns));
        for (panel, area) in panels.iter().zip(areas.iter()) {
            draw_panel(panel, area).map_err(|e| e.to_string())?;
        }
        root.present().map_err(|e| e.to_string())?;
    }
    Ok(buf)
}

fn draw_panel<DB: DrawingBackend>(
    panel: &Panel,
    area: &DrawingArea<DB, plotters::coord::Shift>,
) -> Result<(), DrawingAreaErrorKind<DB::ErrorType>> {
    let ((x0, x1), (y0, y1)) = panel.bounds();
    let mut chart = ChartBuilder::on(area)
        .caption(&panel.title, ("sans-serif", 16))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart
        .configure_mesh()
        .x_desc(panel.x_label.as_str())
        .y_desc(panel.y_label.as_str())
        .light_line_style(WHITE.mix(0.0))
        .draw()?;
    for (i, (label, pts)) in panel.series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let drawn = chart.draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))?;
        if !label.is_empty() {
            drawn
                .label(label.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        }
    }
    if panel.series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .position(if panel.square {
                SeriesLabelPosition::LowerLeft
            } else {
                SeriesLabelPosition::UpperRight
            })
            .draw()?;
    }
    Ok(())
}

fn find<'a>(tables: &'a [Table], name: &str) -> Option<&'a Table> {
    tables.iter().find(|t| t.name == name)
}

/// Figures for a scenario: `(file stem, panels, columns)`.
pub fn figures(scenario: Scenario, tables: &[Table]) -> Vec<(String, Vec<Panel>, usize)> {
    match scenario {
        Scenario::Surfaces => find(tables, "surfaces").map_or_else(Vec::new, surface_figures),
        Scenario::Cmax => Vec::new(),
        Scenario::TwoAtoms => find(tables, "two-atoms").map_or_else(Vec::new, two_atom_figures),
        Scenario::JcMarkov => find(tables, "jc-markov").map_or_else(Vec::new, jc_figures),
        Scenario::Isothermal => find(tables, "isothermal").map_or_else(Vec::new, isothermal_figures),
        Scenario::ClosedPair => find(tables, "closed-pair").map_or_else(Vec::new, closed_pair_figures),
    }
}

fn surface_figures(t: &Table) -> Vec<(String, Vec<Panel>, usize)> {
    let slices = [0.25, 0.5, 0.75, 0.95];
    let mut temp = Panel::new("temperature at fixed B", "B_par", "k_B T / eps");
    let mut cap = Panel::new("heat capacity at fixed B", "B_par", "C_eps / k_B");
    let b = t.column("B").unwrap_or_default();
    for s in slices {
        let rows: Vec<usize> = (0..b.len()).filter(|&i| b[i].is_some_and(|v| (v - s).abs() < 1e-9)).collect();
        let sub = Table {
            rows: rows.iter().map(|&i| t.rows[i].clone()).collect(),
            ..t.clone()
        };
        let clipped = xy(&sub, "B_par", "kT_over_eps")
            .into_iter()
            .filter(|(_, y)| y.abs() <= 10.0)
            .collect::<Vec<_>>();
        // Split at B_par = 0, where T changes sign through infinity.
        let neg = clipped.iter().copied().filter(|p| p.0 < 0.0).collect();
        let pos = clipped.iter().copied().filter(|p| p.0 > 0.0).collect();
        temp = temp.with(format!("B={s}"), pos).with(String::new(), neg);
        cap = cap.with(format!("B={s}"), xy(&sub, "B_par", "C_eps"));
    }
    vec![
        ("surfaces_temperature".into(), vec![temp], 1),
        ("surfaces_heat_capacity".into(), vec![cap], 1),
    ]
}

fn two_atom_figures(t: &Table) -> Vec<(String, Vec<Panel>, usize)> {
    let line = |y: &str| thin(xy(t, "t_gamma0", y), MAX_POINTS);
    let temp = Panel::new("temperature", "t gamma0", "k_B T / eps")
        .with("a", line("T_a"))
        .with("b", line("T_b"));
    let energy = Panel::new("internal energy", "t gamma0", "E / eps")
        .with("a", line("E_a"))
        .with("b", line("E_b"));
    let entropy = Panel::new("internal entropy production", "t gamma0", "S_gen,int / k_B")
        .with("a", line("sgen_int_a"))
        .with("b", line("sgen_int_b"))
        .with("a + b", line("sgen_int_sum"));
    vec![("two-atoms_triptych".into(), vec![temp, energy, entropy], 3)]
}

fn per_run(t: &Table, y: &str, title: &str, y_label: &str) -> Panel {
    let mut p = Panel::new(title, "t gamma0", y_label);
    for run in t.groups("run") {
        p = p.with(run.clone(), thin(xy(&t.filter("run", &run), "t_gamma0", y), MAX_POINTS));
    }
    p
}

fn jc_figures(t: &Table) -> Vec<(String, Vec<Panel>, usize)> {
    let mut entropy = Vec::new();
    for (col, title) in [
        ("sgen_int", "internal"),
        ("sgen_ht", "heat transfer"),
        ("sgen_tot", "total"),
    ] {
        entropy.push(per_run(t, col, &format!("{title} entropy production"), "S_gen / k_B"));
    }
    vec![
        (
            "jc-markov_temperature-energy".into(),
            vec![
                per_run(t, "T", "temperature", "k_B T / eps"),
                per_run(t, "E", "internal energy", "E / eps"),
            ],
            2,
        ),
        ("jc-markov_entropy".into(), entropy, 3),
    ]
}

fn isothermal_figures(t: &Table) -> Vec<(String, Vec<Panel>, usize)> {
    let mut bloch = Panel::new("Bloch plane", "B_x", "B_z");
    bloch.square = true;
    let circle = (0..=360)
        .map(|d| (d as f64).to_radians())
        .map(|a| (a.sin(), a.cos()))
        .collect();
    bloch = bloch.with("unit circle", circle);

    let runs = t.groups("run");
    // The first run starts on the isotherm; its initial temperature fixes the curve.
    if let Some(t_e) = runs
        .first()
        .and_then(|r| t.filter("run", r).column("T").and_then(|c| c.first().copied().flatten()))
    {
        let curve = (-890..=890)
            .map(|d| (d as f64 / 10.0).to_radians())
            .map(|a| {
                let b = (1.0 / (t_e * a.cos())).tanh();
                (b * a.sin(), b * a.cos())
            })
            .collect();
        bloch = bloch.with(format!("isotherm kT/eps = {t_e:.3}"), curve);
    }
    for run in &runs {
        bloch = bloch.with(run.clone(), thin(xy(&t.filter("run", run), "x", "z"), MAX_POINTS));
    }
    vec![
        ("isothermal_bloch".into(), vec![bloch], 1),
        (
            "isothermal_temperature".into(),
            vec![per_run(t, "T", "temperature", "k_B T / eps")],
            1,
        ),
    ]
}

fn closed_pair_figures(t: &Table) -> Vec<(String, Vec<Panel>, usize)> {
    let line = |y: &str| thin(xy(t, "t", y), MAX_POINTS);
    let balance = Panel::new("entropy balance", "t", "entropy / k_B")
        .with("S_int,a + S_int,b + S_ht", line("sgen_total"))
        .with("delta I(A:B)", line("delta_I"));
    let temps = Panel::new("local temperatures", "t", "k_B T")
        .with("a", line("T_a"))
        .with("b", line("T_b"));
    vec![("closed-pair_balance".into(), vec![balance, temps], 2)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_svg() {
        let p = Panel::new("demo", "x", "y").with("line", vec![(0.0, 0.0), (1.0, 2.0)]);
        let svg = render(&[p], 1).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("demo"));
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let pts: Vec<_> = (0..10_001).map(|i| (i as f64, 0.0)).collect();
        let out = thin(pts, 100);
        assert!(out.len() <= 102);
        assert_eq!(out[0].0, 0.0);
        assert_eq!(out.last().unwrap().0, 10_000.0);
    }
}
