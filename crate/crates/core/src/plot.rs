//! Learning-curve figures: permissible percentage and rows cleared per game
//! for every design, with the permissible-oracle bound on the rows panel.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::feedback::DesignKind;
use crate::harness::MetricsTable;
use crate::social::SocialCodeKind;

fn design_color(d: DesignKind) -> RGBColor {
    match d {
        DesignKind::Parallel => RGBColor(31, 119, 180),
        DesignKind::EffectivenessAlone => RGBColor(214, 39, 40),
        DesignKind::SocialAlone => RGBColor(44, 160, 44),
        DesignKind::Blended => RGBColor(148, 103, 189),
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

/// Writes a two-panel SVG for one social code. Values are means over the
/// table's seeds.
pub fn learning_curves_svg(
    table: &MetricsTable,
    code: SocialCodeKind,
    path: impl AsRef<Path>,
) -> Result<()> {
    let designs: Vec<DesignKind> = DesignKind::ALL
        .into_iter()
        .filter(|&d| table.rows.iter().any(|r| r.design == d && r.code == code))
        .collect();
    let curves: Vec<_> = designs
        .iter()
        .map(|&d| (d, table.aggregate(d, code)))
        .collect();
    let games = curves
        .iter()
        .flat_map(|(_, a)| a.iter().map(|g| g.game + 1))
        .max()
        .unwrap_or(1);
    let max_rows = curves
        .iter()
        .flat_map(|(_, a)| {
            a.iter()
                .map(|g| g.rows_cleared.mean.max(g.upper_bound_rows.mean))
        })
        .fold(1.0, f64::max);

    let root = SVGBackend::new(path.as_ref(), (1100, 440)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (left, right) = root.split_horizontally(550);

    let mut pct = ChartBuilder::on(&left)
        .caption(
            format!("{code} code: % permissible actions"),
            ("sans-serif", 18),
        )
        .margin(12)
        .x_label_area_size(32)
        .y_label_area_size(44)
        .build_cartesian_2d(1f64..games.max(2) as f64, 0f64..100f64)
        .map_err(plot_err)?;
    pct.configure_mesh()
        .x_desc("game")
        .y_desc("% permissible")
        .draw()
        .map_err(plot_err)?;
    for (d, agg) in &curves {
        let color = design_color(*d);
        pct.draw_series(LineSeries::new(
            agg.iter()
                .map(|g| ((g.game + 1) as f64, g.pct_permissible.mean)),
            color.stroke_width(2),
        ))
        .map_err(plot_err)?
        .label(d.cli_name())
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    pct.configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;

    let mut rows = ChartBuilder::on(&right)
        .caption(format!("{code} code: rows cleared"), ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(32)
        .y_label_area_size(52)
        .build_cartesian_2d(1f64..games.max(2) as f64, 0f64..max_rows * 1.05)
        .map_err(plot_err)?;
    rows.configure_mesh()
        .x_desc("game")
        .y_desc("rows cleared")
        .draw()
        .map_err(plot_err)?;
    for (d, agg) in &curves {
        let color = design_color(*d);
        rows.draw_series(LineSeries::new(
            agg.iter()
                .map(|g| ((g.game + 1) as f64, g.rows_cleared.mean)),
            color.stroke_width(2),
        ))
        .map_err(plot_err)?
        .label(d.cli_name())
        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    if let Some((_, agg)) = curves.first() {
        rows.draw_series(LineSeries::new(
            agg.iter()
                .map(|g| ((g.game + 1) as f64, g.upper_bound_rows.mean)),
            BLACK.stroke_width(1),
        ))
        .map_err(plot_err)?
        .label("upper bound")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], BLACK));
    }
    rows.configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;

    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_grid, ExperimentGrid};
    use crate::runner::MatchConfig;

    #[test]
    fn writes_an_svg() {
        let grid = ExperimentGrid {
            codes: vec![SocialCodeKind::Global],
            base: MatchConfig {
                games: 2,
                max_blocks_per_game: 30,
                ..MatchConfig::default()
            },
            ..ExperimentGrid::default()
        };
        let run = run_grid(&grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.svg");
        learning_curves_svg(&run.table, SocialCodeKind::Global, &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("upper bound"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("% permissible actions"));
    }
}
