//! The full design x code grid on identical game suites, with the
//! permissible-oracle bound, written out as CSV and SVG curves.
//!
//!     cargo run --release --example experiment_grid -- [config.toml] [out-dir]

use star::harness::{run_grid, ExperimentGrid};
use star::plot::learning_curves_svg;
use star::social::SocialCodeKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let grid = match args.next() {
        Some(path) => ExperimentGrid::from_file(path)?,
        None => ExperimentGrid::default(),
    };
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "grid-out".into()));
    std::fs::create_dir_all(&out)?;

    let run = run_grid(&grid)?;
    run.table
        .write_csv(std::fs::File::create(out.join("metrics.csv"))?)?;
    for &code in &grid.codes {
        learning_curves_svg(&run.table, code, out.join(format!("curves-{code}.svg")))?;
    }

    for &seed in &grid.seeds {
        for code in SocialCodeKind::ALL
            .into_iter()
            .filter(|c| grid.codes.contains(c))
        {
            println!("seed {seed}, {code} code      rows/bound per game");
            for &design in &grid.designs {
                let games: Vec<String> = run
                    .table
                    .cell(design, code, seed)
                    .iter()
                    .map(|r| format!("{}/{}", r.rows_cleared, r.upper_bound_rows))
                    .collect();
                println!(
                    "  {:<9} {:>5.1}% permissible  {:>5} rows  {}",
                    design.cli_name(),
                    run.table.suite_pct_permissible(design, code, seed),
                    run.table.suite_rows(design, code, seed),
                    games.join(" ")
                );
            }
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
