use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use star::feedback::DesignKind;
use star::gateway::{Gateway, GatewayConfig, SessionConfig};
use star::harness::{compute_upper_bound, greedy_rows, run_grid, write_suite_csv, ExperimentGrid};
use star::plot::learning_curves_svg;
use star::runner::{read_records, replay, run_proxy_suite, write_records};
use star::social::SocialCodeKind;

#[derive(Parser)]
#[command(
    name = "star",
    version,
    about = "Social-norm learning agents in multiagent Tetris"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one suite of games with the human proxy as trainer.
    Run {
        #[arg(long)]
        design: Option<DesignKind>,
        #[arg(long)]
        code: Option<SocialCodeKind>,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        blocks_per_slice: Option<usize>,
        /// Experiment config file (TOML or JSON); flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every (design, code, seed) cell of an experiment config.
    Grid {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "grid-out")]
        out: PathBuf,
    },
    /// Rows per game of the permissible-oracle and unconstrained proxy players.
    Bound {
        #[arg(long)]
        code: SocialCodeKind,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-simulate a record file and check every board hash.
    Replay { record: PathBuf },
    /// Serve live trainer sessions over websocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Auto-advance after this many milliseconds without feedback.
        #[arg(long)]
        feedback_timeout_ms: Option<u64>,
        #[arg(long, default_value_t = 600)]
        idle_timeout_s: u64,
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

fn load_grid(path: Option<&Path>) -> anyhow::Result<ExperimentGrid> {
    match path {
        Some(p) => ExperimentGrid::from_file(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ExperimentGrid::default()),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().cmd {
        Cmd::Run {
            design,
            code,
            games,
            seed,
            blocks_per_slice,
            config,
            out,
        } => {
            let grid = load_grid(config.as_deref())?;
            let mut m = grid.base.clone();
            m.design = design.unwrap_or(m.design);
            m.social_code = code.unwrap_or(m.social_code);
            m.games = games.unwrap_or(m.games);
            m.seed = seed.unwrap_or(m.seed);
            m.blocks_per_slice = blocks_per_slice.unwrap_or(m.blocks_per_slice);
            m.validate()?;

            let (records, agents) = run_proxy_suite(&m, &grid.agent, grid.proxy)?;
            std::fs::create_dir_all(&out)?;
            write_records(&records, create(&out.join("records.ndjson"))?)?;
            write_suite_csv(&records, create(&out.join("suite.csv"))?)?;
            for a in &agents {
                a.checkpoint()
                    .save(out.join(format!("agent-{}.json", a.id())))?;
            }
            println!("design {} code {} seed {}", m.design, m.social_code, m.seed);
            for r in &records {
                println!(
                    "game {:>2}  rows {:>4}  actions {:>4}  permissible {:>5.1}%",
                    r.header.game + 1,
                    r.summary.rows_cleared,
                    r.summary.actions_total,
                    r.pct_permissible()
                );
            }
        }
        Cmd::Grid { config, out } => {
            let grid = load_grid(config.as_deref())?;
            let run = run_grid(&grid)?;
            std::fs::create_dir_all(out.join("records"))?;
            run.table.write_csv(create(&out.join("metrics.csv"))?)?;
            for cell in &run.cells {
                if let Ok(records) = &cell.records {
                    let k = cell.key;
                    let name = format!("{}-{}-seed{}.ndjson", k.code, k.design, k.seed);
                    write_records(records, create(&out.join("records").join(name))?)?;
                }
            }
            for &code in &grid.codes {
                learning_curves_svg(&run.table, code, out.join(format!("curves-{code}.svg")))?;
            }
            for &seed in &grid.seeds {
                for &code in &grid.codes {
                    println!("seed {seed}, {code} code");
                    for &design in &grid.designs {
                        println!(
                            "  {:<9} rows {:>6}  permissible {:>5.1}%",
                            design.cli_name(),
                            run.table.suite_rows(design, code, seed),
                            run.table.suite_pct_permissible(design, code, seed)
                        );
                    }
                }
            }
            for f in &run.table.failed {
                eprintln!("failed cell {:?}: {}", f.key, f.error);
            }
            println!("wrote {}", out.display());
            if !run.table.failed.is_empty() {
                bail!("{} grid cells failed", run.table.failed.len());
            }
        }
        Cmd::Bound {
            code,
            seed,
            games,
            config,
        } => {
            let grid = load_grid(config.as_deref())?;
            let mut m = grid.base.clone();
            m.social_code = code;
            m.seed = seed.unwrap_or(m.seed);
            m.games = games.unwrap_or(m.games);
            let bound = compute_upper_bound(&m, &grid.proxy)?;
            let greedy = greedy_rows(&m, &grid.proxy)?;
            println!("game,upperBoundRows,greedyRows");
            for (g, (b, r)) in bound.iter().zip(&greedy).enumerate() {
                println!("{},{b},{r}", g + 1);
            }
        }
        Cmd::Replay { record } => {
            let file =
                File::open(&record).with_context(|| format!("opening {}", record.display()))?;
            let records = read_records(BufReader::new(file))?;
            let totals = replay(&records)?;
            println!(
                "ok: {} games, {} actions, {} rows cleared, {} permissible actions",
                totals.games, totals.steps, totals.rows_cleared, totals.permissible_actions
            );
        }
        Cmd::Serve {
            addr,
            config,
            feedback_timeout_ms,
            idle_timeout_s,
            records,
        } => {
            let grid = load_grid(config.as_deref())?;
            let config = GatewayConfig {
                session: SessionConfig {
                    base: grid.base,
                    agent: grid.agent,
                },
                feedback_timeout: feedback_timeout_ms.map(Duration::from_millis),
                idle_timeout: Duration::from_secs(idle_timeout_s),
                record_dir: records,
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let gateway = Gateway::bind(addr.as_str(), config).await?;
                println!("listening on ws://{}", gateway.local_addr()?);
                gateway.run().await
            })?;
        }
    }
    Ok(())
}
