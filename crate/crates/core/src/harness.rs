//! Experiment grid: every (design, code, seed) suite on shared piece
//! sequences, the permissible-oracle upper bound, and the metrics table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::feedback::DesignKind;
use crate::proxy::ProxyPolicy;
use crate::runner::{run_proxy_suite, GameEnd, GameRecord, MatchConfig};
use crate::social::SocialCodeKind;

/// Everything a grid run needs; this is also the TOML/JSON config file
/// schema (`[match]`, `[agent]`, `[proxy]` tables plus the three axes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentGrid {
    pub designs: Vec<DesignKind>,
    pub codes: Vec<SocialCodeKind>,
    pub seeds: Vec<u64>,
    #[serde(rename = "match")]
    pub base: MatchConfig,
    pub agent: AgentConfig,
    pub proxy: ProxyPolicy,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        let base = MatchConfig::default();
        ExperimentGrid {
            designs: DesignKind::ALL.to_vec(),
            codes: SocialCodeKind::ALL.to_vec(),
            seeds: vec![base.seed],
            base,
            agent: AgentConfig::default(),
            proxy: ProxyPolicy::default(),
        }
    }
}

impl ExperimentGrid {
    pub fn single(design: DesignKind, code: SocialCodeKind, base: MatchConfig) -> Self {
        ExperimentGrid {
            designs: vec![design],
            codes: vec![code],
            seeds: vec![base.seed],
            base,
            ..ExperimentGrid::default()
        }
    }

    /// Reads a `.toml` or `.json` file (by extension; TOML otherwise).
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let grid: ExperimentGrid = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grid serializes to toml")
    }

    pub fn validate(&self) -> Result<()> {
        if self.designs.is_empty() || self.codes.is_empty() || self.seeds.is_empty() {
            return Err(Error::config("grid axes must be non-empty"));
        }
        self.base.validate()
    }

    /// The match configuration of one grid cell.
    pub fn cell_config(&self, key: CellKey) -> MatchConfig {
        MatchConfig {
            design: key.design,
            social_code: key.code,
            seed: key.seed,
            ..self.base.clone()
        }
    }

    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &seed in &self.seeds {
            for &code in &self.codes {
                for &design in &self.designs {
                    out.push(CellKey { design, code, seed });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub design: DesignKind,
    pub code: SocialCodeKind,
    pub seed: u64,
}

/// Outcome of a scripted oracle player over one game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleGame {
    pub rows_cleared: usize,
    pub actions: usize,
    pub permissible_actions: usize,
    pub end: GameEnd,
}

/// Plays one game with full knowledge of the proxy heuristic and the social
/// code. With `constrained`, only ground-truth-permissible placements are
/// considered; when none exists it takes the least harmful one. Ties go to
/// the higher heuristic score, then to enumeration order.
pub fn oracle_game(
    config: &MatchConfig,
    policy: &ProxyPolicy,
    constrained: bool,
    game: usize,
) -> Result<OracleGame> {
    config.validate()?;
    let code = config.social();
    let mut board = config.empty_board();
    let mut pieces = config.pieces(game);
    let mut out = OracleGame {
        rows_cleared: 0,
        actions: 0,
        permissible_actions: 0,
        end: GameEnd::BlockLimit,
    };
    loop {
        if out.actions >= config.max_blocks_per_game {
            break;
        }
        let Some(piece) = pieces.next() else {
            out.end = GameEnd::SequenceExhausted;
            break;
        };
        let acting = config.team.members()[config.acting_index(out.actions)].id;
        let mut best: Option<(i32, f64, crate::board::Board, usize, bool)> = None;
        for (action, score) in policy.scores(&board, piece) {
            let verdict = code.judge_placement(&config.team, acting, &board, piece, action)?;
            let harm = if constrained && !verdict.permissible {
                code.harm(&verdict, acting).max(1)
            } else {
                0
            };
            let better = match &best {
                None => true,
                Some((bh, bs, ..)) => harm < *bh || (harm == *bh && score > *bs),
            };
            if better {
                let (after, rows) = crate::placement::apply_placement(&board, piece, action)?;
                best = Some((harm, score, after, rows, verdict.permissible));
            }
        }
        let Some((_, _, after, rows, permissible)) = best else {
            out.end = GameEnd::NoLegalAction;
            break;
        };
        out.actions += 1;
        out.rows_cleared += rows;
        out.permissible_actions += usize::from(permissible);
        board = after;
    }
    Ok(out)
}

/// Rows cleared per game by the permissible-oracle player: the ceiling for a
/// team that has learned the proxy and the social code perfectly.
pub fn compute_upper_bound(config: &MatchConfig, policy: &ProxyPolicy) -> Result<Vec<usize>> {
    (0..config.games)
        .into_par_iter()
        .map(|g| oracle_game(config, policy, true, g).map(|o| o.rows_cleared))
        .collect()
}

/// Rows cleared per game by the proxy-greedy player that ignores the code.
pub fn greedy_rows(config: &MatchConfig, policy: &ProxyPolicy) -> Result<Vec<usize>> {
    (0..config.games)
        .into_par_iter()
        .map(|g| oracle_game(config, policy, false, g).map(|o| o.rows_cleared))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub design: DesignKind,
    pub code: SocialCodeKind,
    pub game: usize,
    pub rows_cleared: usize,
    pub actions: usize,
    pub pct_permissible: f64,
    pub upper_bound_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub key: CellKey,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Spread> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        Some(Spread {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Per-game-index statistics over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameAggregate {
    pub game: usize,
    pub rows_cleared: Spread,
    pub pct_permissible: Spread,
    pub upper_bound_rows: Spread,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
    pub failed: Vec<FailedCell>,
    /// Piece-sequence hash per (code, seed) cell group; every design in the
    /// group consumed this sequence.
    pub sequence_hashes: BTreeMap<u64, String>,
}

impl MetricsTable {
    pub fn cell(&self, design: DesignKind, code: SocialCodeKind, seed: u64) -> Vec<&MetricsRow> {
        self.rows
            .iter()
            .filter(|r| r.design == design && r.code == code && r.seed == seed)
            .collect()
    }

    /// Total rows cleared over a suite.
    pub fn suite_rows(&self, design: DesignKind, code: SocialCodeKind, seed: u64) -> usize {
        self.cell(design, code, seed)
            .iter()
            .map(|r| r.rows_cleared)
            .sum()
    }

    /// Mean of the per-game permissible percentages over a suite.
    pub fn suite_pct_permissible(
        &self,
        design: DesignKind,
        code: SocialCodeKind,
        seed: u64,
    ) -> f64 {
        let rows = self.cell(design, code, seed);
        rows.iter().map(|r| r.pct_permissible).sum::<f64>() / rows.len().max(1) as f64
    }

    /// Mean, min and max over seeds for each game index.
    pub fn aggregate(&self, design: DesignKind, code: SocialCodeKind) -> Vec<GameAggregate> {
        let mut by_game: BTreeMap<usize, Vec<&MetricsRow>> = BTreeMap::new();
        for r in self
            .rows
            .iter()
            .filter(|r| r.design == design && r.code == code)
        {
            by_game.entry(r.game).or_default().push(r);
        }
        by_game
            .into_iter()
            .map(|(game, rows)| GameAggregate {
                game,
                rows_cleared: Spread::of(rows.iter().map(|r| r.rows_cleared as f64))
                    .expect("non-empty"),
                pct_permissible: Spread::of(rows.iter().map(|r| r.pct_permissible))
                    .expect("non-empty"),
                upper_bound_rows: Spread::of(rows.iter().map(|r| r.upper_bound_rows as f64))
                    .expect("non-empty"),
            })
            .collect()
    }

    /// `seed,design,code,game,rowsCleared,actions,pctPermissible,upperBoundRows`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "seed",
            "design",
            "code",
            "game",
            "rowsCleared",
            "actions",
            "pctPermissible",
            "upperBoundRows",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.design.cli_name().to_string(),
                r.code.name().to_string(),
                r.game.to_string(),
                r.rows_cleared.to_string(),
                r.actions.to_string(),
                format!("{:.4}", r.pct_permissible),
                r.upper_bound_rows.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Suite summary CSV: `game,design,code,rowsCleared,pctPermissible`.
pub fn write_suite_csv<W: Write>(records: &[GameRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["game", "design", "code", "rowsCleared", "pctPermissible"])?;
    for r in records {
        w.write_record([
            r.header.game.to_string(),
            r.header.design.cli_name().to_string(),
            r.header.social_code.kind.name().to_string(),
            r.summary.rows_cleared.to_string(),
            format!("{:.4}", r.pct_permissible()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CellRun {
    pub key: CellKey,
    pub sequence_hash: String,
    pub records: std::result::Result<Vec<GameRecord>, String>,
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub table: MetricsTable,
    pub cells: Vec<CellRun>,
}

/// Runs every cell of the grid in a worker pool. A failing cell is recorded
/// in `table.failed`; the other cells still complete.
pub fn run_grid(grid: &ExperimentGrid) -> Result<GridRun> {
    grid.validate()?;
    let bound_keys: Vec<(SocialCodeKind, u64)> = grid
        .seeds
        .iter()
        .flat_map(|&s| grid.codes.iter().map(move |&c| (c, s)))
        .collect();
    let bounds: BTreeMap<(SocialCodeKind, u64), Vec<usize>> = bound_keys
        .par_iter()
        .map(|&(code, seed)| {
            let config = MatchConfig {
                social_code: code,
                seed,
                ..grid.base.clone()
            };
            compute_upper_bound(&config, &grid.proxy).map(|b| ((code, seed), b))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<CellRun> = grid
        .cells()
        .into_par_iter()
        .map(|key| {
            let config = grid.cell_config(key);
            let records = run_proxy_suite(&config, &grid.agent, grid.proxy)
                .map(|(records, _)| records)
                .map_err(|e| e.to_string());
            if let Err(e) = &records {
                log::warn!("cell {key:?} failed: {e}");
            }
            CellRun {
                key,
                sequence_hash: config.sequence_hash(),
                records,
            }
        })
        .collect();

    let mut table = MetricsTable::default();
    for cell in &cells {
        let hash = table
            .sequence_hashes
            .entry(cell.key.seed)
            .or_insert_with(|| cell.sequence_hash.clone());
        if *hash != cell.sequence_hash {
            return Err(Error::config(format!(
                "cell {:?} consumed a different piece sequence",
                cell.key
            )));
        }
        match &cell.records {
            Ok(records) => {
                let bound = &bounds[&(cell.key.code, cell.key.seed)];
                for r in records {
                    table.rows.push(MetricsRow {
                        seed: cell.key.seed,
                        design: cell.key.design,
                        code: cell.key.code,
                        game: r.header.game,
                        rows_cleared: r.summary.rows_cleared,
                        actions: r.summary.actions_total,
                        pct_permissible: r.pct_permissible(),
                        upper_bound_rows: bound[r.header.game],
                    });
                }
            }
            Err(e) => table.failed.push(FailedCell {
                key: cell.key,
                error: e.clone(),
            }),
        }
    }
    Ok(GridRun { table, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::PreferenceMatrix;
    use crate::social::{AgentId, TeamMember, TeamProfile};

    fn short(code: SocialCodeKind) -> MatchConfig {
        MatchConfig {
            social_code: code,
            games: 3,
            max_blocks_per_game: 80,
            ..MatchConfig::default()
        }
    }

    #[test]
    fn indifferent_team_bound_equals_greedy() {
        let team = TeamProfile::new(
            [1, 2]
                .map(|i| TeamMember {
                    id: AgentId(i),
                    prefs: PreferenceMatrix::default(),
                })
                .to_vec(),
        )
        .unwrap();
        for code in SocialCodeKind::ALL {
            let config = MatchConfig {
                team: team.clone(),
                ..short(code)
            };
            let policy = ProxyPolicy::default();
            assert_eq!(
                compute_upper_bound(&config, &policy).unwrap(),
                greedy_rows(&config, &policy).unwrap()
            );
        }
    }

    #[test]
    fn constrained_oracle_is_always_permissible_when_it_can_be() {
        let config = short(SocialCodeKind::Simple);
        let o = oracle_game(&config, &ProxyPolicy::default(), true, 0).unwrap();
        assert!(o.permissible_actions * 10 >= o.actions * 9, "{o:?}");
    }

    #[test]
    fn empty_sequence_bound_is_zero() {
        let config = MatchConfig {
            block_sequence: crate::runner::BlockSequence::ExplicitList { pieces: vec![] },
            ..short(SocialCodeKind::Global)
        };
        assert_eq!(
            compute_upper_bound(&config, &ProxyPolicy::default()).unwrap(),
            vec![0, 0, 0]
        );
    }

    #[test]
    fn single_cell_grid_has_one_row_per_game() {
        let grid = ExperimentGrid::single(
            DesignKind::Parallel,
            SocialCodeKind::Global,
            short(SocialCodeKind::Global),
        );
        let run = run_grid(&grid).unwrap();
        assert_eq!(run.table.rows.len(), 3);
        assert!(run.table.failed.is_empty());
        for r in &run.table.rows {
            assert!((0.0..=100.0).contains(&r.pct_permissible));
        }
    }

    #[test]
    fn aggregates_recomputed_from_raw_rows() {
        let grid = ExperimentGrid {
            designs: vec![DesignKind::SocialAlone],
            codes: vec![SocialCodeKind::Global],
            seeds: vec![3, 4],
            base: MatchConfig {
                games: 2,
                max_blocks_per_game: 40,
                ..MatchConfig::default()
            },
            ..ExperimentGrid::default()
        };
        let run = run_grid(&grid).unwrap();
        let agg = run
            .table
            .aggregate(DesignKind::SocialAlone, SocialCodeKind::Global);
        assert_eq!(agg.len(), 2);
        for a in &agg {
            let rows: Vec<f64> = run
                .table
                .rows
                .iter()
                .filter(|r| r.game == a.game)
                .map(|r| r.rows_cleared as f64)
                .collect();
            assert_eq!(rows.len(), 2);
            assert_eq!(a.rows_cleared.mean, (rows[0] + rows[1]) / 2.0);
            assert_eq!(a.rows_cleared.min, rows[0].min(rows[1]));
            assert_eq!(a.rows_cleared.max, rows[0].max(rows[1]));
        }
        assert_eq!(run.table.sequence_hashes.len(), 2);
    }

    #[test]
    fn grid_file_round_trip() {
        let grid = ExperimentGrid::default();
        let back: ExperimentGrid = toml::from_str(&grid.to_toml()).unwrap();
        assert_eq!(back, grid);
        let partial: ExperimentGrid =
            toml::from_str("designs = [\"social\"]\n[match]\ngames = 3\n").unwrap();
        assert_eq!(partial.designs, vec![DesignKind::SocialAlone]);
        assert_eq!(partial.base.games, 3);
        let empty = ExperimentGrid {
            seeds: vec![],
            ..ExperimentGrid::default()
        };
        assert!(empty.validate().is_err());
    }
}
