//! Multi-model comparison: hypervolume consolidation, block ranking,
//! Friedman omnibus test, Nemenyi post-hoc test and CD diagrams.
//!
//! Nemenyi constants are studentized-range quantiles for infinite degrees
//! of freedom divided by √2 (as tabulated by Demšar, 2006).

mod blocks;
mod diagram;
mod hypervolume;
mod ranking;

pub use blocks::{build_blocks, compare, write_rank_heatmap_csv, write_ranks_csv, BlockMode, Blocks, Comparison, StatsReport};
pub use diagram::{cd_diagram, CdDiagram, DiagramBar, DiagramModel};
pub use hypervolume::{hypervolume, INCLUSION_EXCLUSION_MAX};
pub use ranking::{
    chi_square_sf, friedman, global_average_rank, nemenyi, nemenyi_q, rank_block, FriedmanResult, GlobalRank,
    NemenyiResult, PairComparison, RankTable,
};
