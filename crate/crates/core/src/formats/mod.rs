//! On-disk formats: M² annotations, line-per-sentence text, human rankings
//! and JSON score reports.

mod m2;
mod ranking;
mod report;
mod text;

pub use m2::{parse_m2, parse_m2_str, serialize_m2, M2Document};
pub use ranking::{read_human_ranking, HumanRanking};
pub use report::{
    read_report, write_report, RankingEntry, Report, SystemEntry, DEFAULT_REPORT_PRECISION, REPORT_FORMAT_VERSION,
};
pub use text::{read_parallel_file, read_parallel_text, read_word_lines};
