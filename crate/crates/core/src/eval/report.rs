use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::client::EvalRecord;
use super::score::Status;
use crate::haystack::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub mode: Mode,
    pub n: usize,
    /// Number of premise evidences (the hypothesis line is not counted).
    pub k: usize,
    /// Records that were scored.
    pub count: usize,
    pub mean_jaccard: f64,
    /// Scored records whose answer yielded no line id at all.
    pub parse_failures: usize,
    pub parse_failure_rate: f64,
    pub transport_failures: usize,
}

/// Mean Jaccard per (model, mode, n, k). Cells without any record are absent.
pub fn aggregate(records: &[EvalRecord]) -> Vec<ReportRow> {
    #[derive(Default)]
    struct Cell {
        sum: f64,
        count: usize,
        parse_failures: usize,
        transport: usize,
    }
    let mut cells: BTreeMap<(String, Mode, usize, usize), Cell> = BTreeMap::new();
    for r in records {
        let cell = cells
            .entry((r.model.clone(), r.mode, r.n, r.evidence_count))
            .or_default();
        match r.score {
            Some(s) if r.status != Status::TransportError => {
                cell.sum += s;
                cell.count += 1;
                if r.prediction.is_empty() {
                    cell.parse_failures += 1;
                }
            }
            _ => cell.transport += 1,
        }
    }
    cells
        .into_iter()
        .map(|((model, mode, n, k), c)| ReportRow {
            model,
            mode,
            n,
            k,
            count: c.count,
            mean_jaccard: if c.count == 0 { 0.0 } else { c.sum / c.count as f64 },
            parse_failures: c.parse_failures,
            parse_failure_rate: if c.count == 0 { 0.0 } else { c.parse_failures as f64 / c.count as f64 },
            transport_failures: c.transport,
        })
        .collect()
}

pub fn to_tsv(rows: &[ReportRow]) -> String {
    let mut out = String::from("model\tmode\tn\tk\tcount\tmean_jaccard\tparse_failure_rate\ttransport_failures\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{}",
            r.model,
            r.mode.as_str(),
            r.n,
            r.k,
            r.count,
            r.mean_jaccard,
            r.parse_failure_rate,
            r.transport_failures
        );
    }
    out
}
