//! Degeneracy statistics over random sequences.
//!
//! Sequences are drawn from PCG64 (XSL-RR 128/64): the generator is
//! `Pcg64::new(seed, 0xa02bdbf7bb3c0a7ac28fa16a64abf96)` and each monomer is
//! H when the top bit of the next 64-bit output is set. Any PCG64
//! implementation with the same state and increment reproduces the draw.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand_core::Rng;
use rand_pcg::Pcg64;
use serde::Serialize;

use crate::cores::CoreDatabase;
use crate::lattice::LatticeKind;
use crate::model::{HpSequence, ModelKind, Monomer};
use crate::predict::{predict, PredictError, PredictMode, PredictOptions, Status};
use crate::solver::Count;

const STREAM: u128 = 0xa02bdbf7bb3c0a7ac28fa16a64abf96;

/// `count` sequences of `length` monomers drawn uniformly from {H, P}^length.
pub fn random_sequences(seed: u64, count: usize, length: usize) -> Vec<HpSequence> {
    let mut rng = Pcg64::new(seed as u128, STREAM);
    (0..count)
        .map(|_| {
            let m = (0..length)
                .map(|_| if rng.next_u64() >> 63 == 1 { Monomer::H } else { Monomer::P })
                .collect();
            HpSequence::from_monomers(m)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct StatsConfig {
    pub count: usize,
    pub length: usize,
    pub lattice: LatticeKind,
    pub model: ModelKind,
    pub seed: u64,
    pub options: PredictOptions,
    /// Worker threads; rows are always reported in draw order.
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    Optimal,
    LowerBoundOnly,
    CutoffHit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatsRow {
    pub index: usize,
    pub sequence: String,
    pub n_h: usize,
    pub status: RowStatus,
    pub energy: Option<i32>,
    pub degeneracy: Option<u64>,
    pub degeneracy_exact: bool,
    pub core_degeneracy: Option<u64>,
    pub core_degeneracy_exact: bool,
    pub certified: bool,
    pub layer: Option<usize>,
    pub note: String,
}

/// Counts in the decade `[lo, 10 * lo)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HistogramBin {
    pub lo: u64,
    pub degeneracy: usize,
    pub core_degeneracy: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub requested: usize,
    pub optimal: usize,
    pub cutoff_hit: usize,
    pub lower_bound_only: usize,
    pub uncertified: usize,
    /// Means over rows whose degeneracy and core-degeneracy are exact.
    pub exact_rows: usize,
    pub mean_degeneracy: Option<f64>,
    pub mean_core_degeneracy: Option<f64>,
    pub reduction_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub histogram: Vec<HistogramBin>,
    pub summary: Summary,
}

fn row_for(index: usize, seq: &HpSequence, result: Result<crate::predict::PredictionResult, PredictError>) -> StatsRow {
    let mut row = StatsRow {
        index,
        sequence: seq.to_string(),
        n_h: seq.n_h(),
        status: RowStatus::LowerBoundOnly,
        energy: None,
        degeneracy: None,
        degeneracy_exact: false,
        core_degeneracy: None,
        core_degeneracy_exact: false,
        certified: false,
        layer: None,
        note: String::new(),
    };
    let r = match result {
        Ok(r) => r,
        Err(e) => {
            row.note = e.to_string();
            return row;
        }
    };
    row.energy = Some(r.energy.value());
    row.certified = r.certified;
    row.layer = Some(r.layers_descended);
    if r.status == Status::LowerBoundOnly {
        row.note = "core layers exhausted".into();
        return row;
    }
    let split = |c: Option<Count>| (c.map(Count::value), c.is_some_and(Count::is_exact));
    (row.degeneracy, row.degeneracy_exact) = split(r.degeneracy);
    (row.core_degeneracy, row.core_degeneracy_exact) = split(r.core_degeneracy);
    row.status = if row.degeneracy.is_some() && row.degeneracy_exact && row.core_degeneracy_exact {
        RowStatus::Optimal
    } else if row.degeneracy.is_none() {
        row.note = "degeneracy not computed".into();
        RowStatus::Optimal
    } else {
        RowStatus::CutoffHit
    };
    row
}

fn decade(v: u64) -> u64 {
    let mut lo = 1;
    while v / lo >= 10 {
        lo *= 10;
    }
    lo
}

/// Builds the histogram and summary from finished rows.
pub fn summarize(rows: Vec<StatsRow>) -> StatsReport {
    let mut bins: std::collections::BTreeMap<u64, HistogramBin> = Default::default();
    for row in rows.iter().filter(|r| r.status != RowStatus::LowerBoundOnly) {
        if let Some(d) = row.degeneracy.filter(|&d| d > 0) {
            bins.entry(decade(d)).or_insert(HistogramBin { lo: decade(d), degeneracy: 0, core_degeneracy: 0 }).degeneracy += 1;
        }
        if let Some(c) = row.core_degeneracy.filter(|&c| c > 0) {
            bins.entry(decade(c))
                .or_insert(HistogramBin { lo: decade(c), degeneracy: 0, core_degeneracy: 0 })
                .core_degeneracy += 1;
        }
    }
    let exact: Vec<&StatsRow> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Optimal && r.degeneracy_exact && r.core_degeneracy_exact)
        .collect();
    let mean = |f: fn(&StatsRow) -> Option<u64>| {
        (!exact.is_empty())
            .then(|| exact.iter().map(|r| f(r).unwrap_or(0) as f64).sum::<f64>() / exact.len() as f64)
    };
    let mean_degeneracy = mean(|r| r.degeneracy);
    let mean_core_degeneracy = mean(|r| r.core_degeneracy);
    let summary = Summary {
        requested: rows.len(),
        optimal: rows.iter().filter(|r| r.status == RowStatus::Optimal).count(),
        cutoff_hit: rows.iter().filter(|r| r.status == RowStatus::CutoffHit).count(),
        lower_bound_only: rows.iter().filter(|r| r.status == RowStatus::LowerBoundOnly).count(),
        uncertified: rows.iter().filter(|r| r.status != RowStatus::LowerBoundOnly && !r.certified).count(),
        exact_rows: exact.len(),
        mean_degeneracy,
        mean_core_degeneracy,
        reduction_ratio: match (mean_degeneracy, mean_core_degeneracy) {
            (Some(d), Some(c)) if c > 0.0 => Some(d / c),
            _ => None,
        },
    };
    StatsReport { rows, histogram: bins.into_values().collect(), summary }
}

/// Draws the sequences and predicts each one. Per-sequence failures are
/// recorded in the row and never abort the run.
pub fn run_stats(config: &StatsConfig, db: &CoreDatabase) -> StatsReport {
    let seqs = random_sequences(config.seed, config.count, config.length);
    let options = PredictOptions { mode: PredictMode::Count, ..config.options };
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<StatsRow>>> = Mutex::new(vec![None; seqs.len()]);
    let workers = config.threads.clamp(1, seqs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(seq) = seqs.get(i) else { break };
                let row = row_for(i, seq, predict(seq, config.lattice, config.model, db, options));
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    let rows = slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every row filled")).collect();
    summarize(rows)
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

impl StatsReport {
    /// Rows as CSV, followed by the histogram and summary as `#` lines.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "index",
            "sequence",
            "n_h",
            "status",
            "energy",
            "degeneracy",
            "degeneracy_exact",
            "core_degeneracy",
            "core_degeneracy_exact",
            "certified",
            "layer",
            "note",
        ])?;
        let opt = |v: Option<u64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.sequence.clone(),
                r.n_h.to_string(),
                format!("{:?}", r.status),
                r.energy.map_or_else(String::new, |e| e.to_string()),
                opt(r.degeneracy),
                r.degeneracy_exact.to_string(),
                opt(r.core_degeneracy),
                r.core_degeneracy_exact.to_string(),
                r.certified.to_string(),
                r.layer.map_or_else(String::new, |l| l.to_string()),
                r.note.clone(),
            ])?;
        }
        let mut out = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("CSV is UTF-8");
        out.push_str(&self.summary_block());
        Ok(out)
    }

    fn summary_block(&self) -> String {
        let s = &self.summary;
        let mut out = String::from("# histogram: bin_lo,bin_hi,degeneracy,core_degeneracy\n");
        for b in &self.histogram {
            out.push_str(&format!("# {},{},{},{}\n", b.lo, b.lo * 10, b.degeneracy, b.core_degeneracy));
        }
        out.push_str(&format!(
            "# requested {} optimal {} cutoff_hit {} lower_bound_only {} uncertified {}\n",
            s.requested, s.optimal, s.cutoff_hit, s.lower_bound_only, s.uncertified
        ));
        out.push_str(&format!(
            "# exact_rows {} mean_degeneracy {} mean_core_degeneracy {} reduction_ratio {}\n",
            s.exact_rows,
            opt_f64(s.mean_degeneracy),
            opt_f64(s.mean_core_degeneracy),
            opt_f64(s.reduction_ratio)
        ));
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let count = |v: Option<u64>, exact: bool| match v {
                None => "-".to_string(),
                Some(x) if exact => x.to_string(),
                Some(x) => format!(">={x}"),
            };
            out.push_str(&format!(
                "{:>5} {} {:?} E={} deg={} core={}{}\n",
                r.index,
                r.sequence,
                r.status,
                r.energy.map_or_else(|| "?".into(), |e| e.to_string()),
                count(r.degeneracy, r.degeneracy_exact),
                count(r.core_degeneracy, r.core_degeneracy_exact),
                if r.note.is_empty() { String::new() } else { format!(" ({})", r.note) }
            ));
        }
        out.push_str(&self.summary_block());
        out
    }
}
