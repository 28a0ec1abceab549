//! Comparison measures across methods and datasets: accuracy, average rank,
//! Win/Loss/Tie counts, the Friedman statistic and the Nemenyi critical
//! difference.
//!
//! Missing accuracies count as 0 everywhere. Ranks are 1 for the best
//! accuracy and tied accuracies share the mean of their ranks.

use std::io::{Read, Write};
use std::str::FromStr;

use indexmap::IndexSet;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::features::stats;
use crate::tabular::format_float;

pub fn accuracy(predicted: &[String], truth: &[String]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Evaluation(format!(
            "length mismatch: {} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Evaluation("accuracy of an empty label sequence".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Accuracies indexed as `cells[dataset][method]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

#[derive(Deserialize)]
struct ResultRow {
    dataset: String,
    method: String,
    accuracy: String,
}

impl ResultsTable {
    pub fn new(methods: Vec<String>, datasets: Vec<String>, cells: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if cells.len() != datasets.len() || cells.iter().any(|r| r.len() != methods.len()) {
            return Err(Error::Evaluation(format!(
                "results table must have {} x {} cells",
                datasets.len(),
                methods.len()
            )));
        }
        if let Some(v) = cells.iter().flatten().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Evaluation(format!("accuracy {v} outside [0, 1]")));
        }
        Ok(ResultsTable {
            methods,
            datasets,
            cells,
        })
    }

    /// Reads long-form `dataset,method,accuracy`. Methods and datasets keep
    /// their first-appearance order; absent combinations and `NA` are missing.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<ResultRow>().enumerate() {
            let rec = rec?;
            let acc = match rec.accuracy.as_str() {
                "" | "NA" | "NaN" | "nan" => None,
                s => Some(
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(i + 2, format!("bad accuracy {s:?}")))?,
                ),
            };
            rows.push((rec.dataset, rec.method, acc, i + 2));
        }
        let datasets: IndexSet<String> = rows.iter().map(|r| r.0.clone()).collect();
        let methods: IndexSet<String> = rows.iter().map(|r| r.1.clone()).collect();
        let mut cells = vec![vec![None; methods.len()]; datasets.len()];
        let mut seen = vec![vec![false; methods.len()]; datasets.len()];
        for (d, m, acc, line) in rows {
            let (di, mi) = (datasets.get_index_of(&d).unwrap(), methods.get_index_of(&m).unwrap());
            if std::mem::replace(&mut seen[di][mi], true) {
                return Err(Error::parse(line, format!("duplicate result for {d} / {m}")));
            }
            if let Some(v) = acc.filter(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::parse(line, format!("accuracy {v} outside [0, 1]")));
            }
            cells[di][mi] = acc;
        }
        ResultsTable::new(methods.into_iter().collect(), datasets.into_iter().collect(), cells)
    }

    pub fn k(&self) -> usize {
        self.methods.len()
    }

    pub fn n(&self) -> usize {
        self.datasets.len()
    }

    fn row_values(&self, d: usize) -> Vec<f64> {
        self.cells[d].iter().map(|c| c.unwrap_or(0.0)).collect()
    }

    /// Mean accuracy per method, missing as 0.
    pub fn mean_accuracy(&self) -> Vec<f64> {
        (0..self.k())
            .map(|m| stats::mean(&self.cells.iter().map(|r| r[m].unwrap_or(0.0)).collect::<Vec<_>>()))
            .collect()
    }

    /// Median accuracy per method, missing as 0.
    pub fn median_accuracy(&self) -> Vec<f64> {
        (0..self.k())
            .map(|m| stats::median(&self.cells.iter().map(|r| r[m].unwrap_or(0.0)).collect::<Vec<_>>()))
            .collect()
    }
}

/// Ranks with 1 for the largest value; ties share their mean rank.
pub fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = shared;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(table: &ResultsTable) -> Result<Vec<f64>> {
    if table.k() < 2 {
        return Err(Error::Evaluation("ranking needs at least 2 methods".into()));
    }
    if table.n() == 0 {
        return Err(Error::Evaluation("ranking needs at least 1 dataset".into()));
    }
    let mut total = vec![0.0; table.k()];
    for d in 0..table.n() {
        for (t, r) in total.iter_mut().zip(rank_descending(&table.row_values(d))) {
            *t += r;
        }
    }
    Ok(total.into_iter().map(|t| t / table.n() as f64).collect())
}

/// How a shared best accuracy is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieConvention {
    /// A shared best is a tie and not a win; wins + losses + ties = N.
    #[default]
    Exclusive,
    /// A shared best counts as a win and also as a tie; wins + losses = N.
    Inclusive,
}

impl FromStr for TieConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exclusive" => Ok(TieConvention::Exclusive),
            "inclusive" => Ok(TieConvention::Inclusive),
            other => Err(Error::Config(format!("unknown tie convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinLossTie {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

/// Where a method stands on one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    UniqueBest,
    SharedBest,
    NotBest,
}

pub fn outcomes(table: &ResultsTable, dataset: usize) -> Vec<Outcome> {
    let v = table.row_values(dataset);
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sharers = v.iter().filter(|&&x| x == best).count();
    v.iter()
        .map(|&x| match (x == best, sharers) {
            (false, _) => Outcome::NotBest,
            (true, 1) => Outcome::UniqueBest,
            (true, _) => Outcome::SharedBest,
        })
        .collect()
}

pub fn win_loss_tie(table: &ResultsTable, convention: TieConvention) -> Vec<WinLossTie> {
    let mut out = vec![WinLossTie::default(); table.k()];
    for d in 0..table.n() {
        for (w, o) in out.iter_mut().zip(outcomes(table, d)) {
            match (o, convention) {
                (Outcome::UniqueBest, _) => w.wins += 1,
                (Outcome::NotBest, _) => w.losses += 1,
                (Outcome::SharedBest, TieConvention::Exclusive) => w.ties += 1,
                (Outcome::SharedBest, TieConvention::Inclusive) => {
                    w.wins += 1;
                    w.ties += 1;
                }
            }
        }
    }
    out
}

/// Upper α quantiles of the studentized range with infinite degrees of
/// freedom divided by sqrt(2), for k = 2..=20 (index k - 2). Generated with
/// `scipy.stats.studentized_range.ppf(1 - alpha, k, np.inf) / np.sqrt(2)`.
const Q_005: [f64; 19] = [
    1.96, 2.3437, 2.569, 2.7278, 2.8497, 2.9483, 3.0309, 3.1017, 3.1637, 3.2187, 3.268, 3.3127, 3.3536, 3.3912, 3.426,
    3.4584, 3.4887, 3.5171, 3.5438,
];
const Q_010: [f64; 19] = [
    1.6449, 2.0523, 2.2913, 2.4595, 2.5885, 2.6927, 2.7799, 2.8546, 2.9199, 2.9778, 3.0297, 3.0767, 3.1197, 3.1592,
    3.1957, 3.2297, 3.2615, 3.2912, 3.3192,
];

pub fn q_alpha(alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_010
    } else {
        return Err(Error::Config(format!(
            "no q_alpha constants for alpha {alpha}; use 0.05 or 0.1"
        )));
    };
    if k < 2 {
        return Err(Error::Evaluation("critical difference needs at least 2 methods".into()));
    }
    table
        .get(k - 2)
        .copied()
        .ok_or_else(|| Error::Evaluation("q_alpha table exhausted".into()))
}

pub fn friedman_statistic(avg_ranks: &[f64], n: usize) -> f64 {
    let k = avg_ranks.len() as f64;
    let sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * n as f64 / (k * (k + 1.0)) * (sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    chi2.max(0.0)
}

pub fn critical_difference(alpha: f64, k: usize, n: usize) -> Result<f64> {
    let q = q_alpha(alpha, k)?;
    let (k, n) = (k as f64, n as f64);
    Ok(q * (k * (k + 1.0) / (6.0 * n)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub methods: Vec<String>,
    pub average_rank: Vec<f64>,
    pub win_loss_tie: Vec<WinLossTie>,
    pub friedman_statistic: f64,
    pub alpha: f64,
    pub cd: f64,
    /// Maximal groups of methods (indices, best rank first) whose rank
    /// spread is below `cd`.
    pub cliques: Vec<Vec<usize>>,
}

/// Sorts by average rank and, from each method, extends a group while
/// max - min < cd; only groups not contained in an earlier one are kept.
pub fn cliques(avg_ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
    order.sort_by(|&a, &b| avg_ranks[a].total_cmp(&avg_ranks[b]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last_end = 0;
    for i in 0..order.len() {
        let mut j = i;
        while j + 1 < order.len() && avg_ranks[order[j + 1]] - avg_ranks[order[i]] < cd {
            j += 1;
        }
        if j > i && j + 1 > last_end {
            out.push(order[i..=j].to_vec());
            last_end = j + 1;
        }
    }
    out
}

pub fn summarize(table: &ResultsTable, alpha: f64, convention: TieConvention) -> Result<RankSummary> {
    let average_rank = average_ranks(table)?;
    let cd = critical_difference(alpha, table.k(), table.n())?;
    Ok(RankSummary {
        methods: table.methods.clone(),
        win_loss_tie: win_loss_tie(table, convention),
        friedman_statistic: friedman_statistic(&average_rank, table.n()),
        cliques: cliques(&average_rank, cd),
        average_rank,
        alpha,
        cd,
    })
}

impl RankSummary {
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "avg_rank", "wins", "losses", "ties"])?;
        for (i, m) in self.methods.iter().enumerate() {
            let s = self.win_loss_tie[i];
            w.write_record([
                m.clone(),
                format_float(self.average_rank[i]),
                s.wins.to_string(),
                s.losses.to_string(),
                s.ties.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<summary csv>", e))?;
        Ok(())
    }

    /// Connected method pairs: both members of some clique.
    pub fn connected_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for c in &self.cliques {
            for (i, &a) in c.iter().enumerate() {
                for &b in &c[i + 1..] {
                    let p = (a.min(b), a.max(b));
                    if !pairs.contains(&p) {
                        pairs.push(p);
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    pub fn same_clique(&self, a: &str, b: &str) -> bool {
        let idx = |m: &str| self.methods.iter().position(|x| x == m);
        match (idx(a), idx(b)) {
            (Some(a), Some(b)) => self.cliques.iter().any(|c| c.contains(&a) && c.contains(&b)),
            _ => false,
        }
    }

    /// Long CSV `kind,method,other,value`: one `cd` line, one `rank` line
    /// per method, one `clique` line per member (value = clique number)
    /// and one `pair` line per connected pair (value = rank gap).
    pub fn write_cd_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "method", "other", "value"])?;
        w.write_record(["cd", "", "", &format_float(self.cd)])?;
        w.write_record(["alpha", "", "", &format_float(self.alpha)])?;
        w.write_record(["friedman", "", "", &format_float(self.friedman_statistic)])?;
        for (m, r) in self.methods.iter().zip(&self.average_rank) {
            w.write_record(["rank", m, "", &format_float(*r)])?;
        }
        for (ci, c) in self.cliques.iter().enumerate() {
            for &m in c {
                w.write_record(["clique", &self.methods[m], "", &(ci + 1).to_string()])?;
            }
        }
        for (a, b) in self.connected_pairs() {
            let gap = (self.average_rank[a] - self.average_rank[b]).abs();
            w.write_record(["pair", &self.methods[a], &self.methods[b], &format_float(gap)])?;
        }
        w.flush().map_err(|e| Error::io("<cd csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cells: Vec<Vec<Option<f64>>>) -> ResultsTable {
        let k = cells[0].len();
        let n = cells.len();
        ResultsTable::new(
            (0..k).map(|i| format!("m{i}")).collect(),
            (0..n).map(|i| format!("d{i}")).collect(),
            cells,
        )
        .unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!((accuracy(&s(&["a", "b", "a"]), &s(&["a", "a", "a"])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy(&s(&["x"]), &s(&["y"])).unwrap(), 0.0);
        assert!(accuracy(&s(&["x"]), &s(&[])).is_err());
    }

    #[test]
    fn hand_ranked_example() {
        // d0: 0.9 > 0.8 > 0.7 -> 1, 2, 3; d1: 0.8 = 0.8 > 0.6 -> 1.5, 1.5, 3
        let t = table(vec![
            vec![Some(0.9), Some(0.8), Some(0.7)],
            vec![Some(0.8), Some(0.8), Some(0.6)],
        ]);
        assert_eq!(average_ranks(&t).unwrap(), vec![1.25, 1.75, 3.0]);
    }

    #[test]
    fn missing_counts_as_zero() {
        let t = table(vec![vec![None, Some(0.0), Some(0.1)]]);
        assert_eq!(average_ranks(&t).unwrap(), vec![2.5, 2.5, 1.0]);
    }

    #[test]
    fn single_method_and_equal_pairs() {
        let t = table(vec![vec![Some(0.5)], vec![Some(0.7)]]);
        assert_eq!(
            win_loss_tie(&t, TieConvention::Exclusive)[0],
            WinLossTie {
                wins: 2,
                losses: 0,
                ties: 0
            }
        );
        let t = table(vec![vec![Some(0.5), Some(0.5)], vec![Some(0.7), Some(0.7)]]);
        for w in win_loss_tie(&t, TieConvention::Exclusive) {
            assert_eq!(
                w,
                WinLossTie {
                    wins: 0,
                    losses: 0,
                    ties: 2
                }
            );
        }
        for w in win_loss_tie(&t, TieConvention::Inclusive) {
            assert_eq!(
                w,
                WinLossTie {
                    wins: 2,
                    losses: 0,
                    ties: 2
                }
            );
        }
    }

    #[test]
    fn friedman_zero_for_identical_columns() {
        let t = table(vec![vec![Some(0.5); 4], vec![Some(0.9); 4], vec![Some(0.1); 4]]);
        let r = average_ranks(&t).unwrap();
        assert_eq!(friedman_statistic(&r, 3), 0.0);
    }

    #[test]
    fn cd_for_two_methods() {
        for n in [1usize, 4, 30] {
            let cd = critical_difference(0.05, 2, n).unwrap();
            assert!((cd - 1.96 * (1.0 / n as f64).sqrt()).abs() < 1e-12);
        }
        assert!(critical_difference(0.05, 21, 5)
            .unwrap_err()
            .to_string()
            .contains("q_alpha table exhausted"));
        assert!(critical_difference(1.5, 3, 5).is_err());
        assert!(critical_difference(0.0, 3, 5).is_err());
    }

    #[test]
    fn clique_edge_cases() {
        assert!(cliques(&[1.0, 3.0], 1.0).is_empty());
        assert_eq!(cliques(&[1.0, 1.5, 1.2], 2.0), vec![vec![0, 2, 1]]);
        assert_eq!(
            cliques(&[1.0, 2.0, 3.0, 4.0], 1.5),
            vec![vec![0, 1], vec![1, 2], vec![2, 3]]
        );
    }

    #[test]
    fn reads_long_csv_with_na() {
        let text = "dataset,method,accuracy\nd1,a,0.5\nd1,b,NA\nd2,a,1\n";
        let t = ResultsTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(t.methods, vec!["a", "b"]);
        assert_eq!(t.cells, vec![vec![Some(0.5), None], vec![Some(1.0), None]]);
        assert!(ResultsTable::read_csv("dataset,method,accuracy\nd,a,1.5\n".as_bytes()).is_err());
        assert!(ResultsTable::read_csv("dataset,method,accuracy\nd,a,1\nd,a,1\n".as_bytes()).is_err());
    }
}
