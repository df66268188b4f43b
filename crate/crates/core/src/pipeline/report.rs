//! Tab-separated result files. Everything here is a pure function of the
//! score rows, so rerunning `report` on stored rows reproduces the tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classify::{BaselineStrategy, ClassifierKind};
use crate::correlation::pearson;
use crate::error::{Error, Result};
use crate::eval::{aggregate_scores, AggregateResult, ConfusionMatrix, Sidedness, Stars};
use crate::features::Scenario;
use crate::model::{Dimension, ExclusionReport, SubjectId};
use crate::stats::mean;

use super::run::{Method, RunOutput, Score, ScoreRow};

pub const SUBJECT_RESULTS: &str = "subject_results.tsv";

/// Aggregate of one (dimension, method) group of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupSummary {
    pub dimension: Dimension,
    pub method: Method,
    /// `None` with fewer than two successful subjects.
    pub aggregate: Option<AggregateResult>,
    pub failed: usize,
    /// Best baseline mean F1 of the dimension; NaN when no baseline ran.
    pub reference: f64,
}

impl SetupSummary {
    pub fn stars(&self) -> Stars {
        self.aggregate.as_ref().map_or(Stars::None, |a| a.stars)
    }

    pub fn mean_f1(&self) -> Option<f64> {
        self.aggregate.as_ref().map(|a| a.mean_macro_f1)
    }
}

/// Groups rows by (dimension, method) in first-appearance order and tests each
/// classifier group against the dimension's best baseline.
pub fn summarize(rows: &[ScoreRow], side: Sidedness) -> Vec<SetupSummary> {
    let mut groups: Vec<(Dimension, Method, Vec<&ScoreRow>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(d, m, _)| *d == r.dimension && *m == r.method) {
            Some(g) => g.2.push(r),
            None => groups.push((r.dimension, r.method.clone(), vec![r])),
        }
    }
    let ok = |g: &[&ScoreRow]| -> (Vec<f64>, Vec<f64>) {
        g.iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .map(|s| (s.accuracy, s.macro_f1))
            .unzip()
    };
    let reference = |d: Dimension| {
        groups
            .iter()
            .filter(|(gd, m, _)| *gd == d && m.is_baseline())
            .map(|(_, _, g)| mean(&ok(g).1))
            .fold(f64::NAN, f64::max)
    };
    groups
        .iter()
        .map(|(d, m, g)| {
            let (acc, f1) = ok(g);
            let reference = reference(*d);
            let mut aggregate = aggregate_scores(&acc, &f1, reference, side).ok();
            if let (Some(a), true) = (aggregate.as_mut(), m.is_baseline() || reference.is_nan()) {
                a.stars = Stars::None;
            }
            SetupSummary {
                dimension: *d,
                method: m.clone(),
                aggregate,
                failed: g.len() - acc.len(),
                reference,
            }
        })
        .collect()
}

/// One entry per (dimension, classifier kind, scenario), keeping the C with the
/// best mean F1 (first on ties). Baselines pass through.
pub fn best_setups(summaries: &[SetupSummary]) -> Vec<&SetupSummary> {
    let mut out: Vec<&SetupSummary> = Vec::new();
    for s in summaries {
        let same = |o: &&SetupSummary| o.dimension == s.dimension && same_row(&o.method, &s.method);
        match out.iter().position(same) {
            None => out.push(s),
            Some(i) => {
                let better = s.mean_f1().unwrap_or(f64::NEG_INFINITY) > out[i].mean_f1().unwrap_or(f64::NEG_INFINITY);
                if better {
                    out[i] = s;
                }
            }
        }
    }
    out
}

fn same_row(a: &Method, b: &Method) -> bool {
    match (a, b) {
        (Method::Baseline(x), Method::Baseline(y)) => x == y,
        (
            Method::Classifier { kind: k1, scenario: s1, .. },
            Method::Classifier { kind: k2, scenario: s2, .. },
        ) => k1 == k2 && s1 == s2,
        _ => false,
    }
}

/// Matrix column id, e.g. `arousal_SCG_ADR_LR`.
pub fn setup_id(s: &SetupSummary) -> String {
    format!(
        "{}_{}_{}_{}",
        s.dimension.name(),
        s.method.cardiac(),
        s.method.peripherals(),
        s.method.name()
    )
}

fn f3(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.3}"))
}

fn stars_text(s: Stars) -> &'static str {
    s.symbol()
}

/// The per-setup table: baselines first, then classifier rows, with
/// accuracy, F1 and stars per dimension.
pub fn results_table(summaries: &[SetupSummary], dims: &[Dimension]) -> String {
    let mut s = String::from("classifier\tcardiac\tperipherals");
    for d in dims {
        let n = d.name();
        let _ = write!(s, "\t{n}_c\t{n}_accuracy\t{n}_f1\t{n}_stars");
    }
    s.push('\n');
    let best = best_setups(summaries);
    let mut keys: Vec<&Method> = Vec::new();
    for b in &best {
        if !keys.iter().any(|k| same_row(k, &b.method)) {
            keys.push(&b.method);
        }
    }
    for key in keys {
        let _ = write!(s, "{}\t{}\t{}", key.name(), key.cardiac(), key.peripherals());
        for &d in dims {
            match best.iter().find(|b| b.dimension == d && same_row(&b.method, key)) {
                Some(b) => {
                    let a = b.aggregate.as_ref();
                    let _ = write!(
                        s,
                        "\t{}\t{}\t{}\t{}",
                        b.method.c_text(),
                        f3(a.map(|a| a.mean_accuracy)),
                        f3(a.map(|a| a.mean_macro_f1)),
                        stars_text(b.stars())
                    );
                }
                None => s.push_str("\t-\tNA\tNA\t"),
            }
        }
        s.push('\n');
    }
    s
}

/// Every group including each C value, at full precision.
pub fn results_full(summaries: &[SetupSummary]) -> String {
    let mut s = String::from(
        "dimension\tclassifier\tc\tcardiac\tperipherals\tn_subjects\tn_failed\t\
         mean_accuracy\tmean_f1\tt\tp\tstars\treference_f1\n",
    );
    for x in summaries {
        let m = &x.method;
        let _ = write!(s, "{}\t{}\t{}\t{}\t{}\t", x.dimension, m.name(), m.c_text(), m.cardiac(), m.peripherals());
        match &x.aggregate {
            Some(a) => {
                let _ = write!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    a.n_subjects, x.failed, a.mean_accuracy, a.mean_macro_f1, a.t_statistic, a.p_value
                );
            }
            None => {
                let _ = write!(s, "0\t{}\tNA\tNA\tNA\tNA", x.failed);
            }
        }
        let _ = writeln!(s, "\t{}\t{}", stars_text(x.stars()), x.reference);
    }
    s
}

fn subject_order(rows: &[ScoreRow]) -> Vec<SubjectId> {
    let mut v: Vec<SubjectId> = rows.iter().map(|r| r.subject_id.clone()).collect();
    v.sort();
    v.dedup();
    v
}

fn f1_of(rows: &[ScoreRow], s: &SetupSummary, subject: &SubjectId) -> Option<f64> {
    rows.iter()
        .find(|r| r.dimension == s.dimension && r.method == s.method && &r.subject_id == subject)
        .and_then(|r| r.outcome.as_ref().ok())
        .map(|x| x.macro_f1)
}

fn classifier_columns<'a>(best: &[&'a SetupSummary], dim: Dimension, kinds: Option<&[ClassifierKind]>) -> Vec<&'a SetupSummary> {
    best.iter()
        .copied()
        .filter(|s| s.dimension == dim)
        .filter(|s| match &s.method {
            Method::Classifier { kind, .. } => kinds.map_or(true, |k| k.contains(kind)),
            Method::Baseline(_) => false,
        })
        .collect()
}

/// Subjects × setups F1 for one dimension, at the table's chosen C.
pub fn f1_matrix(rows: &[ScoreRow], summaries: &[SetupSummary], dim: Dimension) -> String {
    let best = best_setups(summaries);
    let cols = classifier_columns(&best, dim, None);
    let mut s = String::from("subject_id");
    for c in &cols {
        let _ = write!(s, "\t{}", setup_id(c));
    }
    s.push('\n');
    for subject in subject_order(rows) {
        s.push_str(subject.as_str());
        for c in &cols {
            let _ = write!(s, "\t{}", f3(f1_of(rows, c, &subject)));
        }
        s.push('\n');
    }
    s
}

/// Pearson r between setups over subjects scored by both, with stars.
pub fn correlation_table(
    rows: &[ScoreRow],
    summaries: &[SetupSummary],
    dim: Dimension,
    kinds: &[ClassifierKind],
) -> String {
    let best = best_setups(summaries);
    let cols = classifier_columns(&best, dim, Some(kinds));
    let subjects = subject_order(rows);
    let scores: Vec<Vec<Option<f64>>> = cols
        .iter()
        .map(|c| subjects.iter().map(|id| f1_of(rows, c, id)).collect())
        .collect();
    let mut s = String::from("setup");
    for c in &cols {
        let _ = write!(s, "\t{}", setup_id(c));
    }
    s.push('\n');
    for (i, ci) in cols.iter().enumerate() {
        s.push_str(&setup_id(ci));
        for j in 0..cols.len() {
            let (a, b): (Vec<f64>, Vec<f64>) = scores[i]
                .iter()
                .zip(&scores[j])
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            let cell = pearson(&a, &b).ok().and_then(|c| {
                let r = if i == j { c.r.map(|_| 1.0) } else { c.r }?;
                let stars = if i == j { Stars::Three } else { c.stars() };
                Some(format!("{r:.3}{}", stars.symbol()))
            });
            let _ = write!(s, "\t{}", cell.unwrap_or_else(|| "NA".into()));
        }
        s.push('\n');
    }
    s
}

pub fn selection_table(out: &RunOutput, dim: Dimension) -> String {
    let mut s = String::from("scenario\tfeature\tselected_folds\ttotal_folds\tfraction\n");
    for t in out.selection.iter().filter(|t| t.dimension == dim) {
        let mut order: Vec<usize> = (0..t.names.len()).collect();
        order.sort_by(|&a, &b| t.counts[b].cmp(&t.counts[a]).then(a.cmp(&b)));
        for j in order {
            let frac = if t.folds > 0 { t.counts[j] as f64 / t.folds as f64 } else { 0.0 };
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{frac:.3}", t.scenario, t.names[j], t.counts[j], t.folds);
        }
    }
    s
}

pub fn exclusions_table(report: &ExclusionReport) -> String {
    let mut s = String::from("subject_id\tvideo_id\treason\n");
    for e in &report.entries {
        let video = e.video_id.as_ref().map_or("*", |v| v.as_str());
        let _ = writeln!(s, "{}\t{video}\t{}", e.subject_id, clean(&e.reason.to_string()));
    }
    s
}

fn clean(msg: &str) -> String {
    msg.replace(['\t', '\n', '\r'], " ")
}

pub fn manifest_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
}

/// Full-precision rows, the input of `report`.
pub fn subject_results(rows: &[ScoreRow]) -> String {
    let mut s = String::from(
        "dimension\tclassifier\tc\tcardiac\tperipherals\tsubject_id\tstatus\taccuracy\tmacro_f1\t\
         tp\tfp\tfn\ttn\tfold_failures\tmessage\n",
    );
    for r in rows {
        let m = &r.method;
        let _ = write!(s, "{}\t{}\t{}\t{}\t{}\t{}\t", r.dimension, m.name(), m.c_text(), m.cardiac(), m.peripherals(), r.subject_id);
        match &r.outcome {
            Ok(x) => {
                let cm = match &x.confusion {
                    Some(c) => format!("{}\t{}\t{}\t{}", c.tp, c.fp, c.fn_, c.tn),
                    None => "-\t-\t-\t-".into(),
                };
                let _ = writeln!(s, "ok\t{}\t{}\t{cm}\t{}\t", x.accuracy, x.macro_f1, x.fold_failures);
            }
            Err(e) => {
                let _ = writeln!(s, "failed\tNA\tNA\t-\t-\t-\t-\t0\t{}", clean(e));
            }
        }
    }
    s
}

/// Parses what `subject_results` wrote.
pub fn parse_subject_results(text: &str, file: &Path) -> Result<Vec<ScoreRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.starts_with("dimension\tclassifier\t") => {}
        _ => return Err(Error::parse(file, 1, "missing subject_results header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let bad = |m: String| Error::parse(file, ln, m);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 15 {
            return Err(bad(format!("expected 15 columns, got {}", f.len())));
        }
        let dimension: Dimension = f[0].parse().map_err(bad)?;
        let method = if let Ok(strategy) = f[1].parse::<BaselineStrategy>() {
            Method::Baseline(strategy)
        } else {
            let kind: ClassifierKind = f[1].parse().map_err(|e: Error| bad(e.to_string()))?;
            let scenario: Scenario = format!("{}+{}", f[3], f[4]).parse().map_err(|e: Error| bad(e.to_string()))?;
            let c = match f[2] {
                "-" => None,
                v => Some(v.parse::<f64>().map_err(|e| bad(format!("c: {e}")))?),
            };
            Method::Classifier { kind, c, scenario }
        };
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", k + 1)));
        let count = |k: usize| f[k].parse::<usize>().map_err(|e| bad(format!("column {}: {e}", k + 1)));
        let outcome = match f[6] {
            "ok" => Ok(Score {
                accuracy: num(7)?,
                macro_f1: num(8)?,
                confusion: if f[9] == "-" {
                    None
                } else {
                    Some(ConfusionMatrix {
                        tp: count(9)?,
                        fp: count(10)?,
                        fn_: count(11)?,
                        tn: count(12)?,
                    })
                },
                fold_failures: count(13)?,
            }),
            "failed" => Err(f[14].to_string()),
            other => return Err(bad(format!("unknown status `{other}`"))),
        };
        rows.push(ScoreRow {
            dimension,
            method,
            subject_id: SubjectId::new(f[5]),
            outcome,
        });
    }
    Ok(rows)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    if let Some(parent) = p.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(&p, text).map_err(|e| Error::io(&p, e))
}

/// Writes the tables derived from score rows: results, full results, and the
/// per-dimension F1 and correlation matrices.
pub fn emit_tables(
    rows: &[ScoreRow],
    dims: &[Dimension],
    side: Sidedness,
    correlation_kinds: &[ClassifierKind],
    dir: &Path,
) -> Result<()> {
    let summaries = summarize(rows, side);
    write(dir, "results.tsv", &results_table(&summaries, dims))?;
    write(dir, "results_full.tsv", &results_full(&summaries))?;
    for &d in dims {
        write(dir, &format!("f1_matrix_{}.tsv", d.name()), &f1_matrix(rows, &summaries, d))?;
        write(
            dir,
            &format!("correlation_{}.tsv", d.name()),
            &correlation_table(rows, &summaries, d, correlation_kinds),
        )?;
    }
    Ok(())
}

/// Everything a run writes. `resolved` is the config text saved next to it.
pub fn write_run(out: &RunOutput, resolved: &str, dims: &[Dimension], side: Sidedness, kinds: &[ClassifierKind], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, "config.resolved", resolved)?;
    write(dir, "manifest.txt", &manifest_text(&out.manifest))?;
    write(dir, "exclusions.tsv", &exclusions_table(&out.exclusions))?;
    write(dir, SUBJECT_RESULTS, &subject_results(&out.rows))?;
    for &d in dims {
        write(dir, &format!("selection_{}.tsv", d.name()), &selection_table(out, d))?;
    }
    for (path, text) in &out.models {
        write(dir, &format!("models/{path}"), text)?;
    }
    emit_tables(&out.rows, dims, side, kinds, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dim: Dimension, method: Method, subject: &str, f1: Option<f64>) -> ScoreRow {
        ScoreRow {
            dimension: dim,
            method,
            subject_id: SubjectId::new(subject),
            outcome: f1.map_or(Err("boom\there".into()), |f| {
                Ok(Score {
                    accuracy: f,
                    macro_f1: f,
                    confusion: Some(ConfusionMatrix { tp: 1, fp: 2, fn_: 3, tn: 4 }),
                    fold_failures: 1,
                })
            }),
        }
    }

    fn sample() -> Vec<ScoreRow> {
        let v = Dimension::Valence;
        let scg: Scenario = "SCG+ADR".parse().unwrap();
        let lr = |c| Method::Classifier { kind: ClassifierKind::LogReg, c: Some(c), scenario: scg };
        let mut rows = Vec::new();
        for (i, s) in ["1", "2", "10"].iter().enumerate() {
            let mut b = row(v, Method::Baseline(BaselineStrategy::Ratio), s, Some(0.5));
            b.outcome.as_mut().unwrap().confusion = None;
            rows.push(b);
            rows.push(row(v, lr(0.1), s, Some(0.6 + 0.01 * i as f64)));
            rows.push(row(v, lr(1.0), s, if i == 2 { None } else { Some(0.9 + 0.05 * i as f64) }));
        }
        rows
    }

    #[test]
    fn subject_results_round_trip() {
        let rows = sample();
        let text = subject_results(&rows);
        let back = parse_subject_results(&text, Path::new("s.tsv")).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(subject_results(&back), text);
        assert_eq!(back[8].outcome, Err("boom here".into()));
    }

    #[test]
    fn best_c_and_table_shape() {
        let rows = sample();
        let sum = summarize(&rows, Sidedness::Greater);
        assert_eq!(sum.len(), 3);
        assert_eq!(sum[2].failed, 1);
        let table = results_table(&sum, &[Dimension::Valence, Dimension::Arousal]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("Ratio\t-\t-\t-\t0.500\t0.500\t\t"), "{}", lines[1]);
        assert!(lines[2].starts_with("LR\tSCG\tADR\t1\t0.925\t0.925\t"), "{}", lines[2]);
        assert!(lines[2].ends_with("\t-\tNA\tNA\t"));
        let m = f1_matrix(&rows, &sum, Dimension::Valence);
        assert_eq!(m, "subject_id\tvalence_SCG_ADR_LR\n1\t0.900\n2\t0.950\n10\tNA\n");
    }

    #[test]
    fn empty_results_are_header_only() {
        let sum = summarize(&[], Sidedness::Greater);
        assert_eq!(results_table(&sum, &[Dimension::Arousal]).lines().count(), 1);
        assert_eq!(f1_matrix(&[], &sum, Dimension::Arousal), "subject_id\n");
        assert_eq!(correlation_table(&[], &sum, Dimension::Arousal, &ClassifierKind::ALL), "setup\n");
    }

    #[test]
    fn star_column_vocabulary() {
        let sum = summarize(&sample(), Sidedness::Greater);
        for line in results_table(&sum, &[Dimension::Valence]).lines().skip(1) {
            let stars = line.split('\t').nth(6).unwrap();
            assert!(["", "*", "**", "***"].contains(&stars), "{stars}");
        }
    }
}
