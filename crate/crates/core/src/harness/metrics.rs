use std::fmt;
use std::fs;
use std::path::Path;

use super::config::Algorithm;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "round,algorithm,seed,test_accuracy,test_loss,global_train_loss,min_weight,max_weight,weight_entropy,mean_sq_distance";

/// Thresholds reported by [`summarize`].
pub const ACCURACY_THRESHOLDS: [f64; 2] = [0.5, 0.8];

/// One evaluated round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub global_train_loss: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub weight_entropy: f64,
    pub mean_sq_distance: f64,
}

/// `printf("%.9g")`: nine significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{x:.*}", (8 - exp) as usize))
    }
}

impl RoundRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.round,
            self.algorithm,
            self.seed,
            format_sig9(self.test_accuracy),
            format_sig9(self.test_loss),
            format_sig9(self.global_train_loss),
            format_sig9(self.min_weight),
            format_sig9(self.max_weight),
            format_sig9(self.weight_entropy),
            format_sig9(self.mean_sq_distance),
        )
    }
}

/// Full CSV text, header included.
pub fn metrics_csv(records: &[RoundRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_metrics(records: &[RoundRecord], out_path: impl AsRef<Path>) -> Result<()> {
    let path = out_path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, metrics_csv(records)).map_err(|e| Error::io(path, e))
}

/// Parses CSV text produced by [`metrics_csv`].
pub fn parse_metrics(text: &str) -> Result<Vec<RoundRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(0, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::format(0, format!("unexpected header `{header}`")));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let offset = e.position().map_or(0, |p| p.byte());
            Error::format(offset, e.to_string())
        })?;
        let offset = row.position().map_or(0, |p| p.byte());
        let field = |i: usize| -> Result<&str> {
            row.get(i)
                .ok_or_else(|| Error::format(offset, format!("missing column {i}")))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?
                .parse()
                .map_err(|e| Error::format(offset, format!("column {i}: {e}")))
        };
        records.push(RoundRecord {
            round: field(0)?
                .parse()
                .map_err(|e| Error::format(offset, format!("round: {e}")))?,
            algorithm: field(1)?.parse().map_err(|e: String| Error::format(offset, e))?,
            seed: field(2)?
                .parse()
                .map_err(|e| Error::format(offset, format!("seed: {e}")))?,
            test_accuracy: num(3)?,
            test_loss: num(4)?,
            global_train_loss: num(5)?,
            min_weight: num(6)?,
            max_weight: num(7)?,
            weight_entropy: num(8)?,
            mean_sq_distance: num(9)?,
        });
    }
    Ok(records)
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<RoundRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text)
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub final_round: u64,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub best_round: u64,
    /// First round reaching each threshold, if any.
    pub rounds_to: Vec<(f64, Option<u64>)>,
}

pub fn summarize(records: &[RoundRecord]) -> Result<Summary> {
    let last = records
        .last()
        .ok_or_else(|| Error::validation("no records to summarize"))?;
    let best = records
        .iter()
        .fold(&records[0], |b, r| if r.test_accuracy > b.test_accuracy { r } else { b });
    let rounds_to = ACCURACY_THRESHOLDS
        .iter()
        .map(|&th| {
            (
                th,
                records.iter().find(|r| r.test_accuracy >= th).map(|r| r.round),
            )
        })
        .collect();
    Ok(Summary {
        algorithm: last.algorithm,
        seed: last.seed,
        final_round: last.round,
        final_accuracy: last.test_accuracy,
        best_accuracy: best.test_accuracy,
        best_round: best.round,
        rounds_to,
    })
}

/// Splits records by `(algorithm, seed)`, in order of first appearance.
pub fn group_runs(records: &[RoundRecord]) -> Vec<Vec<RoundRecord>> {
    let mut groups: Vec<Vec<RoundRecord>> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|g| g[0].algorithm == r.algorithm && g[0].seed == r.seed)
        {
            Some(g) => g.push(r.clone()),
            None => groups.push(vec![r.clone()]),
        }
    }
    groups
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algorithm: {}  seed: {}", self.algorithm, self.seed)?;
        writeln!(
            f,
            "final accuracy: {} (round {})",
            format_sig9(self.final_accuracy),
            self.final_round
        )?;
        writeln!(
            f,
            "best accuracy: {} (round {})",
            format_sig9(self.best_accuracy),
            self.best_round
        )?;
        for (th, round) in &self.rounds_to {
            match round {
                Some(r) => writeln!(f, "rounds to {}% accuracy: {r}", th * 100.0)?,
                None => writeln!(f, "rounds to {}% accuracy: not reached", th * 100.0)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(round: u64, acc: f64) -> RoundRecord {
        RoundRecord {
            round,
            algorithm: Algorithm::FedBa,
            seed: 7,
            test_accuracy: acc,
            test_loss: 1.0 / 3.0,
            global_train_loss: 2.5,
            min_weight: 1.25e-9,
            max_weight: 0.5,
            weight_entropy: 2.0f64.ln(),
            mean_sq_distance: 123_456_789_012.0,
        }
    }

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.8886, "0.8886"),
            (1.0 / 3.0, "0.333333333"),
            (2.0f64.ln(), "0.693147181"),
            (123_456_789.0, "123456789"),
            (1_234_567_890.0, "1.23456789e+09"),
            (1.25e-9, "1.25e-09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (9.9999999999, "10"),
            (99_999_999.95, "100000000"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    #[test]
    fn header_is_fixed() {
        assert_eq!(
            metrics_csv(&[]),
            "round,algorithm,seed,test_accuracy,test_loss,global_train_loss,min_weight,max_weight,weight_entropy,mean_sq_distance\n"
        );
    }

    #[test]
    fn one_record_two_lines() {
        let text = metrics_csv(&[rec(1, 0.5)]);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "1,fedba,7,0.5,0.333333333,2.5,1.25e-09,0.5,0.693147181,1.23456789e+11"
        );
    }

    #[test]
    fn write_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/m.csv");
        let records = [rec(1, 0.5), rec(2, 0.75)];
        write_metrics(&records, &path).unwrap();
        let first = fs::read(&path).unwrap();
        write_metrics(&records, &path).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        let back = read_metrics(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].test_accuracy, 0.75);
        assert_eq!(back[0].test_loss, 0.333333333);
    }

    #[test]
    fn write_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_metrics(&[], dir.path()).unwrap_err();
        assert!(err.to_string().contains(&dir.path().display().to_string()));
    }

    #[test]
    fn parse_rejects_wrong_header() {
        assert!(parse_metrics("a,b\n1,2\n").is_err());
        assert!(parse_metrics(&format!("{CSV_HEADER}\n1,fedba,x,0,0,0,0,0,0,0\n")).is_err());
    }

    #[test]
    fn summary_values() {
        let s = summarize(&[rec(1, 0.3), rec(2, 0.6), rec(3, 0.8886)]).unwrap();
        assert_eq!(s.final_accuracy, 0.8886);
        assert_eq!(s.best_accuracy, 0.8886);
        assert_eq!(s.rounds_to, vec![(0.5, Some(2)), (0.8, Some(3))]);
        let text = s.to_string();
        assert!(text.contains("final accuracy: 0.8886"), "{text}");

        let zeros = summarize(&[rec(1, 0.0), rec(2, 0.0)]).unwrap();
        assert_eq!(zeros.rounds_to, vec![(0.5, None), (0.8, None)]);
        assert!(zeros.to_string().contains("not reached"));

        let one = summarize(&[rec(4, 0.42)]).unwrap();
        assert_eq!(one.final_accuracy, one.best_accuracy);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn grouping_by_run() {
        let mut other = rec(1, 0.1);
        other.seed = 8;
        let groups = group_runs(&[rec(1, 0.2), other, rec(2, 0.3)]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].len(), 2);
    }
}
