//! CSV reports.
//!
//! A report is a sequence of named tables in one flexible CSV stream:
//!
//! ```text
//! # ehcsim,report
//! # seed,42
//! # table,compare
//! label,hits,misses,mpki
//! lru,10,90,0.9
//! ```

use thiserror::Error;

const MAGIC_ROW: [&str; 2] = ["# ehcsim", "report"];
const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("not an ehcsim report")]
    NotAReport,
    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the header");
        self.rows.push((label.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        self.rows.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    pub fn value(&self, label: &str, column: &str) -> Option<f64> {
        Some(self.row(label)?[self.column(column)?])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            tables: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut write = |fields: &[&str]| w.write_record(fields).expect("in-memory CSV write");
        write(&MAGIC_ROW);
        write(&["# seed", &self.seed.to_string()]);
        for t in &self.tables {
            write(&["# table", &t.name]);
            let mut header = vec!["label"];
            header.extend(t.columns.iter().map(String::as_str));
            write(&header);
            for (label, values) in &t.rows {
                let nums: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
                let mut row = vec![label.as_str()];
                row.extend(nums.iter().map(String::as_str));
                write(&row);
            }
        }
        let bytes = w.into_inner().expect("in-memory CSV flush");
        String::from_utf8(bytes).expect("CSV output is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();

        let first = records.next().ok_or(ReportError::NotAReport)??;
        if first.iter().collect::<Vec<_>>() != MAGIC_ROW {
            return Err(ReportError::NotAReport);
        }

        let mut report = Report::new(0);
        let mut current: Option<Table> = None;
        let mut expect_header = false;
        for rec in records {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |msg: &str| ReportError::Malformed {
                line,
                msg: msg.to_string(),
            };
            match rec.get(0) {
                Some("# seed") => {
                    report.seed = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad seed"))?;
                }
                Some("# table") => {
                    report.tables.extend(current.take());
                    let name = rec.get(1).ok_or_else(|| bad("table without a name"))?;
                    current = Some(Table::new(name, &[]));
                    expect_header = true;
                }
                Some(_) => {
                    let table = current.as_mut().ok_or_else(|| bad("row outside a table"))?;
                    if expect_header {
                        if rec.get(0) != Some("label") {
                            return Err(bad("missing header row"));
                        }
                        table.columns = rec.iter().skip(1).map(str::to_string).collect();
                        expect_header = false;
                        continue;
                    }
                    if rec.len() != table.columns.len() + 1 {
                        return Err(bad("row width does not match header"));
                    }
                    let values = rec
                        .iter()
                        .skip(1)
                        .map(|f| f.parse::<f64>().map_err(|_| bad("non-numeric cell")))
                        .collect::<Result<Vec<_>, _>>()?;
                    table.rows.push((rec[0].to_string(), values));
                }
                None => {}
            }
        }
        report.tables.extend(current);
        Ok(report)
    }
}

/// Formats with six significant digits, `%g` style. Integral values below
/// 10^15 print exactly so counters survive a round trip.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }

    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
