//! CSV and report writers. Numbers carry 17 significant digits so a reread
//! recovers the exact doubles; rows end in LF per RFC 4180.

use std::fmt::Write as _;

/// Exact-round-trip float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter { buf }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match f {
                CsvField::Int(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvField::Float(v) => self.buf.push_str(&fmt_f64(*v)),
            }
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub enum CsvField {
    Int(i64),
    Float(f64),
}

/// A gnuplot script plotting per-time excess from the regret CSVs.
pub fn plot_script(csvs: &[String]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script: per-time excess error\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set xlabel 't'\n");
    s.push_str("set ylabel 'excess error'\n");
    s.push_str("set key outside\n");
    s.push_str("plot \\\n");
    for (i, csv) in csvs.iter().enumerate() {
        let sep = if i + 1 == csvs.len() { "\n" } else { ", \\\n" };
        let _ = write!(
            s,
            "  '{csv}' using 1:4 with lines title '{csv}' skip 1{sep}"
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.02e23,
            -1.2345678901234567e-200,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut w = CsvWriter::new(&["t", "value"]);
        w.row(&[CsvField::Int(3), CsvField::Float(0.5)]);
        let text = w.finish();
        assert_eq!(text, "t,value\n3,5.0000000000000000e-1\n");
        assert!(!text.contains('\r'));
    }
}
