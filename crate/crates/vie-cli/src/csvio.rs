//! CSV emission and parsing for experiment records.
//!
//! The schema is fixed: UTF-8, LF line endings, `.` decimal separator, and
//! floats printed with 17 significant digits so a parse of the emitted file
//! reproduces every record bit-for-bit.

/// One CSV row of an experiment or solve run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub experiment: String,
    pub problem: String,
    pub horizon: f64,
    pub subintervals: usize,
    pub fine_degree: usize,
    pub coarse_degree: usize,
    pub iteration: usize,
    pub linf_error: f64,
    pub increment: f64,
    pub wall_ms: f64,
    pub fine_sweeps: u64,
    pub coarse_sweeps: u64,
}

pub const CSV_HEADER: &str =
    "experiment,problem,T,N,M,Mc,k,linf_error,increment,wall_ms,fine_sweeps,coarse_sweeps";

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders records under the fixed header.
pub fn write_csv(records: &[ErrorRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.problem,
            format_float(r.horizon),
            r.subintervals,
            r.fine_degree,
            r.coarse_degree,
            r.iteration,
            format_float(r.linf_error),
            format_float(r.increment),
            format_float(r.wall_ms),
            r.fine_sweeps,
            r.coarse_sweeps,
        ));
    }
    out
}

/// Parses text produced by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ErrorRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        Some(other) => return Err(format!("unexpected header `{other}`")),
        None => return Err("empty CSV".into()),
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(format!("row {}: expected 12 fields, got {}", idx + 2, fields.len()));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .map_err(|_| format!("row {}: bad {what} `{s}`", idx + 2))
        };
        let parse_u = |s: &str, what: &str| -> Result<u64, String> {
            s.parse::<u64>()
                .map_err(|_| format!("row {}: bad {what} `{s}`", idx + 2))
        };
        records.push(ErrorRecord {
            experiment: fields[0].to_string(),
            problem: fields[1].to_string(),
            horizon: parse_f(fields[2], "T")?,
            subintervals: parse_u(fields[3], "N")? as usize,
            fine_degree: parse_u(fields[4], "M")? as usize,
            coarse_degree: parse_u(fields[5], "Mc")? as usize,
            iteration: parse_u(fields[6], "k")? as usize,
            linf_error: parse_f(fields[7], "linf_error")?,
            increment: parse_f(fields[8], "increment")?,
            wall_ms: parse_f(fields[9], "wall_ms")?,
            fine_sweeps: parse_u(fields[10], "fine_sweeps")?,
            coarse_sweeps: parse_u(fields[11], "coarse_sweeps")?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(seed: f64) -> ErrorRecord {
        ErrorRecord {
            experiment: "error-vs-k".into(),
            problem: "sin-kernel".into(),
            horizon: 100.0,
            subintervals: 20,
            fine_degree: 25,
            coarse_degree: 13,
            iteration: 3,
            linf_error: 3.5e-9 * seed,
            increment: 1.7e-8 / (1.0 + seed),
            wall_ms: 12.25 * seed,
            fine_sweeps: 420,
            coarse_sweeps: 77,
        }
    }

    #[test]
    fn header_is_exact() {
        let text = write_csv(&[]);
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn lf_line_endings_only() {
        let text = write_csv(&[record(1.0), record(2.0)]);
        assert!(!text.contains('\r'));
        assert_eq!(text.matches('\n').count(), 3);
    }

    #[test]
    fn round_trip_is_exact() {
        let records = vec![record(1.0), record(0.3), record(7.7)];
        let parsed = parse_csv(&write_csv(&records)).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(parse_csv("a,b,c\n1,2,3\n").is_err());
    }

    proptest! {
        #[test]
        fn floats_survive_the_round_trip(
            error in 1e-15f64..1e3,
            increment in 0.0f64..10.0,
            wall in 0.0f64..1e5,
        ) {
            let mut r = record(1.0);
            r.linf_error = error;
            r.increment = increment;
            r.wall_ms = wall;
            let parsed = parse_csv(&write_csv(std::slice::from_ref(&r))).unwrap();
            prop_assert_eq!(parsed[0].linf_error.to_bits(), error.to_bits());
            prop_assert_eq!(parsed[0].increment.to_bits(), increment.to_bits());
            prop_assert_eq!(parsed[0].wall_ms.to_bits(), wall.to_bits());
        }
    }
}
