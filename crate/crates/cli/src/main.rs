//! Command-line surface for the digit-restricted harmonic sum library.
//!
//! Subcommands expose the high-precision sums, the exact moment tables,
//! the deviation power-series coefficients, the large-base asymptotic
//! expansions with a per-term breakdown, the scaled-deviation tables, and
//! a self-verification suite.  Output is a markdown table by default, or
//! JSON / CSV for piping; all numeric fields are rendered as strings so
//! no precision is lost in transport.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use ellipsephic::asymptotics::Expansion;
use ellipsephic::fixed::Fixed;
use ellipsephic::irwin::irwin_sum;
use ellipsephic::moments::MomentTable;
use ellipsephic::series::{deviation_series, DeviationKind};
use ellipsephic::verify::{run_criterion, CRITERION_COUNT};
use ellipsephic::{DigitSpec, Error};

#[derive(Parser)]
#[command(
    name = "ellipsephic",
    version,
    about = "High-precision sums of 1/n over integers with digit-count restrictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MomentFamily {
    /// Plain moments u_{k;m}.
    U,
    /// Complementary moments v_{k;m}.
    V,
    /// Plain deviations w_{k;m} = b/(m+1) - u_{k;m}.
    W,
    /// Complementary deviations z_{k;m} = v_{k;m} - b/(m+1).
    Z,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesFamily {
    /// Plain deviation series w_{k;m}(c).
    W,
    /// Complementary deviation series z_{k;m}(c).
    Z,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyLevel {
    /// The fast subset of the verification suite (sub-second checks).
    Quick,
    /// Every check, including the slower table reproductions.
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sum of 1/n over integers with exactly `count` occurrences
    /// of `digit` in base `base`, to a requested number of decimal digits.
    Sum {
        #[arg(long)]
        base: u64,
        #[arg(long)]
        digit: u64,
        #[arg(long)]
        count: u32,
        /// Guaranteed correct decimal digits of the result.
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Write output to this file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the exact rational moments (or deviations) of the digit
    /// measure, for orders m = 0..=max_order at the given occurrence count.
    Moments {
        #[arg(long)]
        base: u64,
        #[arg(long)]
        digit: u64,
        #[arg(long)]
        count: u32,
        #[arg(long)]
        max_order: usize,
        #[arg(long, value_enum, default_value_t = MomentFamily::U)]
        kind: MomentFamily,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the exact coefficients of a deviation series in c = 1/b,
    /// truncated to `trunc` powers of c.
    SeriesCoeffs {
        #[arg(long)]
        digit: u64,
        #[arg(long)]
        count: u32,
        /// Moment order m of the series w_{k;m} or z_{k;m}.
        #[arg(long)]
        order: usize,
        /// Number of powers of c to keep.
        #[arg(long)]
        trunc: usize,
        #[arg(long, value_enum, default_value_t = SeriesFamily::W)]
        family: SeriesFamily,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
    /// Evaluate the large-base expansion of the sum at a concrete base,
    /// with one row per expansion term and a total.
    Asymptotic {
        #[arg(long)]
        base: u64,
        #[arg(long)]
        digit: u64,
        #[arg(long)]
        count: u32,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        /// Keep only the first T inverse-power terms of the ladder.
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tabulate the scaled deviation (sum minus expansion) * b^p over a
    /// grid of bases and digits, where p is the family's reference power.
    DeltaTable {
        /// Comma-separated list of bases.
        #[arg(long, value_delimiter = ',', required = true)]
        bases: Vec<u64>,
        /// Comma-separated list of digits.
        #[arg(long, value_delimiter = ',', required = true)]
        digits_list: Vec<u64>,
        #[arg(long)]
        count: u32,
        /// Decimal digits of each tabulated deviation.
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the built-in verification suite and report pass/fail per check.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Full)]
        level: VerifyLevel,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<String>,
    },
}

/// A rectangular result set: fixed column names, rows of string cells.
/// Every output format renders from this one shape, so the JSON schema is
/// identical across runs of the same subcommand.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_markdown(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_markdown(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut s = String::new();
        let line = |s: &mut String, cells: Vec<String>| {
            s.push('|');
            for (i, c) in cells.iter().enumerate() {
                let _ = write!(s, " {:<w$} |", c, w = widths[i]);
            }
            s.push('\n');
        };
        line(&mut s, self.columns.iter().map(|c| c.to_string()).collect());
        line(&mut s, widths.iter().map(|w| "-".repeat(*w)).collect());
        for row in &self.rows {
            line(&mut s, row.clone());
        }
        s
    }

    fn render_csv(&self) -> String {
        fn field(v: &str) -> String {
            if v.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", v.replace('"', "\"\""))
            } else {
                v.to_string()
            }
        }
        let mut s = String::new();
        let mut emit = |cells: Vec<String>| {
            let _ = writeln!(
                s,
                "{}",
                cells.iter().map(|c| field(c)).collect::<Vec<_>>().join(",")
            );
        };
        emit(self.columns.iter().map(|c| c.to_string()).collect());
        for row in &self.rows {
            emit(row.clone());
        }
        s
    }

    fn render_json(&self) -> String {
        // Hand-assembled so that key order matches the column order; each
        // string is escaped through the JSON serializer.
        let mut s = String::from("[\n");
        for (ri, row) in self.rows.iter().enumerate() {
            s.push_str("  {");
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(
                    s,
                    "{}: {}",
                    serde_json::to_string(self.columns[i]).unwrap(),
                    serde_json::to_string(cell).unwrap()
                );
            }
            s.push('}');
            if ri + 1 < self.rows.len() {
                s.push(',');
            }
            s.push('\n');
        }
        s.push_str("]\n");
        s
    }
}

fn emit(table: &Table, format: Format, out: Option<&str>) -> Result<(), String> {
    let rendered = table.render(format);
    match out {
        None => {
            let mut stdout = std::io::stdout();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| format!("writing stdout: {e}"))
        }
        Some(path) => std::fs::write(path, rendered).map_err(|e| format!("writing {path}: {e}")),
    }
}

fn fraction(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn cmd_sum(base: u64, digit: u64, count: u32, digits: u32) -> Result<Table, Error> {
    let spec = DigitSpec::new(base, digit, count)?;
    let start = Instant::now();
    let r = irwin_sum(&spec, digits)?;
    let elapsed = start.elapsed().as_millis();
    let mut t = Table::new(vec![
        "command",
        "base",
        "digit",
        "count",
        "value",
        "errorBound",
        "termsUsed",
        "method",
        "elapsedMillis",
    ]);
    t.push(vec![
        "sum".into(),
        base.to_string(),
        digit.to_string(),
        count.to_string(),
        r.value.to_decimal_string(digits),
        r.error_bound.to_decimal_string(digits),
        r.terms_used.to_string(),
        r.method.to_string(),
        elapsed.to_string(),
    ]);
    Ok(t)
}

fn cmd_moments(
    base: u64,
    digit: u64,
    count: u32,
    max_order: usize,
    kind: MomentFamily,
) -> Result<Table, Error> {
    let spec = DigitSpec::new(base, digit, count)?;
    let table = match kind {
        MomentFamily::U | MomentFamily::W => MomentTable::plain(&spec, count, max_order)?,
        MomentFamily::V | MomentFamily::Z => MomentTable::complementary(&spec, count, max_order)?,
    };
    let kind_name = match kind {
        MomentFamily::U => "u",
        MomentFamily::V => "v",
        MomentFamily::W => "w",
        MomentFamily::Z => "z",
    };
    let mut t = Table::new(vec!["command", "base", "digit", "count", "kind", "order", "value"]);
    for m in 0..=max_order {
        let v = match kind {
            MomentFamily::U | MomentFamily::V => table.value(count, m).clone(),
            MomentFamily::W | MomentFamily::Z => table.deviation(count, m),
        };
        t.push(vec![
            "moments".into(),
            base.to_string(),
            digit.to_string(),
            count.to_string(),
            kind_name.into(),
            m.to_string(),
            fraction(&v),
        ]);
    }
    Ok(t)
}

fn cmd_series_coeffs(
    digit: u64,
    count: u32,
    order: usize,
    trunc: usize,
    family: SeriesFamily,
) -> Result<Table, Error> {
    let (kind, family_name) = match family {
        SeriesFamily::W => (DeviationKind::Plain, "w"),
        SeriesFamily::Z => (DeviationKind::Complementary, "z"),
    };
    let s = deviation_series(kind, digit, count, order, trunc)?;
    let mut t = Table::new(vec![
        "command",
        "digit",
        "count",
        "order",
        "family",
        "power",
        "coefficient",
    ]);
    for i in 0..trunc {
        t.push(vec![
            "series-coeffs".into(),
            digit.to_string(),
            count.to_string(),
            order.to_string(),
            family_name.into(),
            i.to_string(),
            fraction(s.coeff(i)),
        ]);
    }
    Ok(t)
}

fn cmd_asymptotic(
    base: u64,
    digit: u64,
    count: u32,
    digits: u32,
    terms: Option<usize>,
) -> Result<Table, Error> {
    DigitSpec::new(base, digit, count)?;
    let mut exp = Expansion::for_spec(digit, count)?;
    if let Some(n) = terms {
        exp = exp.truncated(n);
    }
    let ws = digits + 8;
    let bb = BigInt::from(base);
    let mut t = Table::new(vec![
        "command",
        "base",
        "digit",
        "count",
        "term",
        "coefficient",
        "value",
    ]);
    let mut row = |term: String, coef: String, value: &Fixed| {
        t.push(vec![
            "asymptotic".into(),
            base.to_string(),
            digit.to_string(),
            count.to_string(),
            term,
            coef,
            value.to_decimal_string(digits),
        ]);
    };
    let lead = Fixed::from_integer(base as i64, ws).ln().mul_int(&bb);
    row("b*ln(b)".into(), "1".into(), &lead);
    if let Some(arg) = exp.linear_log_arg() {
        let v = Fixed::from_ratio(arg, ws).ln().mul_int(&bb);
        row(format!("b*ln({})", fraction(arg)), "1".into(), &v);
    }
    for (p, coef) in exp.terms() {
        let inv = BigRational::new(BigInt::one(), bb.pow(*p));
        let v = coef.eval(ws)?.mul_ratio(&inv);
        row(format!("b^-{p}"), coef.to_string(), &v);
    }
    let total = exp.eval(base, digits)?;
    row("total".into(), "".into(), &total);
    Ok(t)
}

fn cmd_delta_table(
    bases: &[u64],
    digits_list: &[u64],
    count: u32,
    digits: u32,
) -> Result<Table, Error> {
    let mut t = Table::new(vec![
        "command",
        "base",
        "digit",
        "count",
        "scalePower",
        "delta",
    ]);
    for &d in digits_list {
        let exp = Expansion::for_spec(d, count)?;
        for &b in bases {
            let spec = DigitSpec::new(b, d, count)?;
            if spec.is_empty_sum() {
                continue;
            }
            let delta = exp.delta(b, digits)?;
            t.push(vec![
                "delta-table".into(),
                b.to_string(),
                d.to_string(),
                count.to_string(),
                exp.delta_power().to_string(),
                delta.to_decimal_string(digits),
            ]);
        }
    }
    Ok(t)
}

/// The sub-second subset of the verification suite.
const QUICK_CRITERIA: [u32; 8] = [1, 2, 4, 5, 9, 10, 12, 13];

fn cmd_verify(level: VerifyLevel) -> (Table, bool) {
    let ids: Vec<u32> = match level {
        VerifyLevel::Quick => QUICK_CRITERIA.to_vec(),
        VerifyLevel::Full => (1..=CRITERION_COUNT).collect(),
    };
    let mut t = Table::new(vec!["command", "criterion", "name", "status", "detail"]);
    let mut all_passed = true;
    for id in ids {
        let r = run_criterion(id);
        all_passed &= r.passed;
        t.push(vec![
            "verify".into(),
            r.id.to_string(),
            r.name.to_string(),
            if r.passed { "pass".into() } else { "FAIL".into() },
            r.detail,
        ]);
    }
    (t, all_passed)
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    let (table, format, out, exit) = match &cli.command {
        Command::Sum { base, digit, count, digits, format, out } => {
            (cmd_sum(*base, *digit, *count, *digits)?, *format, out.clone(), ExitCode::SUCCESS)
        }
        Command::Moments { base, digit, count, max_order, kind, format, out } => (
            cmd_moments(*base, *digit, *count, *max_order, *kind)?,
            *format,
            out.clone(),
            ExitCode::SUCCESS,
        ),
        Command::SeriesCoeffs { digit, count, order, trunc, family, format, out } => (
            cmd_series_coeffs(*digit, *count, *order, *trunc, *family)?,
            *format,
            out.clone(),
            ExitCode::SUCCESS,
        ),
        Command::Asymptotic { base, digit, count, digits, terms, format, out } => (
            cmd_asymptotic(*base, *digit, *count, *digits, *terms)?,
            *format,
            out.clone(),
            ExitCode::SUCCESS,
        ),
        Command::DeltaTable { bases, digits_list, count, digits, format, out } => (
            cmd_delta_table(bases, digits_list, *count, *digits)?,
            *format,
            out.clone(),
            ExitCode::SUCCESS,
        ),
        Command::Verify { level, format, out } => {
            let (t, ok) = cmd_verify(*level);
            let code = if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
            (t, *format, out.clone(), code)
        }
    };
    if let Err(msg) = emit(&table, format, out.as_deref()) {
        eprintln!("error: {msg}");
        return Ok(ExitCode::from(1));
    }
    Ok(exit)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidSpec(_) | Error::Domain(_) => ExitCode::from(2),
                Error::Capacity(_) | Error::Budget(_) => ExitCode::from(3),
            }
        }
    }
}
