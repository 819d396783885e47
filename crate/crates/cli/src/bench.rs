//! Benchmark harness: every (spec, impl) pair in a corpus directory is run
//! uncompressed and compressed, one row per pair.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use zkcec_core::circuit::{parse_netlist, Circuit};
use zkcec_core::error::Error;
use zkcec_core::protocol::{prepare, run_plan, Config, Instance, Report, TapeBudget, VerifyOptions};

/// CSV header, in order. The first twelve columns follow the usual
/// evaluation table; the rest are extra.
pub const COLUMNS: [&str; 15] = [
    "circuit", "lits", "cls", "R", "W", "t_P1+2", "t_P3", "t_P4", "t_total", "R'", "t'_total", "speedup", "t_commit",
    "tape", "status",
];

/// One corpus pair. Times are in seconds; `None` means the mode did not
/// run to acceptance.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchRow {
    pub circuit: String,
    /// Literal occurrences in the miter.
    pub lits: usize,
    pub cls: usize,
    #[serde(rename = "R")]
    pub r: Option<usize>,
    #[serde(rename = "W")]
    pub w: Option<usize>,
    /// Commitment, P1 and P2 together.
    #[serde(rename = "t_P1+2")]
    pub t_p12: Option<f64>,
    #[serde(rename = "t_P3")]
    pub t_p3: Option<f64>,
    #[serde(rename = "t_P4")]
    pub t_p4: Option<f64>,
    pub t_total: Option<f64>,
    #[serde(rename = "R'")]
    pub r_stored: Option<usize>,
    #[serde(rename = "t'_total")]
    pub t_total_compressed: Option<f64>,
    pub speedup: Option<f64>,
    pub t_commit: Option<f64>,
    /// Correlations of the uncompressed run.
    pub tape: Option<u64>,
    pub status: String,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub cfg: Config,
    /// Refuse pairs whose miter has more clauses than this, before solving.
    pub max_clauses: usize,
    /// Refuse a mode whose correlation budget exceeds this.
    pub max_tape: u64,
    /// Run pairs concurrently.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { cfg: Config::default(), max_clauses: 50_000, max_tape: 200_000_000, parallel: false }
    }
}

/// Directories under `root` holding a `spec.net` and an `impl.net`, named
/// by their path relative to `root`, sorted.
pub fn discover(root: &Path) -> io::Result<Vec<(String, PathBuf)>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> io::Result<()> {
        if dir.join("spec.net").is_file() && dir.join("impl.net").is_file() {
            let name = dir.strip_prefix(root).unwrap_or(dir).to_string_lossy().replace('\\', "/");
            out.push((if name.is_empty() { ".".into() } else { name }, dir.to_path_buf()));
            return Ok(());
        }
        for e in std::fs::read_dir(dir)? {
            let p = e?.path();
            if p.is_dir() {
                walk(root, &p, out)?;
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort();
    Ok(out)
}

pub fn load_pair(dir: &Path) -> Result<(Circuit, Circuit), Error> {
    let read = |f: &str| -> Result<Circuit, Error> {
        let p = dir.join(f);
        Ok(parse_netlist(&p.to_string_lossy(), &std::fs::read_to_string(&p)?)?)
    };
    Ok((read("spec.net")?, read("impl.net")?))
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn describe(e: &Error) -> String {
    match e {
        Error::NotEquivalent => "not-equivalent".into(),
        Error::Abort(a) => format!("abort in {} ({:?})", a.phase, a.kind),
        other => format!("error: {other}"),
    }
}

enum ModeResult {
    Ran { report: Box<Report>, steps: usize, stored: usize, w: usize, tape: u64 },
    Refused(String),
    Failed(String),
}

fn run_mode(inst: &Instance, cfg: &Config, max_tape: u64) -> ModeResult {
    let plan = match prepare(inst, cfg, None) {
        Ok(p) => p,
        Err(e) => return ModeResult::Failed(describe(&e)),
    };
    let st = &plan.statement;
    let public = &plan.instance.public;
    let tape = TapeBudget::new(st, public.phi_pub.len(), public.private_vars().len()).total();
    if tape > max_tape {
        return ModeResult::Refused(format!(
            "refused: R={} needs {tape} correlations, about {} MiB per party",
            st.num_steps(),
            tape.saturating_mul(32) >> 20
        ));
    }
    let run = run_plan(&plan, cfg, VerifyOptions::default());
    match run.verifier {
        Ok(report) => ModeResult::Ran { report: Box::new(report), steps: st.num_steps(), stored: st.num_stored(), w: st.w, tape },
        Err(e) => ModeResult::Failed(describe(&e)),
    }
}

/// Run one pair in both modes. Failures end up in `status`.
pub fn bench_pair(name: &str, dir: &Path, opts: &BenchOptions) -> BenchRow {
    let mut row = BenchRow { circuit: name.to_string(), ..BenchRow::default() };
    let inst = match load_pair(dir).and_then(|(s, i)| Instance::cec(&s, &i)) {
        Ok(i) => i,
        Err(e) => {
            row.status = describe(&e);
            return row;
        }
    };
    let f = inst.combined();
    row.cls = f.len();
    row.lits = f.clauses.iter().map(|c| c.len()).sum();
    if row.cls > opts.max_clauses {
        row.status = format!("refused: {} clauses over the limit of {}", row.cls, opts.max_clauses);
        return row;
    }

    let mut notes = Vec::new();
    let plain = Config { compress: false, ..opts.cfg.clone() };
    match run_mode(&inst, &plain, opts.max_tape) {
        ModeResult::Ran { report, steps, w, tape, .. } => {
            let t = report.times;
            row.r = Some(steps);
            row.w = Some(w);
            row.t_commit = Some(secs(t.commit));
            row.t_p12 = Some(secs(t.commit + t.p1 + t.p2));
            row.t_p3 = Some(secs(t.p3));
            row.t_p4 = Some(secs(t.p4));
            row.t_total = Some(secs(t.total));
            row.tape = Some(tape);
        }
        ModeResult::Refused(s) | ModeResult::Failed(s) => notes.push(s),
    }
    if notes.first().is_some_and(|s| s == "not-equivalent") {
        row.status = "not-equivalent".into();
        return row;
    }
    let packed = Config { compress: true, ..opts.cfg.clone() };
    match run_mode(&inst, &packed, opts.max_tape) {
        ModeResult::Ran { report, steps, stored, w, .. } => {
            row.r.get_or_insert(steps);
            row.w.get_or_insert(w);
            row.r_stored = Some(stored);
            row.t_total_compressed = Some(secs(report.times.total));
        }
        ModeResult::Refused(s) | ModeResult::Failed(s) => notes.push(format!("compressed {s}")),
    }
    if let (Some(a), Some(b)) = (row.t_total, row.t_total_compressed) {
        row.speedup = Some(a / b);
    }
    row.status = if notes.is_empty() { "accept".into() } else { notes.join("; ") };
    row
}

/// Bench every pair under `root`.
pub fn run(root: &Path, opts: &BenchOptions) -> io::Result<Vec<BenchRow>> {
    let pairs = discover(root)?;
    if !opts.parallel {
        return Ok(pairs.iter().map(|(n, d)| bench_pair(n, d, opts)).collect());
    }
    Ok(std::thread::scope(|s| {
        let hs: Vec<_> = pairs.iter().map(|(n, d)| s.spawn(move || bench_pair(n, d, opts))).collect();
        hs.into_iter().map(|h| h.join().expect("bench thread")).collect()
    }))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text table for the terminal.
pub fn render_table(rows: &[BenchRow]) -> String {
    let n = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    let t = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.circuit.clone(),
                r.lits.to_string(),
                r.cls.to_string(),
                n(r.r),
                n(r.w),
                t(r.t_p12),
                t(r.t_p3),
                t(r.t_p4),
                t(r.t_total),
                n(r.r_stored),
                t(r.t_total_compressed),
                r.speedup.map_or("-".to_string(), |v| format!("{v:.2}x")),
                r.status.clone(),
            ]
        })
        .collect();
    let head: Vec<&str> = COLUMNS[..12].iter().copied().chain(["status"]).collect();
    let mut width: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: Vec<&str>| {
        let parts: Vec<String> = row
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 || i == row.len() - 1 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(head.clone());
    for row in &cells {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_pair(dir: &Path, spec: &str, imp: &str) {
        std::fs::create_dir_all(dir).unwrap();
        std::fs::write(dir.join("spec.net"), spec).unwrap();
        std::fs::write(dir.join("impl.net"), imp).unwrap();
    }

    const AND: &str = "input a\ninput b\noutput c\ngate AND c a b\n";

    #[test]
    fn csv_header_matches_columns() {
        let mut buf = Vec::new();
        write_csv(&[BenchRow { circuit: "x".into(), ..BenchRow::default() }], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
    }

    #[test]
    fn rows_record_every_outcome() {
        let tmp = tempfile::tempdir().unwrap();
        write_pair(&tmp.path().join("a_ok"), AND, "input a\ninput b\noutput c\ngate NAND n a b\ngate NOT c n\n");
        write_pair(&tmp.path().join("b_diff"), AND, "input a\ninput b\noutput c\ngate OR c a b\n");
        write_pair(&tmp.path().join("c_bad"), AND, "input a\noutput c\ngate BUF c a\n");
        let rows = run(tmp.path(), &BenchOptions::default()).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.circuit.as_str()).collect();
        assert_eq!(names, ["a_ok", "b_diff", "c_bad"]);
        assert_eq!(rows[0].status, "accept");
        assert!(rows[0].r_stored.unwrap() <= rows[0].r.unwrap());
        let s = rows[0].speedup.unwrap();
        assert!((s - rows[0].t_total.unwrap() / rows[0].t_total_compressed.unwrap()).abs() < 1e-12);
        assert_eq!(rows[1].status, "not-equivalent");
        assert!(rows[2].status.starts_with("error"), "{}", rows[2].status);
        assert_eq!(render_table(&rows).lines().count(), 4);
    }

    #[test]
    fn oversized_rows_are_refused_with_estimate() {
        let tmp = tempfile::tempdir().unwrap();
        write_pair(&tmp.path().join("p"), AND, AND);
        let opts = BenchOptions { max_tape: 10, ..BenchOptions::default() };
        let row = &run(tmp.path(), &opts).unwrap()[0];
        assert!(row.status.starts_with("refused: R="), "{}", row.status);
        assert!(row.status.contains("correlations"));
        let opts = BenchOptions { max_clauses: 3, ..BenchOptions::default() };
        let row = &run(tmp.path(), &opts).unwrap()[0];
        assert!(row.status.contains("clauses over the limit"), "{}", row.status);
        assert!(row.r.is_none());
    }
}
