//! CSV and manifest writing. All numeric CSV fields use `%.12g` formatting
//! with a fixed column order, so equal runs produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{CliError, RunManifest};
use crate::hjb::HjbSolution;
use crate::simulate::IterStats;

/// Formats like C's `%.12g`: 12 significant digits, fixed or scientific
/// notation depending on the exponent, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // exponent after rounding to SIG significant digits
    let e_str = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mant, exp) = e_str.split_once('e').expect("e-format has an exponent");
    let exp: i32 = exp.parse().expect("exponent parses");
    if (-4..SIG).contains(&exp) {
        let prec = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.prec$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant.to_string()), if exp < 0 { "-" } else { "+" }, exp.abs())
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn writer(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// One row per iteration: `k,mean_f,std_err,min_f,max_f`.
pub fn write_run_csv(path: &Path, stats: &[IterStats]) -> io::Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "k,mean_f,std_err,min_f,max_f")?;
    for s in stats {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.k,
            fmt_g(s.mean_f),
            fmt_g(s.std_err),
            fmt_g(s.min_f),
            fmt_g(s.max_f)
        )?;
    }
    w.flush()
}

/// Wide comparison table: `k,<name>_mean_f,<name>_std_err,...` with one
/// column pair per algorithm, rows aligned on the iteration index.
pub fn write_compare_csv(path: &Path, runs: &[(String, Vec<IterStats>)]) -> io::Result<()> {
    let mut w = writer(path)?;
    write!(w, "k")?;
    for (name, _) in runs {
        write!(w, ",{name}_mean_f,{name}_std_err")?;
    }
    writeln!(w)?;
    let n_rows = runs.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    for j in 0..n_rows {
        write!(w, "{}", j + 1)?;
        for (_, stats) in runs {
            match stats.get(j) {
                Some(s) => write!(w, ",{},{}", fmt_g(s.mean_f), fmt_g(s.std_err))?,
                None => write!(w, ",,")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Full solution grid: `x,v,vx,vxx,h,temperature`.
pub fn write_solution_csv(path: &Path, sol: &HjbSolution) -> io::Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "x,v,vx,vxx,h,temperature")?;
    for i in 0..sol.nodes.len() {
        let h = sol.eval_h(sol.nodes[i]);
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_g(sol.nodes[i]),
            fmt_g(sol.v[i]),
            fmt_g(sol.vx[i]),
            fmt_g(sol.vxx[i]),
            fmt_g(h),
            fmt_g(0.5 * h * h)
        )?;
    }
    w.flush()
}

/// Interpolated profile on a caller-supplied grid: `x,v,vxx,h,temperature`.
pub fn write_profile_csv(path: &Path, sol: &HjbSolution, grid: &[f64]) -> io::Result<()> {
    let mut w = writer(path)?;
    writeln!(w, "x,v,vxx,h,temperature")?;
    for &x in grid {
        let h = sol.eval_h(x);
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_g(x),
            fmt_g(sol.eval_v(x)),
            fmt_g(sol.eval_vxx(x)),
            fmt_g(h),
            fmt_g(0.5 * h * h)
        )?;
    }
    w.flush()
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Config(format!("cannot serialize manifest: {e}")))?;
    let mut w = writer(path)?;
    w.write_all(json.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
