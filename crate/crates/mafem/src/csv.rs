//! Convergence tables as CSV. Reals use `{:.16e}` (17 significant digits,
//! so values round-trip exactly); undefined entries are written as `NaN`.

use std::fmt::Write as _;

use mafem_core::adapt::ConvergenceRecord;

use crate::error::{parse_err, Result};

pub const HEADER: &str =
    "level,ndof,h_max,err_u_l2,err_u_h1,err_u_h2b,err_sigma_l2,err_sigma_h1,theta,zeta,effectivity,newton_iters";

/// Prefix of the comment line carrying the last observed `H¹` order of `u`.
pub const ORDER_COMMENT: &str = "# observed_order_u_h1=";

fn real(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        write!(out, "{v:.16e}").unwrap();
    }
}

pub fn format_record(r: &ConvergenceRecord) -> String {
    let mut s = format!("{},{}", r.level, r.ndof);
    for v in [
        r.h_max,
        r.err_u_l2,
        r.err_u_h1,
        r.err_u_h2b,
        r.err_sigma_l2,
        r.err_sigma_h1,
        r.theta,
        r.zeta,
        r.effectivity,
    ] {
        s.push(',');
        real(&mut s, v);
    }
    write!(s, ",{}", r.newton_iters).unwrap();
    s
}

/// Header, one row per record and, if given, the observed-order comment.
pub fn write_records(records: &[ConvergenceRecord], observed_order_u_h1: Option<f64>) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    if let Some(o) = observed_order_u_h1 {
        out.push_str(ORDER_COMMENT);
        real(&mut out, o);
        out.push('\n');
    }
    out
}

/// Parsed table: the records and the observed-order comment, if present.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub records: Vec<ConvergenceRecord>,
    pub observed_order_u_h1: Option<f64>,
}

pub fn read_records(text: &str) -> Result<Table> {
    let mut records = Vec::new();
    let mut order = None;
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix(ORDER_COMMENT) {
            order = Some(v.trim().parse().map_err(|_| parse_err(lineno, format!("invalid order '{v}'")))?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != HEADER {
                return Err(parse_err(lineno, "missing or unexpected CSV header"));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(parse_err(lineno, format!("expected 12 columns, found {}", f.len())));
        }
        let int = |j: usize| f[j].parse::<usize>().map_err(|_| parse_err(lineno, format!("invalid integer '{}'", f[j])));
        let re = |j: usize| f[j].parse::<f64>().map_err(|_| parse_err(lineno, format!("invalid number '{}'", f[j])));
        records.push(ConvergenceRecord {
            level: int(0)?,
            ndof: int(1)?,
            h_max: re(2)?,
            err_u_l2: re(3)?,
            err_u_h1: re(4)?,
            err_u_h2b: re(5)?,
            err_sigma_l2: re(6)?,
            err_sigma_h1: re(7)?,
            theta: re(8)?,
            zeta: re(9)?,
            effectivity: re(10)?,
            newton_iters: int(11)?,
        });
    }
    if !saw_header {
        return Err(parse_err(0, "missing CSV header"));
    }
    Ok(Table { records, observed_order_u_h1: order })
}
