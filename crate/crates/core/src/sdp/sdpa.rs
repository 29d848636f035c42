//! SDPA sparse (`.dat-s`) export.
//!
//! SDPA's dual form is `max <F0, Y>` s.t. `<F_i, Y> = c_i`, `Y PSD`, which is
//! our equality form after negating the objective. Free variables become a
//! pair of diagonal (LP) blocks holding `x+` and `x-`.

use std::fmt::Write as _;
use std::io;

use super::SdpProblem;

pub fn to_sdpa_string(p: &SdpProblem) -> String {
    let mut out = String::new();
    let has_free = p.n_free > 0;
    let n_blocks = p.blocks.len() + if has_free { 2 } else { 0 };
    let _ = writeln!(out, "\"occucert SOS program: {} equalities\"", p.rows.len());
    let _ = writeln!(out, "{}", p.rows.len());
    let _ = writeln!(out, "{}", n_blocks.max(1));
    let mut structure: Vec<String> = p.blocks.iter().map(|b| b.to_string()).collect();
    if has_free {
        structure.push(format!("-{}", p.n_free));
        structure.push(format!("-{}", p.n_free));
    }
    if structure.is_empty() {
        structure.push("1".into());
    }
    let _ = writeln!(out, "{}", structure.join(" "));
    let rhs: Vec<String> = p.rows.iter().map(|r| fmt_num(r.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let plus = p.blocks.len() + 1;
    let minus = p.blocks.len() + 2;
    // F0 = -C
    for e in &p.objective_blocks {
        line(&mut out, 0, e.block + 1, e.i + 1, e.j + 1, -e.value);
    }
    let mut obj_free = p.objective_free.clone();
    obj_free.sort_by_key(|&(k, _)| k);
    for &(k, v) in &obj_free {
        line(&mut out, 0, plus, k + 1, k + 1, -v);
        line(&mut out, 0, minus, k + 1, k + 1, v);
    }
    for (r, row) in p.rows.iter().enumerate() {
        for e in &row.entries {
            line(&mut out, r + 1, e.block + 1, e.i + 1, e.j + 1, e.value);
        }
        for &(k, v) in &row.free {
            line(&mut out, r + 1, plus, k + 1, k + 1, v);
            line(&mut out, r + 1, minus, k + 1, k + 1, -v);
        }
    }
    out
}

fn line(out: &mut String, mat: usize, block: usize, i: usize, j: usize, v: f64) {
    if v != 0.0 {
        let _ = writeln!(out, "{mat} {block} {i} {j} {}", fmt_num(v));
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_sdpa<W: io::Write>(p: &SdpProblem, mut w: W) -> io::Result<()> {
    w.write_all(to_sdpa_string(p).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{BlockEntry, EqualityRow};

    #[test]
    fn layout() {
        let p = SdpProblem {
            n_free: 1,
            blocks: vec![2],
            rows: vec![EqualityRow {
                free: vec![(0, -1.0)],
                entries: vec![BlockEntry {
                    block: 0,
                    i: 0,
                    j: 1,
                    value: 0.5,
                }],
                rhs: 2.0,
            }],
            objective_free: vec![(0, 1.0)],
            objective_blocks: vec![],
            objective_offset: 0.0,
        };
        let s = to_sdpa_string(&p);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "1");
        assert_eq!(lines[2], "3");
        assert_eq!(lines[3], "2 -1 -1");
        assert!(lines[4].starts_with("2.0"));
        assert!(s.contains("1 1 1 2 5.0"));
        assert!(s.contains("0 2 1 1 -1.0"));
        assert!(s.contains("1 3 1 1 1.0"));
    }
}
