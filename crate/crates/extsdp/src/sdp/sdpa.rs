//! SDPA sparse (`.dat-s`) export and import.
//!
//! SDPA minimizes `c·x` subject to `Σ F_i x_i − F_0 ⪰ 0`. An [`LmiProblem`]
//! maximizes `objective·z + offset` subject to `constant + Σ z_k F_k ⪰ 0`,
//! so the exporter writes `c = −objective` and `F_0 = −constant`. The offset
//! rides along in a `* offset` comment line, which SDPA readers skip.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use super::embed::SparseSym;
use super::presolve::LmiProblem;
use crate::error::{Error, Result};

/// Renders the problem in SDPA sparse format. Floats use the shortest
/// representation that parses back to the same bits.
pub fn to_sdpa_string(lmi: &LmiProblem) -> String {
    let mut s = String::new();
    if lmi.offset != 0.0 {
        let _ = writeln!(s, "* offset {:e}", lmi.offset);
    }
    let _ = writeln!(s, "{}", lmi.n_vars());
    let _ = writeln!(s, "{}", lmi.block_sizes.len());
    let sizes: Vec<String> = lmi.block_sizes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = lmi.objective.iter().map(|v| format!("{:e}", -v)).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    for (b, blk) in lmi.constant.iter().enumerate() {
        for &(i, j, v) in &blk.entries {
            let _ = writeln!(s, "0 {} {} {} {:e}", b + 1, i + 1, j + 1, -v);
        }
    }
    for (k, terms) in lmi.coeffs.iter().enumerate() {
        for (b, blk) in terms {
            for &(i, j, v) in &blk.entries {
                let _ = writeln!(s, "{} {} {} {} {:e}", k + 1, b + 1, i + 1, j + 1, v);
            }
        }
    }
    s
}

pub fn export_sdpa(lmi: &LmiProblem, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, to_sdpa_string(lmi))?)
}

pub fn read_sdpa(path: &Path) -> Result<LmiProblem> {
    let text = std::fs::read_to_string(path)?;
    parse_sdpa(&text)
}

/// Parses SDPA sparse text. Diagonal blocks (negative sizes) are read as
/// dense blocks of the same side.
pub fn parse_sdpa(text: &str) -> Result<LmiProblem> {
    let mut offset = 0.0;
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix('*') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("offset") {
                offset = parse_f64(it.next().unwrap_or(""), ln + 1)?;
            }
            continue;
        }
        if t.starts_with('"') {
            continue;
        }
        let cleaned: String = t.chars().map(|c| if "{}(),".contains(c) { ' ' } else { c }).collect();
        // free text such as "=mDIM" after the header counts is ignored
        tokens.extend(
            cleaned
                .split_whitespace()
                .take_while(|w| w.starts_with(|c: char| c.is_ascii_digit() || "+-.".contains(c)))
                .map(|w| (ln + 1, w.to_string())),
        );
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input reading {what}") });

    let (ln, tok) = next("m")?;
    let m = parse_usize(&tok, ln)?;
    let (ln, tok) = next("block count")?;
    let nb = parse_usize(&tok, ln)?;
    let mut block_sizes = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, tok) = next("block size")?;
        let v: i64 = tok.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad block size {tok:?}") })?;
        if v == 0 {
            return Err(Error::Parse { line: ln, msg: "zero block size".into() });
        }
        block_sizes.push(v.unsigned_abs() as usize);
    }
    let mut objective = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, tok) = next("objective")?;
        objective.push(-parse_f64(&tok, ln)?);
    }

    let mut constant: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
    let mut coeffs: Vec<Vec<Vec<(usize, usize, f64)>>> = vec![vec![Vec::new(); nb]; m];
    while let Ok((ln, tok)) = next("entry") {
        let k = parse_usize(&tok, ln)?;
        let mut field = |what: &str| -> Result<(usize, String)> { next(what) };
        let b = parse_usize(&field("block")?.1, ln)?;
        let i = parse_usize(&field("row")?.1, ln)?;
        let j = parse_usize(&field("col")?.1, ln)?;
        let v = parse_f64(&field("value")?.1, ln)?;
        if k > m || b == 0 || b > nb || i == 0 || j == 0 || i.max(j) > block_sizes[b - 1] {
            return Err(Error::Parse { line: ln, msg: format!("entry ({k}, {b}, {i}, {j}) out of range") });
        }
        if k == 0 {
            constant[b - 1].push((i - 1, j - 1, -v));
        } else {
            coeffs[k - 1][b - 1].push((i - 1, j - 1, v));
        }
    }

    Ok(LmiProblem {
        block_sizes,
        constant: constant.into_iter().map(SparseSym::from_unsorted).collect(),
        coeffs: coeffs
            .into_iter()
            .map(|per_block| {
                per_block
                    .into_iter()
                    .enumerate()
                    .filter(|(_, e)| !e.is_empty())
                    .map(|(b, e)| (b, SparseSym::from_unsorted(e)))
                    .collect()
            })
            .collect(),
        objective,
        offset,
    })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected an index, got {tok:?}") })
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected a number, got {tok:?}") })
}

/// Reads the primal objective from SDPA (`objValPrimal = …`) or CSDP
/// (`Primal objective value: …`) output. The value is in SDPA's sense; see
/// [`external_to_internal`].
pub fn parse_external_objective(text: &str) -> Result<f64> {
    for (ln, line) in text.lines().enumerate() {
        let rest = if let Some(r) = line.trim().strip_prefix("objValPrimal") {
            r.trim_start().trim_start_matches('=')
        } else if let Some(r) = line.trim().strip_prefix("Primal objective value:") {
            r
        } else {
            continue;
        };
        return parse_f64(rest.trim(), ln + 1);
    }
    Err(Error::MissingData("no primal objective line in solver output".into()))
}

/// Converts an SDPA-sense objective of an exported problem back to the
/// maximization value of the [`LmiProblem`].
pub fn external_to_internal(lmi: &LmiProblem, sdpa_value: f64) -> f64 {
    lmi.offset - sdpa_value
}

/// Exports `lmi` to a temporary file and solves it with `csdp` or `sdpa`,
/// whichever is on `PATH`. `None` when neither is installed.
pub fn solve_external(lmi: &LmiProblem) -> Option<Result<f64>> {
    let dir = std::env::temp_dir().join(format!("extsdp-{}-{:x}", std::process::id(), rand::random::<u64>()));
    let run = |exe: &str| -> Option<Result<f64>> {
        let probe = Command::new(exe).arg("--help").output();
        if matches!(&probe, Err(e) if e.kind() == std::io::ErrorKind::NotFound) {
            return None;
        }
        Some((|| {
            std::fs::create_dir_all(&dir)?;
            let input = dir.join("problem.dat-s");
            let result = dir.join("problem.out");
            export_sdpa(lmi, &input)?;
            let out = Command::new(exe).arg(&input).arg(&result).output()?;
            let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
            if let Ok(file) = std::fs::read_to_string(&result) {
                text.push_str(&file);
            }
            let _ = std::fs::remove_dir_all(&dir);
            parse_external_objective(&text).map(|v| external_to_internal(lmi, v))
        })())
    };
    run("csdp").or_else(|| run("sdpa"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LmiProblem {
        // maximize −t subject to t ⪰ 0 (1×1)
        LmiProblem {
            block_sizes: vec![1],
            constant: vec![SparseSym::default()],
            coeffs: vec![vec![(0, SparseSym { entries: vec![(0, 0, 1.0)] })]],
            objective: vec![-1.0],
            offset: 0.0,
        }
    }

    #[test]
    fn one_variable_toy_matches_hand_encoding() {
        assert_eq!(to_sdpa_string(&toy()), "1\n1\n1\n1e0\n1 1 1 1 1e0\n");
    }

    #[test]
    fn empty_problem_is_header_only() {
        let lmi = LmiProblem { block_sizes: vec![], constant: vec![], coeffs: vec![], objective: vec![], offset: 0.0 };
        assert_eq!(to_sdpa_string(&lmi), "0\n0\n\n\n");
        assert_eq!(parse_sdpa(&to_sdpa_string(&lmi)).unwrap(), lmi);
    }

    #[test]
    fn awkward_values_round_trip_exactly() {
        let lmi = LmiProblem {
            block_sizes: vec![2, 3],
            constant: vec![SparseSym { entries: vec![(0, 1, 0.1 + 0.2)] }, SparseSym::default()],
            coeffs: vec![
                vec![(1, SparseSym { entries: vec![(0, 0, 1.0 / 3.0), (1, 2, -2f64.sqrt())] })],
                vec![(0, SparseSym { entries: vec![(1, 1, 1e-300)] }), (1, SparseSym { entries: vec![(2, 2, 6.02e23)] })],
            ],
            objective: vec![std::f64::consts::PI, -0.0],
            offset: -1.0 / 7.0,
        };
        let back = parse_sdpa(&to_sdpa_string(&lmi)).unwrap();
        assert_eq!(back, lmi);
    }

    #[test]
    fn parses_foreign_layout() {
        let text = "\"a comment\n2 =mDIM\n1\n(-2)\n{1.0, 2.0}\n0 1 1 1 -1\n1 1 1 1 1\n2 1 2 2 1\n";
        let lmi = parse_sdpa(text).unwrap();
        assert_eq!(lmi.block_sizes, vec![2]);
        assert_eq!(lmi.objective, vec![-1.0, -2.0]);
        assert_eq!(lmi.constant[0].entries, vec![(0, 0, 1.0)]);
    }

    #[test]
    fn external_objective_lines() {
        assert_eq!(parse_external_objective("x\nobjValPrimal = -1.5e+00\n").unwrap(), -1.5);
        assert_eq!(parse_external_objective("Primal objective value: 2.0000000e-01\n").unwrap(), 0.2);
        assert!(parse_external_objective("nothing").is_err());
    }
}
