//! MacKay alist text format: dimensions, max degrees, degree lists, then
//! 1-indexed neighbor lists per column (variable) and per row (check),
//! zero-padded to the maximum degree.

use std::fmt::Write as _;
use std::path::Path;

use super::{GraphKind, TannerGraph};
use crate::error::{Error, Result};

pub fn write_alist(g: &TannerGraph) -> String {
    let n = g.n_var();
    let m = g.n_chk();
    let col: Vec<Vec<usize>> = (0..n).map(|v| g.var_checks(v)).collect();
    let row = g.check_lists();
    let max_col = col.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{}", join(&mut col.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut row.iter().map(Vec::len)));
    for list in &col {
        let mut it = list.iter().map(|c| c + 1).chain(std::iter::repeat(0)).take(max_col);
        let _ = writeln!(out, "{}", join(&mut it));
    }
    for list in &row {
        let mut it = list.iter().map(|v| v + 1).chain(std::iter::repeat(0)).take(max_row);
        let _ = writeln!(out, "{}", join(&mut it));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line parsed as integers, with its 1-based number.
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("expected a non-negative integer in {what}, found {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of file while reading {what}"),
        })
    }
}

pub fn read_alist(text: &str, kind: GraphKind) -> Result<TannerGraph> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let expect_len = |line: usize, got: &[usize], want: usize, what: &str| -> Result<()> {
        if got.len() != want {
            return Err(Error::Parse {
                line,
                msg: format!("{what}: expected {want} values, found {}", got.len()),
            });
        }
        Ok(())
    };

    let (l, dims) = lines.next_ints("dimensions")?;
    expect_len(l, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    let (l, maxes) = lines.next_ints("max degrees")?;
    expect_len(l, &maxes, 2, "max degrees")?;
    let (l, col_deg) = lines.next_ints("column degrees")?;
    expect_len(l, &col_deg, n, "column degrees")?;
    let (l, row_deg) = lines.next_ints("row degrees")?;
    expect_len(l, &row_deg, m, "row degrees")?;

    let mut col_lists = Vec::with_capacity(n);
    for (v, &d) in col_deg.iter().enumerate() {
        let (l, entries) = lines.next_ints("column list")?;
        let list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).collect();
        if list.len() != d {
            return Err(Error::Parse {
                line: l,
                msg: format!("column {} lists {} checks, degree says {d}", v + 1, list.len()),
            });
        }
        if let Some(&bad) = list.iter().find(|&&c| c > m) {
            return Err(Error::Parse {
                line: l,
                msg: format!("check index {bad} out of range 1..={m}"),
            });
        }
        col_lists.push(list);
    }
    let mut checks = Vec::with_capacity(m);
    for (c, &d) in row_deg.iter().enumerate() {
        let (l, entries) = lines.next_ints("row list")?;
        let list: Vec<usize> = entries.into_iter().filter(|&x| x != 0).collect();
        if list.len() != d {
            return Err(Error::Parse {
                line: l,
                msg: format!("row {} lists {} variables, degree says {d}", c + 1, list.len()),
            });
        }
        if let Some(&bad) = list.iter().find(|&&v| v > n) {
            return Err(Error::Parse {
                line: l,
                msg: format!("variable index {bad} out of range 1..={n}"),
            });
        }
        checks.push(list.into_iter().map(|v| v - 1).collect::<Vec<_>>());
    }

    let graph = TannerGraph::from_checks(kind, n, &checks).map_err(|e| Error::Parse {
        line: lines.last,
        msg: e.to_string(),
    })?;
    for (v, list) in col_lists.iter().enumerate() {
        let mut sorted: Vec<usize> = list.iter().map(|c| c - 1).collect();
        sorted.sort_unstable();
        if sorted != graph.var_checks(v) {
            return Err(Error::Parse {
                line: lines.last,
                msg: format!("column {} disagrees with the row lists", v + 1),
            });
        }
    }
    Ok(graph)
}

pub fn save_graph(g: &TannerGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_alist(g)).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: impl AsRef<Path>, kind: GraphKind) -> Result<TannerGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_alist(&text, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, DegreeProfile};

    #[test]
    fn header_of_regular_graph() {
        let g = build_graph(12, &DegreeProfile::regular(2, 4), GraphKind::ParityCheck, 3).unwrap();
        let text = write_alist(&g);
        let mut it = text.lines();
        assert_eq!(it.next().unwrap(), "12 6");
        assert_eq!(it.next().unwrap(), "2 4");
        assert_eq!(it.next().unwrap(), vec!["2"; 12].join(" "));
        assert_eq!(it.next().unwrap(), vec!["4"; 6].join(" "));
    }

    #[test]
    fn file_round_trip() {
        let g = build_graph(100, &DegreeProfile::regular(3, 6), GraphKind::ParityCheck, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.alist");
        save_graph(&g, &path).unwrap();
        let back = load_graph(&path, GraphKind::ParityCheck).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn truncated_file() {
        let g = build_graph(100, &DegreeProfile::regular(3, 6), GraphKind::ParityCheck, 4).unwrap();
        let text = write_alist(&g);
        let cut: String = text.lines().take(60).map(|l| format!("{l}\n")).collect();
        match read_alist(&cut, GraphKind::ParityCheck) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 61),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn garbage_token_reports_line() {
        let text = "3 1\n1 3\n1 1 1\nx\n";
        match read_alist(text, GraphKind::ParityCheck) {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("expected parse error on line 4, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_lists() {
        let text = "2 1\n1 2\n1 1\n2\n1\n1\n1 2\n";
        assert!(read_alist(text, GraphKind::ParityCheck).is_ok());
        let bad = "2 1\n1 2\n1 0\n1\n1\n0\n1 2\n";
        assert!(read_alist(bad, GraphKind::ParityCheck).is_err());
    }

    mod props {
        use super::super::*;
        use crate::graph::TannerGraph;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn alist_round_trip(checks in proptest::collection::vec(proptest::collection::btree_set(0usize..30, 1..6), 1..20)) {
                let checks: Vec<Vec<usize>> = checks.into_iter().map(|s| s.into_iter().collect()).collect();
                let g = TannerGraph::from_checks(GraphKind::Generator, 30, &checks).unwrap();
                let back = read_alist(&write_alist(&g), GraphKind::Generator).unwrap();
                prop_assert_eq!(g, back);
            }
        }
    }
}
