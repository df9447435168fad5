//! Text format for genotype count tables and the three built-in data sets.
//!
//! A table has one line per allele; line `i` (1-based) holds `i`
//! whitespace-separated non-negative integers, the counts of genotypes
//! `(i, 1), ..., (i, i)`. Blank lines and lines starting with `#` are
//! ignored.

use crate::error::{Error, Result};
use crate::genotype::GenotypeCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Builtin {
    pub id: u8,
    pub source: &'static str,
    pub text: &'static str,
}

pub const BUILTINS: [Builtin; 3] = [
    Builtin {
        id: 1,
        source: "rheumatoid arthritis study (Wordsworth et al., 1992)",
        text: "5\n40 12\n6 32 2\n30 55 15 33\n",
    },
    Builtin {
        id: 2,
        source: "example data shipped with the GENEPOP software package (Rousset, 2008)",
        text: "2\n12 24\n30 34 54\n22 21 20 10\n",
    },
    Builtin {
        id: 3,
        source: "genotype frequencies at the Rhesus locus (Cavalli-Sforza and Bodmer, 1971)",
        text: "1236\n\
               120 3\n\
               18 0 0\n\
               982 55 7 249\n\
               32 1 0 12 0\n\
               2582 132 20 1162 29 1312\n\
               6 0 0 4 0 4 0\n\
               2 0 0 0 0 0 0 0\n\
               115 5 2 53 1 149 0 0 4\n",
    },
];

pub fn builtin(id: u8) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.id == id)
}

/// Parses one of the built-in tables. Panics only if the embedded text is
/// malformed, which the tests rule out.
pub fn builtin_counts(id: u8) -> Option<GenotypeCounts> {
    builtin(id).map(|b| parse_dataset(b.text).expect("embedded table parses"))
}

pub fn parse_dataset(text: &str) -> Result<GenotypeCounts> {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid count {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let expected = rows.len() + 1;
        if row.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {expected} counts, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no count rows".into(),
        });
    }
    if rows.len() < 2 {
        return Err(Error::TooFewAlleles(rows.len()));
    }
    GenotypeCounts::from_rows(&rows)
}

pub fn serialize_dataset(counts: &GenotypeCounts) -> String {
    let mut out = String::new();
    for row in counts.rows() {
        let line: Vec<String> = row.iter().map(u64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_dataset1() {
        let c = parse_dataset("5\n40 12\n6 32 2\n30 55 15 33").unwrap();
        assert_eq!(c.k(), 4);
        assert_eq!(c.n(), 230);
        assert_eq!(c.get(3, 1), 55);
    }

    #[test]
    fn builtins_parse() {
        assert_eq!(builtin_counts(1).unwrap().n(), 230);
        assert_eq!(builtin_counts(2).unwrap().n(), 229);
        let three = builtin_counts(3).unwrap();
        assert_eq!(three.k(), 9);
        assert_eq!(three.n(), 8297);
        assert!(builtin_counts(4).is_none());
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_dataset("# header\n\n 2 \n# mid\n1   3\n").unwrap();
        assert_eq!(c.counts(), &[2, 1, 3]);
    }

    #[test]
    fn single_allele_rejected() {
        assert_eq!(parse_dataset("7"), Err(Error::TooFewAlleles(1)));
    }

    #[test]
    fn ragged_rows() {
        assert!(matches!(
            parse_dataset("1 2\n3"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("1\n2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bad_tokens_and_empty_input() {
        match parse_dataset("1\n2 x\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("\"x\""));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_dataset("1\n2 -3\n").is_err());
        assert!(matches!(
            parse_dataset("# only\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_dataset(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn serialize_normalizes_whitespace() {
        let c = parse_dataset("  5\n40\t12\n").unwrap();
        assert_eq!(serialize_dataset(&c), "5\n40 12\n");
    }

    proptest! {
        #[test]
        fn round_trip(k in 2usize..10, seed in proptest::collection::vec(0u64..100_000, 45)) {
            let counts = seed[..crate::genotype::genotype_count(k)].to_vec();
            let c = GenotypeCounts::new(k, counts).unwrap();
            prop_assert_eq!(parse_dataset(&serialize_dataset(&c)).unwrap(), c);
        }
    }
}
