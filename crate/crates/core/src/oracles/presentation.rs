use std::fmt;

use thiserror::Error;

use crate::words::{Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("relator {index} is trivial after cyclic reduction")]
    EmptyRelator { index: usize },
    #[error("missing header line `rank <n>`")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A finite presentation `<x1..xn | relators>`. Relators are cyclically reduced,
/// non-empty, and deduplicated in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    rank: usize,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(rank: usize, relators: Vec<Word>) -> Result<Presentation, PresentationError> {
        if rank == 0 {
            return Err(WordError::ZeroRank.into());
        }
        let mut out: Vec<Word> = Vec::with_capacity(relators.len());
        for (index, r) in relators.into_iter().enumerate() {
            if r.rank() != rank {
                return Err(WordError::RankMismatch {
                    left: rank,
                    right: r.rank(),
                }
                .into());
            }
            let r = r.cyclic_reduce();
            if r.is_empty() {
                return Err(PresentationError::EmptyRelator { index });
            }
            if !out.contains(&r) {
                out.push(r);
            }
        }
        Ok(Presentation {
            rank,
            relators: out,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Parses the text format: a `rank <n>` line, then one relator per line.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Presentation, PresentationError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(PresentationError::MissingHeader)?;
        let rank = header
            .strip_prefix("rank")
            .map(str::trim)
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| PresentationError::Syntax {
                line,
                message: format!("expected `rank <n>`, found {header:?}"),
            })?;
        let mut relators = Vec::new();
        for (line, text) in lines {
            let word = Word::parse(rank, text).map_err(|e| PresentationError::Syntax {
                line,
                message: e.to_string(),
            })?;
            relators.push(word);
        }
        Presentation::new(rank, relators)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.rank)?;
        for r in &self.relators {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_normalise() {
        let p = Presentation::parse("rank 2\n# comment\nX1 x2 x1 x2\n\nx2 x2\nx2 x2\n").unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.relators().len(), 2);
        assert_eq!(p.relators()[1].to_string(), "x2 x2");
        assert_eq!(Presentation::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Presentation::parse(""), Err(PresentationError::MissingHeader));
        assert!(matches!(
            Presentation::parse("rank 2\nx1 X1"),
            Err(PresentationError::EmptyRelator { index: 0 })
        ));
        assert!(matches!(
            Presentation::parse("rank 1\nx2"),
            Err(PresentationError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            Presentation::parse("rnk 1"),
            Err(PresentationError::Syntax { line: 1, .. })
        ));
    }
}
