//! Pregroup types and reductions by contraction.
//!
//! A simple type is a basic type with an adjoint order `z`: `n^l` has
//! `z = -1`, `n^r` has `z = +1`, `n^ll` has `z = -2`. Positions `i < j`
//! contract when their bases agree and `z(j) = z(i) + 1`; this covers both
//! `a^l · a → 1` and `a · a^r → 1`.
//!
//! A reduction is witnessed by a non-crossing matching of the flattened
//! simples. Unmatched positions are the survivors and must spell the target
//! type, and no link may enclose a survivor.
//!
//! Type syntax: simples separated by whitespace, each an identifier
//! optionally followed by `^` and a run of `l`/`r` letters (`n^r s n^l`,
//! `n^ll`). Lists of word types are separated by commas.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PregroupError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("sequence does not reduce to `{target}`")]
    NotReducible { target: String },
    #[error("empty word sequence")]
    EmptySequence,
}

pub type Result<T> = std::result::Result<T, PregroupError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleType {
    pub base: String,
    pub adjoint: i32,
}

impl SimpleType {
    pub fn new(base: impl Into<String>, adjoint: i32) -> SimpleType {
        SimpleType {
            base: base.into(),
            adjoint,
        }
    }

    /// Whether `self` (on the left) and `right` cancel.
    pub fn contracts_with(&self, right: &SimpleType) -> bool {
        self.base == right.base && right.adjoint == self.adjoint + 1
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        match self.adjoint {
            0 => Ok(()),
            z if z > 0 => write!(f, "^{}", "r".repeat(z as usize)),
            z => write!(f, "^{}", "l".repeat(z.unsigned_abs() as usize)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PregroupType {
    pub simples: Vec<SimpleType>,
}

impl PregroupType {
    pub fn new(simples: Vec<SimpleType>) -> PregroupType {
        PregroupType { simples }
    }

    pub fn unit() -> PregroupType {
        PregroupType::default()
    }

    pub fn len(&self) -> usize {
        self.simples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simples.is_empty()
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.simples.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.simples.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PregroupType {
    type Err = PregroupError;

    fn from_str(s: &str) -> Result<Self> {
        parse_type(s)
    }
}

fn syntax(position: usize, message: impl Into<String>) -> PregroupError {
    PregroupError::Syntax {
        position,
        message: message.into(),
    }
}

/// Parses `n^r s n^l` style types. `1` alone is the unit.
pub fn parse_type(text: &str) -> Result<PregroupType> {
    parse_type_at(text, 0)
}

fn parse_type_at(text: &str, offset: usize) -> Result<PregroupType> {
    let mut simples = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if !(bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
            if bytes[i] == b'1' && text[i + 1..].trim().is_empty() && simples.is_empty() {
                return Ok(PregroupType::unit());
            }
            return Err(syntax(
                offset + i,
                format!("unexpected `{}`", text[i..].chars().next().unwrap()),
            ));
        }
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
            i += 1;
        }
        let base = &text[start..i];
        let mut adjoint = 0;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            let run = i;
            while i < bytes.len() && (bytes[i] == b'l' || bytes[i] == b'r') {
                adjoint += if bytes[i] == b'r' { 1 } else { -1 };
                i += 1;
            }
            if i == run {
                return Err(syntax(offset + i, "expected `l` or `r` after `^`"));
            }
        }
        if i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            return Err(syntax(
                offset + i,
                format!("unexpected `{}`", text[i..].chars().next().unwrap()),
            ));
        }
        simples.push(SimpleType::new(base, adjoint));
    }
    Ok(PregroupType { simples })
}

/// Parses a comma-separated list of word types: `n, n^r s n^l, n`.
pub fn parse_type_list(text: &str) -> Result<Vec<PregroupType>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in text.split(',') {
        let t = parse_type_at(part, offset)?;
        if t.is_empty() {
            return Err(syntax(offset, "empty word type"));
        }
        out.push(t);
        offset += part.len() + 1;
    }
    Ok(out)
}

/// A simple type together with the word it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Positioned {
    pub simple: SimpleType,
    pub word: usize,
}

/// Concatenates word types, recording the word of origin per position.
pub fn flatten(seq: &[PregroupType]) -> Vec<Positioned> {
    seq.iter()
        .enumerate()
        .flat_map(|(word, t)| {
            t.simples.iter().map(move |s| Positioned {
                simple: s.clone(),
                word,
            })
        })
        .collect()
}

/// A non-crossing matching witnessing a reduction. Positions are 0-based
/// indices into the flattened sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionDiagram {
    pub words: Vec<PregroupType>,
    pub positions: Vec<Positioned>,
    pub links: Vec<(usize, usize)>,
    pub survivors: Vec<usize>,
    pub target: PregroupType,
}

impl ReductionDiagram {
    /// Number of flattened positions contributed by each word.
    pub fn word_lengths(&self) -> Vec<usize> {
        self.words.iter().map(PregroupType::len).collect()
    }

    /// Builds an unchecked diagram over `words`; see [`check_diagram`].
    pub fn new(
        words: &[PregroupType],
        links: Vec<(usize, usize)>,
        survivors: Vec<usize>,
        target: PregroupType,
    ) -> Self {
        ReductionDiagram {
            words: words.to_vec(),
            positions: flatten(words),
            links,
            survivors,
            target,
        }
    }
}

/// Independently verifies every invariant of a diagram: links in range and
/// disjoint, ordered, non-crossing, obeying the contraction rule, not
/// enclosing any survivor; survivors exactly the unlinked positions and
/// spelling the target.
pub fn check_diagram(d: &ReductionDiagram) -> bool {
    if d.positions != flatten(&d.words) {
        return false;
    }
    let m = d.positions.len();
    let mut used = vec![false; m];
    for &(i, j) in &d.links {
        if i >= j || j >= m || used[i] || used[j] {
            return false;
        }
        used[i] = true;
        used[j] = true;
        if !d.positions[i].simple.contracts_with(&d.positions[j].simple) {
            return false;
        }
    }
    for &(i, j) in &d.links {
        for &(k, l) in &d.links {
            if i < k && k < j && j < l {
                return false;
            }
        }
    }
    let unlinked: Vec<usize> = (0..m).filter(|&p| !used[p]).collect();
    if unlinked != d.survivors {
        return false;
    }
    for &s in &d.survivors {
        if d.links.iter().any(|&(i, j)| i < s && s < j) {
            return false;
        }
    }
    let spelled: Vec<&SimpleType> = d.survivors.iter().map(|&s| &d.positions[s].simple).collect();
    spelled == d.target.simples.iter().collect::<Vec<_>>()
}

/// Finds a reduction of `seq` to `target` by interval dynamic programming.
///
/// `empty[i][j]` records whether positions `i..j` reduce to the unit; the
/// leftmost position of an interval is matched with the nearest partner that
/// works (leftmost-innermost), and survivors are placed as early as
/// possible. The result is deterministic.
pub fn reduce(seq: &[PregroupType], target: &PregroupType) -> Result<ReductionDiagram> {
    if seq.is_empty() {
        return Err(PregroupError::EmptySequence);
    }
    let positions = flatten(seq);
    let m = positions.len();
    let simple = |p: usize| &positions[p].simple;

    // empty[i][j] for the half-open interval i..j; partner[i][j] is the
    // position matched with i
    let mut empty = vec![vec![false; m + 1]; m + 1];
    let mut partner = vec![vec![usize::MAX; m + 1]; m + 1];
    for (i, row) in empty.iter_mut().enumerate() {
        row[i] = true;
    }
    for len in (2..=m).step_by(2) {
        for i in 0..=m - len {
            let j = i + len;
            for k in (i + 1..j).step_by(2) {
                if simple(i).contracts_with(simple(k)) && empty[i + 1][k] && empty[k + 1][j] {
                    empty[i][j] = true;
                    partner[i][j] = k;
                    break;
                }
            }
        }
    }

    // ok[p][t]: positions p.. reduce to target[t..]
    let t_len = target.len();
    let mut ok = vec![vec![false; t_len + 1]; m + 1];
    let mut next = vec![vec![usize::MAX; t_len + 1]; m + 1];
    ok[m][t_len] = true;
    next[m][t_len] = m;
    for p in (0..m).rev() {
        for t in 0..=t_len {
            if t == t_len {
                if empty[p][m] {
                    ok[p][t] = true;
                    next[p][t] = m;
                }
                continue;
            }
            for q in (p..m).step_by(2) {
                if empty[p][q] && simple(q) == &target.simples[t] && ok[q + 1][t + 1] {
                    ok[p][t] = true;
                    next[p][t] = q;
                    break;
                }
            }
        }
    }
    if !ok[0][0] {
        return Err(PregroupError::NotReducible {
            target: target.to_string(),
        });
    }

    let mut links = Vec::new();
    fn emit(i: usize, j: usize, partner: &[Vec<usize>], links: &mut Vec<(usize, usize)>) {
        if i >= j {
            return;
        }
        let k = partner[i][j];
        links.push((i, k));
        emit(i + 1, k, partner, links);
        emit(k + 1, j, partner, links);
    }
    let mut survivors = Vec::new();
    let (mut p, mut t) = (0, 0);
    loop {
        let q = next[p][t];
        emit(p, q, &partner, &mut links);
        if t == t_len {
            break;
        }
        survivors.push(q);
        p = q + 1;
        t += 1;
    }
    links.sort_unstable();
    Ok(ReductionDiagram {
        words: seq.to_vec(),
        positions,
        links,
        survivors,
        target: target.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> PregroupType {
        parse_type(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            ty("n^r s n^l").simples,
            vec![
                SimpleType::new("n", 1),
                SimpleType::new("s", 0),
                SimpleType::new("n", -1)
            ]
        );
        assert_eq!(ty("n").simples, vec![SimpleType::new("n", 0)]);
        assert_eq!(ty("n^rr").simples, vec![SimpleType::new("n", 2)]);
        assert_eq!(ty("n^lr").simples, vec![SimpleType::new("n", 0)]);
        assert_eq!(ty("1"), PregroupType::unit());
        assert_eq!(ty("n^ll s^l").to_string(), "n^ll s^l");
    }

    #[test]
    fn parse_errors_carry_position() {
        assert_eq!(
            parse_type("n^r s^"),
            Err(PregroupError::Syntax {
                position: 6,
                message: "expected `l` or `r` after `^`".into()
            })
        );
        assert!(matches!(
            parse_type("n ^r"),
            Err(PregroupError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            parse_type("n^x"),
            Err(PregroupError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            parse_type_list("n, n^r s n^q, n"),
            Err(PregroupError::Syntax { position: 11, .. })
        ));
        assert!(parse_type_list("n,,n").is_err());
    }

    #[test]
    fn transitive_sentence() {
        let seq = parse_type_list("n, n^r s n^l, n").unwrap();
        let d = reduce(&seq, &ty("s")).unwrap();
        assert_eq!(d.links, vec![(0, 1), (3, 4)]);
        assert_eq!(d.survivors, vec![2]);
        assert!(check_diagram(&d));
    }

    #[test]
    fn identity_and_failure() {
        let d = reduce(&[ty("n")], &ty("n")).unwrap();
        assert!(d.links.is_empty());
        assert_eq!(d.survivors, vec![0]);
        assert!(matches!(
            reduce(&[ty("n"), ty("n")], &ty("s")),
            Err(PregroupError::NotReducible { .. })
        ));
        assert_eq!(reduce(&[], &ty("s")), Err(PregroupError::EmptySequence));
    }

    #[test]
    fn relative_clauses_reduce_to_noun() {
        let subj = parse_type_list("n, n^r n s^l n, n^r s n^l, n").unwrap();
        let d = reduce(&subj, &ty("n")).unwrap();
        assert_eq!(d.links, vec![(0, 1), (3, 6), (4, 5), (7, 8)]);
        assert_eq!(d.survivors, vec![2]);
        let obj = parse_type_list("n, n^r n n^ll s^l, n, n^r s n^l").unwrap();
        let d = reduce(&obj, &ty("n")).unwrap();
        assert_eq!(d.links, vec![(0, 1), (3, 8), (4, 7), (5, 6)]);
        assert!(check_diagram(&d));
    }

    #[test]
    fn survivors_cannot_be_enclosed() {
        // n^l s n: a cap over s would cross its output wire
        assert!(reduce(&[ty("n^l s n")], &ty("s")).is_err());
    }

    #[test]
    fn flatten_records_origin() {
        let seq = parse_type_list("n, n^r s n^l, n").unwrap();
        let words: Vec<usize> = flatten(&seq).iter().map(|p| p.word).collect();
        assert_eq!(words, vec![0, 1, 1, 1, 2]);
    }

    #[test]
    fn check_rejects_bad_diagrams() {
        let seq = parse_type_list("n, n^r, n^l, n").unwrap();
        let crossed = ReductionDiagram::new(&seq, vec![(0, 2), (1, 3)], vec![], PregroupType::unit());
        assert!(!check_diagram(&crossed));
        let wrong_rule = ReductionDiagram::new(&seq, vec![(1, 2), (0, 3)], vec![], PregroupType::unit());
        assert!(!check_diagram(&wrong_rule));
        let good = ReductionDiagram::new(&seq, vec![(0, 1), (2, 3)], vec![], PregroupType::unit());
        assert!(check_diagram(&good));
    }
}
