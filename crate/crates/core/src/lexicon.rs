//! The `.ddlex.json` lexicon format, its validator, and the built-in Beirut
//! model.
//!
//! ```json
//! {
//!   "spaces": { "N": ["A", "M", "Z", "P"], "S": ["bot", "top"] },
//!   "types":  { "n": "N", "s": "S" },
//!   "words": [
//!     { "word": "Beirut", "type": "n",
//!       "groups": [ { "senses": [ { "vector": [["A", 1]] }, { "vector": [["M"]] } ] } ] },
//!     { "word": "play-at", "type": "n^r s n^l", "vector": [["Z top A"], ["P top A"]] },
//!     { "word": "raw", "type": "n", "raw": { "layout": "N N* N N*", "data": [ ... ] } },
//!     { "word": "that", "builtin": "that_subj" }
//!   ]
//! }
//! ```
//!
//! Each entry carries exactly one of `groups`, `vector`, `raw` or `builtin`.
//! A vector term is `[labels, weight]` with one space-separated label per
//! wire of the type; the weight defaults to 1. Repeating a word name adds an
//! alternative reading, tried in file order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::density::{lift_pure, DualDensity, LogBase, Sense, SenseGroup, Weighting};
use crate::pregroup::{reduce, PregroupError, PregroupType, ReductionDiagram};
use crate::semantics::{
    compose_with_diagram, that_obj, that_obj_type, that_subj, that_subj_type, Composition, SemanticsError,
    TypeAssignment, Word,
};
use crate::tensor::{layout_string, Network, Space, Tensor, Wire};

/// PSD tolerance applied to every loaded dual density.
pub const PSD_TOL: f64 = 1e-10;

const BEIRUT: &str = include_str!("../data/beirut.ddlex.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexiconError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", render_findings(.0))]
    Validation(Vec<Finding>),
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

pub type Result<T> = std::result::Result<T, LexiconError>;

fn render_findings(findings: &[Finding]) -> String {
    let lines: Vec<String> = findings.iter().map(Finding::to_string).collect();
    format!("{} validation finding(s): {}", findings.len(), lines.join("; "))
}

/// One validation problem, located by word and source line when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub word: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.word, self.line) {
            (Some(w), Some(l)) => write!(f, "word `{w}` (line {l}): {}", self.message),
            (Some(w), None) => write!(f, "word `{w}`: {}", self.message),
            (None, Some(l)) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

/// A weighted basis tuple, written `[labels, weight]`, `[labels]` or `labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TermRepr", into = "TermRepr")]
pub struct Term {
    pub labels: String,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Weighted(String, f64),
    Bare([String; 1]),
    Label(String),
}

impl From<TermRepr> for Term {
    fn from(r: TermRepr) -> Term {
        match r {
            TermRepr::Weighted(labels, weight) => Term { labels, weight },
            TermRepr::Bare([labels]) | TermRepr::Label(labels) => Term { labels, weight: 1.0 },
        }
    }
}

impl From<Term> for TermRepr {
    fn from(t: Term) -> TermRepr {
        TermRepr::Weighted(t.labels, t.weight)
    }
}

fn one() -> f64 {
    1.0
}

fn is_one(w: &f64) -> bool {
    *w == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenseSpec {
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    pub vector: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    pub senses: Vec<SenseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub layout: String,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    ThatSubj,
    ThatObj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingSpec {
    /// Weights taken as given, as unnormalised sums.
    #[default]
    Free,
    /// Weights must be probabilities and sense vectors unit-norm.
    Probabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub word: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub ty: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighting: Option<WeightingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<GroupSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
}

/// The document model of a `.ddlex.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconFile {
    pub spaces: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub types: BTreeMap<String, String>,
    pub words: Vec<EntrySpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Skeleton<'a> {
    spaces: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    types: BTreeMap<String, String>,
    #[serde(borrow)]
    words: Vec<&'a RawValue>,
}

/// How an entry's meaning was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Mixture,
    Pure,
    Raw,
    Builtin(Builtin),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub word: Word,
    pub kind: EntryKind,
    pub line: Option<usize>,
}

impl Entry {
    /// The meaning as a dual density, when it lives on `[H, H̄, H, H̄]`.
    pub fn dual_density(&self) -> Option<DualDensity> {
        if self.word.meaning.output_wires().len() != 4 {
            return None;
        }
        let t = self.word.meaning.contract().ok()?;
        DualDensity::from_tensor_unchecked(t).ok()
    }
}

/// A resolved, immutable lexicon.
#[derive(Debug, Clone)]
pub struct Lexicon {
    file: LexiconFile,
    spaces: BTreeMap<String, Arc<Space>>,
    types: TypeAssignment,
    entries: Vec<Entry>,
}

impl Lexicon {
    pub fn file(&self) -> &LexiconFile {
        &self.file
    }

    pub fn space(&self, name: &str) -> Option<&Arc<Space>> {
        self.spaces.get(name)
    }

    pub fn types(&self) -> &TypeAssignment {
        &self.types
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Readings of a word, in file order.
    pub fn readings(&self, name: &str) -> Vec<&Entry> {
        self.entries.iter().filter(|e| e.word.name == name).collect()
    }

    /// The first reading of a word.
    pub fn entry(&self, name: &str) -> Result<&Entry> {
        self.entries
            .iter()
            .find(|e| e.word.name == name)
            .ok_or_else(|| LexiconError::UnknownWord(name.to_string()))
    }

    /// The first reading of a word as a dual density.
    pub fn dual_density(&self, name: &str) -> Result<DualDensity> {
        let e = self.entry(name)?;
        e.dual_density().ok_or_else(|| {
            LexiconError::Validation(vec![Finding {
                word: Some(name.to_string()),
                line: e.line,
                message: format!(
                    "meaning on [{}] is not a dual density",
                    layout_string(&e.word.meaning.output_wires())
                ),
            }])
        })
    }

    /// Picks one reading per token, the first combination (leftmost token
    /// varying slowest) whose types reduce to `target`.
    pub fn resolve(&self, tokens: &[&str], target: &PregroupType) -> Result<(Vec<&Word>, ReductionDiagram)> {
        let readings: Vec<Vec<&Entry>> = tokens
            .iter()
            .map(|t| {
                let r = self.readings(t);
                if r.is_empty() {
                    Err(LexiconError::UnknownWord(t.to_string()))
                } else {
                    Ok(r)
                }
            })
            .collect::<Result<_>>()?;
        if readings.is_empty() {
            return Err(SemanticsError::from(PregroupError::EmptySequence).into());
        }
        let mut choice = vec![0usize; readings.len()];
        loop {
            let words: Vec<&Word> = choice.iter().zip(&readings).map(|(&c, r)| &r[c].word).collect();
            let types: Vec<PregroupType> = words.iter().map(|w| w.ty.clone()).collect();
            match reduce(&types, target) {
                Ok(d) => return Ok((words, d)),
                Err(PregroupError::NotReducible { .. }) => {}
                Err(e) => return Err(SemanticsError::from(e).into()),
            }
            // odometer, rightmost token fastest
            let mut k = choice.len();
            loop {
                if k == 0 {
                    return Err(SemanticsError::from(PregroupError::NotReducible {
                        target: target.to_string(),
                    })
                    .into());
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < readings[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    /// Resolves and composes a whitespace-separated phrase.
    pub fn compose(&self, phrase: &str, target: &PregroupType, base: LogBase) -> Result<Composition> {
        let tokens: Vec<&str> = phrase.split_whitespace().collect();
        let (words, diagram) = self.resolve(&tokens, target)?;
        Ok(compose_with_diagram(&words, diagram, &self.types, base)?)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

fn parse_error(e: &serde_json::Error, line_shift: usize) -> LexiconError {
    LexiconError::Parse {
        line: e.line() + line_shift,
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a lexicon document.
pub fn load_str(text: &str) -> Result<Lexicon> {
    let skeleton: Skeleton = serde_json::from_str(text).map_err(|e| parse_error(&e, 0))?;
    let mut words = Vec::with_capacity(skeleton.words.len());
    let mut lines = Vec::with_capacity(skeleton.words.len());
    for raw in &skeleton.words {
        let offset = raw.get().as_ptr() as usize - text.as_ptr() as usize;
        let line = line_of(text, offset);
        words.push(serde_json::from_str::<EntrySpec>(raw.get()).map_err(|e| parse_error(&e, line - 1))?);
        lines.push(Some(line));
    }
    let file = LexiconFile {
        spaces: skeleton.spaces,
        types: skeleton.types,
        words,
    };
    let (lexicon, findings) = build(file, &lines);
    if findings.is_empty() {
        Ok(lexicon)
    } else {
        Err(LexiconError::Validation(findings))
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| LexiconError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_str(&text)
}

/// Builds a lexicon from an in-memory document.
pub fn from_file(file: LexiconFile) -> Result<Lexicon> {
    let lines = vec![None; file.words.len()];
    let (lexicon, findings) = build(file, &lines);
    if findings.is_empty() {
        Ok(lexicon)
    } else {
        Err(LexiconError::Validation(findings))
    }
}

pub fn to_json(lex: &Lexicon) -> String {
    serde_json::to_string_pretty(&lex.file).expect("lexicon documents always serialize")
}

pub fn save(lex: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(lex) + "\n").map_err(|e| LexiconError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// All findings for a lexicon; empty when it is well formed.
pub fn validate(lex: &Lexicon) -> Vec<Finding> {
    validate_file(&lex.file)
}

pub fn validate_file(file: &LexiconFile) -> Vec<Finding> {
    build(file.clone(), &vec![None; file.words.len()]).1
}

/// The built-in model: `N = span{A, M, Z, P}`, `S = span{⊥, ⊤}`.
pub fn builtin_beirut() -> Lexicon {
    load_str(BEIRUT).expect("built-in lexicon is valid")
}

pub fn builtin_beirut_source() -> &'static str {
    BEIRUT
}

fn build(file: LexiconFile, lines: &[Option<usize>]) -> (Lexicon, Vec<Finding>) {
    let mut findings = Vec::new();
    let mut spaces = BTreeMap::new();
    for (name, basis) in &file.spaces {
        match Space::new(name.clone(), basis.clone()) {
            Ok(s) => {
                spaces.insert(name.clone(), s);
            }
            Err(e) => findings.push(Finding {
                word: None,
                line: None,
                message: format!("space `{name}`: {e}"),
            }),
        }
    }
    let mut types = TypeAssignment::new();
    for (base, space) in &file.types {
        match spaces.get(space) {
            Some(s) => types.insert(base, s),
            None => findings.push(Finding {
                word: None,
                line: None,
                message: format!("type `{base}` maps to unknown space `{space}`"),
            }),
        }
    }
    let mut entries = Vec::new();
    for (spec, &line) in file.words.iter().zip(lines) {
        match build_entry(spec, &types, &spaces) {
            Ok((word, kind)) => entries.push(Entry { word, kind, line }),
            Err(message) => findings.push(Finding {
                word: Some(spec.word.clone()),
                line,
                message,
            }),
        }
    }
    let lexicon = Lexicon {
        file,
        spaces,
        types,
        entries,
    };
    (lexicon, findings)
}

fn check_weight(what: &str, w: f64) -> std::result::Result<(), String> {
    if w < 0.0 || !w.is_finite() {
        Err(format!("{what} weight {w} is negative or not finite"))
    } else {
        Ok(())
    }
}

fn vector_on(wires: Vec<Wire>, terms: &[Term]) -> std::result::Result<Tensor, String> {
    let split: Vec<(Vec<String>, f64)> = terms
        .iter()
        .map(|t| (t.labels.split_whitespace().map(str::to_string).collect(), t.weight))
        .collect();
    if let Some(t) = terms.iter().find(|t| !t.weight.is_finite()) {
        return Err(format!("vector term `{}` has a non-finite weight", t.labels));
    }
    Tensor::from_terms(wires, split.iter().map(|(l, w)| (l.as_slice(), *w))).map_err(|e| e.to_string())
}

fn parse_layout(layout: &str, spaces: &BTreeMap<String, Arc<Space>>) -> std::result::Result<Vec<Wire>, String> {
    layout
        .split_whitespace()
        .map(|tok| {
            let (name, conjugate) = match tok.strip_suffix('*') {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let space = spaces
                .get(name)
                .ok_or_else(|| format!("layout names unknown space `{name}`"))?;
            Ok(Wire {
                space: Arc::clone(space),
                conjugate,
            })
        })
        .collect()
}

fn check_psd(t: &Tensor) -> std::result::Result<(), String> {
    if t.rank() != 4 {
        return Ok(());
    }
    match DualDensity::from_raw(t.clone(), PSD_TOL) {
        Ok(_) => Ok(()),
        Err(e) => Err(format!("dual density check failed: {e}")),
    }
}

fn build_entry(
    spec: &EntrySpec,
    ta: &TypeAssignment,
    spaces: &BTreeMap<String, Arc<Space>>,
) -> std::result::Result<(Word, EntryKind), String> {
    let kinds = [
        spec.groups.is_some(),
        spec.vector.is_some(),
        spec.raw.is_some(),
        spec.builtin.is_some(),
    ];
    if kinds.iter().filter(|k| **k).count() != 1 {
        return Err("entry needs exactly one of `groups`, `vector`, `raw`, `builtin`".into());
    }
    let declared = match &spec.ty {
        Some(text) => Some(
            text.parse::<PregroupType>()
                .map_err(|e| format!("type `{text}`: {e}"))?,
        ),
        None => None,
    };
    if let Some(b) = spec.builtin {
        let (ty, meaning) = match b {
            Builtin::ThatSubj => (that_subj_type(), that_subj(ta)),
            Builtin::ThatObj => (that_obj_type(), that_obj(ta)),
        };
        if let Some(d) = &declared {
            if *d != ty {
                return Err(format!("builtin has type `{ty}`, entry declares `{d}`"));
            }
        }
        let meaning = meaning.map_err(|e| e.to_string())?;
        return Ok((
            Word {
                name: spec.word.clone(),
                ty,
                meaning,
            },
            EntryKind::Builtin(b),
        ));
    }
    let ty = declared.ok_or_else(|| "missing `type`".to_string())?;
    let lifted = ta.lifted_wires(&ty).map_err(|e| e.to_string())?;
    let (tensor, kind) = if let Some(groups) = &spec.groups {
        let atoms = ta.wires(&ty).map_err(|e| e.to_string())?;
        if atoms.len() != 1 || atoms[0].conjugate {
            return Err(format!("sense mixtures need a single plain basic type, got `{ty}`"));
        }
        let mut built = Vec::with_capacity(groups.len());
        for g in groups {
            check_weight("group", g.weight)?;
            let mut senses = Vec::with_capacity(g.senses.len());
            for s in &g.senses {
                check_weight("sense", s.weight)?;
                senses.push(Sense::new(s.weight, vector_on(atoms.clone(), &s.vector)?));
            }
            built.push(SenseGroup {
                weight: g.weight,
                senses,
            });
        }
        let weighting = match spec.weighting.unwrap_or_default() {
            WeightingSpec::Free => Weighting::Free,
            WeightingSpec::Probabilities => Weighting::Probabilities,
        };
        let d = DualDensity::from_mixtures(&built, weighting).map_err(|e| e.to_string())?;
        (d.into_tensor(), EntryKind::Mixture)
    } else if let Some(terms) = &spec.vector {
        let atoms = ta.wires(&ty).map_err(|e| e.to_string())?;
        (lift_pure(&vector_on(atoms, terms)?), EntryKind::Pure)
    } else {
        let raw = spec.raw.as_ref().expect("kind checked above");
        let wires = parse_layout(&raw.layout, spaces)?;
        if wires != lifted {
            return Err(format!(
                "raw layout [{}] does not match the lifted type layout [{}]",
                layout_string(&wires),
                layout_string(&lifted)
            ));
        }
        (
            Tensor::new(wires, raw.data.clone()).map_err(|e| e.to_string())?,
            EntryKind::Raw,
        )
    };
    if tensor.wires() != lifted.as_slice() {
        return Err(format!(
            "meaning on [{}] does not match the lifted type layout [{}]",
            layout_string(tensor.wires()),
            layout_string(&lifted)
        ));
    }
    check_psd(&tensor)?;
    Ok((
        Word {
            name: spec.word.clone(),
            ty,
            meaning: Network::single(tensor),
        },
        kind,
    ))
}
