use std::fmt;
use std::time::Instant;

use dualdensity::density::{graded_entailment, DensityError, DualDensity, LogBase, Operator, View, ENTAILMENT_TOL};
use dualdensity::lexicon::{self, builtin_beirut, Lexicon, LexiconError};
use dualdensity::pregroup::{self, parse_type, parse_type_list, PregroupError, ReductionDiagram};
use dualdensity::semantics::{Composition, SemanticsError, Spectra};
use dualdensity::tensor::{layout_string, Tensor, TensorError};
use serde_json::{json, Value};

use crate::Global;

pub struct Output {
    pub json: Value,
    pub summary: String,
}

impl Output {
    fn ok(json: Value, summary: String) -> Output {
        Output { json, summary }
    }
}

/// A domain error: reported as JSON on stdout, exit status 1.
#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    details: Value,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> CliError {
        CliError {
            kind,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = json!({ "kind": self.kind, "message": self.message });
        if !self.details.is_null() {
            err["details"] = self.details.clone();
        }
        json!({ "error": err })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<PregroupError> for CliError {
    fn from(e: PregroupError) -> CliError {
        let kind = match e {
            PregroupError::Syntax { .. } => "SyntaxError",
            PregroupError::NotReducible { .. } => "NotReducible",
            PregroupError::EmptySequence => "EmptySequence",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> CliError {
        CliError::new("TensorError", e.to_string())
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> CliError {
        CliError::new("DensityError", e.to_string())
    }
}

impl From<SemanticsError> for CliError {
    fn from(e: SemanticsError) -> CliError {
        match e {
            SemanticsError::Pregroup(p) => p.into(),
            SemanticsError::Tensor(t) => t.into(),
            SemanticsError::Density(d) => d.into(),
            SemanticsError::AssignmentGap(_) => CliError::new("AssignmentGap", e.to_string()),
            SemanticsError::Layout(_) => CliError::new("LayoutError", e.to_string()),
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> CliError {
        match e {
            LexiconError::Semantics(s) => s.into(),
            LexiconError::Validation(ref findings) => CliError {
                kind: "ValidationError",
                message: e.to_string(),
                details: json!({ "findings": findings }),
            },
            LexiconError::Parse { .. } => CliError::new("ParseError", e.to_string()),
            LexiconError::Io { .. } => CliError::new("IoError", e.to_string()),
            LexiconError::UnknownWord(_) => CliError::new("UnknownWord", e.to_string()),
        }
    }
}

fn open_lexicon(arg: &str) -> Result<Lexicon, CliError> {
    if arg == "beirut" {
        Ok(builtin_beirut())
    } else {
        Ok(lexicon::load(arg)?)
    }
}

fn links_json(d: &ReductionDiagram) -> Value {
    json!(d.links.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>())
}

fn diagram_json(d: &ReductionDiagram) -> Value {
    json!({
        "survivors": d.survivors.iter().map(|p| p + 1).collect::<Vec<_>>(),
        "positions": d.positions.iter().enumerate().map(|(k, p)| json!({
            "position": k + 1,
            "simple": p.simple.to_string(),
            "word": p.word + 1,
        })).collect::<Vec<_>>(),
    })
}

fn spectra_json(s: &Spectra) -> Value {
    json!({
        "trace1": s.trace1,
        "trace2": s.trace2,
        "S1": s.entropy1,
        "S2": s.entropy2,
    })
}

/// Nonzero entries of a tensor, indexed by basis labels.
fn sparse_json(t: &Tensor) -> Value {
    let dims = t.dims();
    let mut entries = Vec::new();
    let mut index = vec![0usize; dims.len()];
    for &x in t.data() {
        if x != 0.0 {
            let labels: Vec<&str> = index
                .iter()
                .zip(t.wires())
                .map(|(&i, w)| w.space.basis()[i].as_str())
                .collect();
            entries.push(json!([labels, x]));
        }
        for k in (0..dims.len()).rev() {
            index[k] += 1;
            if index[k] < dims[k] {
                break;
            }
            index[k] = 0;
        }
    }
    json!({ "layout": layout_string(t.wires()), "nonzero": entries })
}

pub fn reduce(types: &str, target: &str) -> Result<Output, CliError> {
    let seq = parse_type_list(types)?;
    let target = parse_type(target)?;
    let d = pregroup::reduce(&seq, &target)?;
    let summary = format!(
        "reduces to {} with {} link(s): {}",
        target,
        d.links.len(),
        d.links
            .iter()
            .map(|(i, j)| format!("{}-{}", i + 1, j + 1))
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(Output::ok(
        json!({
            "command": "reduce",
            "result": { "reducible": true, "target": target.to_string() },
            "links": links_json(&d),
            "diagnostics": diagram_json(&d),
        }),
        summary,
    ))
}

fn composition_json(c: &Composition, phrase: &str) -> Value {
    json!({
        "phrase": phrase,
        "word_types": c.diagram.words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "links": links_json(&c.diagram),
        "spectra": c.spectra.as_ref().map(spectra_json),
    })
}

pub fn compose(lexicon: &str, phrase: &str, target: &str, g: &Global) -> Result<Output, CliError> {
    let lex = open_lexicon(lexicon)?;
    let target = parse_type(target)?;
    let start = Instant::now();
    let c = lex.compose(phrase, &target, g.base.log_base())?;
    let elapsed = start.elapsed();
    let mut diagnostics = composition_json(&c, phrase);
    diagnostics["diagram"] = diagram_json(&c.diagram);
    let summary = match &c.spectra {
        Some(s) => format!(
            "composed `{phrase}` in {elapsed:.2?}: S1 = {:?}, S2 = {:?} (base {})",
            s.entropy1,
            s.entropy2,
            g.base.name()
        ),
        None => format!(
            "composed `{phrase}` in {elapsed:.2?} onto [{}]",
            layout_string(c.tensor.wires())
        ),
    };
    Ok(Output::ok(
        json!({
            "command": "compose",
            "result": sparse_json(&c.tensor),
            "links": links_json(&c.diagram),
            "diagnostics": diagnostics,
        }),
        summary,
    ))
}

fn view_k(a: &DualDensity, b: &DualDensity, view: View) -> Option<f64> {
    graded_entailment(&a.view(view), &b.view(view), ENTAILMENT_TOL).ok()
}

pub fn entail(lexicon: &str, word_a: &str, word_b: &str, _g: &Global) -> Result<Output, CliError> {
    let lex = open_lexicon(lexicon)?;
    let a = lex.dual_density(word_a)?;
    let b = lex.dual_density(word_b)?;
    let k = graded_entailment(&a.entailment_operator(), &b.entailment_operator(), ENTAILMENT_TOL)?;
    Ok(Output::ok(
        json!({
            "command": "entail",
            "result": { "word_a": word_a, "word_b": word_b },
            "k": k,
            "diagnostics": {
                "operator": "second view, second factor traced out",
                "k_phi1": view_k(&a, &b, View::First),
                "k_phi2": view_k(&a, &b, View::Second),
            },
        }),
        format!("k({word_a} ⊑ {word_b}) = {k}"),
    ))
}

fn view_json(op: &Operator, base: LogBase) -> Result<Value, CliError> {
    Ok(json!({
        "trace": op.trace(),
        "eigenvalues": op.eigenvalues()?,
        "purity": op.normalize()?.purity()?,
        "entropy": op.entropy(base)?,
    }))
}

pub fn entropy(lexicon: &str, word: &str, g: &Global) -> Result<Output, CliError> {
    let lex = open_lexicon(lexicon)?;
    let d = lex.dual_density(word)?;
    let base = g.base.log_base();
    let s1 = d.entropy1(base)?;
    let s2 = d.entropy2(base)?;
    Ok(Output::ok(
        json!({
            "command": "entropy",
            "result": { "word": word, "base": g.base.name() },
            "entropies": { "S1": s1, "S2": s2 },
            "diagnostics": {
                "phi1": view_json(&d.phi1(), base)?,
                "phi2": view_json(&d.phi2(), base)?,
            },
        }),
        format!("{word}: S1 = {s1}, S2 = {s2} (base {})", g.base.name()),
    ))
}

pub fn validate(lexicon: &str) -> Result<Output, CliError> {
    let text;
    let source = if lexicon == "beirut" {
        lexicon::builtin_beirut_source()
    } else {
        text = std::fs::read_to_string(lexicon).map_err(|e| CliError::new("IoError", format!("{lexicon}: {e}")))?;
        &text
    };
    let lex = lexicon::load_str(source)?;
    Ok(Output::ok(
        json!({
            "command": "validate",
            "result": { "valid": true, "words": lex.entries().len() },
            "diagnostics": { "findings": [] },
        }),
        format!("{lexicon}: {} entries, no findings", lex.entries().len()),
    ))
}

const REFERENCES: [&str; 3] = ["Beirut-band", "Beirut-city", "Beirut-city-A"];
const SENSES: [(&str, &str); 2] = [("band", "Beirut-band"), ("city", "Beirut-city")];

pub fn demo_beirut(g: &Global) -> Result<Output, CliError> {
    let lex = builtin_beirut();
    let n = parse_type("n")?;
    let base = g.base.log_base();
    let before = lex.dual_density("Beirut")?;
    let cases = [
        ("Beirut that plays-at Beirut", "subject", "Beirut-band"),
        ("Beirut that Beirut plays-at", "object", "Beirut-city"),
    ];
    let mut phrases = Vec::new();
    let mut summary = vec![format!(
        "Beirut before composition: S1 = {:.6}, S2 = {:.6}",
        before.entropy1(base)?,
        before.entropy2(base)?
    )];
    let mut collapsed = true;
    for (phrase, relative, expected) in cases {
        let c = lex.compose(phrase, &n, base)?;
        let mut verdicts = Vec::new();
        for name in REFERENCES {
            let r = lex.dual_density(name)?;
            let factor = c.tensor.proportional_to(r.tensor(), g.tol)?;
            verdicts.push(json!({
                "reference": name,
                "proportional": factor.is_some(),
                "factor": factor,
                "cosine": c.tensor.cosine(r.tensor())?,
            }));
        }
        let mut sense = ("", f64::NEG_INFINITY);
        for (label, name) in SENSES {
            let cos = c.tensor.cosine(lex.dual_density(name)?.tensor())?;
            if cos > sense.1 {
                sense = (label, cos);
            }
        }
        let expected_factor = c.tensor.proportional_to(lex.dual_density(expected)?.tensor(), g.tol)?;
        let s1 = c.spectra.and_then(|s| s.entropy1);
        collapsed &= s1.is_some_and(|s| s.abs() <= g.tol);
        summary.push(format!(
            "{phrase} ({relative} relative): proportional to {expected}: {}; closest sense: {}; S1 = {:?}",
            if expected_factor.is_some() { "yes" } else { "no" },
            sense.0,
            s1
        ));
        let mut entry = composition_json(&c, phrase);
        entry["relative"] = json!(relative);
        entry["expected"] = json!(expected);
        entry["proportional_to_expected"] = json!(expected_factor.is_some());
        entry["sense"] = json!(sense.0);
        entry["verdicts"] = json!(verdicts);
        entry["result"] = sparse_json(&c.tensor);
        phrases.push(entry);
    }
    Ok(Output::ok(
        json!({
            "command": "demo",
            "result": {
                "name": "beirut",
                "phrases": phrases,
                "entropy_collapse": {
                    "before": { "S1": before.entropy1(base)?, "S2": before.entropy2(base)? },
                    "ambiguity_collapsed": collapsed,
                },
            },
            "diagnostics": { "tol": g.tol, "base": g.base.name() },
        }),
        summary.join("\n"),
    ))
}
