//! JSON interchange for transition systems and lassos.
//!
//! A system is written as
//!
//! ```json
//! {"states":["s0","s1"],"initial":"s0","colors":{"s1":"p"},
//!  "edges":[{"from":"s0","label":"a","to":"s1"}]}
//! ```
//!
//! with an optional `"marks"` object mapping predicate names to state lists.
//! Output is deterministic: states keep their order, colors and marks are
//! keyed by name, edges are sorted.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{decode_parts, EncodedSystem};
use crate::lasso::{Attachment, KLasso, Lasso};
use crate::path::PointedPath;
use crate::system::{SystemBuilder, TransitionSystem};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    colors: BTreeMap<String, String>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    marks: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: String,
    label: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LassoDoc {
    tail: PointedPath,
    #[serde(rename = "loop")]
    loop_: PointedPath,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KLassoDoc {
    main: LassoDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attachments: Vec<AttachmentDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttachmentDoc {
    vertex: usize,
    label: String,
    sub: KLassoDoc,
}

fn syntax(e: serde_json::Error) -> Error {
    Error::Syntax(e.to_string())
}

fn system_doc(s: &TransitionSystem) -> SystemDoc {
    let name = |i: usize| s.state_name(i).to_owned();
    SystemDoc {
        states: s.state_names().to_vec(),
        initial: name(s.initial()),
        colors: (0..s.num_states()).filter_map(|i| s.color(i).map(|c| (name(i), c.to_owned()))).collect(),
        edges: s.edges().iter().map(|e| EdgeDoc { from: name(e.src), label: e.label.clone(), to: name(e.dst) }).collect(),
        marks: s.marks().iter().map(|(m, set)| (m.clone(), set.iter().map(|&i| name(i)).collect())).collect(),
    }
}

/// Pretty-printed JSON for a system, newline-terminated.
pub fn system_to_json(s: &TransitionSystem) -> String {
    let mut out = serde_json::to_string_pretty(&system_doc(s)).expect("system serializes");
    out.push('\n');
    out
}

pub fn system_to_value(s: &TransitionSystem) -> serde_json::Value {
    serde_json::to_value(system_doc(s)).expect("system serializes")
}

pub fn parse_system(text: &str) -> Result<TransitionSystem> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(syntax)?;
    let mut s = TransitionSystem::from_parts(
        doc.states.clone(),
        &doc.initial,
        doc.colors,
        doc.edges.into_iter().map(|e| (e.from, e.label, e.to)),
    )?;
    if !doc.marks.is_empty() {
        let mut b = SystemBuilder::new();
        s.copy_into(&mut b, "");
        for (m, names) in doc.marks {
            for n in names {
                let i = s.state_index(&n).ok_or_else(|| Error::Invalid(format!("mark `{m}` names undeclared state `{n}`")))?;
                b.mark(m.clone(), i);
            }
        }
        s = b.build(s.initial());
    }
    Ok(s)
}

fn lasso_doc(l: &Lasso) -> LassoDoc {
    LassoDoc { tail: l.tail().clone(), loop_: l.loop_path().clone() }
}

fn klasso_doc(k: &KLasso) -> KLassoDoc {
    KLassoDoc {
        main: lasso_doc(&k.main),
        attachments: k
            .attachments
            .iter()
            .flat_map(|(&v, atts)| atts.iter().map(move |a| AttachmentDoc { vertex: v, label: a.label.clone(), sub: klasso_doc(&a.sub) }))
            .collect(),
    }
}

fn klasso_from_doc(d: KLassoDoc) -> Result<KLasso> {
    let main = Lasso::new(d.main.tail, d.main.loop_)?;
    let mut k = KLasso::from(main);
    for a in d.attachments {
        if a.vertex >= k.main.num_vertices() {
            return Err(Error::Invalid(format!("attachment vertex {} is out of range", a.vertex)));
        }
        let sub = klasso_from_doc(a.sub)?;
        k.attachments.entry(a.vertex).or_default().push(Attachment { label: a.label, sub });
    }
    Ok(k)
}

pub fn lasso_to_json(l: &Lasso) -> String {
    let mut out = serde_json::to_string_pretty(&lasso_doc(l)).expect("lasso serializes");
    out.push('\n');
    out
}

pub fn parse_lasso(text: &str) -> Result<Lasso> {
    let doc: LassoDoc = serde_json::from_str(text).map_err(syntax)?;
    Lasso::new(doc.tail, doc.loop_)
}

pub fn klasso_to_json(k: &KLasso) -> String {
    let mut out = serde_json::to_string_pretty(&klasso_doc(k)).expect("k-lasso serializes");
    out.push('\n');
    out
}

pub fn parse_klasso(text: &str) -> Result<KLasso> {
    klasso_from_doc(serde_json::from_str(text).map_err(syntax)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EncodedDoc {
    rank: usize,
    skeleton: SystemDoc,
    #[serde(default)]
    labels: BTreeMap<String, BTreeSet<String>>,
    #[serde(default)]
    dictionary: BTreeMap<String, EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    #[serde(rename = "type", default)]
    type_: String,
    system: SystemDoc,
}

fn system_from_doc(doc: SystemDoc) -> Result<TransitionSystem> {
    // round-trip through the value so marks are handled in one place
    parse_system(&serde_json::to_string(&doc).expect("system serializes"))
}

/// A serialized encoding: the skeleton, per-state label names and one
/// representative per name. Names are `k0`, `k1`, ... in dictionary order.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub rank: usize,
    pub skeleton: TransitionSystem,
    pub labels: Vec<BTreeSet<String>>,
    pub dictionary: BTreeMap<String, TransitionSystem>,
}

impl Encoding {
    pub fn decode(&self) -> Result<TransitionSystem> {
        decode_parts(&self.skeleton, &self.labels, &self.dictionary)
    }
}

pub fn encoded_to_json(e: &EncodedSystem) -> String {
    let names: BTreeMap<_, String> = e.dictionary.keys().enumerate().map(|(i, k)| (k, format!("k{i}"))).collect();
    let s = &e.skeleton;
    let doc = EncodedDoc {
        rank: e.rank,
        skeleton: system_doc(s),
        labels: (0..s.num_states())
            .filter(|&v| !e.labels[v].is_empty())
            .map(|v| (s.state_name(v).to_owned(), e.labels[v].iter().map(|k| names[k].clone()).collect()))
            .collect(),
        dictionary: e
            .dictionary
            .iter()
            .map(|(k, rep)| (names[k].clone(), EntryDoc { type_: k.to_string(), system: system_doc(rep) }))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("encoding serializes");
    out.push('\n');
    out
}

pub fn parse_encoded(text: &str) -> Result<Encoding> {
    let doc: EncodedDoc = serde_json::from_str(text).map_err(syntax)?;
    let skeleton = system_from_doc(doc.skeleton)?;
    let mut labels = vec![BTreeSet::new(); skeleton.num_states()];
    for (name, set) in doc.labels {
        let v = skeleton.state_index(&name).ok_or_else(|| Error::Invalid(format!("label for undeclared state `{name}`")))?;
        labels[v] = set;
    }
    let dictionary = doc
        .dictionary
        .into_iter()
        .map(|(k, entry)| Ok((k, system_from_doc(entry.system)?)))
        .collect::<Result<_>>()?;
    Ok(Encoding { rank: doc.rank, skeleton, labels, dictionary })
}
