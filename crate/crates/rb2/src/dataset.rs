//! Dataset directories: `modes.txt`, `facts.pl`, `examples.pl`.
//!
//! `modes.txt` declares the schema and the refinement language, one
//! statement per line, `%` starting a comment:
//!
//! ```text
//! type: willclick(user,movie).
//! target: willclick/2 label 2.
//! mode: friends(+user,-user) [max 2].
//! mode: genre(+movie,#genre).
//! constants: movie(m0,m1).
//! ```
//!
//! `type:` and `mode:` both fix a predicate's argument types; the first
//! declaration wins and later ones must agree. The label position of the
//! target is 1-based and defaults to the last argument. `[max N]` bounds how
//! often a mode's predicate may appear on one tree path (default 2).
//! `constants:` lines intern constants in order before any fact is read.
//!
//! `facts.pl` holds ground facts such as `friends(u1,u2).`. `examples.pl`
//! holds target atoms, one per correct label; `_` at the label position
//! records a context without a correct label, which is dropped on load.
//! Unquoted constants start with a lowercase letter or a digit; anything
//! else is written in single quotes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rb2_core::data::{Dataset, Example, FactDelta};
use rb2_core::logic::{ConstId, FactStore, GroundAtom, PredId, Schema, TypeId};
use rb2_core::tilde::{ArgMode, Language, ModeDeclaration};

use crate::text::{expect_end, parse_atom, strip_comment, write_atom, Arg};
use crate::{Error, Result};

pub const FACTS_FILE: &str = "facts.pl";
pub const EXAMPLES_FILE: &str = "examples.pl";
pub const MODES_FILE: &str = "modes.txt";

/// Occurrence bound of a mode written without `[max N]`.
pub const DEFAULT_MAX_OCCURRENCES: usize = 2;

/// Parsed `modes.txt`.
#[derive(Clone, Debug)]
pub struct ModeFile {
    pub schema: Schema,
    pub language: Language,
    /// Zero-based.
    pub label_position: usize,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l))).filter(|(_, l)| !l.is_empty())
}

pub fn parse_modes(text: &str, file: &str) -> Result<ModeFile> {
    let mut schema = Schema::new();
    let mut modes = Vec::new();
    let mut target: Option<(PredId, usize)> = None;
    let mut target_line = 0;
    for (n, line) in lines(text) {
        let err = |m: String| Error::parse(file, n, m);
        let (keyword, body) = line.split_once(':').ok_or_else(|| err("expected `keyword: ...`".into()))?;
        match keyword.trim() {
            "type" => {
                let (name, args, rest) = parse_atom(body).map_err(err)?;
                expect_end(rest).map_err(err)?;
                let types: Vec<&str> = args.iter().map(|a| a.text.as_str()).collect();
                schema.declare_predicate(&name, &types).map_err(|e| err(e.to_string()))?;
            }
            "mode" => {
                let (name, args, rest) = parse_atom(body).map_err(err)?;
                let mut arg_modes = Vec::with_capacity(args.len());
                let mut types = Vec::with_capacity(args.len());
                for a in &args {
                    let (m, ty) = split_mode(&a.text).ok_or_else(|| err(format!("bad mode argument `{}`", a.text)))?;
                    arg_modes.push(m);
                    types.push(ty);
                }
                let (max, rest) = parse_max(rest).map_err(err)?;
                expect_end(rest).map_err(err)?;
                let pred = schema.declare_predicate(&name, &types).map_err(|e| err(e.to_string()))?;
                modes.push(ModeDeclaration { pred, modes: arg_modes, max_occurrences: max });
            }
            "target" => {
                if target.is_some() {
                    return Err(err("second `target:` statement".into()));
                }
                let body = body.trim().strip_suffix('.').ok_or_else(|| err("expected `.`".into()))?;
                let mut words = body.split_whitespace();
                let spec = words.next().ok_or_else(|| err("missing target".into()))?;
                let (name, arity) = spec.split_once('/').ok_or_else(|| err("expected `name/arity`".into()))?;
                let arity: usize = arity.parse().map_err(|_| err(format!("bad arity `{arity}`")))?;
                let label = match (words.next(), words.next(), words.next()) {
                    (None, _, _) => arity,
                    (Some("label"), Some(k), None) => {
                        k.parse().map_err(|_| err(format!("bad label position `{k}`")))?
                    }
                    _ => return Err(err("expected `target: name/arity [label K].`".into())),
                };
                let pred =
                    schema.predicate(name).ok_or_else(|| err(format!("target `{name}` has no `type:` declaration")))?;
                if schema.signature(pred).arity() != arity {
                    return Err(err(format!("target `{name}` declared with arity {}", schema.signature(pred).arity())));
                }
                if label == 0 || label > arity {
                    return Err(err(format!("label position {label} outside 1..={arity}")));
                }
                target = Some((pred, label - 1));
                target_line = n;
            }
            "constants" => {
                let (ty, args, rest) = parse_atom(body).map_err(err)?;
                expect_end(rest).map_err(err)?;
                let ty = schema.declare_type(&ty);
                for a in &args {
                    schema.constant(&a.text, ty).map_err(|e| err(e.to_string()))?;
                }
            }
            other => return Err(err(format!("unknown statement `{other}:`"))),
        }
    }
    let (target, label_position) = target.ok_or_else(|| Error::parse(file, 0, "no `target:` statement"))?;
    let language = Language::new(target, modes);
    language.validate(&schema).map_err(|e| Error::parse(file, target_line, e.to_string()))?;
    Ok(ModeFile { schema, language, label_position })
}

fn split_mode(arg: &str) -> Option<(ArgMode, &str)> {
    let mut chars = arg.chars();
    let mode = match chars.next()? {
        '+' => ArgMode::Input,
        '-' => ArgMode::Output,
        '#' => ArgMode::Constant,
        _ => return None,
    };
    let ty = chars.as_str();
    (!ty.is_empty() && ty.chars().all(crate::text::is_name_char)).then_some((mode, ty))
}

fn parse_max(rest: &str) -> std::result::Result<(usize, &str), String> {
    let rest = rest.trim_start();
    let Some(inner) = rest.strip_prefix('[') else {
        return Ok((DEFAULT_MAX_OCCURRENCES, rest));
    };
    let close = inner.find(']').ok_or("expected `]`")?;
    let n = inner[..close]
        .trim()
        .strip_prefix("max")
        .and_then(|n| n.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or("expected `[max N]` with N >= 1")?;
    Ok((n, &inner[close + 1..]))
}

fn constant_arg(a: &Arg) -> std::result::Result<&str, String> {
    if a.quoted || crate::text::is_plain_constant(&a.text) {
        Ok(&a.text)
    } else {
        Err(format!("`{}` is not a constant (quote it)", a.text))
    }
}

/// Resolves `pred(args).` against the schema, interning new constants with
/// the position types.
fn parse_ground(line: &str, schema: &mut Schema) -> std::result::Result<GroundAtom, String> {
    let (name, args, rest) = parse_atom(line)?;
    expect_end(rest)?;
    let names = args.iter().map(constant_arg).collect::<std::result::Result<Vec<_>, _>>()?;
    schema.ground(&name, &names).map_err(|e| e.to_string())
}

/// Adds the facts in `text` to `store`; returns how many were new.
pub fn parse_facts(text: &str, file: &str, store: &mut FactStore) -> Result<usize> {
    let mut added = 0;
    for (n, line) in lines(text) {
        let fact = parse_ground(line, store.schema_mut()).map_err(|m| Error::parse(file, n, m))?;
        added += usize::from(store.add_fact(fact).map_err(|e| Error::parse(file, n, e.to_string()))?);
    }
    Ok(added)
}

/// Groups target atoms into examples, in order of first appearance.
pub fn parse_examples(
    text: &str,
    file: &str,
    schema: &mut Schema,
    target: PredId,
    label_position: usize,
) -> Result<Vec<Example>> {
    let mut order: Vec<Example> = Vec::new();
    let mut index: BTreeMap<Vec<ConstId>, usize> = BTreeMap::new();
    for (n, line) in lines(text) {
        let err = |m: String| Error::parse(file, n, m);
        let (name, args, rest) = parse_atom(line).map_err(err)?;
        expect_end(rest).map_err(err)?;
        if schema.predicate(&name) != Some(target) {
            return Err(err(format!("`{name}` is not the target predicate")));
        }
        let sig = schema.signature(target).clone();
        if args.len() != sig.arity() {
            return Err(err(format!("`{name}` expects {} arguments, found {}", sig.arity(), args.len())));
        }
        let mut context = Vec::with_capacity(args.len() - 1);
        let mut label = None;
        for (i, (a, &ty)) in args.iter().zip(&sig.arg_types).enumerate() {
            if i == label_position && !a.quoted && a.text == "_" {
                continue;
            }
            let c = schema.constant(constant_arg(a).map_err(err)?, ty).map_err(|e| err(e.to_string()))?;
            if i == label_position {
                label = Some(c);
            } else {
                context.push(c);
            }
        }
        let slot = *index.entry(context.clone()).or_insert_with(|| {
            order.push(Example { context, labels: Default::default() });
            order.len() - 1
        });
        order[slot].labels.extend(label);
    }
    Ok(order)
}

/// Parses `t: add pred(args).` lines.
pub fn parse_schedule(text: &str, file: &str, schema: &mut Schema) -> Result<Vec<FactDelta>> {
    let mut out = Vec::new();
    for (n, line) in lines(text) {
        let err = |m: String| Error::parse(file, n, m);
        let (t, body) = line.split_once(':').ok_or_else(|| err("expected `t: add fact.`".into()))?;
        let t: usize = t.trim().parse().map_err(|_| err(format!("bad timestep `{}`", t.trim())))?;
        let body = body.trim_start().strip_prefix("add").ok_or_else(|| err("only `add` is supported".into()))?;
        let fact = parse_ground(body, schema).map_err(err)?;
        out.push(FactDelta { t, fact });
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn file_label(path: &Path) -> String {
    path.display().to_string()
}

/// Loads the three files of a dataset. The dataset is named after the
/// directory of the facts file.
pub fn load_dataset_files(facts: &Path, examples: &Path, modes: &Path) -> Result<Dataset> {
    let m = parse_modes(&read(modes)?, &file_label(modes))?;
    let mut store = FactStore::new(m.schema);
    parse_facts(&read(facts)?, &file_label(facts), &mut store)?;
    let target = m.language.target;
    let ex = parse_examples(&read(examples)?, &file_label(examples), store.schema_mut(), target, m.label_position)?;
    let name = facts
        .parent()
        .and_then(|p| p.file_name())
        .map_or_else(|| "dataset".to_string(), |n| n.to_string_lossy().into_owned());
    let (ds, _) = Dataset::new(name, store, m.language, m.label_position, ex).map_err(|e| match e {
        rb2_core::Error::NoExamples => Error::Invalid(format!("{}: no examples", file_label(examples))),
        e => e.into(),
    })?;
    Ok(ds)
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    if !dir.is_dir() {
        return Err(Error::Invalid(format!("{}: dataset directory not found", dir.display())));
    }
    load_dataset_files(&dir.join(FACTS_FILE), &dir.join(EXAMPLES_FILE), &dir.join(MODES_FILE))
}

/// Reads a schedule file against the dataset's schema.
pub fn load_schedule(path: &Path, dataset: &mut Dataset) -> Result<Vec<FactDelta>> {
    parse_schedule(&read(path)?, &file_label(path), dataset.store.schema_mut())
}

pub fn render_modes(ds: &Dataset) -> String {
    let schema = ds.store.schema();
    let mut out = String::new();
    for (_, sig) in schema.predicates() {
        let types = sig.arg_types.iter().map(|&t| schema.type_name(t));
        write_plain_atom(&mut out, "type: ", &sig.name, types);
        out.push_str(".\n");
    }
    let target = schema.signature(ds.target());
    out.push_str(&format!("target: {}/{} label {}.\n", target.name, target.arity(), ds.label_position + 1));
    for m in &ds.language.modes {
        let sig = schema.signature(m.pred);
        let args: Vec<String> = m
            .modes
            .iter()
            .zip(&sig.arg_types)
            .map(|(md, &t)| format!("{}{}", md.symbol(), schema.type_name(t)))
            .collect();
        write_plain_atom(&mut out, "mode: ", &sig.name, args.iter().map(String::as_str));
        out.push_str(&format!(" [max {}].\n", m.max_occurrences));
    }
    let mut run: Option<(TypeId, Vec<&str>)> = None;
    let flush = |out: &mut String, run: &mut Option<(TypeId, Vec<&str>)>| {
        if let Some((ty, names)) = run.take() {
            out.push_str("constants: ");
            write_atom(out, schema.type_name(ty), names);
            out.push_str(".\n");
        }
    };
    for id in 0..schema.num_constants() as u32 {
        let c = ConstId(id);
        let ty = schema.constant_type(c);
        if run.as_ref().is_none_or(|(t, _)| *t != ty) {
            flush(&mut out, &mut run);
            run = Some((ty, Vec::new()));
        }
        if let Some((_, names)) = run.as_mut() {
            names.push(schema.constant_name(c));
        }
    }
    flush(&mut out, &mut run);
    out
}

fn write_plain_atom<'a>(out: &mut String, prefix: &str, name: &str, args: impl Iterator<Item = &'a str>) {
    out.push_str(prefix);
    out.push_str(name);
    out.push('(');
    for (i, a) in args.enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(a);
    }
    out.push(')');
}

pub fn render_facts(store: &FactStore) -> String {
    let schema = store.schema();
    let mut out = String::new();
    for f in store.facts() {
        write_atom(&mut out, schema.predicate_name(f.pred), f.args.iter().map(|&c| schema.constant_name(c)));
        out.push_str(".\n");
    }
    out
}

pub fn render_examples(ds: &Dataset) -> String {
    let schema = ds.store.schema();
    let name = schema.predicate_name(ds.target());
    let mut out = String::new();
    for ex in &ds.examples {
        for &label in &ex.labels {
            write_atom(&mut out, name, ds.query(&ex.context, label).args.iter().map(|&c| schema.constant_name(c)));
            out.push_str(".\n");
        }
    }
    out
}

pub fn render_schedule(deltas: &[FactDelta], schema: &Schema) -> String {
    let mut out = String::new();
    for d in deltas {
        out.push_str(&format!("{}: add ", d.t));
        write_atom(&mut out, schema.predicate_name(d.fact.pred), d.fact.args.iter().map(|&c| schema.constant_name(c)));
        out.push_str(".\n");
    }
    out
}

/// Writes the three dataset files into `dir`, creating it if needed.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (file, body) in
        [(MODES_FILE, render_modes(ds)), (FACTS_FILE, render_facts(&ds.store)), (EXAMPLES_FILE, render_examples(ds))]
    {
        let path = dir.join(file);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
