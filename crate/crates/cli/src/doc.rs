//! Workbench documents: named objects, morphisms and spaces, and a list of
//! queries run in order against one backend.

use std::collections::HashMap;
use std::sync::Arc;

use markov_spaces::finstoch::FinStoch;
use markov_spaces::gauss::Gauss;
use markov_spaces::independence::Square;
use markov_spaces::setmulti::SetMulti;
use markov_spaces::sheaves::SheafOps;
use markov_spaces::spaces::{SampleSpace, SpaceMorphism};
use markov_spaces::strongname::StrongName;
use markov_spaces::{Fallback, Markov, MarkovOps};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Instance {
    Finstoch,
    Gauss,
    Setmulti,
    Strongname,
}

impl Instance {
    pub fn parse(s: &str) -> Option<Instance> {
        serde_json::from_value(Value::String(s.to_string())).ok()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkbenchDoc {
    pub instance: Instance,
    #[serde(default)]
    pub objects: Map<String, Value>,
    #[serde(default)]
    pub morphisms: Map<String, Value>,
    #[serde(default)]
    pub spaces: Map<String, Value>,
    #[serde(default)]
    pub queries: Vec<Value>,
}

/// A validation error, located by a JSON pointer into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invalid {
    pub code: String,
    pub pointer: String,
    pub message: String,
}

impl Invalid {
    fn new(code: &str, pointer: &str, message: impl Into<String>) -> Invalid {
        Invalid { code: code.to_string(), pointer: pointer.to_string(), message: message.into() }
    }

    fn lib(pointer: &str, e: markov_spaces::Error) -> Invalid {
        Invalid::new(e.code(), pointer, e.to_string())
    }

    fn to_json(&self) -> Value {
        json!({ "code": self.code, "pointer": self.pointer, "message": self.message })
    }
}

type Res<T> = Result<T, Invalid>;

pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

/// Parses and runs a document; `tol` only affects the Gaussian backend.
pub fn run_source(source: &str, tol: Option<f64>) -> Outcome {
    let doc: WorkbenchDoc = match serde_json::from_str(source) {
        Ok(d) => d,
        Err(e) => {
            let err = Invalid::new("invalid_document", "", e.to_string());
            return Outcome { report: json!({ "ok": false, "error": err.to_json() }), exit_code: 2 };
        }
    };
    run_document(&doc, tol)
}

pub fn run_document(doc: &WorkbenchDoc, tol: Option<f64>) -> Outcome {
    match doc.instance {
        Instance::Finstoch => Session::new(&FinStoch).run(doc),
        Instance::Setmulti => Session::new(&SetMulti).run(doc),
        Instance::Strongname => Session::new(&StrongName).run(doc),
        Instance::Gauss => {
            let m = tol.map(Gauss::with_tol).unwrap_or_default();
            Session::new(&m).run(doc)
        }
    }
}

/// Backends whose payloads have a JSON form.
pub trait Payload: Markov {
    fn parse_mor(&self, v: &Value) -> Result<Self::Mor, String>;
    fn show_mor(&self, f: &Self::Mor) -> Value;
    fn parse_obj(&self, v: &Value) -> Result<Self::Obj, String>;
}

impl<M> Payload for M
where
    M: Markov,
    M::Mor: Serialize + DeserializeOwned,
    M::Obj: DeserializeOwned,
{
    fn parse_mor(&self, v: &Value) -> Result<M::Mor, String> {
        M::Mor::deserialize(v).map_err(|e| e.to_string())
    }

    fn show_mor(&self, f: &M::Mor) -> Value {
        serde_json::to_value(f).expect("payloads serialize")
    }

    fn parse_obj(&self, v: &Value) -> Result<M::Obj, String> {
        M::Obj::deserialize(v).map_err(|e| e.to_string())
    }
}

struct Session<'a, M: Markov> {
    m: &'a M,
    objects: HashMap<String, M::Obj>,
    morphisms: HashMap<String, M::Mor>,
    spaces: HashMap<String, Arc<SampleSpace<M>>>,
}

fn child(pointer: &str, key: impl std::fmt::Display) -> String {
    let key = key.to_string().replace('~', "~0").replace('/', "~1");
    format!("{pointer}/{key}")
}

fn field<'v>(q: &'v Map<String, Value>, key: &str, pointer: &str) -> Res<&'v Value> {
    q.get(key).ok_or_else(|| Invalid::new("missing_field", &child(pointer, key), format!("missing field {key:?}")))
}

const BUILDERS: [&str; 9] = ["id", "copy", "del", "swap", "proj1", "proj2", "compose", "tensor", "pair"];

impl<'a, M: Payload + SheafOps> Session<'a, M> {
    fn new(m: &'a M) -> Self {
        Session { m, objects: HashMap::new(), morphisms: HashMap::new(), spaces: HashMap::new() }
    }

    fn run(mut self, doc: &WorkbenchDoc) -> Outcome {
        let mut results = Vec::new();
        let mut failed = false;
        let error = match self.declare(doc) {
            Err(e) => Some(e),
            Ok(()) => {
                let mut error = None;
                for (i, q) in doc.queries.iter().enumerate() {
                    match self.query(q, &format!("/queries/{i}")) {
                        Ok(r) => {
                            failed |= r.get("pass") == Some(&Value::Bool(false));
                            results.push(r);
                        }
                        Err(e) => {
                            error = Some(e);
                            break;
                        }
                    }
                }
                error
            }
        };
        let mut report = Map::new();
        report.insert("instance".into(), serde_json::to_value(doc.instance).expect("instance"));
        report.insert("ok".into(), Value::Bool(error.is_none() && !failed));
        report.insert("results".into(), Value::Array(results));
        let exit_code = match &error {
            Some(e) => {
                report.insert("error".into(), e.to_json());
                2
            }
            None if failed => 1,
            None => 0,
        };
        Outcome { report: Value::Object(report), exit_code }
    }

    fn declare(&mut self, doc: &WorkbenchDoc) -> Res<()> {
        for (name, v) in &doc.objects {
            let x = self.object(v, &child("/objects", name))?;
            self.objects.insert(name.clone(), x);
        }
        for (name, v) in &doc.morphisms {
            let f = self.morphism(v, &child("/morphisms", name))?;
            self.morphisms.insert(name.clone(), f);
        }
        for (name, v) in &doc.spaces {
            let s = self.space_expr(v, &child("/spaces", name))?;
            self.spaces.insert(name.clone(), s);
        }
        Ok(())
    }

    fn object(&self, v: &Value, pointer: &str) -> Res<M::Obj> {
        if let Value::String(name) = v {
            return self
                .objects
                .get(name)
                .cloned()
                .ok_or_else(|| Invalid::new("unresolved_name", pointer, format!("no object named {name:?}")));
        }
        self.m.parse_obj(v).map_err(|e| Invalid::new("invalid_object", pointer, e))
    }

    fn objects2(&self, v: &Value, pointer: &str) -> Res<(M::Obj, M::Obj)> {
        match v {
            Value::Array(xs) if xs.len() == 2 => {
                Ok((self.object(&xs[0], &child(pointer, 0))?, self.object(&xs[1], &child(pointer, 1))?))
            }
            _ => Err(Invalid::new("invalid_document", pointer, "expected a pair of objects")),
        }
    }

    fn morphisms_list(&self, v: &Value, pointer: &str) -> Res<Vec<M::Mor>> {
        match v {
            Value::Array(fs) if !fs.is_empty() => {
                fs.iter().enumerate().map(|(i, f)| self.morphism(f, &child(pointer, i))).collect()
            }
            _ => Err(Invalid::new("invalid_document", pointer, "expected a nonempty list of morphisms")),
        }
    }

    /// A name (a space name stands for its state), a payload, or a one-key builder such as `{"id": "X"}` or
    /// `{"compose": ["g", "f"]}` (which means `g ∘ f`).
    fn morphism(&self, v: &Value, pointer: &str) -> Res<M::Mor> {
        let m = self.m;
        if let Value::String(name) = v {
            let space_state = || self.spaces.get(name).map(|s| s.state().clone());
            return self
                .morphisms
                .get(name)
                .cloned()
                .or_else(space_state)
                .ok_or_else(|| Invalid::new("unresolved_name", pointer, format!("no morphism named {name:?}")));
        }
        let builder = match v {
            Value::Object(o) if o.len() == 1 => o.iter().next().filter(|(k, _)| BUILDERS.contains(&k.as_str())),
            _ => None,
        };
        let Some((key, arg)) = builder else {
            return m.parse_mor(v).map_err(|e| Invalid::new("invalid_morphism", pointer, e));
        };
        let at = child(pointer, key);
        let lib = |r: markov_spaces::Result<M::Mor>| r.map_err(|e| Invalid::lib(&at, e));
        Ok(match key.as_str() {
            "id" => m.id(&self.object(arg, &at)?),
            "copy" => m.copy(&self.object(arg, &at)?),
            "del" => m.del(&self.object(arg, &at)?),
            "swap" => {
                let (x, y) = self.objects2(arg, &at)?;
                m.swap(&x, &y)
            }
            "proj1" => {
                let (x, y) = self.objects2(arg, &at)?;
                m.proj1(&x, &y)
            }
            "proj2" => {
                let (x, y) = self.objects2(arg, &at)?;
                m.proj2(&x, &y)
            }
            "compose" => {
                let fs = self.morphisms_list(arg, &at)?;
                let mut acc = fs.last().expect("nonempty").clone();
                for g in fs.iter().rev().skip(1) {
                    acc = lib(m.compose(g, &acc))?;
                }
                acc
            }
            "tensor" => {
                let fs = self.morphisms_list(arg, &at)?;
                fs[1..].iter().fold(fs[0].clone(), |acc, g| m.tensor(&acc, g))
            }
            "pair" => {
                let fs = self.morphisms_list(arg, &at)?;
                let mut acc = fs[0].clone();
                for g in &fs[1..] {
                    acc = lib(m.pair(&acc, g))?;
                }
                acc
            }
            _ => unreachable!("builder keys are listed"),
        })
    }

    /// A declared space, or a state (by name or payload) made into one.
    fn space_expr(&self, v: &Value, pointer: &str) -> Res<Arc<SampleSpace<M>>> {
        if let Value::String(name) = v {
            if let Some(s) = self.spaces.get(name) {
                return Ok(s.clone());
            }
        }
        let p = self.morphism(v, pointer)?;
        self.m.mk_space(p).map_err(|e| Invalid::lib(pointer, e))
    }

    /// The `space` field of a query, defaulting to the only declared space.
    fn space(&self, q: &Map<String, Value>, pointer: &str) -> Res<Arc<SampleSpace<M>>> {
        match q.get("space") {
            Some(v) => self.space_expr(v, &child(pointer, "space")),
            None if self.spaces.len() == 1 => Ok(self.spaces.values().next().expect("one space").clone()),
            None => Err(Invalid::new(
                "missing_field",
                &child(pointer, "space"),
                "a space is required when the document does not declare exactly one",
            )),
        }
    }

    fn mor_field(&self, q: &Map<String, Value>, key: &str, pointer: &str) -> Res<M::Mor> {
        self.morphism(field(q, key, pointer)?, &child(pointer, key))
    }

    /// `f` as a map out of `space`, into the pushed-forward space.
    fn map_from(&self, space: &Arc<SampleSpace<M>>, q: &Map<String, Value>, key: &str, pointer: &str) -> Res<SpaceMorphism<M>> {
        let f = self.mor_field(q, key, pointer)?;
        self.m.push_forward_map(space, f).map_err(|e| Invalid::lib(&child(pointer, key), e))
    }

    fn element(&self, space: &Arc<SampleSpace<M>>, q: &Map<String, Value>, key: &str, pointer: &str) -> Res<markov_spaces::sheaves::RandomElement<M>> {
        let x = self.mor_field(q, key, pointer)?;
        self.m.random_element(space, x).map_err(|e| Invalid::lib(&child(pointer, key), e))
    }

    fn query(&mut self, v: &Value, pointer: &str) -> Res<Value> {
        let Value::Object(q) = v else {
            return Err(Invalid::new("invalid_document", pointer, "a query is an object"));
        };
        let op = match field(q, "op", pointer)? {
            Value::String(s) => s.as_str(),
            _ => return Err(Invalid::new("invalid_document", &child(pointer, "op"), "op is a string")),
        };
        let mut out = Map::new();
        out.insert("op".into(), Value::String(op.to_string()));
        let answer = match self.answer(op, q, pointer) {
            Ok(a) => a,
            Err(e) => match q.get("expect_error") {
                Some(Value::String(code)) if e.code != "unknown_op" && e.code != "unresolved_name" => {
                    out.insert("error".into(), Value::String(e.code.clone()));
                    out.insert("pass".into(), Value::Bool(*code == e.code));
                    return Ok(Value::Object(out));
                }
                _ => return Err(e),
            },
        };
        if q.contains_key("expect_error") {
            out.insert("pass".into(), Value::Bool(false));
        }
        let (key, value, stored) = answer;
        if let Some(expected) = q.get("expect") {
            let pass = match &stored {
                Some(f) => {
                    let e = self.morphism(expected, &child(pointer, "expect"))?;
                    let m = self.m;
                    m.dom(f) == m.dom(&e) && m.cod(f) == m.cod(&e) && m.mor_eq(f, &e)
                }
                None => &value[key] == expected,
            };
            out.insert("pass".into(), Value::Bool(pass));
        }
        if let (Some(name), Some(f)) = (q.get("as"), stored) {
            let Value::String(name) = name else {
                return Err(Invalid::new("invalid_document", &child(pointer, "as"), "as is a string"));
            };
            self.morphisms.insert(name.clone(), f);
            out.insert("as".into(), Value::String(name.clone()));
        }
        if let Value::Object(fields) = value {
            out.extend(fields);
        }
        Ok(Value::Object(out))
    }

    /// The answer object, the key `expect` is compared against, and the
    /// morphism to store under `as`, if the answer is one.
    fn answer(&self, op: &str, q: &Map<String, Value>, pointer: &str) -> Res<(&'static str, Value, Option<M::Mor>)> {
        let m = self.m;
        let lib = |e: markov_spaces::Error| Invalid::lib(pointer, e);
        let fallback = match q.get("fallback") {
            None => Fallback::Canonical,
            Some(v) => Fallback::deserialize(v)
                .map_err(|e| Invalid::new("invalid_document", &child(pointer, "fallback"), e.to_string()))?,
        };
        let morphism = |f: M::Mor| Ok(("morphism", json!({ "morphism": m.show_mor(&f) }), Some(f)));
        match op {
            "eval" => morphism(self.mor_field(q, "f", pointer)?),
            "equal" => {
                let f = self.mor_field(q, "f", pointer)?;
                let g = self.mor_field(q, "g", pointer)?;
                let eq = if q.contains_key("space") {
                    let s = self.space(q, pointer)?;
                    m.as_equal(&f, &g, s.state()).map_err(lib)?
                } else {
                    m.dom(&f) == m.dom(&g) && m.cod(&f) == m.cod(&g) && m.mor_eq(&f, &g)
                };
                Ok(("equal", json!({ "equal": eq }), None))
            }
            "deterministic" => {
                let f = self.mor_field(q, "f", pointer)?;
                let d = if q.contains_key("space") {
                    let s = self.space(q, pointer)?;
                    m.as_deterministic(&f, s.state()).map_err(lib)?
                } else {
                    m.is_deterministic(&f)
                };
                Ok(("deterministic", json!({ "deterministic": d }), None))
            }
            "conditional" => {
                let f = self.mor_field(q, "f", pointer)?;
                let x = self.object(field(q, "x", pointer)?, &child(pointer, "x"))?;
                let y = self.object(field(q, "y", pointer)?, &child(pointer, "y"))?;
                morphism(m.conditional_with(&f, &x, &y, fallback).map_err(lib)?)
            }
            "dagger" => {
                let s = self.space(q, pointer)?;
                let f = self.mor_field(q, "f", pointer)?;
                let f = m.push_forward(&s, f).map_err(lib)?;
                morphism(m.dagger_with(&f, fallback).map_err(lib)?.rep().clone())
            }
            "unitary" => {
                let s = self.space(q, pointer)?;
                let f = self.mor_field(q, "f", pointer)?;
                let f = m.push_forward(&s, f).map_err(lib)?;
                Ok(("unitary", json!({ "unitary": m.is_unitary(&f).map_err(lib)? }), None))
            }
            "independent" => {
                let s = self.space(q, pointer)?;
                let at = child(pointer, "square");
                let Value::Object(sq) = field(q, "square", pointer)? else {
                    return Err(Invalid::new("invalid_document", &at, "square is an object"));
                };
                let f = self.map_from(&s, sq, "f", &at)?;
                let g = self.map_from(&s, sq, "g", &at)?;
                let u = self.map_from(f.cod(), sq, "u", &at)?;
                let v = self.map_from(g.cod(), sq, "v", &at)?;
                let square: Square<M> = m.square(f, g, u, v).map_err(lib)?;
                let verdict = m.is_independent(&square).map_err(lib)?;
                let mut agree = true;
                for fb in [Fallback::Canonical, Fallback::Alternate] {
                    agree &= m.criteria(&square, fb).map_err(lib)?.verdict() == Some(verdict);
                }
                Ok(("independent", json!({ "independent": verdict, "criteria_agree": agree }), None))
            }
            "relative_product" => {
                let x = self.space_expr(field(q, "x", pointer)?, &child(pointer, "x"))?;
                let y = self.space_expr(field(q, "y", pointer)?, &child(pointer, "y"))?;
                let u = self.map_from(&x, q, "u", pointer)?;
                let v = self.map_from(&y, q, "v", pointer)?;
                let cs = m.cospan(u, v).map_err(lib)?;
                let r = m.relative_product(&cs).map_err(lib)?;
                let p = r.omega().state().clone();
                Ok(("state", json!({ "state": m.show_mor(&p) }), Some(p)))
            }
            "law" => {
                let s = self.space(q, pointer)?;
                let x = self.element(&s, q, "X", pointer)?;
                let p = m.law(&x).map_err(lib)?;
                Ok(("state", json!({ "state": m.show_mor(&p) }), Some(p)))
            }
            "restrict" => {
                let s = self.space(q, pointer)?;
                let pi = self.map_from(&s, q, "pi", pointer)?;
                let x = self.mor_field(q, "X", pointer)?;
                let x = m.random_element(pi.cod(), x).map_err(|e| Invalid::lib(&child(pointer, "X"), e))?;
                morphism(m.restrict(&x, &pi).map_err(lib)?.rep().clone())
            }
            "invariant" => {
                let s = self.space(q, pointer)?;
                let y = self.element(&s, q, "Y", pointer)?;
                let pi = self.map_from(&s, q, "pi", pointer)?;
                Ok(("invariant", json!({ "invariant": m.is_invariant(&y, &pi).map_err(lib)? }), None))
            }
            "glue" => {
                let s = self.space(q, pointer)?;
                let y = self.element(&s, q, "Y", pointer)?;
                let pi = self.map_from(&s, q, "pi", pointer)?;
                morphism(m.glue(&y, &pi).map_err(lib)?.rep().clone())
            }
            _ => Err(Invalid::new("unknown_op", &child(pointer, "op"), format!("unknown op {op:?}"))),
        }
    }
}

/// The report as emitted on stdout.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
