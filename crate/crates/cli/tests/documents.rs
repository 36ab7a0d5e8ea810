use markov_spaces::finstoch::FinStoch;
use markov_spaces::gauss::Gauss;
use markov_spaces::strongname::StrongName;
use markov_spaces::Markov;
use serde_json::{json, Value};
use workbench::doc::{run_source, Payload};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn run(doc: Value) -> (Value, i32) {
    let out = run_source(&doc.to_string(), None);
    (out.report, out.exit_code)
}

fn bits_doc(queries: Value) -> Value {
    json!({
        "instance": "finstoch",
        "objects": { "bit": 2 },
        "morphisms": {
            "first": { "rows": 2, "cols": 4, "entries": [["1", "1", "0", "0"], ["0", "0", "1", "1"]] },
            "second": { "rows": 2, "cols": 4, "entries": [["1", "0", "1", "0"], ["0", "1", "0", "1"]] }
        },
        "spaces": { "omega": { "rows": 4, "cols": 1, "entries": [["1/4"], ["1/4"], ["1/4"], ["1/4"]] } },
        "queries": queries
    })
}

#[test]
fn fixtures_pass() {
    for name in ["gauss_rotated.json", "two_bits.json", "names.json"] {
        let out = run_source(&fixture(name), None);
        assert_eq!(out.exit_code, 0, "{name}: {}", out.report);
        assert_eq!(out.report["ok"], json!(true));
    }
}

#[test]
fn rotated_gauss_square_is_not_independent() {
    let out = run_source(&fixture("gauss_rotated.json"), None);
    assert_eq!(out.report["results"][0]["independent"], json!(false));
    assert_eq!(out.report["results"][0]["criteria_agree"], json!(true));
}

#[test]
fn dagger_of_identity_is_identity() {
    let (report, code) = run(bits_doc(json!([{ "op": "dagger", "f": { "id": 4 } }])));
    assert_eq!(code, 0);
    let id = serde_json::to_value(FinStoch.id(&4)).unwrap();
    assert_eq!(report["results"][0]["morphism"], id);
}

#[test]
fn first_bit_glues_to_the_identity() {
    let (report, code) = run(bits_doc(json!([{ "op": "glue", "Y": "first", "pi": "first" }])));
    assert_eq!(code, 0);
    assert_eq!(report["results"][0]["morphism"], serde_json::to_value(FinStoch.id(&2)).unwrap());
}

#[test]
fn failed_expectation_exits_with_one() {
    let (report, code) = run(bits_doc(json!([
        { "op": "independent", "square": { "f": "first", "g": "first", "u": { "del": "bit" }, "v": { "del": "bit" } }, "expect": true },
        { "op": "law", "X": "first" }
    ])));
    assert_eq!(code, 1);
    assert_eq!(report["ok"], json!(false));
    assert_eq!(report["results"][0]["pass"], json!(false));
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}

#[test]
fn validation_errors_carry_a_pointer() {
    let cases = [
        (json!([{ "op": "law", "X": "third" }]), "unresolved_name", "/queries/0/X"),
        (json!([{ "op": "frobnicate" }]), "unknown_op", "/queries/0/op"),
        (json!([{ "op": "law" }]), "missing_field", "/queries/0/X"),
        (json!([{ "op": "glue", "Y": "second", "pi": "first" }]), "not_invariant", "/queries/0"),
        (
            json!([{ "op": "law", "X": { "rows": 2, "cols": 4, "entries": [["1", "1", "0", "0"], ["0", "0", "1", "2"]] } }]),
            "invalid_morphism",
            "/queries/0/X",
        ),
        (
            json!([{ "op": "law", "X": { "rows": 2, "cols": 4, "entries": [["1/2", "1", "0", "0"], ["1/2", "0", "1", "1"]] } }]),
            "not_deterministic",
            "/queries/0/X",
        ),
    ];
    for (queries, code, pointer) in cases {
        let (report, exit) = run(bits_doc(queries));
        assert_eq!(exit, 2, "{report}");
        assert_eq!(report["error"]["code"], json!(code), "{report}");
        assert_eq!(report["error"]["pointer"], json!(pointer), "{report}");
    }
    let mut doc = bits_doc(json!([]));
    doc["morphisms"]["bad"] = json!({ "compose": ["first", "nowhere"] });
    let (report, exit) = run(doc);
    assert_eq!(exit, 2);
    assert_eq!(report["error"]["pointer"], json!("/morphisms/bad/compose/1"));
    let out = run_source("{\"instance\": \"borel\"}", None);
    assert_eq!(out.exit_code, 2);
    assert_eq!(out.report["error"]["code"], json!("invalid_document"));
}

#[test]
fn stored_results_can_be_reused() {
    let (report, code) = run(bits_doc(json!([
        { "op": "glue", "Y": "first", "pi": "first", "as": "g" },
        { "op": "restrict", "X": "g", "pi": "first", "expect": "first" },
        { "op": "law", "X": "second", "as": "half" },
        { "op": "equal", "f": "half", "g": { "compose": ["first", "omega"] }, "expect": true }
    ])));
    assert_eq!(code, 0, "{report}");
}

fn payloads(report: &Value) -> Vec<Value> {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| [r.get("morphism"), r.get("state")])
        .flatten()
        .cloned()
        .collect()
}

fn round_trips<M: Payload>(m: &M, report: &Value) {
    let found = payloads(report);
    assert!(!found.is_empty());
    for v in found {
        let f = m.parse_mor(&v).unwrap();
        assert_eq!(m.show_mor(&f), v);
        assert!(m.mor_eq(&m.parse_mor(&m.show_mor(&f)).unwrap(), &f));
    }
}

#[test]
fn emitted_payloads_parse_back() {
    round_trips(&FinStoch, &run_source(&fixture("two_bits.json"), None).report);
    round_trips(&Gauss::default(), &run_source(&fixture("gauss_rotated.json"), None).report);
    round_trips(&StrongName, &run_source(&fixture("names.json"), None).report);
}

#[test]
fn tolerance_flag_reaches_the_gaussian_backend() {
    let doc = json!({
        "instance": "gauss",
        "morphisms": {
            "a": { "A": [[1.0]], "b": [0.0], "Sigma": [[0.0]] },
            "b": { "A": [[1.000001]], "b": [0.0], "Sigma": [[0.0]] }
        },
        "queries": [{ "op": "equal", "f": "a", "g": "b" }]
    })
    .to_string();
    assert_eq!(run_source(&doc, None).report["results"][0]["equal"], json!(false));
    assert_eq!(run_source(&doc, Some(1e-3)).report["results"][0]["equal"], json!(true));
}
