//! Reports validated against the bundled report-v1 schema with a small
//! validator covering the keywords the schema uses.

use banachkit::harness::report_schema;
use banachkit::{run_suite, SUITES};
use serde_json::Value;

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        other => panic!("unsupported type {other}"),
    }
}

pub fn validate(schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let s = schema.as_object().expect("schema objects");
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, v),
            Value::Array(ts) => ts.iter().any(|t| type_ok(t.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errors.push(format!("{path}: expected type {t}, got {v}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errors.push(format!("{path}: expected const {c}"));
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            errors.push(format!("{path}: {v} not in enum"));
        }
    }
    if let Some(min) = s.get("minimum").and_then(Value::as_f64) {
        if v.as_f64().is_some_and(|x| x < min) {
            errors.push(format!("{path}: below minimum {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        if let Some(Value::Array(req)) = s.get("required") {
            for key in req {
                if !obj.contains_key(key.as_str().unwrap()) {
                    errors.push(format!("{path}: missing {key}"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (key, child) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => validate(sub, child, &format!("{path}/{key}"), errors),
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected property {key}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, item) in arr.iter().enumerate() {
            validate(items, item, &format!("{path}/{i}"), errors);
        }
    }
}

#[test]
fn every_suite_report_validates() {
    let schema = report_schema();
    for name in SUITES {
        let report = serde_json::to_value(run_suite(name, 3, 5).unwrap()).unwrap();
        let mut errors = Vec::new();
        validate(&schema, &report, "", &mut errors);
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn validator_rejects_malformed_reports() {
    let schema = report_schema();
    let mut report = serde_json::to_value(run_suite("sb", 3, 1).unwrap()).unwrap();
    report["cases"][0]["provenance"] = Value::String("folklore".into());
    report["schema"] = Value::String("report-v0".into());
    report.as_object_mut().unwrap().remove("seed");
    let mut errors = Vec::new();
    validate(&schema, &report, "", &mut errors);
    assert_eq!(errors.len(), 3, "{errors:?}");
}

#[test]
fn failing_cases_carry_certificates_in_schema() {
    // certificates are optional but, when present, must not break validation
    let schema = report_schema();
    let mut report = serde_json::to_value(run_suite("gauges", 3, 1).unwrap()).unwrap();
    report["cases"][0]["certificate"] = serde_json::json!({"value": 1.0});
    let mut errors = Vec::new();
    validate(&schema, &report, "", &mut errors);
    assert!(errors.is_empty(), "{errors:?}");
}
