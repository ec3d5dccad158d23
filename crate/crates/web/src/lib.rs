//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string; errors come back as a thrown string holding `{"kind", "message"}`.

use conflictfree::baselines::{random_order, simultaneous_renormalization, uniform_random};
use conflictfree::bench::{method_loss, preference_family, Family, Method, FAMILY_MAX_N};
use conflictfree::{loss, optimal_satisfaction_matrix, validate_instance, Error};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn error_json(e: &Error) -> String {
    json!({ "kind": e.kind(), "message": e.to_string() }).to_string()
}

fn matrix_rows(m: &conflictfree::JointSelectionMatrix) -> Value {
    json!(m.to_rows())
}

/// Loss-minimizing matrix for the given preferences.
pub fn construct_json(a: &[f64], b: &[f64]) -> Result<String, String> {
    let run = || -> Result<Value, Error> {
        let inst = validate_instance(a, b, 1.0)?;
        let out = optimal_satisfaction_matrix(&inst)?;
        Ok(json!({
            "branch": out.branch,
            "loss": out.loss,
            "popularity": inst.popularity(),
            "rows": matrix_rows(&out.matrix),
            "row_sums": out.matrix.row_sums(),
            "col_sums": out.matrix.col_sums(),
            "epsilon": out.certificate.map(|c| c.epsilon),
        }))
    };
    run().map(|v| v.to_string()).map_err(|e| error_json(&e))
}

/// Every mechanism's matrix and loss on the same preferences.
pub fn compare_baselines_json(a: &[f64], b: &[f64]) -> Result<String, String> {
    let run = || -> Result<Value, Error> {
        let inst = validate_instance(a, b, 1.0)?;
        let mut out = Vec::new();
        let mut push = |name: &str, m: Result<conflictfree::JointSelectionMatrix, Error>| -> Result<(), Error> {
            match m {
                Ok(m) => out.push(json!({ "method": name, "loss": loss(&m, &inst)?, "rows": matrix_rows(&m) })),
                Err(e) => out.push(json!({ "method": name, "error": e.kind() })),
            }
            Ok(())
        };
        push("optimal", optimal_satisfaction_matrix(&inst).map(|o| o.matrix))?;
        push("order", random_order(&inst).map(|r| r.matrix))?;
        push("renorm", simultaneous_renormalization(&inst))?;
        push("uniform", uniform_random(inst.n()))?;
        Ok(json!(out))
    };
    run().map(|v| v.to_string()).map_err(|e| error_json(&e))
}

/// Loss of every method for one preference family, `N = 3..=n_max`.
pub fn loss_curve_json(family: &str, n_max: usize) -> Result<String, String> {
    let run = || -> Result<Value, Error> {
        let family: Family = family.parse()?;
        if !(3..=FAMILY_MAX_N).contains(&n_max) {
            return Err(Error::DimensionTooLarge { n: n_max, max: FAMILY_MAX_N });
        }
        let ns: Vec<usize> = (3..=n_max).collect();
        let mut series = serde_json::Map::new();
        for method in Method::ALL {
            let losses = ns
                .iter()
                .map(|&n| preference_family(family, n).and_then(|i| method_loss(method, &i)).ok())
                .collect::<Vec<_>>();
            series.insert(method.as_str().to_string(), json!(losses));
        }
        Ok(json!({ "family": family.as_str(), "n": ns, "series": series }))
    };
    run().map(|v| v.to_string()).map_err(|e| error_json(&e))
}

#[wasm_bindgen]
pub fn construct(a: Vec<f64>, b: Vec<f64>) -> Result<String, JsValue> {
    construct_json(&a, &b).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn compare_baselines(a: Vec<f64>, b: Vec<f64>) -> Result<String, JsValue> {
    compare_baselines_json(&a, &b).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn loss_curve(family: &str, n_max: usize) -> Result<String, JsValue> {
    loss_curve_json(family, n_max).map_err(|e| JsValue::from_str(&e))
}
