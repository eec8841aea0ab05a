use crate::Failure;
use branchlab::Plan;
use std::fmt::Write as _;
use std::path::Path;

/// Writes `text` to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Compact JSON with sorted keys, one document per line.
pub fn json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string(value).expect("JSON value serializes");
    s.push('\n');
    s
}

/// [`json`] of `meta` with `"plan"` spliced in first. Plans can hold millions
/// of edges, so they are written straight from the plan instead of going
/// through a `Value` tree.
pub fn json_with_plan(meta: &serde_json::Value, plan: &Plan) -> String {
    let rest = serde_json::to_string(meta).expect("JSON value serializes");
    let body = rest.strip_prefix('{').expect("metadata is an object");
    let sep = if body == "}" { "" } else { "," };
    format!("{{\"plan\":{}{sep}{body}\n", plan.to_json())
}

/// `# seed=...`, a header row and one row per record; LF endings.
pub fn csv(seed: u64, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# seed={seed}\n{}\n", header.join(","));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| number(*v)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(number(2.0), "2.0");
    }

    #[test]
    fn plan_splice() {
        let mut b = branchlab::model::PlanBuilder::new();
        let x = branchlab::Point::new1(0.5);
        let (u, v) = (b.node(-1.0, x), b.node(1.0, x));
        b.edge(u, v, 1.0);
        let plan = b.build(1, 1.0).unwrap();
        let s = json_with_plan(&serde_json::json!({"a": 1}), &plan);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"], 1);
        assert_eq!(Plan::from_json(&v["plan"].to_string()).unwrap(), plan);
        let s = json_with_plan(&serde_json::json!({}), &plan);
        assert!(serde_json::from_str::<serde_json::Value>(&s).is_ok());
    }

    #[test]
    fn csv_layout() {
        let s = csv(7, &["scale", "value"], &[vec![0.5, 1.0]]);
        assert_eq!(s, "# seed=7\nscale,value\n0.5,1.0\n");
    }
}
