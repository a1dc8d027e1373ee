use serde_json::Value;

/// Longest array printed inline.
const INLINE_ARRAY: usize = 8;

/// One `key: value` line per leaf of the report, nested keys joined by dots.
pub fn summary(report: &Value) -> String {
    let mut out = String::new();
    walk("", report, &mut out);
    out
}

fn walk(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(&key, x, out);
            }
        }
        Value::Array(a) if a.len() > INLINE_ARRAY || a.iter().any(Value::is_object) => {
            out.push_str(&format!("{prefix}: [{} items]\n", a.len()));
        }
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}
