//! Field-by-field JSON decoding so that errors name the offending field.

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub(crate) type Object = Map<String, Value>;

pub(crate) fn object(text: &str, allowed: &[&str], what: &str) -> Result<Object, String> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| format!("malformed {what} JSON: {e}"))?;
    let Value::Object(obj) = value else {
        return Err(format!("{what} JSON must be an object"));
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(format!("field `{k}`: unknown field"));
    }
    Ok(obj)
}

pub(crate) fn field<T: DeserializeOwned>(obj: &Object, name: &str) -> Result<Option<T>, String> {
    obj.get(name)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| format!("field `{name}`: {e}")))
        .transpose()
}

pub(crate) fn required<T: DeserializeOwned>(obj: &Object, name: &str) -> Result<T, String> {
    field(obj, name)?.ok_or_else(|| format!("field `{name}`: missing"))
}
