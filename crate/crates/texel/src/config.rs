//! Experiment configuration: typed defaults, a TOML file merged on top, then
//! `key.path=value` overrides.

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};

/// Parses `a.b.c=value`. The value is read as a TOML literal when possible
/// (`1e-9`, `true`, `[1, 2]`, `"x"`) and as a bare string otherwise.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = s.split_once('=').ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("override `{s}` has an empty key segment")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_owned()),
    };
    Ok((path, value))
}

fn set_path(table: &mut Table, path: &[String], value: Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for seg in parents {
        let next = cur.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new()));
        cur = match next {
            Value::Table(t) => t,
            other => {
                return Err(Error::Config(format!("`{}` is a {}, not a table", path.join("."), other.type_str())));
            }
        };
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Recursively overlays `top` onto `base`; tables merge, everything else replaces.
pub fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// A fully resolved configuration and its canonical TOML text.
#[derive(Debug, Clone)]
pub struct Resolved<T> {
    pub value: T,
    pub canonical: String,
}

pub fn resolve<T>(file: Option<&str>, overrides: &[String]) -> Result<Resolved<T>>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut table = Table::try_from(T::default()).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(text) = file {
        let top: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        merge(&mut table, top);
    }
    for o in overrides {
        let (path, value) = parse_override(o)?;
        set_path(&mut table, &path, value)?;
    }
    let value: T = Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let canonical = toml::to_string(&value).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Resolved { value, canonical })
}
