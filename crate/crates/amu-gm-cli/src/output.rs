use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "amu-gm.record/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (text, json, csv)")),
        }
    }
}

/// One self-describing output record.
#[derive(Clone, Debug)]
pub struct Record {
    pub command: &'static str,
    pub tag: String,
    pub input: Value,
    pub result: Value,
    /// verification outcome, when the command checks something
    pub pass: Option<bool>,
    /// CSV body for commands that have one
    pub csv: Option<String>,
}

impl Record {
    pub fn new(command: &'static str, tag: impl Into<String>, input: Value, result: Value) -> Self {
        Record { command, tag: tag.into(), input, result, pass: None, csv: None }
    }

    pub fn to_json(&self, seed: u64, precision: &str) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("command".into(), json!(self.command));
        m.insert("tag".into(), json!(self.tag));
        m.insert("seed".into(), json!(seed));
        m.insert("precision".into(), json!(precision));
        m.insert("input".into(), self.input.clone());
        m.insert("result".into(), self.result.clone());
        if let Some(p) = self.pass {
            m.insert("pass".into(), json!(p));
        }
        Value::Object(m)
    }

    pub fn render(&self, format: Format, seed: u64, precision: &str) -> Result<String, String> {
        let v = self.to_json(seed, precision);
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&v).expect("json values serialize") + "\n"),
            Format::Text => {
                let mut out = String::new();
                flatten("", &v, &mut out);
                Ok(out)
            }
            Format::Csv => self.csv.clone().ok_or_else(|| format!("`{}` has no CSV output; use text or json", self.command)),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        // short numeric arrays read better on one line
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push_str(&format!("{prefix} = {}\n", Value::Array(a.clone())));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        _ => out.push_str(&format!("{prefix} = {v}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_fields() {
        let r = Record::new("bounds", "zero_bound.regular", json!({"mu": 4}), json!({"bound": 7}));
        let v = r.to_json(7, "double");
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["result"]["bound"], 7);
        assert!(v.get("pass").is_none());
    }

    #[test]
    fn text_is_flat() {
        let r = Record::new("x", "t", json!({"a": [1, 2]}), json!({"b": {"c": "d"}}));
        let t = r.render(Format::Text, 0, "double").unwrap();
        assert!(t.contains("input.a = [1,2]\n"));
        assert!(t.contains("result.b.c = d\n"));
        assert!(r.render(Format::Csv, 0, "double").is_err());
    }
}
