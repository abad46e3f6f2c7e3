//! `--param name=value` and `--param name=start:step:end` overrides.
//!
//! A spec file refers to a parameter with the string `"$name"` (or
//! `"-$name"` for its negation) wherever a number is expected.

use std::fmt;

use anyhow::{bail, ensure, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub values: Vec<f64>,
}

impl Param {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, range) = s
            .split_once('=')
            .with_context(|| format!("expected name=value in --param {s:?}"))?;
        ensure!(
            !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
            "parameter name {name:?} must be alphanumeric"
        );
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {t:?} in --param {s:?}"))
        };
        let values = match range.split(':').collect::<Vec<_>>().as_slice() {
            [v] => vec![num(v)?],
            [a, step, b] => {
                let (a, step, b) = (num(a)?, num(step)?, num(b)?);
                ensure!(
                    step > 0.0 && a <= b,
                    "sweep {range:?} needs start <= end and a positive step"
                );
                let n = ((b - a) / step + 1e-9).floor() as usize;
                // multiplying avoids drift from repeated addition
                (0..=n).map(|i| a + step * i as f64).collect()
            }
            _ => bail!("expected value or start:step:end in --param {s:?}"),
        };
        Ok(Self {
            name: name.into(),
            values,
        })
    }
}

/// One point of the parameter grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub Vec<(String, f64)>);

impl Assignment {
    /// Replace every `"$name"` and `"-$name"` in `text`.
    pub fn apply(&self, text: &str) -> String {
        let mut out = text.to_owned();
        for (name, v) in &self.0 {
            out = out.replace(&format!("\"-${name}\""), &format!("{}", -v));
            out = out.replace(&format!("\"${name}\""), &format!("{v}"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Cartesian product of all parameter values, first parameter outermost.
pub fn grid(params: &[Param]) -> Vec<Assignment> {
    params.iter().fold(vec![Assignment::default()], |acc, p| {
        acc.iter()
            .flat_map(|a| {
                p.values.iter().map(move |&v| {
                    let mut next = a.clone();
                    next.0.push((p.name.clone(), v));
                    next
                })
            })
            .collect()
    })
}
