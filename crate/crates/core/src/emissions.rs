//! Instantaneous emission and fuel model.
//!
//! Each emission class carries, per quantity, six coefficients of the
//! polynomial
//!
//! ```text
//! rate(v, a) = max(0, c0 + c1·v·a + c2·v·a² + c3·v + c4·v² + c5·v³)
//! ```
//!
//! with `v` in m/s and `a` in m/s². CO₂ rates are in mg/s, fuel in ml/s.
//! Accounts stay in mg and ml; conversion to kg and L happens at reporting.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmissionError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: class `{class}` quantity `{quantity}` has {got} of 6 coefficients")]
    MissingCoefficient {
        line: usize,
        class: String,
        quantity: String,
        got: usize,
    },
    #[error("class `{0}` defined twice")]
    DuplicateClass(String),
    #[error("class `{class}` is missing the `{quantity}` record")]
    MissingQuantity { class: String, quantity: String },
    #[error("unknown emission class `{0}`")]
    UnknownClass(String),
    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    /// mg/s
    Co2,
    /// ml/s
    Fuel,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Co2 => "co2",
            Quantity::Fuel => "fuel",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients(pub [f64; 6]);

impl Coefficients {
    pub fn rate(&self, v: f64, a: f64) -> f64 {
        let [c0, c1, c2, c3, c4, c5] = self.0;
        let raw = c0 + c1 * v * a + c2 * v * a * a + c3 * v + c4 * v * v + c5 * v * v * v;
        raw.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionClass {
    pub name: String,
    pub co2: Coefficients,
    pub fuel: Coefficients,
    /// Further pollutants (nox, pmx, ...) parsed but not accounted.
    pub other: BTreeMap<String, Coefficients>,
}

impl EmissionClass {
    pub fn coefficients(&self, q: Quantity) -> &Coefficients {
        match q {
            Quantity::Co2 => &self.co2,
            Quantity::Fuel => &self.fuel,
        }
    }

    pub fn rate(&self, q: Quantity, v: f64, a: f64) -> f64 {
        self.coefficients(q).rate(v, a)
    }

    pub fn sample(&self, v: f64, a: f64) -> (f64, f64) {
        (self.co2.rate(v, a), self.fuel.rate(v, a))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmissionRegistry {
    classes: BTreeMap<String, EmissionClass>,
}

impl EmissionRegistry {
    pub fn get(&self, name: &str) -> Result<&EmissionClass, EmissionError> {
        self.classes
            .get(name)
            .ok_or_else(|| EmissionError::UnknownClass(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    /// Rate lookup by class and quantity name, including the extra
    /// pollutants a config may carry.
    pub fn rate(&self, class: &str, quantity: &str, v: f64, a: f64) -> Result<f64, EmissionError> {
        let c = self.get(class)?;
        let coeffs = match quantity {
            "co2" => &c.co2,
            "fuel" => &c.fuel,
            other => c
                .other
                .get(other)
                .ok_or_else(|| EmissionError::UnknownQuantity(other.to_string()))?,
        };
        Ok(coeffs.rate(v, a))
    }
}

pub fn emission_rate(class: &EmissionClass, quantity: Quantity, v: f64, a: f64) -> f64 {
    class.rate(quantity, v, a)
}

/// Parse the line-oriented class config:
///
/// ```text
/// # comment
/// class HBEFA3/HDV_G
/// co2  c0 c1 c2 c3 c4 c5
/// fuel c0 c1 c2 c3 c4 c5
/// ```
pub fn load_emission_classes(config: &[u8]) -> Result<EmissionRegistry, EmissionError> {
    let text = std::str::from_utf8(config).map_err(|e| EmissionError::Malformed {
        line: 0,
        message: format!("invalid UTF-8: {e}"),
    })?;

    struct Pending {
        name: String,
        quantities: BTreeMap<String, Coefficients>,
    }

    fn finish(p: Pending, reg: &mut EmissionRegistry) -> Result<(), EmissionError> {
        let Pending { name, mut quantities } = p;
        let mut take = |q: &str| {
            quantities.remove(q).ok_or_else(|| EmissionError::MissingQuantity {
                class: name.clone(),
                quantity: q.to_string(),
            })
        };
        let co2 = take("co2")?;
        let fuel = take("fuel")?;
        if reg.classes.contains_key(&name) {
            return Err(EmissionError::DuplicateClass(name));
        }
        reg.classes.insert(
            name.clone(),
            EmissionClass {
                name,
                co2,
                fuel,
                other: quantities,
            },
        );
        Ok(())
    }

    let mut reg = EmissionRegistry::default();
    let mut current: Option<Pending> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().expect("non-empty");
        if keyword == "class" {
            let name = tokens.next().ok_or_else(|| EmissionError::Malformed {
                line,
                message: "`class` needs a name".into(),
            })?;
            if tokens.next().is_some() {
                return Err(EmissionError::Malformed {
                    line,
                    message: "class names cannot contain whitespace".into(),
                });
            }
            if let Some(p) = current.take() {
                finish(p, &mut reg)?;
            }
            current = Some(Pending {
                name: name.to_string(),
                quantities: BTreeMap::new(),
            });
            continue;
        }

        let pending = current.as_mut().ok_or_else(|| EmissionError::Malformed {
            line,
            message: format!("`{keyword}` record before any `class`"),
        })?;
        if !keyword.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(EmissionError::Malformed {
                line,
                message: format!("bad quantity name `{keyword}`"),
            });
        }
        let values = tokens
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| EmissionError::Malformed {
                        line,
                        message: format!("bad coefficient `{t}`"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() < 6 {
            return Err(EmissionError::MissingCoefficient {
                line,
                class: pending.name.clone(),
                quantity: keyword.to_string(),
                got: values.len(),
            });
        }
        if values.len() > 6 {
            return Err(EmissionError::Malformed {
                line,
                message: format!("{} coefficients, expected 6", values.len()),
            });
        }
        let coeffs = Coefficients(values.try_into().expect("length checked"));
        if pending.quantities.insert(keyword.to_string(), coeffs).is_some() {
            return Err(EmissionError::Malformed {
                line,
                message: format!("`{keyword}` given twice for class `{}`", pending.name),
            });
        }
    }
    if let Some(p) = current.take() {
        finish(p, &mut reg)?;
    }
    Ok(reg)
}

/// One vehicle's rates over one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionSample {
    pub vehicle: String,
    pub t: f64,
    pub co2_rate: f64,
    pub fuel_rate: f64,
}

/// Cumulative per-vehicle totals in mg, ml and seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CumulativeAccount {
    pub co2_mg: f64,
    pub fuel_ml: f64,
    pub duration_s: f64,
}

impl CumulativeAccount {
    pub fn account_step(&mut self, co2_rate: f64, fuel_rate: f64, dt: f64) {
        self.co2_mg += co2_rate * dt;
        self.fuel_ml += fuel_rate * dt;
        self.duration_s += dt;
    }

    pub fn add(&mut self, other: &CumulativeAccount) {
        self.co2_mg += other.co2_mg;
        self.fuel_ml += other.fuel_ml;
        self.duration_s += other.duration_s;
    }
}

pub fn account_step(account: CumulativeAccount, sample: &EmissionSample, dt: f64) -> CumulativeAccount {
    let mut out = account;
    out.account_step(sample.co2_rate, sample.fuel_rate, dt);
    out
}
