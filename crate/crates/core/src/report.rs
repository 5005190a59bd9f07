use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// One inequality instance: the left side and the right side without its
/// unknown constant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioRow {
    pub region: String,
    #[cfg_attr(feature = "serde", serde(with = "crate::report::nullable"))]
    pub lhs: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::report::nullable"))]
    pub rhs: f64,
}

impl RatioRow {
    pub fn ratio(&self) -> f64 {
        ratio(self.lhs, self.rhs)
    }
}

/// Structured outcome of a property or inequality check.
///
/// `empirical_constant` is the largest observed `lhs / rhs`; the verdict is
/// pass iff there are no violations, the constant is finite and it does not
/// exceed `cap` (when one is set).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub check: String,
    pub variant: String,
    pub dim: usize,
    pub depth: usize,
    #[cfg_attr(feature = "serde", serde(with = "crate::report::nullable"))]
    pub empirical_constant: f64,
    pub cap: Option<f64>,
    pub worst_region: Option<String>,
    pub violations: Vec<String>,
    #[cfg_attr(feature = "serde", serde(with = "crate::report::nullable_map"))]
    pub params: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub rows: Vec<RatioRow>,
}

impl CheckReport {
    pub fn new(check: &str, variant: &str, dim: usize, depth: usize) -> Self {
        CheckReport {
            check: check.into(),
            variant: variant.into(),
            dim,
            depth,
            empirical_constant: 0.0,
            cap: None,
            worst_region: None,
            violations: Vec::new(),
            params: BTreeMap::new(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.empirical_constant.is_finite()
            && self.cap.is_none_or(|c| self.empirical_constant <= c)
    }

    pub fn violate(&mut self, message: String) {
        self.violations.push(message);
    }

    /// Records a row and folds its ratio into the empirical constant.
    pub fn record(&mut self, region: String, lhs: f64, rhs: f64) {
        let r = ratio(lhs, rhs);
        let worse =
            r > self.empirical_constant || (r.is_nan() && !self.empirical_constant.is_nan());
        if self.worst_region.is_none() || worse {
            self.empirical_constant = r;
            self.worst_region = Some(region.clone());
        }
        self.rows.push(RatioRow { region, lhs, rhs });
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn param(&mut self, key: &str, value: f64) {
        self.params.insert(key.into(), value);
    }
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = inf` for `x > 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

#[cfg(feature = "serde")]
pub(crate) mod nullable {
    //! Non-finite floats travel as the strings `inf`, `-inf` and `nan`.
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(alloc::string::String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = match Repr::deserialize(d)? {
            Repr::Number(v) => return Ok(v),
            Repr::Text(t) => t,
        };
        match text.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(D::Error::custom(alloc::format!(
                "`{other}` is not a number"
            ))),
        }
    }
}

#[cfg(feature = "serde")]
pub(crate) mod nullable_map {
    use alloc::collections::BTreeMap;
    use alloc::string::String;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    struct Entry<'a>(&'a f64);

    impl Serialize for Entry<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::nullable::serialize(self.0, s)
        }
    }

    #[derive(Deserialize)]
    struct Value(#[serde(with = "super::nullable")] f64);

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &Entry(v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Value>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}
