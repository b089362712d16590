//! Run configuration: a serializable metric description (zoo families plus
//! arbitrarily nested convolutions), sampling and tolerance settings, and
//! the machine output encoding.
//!
//! Machine output writes every float with 17 significant decimal digits, so
//! parsing the text back recovers bit-identical values; combined with the
//! seeded sampler this makes whole reports reproducible byte for byte.

use std::io;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::convolution::{convolve, ConvolutionSpec};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::metric::FinslerMetric;
use crate::sampler::{default_domain, CoordBox, DomainSpec};
use crate::tol::Tolerances;
use crate::zoo::{self, ZooSpec};

/// Deepest allowed nesting of convolution nodes.
pub const MAX_CONVOLUTION_DEPTH: usize = 4;

/// A metric description: either a zoo family or a convolution of two
/// sub-descriptions.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Zoo(ZooSpec),
    Convolution {
        f1: ScalarField,
        m1: Box<MetricSpec>,
        f2: ScalarField,
        m2: Box<MetricSpec>,
    },
}

impl MetricSpec {
    /// Nesting depth of convolution nodes (zoo leaves are depth 0).
    pub fn convolution_depth(&self) -> usize {
        match self {
            MetricSpec::Zoo(_) => 0,
            MetricSpec::Convolution { m1, m2, .. } => {
                1 + m1.convolution_depth().max(m2.convolution_depth())
            }
        }
    }

    /// Build the metric, validating every node.
    pub fn build(&self) -> Result<FinslerMetric> {
        let depth = self.convolution_depth();
        if depth > MAX_CONVOLUTION_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "convolution nesting depth {depth} exceeds the maximum {MAX_CONVOLUTION_DEPTH}"
            )));
        }
        self.build_node()
    }

    fn build_node(&self) -> Result<FinslerMetric> {
        match self {
            MetricSpec::Zoo(spec) => zoo::build(spec),
            MetricSpec::Convolution { f1, m1, f2, m2 } => {
                let first = m1.build_node()?;
                let second = m2.build_node()?;
                Ok(convolve(ConvolutionSpec::new(
                    first,
                    f1.clone(),
                    second,
                    f2.clone(),
                )?))
            }
        }
    }
}

impl Serialize for MetricSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MetricSpec::Zoo(spec) => spec.serialize(serializer),
            MetricSpec::Convolution { f1, m1, f2, m2 } => {
                let mut map = serializer.serialize_map(Some(5))?;
                map.serialize_entry("type", "convolution")?;
                map.serialize_entry("f1", f1)?;
                map.serialize_entry("m1", m1)?;
                map.serialize_entry("f2", f2)?;
                map.serialize_entry("m2", m2)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for MetricSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        parse_metric_value(&value).map_err(serde::de::Error::custom)
    }
}

/// Hand-rolled dispatch on the "type" tag so both node shapes get precise
/// error messages (a derived untagged enum would report every parse failure
/// as "did not match any variant").
fn parse_metric_value(value: &Value) -> std::result::Result<MetricSpec, String> {
    let obj = value
        .as_object()
        .ok_or("metric specification must be a JSON object")?;
    let tag = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or("metric specification needs a string \"type\" field")?;
    if tag == "convolution" {
        const KNOWN: [&str; 5] = ["type", "f1", "m1", "f2", "m2"];
        for key in obj.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(format!("unknown field {key:?} in convolution node"));
            }
        }
        let get = |k: &str| {
            obj.get(k)
                .ok_or_else(|| format!("convolution node is missing field {k:?}"))
        };
        let f1: ScalarField = serde_json::from_value(get("f1")?.clone())
            .map_err(|e| format!("in convolution field \"f1\": {e}"))?;
        let f2: ScalarField = serde_json::from_value(get("f2")?.clone())
            .map_err(|e| format!("in convolution field \"f2\": {e}"))?;
        let m1 = parse_metric_value(get("m1")?).map_err(|e| format!("in factor \"m1\": {e}"))?;
        let m2 = parse_metric_value(get("m2")?).map_err(|e| format!("in factor \"m2\": {e}"))?;
        Ok(MetricSpec::Convolution {
            f1,
            m1: Box::new(m1),
            f2,
            m2: Box::new(m2),
        })
    } else {
        serde_json::from_value::<ZooSpec>(value.clone())
            .map(MetricSpec::Zoo)
            .map_err(|e| e.to_string())
    }
}

/// Output encoding of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Human-oriented aligned text.
    #[default]
    Table,
    /// Deterministic JSON with full-precision floats.
    Machine,
}

fn default_samples() -> usize {
    200
}

/// Everything a CLI run needs: the metric, sampling controls, tolerances,
/// and the output format. Sampling boxes default per metric family and can
/// be overridden per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSpec,
    /// Seed for all randomized sampling; commands that sample require it
    /// here or on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_box: Option<CoordBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_box: Option<CoordBox>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))
    }

    pub fn build_metric(&self) -> Result<FinslerMetric> {
        self.metric.build()
    }

    /// Sampling domain: the metric's default boxes with any per-config
    /// overrides applied, validated against the metric.
    pub fn domain(&self, m: &FinslerMetric) -> Result<DomainSpec> {
        let mut dom = default_domain(m);
        if let Some(xb) = &self.x_box {
            dom.x_box = xb.clone();
        }
        if let Some(yb) = &self.y_box {
            dom.y_box = yb.clone();
        }
        dom.validate(m)?;
        Ok(dom)
    }
}

/// serde_json formatter writing every f64 with 17 significant digits, the
/// precision at which decimal text round-trips to the identical bit
/// pattern.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize a report for machine consumption: compact JSON, full-precision
/// floats, trailing newline. Identical inputs produce identical bytes.
pub fn to_machine_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::InvalidParameter(format!("non-utf8 output: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zoo_config_parses() {
        let cfg = RunConfig::from_json(
            r#"{"metric": {"type": "klein", "dim": 2}, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.samples, 200);
        let m = cfg.build_metric().unwrap();
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn convolution_config_parses_and_builds() {
        let text = r#"{
            "metric": {
                "type": "convolution",
                "f1": {"type": "constant", "value": 2.0},
                "m1": {"type": "euclidean", "dim": 2},
                "f2": {"type": "exp-linear", "coeffs": [1.0, 0.0]},
                "m2": {"type": "quartic-minkowski", "coupling": 3.0}
            },
            "seed": 1
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let m = cfg.build_metric().unwrap();
        assert_eq!(m.dim(), 4);
        assert!(m.as_convolution().is_some());
    }

    #[test]
    fn parse_errors_name_the_offending_node() {
        let err = RunConfig::from_json(
            r#"{"metric": {"type": "convolution",
                "f1": {"type": "constant", "value": 1.0},
                "m1": {"type": "no-such-family", "dim": 2},
                "f2": {"type": "constant", "value": 1.0},
                "m2": {"type": "euclidean", "dim": 2}}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("m1"), "message should name the factor: {msg}");
        let err2 = RunConfig::from_json(r#"{"metric": {"dim": 2}}"#).unwrap_err();
        assert!(err2.to_string().contains("type"), "got: {err2}");
    }

    #[test]
    fn depth_limit_is_enforced() {
        // Build a convolution tree of depth 5 by nesting on the left.
        let mut node = String::from(r#"{"type": "euclidean", "dim": 1}"#);
        for _ in 0..5 {
            node = format!(
                r#"{{"type": "convolution",
                    "f1": {{"type": "constant", "value": 1.0}},
                    "m1": {node},
                    "f2": {{"type": "constant", "value": 1.0}},
                    "m2": {{"type": "euclidean", "dim": 1}}}}"#
            );
        }
        let cfg = RunConfig::from_json(&format!(r#"{{"metric": {node}}}"#)).unwrap();
        assert_eq!(cfg.metric.convolution_depth(), 5);
        assert!(cfg.build_metric().is_err());
    }

    #[test]
    fn metric_spec_roundtrips() {
        let spec = MetricSpec::Convolution {
            f1: ScalarField::Constant { value: 1.5 },
            m1: Box::new(MetricSpec::Zoo(ZooSpec::Euclidean { dim: 2 })),
            f2: ScalarField::NormSquaredPlus { offset: 0.5 },
            m2: Box::new(MetricSpec::Zoo(ZooSpec::Klein { dim: 2 })),
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: MetricSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn machine_floats_have_full_precision() {
        #[derive(Serialize)]
        struct Payload {
            a: f64,
            b: f64,
        }
        let text = to_machine_json(&Payload {
            a: 0.1,
            b: -1.5e-300,
        })
        .unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "got: {text}");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn machine_floats_survive_json_parsing() {
        // serde_json's default float parser is a few ulp off on long digit
        // strings; the float_roundtrip feature restores exactness. The
        // first case is the observed regression: 1e-6 prints as
        // 9.9999999999999995e-7 and must come back bit-identical.
        for &value in &[1e-6_f64, 0.1, 2.0 / 3.0, 1e300, 5e-324, -7.23e-101] {
            let text = format!("{value:.16e}");
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v.as_f64().unwrap().to_bits(), value.to_bits(), "{text}");
        }
    }

    proptest! {
        #[test]
        fn machine_floats_roundtrip_bit_exact(bits in any::<i64>()) {
            let value = f64::from_bits(bits as u64);
            prop_assume!(value.is_finite());
            let text = format!("{value:.16e}");
            let back: f64 = text.parse().unwrap();
            // -0.0 parses back with the sign preserved, so bit equality
            // holds for every finite float.
            prop_assert_eq!(back.to_bits(), value.to_bits());
            let json: serde_json::Value = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(json.as_f64().unwrap().to_bits(), value.to_bits());
        }
    }
}
