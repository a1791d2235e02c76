use serde::{Deserialize, Serialize};

use super::Transform;
use crate::error::{Error, Result};

pub const CONVENTION_SIGNED: &str = "signed";

/// Serialized form of a [`Transform`]; the diagonals and matrix are
/// regenerated from the seed and dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub version: u32,
    pub d: usize,
    pub d_pad: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub field_m: u32,
    pub field_poly: String,
    pub convention: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default)]
    pub strict: bool,
}

impl Transform {
    pub fn to_spec(&self) -> TransformSpec {
        let field = self.matrix().field();
        TransformSpec {
            version: 1,
            d: self.input_dim(),
            d_pad: self.padded_dim(),
            k: self.output_dim(),
            p: self.p(),
            seed: self.seed(),
            field_m: field.degree(),
            field_poly: format!("{:#x}", field.modulus()),
            convention: CONVENTION_SIGNED.to_string(),
            scale: Some(self.scale()),
            strict: self.is_strict(),
        }
    }

    /// Rebuilds a transform and checks that the derived fields agree.
    pub fn from_spec(spec: &TransformSpec) -> Result<Self> {
        if spec.version != 1 {
            return Err(Error::Format(format!("unsupported transform spec version {}", spec.version)));
        }
        if spec.convention != CONVENTION_SIGNED {
            return Err(Error::Format(format!("unsupported convention {:?}", spec.convention)));
        }
        let t = Transform::plan(spec.d, spec.k, spec.p, spec.seed, spec.strict)?;
        let rebuilt = t.to_spec();
        let poly = u64::from_str_radix(spec.field_poly.trim_start_matches("0x"), 16)
            .map_err(|e| Error::Format(format!("bad field_poly {:?}: {e}", spec.field_poly)))?;
        if rebuilt.d_pad != spec.d_pad || rebuilt.field_m != spec.field_m || format!("{poly:#x}") != rebuilt.field_poly
        {
            return Err(Error::Format("transform spec is inconsistent with its dimensions".into()));
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: TransformSpec = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_spec(&spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let t = Transform::plan(1000, 5, 1.0, 7, true).unwrap();
        let json = t.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["d_pad"], 1024);
        assert_eq!(v["field_m"], 5);
        assert_eq!(v["field_poly"], "0x25");
        assert_eq!(v["convention"], "signed");
        let back = Transform::from_json(&json).unwrap();
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(back.apply(&x).unwrap(), t.apply(&x).unwrap());
    }

    #[test]
    fn rejects_inconsistent_spec() {
        let mut spec = Transform::plan(16, 1, 2.0, 0, true).unwrap().to_spec();
        spec.field_poly = "0x13".into();
        assert!(matches!(Transform::from_spec(&spec), Err(Error::Format(_))));
        assert!(Transform::from_json("{not json").is_err());
    }
}
