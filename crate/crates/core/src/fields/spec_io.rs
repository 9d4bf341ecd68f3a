//! The `volfield-spec/1` JSON document describing a closed-form field.
//!
//! ```json
//! {"schema": "volfield-spec/1", "family": "meridian", "k": 1, "phi0": 0.0,
//!  "fourier": [[0.1, 0.0]], "T": [1.0, 0.0]}
//! ```
//!
//! `family` is one of `meridian`, `zeta-family`, `latitude`, `t-type`
//! (`ttype` accepted). `T` is required for `t-type` only; its initial data are
//! the meridian-type angle built from `k`, `phi0`, `fourier`, or the latitude
//! angle when `"initial": "latitude"` is given.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::fields::{AngleField, InitialData, LatitudeSpec, TTypeSpec, Transversal, ZetaSpec};

pub const SPEC_SCHEMA: &str = "volfield-spec/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub schema: String,
    pub family: String,
    #[serde(default)]
    pub k: i64,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fourier: Vec<[f64; 2]>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            serde_json::from_str(text).map_err(|e| VolError::Invalid(format!("field spec: {e}")))?;
        if doc.schema != SPEC_SCHEMA {
            return Err(VolError::Invalid(format!(
                "unsupported schema {:?}, expected {SPEC_SCHEMA:?}",
                doc.schema
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec documents always serialize")
    }

    fn zeta(&self) -> ZetaSpec {
        ZetaSpec::meridian(self.k, self.phi0).with_fourier(self.fourier.iter().map(|&[c, s]| (c, s)).collect())
    }

    pub fn to_field(&self) -> Result<AngleField> {
        let needs_no_t = |name: &str| -> Result<()> {
            if self.t.is_some() {
                Err(VolError::Invalid(format!("family {name} does not take \"T\"")))
            } else {
                Ok(())
            }
        };
        match self.family.as_str() {
            "meridian" | "zeta-family" => {
                needs_no_t(&self.family)?;
                Ok(AngleField::Meridian(self.zeta()))
            }
            "latitude" => {
                needs_no_t("latitude")?;
                if self.k != 0 || !self.fourier.is_empty() {
                    return Err(VolError::Invalid("latitude fields take only phi0".into()));
                }
                Ok(AngleField::latitude(self.phi0))
            }
            "t-type" | "ttype" => {
                let [a, b] = self
                    .t
                    .ok_or_else(|| VolError::Invalid("t-type spec requires \"T\": [a, b]".into()))?;
                let initial = match self.initial.as_deref() {
                    None | Some("meridian") => InitialData::Meridian(self.zeta()),
                    Some("latitude") => InitialData::Latitude(LatitudeSpec::new(self.phi0)),
                    Some(other) => {
                        return Err(VolError::Invalid(format!("unknown initial data {other:?}")))
                    }
                };
                Ok(AngleField::TType(TTypeSpec::new((a, b), initial)?))
            }
            other => Err(VolError::Invalid(format!("unknown family {other:?}"))),
        }
    }

    /// Inverse of [`SpecDocument::to_field`] for closed-form fields.
    pub fn from_field(field: &AngleField) -> Result<Self> {
        let mut doc = SpecDocument {
            schema: SPEC_SCHEMA.to_string(),
            family: field.family().as_str().to_string(),
            k: 0,
            phi0: 0.0,
            fourier: Vec::new(),
            t: None,
            initial: None,
        };
        let set_zeta = |doc: &mut SpecDocument, z: &ZetaSpec| {
            doc.k = z.k;
            doc.phi0 = z.phi0;
            doc.fourier = z.fourier.iter().map(|&(c, s)| [c, s]).collect();
        };
        match field {
            AngleField::Meridian(z) => set_zeta(&mut doc, z),
            AngleField::Latitude(l) => doc.phi0 = l.phi0,
            AngleField::TType(t) => {
                let default_transversal = TTypeSpec::new(t.direction, t.initial.clone())?.transversal;
                if t.transversal != default_transversal || matches!(t.transversal, Transversal::Meridian { phi } if phi != 0.0) {
                    return Err(VolError::Invalid("custom transversals are not expressible in the spec document".into()));
                }
                doc.t = Some([t.direction.0, t.direction.1]);
                match &t.initial {
                    InitialData::Meridian(z) => set_zeta(&mut doc, z),
                    InitialData::Latitude(l) => {
                        doc.phi0 = l.phi0;
                        doc.initial = Some("latitude".into());
                    }
                }
            }
            AngleField::Grid(_) => {
                return Err(VolError::Invalid("grid fields are stored in VFGRID files".into()))
            }
        }
        Ok(doc)
    }
}
