use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PassportError;

pub const MANUAL_FILE: &str = "aimp-manual.yaml";

/// Required manual fields, in the order they are reported.
pub const REQUIRED_FIELDS: [&str; 4] = ["intendedPurpose", "potentialThreats", "license", "owner"];

macro_rules! open_vocab {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant,)+
            /// Free text given as `other:<text>`.
            Other(String),
        }

        impl $name {
            pub const KNOWN: &'static [&'static str] = &[$($text),+];
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self {
                    $($name::$variant => f.write_str($text),)+
                    $name::Other(t) => write!(f, "other:{t}"),
                }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                let s = s.trim();
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => match s.strip_prefix("other:").map(str::trim) {
                        Some(t) if !t.is_empty() => Ok($name::Other(t.to_string())),
                        _ => Err(format!(
                            "'{s}' is not one of {} or other:<text>",
                            Self::KNOWN.join(", ")
                        )),
                    },
                }
            }
        }
    };
}

open_vocab!(LearningTask {
    ImageSegmentation => "ImageSegmentation",
    Classification => "Classification",
    Regression => "Regression",
    Detection => "Detection",
});

open_vocab!(LearningApproach {
    Supervised => "supervised",
    Unsupervised => "unsupervised",
    SemiSupervised => "semi-supervised",
    Reinforcement => "reinforcement",
});

/// Declarations that cannot be derived from the run and must be written by
/// the model developer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ManualMetadata {
    pub intended_purpose: String,
    pub potential_threats: String,
    pub license: String,
    pub owner: String,
    pub model_name: String,
    pub model_version: String,
    pub description: String,
    pub learning_task: Option<LearningTask>,
    pub learning_approach: Option<LearningApproach>,
    pub algorithm_family: String,
    pub software_framework: String,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawManual {
    #[serde(default)]
    intended_purpose: Option<String>,
    #[serde(default)]
    potential_threats: Option<String>,
    #[serde(default)]
    license: Option<String>,
    #[serde(default)]
    owner: Option<String>,
    #[serde(default)]
    model_name: Option<String>,
    #[serde(default)]
    model_version: Option<String>,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    learning_task: Option<String>,
    #[serde(default)]
    learning_approach: Option<String>,
    #[serde(default)]
    algorithm_family: Option<String>,
    #[serde(default)]
    software_framework: Option<String>,
}

fn parse_opt<T: FromStr<Err = String>>(
    field: &str,
    v: Option<String>,
) -> Result<Option<T>, String> {
    match v {
        Some(s) if !s.trim().is_empty() => s.parse().map(Some).map_err(|e| format!("{field}: {e}")),
        _ => Ok(None),
    }
}

impl TryFrom<RawManual> for ManualMetadata {
    type Error = String;
    fn try_from(r: RawManual) -> Result<Self, String> {
        Ok(ManualMetadata {
            intended_purpose: r.intended_purpose.unwrap_or_default(),
            potential_threats: r.potential_threats.unwrap_or_default(),
            license: r.license.unwrap_or_default(),
            owner: r.owner.unwrap_or_default(),
            model_name: r.model_name.unwrap_or_default(),
            model_version: r.model_version.unwrap_or_default(),
            description: r.description.unwrap_or_default(),
            learning_task: parse_opt("learningTask", r.learning_task)?,
            learning_approach: parse_opt("learningApproach", r.learning_approach)?,
            algorithm_family: r.algorithm_family.unwrap_or_default(),
            software_framework: r.software_framework.unwrap_or_default(),
        })
    }
}

impl From<&ManualMetadata> for RawManual {
    fn from(m: &ManualMetadata) -> Self {
        RawManual {
            intended_purpose: Some(m.intended_purpose.clone()),
            potential_threats: Some(m.potential_threats.clone()),
            license: Some(m.license.clone()),
            owner: Some(m.owner.clone()),
            model_name: Some(m.model_name.clone()),
            model_version: Some(m.model_version.clone()),
            description: Some(m.description.clone()),
            learning_task: Some(
                m.learning_task
                    .as_ref()
                    .map(|t| t.to_string())
                    .unwrap_or_default(),
            ),
            learning_approach: Some(
                m.learning_approach
                    .as_ref()
                    .map(|t| t.to_string())
                    .unwrap_or_default(),
            ),
            algorithm_family: Some(m.algorithm_family.clone()),
            software_framework: Some(m.software_framework.clone()),
        }
    }
}

impl Serialize for ManualMetadata {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawManual::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ManualMetadata {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawManual::deserialize(d)?;
        ManualMetadata::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl ManualMetadata {
    pub fn parse(text: &str) -> Result<Self, PassportError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_yaml::from_str(text).map_err(|e| PassportError::ManualSyntax(e.to_string()))
    }

    fn required(&self) -> [(&'static str, &str); 4] {
        [
            ("intendedPurpose", &self.intended_purpose),
            ("potentialThreats", &self.potential_threats),
            ("license", &self.license),
            ("owner", &self.owner),
        ]
    }
}

/// Required fields that are missing or whitespace-only.
pub fn validate_manual(manual: &ManualMetadata) -> Vec<String> {
    manual
        .required()
        .iter()
        .filter(|(_, v)| v.trim().is_empty())
        .map(|(k, _)| k.to_string())
        .collect()
}

/// The commented `aimp-manual.yaml` template with every field empty.
pub fn scaffold_manual_template() -> String {
    let task = LearningTask::KNOWN.join(", ");
    let approach = LearningApproach::KNOWN.join(", ");
    format!(
        "# Manual metadata for the AI Model Passport.\n\
         # Fields marked [required] must be non-empty before `aimp passport build`.\n\
         \n\
         # [required] What the model is for, for whom and in which setting.\n\
         intendedPurpose: \"\"\n\
         # [required] Known risks such as bias, misuse or out-of-scope use.\n\
         potentialThreats: \"\"\n\
         # [required] License the model is released under.\n\
         license: \"\"\n\
         # [required] Person or organization that owns the model.\n\
         owner: \"\"\n\
         \n\
         modelName: \"\"\n\
         modelVersion: \"\"\n\
         description: \"\"\n\
         # One of: {task}; or other:<text>.\n\
         learningTask: \"\"\n\
         # One of: {approach}; or other:<text>.\n\
         learningApproach: \"\"\n\
         # Algorithm family and model type, e.g. NeuralNetwork/U-Net.\n\
         algorithmFamily: \"\"\n\
         # Main software framework, e.g. PyTorch 2.3.\n\
         softwareFramework: \"\"\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled() -> ManualMetadata {
        ManualMetadata {
            intended_purpose: "Prostate lesion segmentation on bpMRI".into(),
            potential_threats: "Bias towards one scanner vendor".into(),
            license: "CC-BY-NC-4.0".into(),
            owner: "Imaging Consortium".into(),
            model_name: "unet".into(),
            model_version: "1.0".into(),
            description: String::new(),
            learning_task: Some(LearningTask::ImageSegmentation),
            learning_approach: Some(LearningApproach::SemiSupervised),
            algorithm_family: "NeuralNetwork/U-Net".into(),
            software_framework: "PyTorch".into(),
        }
    }

    #[test]
    fn complete_manual_has_no_violations() {
        assert!(validate_manual(&filled()).is_empty());
    }

    #[test]
    fn blank_owner() {
        let mut m = filled();
        m.owner = "  ".into();
        assert_eq!(validate_manual(&m), ["owner"]);
    }

    #[test]
    fn template_parses_empty_and_reports_all_four() {
        let m = ManualMetadata::parse(&scaffold_manual_template()).unwrap();
        assert_eq!(m, ManualMetadata::default());
        assert_eq!(validate_manual(&m), REQUIRED_FIELDS);
        assert_eq!(scaffold_manual_template(), scaffold_manual_template());
    }

    #[test]
    fn template_lists_exactly_the_fields() {
        let keys: Vec<String> = scaffold_manual_template()
            .lines()
            .filter(|l| !l.starts_with('#') && l.contains(':'))
            .map(|l| l.split(':').next().unwrap().to_string())
            .collect();
        let v = serde_json::to_value(ManualMetadata::default()).unwrap();
        let mut expected: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        let mut got = keys.clone();
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
        for r in REQUIRED_FIELDS {
            let idx = scaffold_manual_template().find(&format!("\n{r}:")).unwrap();
            assert!(scaffold_manual_template()[..idx].ends_with("\n") || idx > 0);
            assert!(scaffold_manual_template()[..idx]
                .lines()
                .last()
                .unwrap()
                .contains("[required]"));
        }
    }

    #[test]
    fn fill_in_round_trip() {
        let m = filled();
        let mut text = scaffold_manual_template();
        for (k, v) in serde_json::to_value(&m).unwrap().as_object().unwrap() {
            text = text.replace(&format!("{k}: \"\""), &format!("{k}: {v}"));
        }
        assert_eq!(ManualMetadata::parse(&text).unwrap(), m);
    }

    #[test]
    fn vocab_escape_hatch() {
        let m = ManualMetadata::parse(
            "learningTask: \"other:survival analysis\"\nlearningApproach: supervised\n",
        )
        .unwrap();
        assert_eq!(
            m.learning_task,
            Some(LearningTask::Other("survival analysis".into()))
        );
        assert!(ManualMetadata::parse("learningTask: Clustering\n").is_err());
        assert!(ManualMetadata::parse("learningTask: \"other:\"\n").is_err());
        assert!(ManualMetadata::parse("unknownField: x\n").is_err());
    }

    #[test]
    fn validation_is_monotone() {
        let mut m = ManualMetadata::default();
        let mut last = validate_manual(&m).len();
        for f in [
            |m: &mut ManualMetadata| m.license = "MIT".into(),
            |m: &mut ManualMetadata| m.model_name = "x".into(),
            |m: &mut ManualMetadata| m.owner = "o".into(),
            |m: &mut ManualMetadata| m.intended_purpose = "p".into(),
            |m: &mut ManualMetadata| m.potential_threats = "t".into(),
        ] {
            f(&mut m);
            let now = validate_manual(&m).len();
            assert!(now <= last);
            last = now;
        }
        assert_eq!(last, 0);
    }
}
