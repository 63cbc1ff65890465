//! Prompt assembly for every cell of the strategy grid.
//!
//! A detector system prompt is the hallucination definition, the output
//! format instruction, the worked examples (few-shot only) and finally the
//! approach-specific instructions, joined by blank lines. User prompts are
//! single-pass instantiations of the bundled user templates.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::lang::Lang;
use crate::templates::{self as t, render, text};

/// Version of the bundled prompt templates. Part of every chat fingerprint
/// through the prompt text itself; exposed for cache records and reports.
pub const TEMPLATE_VERSION: &str = t::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    ZeroShot,
    FewShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationMode {
    /// English prompt, input/output in the original language only.
    None,
    /// The system prompt is machine-translated into the instance language.
    PromptInOriginal,
    /// Input and output are machine-translated into English and supplied
    /// next to the originals.
    ExternalToEnglish,
    /// The detector is told to translate to English itself before detecting.
    LlmTranslates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisMode {
    None,
    /// Hypothesis generated by the detector model itself.
    #[serde(rename = "self")]
    SelfModel,
    /// Hypothesis generated by a different model.
    Cross,
}

macro_rules! snake_enum_str {
    ($ty:ty { $($variant:path => $s:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $s),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = PromptError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().replace('-', "_").as_str() {
                    $($s => Ok($variant),)+
                    other => Err(PromptError::UnknownMode(other.to_string())),
                }
            }
        }
    };
}

snake_enum_str!(PromptMode {
    PromptMode::ZeroShot => "zero_shot",
    PromptMode::FewShot => "few_shot",
});

snake_enum_str!(TranslationMode {
    TranslationMode::None => "none",
    TranslationMode::PromptInOriginal => "prompt_in_original",
    TranslationMode::ExternalToEnglish => "external_to_english",
    TranslationMode::LlmTranslates => "llm_translates",
});

snake_enum_str!(HypothesisMode {
    HypothesisMode::None => "none",
    HypothesisMode::SelfModel => "self",
    HypothesisMode::Cross => "cross",
});

/// A single detector configuration: one cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub prompt_mode: PromptMode,
    pub translation_mode: TranslationMode,
    pub hypothesis_mode: HypothesisMode,
    pub detector_model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PromptError {
    UnknownMode(String),
    /// hypothesis_model must be present exactly when hypothesis_mode is not none,
    /// equal to the detector for `self` and different for `cross`.
    HypothesisModel(&'static str),
    UnsupportedCombination(&'static str),
    MissingTranslation,
    UnexpectedTranslation,
    MissingHypothesis,
    UnexpectedHypothesis,
}

impl fmt::Display for PromptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptError::UnknownMode(m) => write!(f, "unknown strategy mode {m:?}"),
            PromptError::HypothesisModel(why) => write!(f, "invalid hypothesis model: {why}"),
            PromptError::UnsupportedCombination(why) => write!(f, "unsupported strategy: {why}"),
            PromptError::MissingTranslation => f.write_str("strategy requires English translations"),
            PromptError::UnexpectedTranslation => {
                f.write_str("translations supplied to a strategy that does not use them")
            }
            PromptError::MissingHypothesis => f.write_str("strategy requires a hypothesis"),
            PromptError::UnexpectedHypothesis => {
                f.write_str("hypothesis supplied to a strategy that does not use one")
            }
        }
    }
}

impl core::error::Error for PromptError {}

impl StrategyConfig {
    pub fn new(
        prompt_mode: PromptMode,
        translation_mode: TranslationMode,
        hypothesis_mode: HypothesisMode,
        detector_model: impl Into<String>,
        hypothesis_model: Option<String>,
    ) -> Result<Self, PromptError> {
        let s = StrategyConfig {
            prompt_mode,
            translation_mode,
            hypothesis_mode,
            detector_model: detector_model.into(),
            hypothesis_model,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        match (self.hypothesis_mode, &self.hypothesis_model) {
            (HypothesisMode::None, None) => {}
            (HypothesisMode::None, Some(_)) => {
                return Err(PromptError::HypothesisModel("given without a hypothesis mode"))
            }
            (_, None) => return Err(PromptError::HypothesisModel("missing")),
            (HypothesisMode::SelfModel, Some(m)) if *m != self.detector_model => {
                return Err(PromptError::HypothesisModel("self mode needs the detector model"))
            }
            (HypothesisMode::Cross, Some(m)) if *m == self.detector_model => {
                return Err(PromptError::HypothesisModel("cross mode needs a different model"))
            }
            _ => {}
        }
        if self.translation_mode == TranslationMode::LlmTranslates
            && self.hypothesis_mode != HypothesisMode::None
        {
            return Err(PromptError::UnsupportedCombination(
                "no prompt template combines LLM translation with a hypothesis",
            ));
        }
        Ok(())
    }

    /// True when the user prompt for `lang` carries external English
    /// translations. English instances never do.
    pub fn needs_translations(&self, lang: Lang) -> bool {
        self.translation_mode == TranslationMode::ExternalToEnglish && lang != Lang::En
    }

    pub fn uses_hypothesis(&self) -> bool {
        self.hypothesis_mode != HypothesisMode::None
    }

    /// Compact, filesystem- and log-friendly identifier of the cell.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{}/{}/{}@{}",
            self.prompt_mode, self.translation_mode, self.hypothesis_mode, self.detector_model
        );
        if let Some(h) = &self.hypothesis_model {
            s.push('+');
            s.push_str(h);
        }
        s
    }
}

/// External English translations of an instance's input and output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationPair {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_prompt: String,
    pub user_prompt: String,
}

/// The worked examples, one per hallucination category followed by the
/// output-format example.
pub const FEW_SHOT_EXAMPLES: [&str; 5] = [
    t::EXAMPLE_INPUT_OUTPUT,
    t::EXAMPLE_FACTUAL,
    t::EXAMPLE_INTERNAL,
    t::EXAMPLE_MISSPELLING,
    t::EXAMPLE_OUTPUT_FORMAT,
];

/// The ordered fragments a detector system prompt is made of.
pub fn system_prompt_sections(strategy: &StrategyConfig) -> Result<Vec<&'static str>, PromptError> {
    strategy.validate()?;
    let mut sections = Vec::with_capacity(8);
    sections.push(text(t::DEFINITION));
    sections.push(text(t::OUTPUT_FORMAT));
    if strategy.prompt_mode == PromptMode::FewShot {
        sections.extend(FEW_SHOT_EXAMPLES.iter().map(|e| text(e)));
    }
    let hyp = strategy.uses_hypothesis();
    let approach = match (strategy.translation_mode, hyp) {
        (TranslationMode::None | TranslationMode::PromptInOriginal, false) => t::SYSTEM_PAIR,
        (TranslationMode::None | TranslationMode::PromptInOriginal, true) => t::SYSTEM_PAIR_HYPOTHESIS,
        (TranslationMode::ExternalToEnglish, false) => t::SYSTEM_TRANSLATION,
        (TranslationMode::ExternalToEnglish, true) => t::SYSTEM_TRANSLATION_HYPOTHESIS,
        (TranslationMode::LlmTranslates, false) => t::SYSTEM_LLM_TRANSLATION,
        (TranslationMode::LlmTranslates, true) => unreachable!("rejected by validate"),
    };
    sections.push(text(approach));
    Ok(sections)
}

/// English detector system prompt for `strategy`.
///
/// For [`TranslationMode::PromptInOriginal`] this is the text that gets
/// machine-translated into the instance language by the caller; see
/// [`translated_system_prompt`].
pub fn build_system_prompt(strategy: &StrategyConfig) -> Result<String, PromptError> {
    Ok(system_prompt_sections(strategy)?.join("\n\n"))
}

/// Wraps a machine-translated system prompt so the answer protocol survives
/// translation: the English reminder naming the marker is appended verbatim.
pub fn translated_system_prompt(translated: &str) -> String {
    format!("{}\n\n{}", translated.trim_end(), protocol_reminder())
}

/// Sentence appended to a user prompt when re-asking a detector whose answer
/// lacked the protocol marker.
pub fn protocol_reminder() -> &'static str {
    text(t::PROTOCOL_REMINDER)
}

pub fn with_protocol_reminder(user_prompt: &str) -> String {
    format!("{user_prompt}\n\n{}", protocol_reminder())
}

/// Instantiates the user template that matches `strategy` and the extras.
pub fn build_user_prompt(
    inst: &Instance,
    strategy: &StrategyConfig,
    translations: Option<&TranslationPair>,
    hypothesis: Option<&str>,
) -> Result<String, PromptError> {
    strategy.validate()?;
    let wants_translation = strategy.needs_translations(inst.lang);
    match (wants_translation, translations) {
        (true, None) => return Err(PromptError::MissingTranslation),
        (false, Some(_)) => return Err(PromptError::UnexpectedTranslation),
        _ => {}
    }
    match (strategy.uses_hypothesis(), hypothesis) {
        (true, None) => return Err(PromptError::MissingHypothesis),
        (false, Some(_)) => return Err(PromptError::UnexpectedHypothesis),
        _ => {}
    }

    let input = inst.model_input.as_str();
    let output = inst.model_output_text.as_str();
    let hyp = hypothesis.unwrap_or_default();
    let prompt = match (translations, strategy.translation_mode) {
        (Some(tr), _) => {
            let vars = [
                ("input", input),
                ("output", output),
                ("input_translation", tr.input.as_str()),
                ("output_translation", tr.output.as_str()),
                ("hypothesis", hyp),
            ];
            if hypothesis.is_some() {
                render(t::USER_TRANSLATION_HYPOTHESIS, &vars)
            } else {
                render(t::USER_TRANSLATION, &vars)
            }
        }
        (None, TranslationMode::LlmTranslates) => {
            render(t::USER_LLM_TRANSLATION, &[("input", input), ("output", output)])
        }
        (None, _) => {
            let vars = [("input", input), ("output", output), ("hypothesis", hyp)];
            if hypothesis.is_some() {
                render(t::USER_PAIR_HYPOTHESIS, &vars)
            } else {
                render(t::USER_PAIR, &vars)
            }
        }
    };
    Ok(prompt)
}

/// Prompt asking a model to answer the instance's input itself. The answer
/// becomes the hypothesis shown to a detector.
pub fn build_hypothesis_prompt(inst: &Instance) -> PromptBundle {
    PromptBundle {
        system_prompt: text(t::ANSWER_GENERATION).to_string(),
        user_prompt: inst.model_input.clone(),
    }
}
