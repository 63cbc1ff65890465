//! Per-instance detection: prompts, provider calls, extraction, alignment
//! and ensembling.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use halspan_core::prompting::{translated_system_prompt, with_protocol_reminder};
use halspan_core::{
    align_all, build_hypothesis_prompt, build_system_prompt, build_user_prompt, combine,
    extract_spans, AlignedSpans, ExtractionResult, HypothesisMode, Instance, Lang, Prediction,
    PromptError, PromptMode, StrategyConfig, TranslationMode, TranslationPair,
};

use crate::error::Result;
use crate::jsonl::{AuditEntry, AuditKind};
use crate::providers::{ChatRequest, Provider};

/// Detector model of components 1 (and hypothesis source for component 2).
pub const DEFAULT_MODEL_A: &str = "anthropic.claude-3-5-sonnet-20241022-v2:0";
/// Detector model of components 2 and 3.
pub const DEFAULT_MODEL_B: &str = "meta.llama3-1-405b-instruct-v1:0";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSettings {
    pub temperature: f64,
    pub detector_max_tokens: u32,
    pub hypothesis_max_tokens: u32,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            temperature: 0.0,
            detector_max_tokens: 2048,
            hypothesis_max_tokens: 1024,
        }
    }
}

/// The detector components whose votes are ensembled for each instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub name: String,
    pub components: Vec<StrategyConfig>,
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Plan {
    pub fn single(strategy: StrategyConfig) -> Self {
        Plan {
            name: strategy.label(),
            components: vec![strategy],
        }
    }

    /// The three-component final system: model A with model B's hypothesis,
    /// model B with model A's hypothesis, and model B without a hypothesis.
    /// All components see the original texts and their English translations.
    pub fn final_system(model_a: &str, model_b: &str) -> Self {
        let component = |detector: &str, hyp: Option<&str>| StrategyConfig {
            prompt_mode: PromptMode::FewShot,
            translation_mode: TranslationMode::ExternalToEnglish,
            hypothesis_mode: if hyp.is_some() { HypothesisMode::Cross } else { HypothesisMode::None },
            detector_model: detector.to_string(),
            hypothesis_model: hyp.map(str::to_string),
        };
        Plan {
            name: "final".to_string(),
            components: vec![
                component(model_a, Some(model_b)),
                component(model_b, Some(model_a)),
                component(model_b, None),
            ],
        }
    }

    /// Parses `final`, or `;`-separated components of the form
    /// `prompt_mode,translation_mode,hypothesis_mode,detector[,hypothesis_model]`.
    /// The model names `a` and `b` stand for `model_a` and `model_b`.
    pub fn parse(text: &str, model_a: &str, model_b: &str) -> std::result::Result<Self, PromptError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("final") {
            return Ok(Plan::final_system(model_a, model_b));
        }
        let model = |m: &str| match m.trim() {
            "a" | "A" => model_a.to_string(),
            "b" | "B" => model_b.to_string(),
            other => other.to_string(),
        };
        let mut components = Vec::new();
        for part in text.split(';').filter(|p| !p.trim().is_empty()) {
            let fields: Vec<&str> = part.split(',').map(str::trim).collect();
            if !(4..=5).contains(&fields.len()) {
                return Err(PromptError::UnknownMode(part.to_string()));
            }
            components.push(StrategyConfig::new(
                fields[0].parse()?,
                fields[1].parse()?,
                fields[2].parse()?,
                model(fields[3]),
                fields.get(4).map(|m| model(m)),
            )?);
        }
        if components.is_empty() {
            return Err(PromptError::UnknownMode(text.to_string()));
        }
        Ok(Plan {
            name: text.to_string(),
            components,
        })
    }

    pub fn validate(&self) -> std::result::Result<(), PromptError> {
        self.components.iter().try_for_each(StrategyConfig::validate)
    }

    fn component_label(&self, i: usize) -> String {
        if self.components.len() == 1 {
            self.name.clone()
        } else {
            format!("{}:C{}", self.name, i + 1)
        }
    }
}

/// One detector run on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentOutput {
    pub label: String,
    pub model: String,
    pub raw_text: String,
    pub extraction: ExtractionResult,
    pub aligned: AlignedSpans,
    /// The first answer lacked the protocol sentence and the detector was asked again.
    pub reprompted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub prediction: Prediction,
    pub components: Vec<ComponentOutput>,
    pub audit: Vec<AuditEntry>,
    pub failed: bool,
}

pub struct Pipeline<'p> {
    provider: &'p Provider,
    settings: ModelSettings,
    translated_prompts: Mutex<HashMap<(Lang, String), String>>,
}

impl<'p> Pipeline<'p> {
    pub fn new(provider: &'p Provider) -> Self {
        Self::with_settings(provider, ModelSettings::default())
    }

    pub fn with_settings(provider: &'p Provider, settings: ModelSettings) -> Self {
        Pipeline {
            provider,
            settings,
            translated_prompts: Mutex::new(HashMap::new()),
        }
    }

    /// Runs `plan` on `inst`. Failures never propagate: the instance gets a
    /// mark-none prediction and an `instance_failed` audit entry.
    pub fn run(&self, inst: &Instance, plan: &Plan) -> InstanceOutcome {
        match self.try_run(inst, plan) {
            Ok(outcome) => outcome,
            Err(e) => {
                log::error!("instance {}: {e}", inst.id);
                InstanceOutcome {
                    prediction: Prediction::empty(inst.id.clone(), inst.char_len()),
                    components: Vec::new(),
                    audit: vec![AuditEntry {
                        id: inst.id.clone(),
                        strategy: plan.name.clone(),
                        kind: AuditKind::InstanceFailed,
                        span: None,
                        detail: Some(e.to_string()),
                    }],
                    failed: true,
                }
            }
        }
    }

    pub fn try_run(&self, inst: &Instance, plan: &Plan) -> Result<InstanceOutcome> {
        plan.validate()?;
        let translations = if plan.components.iter().any(|c| c.needs_translations(inst.lang)) {
            Some(self.translations(inst)?)
        } else {
            None
        };
        // each model answers the input at most once per instance
        let mut hypotheses: HashMap<&str, String> = HashMap::new();
        for c in &plan.components {
            if let Some(m) = c.hypothesis_model.as_deref() {
                if !hypotheses.contains_key(m) {
                    hypotheses.insert(m, self.hypothesis(inst, m)?);
                }
            }
        }

        let mut components = Vec::with_capacity(plan.components.len());
        let mut audit = Vec::new();
        for (i, strategy) in plan.components.iter().enumerate() {
            let hyp = strategy
                .hypothesis_model
                .as_deref()
                .and_then(|m| hypotheses.get(m))
                .map(String::as_str);
            let tr = translations.as_ref().filter(|_| strategy.needs_translations(inst.lang));
            let (out, entries) = self.run_component(inst, strategy, &plan.component_label(i), tr, hyp)?;
            components.push(out);
            audit.extend(entries);
        }
        let ranges: Vec<_> = components.iter().map(|c| c.aligned.ranges.clone()).collect();
        let prediction = combine(inst.id.clone(), inst.char_len(), &ranges)?;
        Ok(InstanceOutcome {
            prediction,
            components,
            audit,
            failed: false,
        })
    }

    /// English translations of the instance's input and output.
    pub fn translations(&self, inst: &Instance) -> Result<TranslationPair> {
        let input = self.provider.translate(&inst.model_input, inst.lang, Lang::En)?;
        let output = self.provider.translate(&inst.model_output_text, inst.lang, Lang::En)?;
        Ok(TranslationPair {
            input: input.translated_text,
            output: output.translated_text,
        })
    }

    /// `model`'s own answer to the instance's input.
    pub fn hypothesis(&self, inst: &Instance, model: &str) -> Result<String> {
        let bundle = build_hypothesis_prompt(inst);
        let req = ChatRequest {
            model_ref: model.to_string(),
            system_prompt: bundle.system_prompt,
            user_prompt: bundle.user_prompt,
            temperature: self.settings.temperature,
            max_tokens: self.settings.hypothesis_max_tokens,
        };
        Ok(self.provider.chat(&req)?.text.trim().to_string())
    }

    /// Detector system prompt for `lang`. Prompt-in-original strategies get
    /// the English prompt machine-translated once per language.
    pub fn system_prompt(&self, lang: Lang, strategy: &StrategyConfig) -> Result<String> {
        let english = build_system_prompt(strategy)?;
        if strategy.translation_mode != TranslationMode::PromptInOriginal || lang == Lang::En {
            return Ok(english);
        }
        let key = (lang, english);
        if let Some(hit) = self.translated_prompts.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let translated = self.provider.translate(&key.1, Lang::En, lang)?;
        let prompt = translated_system_prompt(&translated.translated_text);
        self.translated_prompts.lock().unwrap().insert(key, prompt.clone());
        Ok(prompt)
    }

    pub fn run_component(
        &self,
        inst: &Instance,
        strategy: &StrategyConfig,
        label: &str,
        translations: Option<&TranslationPair>,
        hypothesis: Option<&str>,
    ) -> Result<(ComponentOutput, Vec<AuditEntry>)> {
        let system_prompt = self.system_prompt(inst.lang, strategy)?;
        let user_prompt = build_user_prompt(inst, strategy, translations, hypothesis)?;
        let mut req = ChatRequest {
            model_ref: strategy.detector_model.clone(),
            system_prompt,
            user_prompt,
            temperature: self.settings.temperature,
            max_tokens: self.settings.detector_max_tokens,
        };
        let mut raw_text = self.provider.chat(&req)?.text;
        let mut extraction = extract_spans(&raw_text);
        let mut reprompted = false;
        let mut audit = Vec::new();
        if !extraction.had_marker {
            reprompted = true;
            req.user_prompt = with_protocol_reminder(&req.user_prompt);
            raw_text = self.provider.chat(&req)?.text;
            extraction = extract_spans(&raw_text);
            if !extraction.had_marker {
                log::warn!("instance {}: {label}: no protocol sentence after re-asking", inst.id);
                audit.push(AuditEntry {
                    id: inst.id.clone(),
                    strategy: label.to_string(),
                    kind: AuditKind::MissingMarker,
                    span: None,
                    detail: None,
                });
            }
        }
        let aligned = align_all(&inst.model_output_text, &extraction.spans);
        audit.extend(aligned.unmatched.iter().map(|s| AuditEntry {
            id: inst.id.clone(),
            strategy: label.to_string(),
            kind: AuditKind::UnmatchedSpan,
            span: Some(s.clone()),
            detail: None,
        }));
        Ok((
            ComponentOutput {
                label: label.to_string(),
                model: strategy.detector_model.clone(),
                raw_text,
                extraction,
                aligned,
                reprompted,
            },
            audit,
        ))
    }
}

/// The three-component final system on one instance.
pub fn run_final_system(
    pipeline: &Pipeline<'_>,
    inst: &Instance,
    model_a: &str,
    model_b: &str,
) -> Result<InstanceOutcome> {
    pipeline.try_run(inst, &Plan::final_system(model_a, model_b))
}
