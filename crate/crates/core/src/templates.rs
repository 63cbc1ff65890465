//! Bundled prompt text. The files live under `templates/v1/`; see the NOTES
//! file there for the verbatim quirks they preserve.

use alloc::string::String;

pub const VERSION: &str = "v1";

macro_rules! template {
    ($name:ident, $file:literal) => {
        pub const $name: &str = include_str!(concat!("../templates/v1/", $file));
    };
}

template!(DEFINITION, "definition.txt");
template!(OUTPUT_FORMAT, "output_format.txt");
template!(EXAMPLE_INPUT_OUTPUT, "example_input_output.txt");
template!(EXAMPLE_FACTUAL, "example_factual.txt");
template!(EXAMPLE_INTERNAL, "example_internal.txt");
template!(EXAMPLE_MISSPELLING, "example_misspelling.txt");
template!(EXAMPLE_OUTPUT_FORMAT, "example_output_format.txt");
template!(ANSWER_GENERATION, "answer_generation.txt");
template!(SYSTEM_PAIR, "system_pair.txt");
template!(SYSTEM_PAIR_HYPOTHESIS, "system_pair_hypothesis.txt");
template!(SYSTEM_TRANSLATION, "system_translation.txt");
template!(SYSTEM_TRANSLATION_HYPOTHESIS, "system_translation_hypothesis.txt");
template!(SYSTEM_LLM_TRANSLATION, "system_llm_translation.txt");
template!(USER_PAIR, "user_pair.txt");
template!(USER_PAIR_HYPOTHESIS, "user_pair_hypothesis.txt");
template!(USER_TRANSLATION, "user_translation.txt");
template!(USER_TRANSLATION_HYPOTHESIS, "user_translation_hypothesis.txt");
template!(USER_LLM_TRANSLATION, "user_llm_translation.txt");
template!(PROTOCOL_REMINDER, "protocol_reminder.txt");

/// Template body without the file's trailing newline.
pub fn text(raw: &'static str) -> &'static str {
    raw.strip_suffix('\n').unwrap_or(raw)
}

/// Single-pass `{name}` substitution. Unknown placeholders are left as-is and
/// substituted values are never rescanned.
pub fn render(raw: &'static str, vars: &[(&str, &str)]) -> String {
    let tpl = text(raw);
    let mut out = String::with_capacity(tpl.len() + vars.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = tpl;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let value = after.find('}').and_then(|close| {
            let key = &after[..close];
            vars.iter().find(|(k, _)| *k == key).map(|(_, v)| (*v, close))
        });
        match value {
            Some((v, close)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_single_pass() {
        let got = render(USER_PAIR, &[("input", "{output}"), ("output", "b")]);
        assert_eq!(got, "The input is:{output} and the output that might contain hallucination is: b");
    }

    #[test]
    fn every_template_is_nonempty_without_trailing_newline() {
        for t in [
            DEFINITION,
            OUTPUT_FORMAT,
            EXAMPLE_INPUT_OUTPUT,
            EXAMPLE_FACTUAL,
            EXAMPLE_INTERNAL,
            EXAMPLE_MISSPELLING,
            EXAMPLE_OUTPUT_FORMAT,
            ANSWER_GENERATION,
            SYSTEM_PAIR,
            SYSTEM_PAIR_HYPOTHESIS,
            SYSTEM_TRANSLATION,
            SYSTEM_TRANSLATION_HYPOTHESIS,
            SYSTEM_LLM_TRANSLATION,
            USER_PAIR,
            USER_PAIR_HYPOTHESIS,
            USER_TRANSLATION,
            USER_TRANSLATION_HYPOTHESIS,
            USER_LLM_TRANSLATION,
            PROTOCOL_REMINDER,
        ] {
            assert!(!text(t).is_empty());
            assert!(!text(t).ends_with('\n'));
        }
    }
}
