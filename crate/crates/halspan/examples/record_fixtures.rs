//! Regenerates `fixtures/showcase`: the mini-corpus, its record/replay cache
//! and the expected final-system submission.
//!
//! Detector and translator answers are scripted per instance, so the cache
//! is what a live run would have stored had the models answered that way.
//!
//!     cargo run -p halspan --example record_fixtures

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use halspan::core::extraction::render_protocol;
use halspan::core::{
    build_system_prompt, derive_hard_labels, HypothesisMode, Instance, Lang, PromptMode, SoftSpan,
    StrategyConfig, TranslationMode,
};
use halspan::jsonl::{write_audit, write_corpus, write_submission};
use halspan::pipeline::{ModelSettings, Plan, DEFAULT_MODEL_A, DEFAULT_MODEL_B};
use halspan::providers::{
    CacheStore, ChatRequest, ChatTransport, Provider, ProviderMode, TranslateTransport, TransportError,
};
use halspan::runner::detect;

struct Case {
    id: &'static str,
    lang: Lang,
    input: &'static str,
    output: &'static str,
    input_en: &'static str,
    output_en: &'static str,
    hypothesis: &'static str,
    gold: &'static [(&'static str, f64)],
    /// Spans quoted by the three final-system components.
    components: [&'static [&'static str]; 3],
}

const FI_BOOKS: &str = "kirjoja, muun muassa »The Slave Girl» ja »The Slave Girl's Daughter», jotka käsittelevät naisten sortoa ja orjuutta";
const ZH_ORIGIN: &str = "原产于欧洲，特别是地中海沿岸地区，包括西班牙、葡萄牙、法国南部、意大利和希腊等地";
const ZH_SPREAD: &str = "它在这些地区的自然环境中广泛分布，并且在园艺上也被引种到其他地区。由于其美丽的花朵和耐旱的特性，新 Valerie 在全球各地都有一定的栽培和观赏价值";
const FR_HABITAT: &str = "d'eau douce et d'eau salée. Elle est également connue sous le nom de poisson-chat de Gertrude ou de poisson-chat de Gertrude";
const CS_SPANS: &[&str] = &["Českém lese", "Jičín", "816", "údolí mezi vrcholy Kozákov", "744", "a Říp", "459"];
/// "Jičín" in decomposed form.
const CS_JICIN_NFD: &str = "Jic\u{30c}i\u{301}n";

const CASES: &[Case] = &[
    Case {
        id: "en-1",
        lang: Lang::En,
        input: "In which French department is Mouthier located?",
        output: "Mouthier is located in the department of Haute-Loire.",
        input_en: "",
        output_en: "",
        hypothesis: "Mouthier-Haute-Pierre is a commune in the Doubs department.",
        gold: &[("Haute-Loire", 1.0)],
        components: [&["Haute-Loire"], &["Haute-Loire"], &["Haute-Loire"]],
    },
    Case {
        id: "sv-1",
        lang: Lang::Sv,
        input: "Var föddes David Sandberg?",
        output: "David Sandbergs födelseort är New York.",
        input_en: "Where was David Sandberg born?",
        output_en: "David Sandberg's birthplace is New York.",
        hypothesis: "David Sandberg föddes i Jönköping.",
        gold: &[("David Sandbergs", 0.1), ("New York", 0.9)],
        components: [&["New York"], &["New York", "New York City"], &["David Sandbergs födelseort är New York"]],
    },
    Case {
        id: "it-1",
        lang: Lang::It,
        input: "Chi ha prodotto l'album Plastic Letters dei Blondie?",
        output: "Il produttore dell'album \"Plastic Letters\" di Blondie fu Mike Chapman.",
        input_en: "Who produced Blondie's album Plastic Letters?",
        output_en: "The producer of Blondie's album \"Plastic Letters\" was Mike Chapman.",
        hypothesis: "L'album Plastic Letters dei Blondie fu prodotto da Richard Gottehrer.",
        gold: &[("Mike Chapman", 0.8)],
        components: [&["Mike Chapman"], &["Mike Chapman"], &["Chapman"]],
    },
    Case {
        id: "de-1",
        lang: Lang::De,
        input: "Wann und zu welchem Verein wechselte Mario Bolatti?",
        output: "Mario Bolati wechselt im Jahr 1998 zum Verein AC Mailand.",
        input_en: "When and to which club did Mario Bolatti transfer?",
        output_en: "Mario Bolati moves to the club AC Milan in 1998.",
        hypothesis: "Mario Bolatti wechselte 2008 zum AC Florenz.",
        gold: &[("Bola", 0.2), ("ti", 0.7), ("1998", 0.9), ("AC Mailand", 0.8)],
        components: [&["ti", "1998", "AC Mailand"], &["Mario Bolati", "1998", "AC Mailand"], &["1998"]],
    },
    Case {
        id: "eu-1",
        lang: Lang::Eu,
        input: "Zenbat espezie daude Pseudoboletia generoan?",
        output: "Hiru espezie bakarrik daude.",
        input_en: "How many species are there in the genus Pseudoboletia?",
        output_en: "There are only three species.",
        hypothesis: "Pseudoboletia generoak lau espezie ditu.",
        gold: &[("Hiru", 1.0)],
        components: [&["Hiru"], &["Hiru"], &["Hiru espezie"]],
    },
    Case {
        id: "ca-1",
        lang: Lang::Ca,
        input: "A quina altitud es troba el municipi de Yushu?",
        output: "El municipi de Yushu es troba a 4.500 metres sobre el nivell del mar.",
        input_en: "At what altitude is the municipality of Yushu located?",
        output_en: "The municipality of Yushu is located at 4,500 metres above sea level.",
        hypothesis: "Yushu es troba a uns 3.700 metres d'altitud.",
        gold: &[("4.500", 0.9), (" metres", 0.4)],
        components: [&["4.500"], &["4.500 metres"], &["4.500"]],
    },
    Case {
        id: "fi-1",
        lang: Lang::Fi,
        input: "Kuka on Folorunsho Alakija?",
        output: "Folorunsho Alakija on nigerialainen kirjailija ja aktivisti. Hän on kirjoittanut useita kirjoja, muun muassa »The Slave Girl» ja »The Slave Girl's Daughter», jotka käsittelevät naisten sortoa ja orjuutta.",
        input_en: "Who is Folorunsho Alakija?",
        output_en: "Folorunsho Alakija is a Nigerian writer and activist. She has written several books, including »The Slave Girl» and »The Slave Girl's Daughter», which deal with the oppression of women and slavery.",
        hypothesis: "Folorunsho Alakija on nigerialainen liikenainen ja hyväntekijä.",
        gold: &[("kirjailija", 0.6), ("aktivisti", 0.6), (FI_BOOKS, 0.9)],
        components: [&["kirjailija", "aktivisti", FI_BOOKS], &["kirjailija", FI_BOOKS], &["aktivisti", "kirjoja"]],
    },
    Case {
        id: "zh-1",
        lang: Lang::Zh,
        input: "新缬草原产于哪里？",
        output: "新缬草原产于欧洲，特别是地中海沿岸地区，包括西班牙、葡萄牙、法国南部、意大利和希腊等地。它在这些地区的自然环境中广泛分布，并且在园艺上也被引种到其他地区。由于其美丽的花朵和耐旱的特性，新 Valerie 在全球各地都有一定的栽培和观赏价值",
        input_en: "Where is the new valerian native to?",
        output_en: "The new valerian is native to Europe, especially the Mediterranean coast, including Spain, Portugal, southern France, Italy and Greece. It is widely distributed in the natural environment of these regions and has also been introduced to other regions in horticulture. Due to its beautiful flowers and drought tolerance, the new Valerie has some cultivation and ornamental value all over the world",
        hypothesis: "新缬草原产于北美洲西部。",
        gold: &[(ZH_ORIGIN, 0.8), (ZH_SPREAD, 0.7)],
        components: [&[ZH_ORIGIN, ZH_SPREAD], &[ZH_ORIGIN, ZH_SPREAD], &[ZH_ORIGIN]],
    },
    Case {
        id: "cs-1",
        lang: Lang::Cs,
        input: "Kde pramení řeka Labe?",
        output: "Řeka Labe (německy Elbe) pramení v Českém lese, konkrétně v okrese Jičín, v nadmořské výšce 816 metrů. Pramení v údolí mezi vrcholy Kozákov (744 metrů) a Říp (459 metrů).",
        input_en: "Where does the Elbe river rise?",
        output_en: "The Elbe River (German: Elbe) rises in the Bohemian Forest, specifically in the Jičín district, at an altitude of 816 metres. It rises in the valley between the peaks of Kozákov (744 metres) and Říp (459 metres).",
        hypothesis: "Labe pramení v Krkonoších na Labské louce v nadmořské výšce 1386 metrů.",
        gold: &[
            ("Českém lese", 0.9),
            ("Jičín", 0.9),
            ("816", 0.8),
            ("údolí mezi vrcholy Kozákov", 0.7),
            ("744", 0.6),
            ("a Říp", 0.6),
            ("459", 0.6),
        ],
        components: [CS_SPANS, CS_SPANS, &[CS_JICIN_NFD, "816", "744", "459"]],
    },
    Case {
        id: "fr-1",
        lang: Lang::Fr,
        input: "À quelle famille appartient l'espèce Pseudomugil gertrudae ?",
        output: "L'espèce Pseudomugil gertrudae appartient à la famille des Poeciliidae, qui est une famille d'espèces de poissons d'eau douce et d'eau salée. Elle est également connue sous le nom de poisson-chat de Gertrude ou de poisson-chat de Gertrude.",
        input_en: "Which family does the species Pseudomugil gertrudae belong to?",
        output_en: "The species Pseudomugil gertrudae belongs to the family Poeciliidae, which is a family of freshwater and saltwater fish species. It is also known as Gertrude's catfish or Gertrude's catfish.",
        hypothesis: "Pseudomugil gertrudae appartient à la famille des Pseudomugilidae.",
        gold: &[("Poeciliidae", 0.9), (FR_HABITAT, 0.7)],
        components: [&["Poeciliidae", FR_HABITAT], &["Poeciliidae", FR_HABITAT], &["Poeciliidae", "poisson-chat de Gertrude"]],
    },
    Case {
        id: "fa-1",
        lang: Lang::Fa,
        input: "پایتخت استرالیا کدام شهر است؟",
        output: "پایتخت استرالیا سیدنی است.",
        input_en: "Which city is the capital of Australia?",
        output_en: "The capital of Australia is Sydney.",
        hypothesis: "پایتخت استرالیا کانبرا است.",
        gold: &[("سیدنی", 1.0)],
        components: [&["سیدنی"], &["سیدنی"], &["سیدنی"]],
    },
    Case {
        id: "ar-1",
        lang: Lang::Ar,
        input: "في أي عام ولد ألبرت أينشتاين؟",
        output: "ولد ألبرت أينشتاين في عام 1890 في مدينة أولم.",
        input_en: "In what year was Albert Einstein born?",
        output_en: "Albert Einstein was born in 1890 in the city of Ulm.",
        hypothesis: "ولد ألبرت أينشتاين عام 1879.",
        gold: &[("عام", 0.3), ("1890", 1.0)],
        components: [&["1890"], &["1890"], &["عام 1890"]],
    },
    Case {
        id: "en-2",
        lang: Lang::En,
        input: "Where is the Eiffel Tower?",
        output: "The Eiffel Tower is located in Paris.",
        input_en: "",
        output_en: "",
        hypothesis: "The Eiffel Tower stands in Paris, France.",
        gold: &[],
        components: [&[], &[], &["Paris"]],
    },
    Case {
        id: "sv-2",
        lang: Lang::Sv,
        input: "Vilken stad är Sveriges huvudstad?",
        output: "Stockholm är Sveriges huvudstad.",
        input_en: "Which city is the capital of Sweden?",
        output_en: "Stockholm is the capital of Sweden.",
        hypothesis: "Sveriges huvudstad är Stockholm.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "it-2",
        lang: Lang::It,
        input: "Qual è la capitale d'Italia?",
        output: "Roma è la capitale d'Italia.",
        input_en: "What is the capital of Italy?",
        output_en: "Rome is the capital of Italy.",
        hypothesis: "La capitale d'Italia è Roma.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "de-2",
        lang: Lang::De,
        input: "Was ist die Hauptstadt von Deutschland?",
        output: "Berlin ist die Hauptstadt von Deutschland.",
        input_en: "What is the capital of Germany?",
        output_en: "Berlin is the capital of Germany.",
        hypothesis: "Die Hauptstadt Deutschlands ist Berlin.",
        gold: &[],
        components: [&[], &["Hauptstadt"], &[]],
    },
    Case {
        id: "eu-2",
        lang: Lang::Eu,
        input: "Zein da Bizkaiko hiriburua?",
        output: "Bilbo Bizkaiko hiriburua da.",
        input_en: "What is the capital of Biscay?",
        output_en: "Bilbao is the capital of Biscay.",
        hypothesis: "Bizkaiko hiriburua Bilbo da.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "ca-2",
        lang: Lang::Ca,
        input: "Quina és la capital de Catalunya?",
        output: "Barcelona és la capital de Catalunya.",
        input_en: "What is the capital of Catalonia?",
        output_en: "Barcelona is the capital of Catalonia.",
        hypothesis: "La capital de Catalunya és Barcelona.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "fi-2",
        lang: Lang::Fi,
        input: "Mikä on Suomen pääkaupunki?",
        output: "Helsinki on Suomen pääkaupunki.",
        input_en: "What is the capital of Finland?",
        output_en: "Helsinki is the capital of Finland.",
        hypothesis: "Suomen pääkaupunki on Helsinki.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "zh-2",
        lang: Lang::Zh,
        input: "中国的首都是哪里？",
        output: "北京是中国的首都。",
        input_en: "What is the capital of China?",
        output_en: "Beijing is the capital of China.",
        hypothesis: "中国的首都是北京。",
        gold: &[],
        components: [&[], &["北京"], &[]],
    },
    Case {
        id: "cs-2",
        lang: Lang::Cs,
        input: "Které město je hlavním městem České republiky?",
        output: "Praha je hlavní město České republiky.",
        input_en: "Which city is the capital of the Czech Republic?",
        output_en: "Prague is the capital of the Czech Republic.",
        hypothesis: "Hlavním městem České republiky je Praha.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "fr-2",
        lang: Lang::Fr,
        input: "Quelle est la capitale de la France ?",
        output: "Paris est la capitale de la France.",
        input_en: "What is the capital of France?",
        output_en: "Paris is the capital of France.",
        hypothesis: "La capitale de la France est Paris.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "fa-2",
        lang: Lang::Fa,
        input: "پایتخت ایران کجاست؟",
        output: "تهران پایتخت ایران است.",
        input_en: "Where is the capital of Iran?",
        output_en: "Tehran is the capital of Iran.",
        hypothesis: "پایتخت ایران تهران است.",
        gold: &[],
        components: [&[], &[], &[]],
    },
    Case {
        id: "ar-2",
        lang: Lang::Ar,
        input: "ما هي عاصمة مصر؟",
        output: "القاهرة هي عاصمة مصر.",
        input_en: "What is the capital of Egypt?",
        output_en: "Cairo is the capital of Egypt.",
        hypothesis: "عاصمة مصر هي القاهرة.",
        gold: &[],
        components: [&[], &[], &["القاهرة"]],
    },
];

fn instance(c: &Case) -> Instance {
    let mut soft: Vec<SoftSpan> = c
        .gold
        .iter()
        .map(|(text, prob)| {
            let byte = c.output.find(text).unwrap_or_else(|| panic!("{}: {text:?} not in output", c.id));
            let start = c.output[..byte].chars().count();
            SoftSpan::new(start, start + text.chars().count(), *prob)
        })
        .collect();
    soft.sort_by_key(|s| s.start);
    Instance {
        id: c.id.to_string(),
        lang: c.lang,
        model_input: c.input.to_string(),
        model_output_text: c.output.to_string(),
        model_id: None,
        gold_hard: Some(derive_hard_labels(&soft)),
        gold_soft: Some(soft),
    }
}

fn quote(spans: &[&str], open: char, close: char) -> String {
    let quoted: Vec<String> = spans.iter().map(|s| format!("{open}{s}{close}")).collect();
    format!("So the hallucinations are: {}", quoted.join(", "))
}

struct ScriptedChat {
    hypothesis_system: String,
    zero_shot_system: String,
}

impl ScriptedChat {
    /// The case whose output appears in `prompt`; the longest wins.
    fn case_in(prompt: &str) -> Option<&'static Case> {
        CASES
            .iter()
            .filter(|c| prompt.contains(c.output))
            .max_by_key(|c| c.output.len())
    }
}

impl ChatTransport for ScriptedChat {
    fn complete(&self, req: &ChatRequest) -> Result<String, TransportError> {
        if req.system_prompt == self.hypothesis_system {
            let case = CASES
                .iter()
                .find(|c| c.input == req.user_prompt)
                .ok_or_else(|| TransportError::Fatal(format!("unscripted question {:?}", req.user_prompt)))?;
            return Ok(case.hypothesis.to_string());
        }
        let case = Self::case_in(&req.user_prompt)
            .ok_or_else(|| TransportError::Fatal(format!("unscripted prompt {:?}", req.user_prompt)))?;
        let with_hypothesis = req.user_prompt.contains("and the hypothesis is");
        let slot = match (req.model_ref.as_str(), with_hypothesis) {
            (DEFAULT_MODEL_A, true) => 0,
            (DEFAULT_MODEL_B, true) => 1,
            (DEFAULT_MODEL_B, false) => 2,
            _ if req.system_prompt == self.zero_shot_system => 3,
            (m, _) => return Err(TransportError::Fatal(format!("unscripted model {m}"))),
        };
        let spans: Vec<&str> = match slot {
            3 => case.components[0].iter().take(1).copied().collect(),
            s => case.components[s].to_vec(),
        };
        let reasoning = if spans.is_empty() {
            "Every claim in the output agrees with the input."
        } else if with_hypothesis {
            "The output disagrees with the hypothesis in the parts listed below."
        } else {
            "The parts listed below are not supported by the input."
        };
        if case.id == "eu-1" && slot == 2 && !req.user_prompt.contains("Remember to end your answer") {
            return Ok("Hiru espezie is the doubtful claim; the genus has more members.".to_string());
        }
        let protocol = if case.id == "zh-1" && slot == 1 {
            quote(&spans, '「', '」')
        } else {
            let owned: Vec<String> = spans.iter().map(|s| s.to_string()).collect();
            render_protocol(&owned)
        };
        Ok(format!("{reasoning}\n\n{protocol}"))
    }
}

struct ScriptedTranslator {
    table: HashMap<&'static str, &'static str>,
}

impl TranslateTransport for ScriptedTranslator {
    fn translate(&self, text: &str, _: Lang, target: Lang) -> Result<String, TransportError> {
        match self.table.get(text) {
            Some(t) if target == Lang::En => Ok(t.to_string()),
            _ => Err(TransportError::Fatal(format!("unscripted translation {text:?}"))),
        }
    }
}

/// Plans recorded into the cache: the final system plus one zero-shot cell.
fn recorded_plans() -> Vec<Plan> {
    vec![
        Plan::final_system(DEFAULT_MODEL_A, DEFAULT_MODEL_B),
        Plan::parse("zero_shot,none,none,a", DEFAULT_MODEL_A, DEFAULT_MODEL_B).expect("valid cell"),
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/showcase");
    let cache_dir = root.join("cache");
    if cache_dir.exists() {
        fs::remove_dir_all(&cache_dir)?;
    }
    let corpus: Vec<Instance> = CASES.iter().map(instance).collect();
    write_corpus(root.join("corpus.jsonl"), &corpus)?;

    let zero_shot = StrategyConfig {
        prompt_mode: PromptMode::ZeroShot,
        translation_mode: TranslationMode::None,
        hypothesis_mode: HypothesisMode::None,
        detector_model: DEFAULT_MODEL_A.to_string(),
        hypothesis_model: None,
    };
    let chat = ScriptedChat {
        hypothesis_system: halspan::core::build_hypothesis_prompt(&corpus[0]).system_prompt,
        zero_shot_system: build_system_prompt(&zero_shot)?,
    };
    let translator = ScriptedTranslator {
        table: CASES
            .iter()
            .filter(|c| c.lang != Lang::En)
            .flat_map(|c| [(c.input, c.input_en), (c.output, c.output_en)])
            .collect(),
    };
    let recorder = Provider::new(
        ProviderMode::Record,
        Some(CacheStore::open(&cache_dir)?),
        Arc::new(chat),
        Arc::new(translator),
    )?;
    let settings = ModelSettings::default();
    for plan in recorded_plans() {
        let det = detect(&corpus, &plan, &recorder, settings, 1)?;
        assert!(det.failed.is_empty(), "{}: failed instances {:?}", plan.name, det.failed);
    }

    let replay = Provider::replay(CacheStore::at(&cache_dir));
    let det = detect(&corpus, &recorded_plans()[0], &replay, settings, 1)?;
    write_submission(root.join("expected_final.jsonl"), &det.predictions)?;
    write_audit(root.join("expected_final.audit.jsonl"), &det.audit)?;
    println!(
        "{} instances, {} cache records written to {}",
        corpus.len(),
        CacheStore::at(&cache_dir).len(),
        root.display()
    );
    Ok(())
}
