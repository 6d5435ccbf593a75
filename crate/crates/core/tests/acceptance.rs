//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers once its assertions hold.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use punkit::backend::classifier::ClassifierConfig;
use punkit::backend::{
    Candidate, EmbeddingClassifier, Label, LmBackend, MockClassifier, MockLmBackend, PunPair,
    TokenClassifier, TrainingExample,
};
use punkit::backend::mock::MOCK_VOCAB;
use punkit::backend::ngram::{NgramBackend, NgramConfig};
use punkit::config::PipelineConfig;
use punkit::corpus::Corpus;
use punkit::embedding::{EmbeddingTable, TrainConfig};
use punkit::generate::{discriminative_step, DecodeConfig, DecodeState, GenInput};
use punkit::hash::{fnv1a, SplitMix64};
use punkit::homograph::{convert, ConvertParams, GlossCosineWsd, MockReverseDict, SensePair};
use punkit::label::{
    curate_classifier_dataset, grid_search_threshold, label_distribution, similarity_gap,
    unsupervised_label, LabelSource, LabeledExample, PredictorHandle,
};
use punkit::metrics::{
    ambiguity_of, distinctiveness, meaning_posterior, surprisal_ratio, MeaningPosterior,
    MetricParams,
};
use punkit::pipeline::{cmd_generate, GenerateTask};
use punkit::select::{rank_phrases, retrieve_phrases};

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn fixture_corpus() -> Corpus {
    Corpus::ingest_files(&[fixtures().join("corpus/nonpun.txt")]).unwrap()
}

/// Deterministic random unit vector for a word.
fn random_vector(word: &str, dim: usize) -> Vec<f32> {
    let mut rng = SplitMix64::new(fnv1a(word.as_bytes()));
    let mut v: Vec<f32> = (0..dim).map(|_| (rng.next_f64() * 2.0 - 1.0) as f32).collect();
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt() as f32;
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Table with a random vector for every mock-vocabulary word plus extras.
fn random_table(extra: &[&str]) -> EmbeddingTable {
    let mut t = EmbeddingTable::new(16);
    for w in MOCK_VOCAB.iter().copied().chain(extra.iter().copied()) {
        t.insert(w, random_vector(w, 16)).unwrap();
    }
    t
}

fn test_cosine(t: &EmbeddingTable, a: &str, b: &str) -> f64 {
    // Independent cosine for oracle checks.
    let va = t.get(a).unwrap();
    let vb = t.get(b).unwrap();
    let dot: f64 = va.iter().zip(vb).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = va.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = vb.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Criterion 1: Algorithm-1 soundness over 1,000 randomized decode steps.
/// (a) unsteered steps take the backend's rank-1 candidate, (b) steered
/// steps maximize the label's relevance score, (c) confidence exactly at
/// the threshold does not steer.
#[test]
fn acceptance_1_algorithm_soundness() {
    let backend = MockLmBackend::new();
    let emb = random_table(&["soled"]);
    let pair = PunPair::new("soled", "sold");
    let phrase: Vec<String> = ["were", "soled", "at", "the", "store"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    // Pure algorithm setting: no candidate filters, so the backend's own
    // ranking is the literal comparison target.
    let input = GenInput::homophonic(
        pair.clone(),
        "leather",
        &phrase,
        DecodeConfig {
            candidate_count: 20,
            min_len: 0,
            block_immediate_repeat: false,
            ..DecodeConfig::default()
        },
    )
    .unwrap();
    let predictor = PredictorHandle::new(Box::new(MockClassifier::hashed(17)), 0.5);

    let mut rng = SplitMix64::new(99);
    let mut steered_steps = 0usize;
    let mut unsteered_steps = 0usize;
    for _ in 0..1000 {
        let len = 1 + rng.next_index(6);
        let prefix: Vec<String> = (0..len)
            .map(|_| MOCK_VOCAB[rng.next_index(MOCK_VOCAB.len())].to_string())
            .collect();
        let mut state = DecodeState {
            prefix,
            phrase_cursor: 0,
            enforcing: false,
            steps: Vec::new(),
        };
        let (word, prediction, candidates) =
            discriminative_step(&state, &input, &predictor, &backend, &emb).unwrap();

        if prediction.steer {
            steered_steps += 1;
            // Oracle: recompute relevance independently over the step's
            // candidate list; the chosen word must be maximal, ties broken
            // by higher backend logprob.
            let targets: Vec<&str> = match prediction.label {
                Label::D1 => vec![pair.pw.as_str()],
                Label::D2 => vec![pair.aw.as_str()],
                Label::A => vec![pair.pw.as_str(), pair.aw.as_str()],
            };
            let rel = |w: &str| -> f64 {
                targets
                    .iter()
                    .map(|t| if emb.contains(w) { test_cosine(&emb, w, t) } else { 0.0 })
                    .sum()
            };
            let best = rel(&word);
            let backend_list = backend.next_word_candidates(&state.prefix, 20).unwrap();
            for c in &candidates {
                assert!(
                    rel(&c.word) <= best + 1e-12,
                    "criterion 1b violated: {} beats chosen {}",
                    c.word,
                    word
                );
            }
            let tied: Vec<&Candidate> = backend_list
                .iter()
                .filter(|c| (rel(&c.word) - best).abs() <= 1e-12)
                .collect();
            let max_lp = tied.iter().map(|c| c.logprob).fold(f64::NEG_INFINITY, f64::max);
            let chosen_lp = tied.iter().find(|c| c.word == word).map(|c| c.logprob);
            assert_eq!(chosen_lp, Some(max_lp), "criterion 1b tie-break violated");
        } else {
            unsteered_steps += 1;
            let backend_top = backend.next_word_candidates(&state.prefix, 20).unwrap();
            assert_eq!(
                word, backend_top[0].word,
                "criterion 1a violated: unsteered step ignored backend rank 1"
            );
        }
        state.prefix.push(word);
    }
    assert!(steered_steps >= 100, "too few steered steps: {steered_steps}");
    assert!(unsteered_steps >= 100, "too few unsteered steps: {unsteered_steps}");

    // (c) Confidence exactly at the threshold must not steer.
    let at_threshold = PredictorHandle::new(Box::new(MockClassifier::constant(Label::D1, 0.9)), 0.9);
    let state = DecodeState {
        prefix: vec!["the".to_string()],
        phrase_cursor: 0,
        enforcing: false,
        steps: Vec::new(),
    };
    let (word, prediction, _) =
        discriminative_step(&state, &input, &at_threshold, &backend, &emb).unwrap();
    assert!(!prediction.steer, "criterion 1c violated: steered at exact threshold");
    let top = backend.next_word_candidates(&state.prefix, 20).unwrap();
    assert_eq!(word, top[0].word);

    println!(
        "ACCEPTANCE 1 (algorithm soundness): PASS  1000 steps, {steered_steps} steered / {unsteered_steps} unsteered, 0 violations"
    );
}

/// Criterion 2: on the Table-1 fixture corpus with the n-gram mask-infill
/// backend, the export phrase survives to the pun-word stage and ranks in
/// its bottom half.
#[test]
fn acceptance_2_phrase_selection_export_rank() {
    let corpus = fixture_corpus();
    let lm = NgramBackend::train(&corpus.token_sentences(), NgramConfig::default()).unwrap();
    let phrases = retrieve_phrases(&corpus, "tax", 20, 3).unwrap();
    assert!(phrases.len() >= 4, "fixture must embed the Table-1 sentences");
    let ranking = rank_phrases(phrases, "tax", "taxi", &lm).unwrap();
    let export = ranking
        .stage1
        .iter()
        .find(|sp| sp.phrase.tokens.join(" ").contains("export") )
        .expect("export phrase retrieved");
    let survivors = ranking.survivor_order.len();
    let rank = export
        .rank_stage2
        .expect("export phrase must survive the alternative-word stage");
    assert!(
        rank * 2 > survivors,
        "criterion 2 violated: export phrase rank {rank} of {survivors} is not bottom half"
    );
    println!(
        "ACCEPTANCE 2 (phrase selection): PASS  export phrase rank {rank}/{survivors} at the pw stage"
    );
}

/// Criterion 3: labeling antisymmetry on 500 random triples, exact band
/// exclusion, and exact recovery of a planted grid-search optimum.
#[test]
fn acceptance_3_label_curation_invariants() {
    let t = 0.15;
    // 500 random triples (tw, pw, aw) over random vectors.
    let words: Vec<String> = (0..500).map(|i| format!("w{i}")).collect();
    let mut table = EmbeddingTable::new(16);
    for w in &words {
        table.insert(w, random_vector(w, 16)).unwrap();
    }
    table.insert("pwx", random_vector("pwx", 16)).unwrap();
    table.insert("awx", random_vector("awx", 16)).unwrap();
    let pair = PunPair::new("pwx", "awx");
    let swapped = pair.swapped();
    for w in &words {
        let l = unsupervised_label(w, &pair, &table, t);
        let ls = unsupervised_label(w, &swapped, &table, t);
        assert_eq!(l.swapped(), ls, "criterion 3a violated for {w}");
    }

    // Band exclusion: every curated example's recomputed |gap| is outside
    // [T, 1.5T].
    let sentences: Vec<(Vec<String>, PunPair)> = words
        .chunks(10)
        .map(|chunk| (chunk.to_vec(), pair.clone()))
        .collect();
    let curated = curate_classifier_dataset(&sentences, &table, t);
    assert!(!curated.is_empty());
    let mut in_band = 0;
    for ex in &curated {
        let gap = similarity_gap(&ex.tw, &ex.pair(), &table).unwrap().abs();
        if (t..=1.5 * t).contains(&gap) {
            in_band += 1;
        }
    }
    assert_eq!(in_band, 0, "criterion 3b violated: {in_band} curated examples in the band");

    // Planted optimum: accuracy peaks exactly at T* = 0.2.
    let mut planted = EmbeddingTable::new(3);
    planted.insert("pw", vec![1.0, 0.0, 0.0]).unwrap();
    planted.insert("aw", vec![0.0, 1.0, 0.0]).unwrap();
    let gaps: [(&str, f64, f64, Label); 6] = [
        ("g30", 0.5, 0.2, Label::D1),
        ("g25", 0.45, 0.2, Label::D1),
        ("gm28", 0.2, 0.48, Label::D2),
        ("g18", 0.38, 0.2, Label::A),
        ("g15", 0.35, 0.2, Label::A),
        ("g10", 0.3, 0.2, Label::A),
    ];
    let mut annotated = Vec::new();
    for (w, x, y, gold) in gaps {
        let z = (1.0f64 - x * x - y * y).sqrt();
        planted
            .insert(w, vec![x as f32, y as f32, z as f32])
            .unwrap();
        annotated.push(LabeledExample {
            prefix: vec![],
            tw: w.to_string(),
            pw: "pw".into(),
            aw: "aw".into(),
            label: gold,
            source: LabelSource::Human,
        });
    }
    let grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35];
    let (t_star, acc) = grid_search_threshold(&annotated, &planted, &grid).unwrap();
    assert_eq!(t_star, 0.2, "criterion 3c violated: recovered {t_star}");
    assert_eq!(acc, 1.0);

    println!(
        "ACCEPTANCE 3 (label curation): PASS  500 triples antisymmetric, 0 band examples of {}, T*=0.2 exact",
        curated.len()
    );
}

/// Criterion 4: cmd_generate on mock backends with a fixed seed is
/// byte-identical across three runs, contains the pun word, and carries the
/// complete phrase contiguously once enforcement triggered.
#[test]
fn acceptance_4_end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        corpus_paths: vec![fixtures().join("corpus/nonpun.txt")],
        backend: "mock".into(),
        seed: 7,
        ..PipelineConfig::default()
    };
    let task = GenerateTask::Homophonic {
        pw: "soled".into(),
        aw: "sold".into(),
    };
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for run in 0..3 {
        let out = dir.path().join(format!("gen{run}.jsonl"));
        cmd_generate(&cfg, &task, &out).unwrap();
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "criterion 4 violated: run 2 differs");
    assert_eq!(outputs[0], outputs[2], "criterion 4 violated: run 3 differs");

    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let record_line = text.lines().nth(2).expect("header, provenance, record");
    let gen: punkit::generate::Generation = serde_json::from_str(record_line).unwrap();
    assert!(
        gen.tokens.iter().any(|t| t == "soled"),
        "criterion 4 violated: output lacks the pun word"
    );
    if gen.phrase_completed {
        let joined = gen.tokens.join(" ");
        let phrase = gen.input.phrase.join(" ");
        assert!(
            joined.contains(&phrase),
            "criterion 4 violated: phrase {phrase:?} not contiguous in {joined:?}"
        );
    }
    println!(
        "ACCEPTANCE 4 (determinism): PASS  3 identical runs, pun word present, phrase complete = {}",
        gen.phrase_completed
    );
}

/// Criterion 5: metric property suite with closed-form checks.
#[test]
fn acceptance_5_metric_properties() {
    let table = random_table(&["pwm", "awm"]);
    let pair = PunPair::new("pwm", "awm");
    let mut rng = SplitMix64::new(5);
    let params = MetricParams::default();
    let mut checked = 0;
    for _ in 0..200 {
        let len = 3 + rng.next_index(8);
        let tokens: Vec<String> = (0..len)
            .map(|_| MOCK_VOCAB[rng.next_index(MOCK_VOCAB.len())].to_string())
            .collect();
        let Ok(p) = meaning_posterior(&tokens, &pair, &table) else {
            continue;
        };
        checked += 1;
        assert!(
            (p.p_m1 + p.p_m2 - 1.0).abs() <= 1e-9,
            "criterion 5 violated: posterior sums to {}",
            p.p_m1 + p.p_m2
        );
        // Ambiguity is maximal exactly at the symmetric posterior.
        let a = ambiguity_of(&p, params.scale);
        let a_max = ambiguity_of(
            &MeaningPosterior {
                p_m1: 0.5,
                p_m2: 0.5,
            },
            params.scale,
        );
        assert!(a <= a_max + 1e-12);
        // Swap antisymmetry is exact.
        let (d1, d2) = distinctiveness(&tokens, &pair, &table, &params).unwrap();
        let (s1, s2) = distinctiveness(&tokens, &pair.swapped(), &table, &params).unwrap();
        assert_eq!((d1, d2), (s2, s1), "criterion 5 violated: swap not exact");
    }
    assert!(checked >= 100, "too few defined posteriors: {checked}");

    // Closed-form surprisal identities via a scripted backend.
    struct Scripted {
        long_gap: f64,
    }
    impl LmBackend for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }
        fn mask_fill_probability(
            &self,
            _q: &punkit::MaskedQuery,
        ) -> Result<f64, punkit::backend::BackendError> {
            Ok(0.5)
        }
        fn mask_fill_batch(
            &self,
            _t: &[String],
            c: &[&str],
        ) -> Result<Vec<f64>, punkit::backend::BackendError> {
            Ok(vec![1.0 / c.len() as f64; c.len()])
        }
        fn next_word_candidates(
            &self,
            _p: &[String],
            _n: usize,
        ) -> Result<Vec<Candidate>, punkit::backend::BackendError> {
            Ok(vec![])
        }
        fn word_surprisal(
            &self,
            context: &[String],
            word: &str,
        ) -> Result<f64, punkit::backend::BackendError> {
            let local = context.len() <= 2;
            Ok(match (local, word == "pwm") {
                (true, true) => 3.0,
                (true, false) => 1.0,
                (false, true) => 1.0 + self.long_gap,
                (false, false) => 1.0,
            })
        }
    }
    let sentence: Vec<String> = ["alpha", "beta", "gamma", "delta", "pwm", "omega"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    // S_local = S_global = 2 > 0 gives S = 0 exactly.
    let s = surprisal_ratio(&sentence, &pair, &Scripted { long_gap: 2.0 }, &params).unwrap();
    assert_eq!(s, 0.0, "criterion 5 violated: S should be exactly 0");
    // S_global = 0 with positive local gap gives S = 1 exactly.
    let s = surprisal_ratio(&sentence, &pair, &Scripted { long_gap: 0.0 }, &params).unwrap();
    assert_eq!(s, 1.0, "criterion 5 violated: S should be exactly 1");

    println!(
        "ACCEPTANCE 5 (metric properties): PASS  {checked} posteriors normalized, swaps exact, S identities closed-form"
    );
}

/// Criterion 6: with the corpus-trained backend, human-style puns score
/// higher than length-matched non-puns on both surprisal ratio and
/// ambiguity.
#[test]
fn acceptance_6_directional_humor_checks() {
    let corpus = fixture_corpus();
    let lm = NgramBackend::train(&corpus.token_sentences(), NgramConfig::default()).unwrap();
    let emb = EmbeddingTable::train(&corpus.token_sentences(), &TrainConfig::default()).unwrap();
    let params = MetricParams::default();

    let mean_metrics = |file: &str| -> (f64, f64, usize) {
        let records = punkit::metrics::read_eval_records(&fixtures().join(file)).unwrap();
        assert_eq!(records.len(), 20);
        let mut s_sum = 0.0;
        let mut a_sum = 0.0;
        let mut n = 0;
        for rec in &records {
            let tokens = punkit::text::tokenize(&rec.sentence);
            let pair = PunPair::new(&rec.pw, &rec.aw);
            s_sum += surprisal_ratio(&tokens, &pair, &lm, &params).unwrap();
            a_sum += punkit::metrics::ambiguity(&tokens, &pair, &emb, &params).unwrap();
            n += 1;
        }
        (s_sum / n as f64, a_sum / n as f64, n)
    };

    let (s_pun, a_pun, n_pun) = mean_metrics("puns.jsonl");
    let (s_non, a_non, n_non) = mean_metrics("nonpuns.jsonl");
    assert_eq!((n_pun, n_non), (20, 20));
    assert!(
        s_pun > s_non,
        "criterion 6 violated: mean S puns {s_pun} <= non-puns {s_non}"
    );
    assert!(
        a_pun > a_non,
        "criterion 6 violated: mean A puns {a_pun} <= non-puns {a_non}"
    );
    println!(
        "ACCEPTANCE 6 (directional humor): PASS  S {s_pun:.3} > {s_non:.3}, A {a_pun:.1} > {a_non:.1} over 20+20 sentences"
    );
}

/// Per-pair vocabulary for expanding the fixture puns to 200 variants.
fn pair_table() -> Vec<(&'static str, &'static str, Vec<&'static str>, &'static str)> {
    vec![
        ("soled", "sold", vec!["cobbler", "leather", "boots", "shop"], "were soled at the store at half price"),
        ("taxi", "tax", vec!["driver", "station", "downtown", "street"], "a new taxi was created"),
        ("mane", "main", vec!["lion", "golden", "keepers"], "down the mane street toward the square"),
        ("heel", "heal", vec!["cobbler", "boot", "apprentice"], "would soon heel under careful hands"),
        ("flour", "flower", vec!["baker", "mill", "dough"], "picked a flour from the garden"),
        ("pane", "pain", vec!["glazier", "workshop", "glass"], "felt a sharp pane in his shoulder"),
        ("knight", "night", vec!["armor", "castle", "sword"], "through a long knight of rain"),
        ("tide", "tied", vec!["sailor", "harbor", "boat"], "kept the boat firmly tide to the dock"),
        ("board", "bored", vec!["carpenter", "plank", "saw"], "sat through the meeting feeling board"),
        ("hare", "hair", vec!["meadow", "field", "cabbage"], "trimmed a single hare"),
        ("steak", "stake", vec!["dinner", "grill", "cook"], "drove a steak into the ground"),
        ("sail", "sale", vec!["canvas", "mast", "wind"], "announced a big sail on lamps"),
        ("bear", "bare", vec!["honey", "forest", "den"], "gripped the rail with his bear hands"),
        ("pear", "pair", vec!["orchard", "branch", "ripe"], "wearing a pear of gloves"),
        ("wine", "whine", vec!["vineyard", "cellar", "cork"], "began to wine at the door"),
        ("maid", "made", vec!["mansion", "linens", "apron"], "left the bed so neatly maid"),
        ("son", "sun", vec!["father", "family", "proud"], "woke at the rising of the son"),
        ("tail", "tale", vec!["kitten", "puppy", "fur"], "curled up for one strange tail"),
        ("knead", "need", vec!["baker", "dough", "bread"], "gave the dough everything it would knead"),
        ("horse", "hoarse", vec!["stable", "saddle", "rider"], "sang and grew a little horse"),
    ]
}

/// 200 homophonic pun variants assembled from per-pair topic words and the
/// alternative-word frame.
fn expanded_puns() -> Vec<(Vec<String>, PunPair)> {
    let openers = [
        "the {0} near the {1} said the {2}",
        "a {0} and a {1} watched while the {2}",
        "the old {0} by the {1} and the {2}",
        "every {0} with a {1} knew the {2}",
        "that {0} beside the {1} and one {2}",
        "the young {0} kept a {1} while the {2}",
        "one {0} from the {1} told the {2}",
        "his {0} held the {1} before the {2}",
        "the {2} carried the {0} past the {1}",
        "a {1} full of {0} meant the {2}",
    ];
    let mut out = Vec::new();
    for (pw, aw, topics, frame) in pair_table() {
        for (i, opener) in openers.iter().enumerate() {
            let t0 = topics[i % topics.len()];
            let t1 = topics[(i + 1) % topics.len()];
            let t2 = topics[(i + 2) % topics.len()];
            let sentence = format!(
                "{} {}",
                opener
                    .replace("{0}", t0)
                    .replace("{1}", t1)
                    .replace("{2}", t2),
                frame
            );
            out.push((punkit::text::tokenize(&sentence), PunPair::new(pw, aw)));
        }
    }
    out
}

/// Criterion 7: the bootstrapped labeler over 200 homophonic puns finds
/// more words distinct to the pun word than to the alternative, by at least
/// 3 points.
#[test]
fn acceptance_7_structure_statistic() {
    let corpus = fixture_corpus();
    let emb = Arc::new(
        EmbeddingTable::train(&corpus.token_sentences(), &TrainConfig::default()).unwrap(),
    );
    let puns = expanded_puns();
    assert!(puns.len() >= 200);

    let auto = curate_classifier_dataset(&puns, &emb, 0.15);
    let training: Vec<TrainingExample> =
        auto.iter().map(LabeledExample::to_training).collect();
    let labeler =
        EmbeddingClassifier::train(&training, emb.clone(), ClassifierConfig::default()).unwrap();

    let counts = label_distribution(&labeler, &puns).unwrap();
    let total: usize = counts.iter().sum();
    let d1 = 100.0 * counts[1] as f64 / total as f64;
    let d2 = 100.0 * counts[2] as f64 / total as f64;
    assert!(
        d1 - d2 >= 3.0,
        "criterion 7 violated: D1 {d1:.1}% vs D2 {d2:.1}% (gap {:.1} < 3)",
        d1 - d2
    );
    println!(
        "ACCEPTANCE 7 (structure statistic): PASS  D1 {d1:.1}% > D2 {d2:.1}% over {total} tokens of {} puns",
        puns.len()
    );
}

/// Criterion 8: discarding the lowest-confidence tenth of predictions on a
/// noisy held-out set must not decrease macro F1.
#[test]
fn acceptance_8_confidence_gating_benefit() {
    // Synthetic geometry: clean examples far from the decision boundary,
    // noisy examples near it with scrambled gold labels.
    let mut table = EmbeddingTable::new(3);
    table.insert("pw", vec![1.0, 0.0, 0.0]).unwrap();
    table.insert("aw", vec![0.0, 1.0, 0.0]).unwrap();
    let mut rng = SplitMix64::new(21);
    let mut train: Vec<TrainingExample> = Vec::new();
    let mut held: Vec<TrainingExample> = Vec::new();
    let mut make = |name: String, x: f64, y: f64, label: Label| -> TrainingExample {
        let z = (1.0f64 - x * x - y * y).max(0.0).sqrt();
        table.insert(&name, vec![x as f32, y as f32, z as f32]).unwrap();
        TrainingExample {
            prefix: vec!["filler".into()],
            current: Some(name),
            pw: "pw".into(),
            aw: "aw".into(),
            label,
        }
    };
    for i in 0..420 {
        let r = rng.next_f64();
        let (x, y, label) = if r < 0.34 {
            (0.7 + 0.2 * rng.next_f64(), 0.1 * rng.next_f64(), Label::D1)
        } else if r < 0.67 {
            (0.1 * rng.next_f64(), 0.7 + 0.2 * rng.next_f64(), Label::D2)
        } else {
            let base = 0.3 + 0.1 * rng.next_f64();
            (base, base, Label::A)
        };
        let ex = make(format!("c{i}"), x, y, label);
        if i % 3 == 0 {
            held.push(ex);
        } else {
            train.push(ex);
        }
    }
    // Noisy boundary examples in the held-out set only.
    for i in 0..20 {
        let base = 0.4 + 0.02 * rng.next_f64();
        let jitter = 0.03 * rng.next_f64();
        let label = Label::ORDER[rng.next_index(3)];
        held.push(make(format!("n{i}"), base + jitter, base - jitter, label));
    }

    let emb = Arc::new(table);
    let clf = EmbeddingClassifier::train(&train, emb, ClassifierConfig::default()).unwrap();

    let scored: Vec<(Label, Label, f64)> = held
        .iter()
        .map(|ex| {
            let (pred, conf) = clf.classify(&ex.input()).unwrap();
            (ex.label, pred, conf)
        })
        .collect();

    fn macro_f1(pairs: &[(Label, Label)]) -> f64 {
        let mut f1_sum = 0.0;
        for class in Label::ORDER {
            let tp = pairs.iter().filter(|(g, p)| *g == class && *p == class).count() as f64;
            let fp = pairs.iter().filter(|(g, p)| *g != class && *p == class).count() as f64;
            let fal = pairs.iter().filter(|(g, p)| *g == class && *p != class).count() as f64;
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fal > 0.0 { tp / (tp + fal) } else { 0.0 };
            f1_sum += if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
        }
        f1_sum / 3.0
    }

    let all: Vec<(Label, Label)> = scored.iter().map(|(g, p, _)| (*g, *p)).collect();
    let f1_all = macro_f1(&all);

    let mut by_conf = scored.clone();
    by_conf.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let drop = scored.len() / 10; // lowest-confidence 10%
    let kept: Vec<(Label, Label)> = by_conf[drop..].iter().map(|(g, p, _)| (*g, *p)).collect();
    let f1_kept = macro_f1(&kept);

    assert!(
        f1_kept >= f1_all,
        "criterion 8 violated: macro F1 dropped {f1_all:.4} -> {f1_kept:.4}"
    );
    println!(
        "ACCEPTANCE 8 (confidence gating): PASS  macro F1 {f1_all:.4} -> {f1_kept:.4} after dropping {drop}/{} lowest-confidence",
        scored.len()
    );
}

/// Criterion 9: the worked homographic conversion yields
/// SubstitutePair(clause, conviction) exactly, and the generated sentence
/// keeps the surface word while never emitting a substitute.
#[test]
fn acceptance_9_homographic_conversion() {
    let corpus = fixture_corpus();
    let lm = NgramBackend::train(&corpus.token_sentences(), NgramConfig::default()).unwrap();
    let emb = Arc::new(
        EmbeddingTable::train(&corpus.token_sentences(), &TrainConfig::default()).unwrap(),
    );
    let sense = SensePair::new(
        "sentence",
        "a set of words that is complete in itself, conveying a statement or question",
        "the punishment assigned to a defendant found guilty by a court",
    )
    .unwrap();
    let rd = MockReverseDict::new()
        .with_entry(&sense.definition_1, &[("clause", 0.92), ("phrase", 0.80)])
        .with_entry(&sense.definition_2, &[("conviction", 0.90), ("verdict", 0.77)]);
    let wsd = GlossCosineWsd { emb: &emb };

    let conv = convert(&sense, &corpus, &wsd, &rd, &lm, &ConvertParams::default()).unwrap();
    assert_eq!(
        (conv.substitutes.sub_pw.as_str(), conv.substitutes.sub_aw.as_str()),
        ("clause", "conviction"),
        "criterion 9 violated: wrong substitutes"
    );

    let input = GenInput::homographic(
        PunPair::new(&conv.substitutes.sub_pw, &conv.substitutes.sub_aw),
        &sense.surface,
        &conv.context.word,
        &conv.phrase.phrase.tokens,
        DecodeConfig::default(),
    )
    .unwrap();
    let predictor = PredictorHandle::new(Box::new(MockClassifier::hashed(7)), 0.5);
    let gen = punkit::generate::generate(&input, &predictor, &lm, &emb).unwrap();

    assert!(
        gen.tokens.iter().any(|t| t == "sentence"),
        "criterion 9 violated: surface word missing from {:?}",
        gen.sentence
    );
    let banned: HashSet<&str> = ["clause", "conviction"].into_iter().collect();
    assert!(
        gen.tokens.iter().all(|t| !banned.contains(t.as_str())),
        "criterion 9 violated: substitute leaked into {:?}",
        gen.sentence
    );
    println!(
        "ACCEPTANCE 9 (homographic conversion): PASS  substitutes (clause, conviction), output keeps the surface word: {}",
        gen.sentence
    );
}
