//! Hash-specified mock backends.
//!
//! Every mock output is a pure function of its inputs via FNV-1a, so tests
//! (and anyone re-deriving expected values) can recompute scores without
//! running this code. The exact specification:
//!
//! * vocabulary: the 999 words in [`MOCK_VOCAB`] plus `</s>`, in that order;
//! * raw next-word score: `u(prefix, w) = to_unit(fnv1a_parts([prefix joined
//!   by single spaces, w]))`, an open-interval (0, 1) value;
//! * next-word probability: `u` normalized over the full vocabulary
//!   (or exactly `1/1000` each for the uniform variant);
//! * raw mask-fill score: `to_unit(fnv1a_parts([template joined by spaces,
//!   candidate]))`; batch calls normalize raw scores over the candidate set,
//!   single-candidate calls return the raw score;
//! * surprisal: `−ln` of the next-word probability, with out-of-vocabulary
//!   words added to the normalizer for that one query.
//!
//! `fnv1a_parts` inserts a 0x1f byte between parts; see `crate::hash`.

use super::{
    BackendError, Candidate, ClassifierInput, Label, LmBackend, MaskedQuery, TokenClassifier,
    EOS_TOKEN,
};
use crate::hash::{fnv1a_parts, to_unit};

/// 999 fixed words; `</s>` completes the 1,000-token vocabulary.
pub const MOCK_VOCAB: &[&str] = &[
    "able", "about", "above", "accept", "account", "across", "act", "action", "add", "address",
    "afraid", "afternoon", "again", "against", "age", "ago", "agree", "ahead", "air", "alive",
    "all", "allow", "almost", "alone", "along", "already", "also", "always", "among", "amount",
    "anchor", "ancient", "anger", "angle", "animal", "announce", "another", "answer", "any", "appear",
    "apple", "apply", "approach", "area", "argue", "arm", "army", "around", "arrive", "art",
    "article", "ask", "asleep", "atom", "attack", "attempt", "attention", "aunt", "author", "autumn",
    "average", "avoid", "awake", "away", "baby", "back", "bad", "bag", "balance", "ball",
    "band", "bank", "bar", "barn", "base", "basket", "battle", "beach", "bear", "beat",
    "beauty", "became", "become", "bed", "beginning", "behavior", "behind", "believe", "bell", "belong",
    "below", "belt", "bench", "bend", "beside", "best", "better", "beyond", "big", "bill",
    "bird", "birth", "bit", "bite", "black", "blanket", "blind", "block", "blood", "blow",
    "blue", "board", "boat", "body", "bone", "book", "border", "born", "borrow", "both",
    "bottle", "bottom", "bought", "bow", "bowl", "box", "boy", "branch", "brave", "bread",
    "break", "breakfast", "breath", "brick", "bridge", "brief", "bright", "bring", "broad", "broke",
    "brother", "brown", "brush", "build", "burn", "business", "busy", "butter", "button", "buy",
    "cabin", "cage", "cake", "call", "calm", "came", "camp", "canal", "candle", "cannot",
    "cap", "capital", "captain", "car", "card", "care", "careful", "carry", "case", "cast",
    "cat", "catch", "cattle", "caught", "cause", "cell", "center", "century", "certain", "chain",
    "chair", "chance", "change", "character", "charge", "chart", "chase", "cheap", "check", "cheese",
    "chest", "chief", "child", "children", "choice", "choose", "chose", "church", "circle", "citizen",
    "city", "claim", "class", "clean", "clear", "climb", "clock", "close", "cloth", "cloud",
    "club", "coal", "coast", "coat", "cold", "collect", "college", "color", "column", "come",
    "comfort", "common", "company", "compare", "complete", "compound", "concern", "condition", "connect", "consider",
    "consonant", "contain", "continent", "continue", "control", "cook", "cool", "copper", "copy", "corn",
    "corner", "correct", "cost", "cotton", "could", "count", "country", "course", "cover", "cow",
    "crease", "create", "cried", "crop", "cross", "crowd", "crown", "cry", "culture", "cup",
    "current", "curve", "custom", "cut", "daily", "dance", "danger", "dark", "date", "daughter",
    "day", "dead", "deal", "dear", "death", "decide", "decimal", "deep", "degree", "delight",
    "demand", "depend", "describe", "desert", "design", "desire", "desk", "detail", "determine", "develop",
    "device", "dictionary", "die", "differ", "difficult", "dinner", "direct", "direction", "discover", "discuss",
    "distance", "distant", "divide", "division", "doctor", "dog", "dollar", "done", "door", "double",
    "doubt", "draw", "dream", "dress", "drink", "drive", "drop", "dry", "duck", "due",
    "dull", "duty", "eager", "ear", "early", "earn", "earth", "ease", "east", "easy",
    "eat", "edge", "education", "effect", "effort", "egg", "eight", "either", "electric", "element",
    "else", "empty", "end", "enemy", "energy", "engine", "enjoy", "enough", "enter", "entire",
    "equal", "equate", "escape", "especially", "evening", "event", "ever", "every", "exact", "example",
    "except", "excite", "exercise", "expect", "experience", "experiment", "explain", "express", "eye", "face",
    "fact", "factory", "fail", "fair", "fall", "family", "famous", "far", "farm", "farmer",
    "fast", "fat", "father", "favor", "fear", "feed", "feel", "feet", "fell", "felt",
    "fence", "field", "fig", "fight", "figure", "fill", "final", "find", "fine", "finger",
    "finish", "fire", "first", "fish", "fit", "five", "flag", "flat", "floor", "flow",
    "flower", "fly", "follow", "food", "fool", "foot", "force", "forest", "forget", "form",
    "fortune", "forward", "found", "four", "fraction", "frame", "free", "fresh", "friend", "front",
    "fruit", "full", "fun", "future", "gain", "game", "garden", "gas", "gate", "gather",
    "gave", "general", "gentle", "get", "gift", "girl", "give", "glad", "glass", "goes",
    "gold", "gone", "good", "got", "govern", "grand", "grass", "gray", "great", "green",
    "grew", "ground", "group", "grow", "guard", "guess", "guide", "gun", "habit", "hair",
    "half", "hand", "happen", "happy", "hard", "harvest", "hat", "hate", "head", "hear",
    "heard", "heart", "heat", "heavy", "held", "help", "hereby", "hide", "high", "hill",
    "history", "hit", "hold", "hole", "hollow", "home", "honor", "hope", "horse", "hot",
    "hour", "house", "huge", "human", "hundred", "hunger", "hunt", "hurry", "hurt", "ice",
    "idea", "imagine", "inch", "include", "increase", "indeed", "indicate", "industry", "insect", "inside",
    "instant", "instead", "instrument", "interest", "invent", "iron", "island", "issue", "job", "join",
    "joke", "journey", "joy", "judge", "jump", "keep", "kept", "key", "kill", "kind",
    "king", "kitchen", "knee", "knew", "know", "known", "labor", "lady", "lake", "land",
    "language", "large", "last", "late", "laugh", "law", "lay", "lead", "learn", "least",
    "leather", "leave", "led", "left", "leg", "length", "less", "lesson", "let", "letter",
    "level", "lie", "life", "lift", "light", "like", "likely", "limit", "line", "lion",
    "liquid", "list", "listen", "little", "live", "local", "locate", "lock", "log", "lone",
    "long", "look", "lord", "lose", "loss", "lost", "lot", "loud", "love", "low",
    "machine", "made", "magnet", "mail", "major", "make", "man", "manage", "many", "map",
    "march", "mark", "market", "marry", "mass", "master", "match", "material", "matter", "may",
    "mean", "meant", "measure", "meat", "meet", "melody", "member", "men", "mention", "metal",
    "method", "middle", "might", "mile", "milk", "million", "mind", "mine", "minute", "miss",
    "mix", "modern", "molecule", "moment", "money", "month", "moon", "morning", "mother", "motion",
    "mount", "mountain", "mouth", "move", "much", "multiply", "music", "must", "nail", "name",
    "nation", "natural", "nature", "near", "necessary", "neck", "need", "neighbor", "never", "new",
    "news", "next", "nice", "night", "nine", "noise", "none", "noon", "north", "nose",
    "note", "nothing", "notice", "noun", "number", "numeral", "oak", "object", "observe", "occur",
    "ocean", "offer", "office", "often", "oil", "old", "one", "open", "operate", "opinion",
    "opposite", "order", "organ", "original", "ought", "outside", "oxygen", "page", "paint", "pair",
    "paper", "paragraph", "parent", "park", "part", "particular", "party", "pass", "past", "path",
    "pattern", "pay", "peace", "people", "per", "percent", "perhaps", "period", "person", "phrase",
    "pick", "picture", "piece", "pitch", "place", "plain", "plan", "plane", "planet", "plant",
    "play", "please", "plenty", "plural", "pocket", "poem", "point", "poor", "populate", "porch",
    "pose", "position", "possible", "pound", "pour", "power", "practice", "prepare", "present", "press",
    "pretty", "price", "print", "probable", "problem", "process", "produce", "product", "promise", "proper",
    "property", "protect", "proud", "prove", "provide", "public", "pull", "pure", "push", "put",
    "quart", "question", "quick", "quiet", "quite", "quotient", "race", "radio", "rail", "rain",
    "raise", "ran", "range", "rather", "reach", "read", "ready", "real", "realize", "reason",
    "receive", "record", "red", "region", "remain", "remember", "remove", "repeat", "reply", "report",
    "represent", "require", "rest", "result", "return", "review", "rhythm", "rich", "ride", "right",
    "ring", "rise", "river", "road", "rock", "roll", "roof", "room", "root", "rope",
    "rose", "round", "row", "rub", "rule", "run", "rush", "safe", "said", "sail",
    "salt", "sand", "sat", "save", "saw", "say", "scale", "scene", "school", "science",
    "score", "sea", "search", "season", "seat", "second", "section", "see", "seed", "seem",
    "seen", "segment", "select", "self", "sell", "send", "sense", "sent", "sentence", "separate",
    "serve", "set", "settle", "seven", "several", "shall", "shape", "share", "sharp", "sheet",
    "shelf", "shell", "shine", "ship", "shoe", "shop", "shore", "short", "shoulder", "shout",
    "show", "shown", "side", "sight", "sign", "silent", "silver", "similar", "simple", "since",
    "sing", "single", "sister", "sit", "six", "size", "skill", "skin", "sky", "sleep",
    "slip", "slow", "small", "smell", "smile", "smoke", "snow", "soft", "soil", "sold",
    "soldier", "solution", "solve", "son", "song", "soon", "sound", "south", "space", "speak",
    "special", "speech", "speed", "spell", "spend", "spoke", "spot", "spread", "spring", "square",
    "stand", "star", "start", "state", "station", "stay", "stead", "steam", "steel", "step",
    "stick", "still", "stone", "stood", "stop", "store", "storm", "story", "straight", "strange",
    "stream", "street", "stretch", "string", "strong", "student", "study", "subject", "substance", "subtract",
    "success", "sudden", "suffix", "sugar", "suggest", "suit", "summer", "sun", "supply", "support",
    "sure", "surface", "surprise", "sweet", "swim", "syllable", "symbol", "system", "table", "tail",
    "take", "talk", "tall", "taste", "teach", "team", "teeth", "tell", "temperature",
];

/// Deterministic mock language model.
#[derive(Debug, Clone)]
pub struct MockLmBackend {
    vocab: Vec<String>,
    uniform: bool,
}

impl Default for MockLmBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl MockLmBackend {
    pub fn new() -> Self {
        let mut vocab: Vec<String> = MOCK_VOCAB.iter().map(|w| w.to_string()).collect();
        vocab.push(EOS_TOKEN.to_string());
        Self {
            vocab,
            uniform: false,
        }
    }

    /// Variant whose next-word distribution is exactly uniform.
    pub fn with_uniform_scores() -> Self {
        Self {
            uniform: true,
            ..Self::new()
        }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn raw_next_word(&self, prefix: &[String], word: &str) -> f64 {
        if self.uniform {
            return 1.0;
        }
        let joined = prefix.join(" ");
        to_unit(fnv1a_parts(&[&joined, word]))
    }

    fn raw_mask_fill(template: &[String], candidate: &str) -> f64 {
        let joined = template.join(" ");
        to_unit(fnv1a_parts(&[&joined, candidate]))
    }
}

impl LmBackend for MockLmBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn mask_fill_probability(&self, query: &MaskedQuery) -> Result<f64, BackendError> {
        Ok(Self::raw_mask_fill(query.template(), query.candidate()))
    }

    fn mask_fill_batch(
        &self,
        template: &[String],
        candidates: &[&str],
    ) -> Result<Vec<f64>, BackendError> {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let raws: Vec<f64> = candidates
            .iter()
            .map(|c| Self::raw_mask_fill(template, c))
            .collect();
        let total: f64 = raws.iter().sum();
        Ok(raws.into_iter().map(|r| r / total).collect())
    }

    fn next_word_candidates(
        &self,
        prefix: &[String],
        n: usize,
    ) -> Result<Vec<Candidate>, BackendError> {
        if n == 0 {
            return Err(BackendError::InvalidArgument("n must be >= 1".into()));
        }
        let raws: Vec<f64> = self
            .vocab
            .iter()
            .map(|w| self.raw_next_word(prefix, w))
            .collect();
        let total: f64 = raws.iter().sum();
        let mut scored: Vec<(usize, f64)> = raws.into_iter().enumerate().collect();
        // Ties (possible only in the uniform variant) keep vocabulary order.
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(i, raw)| Candidate {
                word: self.vocab[i].clone(),
                logprob: (raw / total).ln(),
            })
            .collect())
    }

    fn word_surprisal(&self, context: &[String], word: &str) -> Result<f64, BackendError> {
        if word.is_empty() {
            return Err(BackendError::InvalidArgument("empty word".into()));
        }
        let in_vocab = self.vocab.iter().any(|w| w == word);
        let mut total: f64 = self
            .vocab
            .iter()
            .map(|w| self.raw_next_word(context, w))
            .sum();
        let raw = self.raw_next_word(context, word);
        if !in_vocab {
            total += raw;
        }
        Ok(-(raw / total).ln())
    }
}

/// Mock token-type model. `constant` always answers the same; `hashed`
/// derives a distribution from the input so decode tests see every branch.
#[derive(Debug, Clone)]
pub enum MockClassifier {
    Constant { label: Label, confidence: f64 },
    Hashed { seed: u64 },
}

impl MockClassifier {
    pub fn constant(label: Label, confidence: f64) -> Self {
        assert!((0.0..=1.0).contains(&confidence));
        MockClassifier::Constant { label, confidence }
    }

    pub fn hashed(seed: u64) -> Self {
        MockClassifier::Hashed { seed }
    }
}

impl TokenClassifier for MockClassifier {
    fn distribution(&self, input: &ClassifierInput) -> Result<[f64; 3], BackendError> {
        match self {
            MockClassifier::Constant { label, confidence } => {
                let rest = (1.0 - confidence) / 2.0;
                let mut dist = [rest; 3];
                let idx = Label::ORDER.iter().position(|l| l == label).unwrap();
                dist[idx] = *confidence;
                Ok(dist)
            }
            MockClassifier::Hashed { seed } => {
                let joined = input.prefix.join(" ");
                let seed_s = seed.to_string();
                let mut dist = [0f64; 3];
                for (i, label) in Label::ORDER.iter().enumerate() {
                    dist[i] = to_unit(fnv1a_parts(&[
                        &seed_s,
                        &joined,
                        input.pw,
                        input.aw,
                        label.as_str(),
                    ]));
                }
                let total: f64 = dist.iter().sum();
                for d in &mut dist {
                    *d /= total;
                }
                Ok(dist)
            }
        }
    }
}
