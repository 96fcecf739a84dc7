//! Deterministic corpora for the integration and acceptance tests.

#![allow(dead_code)]

use nzip_core::rng::{SeededRng, Stream};

const DETERMINERS: &[&str] = &[
    "the", "a", "this", "that", "every", "some", "no", "each", "another", "our", "their", "his", "her",
];
const PRONOUNS: &[&str] = &["he", "she", "they", "we", "it", "nobody", "everyone", "someone"];
const NOUNS: &[&str] = &[
    "house",
    "river",
    "garden",
    "letter",
    "window",
    "road",
    "market",
    "village",
    "ship",
    "horse",
    "doctor",
    "child",
    "teacher",
    "mountain",
    "city",
    "forest",
    "door",
    "table",
    "book",
    "story",
    "friend",
    "father",
    "mother",
    "king",
    "queen",
    "soldier",
    "farmer",
    "captain",
    "morning",
    "evening",
    "winter",
    "summer",
    "voice",
    "face",
    "hand",
    "eye",
    "heart",
    "mind",
    "question",
    "answer",
    "money",
    "candle",
    "light",
    "fire",
    "water",
    "stone",
    "bridge",
    "church",
    "school",
    "station",
    "train",
    "field",
    "harbour",
    "island",
    "storm",
    "wind",
    "sea",
    "sky",
    "moon",
    "star",
    "lamp",
    "kitchen",
    "room",
    "stair",
    "wall",
    "street",
    "corner",
    "shop",
    "clock",
    "hour",
    "week",
    "year",
    "night",
    "day",
    "family",
    "brother",
    "sister",
    "stranger",
    "servant",
    "master",
    "lady",
    "gentleman",
    "officer",
    "judge",
    "lawyer",
    "merchant",
    "sailor",
    "painter",
    "writer",
    "machine",
    "engine",
    "wheel",
    "boat",
    "coat",
    "hat",
    "glass",
    "bottle",
    "bread",
    "apple",
    "dog",
    "cat",
    "bird",
    "tree",
    "flower",
    "hill",
    "valley",
    "lake",
    "path",
    "gate",
    "fence",
    "problem",
    "reason",
    "idea",
    "plan",
    "promise",
    "secret",
    "memory",
    "dream",
    "silence",
    "noise",
    "song",
    "picture",
];
const VERBS: &[&str] = &[
    "saw",
    "found",
    "took",
    "gave",
    "left",
    "opened",
    "closed",
    "watched",
    "followed",
    "carried",
    "remembered",
    "forgot",
    "wanted",
    "loved",
    "feared",
    "heard",
    "knew",
    "met",
    "called",
    "asked",
    "told",
    "showed",
    "kept",
    "brought",
    "bought",
    "sold",
    "built",
    "broke",
    "painted",
    "wrote",
    "read",
    "answered",
    "crossed",
    "reached",
    "passed",
    "touched",
    "noticed",
    "described",
    "imagined",
    "understood",
    "believed",
    "doubted",
    "praised",
    "visited",
];
const INTRANSITIVE: &[&str] = &[
    "waited",
    "smiled",
    "laughed",
    "slept",
    "arrived",
    "returned",
    "listened",
    "wondered",
    "hesitated",
    "disappeared",
    "spoke",
    "walked",
    "ran",
    "stood",
    "fell",
    "sang",
    "worked",
    "stayed",
    "trembled",
    "agreed",
];
const ADJECTIVES: &[&str] = &[
    "old", "young", "small", "large", "dark", "bright", "quiet", "cold", "warm", "strange", "little", "long", "short",
    "heavy", "empty", "green", "white", "black", "red", "blue", "golden", "narrow", "broad", "gentle", "proud", "poor",
    "rich", "tired", "happy", "sad", "honest", "careful", "ancient", "distant", "familiar", "simple",
];
const ADVERBS: &[&str] = &[
    "slowly",
    "quickly",
    "quietly",
    "suddenly",
    "carefully",
    "again",
    "never",
    "always",
    "often",
    "hardly",
    "certainly",
    "perhaps",
    "finally",
    "already",
    "still",
    "almost",
    "together",
    "alone",
];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "under", "near", "behind", "across", "beside", "through", "over", "into", "from", "with", "without",
    "after", "before", "along",
];
const CONJUNCTIONS: &[&str] = &["and", "but", "because", "while", "although", "so", "when", "until"];
const NAMES: &[&str] = &[
    "Anna", "Thomas", "Margaret", "Henry", "Clara", "Edward", "Lucy", "Arthur", "Emma", "Walter",
];

/// Skewed pick: low indices are far more likely, roughly like word frequencies.
fn zipf<'a>(rng: &mut SeededRng, words: &[&'a str]) -> &'a str {
    let u = rng.unit_f64();
    let i = ((words.len() as f64 + 1.0).powf(u) - 1.0) as usize;
    words[i.min(words.len() - 1)]
}

struct TextGen {
    rng: SeededRng,
    topic: Vec<&'static str>,
    out: String,
    glue: bool,
}

impl TextGen {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.unit_f64() < p
    }

    fn noun(&mut self) -> &'static str {
        if self.chance(0.5) {
            self.topic[self.rng.below(self.topic.len())]
        } else {
            zipf(&mut self.rng, NOUNS)
        }
    }

    fn word(&mut self, w: &str) {
        if !self.glue && !self.out.is_empty() && !self.out.ends_with(['\n', ' ']) {
            self.out.push(' ');
        }
        self.glue = false;
        self.out.push_str(w);
    }

    fn noun_phrase(&mut self, depth: u32) {
        if self.chance(0.12) {
            let n = zipf(&mut self.rng, NAMES);
            self.word(n);
            return;
        }
        let d = zipf(&mut self.rng, DETERMINERS);
        self.word(d);
        if self.chance(0.45) {
            let a = zipf(&mut self.rng, ADJECTIVES);
            self.word(a);
        }
        let n = self.noun();
        self.word(n);
        if depth < 2 && self.chance(0.2) {
            self.prep_phrase(depth + 1);
        }
    }

    fn prep_phrase(&mut self, depth: u32) {
        let p = zipf(&mut self.rng, PREPOSITIONS);
        self.word(p);
        self.noun_phrase(depth);
    }

    fn clause(&mut self, depth: u32) {
        if self.chance(0.3) {
            let p = zipf(&mut self.rng, PRONOUNS);
            self.word(p);
        } else {
            self.noun_phrase(1);
        }
        if self.chance(0.2) {
            let a = zipf(&mut self.rng, ADVERBS);
            self.word(a);
        }
        if self.chance(0.7) {
            let v = zipf(&mut self.rng, VERBS);
            self.word(v);
            self.noun_phrase(1);
        } else {
            let v = zipf(&mut self.rng, INTRANSITIVE);
            self.word(v);
        }
        if self.chance(0.35) {
            self.prep_phrase(1);
        }
        if depth < 2 && self.chance(0.3) {
            self.out.push(',');
            let c = zipf(&mut self.rng, CONJUNCTIONS);
            self.word(c);
            self.clause(depth + 1);
        }
    }

    fn sentence(&mut self) {
        let start = self.out.len() + usize::from(!self.out.is_empty() && !self.out.ends_with('\n'));
        let quoted = self.chance(0.1);
        if quoted {
            self.word("\"");
            self.glue = true;
        }
        self.clause(0);
        let end = match self.rng.below(20) {
            0 => '?',
            1 => '!',
            _ => '.',
        };
        self.out.push(end);
        if quoted {
            self.out.push('"');
            if self.chance(0.5) {
                let n = zipf(&mut self.rng, NAMES);
                self.word(n);
                self.word("said.");
            }
        }
        let first = start + usize::from(quoted);
        if let Some(c) = self.out[first..].chars().next() {
            let upper: String = c.to_uppercase().collect();
            self.out.replace_range(first..first + c.len_utf8(), &upper);
        }
    }

    fn paragraph(&mut self) {
        self.topic = (0..6).map(|_| zipf(&mut self.rng, NOUNS)).collect();
        if self.chance(0.1) {
            let year = 1850 + self.rng.below(120);
            self.out
                .push_str(&format!("Chapter {}, {year}\n", self.rng.below(40) + 1));
        }
        for _ in 0..3 + self.rng.below(6) {
            self.sentence();
        }
        self.out.push_str("\n\n");
    }
}

/// English-like prose from a small probabilistic grammar with paragraph-level
/// topics, exactly `len` bytes of printable ASCII and newlines.
pub fn english_like(len: usize, seed: u64) -> Vec<u8> {
    let mut g = TextGen {
        rng: SeededRng::new(seed, Stream::Synthetic),
        topic: Vec::new(),
        out: String::with_capacity(len + 4096),
        glue: false,
    };
    while g.out.len() < len {
        g.paragraph();
    }
    let mut bytes = g.out.into_bytes();
    bytes.truncate(len);
    bytes
}

/// DNA-like sequence: an order-3 Markov source over ACGT with mutated copies
/// of earlier segments.
pub fn dna_like(len: usize, seed: u64) -> Vec<u8> {
    const BASES: &[u8; 4] = b"ACGT";
    let mut rng = SeededRng::new(seed, Stream::Synthetic);
    let table: Vec<[f64; 4]> = (0..64)
        .map(|_| {
            let w: Vec<f64> = (0..4).map(|_| rng.unit_f64().powi(3) + 0.02).collect();
            let s: f64 = w.iter().sum();
            [w[0] / s, w[1] / s, w[2] / s, w[3] / s]
        })
        .collect();
    let mut out: Vec<u8> = Vec::with_capacity(len);
    let mut state = 0usize;
    while out.len() < len {
        if out.len() > 1000 && rng.below(200) == 0 {
            let span = 50 + rng.below(400);
            let from = rng.below(out.len() - span);
            for i in 0..span {
                let b = if rng.below(50) == 0 {
                    BASES[rng.below(4)]
                } else {
                    out[from + i]
                };
                out.push(b);
            }
            continue;
        }
        let p = &table[state];
        let u = rng.unit_f64();
        let mut acc = 0.0;
        let mut sym = 3;
        for (i, &pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                sym = i;
                break;
            }
        }
        out.push(BASES[sym]);
        state = (state * 4 + sym) % 64;
    }
    out.truncate(len);
    out
}

/// Server-log-like records with incrementing timestamps and repeated fields.
pub fn log_like(len: usize, seed: u64) -> Vec<u8> {
    const LEVELS: &[&str] = &["INFO", "INFO", "INFO", "DEBUG", "WARN", "ERROR"];
    const PATHS: &[&str] = &[
        "/index.html",
        "/api/v1/items",
        "/api/v1/users",
        "/static/app.js",
        "/login",
        "/search",
    ];
    const AGENTS: &[&str] = &["curl/8.4", "Mozilla/5.0", "python-requests/2.31", "Go-http-client/1.1"];
    let mut rng = SeededRng::new(seed, Stream::Synthetic);
    let mut out = String::with_capacity(len + 256);
    let mut t = 1_700_000_000u64;
    while out.len() < len {
        t += rng.below(3) as u64;
        let (h, m, s) = ((t / 3600) % 24, (t / 60) % 60, t % 60);
        let level = LEVELS[rng.below(LEVELS.len())];
        let ip = format!("10.0.{}.{}", rng.below(4), rng.below(256));
        let path = zipf(&mut rng, PATHS);
        let status = if rng.below(10) == 0 { 404 } else { 200 };
        let bytes = 200 + rng.below(5000);
        let agent = AGENTS[rng.below(AGENTS.len())];
        out.push_str(&format!(
            "2024-03-{:02} {h:02}:{m:02}:{s:02} {level:<5} {ip} GET {path} {status} {bytes} \"{agent}\"\n",
            1 + (t / 86400) % 28
        ));
    }
    let mut b = out.into_bytes();
    b.truncate(len);
    b
}
