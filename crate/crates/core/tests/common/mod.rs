//! Shared helpers for integration tests: synthetic OLID-format data with
//! class-dependent vocabulary, so models have real signal to learn.
#![allow(dead_code)] // not every test file uses every helper

use offlang::rng::Rng;

const NOT_WORDS: &[&str] = &[
    "sunshine", "garden", "coffee", "weekend", "painting", "recipe", "concert", "puppy",
    "holiday", "cycling", "novel", "breakfast",
];
const OFF_GENERAL: &[&str] = &[
    "trash", "garbage", "pathetic", "clown", "loser", "disgrace", "awful", "worthless",
];
const TIN_IND: &[&str] = &["you", "idiot", "liar", "coward", "fraud"];
const TIN_GRP: &[&str] = &["they", "fools", "sheep", "crooks", "parasites"];
const TIN_OTH: &[&str] = &["this", "circus", "dumpster", "nonsense", "scam"];
const UNT_WORDS: &[&str] = &["everything", "ruined", "hate", "mess", "chaos"];
const SHARED: &[&str] = &["the", "a", "is", "so", "and", "very", "today", "really"];

fn pick<'a>(rng: &mut Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.below(pool.len() as u64) as usize]
}

fn compose(rng: &mut Rng, pool: &[&str]) -> String {
    let mut words = Vec::new();
    if rng.next_f64() < 0.4 {
        words.push("@USER".to_string());
    }
    let n_topic = 3 + rng.below(4) as usize;
    for _ in 0..n_topic {
        words.push(pick(rng, pool).to_string());
    }
    let n_shared = 1 + rng.below(3) as usize;
    for _ in 0..n_shared {
        words.push(pick(rng, SHARED).to_string());
    }
    if rng.next_f64() < 0.2 {
        words.push("URL".to_string());
    }
    // shuffle the word order so position carries no signal
    rng.shuffle(&mut words);
    words.join(" ")
}

/// Generate `n` rows of OLID-format TSV (with header). Roughly 64% NOT / 36%
/// OFF; offensive rows split into targeted (IND/GRP/OTH) and untargeted.
pub fn synthetic_olid_tsv(n: usize, seed: u64) -> String {
    let mut rng = Rng::from_seed(seed);
    let mut out = String::from("id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n");
    for i in 0..n {
        let roll = rng.next_f64();
        let (text, a, b, c) = if roll < 0.64 {
            (compose(&mut rng, NOT_WORDS), "NOT", "NULL", "NULL")
        } else {
            let troll = rng.next_f64();
            if troll < 0.25 {
                (
                    compose(&mut rng, &[OFF_GENERAL, UNT_WORDS].concat()),
                    "OFF",
                    "UNT",
                    "NULL",
                )
            } else {
                let (pool, c) = match rng.below(20) {
                    0..=9 => (TIN_IND, "IND"),
                    10..=16 => (TIN_GRP, "GRP"),
                    _ => (TIN_OTH, "OTH"),
                };
                (
                    compose(&mut rng, &[OFF_GENERAL, pool].concat()),
                    "OFF",
                    "TIN",
                    c,
                )
            }
        };
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", 10_000 + i, text, a, b, c));
    }
    out
}

/// Gold `id,label` CSV for one task from a synthetic TSV, skipping rows the
/// task does not cover.
pub fn gold_csv_for_task(tsv: &str, task: char) -> String {
    let mut out = String::new();
    for line in tsv.lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            continue;
        }
        let label = match task {
            'A' => fields[2],
            'B' => fields[3],
            'C' => fields[4],
            _ => panic!("bad task"),
        };
        if label != "NULL" {
            out.push_str(&format!("{},{}\n", fields[0], label));
        }
    }
    out
}
