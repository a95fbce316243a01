use pharmarec::textprep::{
    build_feature_matrix, build_vocabulary, compute_cur, default_lexicon, default_preprocessor, polarity, CurInputs,
    CurMode,
};
use proptest::prelude::*;

#[test]
fn preprocessing_is_idempotent_on_real_phrases() {
    let pre = default_preprocessor();
    for text in [
        "High BP and trouble sleeping, don't know why",
        "Works great!! no side effects at all",
        "Made my headaches much worse.",
    ] {
        let once = pre.preprocess(text);
        assert!(!once.is_empty(), "{text}");
        assert_eq!(pre.preprocess(&once.join(" ")), once, "{text}");
    }
}

#[test]
fn vocabulary_drops_rare_terms_and_encodes_bits() {
    let pre = default_preprocessor();
    let docs: Vec<Vec<String>> =
        ["chronic migraine", "migraine with nausea", "back pain"].iter().map(|t| pre.preprocess(t)).collect();
    let vocab = build_vocabulary(&docs, 2);
    assert_eq!(vocab.len(), 1);
    let m = build_feature_matrix(&docs, &vocab);
    assert_eq!((m.row(0), m.row(2)), (&[1u8][..], &[0u8][..]));
}

#[test]
fn polarity_reacts_to_lexicon_hits() {
    let pre = default_preprocessor();
    let lex = default_lexicon();
    assert_eq!(polarity(&pre.preprocess("the tablets are blue"), &lex), 0.5);
    assert!(polarity(&pre.preprocess("excellent, it really helped"), &lex) > 0.5);
    assert!(polarity(&pre.preprocess("terrible nausea, much worse"), &lex) < 0.5);
}

fn cur(v: (f64, f64, f64, f64), mode: CurMode) -> f64 {
    compute_cur(CurInputs::new(v.0, v.1, v.2, v.3), mode).unwrap()
}

#[test]
fn worked_cur_values() {
    assert_eq!(cur((10.0, 4.0, 4.0, 1.0), CurMode::NormalizedAverage), 1.0);
    assert_eq!(cur((0.0, 0.0, 0.0, 0.0), CurMode::NormalizedAverage), 0.0);
    assert_eq!(cur((10.0, 4.0, 4.0, 0.0), CurMode::Literal), 0.5);
    assert!(compute_cur(CurInputs::new(11.0, 0.0, 0.0, 0.0), CurMode::Literal).is_err());
}

fn inputs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0u8..=10, 0u8..=4, 0u8..=4, 0.0f64..=1.0).prop_map(|(o, e, s, p)| (o as f64, e as f64, s as f64, p))
}

proptest! {
    #[test]
    fn cur_stays_in_unit_interval(v in inputs()) {
        for mode in [CurMode::NormalizedAverage, CurMode::Literal, CurMode::InvertedDos] {
            let c = cur(v, mode);
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn cur_is_monotone_in_every_input(a in inputs(), b in inputs()) {
        let lo = (a.0.min(b.0), a.1.min(b.1), a.2.min(b.2), a.3.min(b.3));
        let hi = (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2), a.3.max(b.3));
        for mode in [CurMode::NormalizedAverage, CurMode::Literal] {
            prop_assert!(cur(lo, mode) <= cur(hi, mode));
        }
    }
}
