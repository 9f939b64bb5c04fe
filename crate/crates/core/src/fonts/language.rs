//! Built-in alphabets.
//!
//! Each language maps to a list of codepoints in ascending Unicode scalar
//! order. The class index of a symbol is its position in this list, so the
//! ordering is part of the dataset format and must not change.

/// Codepoint ranges (inclusive) per language.
const TABLE: &[(&str, &[(u32, u32)])] = &[
    ("arabic", &[(0x0621, 0x063A), (0x0641, 0x064A)]),
    (
        "bengali",
        &[
            (0x0985, 0x098C),
            (0x098F, 0x0990),
            (0x0993, 0x09A8),
            (0x09AA, 0x09B0),
            (0x09B2, 0x09B2),
            (0x09B6, 0x09B9),
        ],
    ),
    // CJK Unified Ideographs, basic block.
    ("chinese-simplified", &[(0x4E00, 0x9FA5)]),
    ("english", &[(0x0061, 0x007A)]),
    ("greek", &[(0x03B1, 0x03C9)]),
    (
        "gujarati",
        &[
            (0x0A85, 0x0A8B),
            (0x0A8D, 0x0A8D),
            (0x0A8F, 0x0A91),
            (0x0A93, 0x0AA8),
            (0x0AAA, 0x0AB0),
            (0x0AB2, 0x0AB3),
            (0x0AB5, 0x0AB9),
        ],
    ),
    ("hebrew", &[(0x05D0, 0x05EA)]),
    ("khmer", &[(0x1780, 0x17A2)]),
    // All 11,172 precomposed Hangul syllables.
    ("korean", &[(0xAC00, 0xD7A3)]),
    ("russian", &[(0x0430, 0x044F)]),
    (
        "tamil",
        &[
            (0x0B85, 0x0B8A),
            (0x0B8E, 0x0B90),
            (0x0B92, 0x0B95),
            (0x0B99, 0x0B9A),
            (0x0B9C, 0x0B9C),
            (0x0B9E, 0x0B9F),
            (0x0BA3, 0x0BA4),
            (0x0BA8, 0x0BAA),
            (0x0BAE, 0x0BB9),
        ],
    ),
    (
        "telugu",
        &[
            (0x0C05, 0x0C0C),
            (0x0C0E, 0x0C10),
            (0x0C12, 0x0C28),
            (0x0C2A, 0x0C39),
        ],
    ),
    ("thai", &[(0x0E01, 0x0E2E)]),
    (
        "vietnamese",
        &[
            (0x0061, 0x0064),
            (0x0065, 0x0065),
            (0x0067, 0x0069),
            (0x006B, 0x0070),
            (0x0071, 0x0076),
            (0x0078, 0x0079),
            (0x00E2, 0x00E2),
            (0x00EA, 0x00EA),
            (0x00F4, 0x00F4),
            (0x0103, 0x0103),
            (0x0111, 0x0111),
            (0x01A1, 0x01A1),
            (0x01B0, 0x01B0),
        ],
    ),
];

/// Codes of every built-in language, sorted.
pub fn known_languages() -> impl Iterator<Item = &'static str> {
    TABLE.iter().map(|(code, _)| *code)
}

/// Full canonical codepoint list of a language, or `None` if unknown.
pub fn language_codepoints(code: &str) -> Option<Vec<char>> {
    let (_, ranges) = TABLE.iter().find(|(c, _)| *c == code)?;
    let mut out: Vec<char> = ranges
        .iter()
        .flat_map(|&(lo, hi)| lo..=hi)
        .filter_map(char::from_u32)
        .collect();
    out.sort_unstable();
    out.dedup();
    Some(out)
}
