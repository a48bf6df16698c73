//! Unicode helpers shared by every stage.

use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes and trims `s`.
pub fn nfc_trim(s: &str) -> String {
    s.nfc().collect::<String>().trim().to_string()
}

/// NFC-normalizes, trims and lowercases `s`. This is the matching key form
/// for tags, lexicon entries and blocklists.
pub fn normalize_key(s: &str) -> String {
    nfc_trim(s).to_lowercase()
}

/// True for characters of scripts written without spaces between words
/// (Han, kana).
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK extension A
        | 0x4E00..=0x9FFF    // CJK unified ideographs
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0x20000..=0x2FA1F) // supplementary ideographs
}

/// Languages whose tags are not whitespace-delimited.
pub fn is_unsegmented_lang(lang: &str) -> bool {
    let base = lang.split(['-', '_']).next().unwrap_or(lang);
    matches!(base, "zh" | "ja")
}

/// Finds `needle` in `haystack` at a word boundary. Both inputs are expected
/// in key form. A boundary is the string edge, a non-alphanumeric character,
/// or a CJK character on either side of the edge (CJK text carries no
/// spaces, so every character edge counts).
pub fn contains_word(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let first = needle.chars().next().unwrap();
    let last = needle.chars().next_back().unwrap();
    for (start, _) in haystack.match_indices(needle) {
        let before = haystack[..start].chars().next_back();
        let after = haystack[start + needle.len()..].chars().next();
        let left_ok = match before {
            None => true,
            Some(c) => !c.is_alphanumeric() || is_cjk(c) || is_cjk(first),
        };
        let right_ok = match after {
            None => true,
            Some(c) => !c.is_alphanumeric() || is_cjk(c) || is_cjk(last),
        };
        if left_ok && right_ok {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case_and_space() {
        assert_eq!(normalize_key("  Sunset "), "sunset");
        // decomposed e + combining acute composes to U+00E9
        assert_eq!(normalize_key("Cafe\u{301}"), "caf\u{e9}");
    }

    #[test]
    fn word_boundaries() {
        assert!(contains_word("a happy day", "happy"));
        assert!(contains_word("happy", "happy"));
        assert!(!contains_word("unhappy day", "happy"));
        assert!(!contains_word("happyness", "happy"));
        assert!(contains_word("so happy!", "happy"));
        assert!(contains_word("今天很快乐的一天", "快乐"));
    }

    #[test]
    fn unsegmented_languages() {
        assert!(is_unsegmented_lang("zh"));
        assert!(is_unsegmented_lang("zh-tw"));
        assert!(!is_unsegmented_lang("en"));
    }
}
