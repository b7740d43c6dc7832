use emoguard::emojitext::{graphemes, segment, TokenKind, UNICODE_VERSION};
use unicode_properties::UnicodeEmoji;

const TEST_FILE: &str = include_str!("data/GraphemeBreakTest-17.0.0.txt");

struct Case {
    line: usize,
    text: String,
    clusters: Vec<String>,
}

fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for (i, raw) in TEST_FILE.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut clusters = vec![String::new()];
        for tok in line.split_whitespace() {
            match tok {
                "÷" => {
                    if !clusters.last().unwrap().is_empty() {
                        clusters.push(String::new());
                    }
                }
                "×" => {}
                hex => {
                    let cp = u32::from_str_radix(hex, 16).unwrap();
                    clusters.last_mut().unwrap().push(char::from_u32(cp).unwrap());
                }
            }
        }
        clusters.retain(|c| !c.is_empty());
        out.push(Case {
            line: i + 1,
            text: clusters.concat(),
            clusters,
        });
    }
    out
}

fn has_emoji(text: &str) -> bool {
    text.chars()
        .any(|c| !c.is_ascii() && c.is_emoji_char_or_emoji_component())
}

#[test]
fn pinned_unicode_version() {
    assert_eq!(UNICODE_VERSION, (17, 0, 0));
}

#[test]
fn all_cases_conform() {
    let cases = cases();
    assert!(cases.len() > 700);
    for c in &cases {
        let got: Vec<&str> = graphemes(&c.text).collect();
        assert_eq!(got, c.clusters, "line {}", c.line);
    }
}

#[test]
fn emoji_cases_cover_zwj_modifiers_and_flags() {
    let emoji: Vec<Case> = cases().into_iter().filter(|c| has_emoji(&c.text)).collect();
    let any = |f: &dyn Fn(char) -> bool| emoji.iter().filter(|c| c.text.chars().any(f)).count();
    assert!(any(&|c| c == '\u{200D}') > 10);
    assert!(any(&|c| ('\u{1F3FB}'..='\u{1F3FF}').contains(&c)) > 0);
    assert!(any(&|c| ('\u{1F1E6}'..='\u{1F1FF}').contains(&c)) > 10);
    for c in &emoji {
        let got: Vec<&str> = graphemes(&c.text).collect();
        assert_eq!(got, c.clusters, "line {}", c.line);
    }
}

#[test]
fn emoji_tokens_never_split_a_cluster() {
    for c in cases().iter().filter(|c| has_emoji(&c.text)) {
        for tok in segment(&c.text).iter().filter(|t| t.kind == TokenKind::Emoji) {
            assert!(
                c.clusters.iter().any(|g| g == tok.text),
                "line {}: {:?}",
                c.line,
                tok.text
            );
        }
    }
}

#[test]
fn common_sequences() {
    let family = "\u{1F468}\u{200D}\u{1F469}\u{200D}\u{1F467}";
    let thumbs = "\u{1F44D}\u{1F3FD}";
    let flag = "\u{1F1FA}\u{1F1F8}";
    let text = format!("a{family}{thumbs}{flag} b");
    let emojis: Vec<&str> = segment(&text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Emoji)
        .map(|t| t.text)
        .collect();
    assert_eq!(emojis, [family, thumbs, flag]);
}
