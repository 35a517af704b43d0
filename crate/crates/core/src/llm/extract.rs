use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionMethod {
    FencedBlock,
    BraceRegion,
    WholeText,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub code: String,
    pub method: ExtractionMethod,
}

/// Pulls the code out of a model response: the last fenced block, else the
/// longest balanced JSON-looking `{...}` region when it makes up most of the
/// text, else the text itself. The steps repeat until nothing changes, so
/// extracting twice gives the same result as extracting once.
pub fn extract_code(raw: &str) -> Extraction {
    let mut current = raw.to_string();
    let mut method = ExtractionMethod::WholeText;
    loop {
        let (next, m) = step(&current);
        if next == current {
            return Extraction { code: current, method };
        }
        if method == ExtractionMethod::WholeText {
            method = m;
        }
        current = next;
    }
}

fn step(text: &str) -> (String, ExtractionMethod) {
    if let Some(block) = last_fenced_block(text) {
        return (block, ExtractionMethod::FencedBlock);
    }
    if let Some(region) = dominant_brace_region(text) {
        return (region.to_string(), ExtractionMethod::BraceRegion);
    }
    (text.to_string(), ExtractionMethod::WholeText)
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn last_fenced_block(text: &str) -> Option<String> {
    let mut last = None;
    let mut open: Option<Vec<&str>> = None;
    for line in text.lines() {
        match open.take() {
            None if is_fence(line) => open = Some(Vec::new()),
            None => {}
            Some(body) if is_fence(line) => {
                let mut s = body.join("\n");
                s.push('\n');
                last = Some(s);
            }
            Some(mut body) => {
                body.push(line);
                open = Some(body);
            }
        }
    }
    last
}

/// End index (exclusive) of the balanced region opening at `start`, skipping
/// braces inside JSON strings.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn looks_like_object(bytes: &[u8], start: usize) -> bool {
    bytes[start + 1..]
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'"' || b == b'}')
}

/// The longest JSON-object-like region, if it covers at least half of the
/// text's non-whitespace characters.
fn dominant_brace_region(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' && looks_like_object(bytes, i) {
            if let Some(end) = balanced_end(bytes, i) {
                if best.is_none_or(|(s, e)| end - i > e - s) {
                    best = Some((i, end));
                }
                i = end;
                continue;
            }
        }
        i += 1;
    }
    let (s, e) = best?;
    let region = &text[s..e];
    let weight = |t: &str| t.chars().filter(|c| !c.is_whitespace()).count();
    (2 * weight(region) >= weight(text)).then_some(region)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn single_fenced_block() {
        let raw = "Here you go:\n```json\n{\"a\": 1}\n```\nEnjoy.";
        let x = extract_code(raw);
        assert_eq!(x.code, "{\"a\": 1}");
        assert_eq!(x.method, ExtractionMethod::FencedBlock);
    }

    #[test]
    fn last_of_two_blocks() {
        let raw = "Example:\n```\nfirst\n```\nAnswer:\n```python\nsecond()\n```\n";
        assert_eq!(extract_code(raw).code, "second()\n");
    }

    #[test]
    fn unclosed_fence_is_ignored() {
        let raw = "```\nclosed\n```\n```\nnever closed";
        assert_eq!(extract_code(raw).code, "closed\n");
    }

    #[test]
    fn prose_with_json() {
        let raw = "Sure! {\"patcher\": {\"boxes\": [], \"lines\": [], \"note\": \"}{\"}} is the patch.";
        let x = extract_code(raw);
        assert_eq!(x.code, "{\"patcher\": {\"boxes\": [], \"lines\": [], \"note\": \"}{\"}}");
        assert_eq!(x.method, ExtractionMethod::BraceRegion);
    }

    #[test]
    fn code_with_small_object_is_kept_whole() {
        let raw = "```js\nconst o = ctx.createOscillator();\nconst opts = {\"type\": \"sine\"};\nfunction f() { return 1; }\n```";
        let x = extract_code(raw);
        assert!(x.code.starts_with("const o"));
        assert_eq!(x.method, ExtractionMethod::FencedBlock);
    }

    #[test]
    fn plain_text_falls_through() {
        let raw = "let o = place(\"osc\", 440)\nemit()";
        let x = extract_code(raw);
        assert_eq!(x.code, raw);
        assert_eq!(x.method, ExtractionMethod::WholeText);
        assert_eq!(extract_code("").code, "");
    }

    proptest! {
        #[test]
        fn idempotent(raw in "(```[a-z]{0,4}\n|\\{\"a\": |\\}|[a-z \n\"{}]{0,12}){0,12}") {
            let once = extract_code(&raw).code;
            prop_assert_eq!(extract_code(&once).code, once.clone());
        }

        #[test]
        fn idempotent_on_arbitrary_text(raw in ".{0,200}") {
            let once = extract_code(&raw).code;
            prop_assert_eq!(extract_code(&once).code, once.clone());
        }
    }
}
