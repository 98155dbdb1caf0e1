//! Text preprocessing, tokenization, and sentence-packing chunker.

use super::Chunk;

/// Collapse whitespace runs to single spaces and trim. Standards text often
/// arrives with hard wraps and page artifacts; retrieval works on the
/// flattened form.
pub fn preprocess(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_space = true;
    for c in text.chars() {
        if c.is_whitespace() {
            if !in_space {
                out.push(' ');
                in_space = true;
            }
        } else {
            out.push(c);
            in_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Byte spans of alphanumeric token runs.
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            spans.push((s, i));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Lowercased tokens of a text.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|(s, e)| text[s..e].to_lowercase())
        .collect()
}

pub fn token_count(text: &str) -> usize {
    token_spans(text).len()
}

/// Split preprocessed text into sentence spans. A sentence ends at `.`, `!`,
/// or `?` followed by whitespace or end of text.
fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if (c == b'.' || c == b'!' || c == b'?')
            && (i + 1 == bytes.len() || bytes[i + 1] == b' ')
        {
            spans.push((start, i + 1));
            start = i + 2.min(bytes.len() - i);
            i += 2;
        } else {
            i += 1;
        }
    }
    if start < bytes.len() {
        spans.push((start, bytes.len()));
    }
    spans
}

/// Greedy sentence packing: accumulate whole sentences until the next one
/// would exceed `max_tokens`; a single over-long sentence is split at token
/// boundaries.
pub fn chunk_document(doc_name: &str, text: &str, max_tokens: usize) -> Vec<Chunk> {
    let pre = preprocess(text);
    if pre.is_empty() {
        return Vec::new();
    }
    let max_tokens = max_tokens.max(1);
    let mut pieces: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut current_tokens = 0usize;

    let flush = |current: &mut String, current_tokens: &mut usize, pieces: &mut Vec<String>| {
        let trimmed = current.trim();
        if !trimmed.is_empty() {
            pieces.push(trimmed.to_string());
        }
        current.clear();
        *current_tokens = 0;
    };

    for (s, e) in sentence_spans(&pre) {
        let sentence = &pre[s..e];
        let tokens = token_spans(sentence);
        if tokens.len() > max_tokens {
            flush(&mut current, &mut current_tokens, &mut pieces);
            // Split the long sentence at token starts so pieces concatenate
            // back to the original text.
            let mut piece_start = 0usize;
            let mut k = max_tokens;
            while k < tokens.len() {
                let cut = tokens[k].0;
                pieces.push(sentence[piece_start..cut].trim().to_string());
                piece_start = cut;
                k += max_tokens;
            }
            pieces.push(sentence[piece_start..].trim().to_string());
            continue;
        }
        if current_tokens + tokens.len() > max_tokens {
            flush(&mut current, &mut current_tokens, &mut pieces);
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(sentence);
        current_tokens += tokens.len();
    }
    flush(&mut current, &mut current_tokens, &mut pieces);

    pieces
        .into_iter()
        .enumerate()
        .map(|(ordinal, text)| {
            let token_count = token_count(&text);
            Chunk { doc_name: doc_name.to_string(), ordinal, token_count, text }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preprocess_collapses_whitespace() {
        assert_eq!(preprocess("a  b\n\tc \n"), "a b c");
        assert_eq!(preprocess("   "), "");
    }

    #[test]
    fn tokenizer_is_lowercase_alphanumeric() {
        assert_eq!(tokenize("Hop Limit must be in [1,255]."), vec![
            "hop", "limit", "must", "be", "in", "1", "255"
        ]);
        assert_eq!(tokenize("FlowLabel 0xb7cb4a"), vec!["flowlabel", "0xb7cb4a"]);
    }

    #[test]
    fn ten_token_sentences_pack_into_three_chunks() {
        // 120 sentences of 10 tokens = 1200 tokens -> 51-sentence chunks.
        let sentence = "one two three four five six seven eight nine ten.";
        let doc = vec![sentence; 120].join(" ");
        let chunks = chunk_document("d", &doc, 512);
        assert_eq!(chunks.len(), 3);
        assert!(chunks.iter().all(|c| c.token_count <= 512));
        let total: usize = chunks.iter().map(|c| c.token_count).sum();
        assert_eq!(total, 1200);
    }

    #[test]
    fn short_sentence_is_one_chunk() {
        let chunks = chunk_document("d", "just five little tokens here.", 512);
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 5);
        assert_eq!(chunks[0].ordinal, 0);
    }

    #[test]
    fn long_sentence_splits_at_token_boundaries() {
        let words: Vec<String> = (0..600).map(|i| format!("w{i}")).collect();
        let doc = format!("{}.", words.join(" "));
        let chunks = chunk_document("d", &doc, 512);
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].token_count, 512);
        assert_eq!(chunks[1].token_count, 88);
    }

    #[test]
    fn chunks_reconstruct_the_document() {
        let doc = "First sentence here. Second one follows! Third asks? Fourth ends.";
        let chunks = chunk_document("d", doc, 6);
        assert!(chunks.len() > 1);
        let joined = chunks.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(" ");
        assert_eq!(joined, preprocess(doc));
        for (i, c) in chunks.iter().enumerate() {
            assert_eq!(c.ordinal, i);
        }
    }

    #[test]
    fn empty_text_yields_no_chunks() {
        assert!(chunk_document("d", "", 512).is_empty());
        assert!(chunk_document("d", " \n\t ", 512).is_empty());
    }
}
