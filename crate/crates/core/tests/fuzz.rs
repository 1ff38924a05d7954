use proptest::prelude::*;
use tortuga::gen::{round_trip_failures, soundness_run};
use tortuga::lexer::tokenize;
use tortuga::{parse_source, PrimitiveRegistry};

#[test]
fn pretty_print_round_trips() {
    let failures = round_trip_failures(2024, 1000, PrimitiveRegistry::builtin());
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn checked_programs_never_hit_context_errors() {
    let report = soundness_run(99, 1000, PrimitiveRegistry::builtin());
    assert!(report.failures.is_empty(), "{:#?}", report.failures);
    assert!(report.rejected > 0, "generator never produced a context error");
}

proptest! {
    #[test]
    fn tokens_and_comments_cover_source(src in "[a-z0-9 \\[\\]();\"+*/<>=!.\\n-]{0,60}") {
        if let Ok(lexed) = tokenize(&src) {
            let mut covered = vec![false; src.len()];
            let spans = lexed.tokens.iter().map(|t| t.span).chain(lexed.comments.iter().map(|c| c.span));
            for span in spans {
                for slot in &mut covered[span.range()] {
                    prop_assert!(!*slot, "overlapping spans");
                    *slot = true;
                }
            }
            for (i, c) in src.char_indices() {
                prop_assert!(covered[i] || c.is_whitespace(), "byte {} of {:?}", i, src);
            }
        }
    }

    #[test]
    fn parser_never_panics(src in "\\PC{0,80}") {
        let _ = parse_source(&src, PrimitiveRegistry::builtin());
    }
}
