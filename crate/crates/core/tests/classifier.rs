use proptest::prelude::*;
use tortuga::classifier::builtin_corpus;
use tortuga::{check_context, classify, AgentContext, InputClass, PrimitiveRegistry};

#[test]
fn corpus_agreement_is_total() {
    let reg = PrimitiveRegistry::builtin();
    let corpus = builtin_corpus();
    assert_eq!(corpus.len(), 50);
    let misses: Vec<_> = corpus
        .iter()
        .filter_map(|item| {
            let got = classify(&item.message, reg, AgentContext::Observer);
            (got.label() != item.expected).then(|| format!("{:?}: want {} got {got:?}", item.message, item.expected))
        })
        .collect();
    assert!(misses.is_empty(), "{misses:#?}");
}

proptest! {
    #[test]
    fn never_executes_rejected_code(msg in "\\PC{0,60}") {
        let reg = PrimitiveRegistry::builtin();
        let first = classify(&msg, reg, AgentContext::Observer);
        prop_assert_eq!(&first, &classify(&msg, reg, AgentContext::Observer));
        if let InputClass::ValidCode(ast) = first {
            prop_assert!(check_context(&ast, AgentContext::Observer, reg).is_empty());
        }
    }

    #[test]
    fn code_shaped_input_stays_deterministic(
        msg in "(ask|crt|fd|set|print) (turtles|patches|color|red|[0-9]) \\[ ?(fd|set pcolor|die)? ?[0-9]? ?\\]?"
    ) {
        let reg = PrimitiveRegistry::builtin();
        if let InputClass::ValidCode(ast) = classify(&msg, reg, AgentContext::Observer) {
            prop_assert!(check_context(&ast, AgentContext::Observer, reg).is_empty());
        }
    }
}
