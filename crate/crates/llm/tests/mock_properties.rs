use codeprompt_llm::{
    FinishReason, LanguageModel, LogprobAggregation, MockModel, MockScript, SamplingParams, ScoreExt,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn unscripted_scores_are_nonpositive_and_whitespace_stable(
        seed in any::<u64>(),
        prompt in "[a-z ]{1,20}[a-z]",
        target in "[a-z]{1,6}( [a-z]{1,6}){0,5}",
        tail in "[ \t\n]{0,4}",
    ) {
        let m = MockModel::new(MockScript { seed, ..Default::default() }).unwrap();
        let a = m.score_target_logprob(&prompt, &target, LogprobAggregation::Mean).unwrap();
        let b = m.score_target_logprob(&prompt, &format!("{target}{tail}"), LogprobAggregation::Mean).unwrap();
        prop_assert!(a <= 0.0);
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn finish_reason_is_length_iff_truncated(n_words in 1usize..12, max in 1u32..12) {
        let text = vec!["w"; n_words].join(" ");
        let m = MockModel::new(MockScript::strict().respond("p", text)).unwrap();
        let c = m.complete("p", &SamplingParams::default().with_max_tokens(max)).unwrap();
        let emitted = c.text.split_whitespace().count();
        prop_assert_eq!(emitted, n_words.min(max as usize));
        prop_assert_eq!(c.finish_reason == FinishReason::Length, n_words > max as usize);
    }
}
