#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plainlang/core/error.hpp"
#include "plainlang/core/types.hpp"
#include "plainlang/text/analysis.hpp"

namespace plainlang::metrics {

enum class MetricErrorKind { EmptyInput, NoWords, LengthMismatch };
using MetricError = CodedError<MetricErrorKind>;

/// Sentence BLEU with clipped n-gram precision, N = min(4, |candidate|),
/// uniform weights, brevity penalty and no smoothing. Result in [0, 1].
double bleu(const text::TokenSequence& candidate, const text::TokenSequence& reference);

/// Corpus BLEU from aggregate clipped counts and total lengths; the order
/// is capped by the longest candidate.
double corpus_bleu(std::span<const text::TokenSequence> candidates,
                   std::span<const text::TokenSequence> references);

struct SariBreakdown {
    double f_add = 0.0;
    double f_keep = 0.0;
    double p_del = 0.0;
    double sari = 0.0;  // 100 * (f_add + f_keep + p_del) / 3
};

/// Single-reference SARI over n-gram sets, n = 1..4. Ratios with a zero
/// denominator count as 0.
SariBreakdown sari(const text::TokenSequence& source, const text::TokenSequence& candidate,
                   const text::TokenSequence& reference);

struct TextStatistics {
    std::size_t sentences = 0;
    std::size_t words = 0;
    std::size_t syllables = 0;
};

/// Throws MetricError{NoWords} when the text has no word tokens.
TextStatistics text_statistics(std::string_view text);

double flesch_reading_ease(std::string_view text);
double fk_grade(std::string_view text);
core::Readability readability(std::string_view text);

struct PairScores {
    double bleu = 0.0;
    SariBreakdown sari;
    double fk_ease = 0.0;
    double fk_grade = 0.0;
};

/// All per-pair metrics for one simplified output.
PairScores score_pair(const core::CorpusPair& pair, std::string_view output);

/// Means over per-pair scores in index order. Throws on an empty input.
core::MetricReport aggregate(std::span<const PairScores> scores, core::Audience audience,
                             std::string model_name);

/// Scores every output against its pair; any per-pair failure propagates.
/// Throws MetricError{LengthMismatch} when sizes differ or are zero.
core::MetricReport evaluate_corpus(std::span<const core::CorpusPair> pairs,
                                   std::span<const std::string> outputs, core::Audience audience,
                                   std::string model_name);

}  // namespace plainlang::metrics
