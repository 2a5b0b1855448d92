#include <algorithm>

#include "plainlang/metrics/metrics.hpp"

namespace plainlang::metrics {

TextStatistics text_statistics(std::string_view text) {
    const auto words = text::word_tokens(text::tokenize(text));
    if (words.empty()) {
        throw MetricError(MetricErrorKind::NoWords, "readability: text contains no words");
    }
    TextStatistics stats;
    stats.words = words.size();
    stats.sentences = std::max<std::size_t>(1, text::split_sentences(text).size());
    for (const auto& w : words) stats.syllables += static_cast<std::size_t>(text::count_syllables(w));
    return stats;
}

namespace {

double words_per_sentence(const TextStatistics& s) {
    return static_cast<double>(s.words) / static_cast<double>(s.sentences);
}

double syllables_per_word(const TextStatistics& s) {
    return static_cast<double>(s.syllables) / static_cast<double>(s.words);
}

double fre_of(const TextStatistics& s) {
    return 206.835 - 1.015 * words_per_sentence(s) - 84.6 * syllables_per_word(s);
}

double fkg_of(const TextStatistics& s) {
    return 0.39 * words_per_sentence(s) + 11.8 * syllables_per_word(s) - 15.59;
}

}  // namespace

double flesch_reading_ease(std::string_view text) { return fre_of(text_statistics(text)); }

double fk_grade(std::string_view text) { return fkg_of(text_statistics(text)); }

core::Readability readability(std::string_view text) {
    const auto stats = text_statistics(text);
    return {fre_of(stats), fkg_of(stats)};
}

}  // namespace plainlang::metrics
