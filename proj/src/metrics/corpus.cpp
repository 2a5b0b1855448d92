#include "plainlang/metrics/metrics.hpp"

namespace plainlang::metrics {

PairScores score_pair(const core::CorpusPair& pair, std::string_view output) {
    const auto source = text::tokenize(pair.original);
    const auto candidate = text::tokenize(output);
    const auto reference = text::tokenize(pair.reference);
    PairScores scores;
    scores.bleu = bleu(candidate, reference);
    scores.sari = sari(source, candidate, reference);
    const auto r = readability(output);
    scores.fk_ease = r.fre;
    scores.fk_grade = r.fk_grade;
    return scores;
}

core::MetricReport aggregate(std::span<const PairScores> scores, core::Audience audience,
                             std::string model_name) {
    if (scores.empty()) {
        throw MetricError(MetricErrorKind::LengthMismatch, "aggregate: no scored pairs");
    }
    double bleu_sum = 0.0;
    double sari_sum = 0.0;
    double fre_sum = 0.0;
    double fkg_sum = 0.0;
    for (const auto& s : scores) {
        bleu_sum += s.bleu;
        sari_sum += s.sari.sari;
        fre_sum += s.fk_ease;
        fkg_sum += s.fk_grade;
    }
    const auto n = static_cast<double>(scores.size());
    core::MetricReport report;
    report.audience = audience;
    report.model_name = std::move(model_name);
    report.n_pairs = scores.size();
    report.bleu = bleu_sum / n;
    report.sari = sari_sum / n;
    report.fk_ease = fre_sum / n;
    report.fk_grade = fkg_sum / n;
    return report;
}

core::MetricReport evaluate_corpus(std::span<const core::CorpusPair> pairs,
                                   std::span<const std::string> outputs, core::Audience audience,
                                   std::string model_name) {
    if (pairs.size() != outputs.size() || pairs.empty()) {
        throw MetricError(MetricErrorKind::LengthMismatch,
                          "evaluate_corpus: " + std::to_string(pairs.size()) + " pairs vs " +
                              std::to_string(outputs.size()) + " outputs");
    }
    std::vector<PairScores> scores;
    scores.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) scores.push_back(score_pair(pairs[i], outputs[i]));
    return aggregate(scores, audience, std::move(model_name));
}

}  // namespace plainlang::metrics
