#include <cmath>

#include "gram_index.hpp"
#include "plainlang/metrics/metrics.hpp"

namespace plainlang::metrics {

namespace {

double brevity_penalty(double candidate_len, double reference_len) {
    return candidate_len > reference_len ? 1.0 : std::exp(1.0 - reference_len / candidate_len);
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
    return (p == 0.0 || r == 0.0) ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

double bleu(const text::TokenSequence& candidate, const text::TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) {
        throw MetricError(MetricErrorKind::EmptyInput, "bleu: candidate and reference must be non-empty");
    }
    detail::Vocabulary vocab;
    const auto cand = vocab.encode(candidate);
    const auto ref = vocab.encode(reference);
    const std::size_t order = std::min<std::size_t>(text::kMaxNgramOrder, cand.size());

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= order; ++n) {
        const auto cg = detail::sorted_grams(cand, n);
        const auto rg = detail::sorted_grams(ref, n);
        const std::size_t matches = detail::clipped_matches(cg, rg);
        if (matches == 0) return 0.0;
        log_sum += std::log(ratio(matches, cg.size()));
    }
    const double bp = brevity_penalty(static_cast<double>(cand.size()), static_cast<double>(ref.size()));
    return bp * std::exp(log_sum / static_cast<double>(order));
}

double corpus_bleu(std::span<const text::TokenSequence> candidates,
                   std::span<const text::TokenSequence> references) {
    if (candidates.size() != references.size()) {
        throw MetricError(MetricErrorKind::LengthMismatch, "corpus_bleu: candidate/reference count mismatch");
    }
    std::size_t longest = 0;
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        longest = std::max(longest, candidates[i].size());
        cand_len += candidates[i].size();
        ref_len += references[i].size();
    }
    if (cand_len == 0 || ref_len == 0) {
        throw MetricError(MetricErrorKind::EmptyInput, "corpus_bleu: no tokens");
    }
    const std::size_t order = std::min<std::size_t>(text::kMaxNgramOrder, longest);
    std::vector<std::size_t> matches(order + 1, 0);
    std::vector<std::size_t> totals(order + 1, 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        detail::Vocabulary vocab;
        const auto cand = vocab.encode(candidates[i]);
        const auto ref = vocab.encode(references[i]);
        for (std::size_t n = 1; n <= order; ++n) {
            const auto cg = detail::sorted_grams(cand, n);
            matches[n] += detail::clipped_matches(cg, detail::sorted_grams(ref, n));
            totals[n] += cg.size();
        }
    }
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= order; ++n) {
        if (matches[n] == 0) return 0.0;
        log_sum += std::log(ratio(matches[n], totals[n]));
    }
    const double bp = brevity_penalty(static_cast<double>(cand_len), static_cast<double>(ref_len));
    return bp * std::exp(log_sum / static_cast<double>(order));
}

SariBreakdown sari(const text::TokenSequence& source, const text::TokenSequence& candidate,
                   const text::TokenSequence& reference) {
    if (source.empty() || candidate.empty() || reference.empty()) {
        throw MetricError(MetricErrorKind::EmptyInput, "sari: source, candidate and reference must be non-empty");
    }
    detail::Vocabulary vocab;
    const auto src_ids = vocab.encode(source);
    const auto cand_ids = vocab.encode(candidate);
    const auto ref_ids = vocab.encode(reference);

    double add_sum = 0.0;
    double keep_sum = 0.0;
    double del_sum = 0.0;
    for (std::size_t n = 1; n <= text::kMaxNgramOrder; ++n) {
        const auto src = detail::unique_grams(src_ids, n);
        const auto cand = detail::unique_grams(cand_ids, n);
        const auto ref = detail::unique_grams(ref_ids, n);

        const auto added = detail::set_minus(cand, src);
        const auto ref_added = detail::set_minus(ref, src);
        const double add_p = ratio(detail::set_and(added, ref).size(), added.size());
        const double add_r = ratio(detail::set_and(ref_added, cand).size(), ref_added.size());
        add_sum += harmonic(add_p, add_r);

        const auto kept_c = detail::set_and(src, cand);
        const auto kept_r = detail::set_and(src, ref);
        const std::size_t kept_both = detail::set_and(kept_c, kept_r).size();
        keep_sum += harmonic(ratio(kept_both, kept_c.size()), ratio(kept_both, kept_r.size()));

        const auto del_c = detail::set_minus(src, cand);
        const auto del_r = detail::set_minus(src, ref);
        del_sum += ratio(detail::set_and(del_c, del_r).size(), del_c.size());
    }
    constexpr double kOrders = text::kMaxNgramOrder;
    SariBreakdown out;
    out.f_add = add_sum / kOrders;
    out.f_keep = keep_sum / kOrders;
    out.p_del = del_sum / kOrders;
    out.sari = 100.0 * (out.f_add + out.f_keep + out.p_del) / 3.0;
    return out;
}

}  // namespace plainlang::metrics
