#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "plainlang/core/strings.hpp"
#include "plainlang/eval/evaluation.hpp"
#include "plainlang/metrics/metrics.hpp"

namespace plainlang::eval {

OutputCache::OutputCache(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::exists(*path_, ec)) return;
    std::ifstream in(*path_, std::ios::binary);
    if (!in) throw EvalError(EvalErrorKind::Io, "cannot read " + path_->string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (core::trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const auto audience = core::audience_from_label(j.at("audience").get<std::string>());
            entries_[key(audience, j.at("model").get<std::string>(), j.at("original").get<std::string>())] =
                j.at("output").get<std::string>();
        } catch (const std::exception& e) {
            throw EvalError(EvalErrorKind::InvalidCache,
                            path_->string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::string OutputCache::key(core::Audience audience, std::string_view model, std::string_view original) {
    std::string k(core::canonical_label(audience));
    k += '\x1f';
    k += model;
    k += '\x1f';
    k += original;
    return k;
}

std::optional<std::string> OutputCache::find(core::Audience audience, std::string_view model,
                                             std::string_view original) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key(audience, model, original));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void OutputCache::put(core::Audience audience, std::string_view model, std::string_view original,
                      std::string output) {
    std::lock_guard lock(mutex_);
    if (path_) {
        const nlohmann::json line = {{"audience", core::canonical_label(audience)},
                                     {"model", model},
                                     {"original", original},
                                     {"output", output}};
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        out << line.dump() << '\n';
        out.flush();
        if (!out) throw EvalError(EvalErrorKind::Io, "cannot write " + path_->string());
    }
    entries_[key(audience, model, original)] = std::move(output);
}

std::size_t OutputCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

namespace {

std::string describe(const std::exception& e) {
    if (const auto* l = dynamic_cast<const llm::LlmError*>(&e)) {
        return std::string(llm::error_label(l->kind())) + ": " + l->what();
    }
    return e.what();
}

struct Slot {
    std::optional<std::string> output;
    std::string error;
};

}  // namespace

EvalResult run_evaluation(const CorpusFile& corpus, llm::Gateway* gateway, OutputCache& cache,
                          const EvalOptions& options, const prompting::PromptLibrary& prompts) {
    if (corpus.pairs.empty()) throw EvalError(EvalErrorKind::EmptyCorpus, "corpus has no pairs");
    if (options.audiences.empty()) throw EvalError(EvalErrorKind::InvalidOption, "no audiences selected");
    if (!gateway && !options.cache_only) {
        throw EvalError(EvalErrorKind::InvalidOption, "a gateway is required unless scoring from the cache");
    }

    EvalResult result;
    result.sample = sample_indices(corpus.pairs.size(), options.sample, options.seed);

    std::string model_label;
    if (options.model_label) {
        model_label = *options.model_label;
    } else if (gateway) {
        const std::string backend = gateway->backend_name();
        model_label = backend.rfind("mock:", 0) == 0 ? backend : gateway->model().model_name;
    } else {
        throw EvalError(EvalErrorKind::InvalidOption, "cache-only scoring needs a model label");
    }

    const std::size_t per_audience = result.sample.size();
    const std::size_t total = per_audience * options.audiences.size();
    std::vector<Slot> slots(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> calls{0};
    std::atomic<std::size_t> hits{0};

    auto work = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const auto audience = options.audiences[k / per_audience];
            const auto& pair = corpus.pairs[result.sample[k % per_audience]];
            Slot& slot = slots[k];
            try {
                if (auto cached = cache.find(audience, model_label, pair.original)) {
                    ++hits;
                    slot.output = std::move(cached);
                    continue;
                }
                if (options.cache_only) {
                    slot.error = "no cached output";
                    continue;
                }
                const auto bundle = prompts.build_simplify_prompt(pair.original, audience);
                ++calls;
                std::string text(core::trim(gateway->complete(bundle).text));
                cache.put(audience, model_label, pair.original, text);
                slot.output = std::move(text);
            } catch (const std::exception& e) {
                slot.error = describe(e);
            }
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(total, gateway ? static_cast<std::size_t>(std::max(1, gateway->max_in_flight())) : 1);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    result.model_calls = calls;
    result.cache_hits = hits;

    for (std::size_t a = 0; a < options.audiences.size(); ++a) {
        const auto audience = options.audiences[a];
        std::vector<metrics::PairScores> scores;
        std::vector<text::TokenSequence> candidates;
        std::vector<text::TokenSequence> references;
        std::size_t failed = 0;
        for (std::size_t i = 0; i < per_audience; ++i) {
            const std::size_t index = result.sample[i];
            Slot& slot = slots[a * per_audience + i];
            if (slot.output) {
                try {
                    scores.push_back(metrics::score_pair(corpus.pairs[index], *slot.output));
                    candidates.push_back(text::tokenize(*slot.output));
                    references.push_back(text::tokenize(corpus.pairs[index].reference));
                    continue;
                } catch (const std::exception& e) {
                    slot.error = std::string("scoring: ") + e.what();
                }
            }
            ++failed;
            result.failures.push_back({audience, index, slot.error});
        }
        const double allowed = std::floor(options.max_failure_rate * static_cast<double>(per_audience) + 1e-9);
        if (static_cast<double>(failed) > allowed || scores.empty()) {
            throw EvalError(EvalErrorKind::TooManyFailures,
                            std::to_string(failed) + " of " + std::to_string(per_audience) + " pairs failed for " +
                                std::string(core::canonical_label(audience)) + " (first: " +
                                result.failures[result.failures.size() - failed].reason + ")");
        }
        result.reports.push_back(metrics::aggregate(scores, audience, model_label));
        result.corpus_bleu.push_back(metrics::corpus_bleu(candidates, references));
    }
    return result;
}

}  // namespace plainlang::eval
