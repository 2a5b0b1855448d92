#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plainlang/core/error.hpp"
#include "plainlang/core/types.hpp"
#include "plainlang/llm/gateway.hpp"
#include "plainlang/prompting/prompts.hpp"

namespace plainlang::eval {

enum class EvalErrorKind { Io, MalformedLine, EmptyCorpus, InvalidSample, InvalidOption, TooManyFailures, InvalidCache };
using EvalError = CodedError<EvalErrorKind>;

std::string_view error_label(EvalErrorKind kind) noexcept;

/// Pairs parsed from a TSV file: `original TAB reference`, one per line.
struct CorpusFile {
    std::filesystem::path path;
    std::vector<core::CorpusPair> pairs;
    /// 1-based source line of each pair.
    std::vector<std::size_t> line_numbers;
};

/// Blank lines are skipped; a trailing CR is dropped. Throws
/// EvalError{MalformedLine} naming the line for anything but two non-empty
/// fields, and EvalError{Io} when the file cannot be read.
CorpusFile load_corpus(const std::filesystem::path& path);
CorpusFile parse_corpus(std::string_view tsv, std::filesystem::path path = {});

/// Indices of `sample` pairs out of `n`, ascending. Uses a seeded
/// mt19937_64 with rejection sampling so the choice is the same on every
/// platform. No sample means all of them. Throws EvalError{InvalidSample}.
std::vector<std::size_t> sample_indices(std::size_t n, std::optional<std::size_t> sample, std::uint64_t seed);

/// Raw model outputs keyed by (audience, model, original), stored as JSONL so
/// scoring can be repeated without model calls.
class OutputCache {
public:
    OutputCache() = default;
    /// Loads an existing file (missing is fine) and appends new entries to it.
    /// Throws EvalError{InvalidCache} on malformed lines, {Io} on read errors.
    explicit OutputCache(std::filesystem::path path);

    std::optional<std::string> find(core::Audience audience, std::string_view model, std::string_view original) const;
    /// Throws EvalError{Io} when the sidecar cannot be written.
    void put(core::Audience audience, std::string_view model, std::string_view original, std::string output);
    std::size_t size() const;

private:
    std::optional<std::filesystem::path> path_;
    std::map<std::string, std::string> entries_;
    mutable std::mutex mutex_;

    static std::string key(core::Audience audience, std::string_view model, std::string_view original);
};

struct EvalOptions {
    std::vector<core::Audience> audiences{core::kAllAudiences.begin(), core::kAllAudiences.end()};
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
    /// Model column of the reports and part of the cache key; defaults to the
    /// gateway's model name.
    std::optional<std::string> model_label;
    /// Score only what the cache holds; misses count as failed pairs.
    bool cache_only = false;
    /// Share of pairs per audience allowed to fail before the run aborts.
    double max_failure_rate = 0.02;
};

struct PairFailure {
    core::Audience audience = core::kDefaultAudience;
    /// Index into the corpus.
    std::size_t index = 0;
    std::string reason;
};

struct EvalResult {
    std::vector<core::MetricReport> reports;
    /// Corpus-level BLEU per report, over the pairs that were scored.
    std::vector<double> corpus_bleu;
    std::vector<std::size_t> sample;
    std::vector<PairFailure> failures;
    std::size_t model_calls = 0;
    std::size_t cache_hits = 0;
};

/// Simplifies every sampled original for each audience and scores it against
/// its reference. Pairs run in parallel up to the gateway's in-flight cap.
/// Failed pairs are left out of the means as long as they stay within
/// `max_failure_rate`; beyond that EvalError{TooManyFailures}.
/// `gateway` may be null when `cache_only` is set.
EvalResult run_evaluation(const CorpusFile& corpus, llm::Gateway* gateway, OutputCache& cache,
                          const EvalOptions& options,
                          const prompting::PromptLibrary& prompts = prompting::PromptLibrary::embedded());

enum class ReportFormat { Tsv, Markdown, Json };

/// "tsv", "markdown" (or "md"), "json". Throws EvalError{InvalidOption}.
ReportFormat report_format_from_string(std::string_view name);

/// Markdown uses the display names and rounds (BLEU 3 places, the rest 2);
/// TSV keeps canonical labels and round-trip precision; JSON is an array of
/// MetricReport objects.
std::string render_report(const std::vector<core::MetricReport>& reports, ReportFormat format);

}  // namespace plainlang::eval
