#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "plainlang/core/strings.hpp"
#include "plainlang/eval/evaluation.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::eval {

std::string_view error_label(EvalErrorKind kind) noexcept {
    switch (kind) {
        case EvalErrorKind::Io: return "io";
        case EvalErrorKind::MalformedLine: return "malformed_line";
        case EvalErrorKind::EmptyCorpus: return "empty_corpus";
        case EvalErrorKind::InvalidSample: return "invalid_sample";
        case EvalErrorKind::InvalidOption: return "invalid_option";
        case EvalErrorKind::TooManyFailures: return "too_many_failures";
        case EvalErrorKind::InvalidCache: return "invalid_cache";
    }
    return "unknown";
}

CorpusFile parse_corpus(std::string_view tsv, std::filesystem::path path) {
    const std::string where = path.empty() ? std::string("corpus") : path.string();
    if (!text::is_valid_utf8(tsv)) throw EvalError(EvalErrorKind::Io, where + ": not valid UTF-8");

    CorpusFile out;
    out.path = std::move(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < tsv.size()) {
        const std::size_t nl = tsv.find('\n', pos);
        std::string_view line = tsv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? tsv.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw EvalError(EvalErrorKind::MalformedLine,
                            where + ":" + std::to_string(line_no) + ": expected exactly two tab-separated fields");
        }
        core::CorpusPair pair{std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
        if (core::trim(pair.original).empty() || core::trim(pair.reference).empty()) {
            throw EvalError(EvalErrorKind::MalformedLine, where + ":" + std::to_string(line_no) + ": empty field");
        }
        out.pairs.push_back(std::move(pair));
        out.line_numbers.push_back(line_no);
    }
    return out;
}

CorpusFile load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EvalError(EvalErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw EvalError(EvalErrorKind::Io, "read error on " + path.string());
    return parse_corpus(ss.str(), path);
}

namespace {

// Unbiased draw in [0, bound) from raw engine output.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

std::vector<std::size_t> sample_indices(std::size_t n, std::optional<std::size_t> sample, std::uint64_t seed) {
    if (n == 0) throw EvalError(EvalErrorKind::EmptyCorpus, "corpus has no pairs");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (!sample) return idx;
    if (*sample == 0 || *sample > n) {
        throw EvalError(EvalErrorKind::InvalidSample,
                        "sample size " + std::to_string(*sample) + " outside 1.." + std::to_string(n));
    }
    // Partial Fisher-Yates.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < *sample; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(draw_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(*sample);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace plainlang::eval
