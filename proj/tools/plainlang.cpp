// plainlang: evaluate | serve | extract

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "plainlang/core/strings.hpp"
#include "plainlang/eval/evaluation.hpp"
#include "plainlang/feedback/store.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/service/http_server.hpp"

using namespace plainlang;

namespace {

struct EvaluateArgs {
    std::string corpus;
    std::string audiences = "all";
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
    std::string mock;
    std::string transcript;
    std::string outputs;
    std::string report = "markdown";
    std::string out;
    bool rescore = false;
    std::string model_label;
    bool corpus_bleu = false;
};

std::vector<core::Audience> parse_audiences(const std::string& list) {
    if (core::ascii_lower(core::trim(list)) == "all") return {core::kAllAudiences.begin(), core::kAllAudiences.end()};
    std::vector<core::Audience> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        if (core::trim(item).empty()) continue;
        const auto a = core::audience_from_label(item);
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + path);
}

int run_evaluate(const EvaluateArgs& args) {
    const auto corpus = eval::load_corpus(args.corpus);
    eval::EvalOptions opts;
    opts.audiences = parse_audiences(args.audiences);
    opts.sample = args.sample;
    opts.seed = args.seed;
    opts.cache_only = args.rescore;
    if (!args.model_label.empty()) opts.model_label = args.model_label;
    const auto format = eval::report_format_from_string(args.report);

    std::unique_ptr<llm::Gateway> gateway;
    if (!args.mock.empty()) {
        const auto mode = llm::mock_mode_from_string(args.mock);
        std::shared_ptr<llm::Transcript> transcript;
        if (!args.transcript.empty()) transcript = llm::Transcript::load(args.transcript);
        if (mode == llm::MockMode::Scripted && !transcript) {
            throw std::runtime_error("--mock scripted needs --transcript");
        }
        gateway = std::make_unique<llm::Gateway>(std::make_unique<llm::MockBackend>(mode, std::move(transcript)),
                                                 core::ModelConfig{});
    } else if (!args.rescore) {
        gateway = llm::Gateway::from_env();
    }
    if (args.rescore && !opts.model_label && gateway) {
        // Same label the original run would have used.
        const std::string backend = gateway->backend_name();
        opts.model_label = backend.rfind("mock:", 0) == 0 ? backend : gateway->model().model_name;
    }
    if (args.rescore && !opts.model_label) {
        opts.model_label = core::ModelConfig::from_env().model_name;
    }

    eval::OutputCache cache = args.outputs.empty() ? eval::OutputCache() : eval::OutputCache(args.outputs);
    const auto result = eval::run_evaluation(corpus, args.rescore ? nullptr : gateway.get(), cache, opts);

    write_output(args.out, eval::render_report(result.reports, format));
    for (const auto& f : result.failures) {
        std::fprintf(stderr, "failed: %s line %zu: %s\n", std::string(core::canonical_label(f.audience)).c_str(),
                     corpus.line_numbers[f.index], f.reason.c_str());
    }
    if (args.corpus_bleu) {
        for (std::size_t i = 0; i < result.reports.size(); ++i) {
            std::fprintf(stderr, "corpus BLEU %s: %.4f\n",
                         std::string(core::canonical_label(result.reports[i].audience)).c_str(), result.corpus_bleu[i]);
        }
    }
    std::fprintf(stderr, "%zu pairs x %zu audiences, %zu model calls, %zu cached\n", result.sample.size(),
                 opts.audiences.size(), result.model_calls, result.cache_hits);
    return 0;
}

int run_serve(std::optional<int> port, const std::string& host) {
    auto config = service::ServiceConfig::from_env();
    if (port) config.port = *port;
    if (!host.empty()) config.host = host;

    std::shared_ptr<llm::Gateway> gateway = llm::Gateway::from_env();
    auto store = std::make_shared<feedback::FeedbackStore>(feedback::FeedbackStore::dir_from_env());
    for (const auto& w : store->load_warnings()) std::fprintf(stderr, "feedback log: %s\n", w.c_str());

    auto svc = std::make_shared<service::Service>(config, gateway, store);
    service::HttpServer server(svc);
    const int bound = server.bind();
    std::fprintf(stderr, "listening on %s:%d (backend %s, model %s)\n", config.host.c_str(), bound,
                 gateway->backend_name().c_str(), gateway->model().model_name.c_str());
    server.listen();
    return 0;
}

int run_extract(const std::string& path, bool as_json, std::size_t max_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto doc = ingest::extract_text(ss.str(), std::filesystem::path(path).filename().string(), max_bytes);
    if (as_json) {
        nlohmann::json j = {{"text", doc.text},
                            {"format", ingest::to_string(doc.format)},
                            {"page_or_paragraph_count", doc.page_or_paragraph_count},
                            {"warnings", doc.warnings}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << doc.text << "\n";
        for (const auto& w : doc.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audience-aware text simplification: evaluation harness, HTTP service and document extraction"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Simplify and score a TSV corpus of (original, reference) pairs");
    evaluate->add_option("--corpus", ev.corpus, "TSV file: original<TAB>reference per line")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--audience", ev.audiences, "Comma-separated audience labels, or 'all'")
        ->capture_default_str();
    evaluate->add_option("--sample", ev.sample, "Evaluate a seeded random sample of N pairs");
    evaluate->add_option("--seed", ev.seed, "Sampling seed")->capture_default_str();
    evaluate->add_option("--mock", ev.mock, "Offline backend instead of the API")
        ->check(CLI::IsMember({"echo_source", "title_case", "scripted"}));
    evaluate->add_option("--transcript", ev.transcript, "Scripted mock transcript (JSONL)");
    evaluate->add_option("--outputs", ev.outputs, "Sidecar JSONL cache of raw model outputs");
    evaluate->add_option("--report", ev.report, "Report format")
        ->check(CLI::IsMember({"tsv", "markdown", "md", "json"}))
        ->capture_default_str();
    evaluate->add_option("--out", ev.out, "Write the report here instead of stdout");
    evaluate->add_flag("--rescore", ev.rescore, "Score only the outputs already in --outputs; no model calls");
    evaluate->add_option("--model-label", ev.model_label, "Model column and cache key (default: the model name)");
    evaluate->add_flag("--corpus-bleu", ev.corpus_bleu, "Also print corpus-level BLEU per audience");

    std::optional<int> port;
    std::string host;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API (configured from the environment)");
    serve->add_option("--port", port, "Overrides PORT")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Overrides BIND_HOST");

    std::string file;
    bool as_json = false;
    std::size_t max_bytes = ingest::kDefaultMaxUploadBytes;
    auto* extract = app.add_subcommand("extract", "Print the text of a .txt, .docx or .pdf file");
    extract->add_option("file", file, "Input document")->required()->check(CLI::ExistingFile);
    extract->add_flag("--json", as_json, "Print text, format, count and warnings as JSON");
    extract->add_option("--max-bytes", max_bytes, "Size limit")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evaluate) {
            if (ev.rescore && ev.outputs.empty()) throw std::runtime_error("--rescore needs --outputs");
            return run_evaluate(ev);
        }
        if (*serve) return run_serve(port, host);
        if (*extract) return run_extract(file, as_json, max_bytes);
    } catch (const eval::EvalError& e) {
        std::fprintf(stderr, "error (%s): %s\n", std::string(eval::error_label(e.kind())).c_str(), e.what());
    } catch (const ingest::IngestError& e) {
        std::fprintf(stderr, "error (%s): %s\n", std::string(ingest::error_label(e.kind())).c_str(), e.what());
    } catch (const llm::LlmError& e) {
        std::fprintf(stderr, "error (%s): %s\n", std::string(llm::error_label(e.kind())).c_str(), e.what());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return 1;
}
