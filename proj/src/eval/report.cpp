#include <cstdio>

#include "plainlang/core/strings.hpp"
#include "plainlang/eval/evaluation.hpp"

namespace plainlang::eval {

ReportFormat report_format_from_string(std::string_view name) {
    const std::string n = core::ascii_lower(core::trim(name));
    if (n == "tsv") return ReportFormat::Tsv;
    if (n == "markdown" || n == "md") return ReportFormat::Markdown;
    if (n == "json") return ReportFormat::Json;
    throw EvalError(EvalErrorKind::InvalidOption, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string render_report(const std::vector<core::MetricReport>& reports, ReportFormat format) {
    std::string out;
    switch (format) {
        case ReportFormat::Json: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : reports) arr.push_back(r);
            return arr.dump(2) + "\n";
        }
        case ReportFormat::Tsv:
            out = "User Group\tModel\tN\tBLEU\tSARI\tFK Ease\tFK Grade\n";
            for (const auto& r : reports) {
                out += std::string(core::canonical_label(r.audience)) + '\t' + r.model_name + '\t' +
                       std::to_string(r.n_pairs) + '\t' + exact(r.bleu) + '\t' + exact(r.sari) + '\t' +
                       exact(r.fk_ease) + '\t' + exact(r.fk_grade) + '\n';
            }
            return out;
        case ReportFormat::Markdown:
            out = "| User Group | Model | BLEU | SARI | FK Ease | FK Grade |\n"
                  "|---|---|---:|---:|---:|---:|\n";
            for (const auto& r : reports) {
                out += "| " + std::string(core::display_name(r.audience)) + " | " + r.model_name + " | " +
                       fixed(r.bleu, 3) + " | " + fixed(r.sari, 2) + " | " + fixed(r.fk_ease, 2) + " | " +
                       fixed(r.fk_grade, 2) + " |\n";
            }
            return out;
    }
    return out;
}

}  // namespace plainlang::eval
