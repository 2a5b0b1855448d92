#include <fstream>
#include <random>

#include "doctest.h"
#include "plainlang/core/strings.hpp"
#include "plainlang/prompting/prompts.hpp"
#include "support/fixtures.hpp"

using namespace plainlang;
using namespace plainlang::prompting;
using core::Audience;

namespace {

PromptErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const PromptError& e) {
        return e.kind();
    }
    FAIL("expected PromptError");
    return PromptErrorKind::TemplateError;
}

const PromptLibrary& lib() {
    static const PromptLibrary l = PromptLibrary::embedded();
    return l;
}

}  // namespace

TEST_CASE("embedded library carries the v1 template set") {
    CHECK(lib().version() == "v1");
    const auto from_dir = PromptLibrary::load(fixtures::prompt_dir());
    CHECK(from_dir.version() == "v1");
    CHECK(from_dir.build_simplify_prompt("abc") == lib().build_simplify_prompt("abc"));
}

TEST_CASE("simplify prompt targets the chosen audience and embeds the source verbatim") {
    const std::string original = fixtures::read("alexnet_abstract_original.txt");
    const auto bundle = lib().build_simplify_prompt(original, Audience::GeneralPublic);
    CHECK(bundle.system_message.find("General Public/Non-Experts") != std::string::npos);
    CHECK(bundle.system_message.find(lib().audience_block(Audience::GeneralPublic)) != std::string::npos);
    CHECK(extract_delimited_source(bundle.user_message) == original);
    CHECK(bundle.temperature == 0.3);
    CHECK(bundle.max_output_tokens == 2 * estimate_tokens(original) + 256);
    // Zero-shot: no worked example is embedded.
    CHECK(bundle.system_message.find("Example") == std::string::npos);
}

TEST_CASE("simplify prompt defaults to the general public") {
    CHECK(lib().build_simplify_prompt("Some text.") ==
          lib().build_simplify_prompt("Some text.", Audience::GeneralPublic));
}

TEST_CASE("each audience yields a distinct audience block") {
    for (Audience a : core::kAllAudiences) {
        for (Audience b : core::kAllAudiences) {
            if (a == b) continue;
            CHECK(lib().audience_block(a) != lib().audience_block(b));
            CHECK(lib().build_simplify_prompt("x", a).system_message !=
                  lib().build_simplify_prompt("x", b).system_message);
        }
    }
}

TEST_CASE("empty texts are rejected") {
    CHECK(kind_of([] { lib().build_simplify_prompt("", Audience::StudentsAcademics); }) == PromptErrorKind::EmptyText);
    CHECK(kind_of([] { lib().build_simplify_prompt(" \n "); }) == PromptErrorKind::EmptyText);
    CHECK(kind_of([] { lib().build_rephrase_prompt("", ComplexityLevel(2)); }) == PromptErrorKind::EmptyText);
    CHECK(kind_of([] { lib().build_synonym_prompt("", "A sentence."); }) == PromptErrorKind::EmptyText);
    CHECK(kind_of([] { lib().build_definition_prompt("", "A sentence."); }) == PromptErrorKind::EmptyText);
    CHECK(kind_of([] { lib().build_synonym_prompt("word", " "); }) == PromptErrorKind::EmptyText);
}

TEST_CASE("rephrase prompt selects the level descriptor") {
    const std::string s = "The network has 60 million parameters.";
    const auto l1 = lib().build_rephrase_prompt(s, ComplexityLevel(1));
    const auto l3 = lib().build_rephrase_prompt(s, ComplexityLevel(3));
    CHECK(l1.system_message.find("Level 1 (simplest)") != std::string::npos);
    CHECK(l1.system_message.find("Level 3") == std::string::npos);
    CHECK(l3.system_message.find("Level 3 (near original)") != std::string::npos);
    CHECK(extract_delimited_source(l1.user_message) == s);
    CHECK(kind_of([] { ComplexityLevel(4); }) == PromptErrorKind::InvalidLevel);
    CHECK(kind_of([] { ComplexityLevel(0); }) == PromptErrorKind::InvalidLevel);
}

TEST_CASE("synonym and definition prompts name the word and its context") {
    const std::string s = "The network has 60 million parameters.";
    const auto syn = lib().build_synonym_prompt("parameters", s);
    CHECK(syn.user_message.find("\"parameters\"") != std::string::npos);
    CHECK(extract_delimited_source(syn.user_message) == s);
    CHECK(syn.system_message.find("JSON array") != std::string::npos);

    const std::string alexnet = "Overfitting in fully-connected layers was reduced with ‘dropout’ regularization.";
    const auto def = lib().build_definition_prompt("dropout", alexnet);
    CHECK(def.user_message.find("\"dropout\"") != std::string::npos);
    CHECK(extract_delimited_source(def.user_message) == alexnet);
    CHECK(def.system_message.find("25") != std::string::npos);
}

TEST_CASE("words must occur in their context sentence") {
    CHECK(kind_of([] { lib().build_synonym_prompt("gpu", "We used CPUs."); }) == PromptErrorKind::WordNotInContext);
    CHECK(kind_of([] { lib().build_definition_prompt("x", "y z"); }) == PromptErrorKind::WordNotInContext);
    CHECK(word_in_context("Parameters", "The network has 60 million parameters."));
    CHECK(word_in_context("GPU-optimized", "we used gpu-optimized convolution"));
    CHECK_FALSE(word_in_context("cat", "concatenate the strings"));
    CHECK(word_in_context("über", "Das ist ÜBER alles."));
}

TEST_CASE("prompt construction is deterministic") {
    for (Audience a : core::kAllAudiences) {
        CHECK(lib().build_simplify_prompt("Same input.", a) == lib().build_simplify_prompt("Same input.", a));
    }
}

TEST_CASE("delimited source survives marker-like content") {
    std::mt19937 rng(17);
    const std::vector<std::string> pieces = {"<<<SOURCE_TEXT>>>", "<<<END_SOURCE_TEXT>>>", "<<<SOURCE_TEXT_1>>>",
                                             "<<<END_SOURCE_TEXT_1>>>", "\n", ">>>", "<<<", "abc", " ", "_2",
                                             "{{text}}", "é"};
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(1, 12);
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        for (int k = len(rng); k > 0; --k) text += pieces[pick(rng)];
        if (core::trim(text).empty()) continue;
        const auto bundle = lib().build_simplify_prompt(text, Audience::JournalistsMedia);
        REQUIRE(extract_delimited_source(bundle.user_message) == text);
    }
    CHECK(extract_delimited_source(delimit_source("")) == "");
    CHECK_FALSE(extract_delimited_source("no markers here").has_value());
}

TEST_CASE("template rendering is single pass and validates placeholders") {
    Template t("Hello {{name}}, {{name}}!");
    CHECK(t.placeholders() == std::set<std::string>{"name"});
    CHECK(t.render({{"name", "{{name}}"}}) == "Hello {{name}}, {{name}}!");
    CHECK(kind_of([&] { t.render({}); }) == PromptErrorKind::TemplateError);
    CHECK(kind_of([] { Template("{{unterminated"); }) == PromptErrorKind::TemplateError);
    CHECK(kind_of([] { Template("{{Bad Name}}"); }) == PromptErrorKind::TemplateError);
}

TEST_CASE("library loading rejects incomplete template sets") {
    std::map<std::string, std::string> files;
    for (const char* name : {"simplify", "rephrase", "synonyms", "definition"}) {
        files[std::string(name) + ".prompt"] = "@@system\nsys {{sentence}}\n@@user\nuser {{word}}\n";
    }
    files["simplify.prompt"] = "@@system\n{{audience_block}}\n@@user\n{{text}}\n";
    files["rephrase.prompt"] = "@@system\n{{level}}\n@@user\n{{sentence}}\n";
    for (Audience a : core::kAllAudiences) files["audiences/" + std::string(core::canonical_label(a)) + ".txt"] = "block " + std::string(core::canonical_label(a));
    for (int l = 1; l <= 3; ++l) files["levels/level_" + std::to_string(l) + ".txt"] = "level";
    CHECK_NOTHROW(PromptLibrary::from_files(files, "test"));

    auto missing = files;
    missing.erase("levels/level_2.txt");
    CHECK(kind_of([&] { PromptLibrary::from_files(missing, "t"); }) == PromptErrorKind::TemplateError);

    auto unknown = files;
    unknown["simplify.prompt"] = "@@system\n{{audience_block}} {{word}}\n@@user\n{{text}}\n";
    CHECK(kind_of([&] { PromptLibrary::from_files(unknown, "t"); }) == PromptErrorKind::TemplateError);

    auto no_text = files;
    no_text["simplify.prompt"] = "@@system\n{{audience_block}}\n@@user\nnothing\n";
    CHECK(kind_of([&] { PromptLibrary::from_files(no_text, "t"); }) == PromptErrorKind::TemplateError);

    auto no_user = files;
    no_user["rephrase.prompt"] = "@@system\n{{level}} {{sentence}}\n";
    CHECK(kind_of([&] { PromptLibrary::from_files(no_user, "t"); }) == PromptErrorKind::TemplateError);

    CHECK(kind_of([] { PromptLibrary::load("/nonexistent/prompts"); }) == PromptErrorKind::TemplateError);
}

TEST_CASE("expert answers are parsed from JSON") {
    CHECK(parse_synonyms(R"(["settings","values"])") == std::vector<std::string>{"settings", "values"});
    CHECK(parse_synonyms("```json\n[\"a\", \" b \", \"A\", \"\"]\n```") == std::vector<std::string>{"a", "b"});
    CHECK(parse_synonyms(R"({"synonyms": ["x"]})") == std::vector<std::string>{"x"});
    CHECK(parse_synonyms(R"(Sure: ["one","two","three","four","five","six"])").size() == 5);
    CHECK(parse_synonyms("[]").empty());
    CHECK(kind_of([] { parse_synonyms("settings, values"); }) == PromptErrorKind::MalformedOutput);
    CHECK(kind_of([] { parse_synonyms("[1, 2]"); }) == PromptErrorKind::MalformedOutput);

    CHECK(parse_definition(R"({"definition": " A way to stop overfitting. "})") == "A way to stop overfitting.");
    CHECK(parse_definition(R"("plain string")") == "plain string");
    CHECK(kind_of([] { parse_definition("A definition without JSON."); }) == PromptErrorKind::MalformedOutput);
    CHECK(kind_of([] { parse_definition(R"({"definition": ""})"); }) == PromptErrorKind::MalformedOutput);

    CHECK(clean_rephrase("  \"Short sentence.\"\n") == "Short sentence.");
    CHECK(clean_rephrase("“Quoted.”") == "Quoted.");
    CHECK(clean_rephrase("Plain.") == "Plain.");
    CHECK(kind_of([] { clean_rephrase(" \"\" "); }) == PromptErrorKind::MalformedOutput);
}
