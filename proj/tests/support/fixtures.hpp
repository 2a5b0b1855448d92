#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fixtures {

inline std::filesystem::path dir() { return PLAINLANG_FIXTURE_DIR; }

inline std::filesystem::path path(const std::string& name) { return dir() / name; }

inline std::filesystem::path prompt_dir() { return dir().parent_path().parent_path() / "prompts" / "v1"; }

inline std::string read(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
