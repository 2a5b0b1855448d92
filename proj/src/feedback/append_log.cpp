#include "append_log.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "plainlang/feedback/store.hpp"

namespace plainlang::feedback::detail {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void storage_failure(const std::string& what, int err) {
    throw FeedbackError(FeedbackErrorKind::StorageFailure, what + ": " + std::strerror(err));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FeedbackError(FeedbackErrorKind::StorageFailure, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void sync_dir(const fs::path& dir) {
    const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dfd < 0) return;
    ::fsync(dfd);
    ::close(dfd);
}

}  // namespace

AppendLog::AppendLog(fs::path dir, std::string stem, std::uint64_t rotate_bytes, bool sync)
    : dir_(std::move(dir)), stem_(std::move(stem)), rotate_bytes_(rotate_bytes), sync_(sync) {}

AppendLog::~AppendLog() { close_fd(); }

fs::path AppendLog::active_path() const { return dir_ / (stem_ + ".jsonl"); }

std::vector<std::pair<unsigned, fs::path>> AppendLog::rotated_segments() const {
    std::vector<std::pair<unsigned, fs::path>> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
        const std::string name = entry.path().filename().string();
        const std::string prefix = stem_ + ".";
        const std::string suffix = ".jsonl";
        if (name.size() <= prefix.size() + suffix.size() || name.compare(0, prefix.size(), prefix) != 0 ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
        if (digits.empty() || digits.size() > 9 ||
            !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            continue;
        }
        out.emplace_back(static_cast<unsigned>(std::stoul(digits)), entry.path());
    }
    if (ec) storage_failure("cannot list " + dir_.string(), ec.value());
    std::sort(out.begin(), out.end());
    return out;
}

void AppendLog::open(const LineHandler& handler, std::vector<std::string>& warnings) {
    close_fd();
    auto feed = [&](const std::string& data, const fs::path& where, bool active) -> std::size_t {
        std::size_t start = 0;
        std::size_t line_no = 0;
        while (start < data.size()) {
            const auto nl = data.find('\n', start);
            ++line_no;
            if (nl == std::string::npos) {
                // Unterminated tail: only a whole record survives.
                const std::string_view tail(data.data() + start, data.size() - start);
                if (handler(tail)) return data.size();
                if (active) {
                    warnings.push_back(where.filename().string() + ": dropped torn final record");
                } else {
                    warnings.push_back(where.filename().string() + ": skipped unreadable line " +
                                       std::to_string(line_no));
                }
                return start;
            }
            const std::string_view line(data.data() + start, nl - start);
            if (!line.empty() && !handler(line)) {
                warnings.push_back(where.filename().string() + ": skipped unreadable line " + std::to_string(line_no));
            }
            start = nl + 1;
        }
        return data.size();
    };

    const auto segments = rotated_segments();
    for (const auto& [n, path] : segments) {
        feed(read_file(path), path, false);
        next_segment_ = std::max(next_segment_, n + 1);
    }

    const fs::path active = active_path();
    std::error_code ec;
    if (fs::exists(active, ec)) {
        const std::string data = read_file(active);
        const std::size_t keep = feed(data, active, true);
        if (keep < data.size()) {
            if (::truncate(active.c_str(), static_cast<off_t>(keep)) != 0) {
                storage_failure("cannot repair " + active.string(), errno);
            }
        }
        open_active();
        if (keep == data.size() && !data.empty() && data.back() != '\n') {
            // Whole record missing only its newline.
            if (::write(fd_, "\n", 1) != 1) storage_failure("cannot repair " + active.string(), errno);
            ++size_;
        }
    } else {
        open_active();
    }
}

void AppendLog::open_active() {
    const fs::path p = active_path();
    fd_ = ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) storage_failure("cannot open " + p.string(), errno);
    struct stat st {};
    if (::fstat(fd_, &st) != 0) storage_failure("cannot stat " + p.string(), errno);
    size_ = static_cast<std::uint64_t>(st.st_size);
    if (sync_) sync_dir(dir_);
}

void AppendLog::rotate() {
    close_fd();
    const fs::path to = dir_ / (stem_ + "." + std::to_string(next_segment_) + ".jsonl");
    std::error_code ec;
    fs::rename(active_path(), to, ec);
    if (ec) storage_failure("cannot rotate " + active_path().string(), ec.value());
    ++next_segment_;
    open_active();
}

void AppendLog::append(std::string_view line) {
    if (fd_ < 0) throw FeedbackError(FeedbackErrorKind::StorageFailure, "log is not open");
    std::string record(line);
    record += '\n';
    if (size_ > 0 && size_ + record.size() > rotate_bytes_) rotate();

    const std::uint64_t before = size_;
    std::size_t written = 0;
    while (written < record.size()) {
        const ssize_t n = ::write(fd_, record.data() + written, record.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            const int err = errno;
            [[maybe_unused]] const int rc = ::ftruncate(fd_, static_cast<off_t>(before));
            storage_failure("cannot append to " + active_path().string(), err);
        }
        written += static_cast<std::size_t>(n);
    }
    if (sync_ && ::fdatasync(fd_) != 0) {
        const int err = errno;
        [[maybe_unused]] const int rc = ::ftruncate(fd_, static_cast<off_t>(before));
        storage_failure("cannot sync " + active_path().string(), err);
    }
    size_ += record.size();
}

void AppendLog::close_fd() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

}  // namespace plainlang::feedback::detail
