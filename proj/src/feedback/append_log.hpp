#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace plainlang::feedback::detail {

/// One JSON-lines log: `<stem>.jsonl` plus rotated `<stem>.<n>.jsonl`
/// segments. Not thread-safe; the store serializes writers.
class AppendLog {
public:
    /// Returns false when the line is not a valid record.
    using LineHandler = std::function<bool(std::string_view line)>;

    AppendLog(std::filesystem::path dir, std::string stem, std::uint64_t rotate_bytes, bool sync);
    ~AppendLog();

    AppendLog(const AppendLog&) = delete;
    AppendLog& operator=(const AppendLog&) = delete;

    /// Feeds every line of every segment, oldest first, then opens the active
    /// segment for appending. A torn last line of the active segment is cut
    /// off (or completed with a newline when it is a whole record).
    void open(const LineHandler& handler, std::vector<std::string>& warnings);

    /// Writes `line` + "\n" with one write and syncs. On failure the segment
    /// is truncated back and FeedbackError{StorageFailure} is thrown.
    void append(std::string_view line);

    std::filesystem::path active_path() const;
    std::uint64_t active_size() const noexcept { return size_; }

private:
    std::filesystem::path dir_;
    std::string stem_;
    std::uint64_t rotate_bytes_;
    bool sync_;
    int fd_ = -1;
    std::uint64_t size_ = 0;
    unsigned next_segment_ = 1;

    std::vector<std::pair<unsigned, std::filesystem::path>> rotated_segments() const;
    void open_active();
    void rotate();
    void close_fd() noexcept;
};

}  // namespace plainlang::feedback::detail
