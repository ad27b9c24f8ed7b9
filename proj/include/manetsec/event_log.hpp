#pragma once

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace manetsec {

// Line-oriented run log. One record per line:
//
//   time_us,kind,subject,detail
//
// where time_us is the integer simulation clock in microseconds, kind is a
// short token (emit, send, recv, deliver, drop, buffer, flush, blacklist,
// release, deactivate, verdict), subject is the acting node id, and detail is
// a space-separated key=value list. Field order is fixed, so identical runs
// produce byte-identical logs.
class EventLog {
 public:
  EventLog() { text_.reserve(1 << 20); }

  void append(std::int64_t time_us, std::string_view kind, std::uint32_t subject,
              const char* detail_fmt, ...) {
    char detail[256];
    va_list args;
    va_start(args, detail_fmt);
    std::vsnprintf(detail, sizeof(detail), detail_fmt, args);
    va_end(args);
    char head[64];
    std::snprintf(head, sizeof(head), "%lld,", static_cast<long long>(time_us));
    text_.append(head);
    text_.append(kind);
    std::snprintf(head, sizeof(head), ",%u,", subject);
    text_.append(head);
    text_.append(detail);
    text_.push_back('\n');
    ++lines_;
  }

  const std::string& text() const { return text_; }
  std::size_t line_count() const { return lines_; }

  // FNV-1a over the full text; convenient for replay checks.
  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text_) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  void write_to(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("event log: cannot open " + path);
    out.write(text_.data(), static_cast<std::streamsize>(text_.size()));
    if (!out) throw std::runtime_error("event log: write failed for " + path);
  }

 private:
  std::string text_;
  std::size_t lines_ = 0;
};

}  // namespace manetsec
