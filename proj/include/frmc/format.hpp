#pragma once

#include <charconv>
#include <locale>
#include <ostream>
#include <string>

namespace frmc {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Imbues the classic locale for the guard's lifetime so integers carry no
/// digit grouping.
class ClassicLocaleGuard {
 public:
  explicit ClassicLocaleGuard(std::ostream& os) : os_(os), saved_(os.imbue(std::locale::classic())) {}
  ~ClassicLocaleGuard() { os_.imbue(saved_); }
  ClassicLocaleGuard(const ClassicLocaleGuard&) = delete;
  ClassicLocaleGuard& operator=(const ClassicLocaleGuard&) = delete;

 private:
  std::ostream& os_;
  std::locale saved_;
};

}  // namespace frmc
