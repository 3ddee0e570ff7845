#pragma once
// Deterministic text serialization: 12 significant digits, '.' decimal
// separator, LF line endings.  Re-emitting parsed output is byte-identical.

#include <cstdint>
#include <string>
#include <vector>

namespace bgg {

std::string format_number(double v);
std::string format_integer(std::int64_t v);

class CsvWriter {
  public:
    explicit CsvWriter(std::string header);
    void row(const std::vector<std::string>& cells);
    const std::string& text() const { return text_; }
    void write_file(const std::string& path) const;

  private:
    std::string text_;
    std::size_t columns_ = 0;
};

void write_text_file(const std::string& path, const std::string& text);

}  // namespace bgg
