#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

// Structured record output: CSV (RFC-4180-style quoting, '.' decimal
// separator, header row) and JSON lines. Numbers are formatted with
// std::to_chars shortest round-trip form, so identical values always
// produce identical bytes.

namespace clusterbell::io {

using Value = std::variant<std::int64_t, double, std::string, bool>;

/// Fixed-column table; every row must match the header width.
class Table {
  public:
    explicit Table(std::vector<std::string> columns);

    /// Throws std::invalid_argument on width mismatch.
    void add_row(std::vector<Value> row);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Value>>& rows() const { return rows_; }

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Value>> rows_;
};

enum class OutputFormat { kCsv, kJsonLines };

/// Shortest round-trip text for a value. Doubles always carry a '.' or an
/// exponent so they never collapse into integer syntax; non-finite doubles
/// become "inf" / "-inf" / "nan".
std::string format_value(const Value& value);

/// Header row plus one line per record. Fields containing a comma, quote,
/// CR or LF are double-quoted with internal quotes doubled.
void write_csv(std::ostream& os, const Table& table);

/// One JSON object per line, keys in column order. Non-finite doubles are
/// emitted as null (JSON has no literal for them).
void write_json_lines(std::ostream& os, const Table& table);

void write_table(std::ostream& os, const Table& table, OutputFormat format);

enum class Spacing { kLinear, kLogarithmic };

/// A one-dimensional parameter sweep.
struct SweepSpec {
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;
    Spacing spacing = Spacing::kLinear;

    /// Throws std::invalid_argument unless start < stop, points >= 2, and
    /// (for logarithmic spacing) start > 0.
    void validate() const;

    /// The sweep grid, endpoints included.
    std::vector<double> values() const;
};

}  // namespace clusterbell::io
