#include "clusterbell/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>
#include <utility>
#include <variant>

#include <json.hpp>

namespace clusterbell::io {

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("to_chars failed");
    std::string out(buf, ptr);
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

std::string format_int(std::int64_t v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("to_chars failed");
    return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) {
        throw std::invalid_argument("table needs at least one column");
    }
}

void Table::add_row(std::vector<Value> row) {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument("row width does not match header");
    }
    rows_.push_back(std::move(row));
}

std::string format_value(const Value& value) {
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
        return format_int(*i);
    }
    if (const auto* d = std::get_if<double>(&value)) {
        return format_double(*d);
    }
    if (const auto* b = std::get_if<bool>(&value)) {
        return *b ? "true" : "false";
    }
    return std::get<std::string>(value);
}

void write_csv(std::ostream& os, const Table& table) {
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        if (i > 0) os << ',';
        os << csv_escape(table.columns()[i]);
    }
    os << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) os << ',';
            os << csv_escape(format_value(row[i]));
        }
        os << '\n';
    }
}

void write_json_lines(std::ostream& os, const Table& table) {
    for (const auto& row : table.rows()) {
        nlohmann::ordered_json record;
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit([&](const auto& v) { record[table.columns()[i]] = v; }, row[i]);
        }
        os << record.dump() << '\n';
    }
}

void write_table(std::ostream& os, const Table& table, OutputFormat format) {
    if (format == OutputFormat::kCsv) {
        write_csv(os, table);
    } else {
        write_json_lines(os, table);
    }
}

void SweepSpec::validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !(start < stop)) {
        throw std::invalid_argument("sweep needs finite start < stop");
    }
    if (points < 2) {
        throw std::invalid_argument("sweep needs at least 2 points");
    }
    if (spacing == Spacing::kLogarithmic && !(start > 0.0)) {
        throw std::invalid_argument("logarithmic sweep needs start > 0");
    }
}

std::vector<double> SweepSpec::values() const {
    validate();
    std::vector<double> out(points);
    const double n = static_cast<double>(points - 1);
    if (spacing == Spacing::kLinear) {
        for (std::size_t i = 0; i < points; ++i) {
            out[i] = start + (stop - start) * static_cast<double>(i) / n;
        }
    } else {
        const double log_start = std::log(start);
        const double log_step = (std::log(stop) - log_start) / n;
        for (std::size_t i = 0; i < points; ++i) {
            out[i] = std::exp(log_start + log_step * static_cast<double>(i));
        }
    }
    out.front() = start;
    out.back() = stop;
    return out;
}

}  // namespace clusterbell::io
