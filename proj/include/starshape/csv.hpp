#pragma once

// CSV ingestion for scenario tables. Accepted shape: one or two columns,
// "value" or "value,weight", with an optional literal header row. Weights
// are positive and are normalized to probabilities on conversion; a
// single-column table gets uniform weights.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scenario.hpp"

namespace starshape {

/// Parse failure with 1-based line and column (byte offset) of the offence.
class CsvError : public std::runtime_error {
   public:
    CsvError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("csv: line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

   private:
    std::size_t line_;
    std::size_t column_;
};

struct InputTable {
    std::vector<double> values;
    std::vector<double> weights;  // empty when the table had no weight column
    bool has_weights = false;
};

namespace detail {

inline std::string_view trim_ws(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline double parse_csv_number(std::string_view field, std::size_t line, std::size_t column) {
    const std::string_view trimmed = trim_ws(field);
    if (trimmed.empty()) throw CsvError(line, column, "empty field");
    double out = 0.0;
    const auto [ptr, ec] =
        std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), out);
    if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size())
        throw CsvError(line, column, "expected a number, got '" + std::string(trimmed) + "'");
    if (!std::isfinite(out)) throw CsvError(line, column, "value must be finite");
    return out;
}

}  // namespace detail

/// Parses CSV text into an input table. Blank lines are skipped; the first
/// non-blank row may be the header "value" or "value,weight". Every data
/// row must have the same column count (1 or 2) and weights must be
/// strictly positive.
inline InputTable parse_csv_text(const std::string& text) {
    InputTable table;
    int columns = 0;  // 0 until fixed by the first data row
    bool saw_row = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (detail::trim_ws(line).empty()) continue;

        const std::size_t comma = line.find(',');
        const std::string_view first =
            comma == std::string_view::npos ? line : line.substr(0, comma);
        std::string_view second =
            comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
        if (second.find(',') != std::string_view::npos)
            throw CsvError(line_no, comma + 2 + second.find(','), "too many columns");

        if (!saw_row && detail::trim_ws(first) == "value") {
            const std::string_view tail = detail::trim_ws(second);
            if (comma != std::string_view::npos && tail != "weight")
                throw CsvError(line_no, comma + 2, "header must be 'value' or 'value,weight'");
            continue;  // header row carries no data
        }

        const int row_columns = comma == std::string_view::npos ? 1 : 2;
        if (columns == 0)
            columns = row_columns;
        else if (row_columns != columns)
            throw CsvError(line_no, 1,
                           row_columns > columns ? "unexpected weight column" : "missing weight");
        saw_row = true;

        table.values.push_back(detail::parse_csv_number(first, line_no, 1));
        if (columns == 2) {
            const double w = detail::parse_csv_number(second, line_no, comma + 2);
            if (w <= 0.0) throw CsvError(line_no, comma + 2, "weight must be positive");
            table.weights.push_back(w);
        }
    }
    if (!saw_row) throw CsvError(line_no, 1, "no data rows");
    table.has_weights = columns == 2;
    return table;
}

/// Converts a parsed table to a random variable, normalizing weights to
/// probabilities (uniform when the table had none).
inline RandomVariable to_random_variable(const InputTable& table) {
    const std::size_t n = table.values.size();
    if (!table.has_weights)
        return RandomVariable(ScenarioSpace::uniform(n), table.values);
    double total = 0.0;
    for (double w : table.weights) total += w;
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = table.weights[i] / total;
    return RandomVariable(ScenarioSpace(std::move(probs)), table.values);
}

}  // namespace starshape
