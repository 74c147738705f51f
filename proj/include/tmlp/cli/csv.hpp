#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tmlp::cli {

/// Shortest round-trip-safe text for a double (%.17g); "nan"/"inf" spelled out.
std::string format_number(double value);
std::string format_number(long double value);

/// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are quoted and
/// embedded quotes doubled.
std::string quote_field(const std::string& field);

/// Rows are kept in insertion order; commands append them in primary-key order.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    /// Throws std::invalid_argument when the row width differs from the header.
    void add_row(std::vector<std::string> row);
    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    /// Lines end with CRLF as in RFC 4180.
    void write(std::ostream& out) const;
    /// Writes to `path`, or to stdout when `path` is empty. Throws std::runtime_error on I/O failure.
    void write_file(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Splits one RFC-4180 document into records (used by tests and tooling).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace tmlp::cli
