// table.hpp - Column table with a provenance header, written as CSV

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qprobe::harness {

inline constexpr const char* kCodeVersion = "0.1.0";

struct Column {
    std::string name;
    std::vector<double> values;
};

class ResultTable {
public:
    // Provenance lines are written first, each prefixed with "# ".
    void add_provenance(std::string line) { provenance_.push_back(std::move(line)); }
    // Throws ParameterError when the length differs from existing columns.
    void add_column(std::string name, std::vector<double> values);

    const std::vector<std::string>& provenance() const noexcept { return provenance_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().values.size(); }
    const Column& column(const std::string& name) const;

    // Comma separated, '.' decimal point, shortest round-trip number format,
    // "inf"/"-inf"/"nan" for non-finite values.
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;

private:
    std::vector<std::string> provenance_;
    std::vector<Column> columns_;
};

// Shortest representation that parses back to the same double.
std::string format_number(double value);

// Reads a file written by ResultTable::write_csv.
ResultTable read_csv(const std::filesystem::path& path);

}  // namespace qprobe::harness
