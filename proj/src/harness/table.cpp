#include "qprobe/harness/table.hpp"

#include "qprobe/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qprobe::harness {

void ResultTable::add_column(std::string name, std::vector<double> values) {
    if (!columns_.empty() && values.size() != rows())
        throw ParameterError("column '" + name + "' length differs from the table");
    columns_.push_back({std::move(name), std::move(values)});
}

const Column& ResultTable::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw ParameterError("no column named '" + name + "'");
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string ResultTable::to_csv() const {
    std::ostringstream os;
    for (const auto& line : provenance_) os << "# " << line << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c].name;
    os << '\n';
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << format_number(columns_[c].values[i]);
        os << '\n';
    }
    return os.str();
}

void ResultTable::write_csv(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_csv();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

double parse_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParameterError("bad CSV number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

ResultTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    ResultTable table;
    std::string line;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            table.add_provenance(line.substr(2));
            continue;
        }
        if (names.empty()) {
            names = split(line);
            cols.resize(names.size());
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != names.size()) throw ParameterError("ragged CSV row in " + path.string());
        for (std::size_t c = 0; c < cells.size(); ++c) cols[c].push_back(parse_number(cells[c]));
    }
    for (std::size_t c = 0; c < names.size(); ++c) table.add_column(names[c], std::move(cols[c]));
    return table;
}

}  // namespace qprobe::harness
