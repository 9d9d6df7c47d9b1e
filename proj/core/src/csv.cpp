#include "ssnet/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ssnet {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

CsvTable read_csv(std::istream& in, char delimiter) {
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t width = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line, delimiter);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (!parse_double(fields[k], row[k])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty() && table.header.empty()) {
                for (auto f : fields) table.header.emplace_back(f);
                width = fields.size();
                continue;
            }
            throw DataError({DataErrorCode::kNonFinite,
                             fmt::format("line {}: non-numeric field", line_no)});
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw DataError({DataErrorCode::kDimensionMismatch,
                             fmt::format("line {}: expected {} fields, got {}", line_no, width,
                                         row.size())});
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return table;
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in, delimiter);
}

Dataset dataset_from_table(const CsvTable& table, const CsvDatasetOptions& options) {
    const Index width = table.values.cols();
    Index response = -1;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        if (table.header[k] == options.response) response = static_cast<Index>(k);
    }
    if (response < 0) {
        double idx = 0;
        if (parse_double(options.response, idx) && idx >= 0 && idx < double(width) &&
            idx == std::floor(idx)) {
            response = static_cast<Index>(idx);
        }
    }
    if (response < 0) {
        throw std::invalid_argument("response column '" + options.response + "' not found");
    }
    Matrix X(table.values.rows(), width - 1);
    std::vector<std::string> names;
    Index col = 0;
    for (Index j = 0; j < width; ++j) {
        if (j == response) continue;
        X.col(col++) = table.values.col(j);
        if (!table.header.empty()) names.push_back(table.header[static_cast<std::size_t>(j)]);
    }
    Vector y = table.values.col(response);
    return make_dataset(std::move(X), std::move(y), options.family, options.dataset,
                        std::move(names));
}

Dataset read_csv_dataset(const std::string& path, const CsvDatasetOptions& options) {
    return dataset_from_table(read_csv_file(path), options);
}

void write_csv_dataset(std::ostream& out, const Dataset& d, const std::string& response) {
    for (Index j = 0; j < d.p(); ++j) {
        if (!d.names.empty()) {
            out << d.names[static_cast<std::size_t>(j)];
        } else {
            out << 'x' << (j + 1);
        }
        out << ',';
    }
    out << response << '\n';
    for (Index i = 0; i < d.n(); ++i) {
        for (Index j = 0; j < d.p(); ++j) out << fmt::format("{:.17g},", d.X(i, j));
        out << fmt::format("{:.17g}\n", d.y[i]);
    }
}

}  // namespace ssnet
