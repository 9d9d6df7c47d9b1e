#pragma once

#include "ssnet/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ssnet {

// Numeric table read from delimited text. A header is detected when the
// first record contains a field that does not parse as a number.
struct CsvTable {
    std::vector<std::string> header;  // empty when the file has none
    Matrix values;
};

CsvTable read_csv(std::istream& in, char delimiter = ',');
CsvTable read_csv_file(const std::string& path, char delimiter = ',');

struct CsvDatasetOptions {
    // Column name, or 0-based column number when the file has no header
    // (a number is also accepted with a header).
    std::string response;
    Family family = Family::kQuadratic;
    DatasetOptions dataset;
};

// Response column is pulled out, remaining columns become predictors.
Dataset dataset_from_table(const CsvTable& table, const CsvDatasetOptions& options);
Dataset read_csv_dataset(const std::string& path, const CsvDatasetOptions& options);

// Writes X and y as a CSV with header x1..xp,y (or the dataset names).
void write_csv_dataset(std::ostream& out, const Dataset& d, const std::string& response = "y");

}  // namespace ssnet
