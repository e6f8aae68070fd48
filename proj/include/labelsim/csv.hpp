#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "labelsim/dataset.hpp"

namespace labelsim {

/// Describes how a tabular file maps onto a Dataset: which column holds the
/// label, which cell values mean benign / malicious, and which columns to
/// drop (row ids and the like). Every other column is a numeric feature.
struct CsvSchema {
    std::string label_column = "label";
    std::vector<std::string> benign_values{"0", "benign"};
    std::vector<std::string> malicious_values{"1", "phishing"};
    std::vector<std::string> ignore_columns;
};

/// One parsed RFC-4180 record and the 1-based line it started on.
struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks. Throws DataError on an unterminated quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

/// Ids are assigned in file order starting at 0. Errors name the offending
/// row (and column, for non-numeric features).
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset load_csv(std::istream& in, const CsvSchema& schema = {}, std::string_view source = "<stream>");

/// Writes a dataset using `label` as the label column and 0/1 labels.
void write_csv(const Dataset& ds, std::ostream& out);

}  // namespace labelsim
