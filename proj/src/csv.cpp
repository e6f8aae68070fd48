#include "labelsim/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "labelsim/errors.hpp"

namespace labelsim {

namespace {

std::string normalize(std::string_view s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t");
    std::string out(s.substr(b, e - b + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool in_vocabulary(const std::string& value, const std::vector<std::string>& vocab) {
    return std::any_of(vocab.begin(), vocab.end(),
                       [&](const std::string& v) { return normalize(v) == value; });
}

std::optional<double> parse_number(std::string_view s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return std::nullopt;
    auto e = s.find_last_not_of(" \t");
    s = s.substr(b, e - b + 1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

}  // namespace

std::vector<CsvRecord> parse_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // A blank line is not a record.
        if (!(current.fields.size() == 1 && current.fields[0].empty())) records.push_back(std::move(current));
        current = CsvRecord{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) {
                    field.push_back(c);
                } else {
                    in_quotes = true;
                    quote_line = line;
                }
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                ++line;
                end_record();
                break;
            case '\n':
                ++line;
                end_record();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field starting at line " + std::to_string(quote_line));
    if (field_started || !current.fields.empty()) end_record();
    return records;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Dataset load_csv(std::istream& in, const CsvSchema& schema, std::string_view source) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto records = parse_csv(text);
    if (records.empty()) throw DataError(std::string(source) + ": missing header row");

    const auto& header = records.front().fields;
    const std::string label_key = normalize(schema.label_column);
    std::optional<std::size_t> label_col;
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = normalize(header[c]);
        if (name == label_key) {
            if (label_col) throw DataError(std::string(source) + ": label column '" + schema.label_column + "' appears twice");
            label_col = c;
        } else if (!in_vocabulary(name, schema.ignore_columns)) {
            feature_cols.push_back(c);
            feature_names.push_back(header[c]);
        }
    }
    if (!label_col) throw DataError(std::string(source) + ": no label column '" + schema.label_column + "' in header");

    Dataset ds(std::move(feature_names));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw DataError(where(source, rec.line) + ": row " + std::to_string(r) + " has " +
                            std::to_string(rec.fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        Sample s;
        s.id = r - 1;
        const auto label_text = normalize(rec.fields[*label_col]);
        if (in_vocabulary(label_text, schema.benign_values)) {
            s.label = Label::benign;
        } else if (in_vocabulary(label_text, schema.malicious_values)) {
            s.label = Label::malicious;
        } else {
            throw DataError(where(source, rec.line) + ": row " + std::to_string(r) + " has unknown label value '" +
                            rec.fields[*label_col] + "'");
        }
        s.features.reserve(feature_cols.size());
        for (std::size_t c : feature_cols) {
            auto v = parse_number(rec.fields[c]);
            if (!v) {
                throw DataError(where(source, rec.line) + ": row " + std::to_string(r) + ", column '" + header[c] +
                                "': not a finite number: '" + rec.fields[c] + "'");
            }
            s.features.push_back(*v);
        }
        ds.add(std::move(s));
    }
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    return load_csv(in, schema, path.string());
}

void write_csv(const Dataset& ds, std::ostream& out) {
    for (const auto& name : ds.feature_names()) out << csv_escape(name) << ',';
    out << "label\n";
    char buf[64];
    for (const auto& s : ds.samples()) {
        for (double v : s.features) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, ptr - buf);
            out << ',';
        }
        out << index_of(s.label) << '\n';
    }
}

}  // namespace labelsim
