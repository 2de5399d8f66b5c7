#pragma once

#include "pertproj/core.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pertproj {

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// `key = value` lines; '#' starts a comment. Duplicate keys are rejected.
std::vector<KeyValue> parse_key_values(const std::string& text);

double parse_double(const KeyValue& kv);
std::int64_t parse_int(const KeyValue& kv);
std::uint64_t parse_u64(const KeyValue& kv);
bool parse_bool(const KeyValue& kv);
std::vector<double> parse_double_list(const KeyValue& kv);

std::string trim(const std::string& s);
/// Plain comma split (no quoting), fields trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

[[noreturn]] void fail_at(const KeyValue& kv, const std::string& what);

std::string read_text_file(const std::filesystem::path& path);

/// Shortest text that reads back to the same double (at most 17 significant digits).
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
};

/// Numeric CSV with a header row.
Matrix read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix);

}  // namespace pertproj
