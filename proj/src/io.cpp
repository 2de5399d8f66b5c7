#include "pertproj/io.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

namespace pertproj {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void fail_at(const KeyValue& kv, const std::string& what) {
    throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + ": " + what);
}

std::vector<KeyValue> parse_key_values(const std::string& text) {
    std::vector<KeyValue> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        }
        KeyValue kv{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
        if (kv.key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
        if (kv.value.empty()) fail_at(kv, "empty value");
        if (!seen.insert(kv.key).second) fail_at(kv, "duplicate key");
        out.push_back(std::move(kv));
    }
    return out;
}

double parse_double(const KeyValue& kv) {
    double v = 0.0;
    const char* b = kv.value.data();
    const char* e = b + kv.value.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail_at(kv, "not a number: '" + kv.value + "'");
    return v;
}

std::int64_t parse_int(const KeyValue& kv) {
    std::int64_t v = 0;
    const char* b = kv.value.data();
    const char* e = b + kv.value.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail_at(kv, "not an integer: '" + kv.value + "'");
    return v;
}

std::uint64_t parse_u64(const KeyValue& kv) {
    std::uint64_t v = 0;
    const char* b = kv.value.data();
    const char* e = b + kv.value.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) fail_at(kv, "not an unsigned integer: '" + kv.value + "'");
    return v;
}

bool parse_bool(const KeyValue& kv) {
    if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
    if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
    fail_at(kv, "not a boolean: '" + kv.value + "'");
}

std::vector<double> parse_double_list(const KeyValue& kv) {
    std::vector<double> out;
    std::istringstream in(kv.value);
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(parse_double(KeyValue{kv.key, trim(item), kv.line}));
    }
    if (out.empty()) fail_at(kv, "empty list");
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

Matrix read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
    if (header) {
        header->clear();
        std::istringstream hs(line);
        std::string f;
        while (std::getline(hs, f, ',')) header->push_back(trim(f));
    }
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> r;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) {
            r.push_back(parse_double(KeyValue{path.filename().string(), trim(f), lineno}));
        }
        if (!rows.empty() && r.size() != rows.front().size()) {
            throw ConfigError(path.string() + ": line " + std::to_string(lineno) + ": ragged row");
        }
        rows.push_back(std::move(r));
    }
    const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix) {
    std::vector<std::string> header;
    for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back(prefix + std::to_string(j));
    CsvWriter w(path, header);
    std::vector<std::string> fields(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) fields[j] = format_double(m(i, j));
        w.row(fields);
    }
}

}  // namespace pertproj
