#pragma once

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "projreg/error.hpp"

namespace projreg::harness {

inline constexpr int kSchemaVersion = 1;

struct ResultRow {
    std::string experiment_id;
    std::string model;
    std::string kind;
    std::string method;
    std::string swept_variable;
    double swept_value = 0.0;
    std::optional<long long> k;
    long long n = 0;
    long long p = 0;
    std::optional<double> bias_sq, variance, noise, total, mc_stderr;
    int trials = 0;
    int failed_trials = 0;
    std::optional<double> bias_lower, bias_upper, var_lower, var_upper, bound_probability;
    std::optional<double> epsilon, delta, h, mse_clean, mse_poisoned, ratio;

    bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    bool operator==(const ResultTable&) const = default;
};

namespace detail {

inline std::string format_real(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_opt(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

inline double parse_real(std::string_view s, const std::string& col) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) fail(ErrorCode::Validation, "column " + col + ": bad number '" + tmp + "'");
    return v;
}

inline long long parse_int(std::string_view s, const std::string& col) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorCode::Validation, "column " + col + ": bad integer '" + std::string(s) + "'");
    return v;
}

enum class ColType { text, integer, real };

struct Column {
    const char* name;
    ColType type;
    std::function<std::string(const ResultRow&)> get;
    std::function<void(ResultRow&, std::string_view)> set;  // empty string = absent
};

template <typename F>
Column text_col(const char* name, F field) {
    return {name, ColType::text, [field](const ResultRow& r) { return r.*field; },
            [field](ResultRow& r, std::string_view s) { r.*field = std::string(s); }};
}

template <typename F>
Column opt_col(const char* name, F field) {
    return {name, ColType::real, [field](const ResultRow& r) { return format_opt(r.*field); },
            [field, name](ResultRow& r, std::string_view s) {
                if (s.empty())
                    r.*field = std::nullopt;
                else
                    r.*field = parse_real(s, name);
            }};
}

}  // namespace detail

/// Column order of every emitted table. Unused columns stay empty.
inline const std::vector<detail::Column>& columns() {
    using namespace detail;
    static const std::vector<Column> cols = {
        {"schema_version", ColType::integer, [](const ResultRow&) { return std::to_string(kSchemaVersion); },
         [](ResultRow&, std::string_view s) {
             if (parse_int(s, "schema_version") != kSchemaVersion) fail(ErrorCode::Validation, "unsupported schema_version");
         }},
        text_col("experiment_id", &ResultRow::experiment_id),
        text_col("model", &ResultRow::model),
        text_col("kind", &ResultRow::kind),
        text_col("method", &ResultRow::method),
        text_col("swept_variable", &ResultRow::swept_variable),
        {"swept_value", ColType::real, [](const ResultRow& r) { return format_real(r.swept_value); },
         [](ResultRow& r, std::string_view s) { r.swept_value = parse_real(s, "swept_value"); }},
        {"k", ColType::integer, [](const ResultRow& r) { return r.k ? std::to_string(*r.k) : std::string(); },
         [](ResultRow& r, std::string_view s) { r.k = s.empty() ? std::nullopt : std::optional(parse_int(s, "k")); }},
        {"n", ColType::integer, [](const ResultRow& r) { return std::to_string(r.n); },
         [](ResultRow& r, std::string_view s) { r.n = parse_int(s, "n"); }},
        {"p", ColType::integer, [](const ResultRow& r) { return std::to_string(r.p); },
         [](ResultRow& r, std::string_view s) { r.p = parse_int(s, "p"); }},
        opt_col("bias_sq", &ResultRow::bias_sq),
        opt_col("variance", &ResultRow::variance),
        opt_col("noise", &ResultRow::noise),
        opt_col("total", &ResultRow::total),
        opt_col("mc_stderr", &ResultRow::mc_stderr),
        {"trials", ColType::integer, [](const ResultRow& r) { return std::to_string(r.trials); },
         [](ResultRow& r, std::string_view s) { r.trials = static_cast<int>(parse_int(s, "trials")); }},
        {"failed_trials", ColType::integer, [](const ResultRow& r) { return std::to_string(r.failed_trials); },
         [](ResultRow& r, std::string_view s) { r.failed_trials = static_cast<int>(parse_int(s, "failed_trials")); }},
        opt_col("bias_lower", &ResultRow::bias_lower),
        opt_col("bias_upper", &ResultRow::bias_upper),
        opt_col("var_lower", &ResultRow::var_lower),
        opt_col("var_upper", &ResultRow::var_upper),
        opt_col("bound_probability", &ResultRow::bound_probability),
        opt_col("epsilon", &ResultRow::epsilon),
        opt_col("delta", &ResultRow::delta),
        opt_col("h", &ResultRow::h),
        opt_col("mse_clean", &ResultRow::mse_clean),
        opt_col("mse_poisoned", &ResultRow::mse_poisoned),
        opt_col("ratio", &ResultRow::ratio),
    };
    return cols;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const ResultTable& t) {
    const auto& cols = columns();
    for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j].name;
    os << '\n';
    for (const ResultRow& r : t.rows) {
        for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << detail::csv_escape(cols[j].get(r));
        os << '\n';
    }
}

/// One JSON object per line; absent values are null, infinities are the
/// strings "inf" / "-inf".
inline void write_jsonl(std::ostream& os, const ResultTable& t) {
    const auto& cols = columns();
    for (const ResultRow& r : t.rows) {
        os << '{';
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const std::string v = cols[j].get(r);
            os << (j ? "," : "") << nlohmann::json(cols[j].name).dump() << ':';
            if (cols[j].type == detail::ColType::text)
                os << nlohmann::json(v).dump();
            else if (v.empty())
                os << "null";
            else if (v == "inf" || v == "-inf")
                os << '"' << v << '"';
            else
                os << v;
        }
        os << "}\n";
    }
}

inline ResultTable read_csv(std::istream& is) {
    const auto& cols = columns();
    std::string line;
    if (!std::getline(is, line)) fail(ErrorCode::Validation, "empty table");
    const auto header = detail::csv_split(line);
    if (header.size() != cols.size()) fail(ErrorCode::Validation, "header has the wrong number of columns");
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (header[j] != cols[j].name) fail(ErrorCode::Validation, "unexpected column '" + header[j] + "'");
    ResultTable t;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::csv_split(line);
        if (cells.size() != cols.size()) fail(ErrorCode::Validation, "row " + std::to_string(t.rows.size() + 1) + " has the wrong width");
        ResultRow r;
        for (std::size_t j = 0; j < cols.size(); ++j) cols[j].set(r, cells[j]);
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline ResultTable read_jsonl(std::istream& is) {
    const auto& cols = columns();
    ResultTable t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::Validation, std::string("bad JSONL line: ") + e.what());
        }
        ResultRow r;
        for (const auto& c : cols) {
            if (!j.contains(c.name)) fail(ErrorCode::Validation, std::string("missing column ") + c.name);
            const auto& v = j[c.name];
            if (v.is_null())
                c.set(r, "");
            else if (v.is_string())
                c.set(r, v.get<std::string>());
            else
                c.set(r, v.dump());
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

/// Writes to a temporary file and renames, so a re-emit never leaves a
/// half-written table behind.
inline void emit(const ResultTable& t, const std::string& path, bool jsonl) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) fail(ErrorCode::Io, "cannot write " + tmp);
        if (jsonl)
            write_jsonl(os, t);
        else
            write_csv(os, t);
        os.flush();
        if (!os) fail(ErrorCode::Io, "write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::Io, "cannot move " + tmp + " to " + path + ": " + ec.message());
}

inline ResultTable read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    const bool jsonl = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl";
    return jsonl ? read_jsonl(in) : read_csv(in);
}

}  // namespace projreg::harness
