#include "soda/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace soda {

int CsvTable::find_column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_double(const std::string& field, double* out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, *out);
    return ec == std::errc() && ptr == end && begin != end;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        auto fields = split_fields(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw BadInput(path + ": row " + std::to_string(table.rows.size() + 2) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw BadInput(path + ": missing header row");
    return table;
}

Dataset dataset_from_csv(const CsvTable& table, const std::string& response, bool categorical) {
    const int rcol = table.find_column(response);
    if (rcol < 0) throw BadInput("response column '" + response + "' not found");
    const int p = static_cast<int>(table.header.size()) - 1;
    const int n = static_cast<int>(table.rows.size());
    if (p < 1) throw BadInput("no predictor columns besides the response");
    if (n < 1) throw BadInput("no data rows");

    std::vector<std::string> names;
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c)
        if (c != rcol) names.push_back(table.header[static_cast<size_t>(c)]);

    Matrix x(n, p);
    for (int i = 0; i < n; ++i) {
        int out_c = 0;
        for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
            if (c == rcol) continue;
            double v;
            if (!parse_double(table.rows[static_cast<size_t>(i)][static_cast<size_t>(c)], &v))
                throw DataError("row " + std::to_string(i + 2) + ", column '" +
                                table.header[static_cast<size_t>(c)] + "': not a number");
            x(i, out_c++) = v;
        }
    }

    if (!categorical) {
        Vector y(n);
        for (int i = 0; i < n; ++i) {
            double v;
            if (!parse_double(table.rows[static_cast<size_t>(i)][static_cast<size_t>(rcol)], &v))
                throw DataError("row " + std::to_string(i + 2) + ", response column '" + response +
                                "': not a number");
            y(i) = v;
        }
        return Dataset::continuous(std::move(x), std::move(y), std::move(names));
    }

    // Integer codes forming exactly {1..K} pass through; otherwise distinct
    // raw values are mapped by first appearance.
    std::vector<std::string> raw(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) raw[static_cast<size_t>(i)] = table.rows[static_cast<size_t>(i)][static_cast<size_t>(rcol)];
    bool integral = true;
    std::vector<long> codes(static_cast<size_t>(n));
    long max_code = 0;
    for (int i = 0; i < n; ++i) {
        double v;
        if (!parse_double(raw[static_cast<size_t>(i)], &v) || v != std::floor(v) || v < 1 ||
            v > 1e6) {
            integral = false;
            break;
        }
        codes[static_cast<size_t>(i)] = static_cast<long>(v);
        max_code = std::max(max_code, codes[static_cast<size_t>(i)]);
    }
    std::vector<int> labels(static_cast<size_t>(n));
    if (integral) {
        std::vector<char> seen(static_cast<size_t>(max_code), 0);
        for (long c : codes) seen[static_cast<size_t>(c - 1)] = 1;
        integral = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
        if (integral)
            for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = static_cast<int>(codes[static_cast<size_t>(i)]);
    }
    if (!integral) {
        std::map<std::string, int> mapping;
        for (int i = 0; i < n; ++i) {
            auto [it, inserted] = mapping.try_emplace(raw[static_cast<size_t>(i)], 0);
            if (inserted) it->second = static_cast<int>(mapping.size());
            labels[static_cast<size_t>(i)] = it->second;
        }
    }
    return Dataset::categorical(std::move(x), std::move(labels), std::move(names));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write '" + path + "'");
    for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
    if (!out) throw BadInput("failed writing '" + path + "'");
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::string& response_name) {
    std::vector<std::string> header = data.column_names();
    header.push_back(response_name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<size_t>(data.n()));
    for (int i = 0; i < data.n(); ++i) {
        std::vector<std::string> row;
        row.reserve(static_cast<size_t>(data.p() + 1));
        for (int j = 0; j < data.p(); ++j) row.push_back(format_double(data.x()(i, j)));
        if (data.is_categorical())
            row.push_back(std::to_string(data.labels()[static_cast<size_t>(i)]));
        else
            row.push_back(format_double(data.y()(i)));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

}  // namespace soda
