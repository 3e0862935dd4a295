#pragma once

#include "soda/types.hpp"

#include <string>
#include <vector>

namespace soda {

// Comma-separated, header row required, '.' decimal point, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int find_column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

// Dataset from a table; the response column is removed from the predictors.
// categorical: integer codes 1..K pass through, anything else is mapped by
// first appearance.
Dataset dataset_from_csv(const CsvTable& table, const std::string& response, bool categorical);

// 17 significant digits, enough for exact double round-trips.
std::string format_double(double v);

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::string& response_name = "y");

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace soda
