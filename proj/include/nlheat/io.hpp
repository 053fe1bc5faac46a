#pragma once

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace nlheat {

// Scientific notation, 17 significant digits: lossless for 64-bit floats.
std::string fmt_double(double v);

// Small CSV writer: header row then rows of doubles/strings.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    CsvWriter& cell(double v);
    CsvWriter& cell(const std::string& s);
    CsvWriter& cell(long long v);
    void end_row();

private:
    std::ofstream out_;
    bool first_ = true;
};

void write_json(const nlohmann::json& j, const std::string& path);
void write_json(const nlohmann::ordered_json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

// Doubles in reports are stored as 17-digit strings so they round-trip exactly.
nlohmann::json exact(double v);

// Library versions for run manifests.
nlohmann::json build_info();

#ifndef NLHEAT_VERSION
#define NLHEAT_VERSION "0.1.0"
#endif

}  // namespace nlheat
