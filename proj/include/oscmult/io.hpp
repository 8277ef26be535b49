#pragma once

#include "oscmult/grid.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace oscmult {

/// Binary sample container: magic "OSCM", version byte 1, dim byte, N as
/// uint32, L as float64, then interleaved re/im float64 pairs, little-endian,
/// row-major. Physical-space samples.
void write_container(const std::filesystem::path& path, const SampledFunction& f);
SampledFunction read_container(const std::filesystem::path& path);

/// CSV import: rows "re" or "re,im", one sample per line, grid given by the
/// caller. A header row is skipped when non-numeric.
SampledFunction read_csv_samples(const std::filesystem::path& path, const GridSpec& spec);

struct DataSeries {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Locale-free shortest round-trip formatting; identical input bits produce
/// identical text.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const DataSeries& series);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace oscmult
