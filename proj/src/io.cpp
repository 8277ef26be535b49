#include "oscmult/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oscmult {

namespace {

constexpr char kMagic[4] = {'O', 'S', 'C', 'M'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("container: truncated file");
    return v;
}

} // namespace

void write_container(const std::filesystem::path& path, const SampledFunction& f) {
    if (f.space() != Space::physical)
        throw std::invalid_argument("write_container: physical-space samples expected");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("container: cannot open " + path.string());
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint8_t>(f.spec().dim));
    put(os, static_cast<std::uint32_t>(f.spec().points_per_axis));
    put(os, f.spec().half_width);
    for (const auto& v : f.values()) {
        put(os, v.real());
        put(os, v.imag());
    }
    if (!os) throw std::runtime_error("container: write failed");
}

SampledFunction read_container(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("container: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("container: bad magic");
    const auto version = get<std::uint8_t>(is);
    if (version != kVersion) throw std::runtime_error("container: unsupported version");
    const auto dim = get<std::uint8_t>(is);
    const auto n = get<std::uint32_t>(is);
    const auto half_width = get<double>(is);
    GridSpec spec{static_cast<int>(dim), half_width, static_cast<std::size_t>(n)};
    spec.validate();
    std::vector<Complex> values(spec.size());
    for (auto& v : values) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        v = Complex{re, im};
    }
    return SampledFunction(spec, Space::physical, std::move(values));
}

SampledFunction read_csv_samples(const std::filesystem::path& path, const GridSpec& spec) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("csv: cannot open " + path.string());
    std::vector<Complex> values;
    values.reserve(spec.size());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double re = 0.0, im = 0.0;
        if (!std::getline(row, cell, ',')) continue;
        try {
            re = std::stod(cell);
        } catch (const std::exception&) {
            continue; // header row
        }
        if (std::getline(row, cell, ',')) im = std::stod(cell);
        values.emplace_back(re, im);
    }
    if (values.size() != spec.size())
        throw std::runtime_error("csv: sample count does not match the grid");
    return SampledFunction(spec, Space::physical, std::move(values));
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const DataSeries& series) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("csv: cannot open " + path.string());
    for (std::size_t i = 0; i < series.columns.size(); ++i) {
        if (i) os << ',';
        os << series.columns[i];
    }
    os << '\n';
    for (const auto& row : series.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << format_double(row[i]);
        }
        os << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("json: cannot open " + path.string());
    os << doc.dump(2) << '\n';
}

} // namespace oscmult
