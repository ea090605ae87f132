#include "treesum/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace treesum {

namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
    std::ifstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

double parse_double(const char* first, const char* last, const std::string& path) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) throw std::runtime_error("bad numeric field in " + path);
    return v;
}

}  // namespace

PointSet read_points_bin(const std::string& path, std::size_t d) {
    if (d == 0) throw std::invalid_argument("read_points_bin: dimension must be supplied");
    auto f = open_in(path, std::ios::binary | std::ios::ate);
    const std::streamsize bytes = f.tellg();
    f.seekg(0);
    if (bytes % static_cast<std::streamsize>(sizeof(double) * d) != 0)
        throw std::runtime_error("point file size not divisible by 8*d: " + path);
    std::vector<double> data(static_cast<std::size_t>(bytes) / sizeof(double));
    f.read(reinterpret_cast<char*>(data.data()), bytes);
    if (!f) throw std::runtime_error("short read: " + path);
    return PointSet(std::move(data), d);
}

PointSet read_points_csv(const std::string& path) {
    auto f = open_in(path, std::ios::in);
    std::vector<double> data;
    std::size_t d = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::size_t cols = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            const char* comma = p;
            while (comma < end && *comma != ',') ++comma;
            data.push_back(parse_double(p, comma, path));
            ++cols;
            p = comma < end ? comma + 1 : end;
        }
        if (d == 0)
            d = cols;
        else if (cols != d)
            throw std::runtime_error("ragged CSV row in " + path);
    }
    if (d == 0) throw std::runtime_error("empty point file: " + path);
    return PointSet(std::move(data), d);
}

void write_points_bin(const std::string& path, const PointSet& pts) {
    auto f = open_out(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(pts.raw().data()),
            static_cast<std::streamsize>(pts.raw().size() * sizeof(double)));
    if (!f) throw std::runtime_error("short write: " + path);
}

void write_points_csv(const std::string& path, const PointSet& pts) {
    auto f = open_out(path, std::ios::out);
    char buf[32];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto p = pts.point(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", p[j]);
            f << buf << (j + 1 < p.size() ? "," : "\n");
        }
    }
}

std::vector<double> read_value_lines(const std::string& path) {
    auto f = open_in(path, std::ios::in);
    std::vector<double> v;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        v.push_back(parse_double(line.data(), line.data() + line.size(), path));
    }
    return v;
}

void write_value_lines(const std::string& path, const std::vector<double>& v) {
    auto f = open_out(path, std::ios::out);
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        f << buf << "\n";
    }
}

std::vector<double> read_doubles_bin(const std::string& path) {
    auto f = open_in(path, std::ios::binary | std::ios::ate);
    const std::streamsize bytes = f.tellg();
    f.seekg(0);
    if (bytes % sizeof(double) != 0)
        throw std::runtime_error("file size not a multiple of 8: " + path);
    std::vector<double> v(static_cast<std::size_t>(bytes) / sizeof(double));
    f.read(reinterpret_cast<char*>(v.data()), bytes);
    if (!f) throw std::runtime_error("short read: " + path);
    return v;
}

void write_doubles_bin(const std::string& path, const std::vector<double>& v) {
    auto f = open_out(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!f) throw std::runtime_error("short write: " + path);
}

std::vector<std::size_t> read_index_lines(const std::string& path) {
    auto f = open_in(path, std::ios::in);
    std::vector<std::size_t> v;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::size_t x = 0;
        auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), x);
        if (ec != std::errc()) throw std::runtime_error("bad index line in " + path);
        v.push_back(x);
    }
    return v;
}

void write_index_lines(const std::string& path, const std::vector<std::size_t>& v) {
    auto f = open_out(path, std::ios::out);
    for (std::size_t x : v) f << x << "\n";
}

}  // namespace treesum
