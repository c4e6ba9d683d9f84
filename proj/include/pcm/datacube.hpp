// Datacube ingestion, non-overlapping sliding-window iteration, and
// classification-map output.
//
// PCUBE binary layout: magic "PCB1", then little-endian u32 rows, u32 cols,
// u32 channels (= 3), u32 dtype (= 1, complex64: float32 real then
// imaginary), followed by rows*cols*3 samples row-major, channel fastest.
#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcm/parallel.hpp"
#include "pcm/scenario.hpp"

namespace pcm {

struct BadMagic : std::runtime_error {
    BadMagic() : std::runtime_error("not a PCUBE file (bad magic)") {}
};
struct TruncatedFile : std::runtime_error {
    TruncatedFile() : std::runtime_error("file ends before the declared sample count") {}
};
struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct WindowTooLarge : std::runtime_error {
    WindowTooLarge() : std::runtime_error("window exceeds the cube dimensions") {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& path) : std::runtime_error("cannot open " + path) {}
};

/// L x M x 3 complex image stack, row-major, channel fastest.
struct DataCube {
    std::uint32_t rows = 0, cols = 0;
    std::vector<std::complex<float>> samples;  // rows*cols*3

    std::complex<float>& at(std::uint32_t r, std::uint32_t c, int ch) {
        return samples[(static_cast<std::size_t>(r) * cols + c) * 3 + ch];
    }
    const std::complex<float>& at(std::uint32_t r, std::uint32_t c, int ch) const {
        return samples[(static_cast<std::size_t>(r) * cols + c) * 3 + ch];
    }
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw TruncatedFile{};
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}

inline float get_f32(std::istream& is) {
    const std::uint32_t u = get_u32(is);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

inline bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace detail

inline void write_cube(const DataCube& cube, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(path);
    if (detail::has_suffix(path, ".csv")) {
        if (cube.rows > 64 || cube.cols > 64)
            throw DimensionMismatch("CSV cube fallback limited to 64x64");
        os << cube.rows << "," << cube.cols << ",3\n";
        os.precision(9);
        for (std::uint32_t r = 0; r < cube.rows; ++r)
            for (std::uint32_t c = 0; c < cube.cols; ++c) {
                for (int ch = 0; ch < 3; ++ch) {
                    const auto& s = cube.at(r, c, ch);
                    os << (ch ? "," : "") << s.real() << "," << s.imag();
                }
                os << "\n";
            }
        return;
    }
    os.write("PCB1", 4);
    detail::put_u32(os, cube.rows);
    detail::put_u32(os, cube.cols);
    detail::put_u32(os, 3);
    detail::put_u32(os, 1);
    for (const auto& s : cube.samples) {
        detail::put_f32(os, s.real());
        detail::put_f32(os, s.imag());
    }
}

inline DataCube read_cube(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(path);
    DataCube cube;
    if (detail::has_suffix(path, ".csv")) {
        std::string line;
        if (!std::getline(is, line)) throw TruncatedFile{};
        char comma;
        std::uint32_t channels = 0;
        std::istringstream hdr(line);
        if (!(hdr >> cube.rows >> comma >> cube.cols >> comma >> channels) || channels != 3)
            throw DimensionMismatch("CSV cube header must be rows,cols,3");
        cube.samples.resize(static_cast<std::size_t>(cube.rows) * cube.cols * 3);
        auto skip_comma = [&is] {
            is >> std::ws;
            if (is.peek() == ',') is.get();
        };
        for (auto& s : cube.samples) {
            float re, im;
            if (!(is >> re)) throw TruncatedFile{};
            skip_comma();
            if (!(is >> im)) throw TruncatedFile{};
            skip_comma();
            s = {re, im};
        }
        return cube;
    }
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PCB1", 4) != 0) throw BadMagic{};
    cube.rows = detail::get_u32(is);
    cube.cols = detail::get_u32(is);
    const std::uint32_t channels = detail::get_u32(is);
    const std::uint32_t dtype = detail::get_u32(is);
    if (channels != 3) throw DimensionMismatch("PCUBE channels must be 3");
    if (dtype != 1) throw DimensionMismatch("PCUBE dtype must be 1 (complex64)");
    cube.samples.resize(static_cast<std::size_t>(cube.rows) * cube.cols * 3);
    for (auto& s : cube.samples) {
        const float re = detail::get_f32(is);
        const float im = detail::get_f32(is);
        s = {re, im};
    }
    return cube;
}

struct WindowRef {
    std::uint32_t tile_row, tile_col;
    WindowData data;
};

/// Non-overlapping row-major tiling; partial border windows are discarded.
inline std::vector<WindowRef> iter_windows(const DataCube& cube, std::uint32_t w_rows,
                                           std::uint32_t w_cols) {
    if (w_rows == 0 || w_cols == 0 || w_rows > cube.rows || w_cols > cube.cols)
        throw WindowTooLarge{};
    const std::uint32_t tiles_r = cube.rows / w_rows;
    const std::uint32_t tiles_c = cube.cols / w_cols;
    std::vector<WindowRef> out;
    out.reserve(static_cast<std::size_t>(tiles_r) * tiles_c);
    for (std::uint32_t tr = 0; tr < tiles_r; ++tr)
        for (std::uint32_t tc = 0; tc < tiles_c; ++tc) {
            WindowRef w{tr, tc, WindowData()};
            w.data.reserve(static_cast<std::size_t>(w_rows) * w_cols);
            for (std::uint32_t r = 0; r < w_rows; ++r)
                for (std::uint32_t c = 0; c < w_cols; ++c) {
                    Vec3c z;
                    for (int ch = 0; ch < 3; ++ch) {
                        const auto& s = cube.at(tr * w_rows + r, tc * w_cols + c, ch);
                        z[ch] = cplx(s.real(), s.imag());
                    }
                    w.data.push_back(z);
                }
            out.push_back(std::move(w));
        }
    return out;
}

struct ClassMap {
    std::uint32_t rows = 0, cols = 0;
    std::vector<Structure> classes;       // rows*cols
    std::vector<Hypothesis> hypotheses;   // rows*cols

    Structure cls(std::uint32_t r, std::uint32_t c) const {
        return classes[static_cast<std::size_t>(r) * cols + c];
    }
};

/// Per window: run the detector, store the dominant per-pixel label (mode,
/// ties toward the smaller class index).
inline ClassMap classify_cube(const DataCube& cube, const Architecture& arch, double eta,
                              std::uint32_t w_rows, std::uint32_t w_cols,
                              const EmConfig& cfg = {}, int threads = 1) {
    auto windows = iter_windows(cube, w_rows, w_cols);
    ClassMap map;
    map.rows = cube.rows / w_rows;
    map.cols = cube.cols / w_cols;
    map.classes.resize(windows.size(), Structure::unconstrained);
    map.hypotheses.resize(windows.size(), Hypothesis::h0);
    parallel_for(windows.size(), threads, [&](std::size_t i) {
        const auto& w = windows[i];
        const std::size_t cell = static_cast<std::size_t>(w.tile_row) * map.cols + w.tile_col;
        if (arch.baseline) {
            map.classes[cell] = baseline_classify(w.data, arch.rule);
            return;
        }
        const DetectionOutcome out = decide(w.data, arch.rule, arch.strategy, eta, cfg);
        std::array<int, 4> count{};
        for (Structure s : out.labels) ++count[index_of(s) - 1];
        int best = 0;
        for (int j = 1; j < 4; ++j)
            if (count[j] > count[best]) best = j;
        map.classes[cell] = structure_from_index(best + 1);
        map.hypotheses[cell] = out.declared;
    });
    return map;
}

/// Fixed palette: class 1 blue, 2 red, 3 green, 4 yellow.
inline std::array<unsigned char, 3> class_color(Structure c) {
    switch (c) {
        case Structure::unconstrained: return {0, 0, 255};
        case Structure::reflection: return {255, 0, 0};
        case Structure::rotation: return {0, 255, 0};
        case Structure::azimuth: return {255, 255, 0};
    }
    return {0, 0, 0};
}

enum class MapFormat { csv, ppm };

inline void write_map(const ClassMap& map, const std::string& path, MapFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(path);
    if (format == MapFormat::csv) {
        for (std::uint32_t r = 0; r < map.rows; ++r) {
            for (std::uint32_t c = 0; c < map.cols; ++c)
                os << (c ? "," : "") << index_of(map.cls(r, c));
            os << "\n";
        }
        return;
    }
    os << "P6\n" << map.cols << " " << map.rows << "\n255\n";
    for (std::uint32_t r = 0; r < map.rows; ++r)
        for (std::uint32_t c = 0; c < map.cols; ++c) {
            const auto rgb = class_color(map.cls(r, c));
            os.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
}

inline ClassMap read_map_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError(path);
    ClassMap map;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::uint32_t count = 0;
        int v;
        char comma;
        while (row >> v) {
            if (v < 1 || v > 4) throw DimensionMismatch("class index out of range in map CSV");
            map.classes.push_back(structure_from_index(v));
            ++count;
            row >> comma;
        }
        if (map.cols == 0)
            map.cols = count;
        else if (count != map.cols)
            throw DimensionMismatch("ragged rows in map CSV");
        ++map.rows;
    }
    map.hypotheses.assign(map.classes.size(), Hypothesis::h0);
    return map;
}

}  // namespace pcm
