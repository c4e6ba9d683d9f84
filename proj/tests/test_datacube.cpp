#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "pcm/datacube.hpp"
#include "pcm/scenario.hpp"

using namespace pcm;

namespace {

DataCube random_cube(std::uint32_t rows, std::uint32_t cols, std::uint64_t seed) {
    DataCube c;
    c.rows = rows;
    c.cols = cols;
    c.samples.resize(static_cast<std::size_t>(rows) * cols * 3);
    RngStream rng(seed);
    for (auto& s : c.samples) s = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
    return c;
}

DataCube cube_from_classes(std::uint32_t rows, std::uint32_t cols,
                           const std::function<int(std::uint32_t, std::uint32_t)>& cls,
                           std::uint64_t seed) {
    DataCube c;
    c.rows = rows;
    c.cols = cols;
    c.samples.resize(static_cast<std::size_t>(rows) * cols * 3);
    RngStream rng(seed);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t co = 0; co < cols; ++co) {
            const Vec3c z = sample_gaussian(nominal_matrices()[cls(r, co)], rng);
            for (int ch = 0; ch < 3; ++ch)
                c.at(r, co, ch) = {static_cast<float>(z[ch].real()),
                                   static_cast<float>(z[ch].imag())};
        }
    return c;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("PCUBE round trip is bit exact") {
    const DataCube cube = random_cube(4, 5, 77);
    TempFile f("pcm_test_cube.pcube");
    write_cube(cube, f.path);
    const DataCube back = read_cube(f.path);
    CHECK(back.rows == 4);
    CHECK(back.cols == 5);
    REQUIRE(back.samples.size() == cube.samples.size());
    for (std::size_t i = 0; i < cube.samples.size(); ++i) CHECK(back.samples[i] == cube.samples[i]);
}

TEST_CASE("CSV cube fallback round trips") {
    const DataCube cube = random_cube(3, 3, 78);
    TempFile f("pcm_test_cube.csv");
    write_cube(cube, f.path);
    const DataCube back = read_cube(f.path);
    REQUIRE(back.samples.size() == cube.samples.size());
    for (std::size_t i = 0; i < cube.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - cube.samples[i]) < 1e-6f);
}

TEST_CASE("bad magic and truncation are detected") {
    TempFile f("pcm_test_bad.pcube");
    {
        std::ofstream os(f.path, std::ios::binary);
        os << "NOPE-not-a-cube";
    }
    CHECK_THROWS_AS(read_cube(f.path), BadMagic);

    const DataCube cube = random_cube(10, 10, 79);
    TempFile g("pcm_test_trunc.pcube");
    write_cube(cube, g.path);
    std::filesystem::resize_file(g.path, 20 + 50 * 8);  // 50 samples of 300
    CHECK_THROWS_AS(read_cube(g.path), TruncatedFile);
}

TEST_CASE("window tiling counts and disjointness") {
    DataCube dims;
    dims.rows = 1750;
    dims.cols = 1000;
    dims.samples.resize(std::size_t(1750) * 1000 * 3);
    const auto w = iter_windows(dims, 11, 11);
    CHECK(w.size() == std::size_t(159) * 90);

    const DataCube c22 = random_cube(22, 22, 2);
    const auto w4 = iter_windows(c22, 11, 11);
    CHECK(w4.size() == 4);
    for (const auto& win : w4) CHECK(win.data.size() == 121);

    const DataCube c920 = random_cube(9, 20, 3);
    CHECK(iter_windows(c920, 9, 20)[0].data.size() == 180);

    CHECK_THROWS_AS(iter_windows(c22, 23, 11), WindowTooLarge);
}

TEST_CASE("windows cover disjoint pixels in row-major order") {
    DataCube c = random_cube(6, 9, 4);
    // tag each pixel's first channel with its linear index
    for (std::uint32_t r = 0; r < 6; ++r)
        for (std::uint32_t col = 0; col < 9; ++col) c.at(r, col, 0) = {float(r * 9 + col), 0.0f};
    const auto w = iter_windows(c, 3, 3);
    REQUIRE(w.size() == 6);
    std::vector<int> seen;
    for (const auto& win : w)
        for (const auto& z : win.data) seen.push_back(static_cast<int>(z[0].real()));
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < 54; ++i) CHECK(seen[i] == i);
    CHECK(w[0].tile_row == 0);
    CHECK(w[1].tile_col == 1);
}

TEST_CASE("classify_cube on a uniform C2 cube") {
    const DataCube cube = cube_from_classes(24, 24, [](auto, auto) { return 1; }, 42);
    const ClassMap map = classify_cube(cube, Architecture::parse("BIC-D-P1"), 25.0, 8, 8);
    CHECK(map.rows == 3);
    CHECK(map.cols == 3);
    int wrong = 0;
    for (Structure s : map.classes) wrong += s != Structure::reflection;
    CHECK(wrong <= 1);
}

TEST_CASE("classify_cube separates a half-split cube") {
    const DataCube cube = cube_from_classes(
        22, 44, [](std::uint32_t, std::uint32_t c) { return c < 22 ? 0 : 3; }, 43);
    const ClassMap map = classify_cube(cube, Architecture::parse("BIC-D-P1"), 25.0, 11, 11);
    REQUIRE(map.rows == 2);
    REQUIRE(map.cols == 4);
    int ok = 0;
    for (std::uint32_t r = 0; r < 2; ++r) {
        for (std::uint32_t c = 0; c < 4; ++c) {
            const Structure want = c < 2 ? Structure::unconstrained : Structure::azimuth;
            ok += map.cls(r, c) == want;
        }
    }
    CHECK(ok >= 7);  // >= 90% of cells
}

TEST_CASE("single-window cube yields a one-cell map") {
    const DataCube cube = cube_from_classes(4, 4, [](auto, auto) { return 3; }, 44);
    const ClassMap map = classify_cube(cube, Architecture::parse("BASELINE-BIC"), 0.0, 4, 4);
    CHECK(map.rows == 1);
    CHECK(map.cols == 1);
}

TEST_CASE("map output formats") {
    ClassMap map;
    map.rows = 2;
    map.cols = 2;
    map.classes = {Structure::unconstrained, Structure::reflection, Structure::rotation,
                   Structure::azimuth};
    map.hypotheses.assign(4, Hypothesis::h0);

    TempFile csv("pcm_test_map.csv");
    write_map(map, csv.path, MapFormat::csv);
    const ClassMap back = read_map_csv(csv.path);
    CHECK(back.rows == 2);
    CHECK(back.cols == 2);
    CHECK(back.classes == map.classes);

    TempFile ppm("pcm_test_map.ppm");
    write_map(map, ppm.path, MapFormat::ppm);
    std::ifstream is(ppm.path, std::ios::binary);
    std::string header;
    std::getline(is, header);
    CHECK(header == "P6");
    std::string dims, maxval;
    std::getline(is, dims);
    std::getline(is, maxval);
    CHECK(dims == "2 2");
    CHECK(maxval == "255");
    std::vector<unsigned char> payload(12);
    is.read(reinterpret_cast<char*>(payload.data()), 12);
    CHECK(is.gcount() == 12);
    // class 3 is green, class 4 yellow
    CHECK(payload[6] == 0);
    CHECK(payload[7] == 255);
    CHECK(payload[8] == 0);
    CHECK(payload[9] == 255);
    CHECK(payload[10] == 255);
    CHECK(payload[11] == 0);
}

TEST_CASE("classify_cube is deterministic across thread counts") {
    const DataCube cube = cube_from_classes(16, 16, [](auto, auto) { return 0; }, 45);
    const ClassMap a = classify_cube(cube, Architecture::parse("AIC-D-P2"), 10.0, 8, 8, {}, 1);
    const ClassMap b = classify_cube(cube, Architecture::parse("AIC-D-P2"), 10.0, 8, 8, {}, 4);
    CHECK(a.classes == b.classes);
    CHECK(a.hypotheses == b.hypotheses);
}
