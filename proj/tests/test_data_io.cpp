#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "attrib/data.hpp"
#include "attrib/io.hpp"

using namespace attrib;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void put_be32(std::ofstream& f, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

// byte-level fixture writer, independent of save_idx
void write_fixture(const fs::path& images, const fs::path& labels, std::uint32_t count,
                   std::uint32_t image_magic = 0x803, bool truncate_payload = false,
                   std::uint32_t label_count_override = 0) {
    std::ofstream imf(images, std::ios::binary);
    put_be32(imf, image_magic);
    put_be32(imf, count);
    put_be32(imf, 28);
    put_be32(imf, 28);
    const std::size_t payload =
        std::size_t(count) * 28 * 28 - (truncate_payload ? 100 : 0);
    for (std::size_t i = 0; i < payload; ++i)
        imf.put(static_cast<char>(i % 251));
    imf.close();

    std::ofstream lbf(labels, std::ios::binary);
    put_be32(lbf, 0x801);
    put_be32(lbf, label_count_override ? label_count_override : count);
    for (std::uint32_t i = 0; i < (label_count_override ? label_count_override : count); ++i)
        lbf.put(static_cast<char>(i % 10));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("a well-formed fixture loads into flattened tensors") {
    fs::path dir = scratch_dir("attrib_idx_ok");
    write_fixture(dir / "img", dir / "lab", 4);
    Dataset ds = load_idx((dir / "img").string(), (dir / "lab").string());
    CHECK(ds.size() == 4);
    CHECK(ds.rows == 28);
    CHECK(ds.cols == 28);
    for (const auto& img : ds.images) {
        CHECK(img.size() == 784);
        for (double v : img.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(ds.images[0][1] == doctest::Approx(1.0 / 255.0));
    CHECK(ds.labels == std::vector<int>{0, 1, 2, 3});
    fs::remove_all(dir);
}

TEST_CASE("a wrong magic number is reported at offset zero") {
    fs::path dir = scratch_dir("attrib_idx_magic");
    write_fixture(dir / "img", dir / "lab", 2, 0x807);
    bool threw = false;
    try {
        load_idx((dir / "img").string(), (dir / "lab").string());
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }
    CHECK(threw);
    fs::remove_all(dir);
}

TEST_CASE("a truncated payload names the expected and actual byte counts") {
    fs::path dir = scratch_dir("attrib_idx_trunc");
    write_fixture(dir / "img", dir / "lab", 2, 0x803, true);
    bool threw = false;
    try {
        load_idx((dir / "img").string(), (dir / "lab").string());
    } catch (const std::runtime_error& e) {
        threw = true;
        const std::string msg = e.what();
        CHECK(msg.find(std::to_string(2 * 784)) != std::string::npos);
        CHECK(msg.find(std::to_string(2 * 784 - 100)) != std::string::npos);
    }
    CHECK(threw);
    fs::remove_all(dir);
}

TEST_CASE("image and label counts must agree") {
    fs::path dir = scratch_dir("attrib_idx_count");
    write_fixture(dir / "img", dir / "lab", 3, 0x803, false, 5);
    CHECK_THROWS_AS(load_idx((dir / "img").string(), (dir / "lab").string()),
                    std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("datasets round-trip through idx files up to quantization") {
    fs::path dir = scratch_dir("attrib_idx_roundtrip");
    Dataset ds = make_synthetic_digits(30, 9);
    save_idx(ds, (dir / "img").string(), (dir / "lab").string());
    Dataset back = load_idx((dir / "img").string(), (dir / "lab").string());
    REQUIRE(back.size() == ds.size());
    CHECK(back.labels == ds.labels);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < 784; ++j)
            CHECK(std::fabs(back.images[i][j] - ds.images[i][j]) <= 0.5 / 255.0 + 1e-12);
    fs::remove_all(dir);
}

TEST_CASE("synthetic digits are seeded, bounded, and class-cyclic") {
    Dataset a = make_synthetic_digits(40, 5);
    Dataset b = make_synthetic_digits(40, 5);
    CHECK(a.num_classes == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.labels[i] == int(i % 10));
        CHECK(a.images[i].data == b.images[i].data);
        for (double v : a.images[i].data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    Dataset c = make_synthetic_digits(40, 6);
    CHECK(a.images[0].data != c.images[0].data);  // the seed matters

    // digits have meaningfully more ink than the background floor
    for (std::size_t i = 0; i < 10; ++i) {
        double mx = 0.0;
        for (double v : a.images[i].data) mx = std::max(mx, v);
        CHECK(mx > 0.5);
    }
}

TEST_CASE("two-class blobs are balanced and separated") {
    Dataset ds = make_blobs_2d(50, 2);
    CHECK(ds.size() == 100);
    double m0 = 0, m1 = 0;
    int n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == 0) {
            m0 += ds.images[i][0];
            ++n0;
        } else {
            m1 += ds.images[i][0];
            ++n1;
        }
    }
    CHECK(n0 == 50);
    CHECK(n1 == 50);
    CHECK(m0 / n0 < -1.0);
    CHECK(m1 / n1 > 1.0);
}

TEST_CASE("atomic writes leave no temporary behind") {
    fs::path dir = scratch_dir("attrib_io_atomic");
    const fs::path p = dir / "out.txt";
    io::write_atomic(p.string(), "hello\n");
    CHECK(slurp(p) == "hello\n");
    CHECK_FALSE(fs::exists(p.string() + ".tmp"));
    io::write_atomic(p.string(), "replaced");
    CHECK(slurp(p) == "replaced");
    fs::remove_all(dir);
}

TEST_CASE("pgm export is a valid 8-bit raster") {
    fs::path dir = scratch_dir("attrib_io_pgm");
    const fs::path p = dir / "map.pgm";
    Vec v(12);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
    io::write_pgm(p.string(), v, 3, 4);
    const std::string content = slurp(p);
    const std::string header = "P5\n4 3\n255\n";
    REQUIRE(content.size() == header.size() + 12);
    CHECK(content.substr(0, header.size()) == header);
    CHECK(static_cast<unsigned char>(content[header.size()]) == 0);      // min
    CHECK(static_cast<unsigned char>(content.back()) == 255);            // max
    CHECK_THROWS_AS(io::write_pgm(p.string(), v, 5, 4), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("csv rows keep full double precision") {
    fs::path dir = scratch_dir("attrib_io_csv");
    const fs::path p = dir / "row.csv";
    const Vec v{0.1, -2.5, 1.0 / 3.0};
    io::write_csv_row(p.string(), v);
    std::ifstream f(p);
    std::string cell;
    Vec back;
    while (std::getline(f, cell, ',')) back.push_back(std::stod(cell));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == v[i]);

    CHECK(io::csv_line({"a", "b", "c"}) == "a,b,c\n");
    CHECK(io::csv_line({}) == "\n");
    fs::remove_all(dir);
}
