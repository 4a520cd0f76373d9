#include "attrib/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace attrib {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error(path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int num_classes) {
    std::ifstream imf(images_path, std::ios::binary);
    if (!imf) throw std::runtime_error("load_idx: cannot open " + images_path);
    const std::uint32_t magic = read_be32(imf, images_path);
    if (magic != 0x00000803u)
        throw std::runtime_error(images_path + ": bad magic at offset 0 (expected 0x803)");
    const std::uint32_t n = read_be32(imf, images_path);
    const std::uint32_t rows = read_be32(imf, images_path);
    const std::uint32_t cols = read_be32(imf, images_path);

    std::vector<unsigned char> buf(static_cast<std::size_t>(n) * rows * cols);
    imf.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(imf.gcount()) != buf.size())
        throw std::runtime_error(images_path + ": truncated payload, expected " +
                                 std::to_string(buf.size()) + " bytes, got " +
                                 std::to_string(imf.gcount()));

    std::ifstream lbf(labels_path, std::ios::binary);
    if (!lbf) throw std::runtime_error("load_idx: cannot open " + labels_path);
    const std::uint32_t lmagic = read_be32(lbf, labels_path);
    if (lmagic != 0x00000801u)
        throw std::runtime_error(labels_path + ": bad magic at offset 0 (expected 0x801)");
    const std::uint32_t ln = read_be32(lbf, labels_path);
    if (ln != n)
        throw std::runtime_error("load_idx: image count " + std::to_string(n) +
                                 " != label count " + std::to_string(ln));
    std::vector<unsigned char> lab(ln);
    lbf.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
    if (static_cast<std::size_t>(lbf.gcount()) != lab.size())
        throw std::runtime_error(labels_path + ": truncated payload, expected " +
                                 std::to_string(lab.size()) + " bytes, got " +
                                 std::to_string(lbf.gcount()));

    Dataset ds;
    ds.rows = rows;
    ds.cols = cols;
    ds.num_classes = num_classes;
    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    for (std::uint32_t i = 0; i < n; ++i) {
        Tensor t(d);
        for (std::size_t j = 0; j < d; ++j)
            t[j] = buf[static_cast<std::size_t>(i) * d + j] / 255.0;
        ds.images.push_back(std::move(t));
        if (lab[i] >= num_classes)
            throw std::runtime_error("load_idx: label " + std::to_string(int(lab[i])) +
                                     " out of range at index " + std::to_string(i));
        ds.labels.push_back(lab[i]);
    }
    return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path) {
    std::ofstream imf(images_path, std::ios::binary);
    if (!imf) throw std::runtime_error("save_idx: cannot open " + images_path);
    write_be32(imf, 0x00000803u);
    write_be32(imf, static_cast<std::uint32_t>(ds.size()));
    write_be32(imf, static_cast<std::uint32_t>(ds.rows));
    write_be32(imf, static_cast<std::uint32_t>(ds.cols));
    for (const auto& img : ds.images)
        for (double v : img.data) {
            const double c = std::clamp(v, 0.0, 1.0);
            imf.put(static_cast<char>(std::lround(c * 255.0)));
        }

    std::ofstream lbf(labels_path, std::ios::binary);
    if (!lbf) throw std::runtime_error("save_idx: cannot open " + labels_path);
    write_be32(lbf, 0x00000801u);
    write_be32(lbf, static_cast<std::uint32_t>(ds.size()));
    for (int l : ds.labels) lbf.put(static_cast<char>(l));
}

namespace {

// Seven-segment layout on a nominal 16x10 glyph box:
//    -0-
//   5   1
//    -6-
//   4   2
//    -3-
// Segment endpoints in (y, x) glyph coordinates.
constexpr double kSeg[7][4] = {
    {1, 1, 1, 9},    // 0 top
    {1, 9, 8, 9},    // 1 upper right
    {8, 9, 15, 9},   // 2 lower right
    {15, 1, 15, 9},  // 3 bottom
    {8, 1, 15, 1},   // 4 lower left
    {1, 1, 8, 1},    // 5 upper left
    {8, 1, 8, 9},    // 6 middle
};
constexpr int kDigitSegs[10] = {
    0b0111111, 0b0000110, 0b1011011, 0b1001111, 0b1100110,
    0b1101101, 0b1111101, 0b0000111, 0b1111111, 0b1101111,
};

}  // namespace

Dataset make_synthetic_digits(std::size_t count, std::uint64_t seed) {
    constexpr std::size_t R = 28, C = 28, D = R * C;
    constexpr int K = 10;
    std::mt19937_64 rng(seed);

    Dataset ds;
    ds.rows = R;
    ds.cols = C;
    ds.num_classes = K;
    std::uniform_real_distribution<double> ushift(-2.5, 2.5);
    std::uniform_real_distribution<double> uthick(0.9, 1.5);
    std::uniform_real_distribution<double> uint_(0.7, 1.0);
    std::uniform_real_distribution<double> ujit(-0.9, 0.9);
    std::uniform_real_distribution<double> uscale(0.85, 1.15);
    std::normal_distribution<double> noise(0.0, 0.04);

    for (std::size_t i = 0; i < count; ++i) {
        const int k = static_cast<int>(i % K);
        const double oy = 6.0 + ushift(rng), ox = 9.0 + ushift(rng);
        const double sy = uscale(rng), sx = uscale(rng);
        Tensor img(D);
        // smooth low-frequency background texture; keeps hidden units away
        // from hard-zero activations across the whole canvas
        {
            std::uniform_real_distribution<double> uphase(0.0, 2.0 * M_PI);
            std::uniform_real_distribution<double> ufreq(0.15, 0.55);
            double fy[3], fx[3], ph[3];
            for (int m = 0; m < 3; ++m) {
                fy[m] = ufreq(rng);
                fx[m] = ufreq(rng);
                ph[m] = uphase(rng);
            }
            for (std::size_t y = 0; y < R; ++y)
                for (std::size_t x = 0; x < C; ++x) {
                    double b = 0.0;
                    for (int m = 0; m < 3; ++m)
                        b += std::sin(fy[m] * double(y) + fx[m] * double(x) + ph[m]);
                    img[y * C + x] = 0.15 + 0.03 * b;
                }
        }
        for (int s = 0; s < 7; ++s) {
            if (!(kDigitSegs[k] >> s & 1)) continue;
            const double w = uthick(rng), amp = uint_(rng);
            const double y0 = oy + sy * (kSeg[s][0] + ujit(rng));
            const double x0 = ox + sx * (kSeg[s][1] + ujit(rng));
            const double y1 = oy + sy * (kSeg[s][2] + ujit(rng));
            const double x1 = ox + sx * (kSeg[s][3] + ujit(rng));
            const double dy = y1 - y0, dx = x1 - x0;
            const double len2 = dy * dy + dx * dx;
            for (std::size_t y = 0; y < R; ++y)
                for (std::size_t x = 0; x < C; ++x) {
                    // distance from pixel to the segment
                    double t = len2 > 0 ? ((double(y) - y0) * dy + (double(x) - x0) * dx) / len2
                                        : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    const double py = y0 + t * dy, px = x0 + t * dx;
                    const double d2 = (double(y) - py) * (double(y) - py) +
                                      (double(x) - px) * (double(x) - px);
                    img[y * C + x] =
                        std::max(img[y * C + x], amp * std::exp(-d2 / (2 * w * w)));
                }
        }
        for (double& v : img.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
        ds.images.push_back(std::move(img));
        ds.labels.push_back(k);
    }
    return ds;
}

Dataset make_blobs_2d(std::size_t count_per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.5);
    Dataset ds;
    ds.rows = 1;
    ds.cols = 2;
    ds.num_classes = 2;
    for (std::size_t i = 0; i < count_per_class; ++i) {
        for (int k = 0; k < 2; ++k) {
            Tensor p(2);
            p[0] = (k == 0 ? -3.0 : 3.0) + n(rng);
            p[1] = (k == 0 ? -3.0 : 3.0) + n(rng);
            ds.images.push_back(std::move(p));
            ds.labels.push_back(k);
        }
    }
    return ds;
}

}  // namespace attrib
