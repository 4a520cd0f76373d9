#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attrib/tensor.hpp"

namespace attrib {

struct Dataset {
    std::vector<Tensor> images;  // flattened, values in [0,1]
    std::vector<int> labels;
    std::size_t rows = 0, cols = 0;
    int num_classes = 0;

    std::size_t size() const { return images.size(); }
};

/// Reads an IDX image/label file pair (big-endian headers, magic 0x803 for
/// images and 0x801 for labels). Pixel bytes are scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int num_classes = 10);

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path);

/// Seeded 10-class 28x28 digit dataset rendered as seven-segment glyphs with
/// per-sample jitter (segment endpoints, shift, scale, stroke width and
/// intensity), a smooth low-frequency background texture and gaussian pixel
/// noise. Class geometry is fixed, so splits generated from different seeds
/// share the same classes. An MLP reaches >95% test accuracy.
Dataset make_synthetic_digits(std::size_t count, std::uint64_t seed);

/// 2-D two-class gaussian blobs, separable by a margin.
Dataset make_blobs_2d(std::size_t count_per_class, std::uint64_t seed);

}  // namespace attrib
