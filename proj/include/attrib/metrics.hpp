#pragma once

#include <string>

#include "attrib/tensor.hpp"

namespace attrib {

struct SimilarityReport {
    double ssim = 0.0;
    double pcc = 0.0;
    double mse = 0.0;
    bool negative_correlation = false;  // pcc < 0, stored unclamped
    // metric configuration, embedded in serialized reports
    int ssim_window = 7;
    double ssim_data_range = 1.0;

    std::string to_json() const;
};

double mse(const Vec& a, const Vec& b);

/// Pearson correlation over flattened values; throws on zero variance.
double pcc(const Vec& a, const Vec& b);

/// Mean local SSIM over uniform-weight sliding windows on a rows x cols grid,
/// C1 = (0.01 L)^2 and C2 = (0.03 L)^2 with L = data_range.
double ssim(const Vec& a, const Vec& b, std::size_t rows, std::size_t cols,
            int window, double data_range);

enum class CompareKind { Map, Image };

/// Applies the kind's normalization (maps: sum to one; images: checked in
/// [0,1]) and evaluates all three metrics. data_range is max-min over the
/// pair for maps and 1.0 for images.
SimilarityReport report(const Vec& a, const Vec& b, CompareKind kind,
                        std::size_t rows, std::size_t cols, int window = 7);

}  // namespace attrib
