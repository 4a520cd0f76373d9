#include "attrib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace attrib {

double mse(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / double(a.size());
}

double pcc(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pcc: shape mismatch");
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw std::invalid_argument("pcc: undefined correlation (zero variance input)");
    return sab / std::sqrt(saa * sbb);
}

double ssim(const Vec& a, const Vec& b, std::size_t rows, std::size_t cols,
            int window, double data_range) {
    if (a.size() != b.size() || a.size() != rows * cols)
        throw std::invalid_argument("ssim: shape mismatch");
    if (window % 2 == 0 || window < 1)
        throw std::invalid_argument("ssim: window must be odd and positive");
    const std::size_t w = static_cast<std::size_t>(window);
    if (w > rows || w > cols)
        throw std::invalid_argument("ssim: window larger than grid");
    const double c1 = 0.01 * data_range * 0.01 * data_range;
    const double c2 = 0.03 * data_range * 0.03 * data_range;
    const double wn = double(w * w);

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + w <= rows; ++r0)
        for (std::size_t c0 = 0; c0 + w <= cols; ++c0) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t r = r0; r < r0 + w; ++r)
                for (std::size_t c = c0; c < c0 + w; ++c) {
                    const double va = a[r * cols + c], vb = b[r * cols + c];
                    ma += va;
                    mb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            ma /= wn;
            mb /= wn;
            const double va = saa / wn - ma * ma;
            const double vb = sbb / wn - mb * mb;
            const double cab = sab / wn - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cab + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / double(count);
}

SimilarityReport report(const Vec& a, const Vec& b, CompareKind kind,
                        std::size_t rows, std::size_t cols, int window) {
    if (a.size() != b.size() || a.size() != rows * cols)
        throw std::invalid_argument("report: shape mismatch");
    Vec na = a, nb = b;
    double range = 1.0;
    if (kind == CompareKind::Map) {
        for (Vec* v : {&na, &nb}) {
            double s = 0.0;
            for (double e : *v) {
                if (e < 0.0) throw std::invalid_argument("report: map entry < 0");
                s += e;
            }
            if (!(s > 0.0)) throw std::invalid_argument("report: zero-sum map");
            for (double& e : *v) e /= s;
        }
        double lo = na[0], hi = na[0];
        for (const Vec* v : {&na, &nb})
            for (double e : *v) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
        range = hi - lo;
        if (range <= 0.0) range = 1.0;  // identical constant maps
    } else {
        for (const Vec* v : {&na, &nb})
            for (double e : *v)
                if (e < -1e-12 || e > 1.0 + 1e-12)
                    throw std::invalid_argument("report: image entry outside [0,1]");
    }
    SimilarityReport r;
    r.ssim_window = window;
    r.ssim_data_range = range;
    r.mse = mse(na, nb);
    r.pcc = pcc(na, nb);
    r.negative_correlation = r.pcc < 0.0;
    r.ssim = ssim(na, nb, rows, cols, window, range);
    return r;
}

std::string SimilarityReport::to_json() const {
    nlohmann::json j;
    j["ssim"] = ssim;
    j["pcc"] = pcc;
    j["mse"] = mse;
    j["negative_correlation"] = negative_correlation;
    j["config"] = {{"ssim_window", ssim_window}, {"ssim_data_range", ssim_data_range}};
    return j.dump();
}

}  // namespace attrib
