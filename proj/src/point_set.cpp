#include "treesum/point_set.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace treesum {

PointSet::PointSet(std::vector<double> data, std::size_t d) : d_(d), data_(std::move(data)) {
    if (d == 0) throw std::invalid_argument("PointSet: dimension must be >= 1");
    if (data_.size() % d != 0)
        throw std::invalid_argument("PointSet: data length not a multiple of dimension");
    n_ = data_.size() / d;
}

void PointSet::validate() const {
    if (n_ == 0 || d_ == 0)
        throw std::invalid_argument("PointSet: need N >= 1 and d >= 1");
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::invalid_argument("PointSet: non-finite coordinate");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("squared_distance: dimension mismatch");
    double s = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t d = a.size();
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = pa[i] - pb[i];
        s += diff * diff;
    }
    return s;
}

void validate_weights(const WeightVector& w, std::size_t n) {
    if (w.size() != n)
        throw std::invalid_argument("weights: length " + std::to_string(w.size()) +
                                    " does not match point count " + std::to_string(n));
    for (double v : w)
        if (!std::isfinite(v)) throw std::invalid_argument("weights: non-finite entry");
}

}  // namespace treesum
