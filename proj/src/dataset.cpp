#include "treesum/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "treesum/rng.hpp"

namespace treesum {

ManifoldMap manifold_map_from_string(const std::string& s) {
    if (s == "identity") return ManifoldMap::identity;
    if (s == "linear") return ManifoldMap::linear;
    if (s == "sinusoidal") return ManifoldMap::sinusoidal;
    throw std::invalid_argument("unknown manifold map: " + s);
}

std::string to_string(ManifoldMap m) {
    switch (m) {
        case ManifoldMap::identity: return "identity";
        case ManifoldMap::linear: return "linear";
        case ManifoldMap::sinusoidal: return "sinusoidal";
    }
    throw std::logic_error("unreachable");
}

PointSet generate_manifold_dataset(std::size_t n, std::size_t d_ambient, std::size_t d_intrinsic,
                                   double noise, std::uint64_t seed, ManifoldMap map) {
    if (n < 1 || d_ambient < 1 || d_intrinsic < 1)
        throw std::invalid_argument("generate_manifold_dataset: sizes must be >= 1");
    if (d_intrinsic > d_ambient)
        throw std::invalid_argument("generate_manifold_dataset: d_intrinsic > d_ambient");
    if (map == ManifoldMap::identity && d_intrinsic != d_ambient)
        throw std::invalid_argument("identity map requires d_intrinsic == d_ambient");
    if (noise < 0.0) throw std::invalid_argument("noise must be >= 0");

    // map parameters depend only on (seed, dims) so the same manifold can be
    // resampled with a different point count
    auto map_rng = make_rng(seed, seed_stream::dataset, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> L;                  // d_ambient x d_intrinsic, row-major
    std::vector<double> freq, phase;        // per ambient coordinate
    if (map != ManifoldMap::identity) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d_intrinsic));
        L.resize(d_ambient * d_intrinsic);
        for (double& v : L) v = gauss(map_rng) * scale;
    }
    if (map == ManifoldMap::sinusoidal) {
        std::uniform_real_distribution<double> f(0.5, 2.0);
        std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
        freq.resize(d_ambient);
        phase.resize(d_ambient);
        for (std::size_t a = 0; a < d_ambient; ++a) freq[a] = f(map_rng);
        for (std::size_t a = 0; a < d_ambient; ++a) phase[a] = ph(map_rng);
    }

    auto point_rng = make_rng(seed, seed_stream::dataset, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PointSet ps(n, d_ambient);
    std::vector<double> z(d_intrinsic);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < d_intrinsic; ++m) z[m] = unit(point_rng);
        double* x = ps.raw().data() + i * d_ambient;
        switch (map) {
            case ManifoldMap::identity:
                for (std::size_t a = 0; a < d_ambient; ++a) x[a] = z[a];
                break;
            case ManifoldMap::linear:
            case ManifoldMap::sinusoidal:
                for (std::size_t a = 0; a < d_ambient; ++a) {
                    double v = 0.0;
                    const double* row = L.data() + a * d_intrinsic;
                    for (std::size_t m = 0; m < d_intrinsic; ++m) v += row[m] * z[m];
                    if (map == ManifoldMap::sinusoidal)
                        v += std::sin(2.0 * std::numbers::pi * freq[a] * z[a % d_intrinsic] +
                                      phase[a]);
                    x[a] = v;
                }
                break;
        }
        if (noise > 0.0)
            for (std::size_t a = 0; a < d_ambient; ++a) x[a] += noise * gauss(point_rng);
    }
    return ps;
}

WeightVector generate_weights(std::size_t n, std::uint64_t seed) {
    auto rng = make_rng(seed, seed_stream::dataset, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    WeightVector w(n);
    for (double& v : w) v = gauss(rng);
    return w;
}

}  // namespace treesum
