#include "treesum/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace treesum {

void KernelSpec::validate(std::size_t n) const {
    switch (family) {
        case KernelFamily::gaussian_fixed:
            if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be > 0");
            break;
        case KernelFamily::gaussian_variable:
            if (sigmas.size() != n)
                throw std::invalid_argument("kernel: sigmas length must equal point count");
            for (double s : sigmas)
                if (!(s > 0.0)) throw std::invalid_argument("kernel: all sigmas must be > 0");
            break;
        case KernelFamily::laplace_reciprocal:
            if (epsilon < 0.0) throw std::invalid_argument("kernel: epsilon must be >= 0");
            break;
    }
}

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "gaussian" || s == "gaussian-fixed") return KernelFamily::gaussian_fixed;
    if (s == "gaussian-variable") return KernelFamily::gaussian_variable;
    if (s == "reciprocal" || s == "laplace-reciprocal") return KernelFamily::laplace_reciprocal;
    throw std::invalid_argument("unknown kernel family: " + s);
}

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian_fixed: return "gaussian";
        case KernelFamily::gaussian_variable: return "gaussian-variable";
        case KernelFamily::laplace_reciprocal: return "reciprocal";
    }
    return "?";
}

double kernel_eval(const KernelSpec& spec, std::span<const double> target,
                   std::span<const double> source, std::size_t source_index) {
    const double d2 = squared_distance(target, source);
    switch (spec.family) {
        case KernelFamily::gaussian_fixed:
            return std::exp(-d2 / (spec.sigma * spec.sigma));
        case KernelFamily::gaussian_variable: {
            const double sj = spec.sigmas[source_index];
            return std::exp(-d2 / (sj * sj));
        }
        case KernelFamily::laplace_reciprocal: {
            const double r = std::sqrt(d2);
            if (r == 0.0 && spec.epsilon == 0.0) return 0.0;  // self term excluded
            return 1.0 / (r + spec.epsilon);
        }
    }
    return 0.0;
}

std::vector<double> kernel_row(const KernelSpec& spec, std::span<const double> target,
                               const PointSet& sources,
                               std::span<const std::size_t> source_indices) {
    std::vector<double> row(source_indices.size());
    for (std::size_t i = 0; i < source_indices.size(); ++i)
        row[i] = kernel_eval(spec, target, sources.point(source_indices[i]), source_indices[i]);
    return row;
}

}  // namespace treesum
