#ifndef SCORESORT_COMMON_HPP
#define SCORESORT_COMMON_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace scoresort {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Error hierarchy. Callers that want to distinguish bad arguments from
// numerical breakdowns catch the concrete type; everything derives from
// Error so the CLI can catch one base.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct UnsupportedModelError : Error {
    using Error::Error;
};
struct InputError : Error {
    using Error::Error;
};

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Independent generator stream for (seed, tag). Used so that graph sampling,
// spec construction and data sampling do not share draw sequences, and so
// that benchmark runs are independent of scheduling order.
inline Rng substream(std::uint64_t seed, std::string_view tag) {
    return Rng(mix64(seed ^ fnv1a(tag)));
}

inline double sample_variance(const Eigen::Ref<const Vector>& v) {
    const auto n = v.size();
    if (n < 2) return 0.0;
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(n - 1);
}

// Per-column unbiased sample variance of an n x d matrix.
inline Vector column_variances(const Eigen::Ref<const Matrix>& m) {
    Vector out(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = sample_variance(m.col(j));
    return out;
}

// Median with the averaged-middle convention for even counts. Consumes v.
inline double median_inplace(std::vector<double>& v) {
    if (v.empty()) throw ParameterError("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

inline double median_of(std::vector<double> v) { return median_inplace(v); }

}  // namespace scoresort

#endif  // SCORESORT_COMMON_HPP
