#ifndef SCORESORT_SCM_HPP
#define SCORESORT_SCM_HPP

#include <cmath>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "scoresort/common.hpp"
#include "scoresort/dataset.hpp"
#include "scoresort/graph.hpp"
#include "scoresort/kernels.hpp"

namespace scoresort {

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

// 1 -> 100 -> 1 MLP with sigmoid hidden units; applied elementwise to the
// latent Gaussian to produce non-Gaussian noise.
struct NoiseTransform {
    Vector w1, b1, w2;  // 100 hidden units
    double b2 = 0.0;

    double operator()(double x) const {
        const Eigen::ArrayXd h = 1.0 / (1.0 + (-(w1.array() * x + b1.array())).exp());
        return (h * w2.array()).sum() + b2;
    }
};

inline NoiseTransform sample_noise_transform(Rng& rng, int hidden = 100) {
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    NoiseTransform t;
    t.w1.resize(hidden);
    t.b1.resize(hidden);
    t.w2.resize(hidden);
    for (int k = 0; k < hidden; ++k) t.w1[k] = unif(rng);
    for (int k = 0; k < hidden; ++k) t.b1[k] = unif(rng);
    for (int k = 0; k < hidden; ++k) t.w2[k] = unif(rng);
    t.b2 = unif(rng);
    return t;
}

enum class NoiseMode { Gaussian, MlpTransformed };

struct NoiseSpec {
    double sigma = 1.0;  // std of the latent Gaussian
    NoiseMode mode = NoiseMode::Gaussian;
    std::optional<NoiseTransform> transform;  // required when MlpTransformed
};

inline Vector sample_noise(Eigen::Index n, const NoiseSpec& spec, Rng& rng) {
    if (n < 1) throw ParameterError("sample_noise requires n >= 1");
    if (!(spec.sigma > 0.0)) throw ParameterError("noise sigma must be positive");
    std::normal_distribution<double> gauss(0.0, spec.sigma);
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = gauss(rng);
    if (spec.mode == NoiseMode::MlpTransformed) {
        if (!spec.transform) throw ParameterError("MlpTransformed noise needs transform weights");
        for (Eigen::Index i = 0; i < n; ++i) out[i] = (*spec.transform)(out[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mechanisms
// ---------------------------------------------------------------------------

// Function values drawn jointly from a GP prior at the observed parent rows.
// There is no reusable closed form, so this mechanism supports neither
// re-evaluation nor differentiation.
struct GpDraw {};

// Single-hidden-layer MLP (10 leaky-ReLU units), weights drawn standard
// normal, output divided by `norm` (fixed once from an output column's
// empirical standard deviation).
struct MlpMechanism {
    Matrix w1;   // 10 x |parents|
    Vector b1;   // 10
    Vector w2;   // 10
    double slope = 0.01;
    double norm = 1.0;
};

inline MlpMechanism sample_mlp_mechanism(int n_parents, Rng& rng, int hidden = 10) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MlpMechanism m;
    m.w1.resize(hidden, n_parents);
    m.b1.resize(hidden);
    m.w2.resize(hidden);
    for (int r = 0; r < hidden; ++r)
        for (int c = 0; c < n_parents; ++c) m.w1(r, c) = gauss(rng);
    for (int r = 0; r < hidden; ++r) m.b1[r] = gauss(rng);
    for (int r = 0; r < hidden; ++r) m.w2[r] = gauss(rng);
    return m;
}

// Finite sum of monomials over the parent variables.
struct Polynomial {
    struct Term {
        double coeff = 0.0;
        std::vector<int> exponents;  // one non-negative exponent per parent
    };
    std::vector<Term> terms;
};

using Mechanism = std::variant<GpDraw, MlpMechanism, Polynomial>;

// One joint draw from N(0, K + jitter I), K the RBF Gram matrix (bandwidth 1)
// over the parent rows. Jitter starts at 1e-6 * n and escalates tenfold until
// the factorization succeeds.
inline Vector gp_mechanism_values(const Eigen::Ref<const Matrix>& parent_cols, Rng& rng) {
    const Eigen::Index n = parent_cols.rows();
    if (n < 1) throw ParameterError("gp_mechanism_values requires n >= 1");
    if (!parent_cols.allFinite()) throw ParameterError("gp_mechanism_values: non-finite parent values");
    const Matrix gram = rbf_gram(parent_cols, KernelConfig{1.0, 0.0});

    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = gauss(rng);

    double jitter = 1e-6 * static_cast<double>(n);
    const double jitter_cap = std::max(1e-2, jitter);
    while (true) {
        Matrix k = gram;
        k.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(k);
        if (llt.info() == Eigen::Success) return llt.matrixL() * z;
        jitter *= 10.0;
        if (jitter > jitter_cap)
            throw NumericalError("gp_mechanism_values: Cholesky failed up to jitter " +
                                 std::to_string(jitter_cap));
    }
}

namespace detail {

inline Vector mlp_eval(const MlpMechanism& m, const Eigen::Ref<const Matrix>& parents) {
    Matrix h = (parents * m.w1.transpose()).rowwise() + m.b1.transpose();
    h = h.unaryExpr([&](double v) { return v > 0.0 ? v : m.slope * v; });
    return (h * m.w2) / m.norm;
}

inline Vector mlp_grad(const MlpMechanism& m, const Eigen::Ref<const Matrix>& parents, int wrt) {
    // d/dpa_wrt sum_r w2_r lrelu(w1_r . pa + b1_r) = sum_r w2_r lrelu'(.) w1_{r,wrt}
    Matrix pre = (parents * m.w1.transpose()).rowwise() + m.b1.transpose();
    Matrix act = pre.unaryExpr([&](double v) { return v > 0.0 ? 1.0 : m.slope; });
    return (act * m.w2.cwiseProduct(m.w1.col(wrt))) / m.norm;
}

inline Vector poly_eval(const Polynomial& p, const Eigen::Ref<const Matrix>& parents) {
    Vector out = Vector::Zero(parents.rows());
    for (const auto& term : p.terms) {
        if (static_cast<Eigen::Index>(term.exponents.size()) != parents.cols())
            throw ParameterError("polynomial term arity mismatch");
        Eigen::ArrayXd prod = Eigen::ArrayXd::Constant(parents.rows(), term.coeff);
        for (std::size_t j = 0; j < term.exponents.size(); ++j)
            for (int e = 0; e < term.exponents[j]; ++e)
                prod *= parents.col(static_cast<Eigen::Index>(j)).array();
        out += prod.matrix();
    }
    return out;
}

inline Vector poly_grad(const Polynomial& p, const Eigen::Ref<const Matrix>& parents, int wrt) {
    Vector out = Vector::Zero(parents.rows());
    for (const auto& term : p.terms) {
        if (static_cast<Eigen::Index>(term.exponents.size()) != parents.cols())
            throw ParameterError("polynomial term arity mismatch");
        const int e_wrt = term.exponents[static_cast<std::size_t>(wrt)];
        if (e_wrt == 0) continue;
        Eigen::ArrayXd prod = Eigen::ArrayXd::Constant(parents.rows(), term.coeff * e_wrt);
        for (std::size_t j = 0; j < term.exponents.size(); ++j) {
            const int e = static_cast<int>(j) == wrt ? term.exponents[j] - 1 : term.exponents[j];
            for (int k = 0; k < e; ++k) prod *= parents.col(static_cast<Eigen::Index>(j)).array();
        }
        out += prod.matrix();
    }
    return out;
}

}  // namespace detail

// f(pa) per row. Parent columns follow ascending node index.
inline Vector eval_mechanism(const Mechanism& mech, const Eigen::Ref<const Matrix>& parent_rows) {
    if (std::holds_alternative<GpDraw>(mech))
        throw UnsupportedModelError("GP-drawn mechanism has no reusable evaluation");
    if (const auto* m = std::get_if<MlpMechanism>(&mech)) return detail::mlp_eval(*m, parent_rows);
    return detail::poly_eval(std::get<Polynomial>(mech), parent_rows);
}

// df/dpa_wrt per row, wrt indexing the mechanism's parent slots.
inline Vector eval_mechanism_grad(const Mechanism& mech, const Eigen::Ref<const Matrix>& parent_rows, int wrt) {
    if (std::holds_alternative<GpDraw>(mech))
        throw UnsupportedModelError("GP-drawn mechanism has no reusable derivative");
    if (wrt < 0 || wrt >= parent_rows.cols()) throw ParameterError("eval_mechanism_grad: wrt out of range");
    if (const auto* m = std::get_if<MlpMechanism>(&mech)) return detail::mlp_grad(*m, parent_rows, wrt);
    return detail::poly_grad(std::get<Polynomial>(mech), parent_rows, wrt);
}

// ---------------------------------------------------------------------------
// SCM specification and sampling
// ---------------------------------------------------------------------------

struct ScmSpec {
    Dag graph;
    std::map<int, Mechanism> mechanisms;  // one entry per node with >= 1 parent
    std::vector<NoiseSpec> noise;         // size d; roots are pure noise
    std::uint64_t seed = 0;
};

inline void validate(const ScmSpec& spec) {
    validate(spec.graph);
    if (static_cast<int>(spec.noise.size()) != spec.graph.d)
        throw ParameterError("ScmSpec: need one NoiseSpec per node");
    for (int v = 0; v < spec.graph.d; ++v) {
        const bool has_parents = spec.graph.in_degree(v) > 0;
        const bool has_mech = spec.mechanisms.count(v) > 0;
        if (has_parents != has_mech)
            throw ParameterError("ScmSpec: mechanisms must be assigned exactly to non-root nodes");
    }
}

// Ancestral sampling in topological order: roots are noise columns, internal
// nodes mechanism(parent columns) + noise. GP mechanisms are drawn lazily at
// the observed parent values during this pass.
inline Dataset sample_dataset(const ScmSpec& spec, Eigen::Index n, Rng& rng) {
    validate(spec);
    const TopOrder topo = topological_order(spec.graph);
    Matrix x(n, spec.graph.d);
    for (int v : topo.perm) {
        const Vector u = sample_noise(n, spec.noise[static_cast<std::size_t>(v)], rng);
        const std::vector<int> pa = spec.graph.parents(v);
        if (pa.empty()) {
            x.col(v) = u;
            continue;
        }
        Matrix parent_cols(n, static_cast<Eigen::Index>(pa.size()));
        for (std::size_t j = 0; j < pa.size(); ++j)
            parent_cols.col(static_cast<Eigen::Index>(j)) = x.col(pa[j]);
        const Mechanism& mech = spec.mechanisms.at(v);
        Vector f;
        if (std::holds_alternative<GpDraw>(mech))
            f = gp_mechanism_values(parent_cols, rng);
        else
            f = eval_mechanism(mech, parent_cols);
        x.col(v) = f + u;
    }
    return make_dataset(std::move(x));
}

// Exact score entries for a Gaussian-noise SCM with differentiable
// mechanisms, restricted to `active` (which must be an ancestral node set):
//   s_i = -(X_i - f_i(PA_i)) / sigma_i^2
//         + sum_{k in children(i) and active} d f_k / d X_i * (X_k - f_k(PA_k)) / sigma_k^2.
// Columns of the result follow the order of `active`.
inline Matrix analytic_score_subset(const ScmSpec& spec, const Dataset& data, const std::vector<int>& active) {
    validate(spec);
    if (data.d() != spec.graph.d) throw ParameterError("analytic_score: dataset / spec dimension mismatch");
    for (int v : active)
        if (spec.noise[static_cast<std::size_t>(v)].mode != NoiseMode::Gaussian)
            throw UnsupportedModelError("analytic_score requires Gaussian noise");

    std::vector<bool> is_active(static_cast<std::size_t>(spec.graph.d), false);
    for (int v : active) is_active[static_cast<std::size_t>(v)] = true;

    const Eigen::Index n = data.n();
    // Residuals (X_k - f_k(PA_k)) / sigma_k^2 and parent matrices, per active node.
    std::map<int, Vector> scaled_residual;
    std::map<int, Matrix> parent_cols;
    std::map<int, std::vector<int>> parent_ids;
    for (int v : active) {
        const std::vector<int> pa = spec.graph.parents(v);
        for (int p : pa)
            if (!is_active[static_cast<std::size_t>(p)])
                throw ParameterError("analytic_score: active set is not ancestral");
        const double sig2 = spec.noise[static_cast<std::size_t>(v)].sigma *
                            spec.noise[static_cast<std::size_t>(v)].sigma;
        Vector resid = data.values.col(v);
        if (!pa.empty()) {
            Matrix cols(n, static_cast<Eigen::Index>(pa.size()));
            for (std::size_t j = 0; j < pa.size(); ++j)
                cols.col(static_cast<Eigen::Index>(j)) = data.values.col(pa[j]);
            resid -= eval_mechanism(spec.mechanisms.at(v), cols);
            parent_cols[v] = std::move(cols);
        }
        parent_ids[v] = pa;
        scaled_residual[v] = resid / sig2;
    }

    Matrix score(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) {
        const int i = active[c];
        Vector s = -scaled_residual.at(i);
        for (int k : spec.graph.children(i)) {
            if (!is_active[static_cast<std::size_t>(k)]) continue;
            const std::vector<int>& pa = parent_ids.at(k);
            const int slot = static_cast<int>(std::find(pa.begin(), pa.end(), i) - pa.begin());
            const Vector grad = eval_mechanism_grad(spec.mechanisms.at(k), parent_cols.at(k), slot);
            s += grad.cwiseProduct(scaled_residual.at(k));
        }
        score.col(static_cast<Eigen::Index>(c)) = s;
    }
    return score;
}

inline Matrix analytic_score(const ScmSpec& spec, const Dataset& data) {
    std::vector<int> all(static_cast<std::size_t>(spec.graph.d));
    std::iota(all.begin(), all.end(), 0);
    return analytic_score_subset(spec, data, all);
}

// ---------------------------------------------------------------------------
// Random benchmark SCMs (ER/SF graph + GP or MLP mechanisms)
// ---------------------------------------------------------------------------

enum class MechanismKind { Gp, Mlp };

// Build a random SCM over `graph`: sigma_i ~ U(0.5, 1.0); optional noise
// transforms; GP mechanisms stay lazy; MLP mechanisms get their weights here
// and their normalization fixed by one calibration pass (ancestral sampling
// at n = 1000), so the spec is immutable afterwards.
inline ScmSpec make_random_scm(const Dag& graph, MechanismKind kind, NoiseMode noise_mode, std::uint64_t seed,
                               Eigen::Index calibration_n = 1000) {
    validate(graph);
    ScmSpec spec;
    spec.graph = graph;
    spec.seed = seed;

    Rng rng = substream(seed, "scm-spec");
    std::uniform_real_distribution<double> sig(0.5, 1.0);
    for (int v = 0; v < graph.d; ++v) {
        NoiseSpec ns;
        ns.sigma = sig(rng);
        ns.mode = noise_mode;
        if (noise_mode == NoiseMode::MlpTransformed) ns.transform = sample_noise_transform(rng);
        spec.noise.push_back(std::move(ns));
    }
    for (int v = 0; v < graph.d; ++v) {
        const int np = graph.in_degree(v);
        if (np == 0) continue;
        if (kind == MechanismKind::Gp)
            spec.mechanisms.emplace(v, GpDraw{});
        else
            spec.mechanisms.emplace(v, sample_mlp_mechanism(np, rng));
    }

    if (kind == MechanismKind::Mlp) {
        // Calibration pass: walk the graph once and set each MLP's norm to the
        // empirical std of its raw output column.
        Rng crng = substream(seed, "scm-calibrate");
        const TopOrder topo = topological_order(graph);
        Matrix x(calibration_n, graph.d);
        for (int v : topo.perm) {
            const Vector u = sample_noise(calibration_n, spec.noise[static_cast<std::size_t>(v)], crng);
            const std::vector<int> pa = graph.parents(v);
            if (pa.empty()) {
                x.col(v) = u;
                continue;
            }
            Matrix cols(calibration_n, static_cast<Eigen::Index>(pa.size()));
            for (std::size_t j = 0; j < pa.size(); ++j)
                cols.col(static_cast<Eigen::Index>(j)) = x.col(pa[j]);
            auto& mech = std::get<MlpMechanism>(spec.mechanisms.at(v));
            const Vector raw = detail::mlp_eval(mech, cols) * mech.norm;  // norm still 1
            const double sd = std::sqrt(sample_variance(raw));
            mech.norm = sd > 1e-12 ? sd : 1.0;
            x.col(v) = raw / mech.norm + u;
        }
    }
    return spec;
}

// Closed-form three-node fixture: X0 := U0, X1 := X0^2 + U1,
// X2 := X0^2 + X1^2 + U2, all noises standard normal.
inline ScmSpec three_node_quadratic_scm() {
    ScmSpec spec;
    spec.graph.d = 3;
    spec.graph.edges = {{0, 1}, {0, 2}, {1, 2}};
    spec.noise.assign(3, NoiseSpec{1.0, NoiseMode::Gaussian, std::nullopt});
    spec.mechanisms.emplace(1, Polynomial{{{1.0, {2}}}});
    spec.mechanisms.emplace(2, Polynomial{{{1.0, {2, 0}}, {1.0, {0, 2}}}});
    return spec;
}

}  // namespace scoresort

#endif  // SCORESORT_SCM_HPP
