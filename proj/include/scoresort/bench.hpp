#ifndef SCORESORT_BENCH_HPP
#define SCORESORT_BENCH_HPP

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scoresort/common.hpp"
#include "scoresort/dataset.hpp"
#include "scoresort/graph.hpp"
#include "scoresort/kernels.hpp"
#include "scoresort/metrics.hpp"
#include "scoresort/ordering.hpp"
#include "scoresort/scm.hpp"

namespace scoresort {

enum class GraphType { Er, Sf };
enum class Density { Sparse, Dense };
enum class Method { ScoreSort, Score, VarSort, R2Sort, Random };

inline std::string to_string(GraphType g) { return g == GraphType::Er ? "ER" : "SF"; }
inline std::string to_string(Density d) { return d == Density::Sparse ? "sparse" : "dense"; }
inline std::string to_string(MechanismKind m) { return m == MechanismKind::Gp ? "GP" : "MLP"; }
inline std::string to_string(NoiseMode m) { return m == NoiseMode::Gaussian ? "gaussian" : "mlp"; }
inline std::string to_string(Method m) {
    switch (m) {
        case Method::ScoreSort: return "scoresort";
        case Method::Score: return "score";
        case Method::VarSort: return "varsort";
        case Method::R2Sort: return "r2sort";
        case Method::Random: return "random";
    }
    return "?";
}

inline GraphType graph_type_from_string(const std::string& s) {
    if (s == "ER" || s == "er") return GraphType::Er;
    if (s == "SF" || s == "sf") return GraphType::Sf;
    throw ParameterError("unknown graph type: " + s);
}
inline Density density_from_string(const std::string& s) {
    if (s == "sparse") return Density::Sparse;
    if (s == "dense") return Density::Dense;
    throw ParameterError("unknown density: " + s);
}
inline MechanismKind mechanism_from_string(const std::string& s) {
    if (s == "GP" || s == "gp") return MechanismKind::Gp;
    if (s == "MLP" || s == "mlp") return MechanismKind::Mlp;
    throw ParameterError("unknown mechanism kind: " + s);
}
inline NoiseMode noise_from_string(const std::string& s) {
    if (s == "gaussian" || s == "gauss") return NoiseMode::Gaussian;
    if (s == "mlp") return NoiseMode::MlpTransformed;
    throw ParameterError("unknown noise mode: " + s);
}
inline Method method_from_string(const std::string& s) {
    if (s == "scoresort") return Method::ScoreSort;
    if (s == "score") return Method::Score;
    if (s == "varsort") return Method::VarSort;
    if (s == "r2sort") return Method::R2Sort;
    if (s == "random") return Method::Random;
    throw ParameterError("unknown method: " + s);
}

// Density schema: 5 nodes uses an edge probability, larger graphs an average
// edge count per node scaled with d.
inline ErDensity density_param(int d, Density density) {
    const bool dense = density == Density::Dense;
    switch (d) {
        case 5: return EdgeProbability{dense ? 0.4 : 0.1};
        case 10: return EdgesPerNode{dense ? 2.0 : 1.0};
        case 20: return EdgesPerNode{dense ? 4.0 : 1.0};
        case 50: return EdgesPerNode{dense ? 8.0 : 2.0};
        default: throw ParameterError("no density schema entry for d = " + std::to_string(d));
    }
}

// Attachment parameter for scale-free graphs under the same schema.
inline int sf_attachment(int d, Density density) {
    const ErDensity p = density_param(d, density);
    if (const auto* m = std::get_if<EdgesPerNode>(&p)) return std::max(1, static_cast<int>(m->m));
    return density == Density::Dense ? 2 : 1;  // d = 5
}

// ---------------------------------------------------------------------------
// Dataset generation cases (one synthetic benchmark unit)
// ---------------------------------------------------------------------------

struct GenerationParams {
    GraphType graph_type = GraphType::Er;
    int d = 5;
    Density density = Density::Sparse;
    MechanismKind mechanism = MechanismKind::Gp;
    NoiseMode noise_mode = NoiseMode::MlpTransformed;
    Eigen::Index n = 1000;
    std::uint64_t seed = 0;
};

inline std::string setting_key(const GenerationParams& p) {
    std::ostringstream os;
    os << (p.graph_type == GraphType::Er ? "er" : "sf") << "_d" << p.d << '_' << to_string(p.density) << '_'
       << (p.mechanism == MechanismKind::Gp ? "gp" : "mlp") << '_' << to_string(p.noise_mode) << "noise_n" << p.n;
    return os.str();
}

struct GeneratedCase {
    GenerationParams params;
    ScmSpec spec;  // spec.graph holds the ground truth
    Dataset data;
};

// Pure function of the parameters: replaying the same GenerationParams
// reproduces the graph, the SCM and the sample bit for bit.
inline GeneratedCase generate_case(const GenerationParams& p) {
    GeneratedCase out;
    out.params = p;

    Rng grng = substream(p.seed, "graph");
    Dag graph;
    if (p.graph_type == GraphType::Er)
        graph = sample_er(p.d, density_param(p.d, p.density), grng);
    else
        graph = sample_sf(p.d, sf_attachment(p.d, p.density), grng);

    out.spec = make_random_scm(graph, p.mechanism, p.noise_mode, p.seed);
    Rng drng = substream(p.seed, "data");
    out.data = sample_dataset(out.spec, p.n, drng);
    return out;
}

// --- manifest: flat key=value lines sufficient for exact regeneration ---

inline void write_manifest(const GeneratedCase& c, const std::string& graph_file, const std::string& data_file,
                           std::ostream& os) {
    os << "graph_file=" << graph_file << '\n';
    os << "data_file=" << data_file << '\n';
    os << "graph_type=" << to_string(c.params.graph_type) << '\n';
    os << "d=" << c.params.d << '\n';
    os << "density=" << to_string(c.params.density) << '\n';
    os << "mechanism=" << to_string(c.params.mechanism) << '\n';
    os << "noise=" << to_string(c.params.noise_mode) << '\n';
    os << "n=" << c.params.n << '\n';
    os << "seed=" << c.params.seed << '\n';
    os << "sigmas=";
    for (std::size_t i = 0; i < c.spec.noise.size(); ++i) {
        if (i) os << ',';
        os << format_full_precision(c.spec.noise[i].sigma);
    }
    os << '\n';
}

inline std::map<std::string, std::string> read_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

inline GenerationParams params_from_manifest(const std::map<std::string, std::string>& kv) {
    GenerationParams p;
    auto need = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw InputError("manifest is missing key '" + key + "'");
        return it->second;
    };
    p.graph_type = graph_type_from_string(need("graph_type"));
    p.d = std::stoi(need("d"));
    p.density = density_from_string(need("density"));
    p.mechanism = mechanism_from_string(need("mechanism"));
    p.noise_mode = noise_from_string(need("noise"));
    p.n = std::stol(need("n"));
    p.seed = std::stoull(need("seed"));
    return p;
}

// ---------------------------------------------------------------------------
// Benchmark plans and result rows
// ---------------------------------------------------------------------------

struct BenchPlan {
    std::vector<GraphType> graph_types{GraphType::Er};
    std::vector<int> sizes{5, 10, 20};
    std::vector<Density> densities{Density::Sparse, Density::Dense};
    std::vector<MechanismKind> mechanisms{MechanismKind::Gp};
    NoiseMode noise_mode = NoiseMode::MlpTransformed;
    Eigen::Index n = 1000;
    std::vector<int> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<Method> methods{Method::ScoreSort};
    double eta = 0.01;
    std::optional<double> bandwidth;         // empty: median heuristic
    bool standardize = false;
    std::uint64_t master_seed = 0;
    std::optional<double> prune_threshold;   // set: also prune + report SHD
    int workers = 1;
};

inline void validate(const BenchPlan& plan) {
    if (plan.graph_types.empty() || plan.sizes.empty() || plan.densities.empty() || plan.mechanisms.empty() ||
        plan.seeds.empty() || plan.methods.empty())
        throw ParameterError("bench plan must list at least one graph type, size, density, mechanism, seed and method");
    for (int d : plan.sizes) density_param(d, Density::Sparse);  // schema coverage check
    if (plan.workers < 1) throw ParameterError("workers must be >= 1");
}

struct ResultRow {
    std::string method;
    std::string graph_type;
    int d = 0;
    std::string density;
    std::string mechanism;
    std::string noise_mode;
    std::uint64_t seed = 0;  // derived generation seed; re-runs a row in isolation
    double fnr = 0.0;
    double nu = 0.0;
    std::optional<int> shd_value;
    double runtime_ms = 0.0;
    std::string kernel_bandwidth;  // "median" or a fixed value
    double ridge_eta = 0.0;
};

inline std::string results_csv_header() {
    return "method,graph_type,d,density,mechanism,noise_mode,seed,fnr_pi,nu,shd,runtime_ms,kernel_bandwidth,ridge_eta";
}

inline std::string to_csv_line(const ResultRow& r) {
    std::ostringstream os;
    os << r.method << ',' << r.graph_type << ',' << r.d << ',' << r.density << ',' << r.mechanism << ','
       << r.noise_mode << ',' << r.seed << ',' << format_full_precision(r.fnr) << ','
       << format_full_precision(r.nu) << ',';
    if (r.shd_value) os << *r.shd_value;
    os << ',' << format_full_precision(r.runtime_ms) << ',' << r.kernel_bandwidth << ','
       << format_full_precision(r.ridge_eta);
    return os.str();
}

inline std::vector<ResultRow> read_results_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("results CSV is empty");
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() == 12) cells.push_back("");  // trailing empty field
        if (cells.size() != 13) throw InputError("results CSV: bad column count");
        ResultRow r;
        r.method = cells[0];
        r.graph_type = cells[1];
        r.d = std::stoi(cells[2]);
        r.density = cells[3];
        r.mechanism = cells[4];
        r.noise_mode = cells[5];
        r.seed = std::stoull(cells[6]);
        r.fnr = std::stod(cells[7]);
        r.nu = std::stod(cells[8]);
        if (!cells[9].empty()) r.shd_value = std::stoi(cells[9]);
        r.runtime_ms = std::stod(cells[10]);
        r.kernel_bandwidth = cells[11];
        r.ridge_eta = std::stod(cells[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Running a plan
// ---------------------------------------------------------------------------

// Derived per-run generation seed: independent of scheduling, distinct per
// (master seed, setting, seed index).
inline std::uint64_t derive_run_seed(std::uint64_t master, const std::string& setting, int seed_index) {
    return mix64(master ^ fnv1a(setting) ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(seed_index + 1)));
}

inline TopOrder run_method(Method method, const Dataset& data, const BenchPlan& plan, std::uint64_t run_seed) {
    OrderingConfig cfg;
    cfg.ridge = plan.eta;
    cfg.fixed_bandwidth = plan.bandwidth;
    switch (method) {
        case Method::ScoreSort: return score_sort(data, cfg);
        case Method::Score: return score_order(data, cfg);
        case Method::VarSort: return var_sort(data);
        case Method::R2Sort: return r2_sort(data, KernelConfig{plan.bandwidth.value_or(0.0), plan.eta});
        case Method::Random: {
            Rng rng = substream(run_seed, "random-order");
            return random_order(static_cast<int>(data.d()), rng);
        }
    }
    throw ParameterError("unknown method");
}

struct BenchOutcome {
    std::vector<ResultRow> rows;
    std::vector<std::string> failures;  // one line per skipped run
};

inline BenchOutcome run_bench(const BenchPlan& plan) {
    validate(plan);

    struct Task {
        GenerationParams params;
        int seed_index = 0;
    };
    std::vector<Task> tasks;
    for (GraphType gt : plan.graph_types)
        for (int d : plan.sizes)
            for (Density density : plan.densities)
                for (MechanismKind mech : plan.mechanisms)
                    for (int seed_index : plan.seeds) {
                        GenerationParams p;
                        p.graph_type = gt;
                        p.d = d;
                        p.density = density;
                        p.mechanism = mech;
                        p.noise_mode = plan.noise_mode;
                        p.n = plan.n;
                        p.seed = derive_run_seed(plan.master_seed, setting_key(p), seed_index);
                        tasks.push_back({p, seed_index});
                    }

    std::vector<std::vector<ResultRow>> row_slots(tasks.size());
    std::vector<std::vector<std::string>> fail_slots(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            GeneratedCase gen;
            try {
                gen = generate_case(task.params);
            } catch (const std::exception& e) {
                fail_slots[t].push_back(setting_key(task.params) + " seed " + std::to_string(task.params.seed) +
                                        ": generation failed: " + e.what());
                continue;
            }
            const Dataset& working = plan.standardize ? standardized(gen.data) : gen.data;
            for (Method method : plan.methods) {
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    const TopOrder order = run_method(method, working, plan, task.params.seed);
                    const auto t1 = std::chrono::steady_clock::now();
                    const OrderEval ev = fnr_pi(order, gen.spec.graph);
                    ResultRow row;
                    row.method = to_string(method);
                    row.graph_type = to_string(task.params.graph_type);
                    row.d = task.params.d;
                    row.density = to_string(task.params.density);
                    row.mechanism = to_string(task.params.mechanism);
                    row.noise_mode = to_string(task.params.noise_mode);
                    row.seed = task.params.seed;
                    row.fnr = ev.fnr_pi;
                    row.nu = ev.nu;
                    if (plan.prune_threshold) {
                        const Dag pred = prune_edges(working, order, *plan.prune_threshold,
                                                     KernelConfig{plan.bandwidth.value_or(0.0), plan.eta});
                        row.shd_value = shd(pred, gen.spec.graph);
                    }
                    row.runtime_ms =
                        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
                    row.kernel_bandwidth = plan.bandwidth ? format_full_precision(*plan.bandwidth) : "median";
                    row.ridge_eta = plan.eta;
                    row_slots[t].push_back(std::move(row));
                } catch (const std::exception& e) {
                    fail_slots[t].push_back(setting_key(task.params) + " seed " + std::to_string(task.params.seed) +
                                            " method " + to_string(method) + ": " + e.what());
                }
            }
        }
    };

    const int n_workers = std::min<int>(plan.workers, static_cast<int>(tasks.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    BenchOutcome out;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (auto& r : row_slots[t]) out.rows.push_back(std::move(r));
        for (auto& f : fail_slots[t]) out.failures.push_back(std::move(f));
    }
    if (out.rows.empty()) throw Error("bench: every run failed");
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation (median / IQR per method x setting, as in the reported tables)
// ---------------------------------------------------------------------------

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ParameterError("quantile of empty set");
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SummaryRow {
    std::string method;
    std::string setting;  // graph_type/d/density/mechanism/noise
    int runs = 0;
    double fnr_median = 0.0;
    double fnr_q25 = 0.0;
    double fnr_q75 = 0.0;
    double nu_median = 0.0;
};

inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const ResultRow& r : rows) {
        std::ostringstream setting;
        setting << r.graph_type << " d=" << r.d << ' ' << r.density << ' ' << r.mechanism << ' ' << r.noise_mode;
        groups[{r.method, setting.str()}].push_back(r.fnr);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, fnrs] : groups) {
        SummaryRow s;
        s.method = key.first;
        s.setting = key.second;
        s.runs = static_cast<int>(fnrs.size());
        s.fnr_median = quantile(fnrs, 0.5);
        s.fnr_q25 = quantile(fnrs, 0.25);
        s.fnr_q75 = quantile(fnrs, 0.75);
        s.nu_median = 1.0 - s.fnr_median;
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_summary(const std::vector<SummaryRow>& summary, bool pruned_shd, std::ostream& os) {
    os << "method          setting                          runs  fnr_med  fnr_q25  fnr_q75  nu_med\n";
    for (const SummaryRow& s : summary) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-15s %-32s %4d  %7.3f  %7.3f  %7.3f  %6.3f\n", s.method.c_str(),
                      s.setting.c_str(), s.runs, s.fnr_median, s.fnr_q25, s.fnr_q75, s.nu_median);
        os << buf;
    }
    if (pruned_shd)
        os << "note: SHD columns use the relative-MSE-gain pruning heuristic, not a CAM-style pruner.\n";
}

// --- plan file: flat key=value lines, comma-separated lists ---

inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        const auto dash = tok.find('-', tok[0] == '-' ? 1 : 0);
        if (dash != std::string::npos) {
            const int a = std::stoi(tok.substr(0, dash));
            const int b = std::stoi(tok.substr(dash + 1));
            for (int v = a; v <= b; ++v) out.push_back(v);
        } else {
            out.push_back(std::stoi(tok));
        }
    }
    return out;
}

inline BenchPlan plan_from_key_values(const std::map<std::string, std::string>& kv) {
    BenchPlan plan;
    auto split = [](const std::string& text) {
        std::vector<std::string> out;
        std::istringstream is(text);
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) out.push_back(tok);
        return out;
    };
    for (const auto& [key, value] : kv) {
        if (key == "graph_types") {
            plan.graph_types.clear();
            for (const auto& s : split(value)) plan.graph_types.push_back(graph_type_from_string(s));
        } else if (key == "sizes") {
            plan.sizes = parse_int_list(value);
        } else if (key == "densities") {
            plan.densities.clear();
            for (const auto& s : split(value)) plan.densities.push_back(density_from_string(s));
        } else if (key == "mechanisms") {
            plan.mechanisms.clear();
            for (const auto& s : split(value)) plan.mechanisms.push_back(mechanism_from_string(s));
        } else if (key == "noise") {
            plan.noise_mode = noise_from_string(value);
        } else if (key == "n") {
            plan.n = std::stol(value);
        } else if (key == "seeds") {
            plan.seeds = parse_int_list(value);
        } else if (key == "methods") {
            plan.methods.clear();
            for (const auto& s : split(value)) plan.methods.push_back(method_from_string(s));
        } else if (key == "eta") {
            plan.eta = std::stod(value);
        } else if (key == "bandwidth") {
            if (value != "median") plan.bandwidth = std::stod(value);
        } else if (key == "standardize") {
            plan.standardize = value == "1" || value == "true";
        } else if (key == "master_seed") {
            plan.master_seed = std::stoull(value);
        } else if (key == "prune_threshold") {
            plan.prune_threshold = std::stod(value);
        } else if (key == "workers") {
            plan.workers = std::stoi(value);
        } else {
            throw InputError("unknown plan key: " + key);
        }
    }
    validate(plan);
    return plan;
}

inline BenchPlan read_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open plan: " + path);
    return plan_from_key_values(read_key_values(is));
}

}  // namespace scoresort

#endif  // SCORESORT_BENCH_HPP
