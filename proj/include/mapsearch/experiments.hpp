// experiments.hpp -- reproducible experiment runners over generated networks:
// width-gap measurement, solution-quality grids, and evaluation statistics,
// with CSV emission. Every instance derives its own rng streams from the
// master seed, so results are byte-identical across reruns and thread counts.
#ifndef MAPSEARCH_EXPERIMENTS_HPP
#define MAPSEARCH_EXPERIMENTS_HPP

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bn.hpp"
#include "graph.hpp"
#include "inference.hpp"
#include "netgen.hpp"
#include "rng.hpp"
#include "search.hpp"
#include "trace.hpp"

namespace mapsearch {

// A method solves an instance when its score matches the exact MAP score to
// this relative tolerance (scores are compared, not assignments).
inline constexpr double kSolvedRelTolerance = 1e-9;

struct QualityConfig {
    int instances = 100; // per bias cell; structures are shared across biases
    GenMethod gen_method = GenMethod::kEdgeProb;
    int n = 50;
    int c = 8;
    double p = 0.05;
    std::vector<double> bias_grid{0.0, 0.125, 0.25, 0.375, 0.5};
    std::vector<MethodSpec> methods{all_methods().begin(), all_methods().end()};
    int budget = 150;
    int width_cap = 22; // skip instances whose constrained min-fill width exceeds this
    int max_map_vars = 25;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const {
        if (instances < 1) throw std::invalid_argument("instances must be >= 1");
        if (n < 1) throw std::invalid_argument("N must be >= 1");
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
        if (gen_method == GenMethod::kConnectivity && c < 1)
            throw std::invalid_argument("connectivity c must be >= 1");
        if (bias_grid.empty()) throw std::invalid_argument("bias grid must not be empty");
        for (double b : bias_grid)
            if (!(b >= 0.0 && b <= 0.5))
                throw std::invalid_argument("bias values must lie in [0, 0.5]");
        if (methods.empty()) throw std::invalid_argument("method list must not be empty");
        if (budget < 1) throw std::invalid_argument("budget must be >= 1");
        if (width_cap < 0) throw std::invalid_argument("width cap must be >= 0");
        if (max_map_vars < 0) throw std::invalid_argument("max_map_vars must be >= 0");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }
};

struct QualityRow {
    int instance = 0;
    double bias = 0.0;
    MethodSpec method{};
    int map_size = 0;
    double exact_log2 = 0.0;
    double approx_log2 = 0.0;
    bool solved = false;
    int evaluations_used = 0;
    int evaluations_to_best = 0;
    int peaks_found = 0;
    int first_peak_evaluations = -1; // kept for analysis; not a CSV column
};

// Solved-correctly counts for one (method, bias) cell.
struct QualityRecord {
    std::string method;
    double bias = 0.0;
    int instances = 0;
    int solved = 0;
};

struct QualityOutcome {
    std::vector<QualityRow> rows; // instance-major, then bias-grid order, then method order
    std::vector<QualityRecord> summaries;
    int requested = 0;
    int skipped = 0; // constrained width above the cap
};

struct EvalStatsRecord {
    std::string method;
    int instances = 0;
    double mean = 0.0;
    double stdev = 0.0;
    double max = 0.0;
};

struct WidthConfig {
    int instances = 100; // total, spread round-robin over the c range (method 1)
    GenMethod gen_method = GenMethod::kConnectivity;
    int n = 100;
    int c_min = 1;
    int c_max = 20;
    double p = 0.05;
    int max_map_vars = 25;
    int min_roots = 10; // regenerate structures with fewer roots
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const {
        if (instances < 1) throw std::invalid_argument("instances must be >= 1");
        if (n < 1) throw std::invalid_argument("N must be >= 1");
        if (gen_method == GenMethod::kConnectivity && (c_min < 1 || c_max < c_min))
            throw std::invalid_argument("need 1 <= c_min <= c_max");
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
        if (max_map_vars < 0) throw std::invalid_argument("max_map_vars must be >= 0");
        if (min_roots < 0) throw std::invalid_argument("min_roots must be >= 0");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }
};

struct WidthRow {
    int instance = 0;
    int c = 0;
    int map_size = 0;
    int unconstrained_width = 0;
    int constrained_width = 0;
};

// Aggregate widths for one generator bucket.
struct WidthRecord {
    int c = 0;
    int instances = 0;
    WidthStats unconstrained;
    WidthStats constrained;
};

struct WidthOutcome {
    std::vector<WidthRow> rows;
    std::vector<WidthRecord> per_c;
    WidthStats pooled_unconstrained;
    WidthStats pooled_constrained;
    int requested = 0;
};

namespace detail {

// Per-instance rng stream tags; see mix_seed.
inline constexpr std::uint64_t kStreamStructure = 1;
inline constexpr std::uint64_t kStreamMapVars = 2;
inline constexpr std::uint64_t kStreamQuantify = 3;
inline constexpr std::uint64_t kStreamEvidence = 4;
inline constexpr std::uint64_t kStreamSearch = 5;

// Run fn(0..count-1) on `threads` workers. Results must be written to
// pre-sized per-index slots; the first exception wins and is rethrown.
template <typename Fn>
inline void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// MAP candidates for the quality experiment: roots that are not leaves, so S
// can never collide with the leaf evidence (isolated variables are both).
inline std::vector<VarId> internal_roots(const Dag& dag) {
    std::vector<char> has_child(static_cast<std::size_t>(dag.n), 0);
    for (VarId v = 0; v < dag.n; ++v)
        for (VarId p : dag.parents[static_cast<std::size_t>(v)])
            has_child[static_cast<std::size_t>(p)] = 1;
    std::vector<VarId> out;
    for (VarId v : dag.roots())
        if (has_child[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

// Uniform subset of size <= cap, sorted; mirrors select_map_vars but over an
// explicit candidate pool.
inline std::vector<VarId> select_from(std::vector<VarId> pool, int cap, Rng& rng) {
    if (static_cast<int>(pool.size()) <= cap) return pool;
    for (int i = 0; i < cap; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(rng.uniform_int(pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(cap));
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline double log2_tolerance_band() { return std::log2(1.0 + kSolvedRelTolerance); }

} // namespace detail

// One quality-experiment instance: one structure and MAP set, re-quantified
// per bias, every method run against the exact MAP. Returns nullopt when the
// constrained width exceeds the cap.
inline std::optional<std::vector<QualityRow>> run_quality_instance(const QualityConfig& cfg,
                                                                   int instance) {
    const std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(instance));
    GenConfig gen;
    gen.method = cfg.gen_method;
    gen.n = cfg.n;
    gen.c = cfg.c;
    gen.p = cfg.p;
    gen.max_map_vars = cfg.max_map_vars;
    Rng rng_struct(mix_seed(base, detail::kStreamStructure));
    const Dag dag = gen_structure(gen, rng_struct);

    Rng rng_s(mix_seed(base, detail::kStreamMapVars));
    const std::vector<VarId> S =
        detail::select_from(detail::internal_roots(dag), cfg.max_map_vars, rng_s);

    const InteractionGraph mg = moral_graph_of(dag.n, dag.parents);
    const EliminationOrder unconstrained = min_fill_order(mg);
    const EliminationOrder constrained = min_fill_order(mg, S);
    if (order_width(mg, constrained) > cfg.width_cap) return std::nullopt;

    const double band = detail::log2_tolerance_band();
    std::vector<QualityRow> rows;
    rows.reserve(cfg.bias_grid.size() * cfg.methods.size());
    for (std::size_t j = 0; j < cfg.bias_grid.size(); ++j) {
        const double bias = cfg.bias_grid[j];
        Rng rng_q(mix_seed(mix_seed(base, detail::kStreamQuantify), j));
        const BayesianNetwork net = quantify(dag, bias, rng_q);
        Rng rng_e(mix_seed(mix_seed(base, detail::kStreamEvidence), j));
        const Assignment e = sample_evidence(net, rng_e);

        const auto exact = exact_map(net, S, e, constrained);
        if (!exact)
            throw std::logic_error("ancestrally sampled evidence cannot have probability zero");
        const double exact_log2 = exact->value.log2();

        const Trace trace(net, unconstrained);
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            const MethodSpec& spec = cfg.methods[m];
            const std::uint64_t mseed =
                mix_seed(mix_seed(base, detail::kStreamSearch), j * 64 + m);
            const SearchResult res =
                run_method(net, S, e, trace, unconstrained, spec, mseed, cfg.budget);
            const double approx_log2 = res.best.value.log2();
            if (approx_log2 > exact_log2 + band)
                throw std::logic_error("search scored above the exact MAP; inference bug");
            QualityRow row;
            row.instance = instance;
            row.bias = bias;
            row.method = spec;
            row.map_size = static_cast<int>(S.size());
            row.exact_log2 = exact_log2;
            row.approx_log2 = approx_log2;
            row.solved = approx_log2 >= exact_log2 - band;
            row.evaluations_used = res.evaluations_used;
            row.evaluations_to_best = res.evaluations_to_best;
            row.peaks_found = res.peaks_found;
            row.first_peak_evaluations = res.first_peak_evaluations;
            rows.push_back(row);
        }
    }
    return rows;
}

inline QualityOutcome run_quality_experiment(const QualityConfig& cfg) {
    cfg.validate();
    std::vector<std::optional<std::vector<QualityRow>>> per_instance(
        static_cast<std::size_t>(cfg.instances));
    detail::parallel_for(cfg.instances, cfg.threads,
                         [&](int i) { per_instance[static_cast<std::size_t>(i)] =
                                          run_quality_instance(cfg, i); });

    QualityOutcome out;
    out.requested = cfg.instances;
    for (auto& chunk : per_instance) {
        if (!chunk) {
            ++out.skipped;
            continue;
        }
        out.rows.insert(out.rows.end(), chunk->begin(), chunk->end());
    }
    for (const MethodSpec& spec : cfg.methods)
        for (double bias : cfg.bias_grid) {
            QualityRecord rec;
            rec.method = method_token(spec);
            rec.bias = bias;
            for (const QualityRow& r : out.rows) {
                if (r.bias != bias || method_token(r.method) != rec.method) continue;
                ++rec.instances;
                if (r.solved) ++rec.solved;
            }
            out.summaries.push_back(std::move(rec));
        }
    return out;
}

// Per-method mean/stdev/max of evaluations_to_best over the given rows
// (population stdev). Order follows first appearance.
inline std::vector<EvalStatsRecord> eval_statistics(const std::vector<QualityRow>& rows) {
    std::vector<std::string> order;
    std::vector<std::vector<double>> samples;
    for (const QualityRow& r : rows) {
        const std::string tok = method_token(r.method);
        std::size_t k = 0;
        while (k < order.size() && order[k] != tok) ++k;
        if (k == order.size()) {
            order.push_back(tok);
            samples.emplace_back();
        }
        samples[k].push_back(static_cast<double>(r.evaluations_to_best));
    }
    std::vector<EvalStatsRecord> recs;
    for (std::size_t k = 0; k < order.size(); ++k) {
        EvalStatsRecord rec;
        rec.method = order[k];
        rec.instances = static_cast<int>(samples[k].size());
        double sum = 0.0, mx = 0.0;
        for (double v : samples[k]) {
            sum += v;
            mx = std::max(mx, v);
        }
        rec.mean = sum / static_cast<double>(samples[k].size());
        double ss = 0.0;
        for (double v : samples[k]) ss += (v - rec.mean) * (v - rec.mean);
        rec.stdev = std::sqrt(ss / static_cast<double>(samples[k].size()));
        rec.max = mx;
        recs.push_back(std::move(rec));
    }
    return recs;
}

inline WidthRow run_width_instance(const WidthConfig& cfg, int instance) {
    const std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(instance));
    const int span = cfg.c_max - cfg.c_min + 1;
    const int c = cfg.c_min + instance % span;

    Rng rng_struct(mix_seed(base, detail::kStreamStructure));
    Dag dag;
    for (int attempt = 0; attempt < 500; ++attempt) {
        dag = cfg.gen_method == GenMethod::kConnectivity
                  ? gen_structure_connectivity(cfg.n, c, rng_struct)
                  : gen_structure_edge_prob(cfg.n, cfg.p, rng_struct);
        if (static_cast<int>(dag.roots().size()) >= cfg.min_roots) break;
    }
    Rng rng_s(mix_seed(base, detail::kStreamMapVars));
    const std::vector<VarId> S = select_map_vars(dag, cfg.max_map_vars, rng_s);

    const InteractionGraph mg = moral_graph_of(dag.n, dag.parents);
    WidthRow row;
    row.instance = instance;
    row.c = cfg.gen_method == GenMethod::kConnectivity ? c : 0;
    row.map_size = static_cast<int>(S.size());
    row.unconstrained_width = order_width(mg, min_fill_order(mg));
    row.constrained_width = order_width(mg, min_fill_order(mg, S));
    return row;
}

inline WidthOutcome run_width_experiment(const WidthConfig& cfg) {
    cfg.validate();
    WidthOutcome out;
    out.requested = cfg.instances;
    out.rows.resize(static_cast<std::size_t>(cfg.instances));
    detail::parallel_for(cfg.instances, cfg.threads, [&](int i) {
        out.rows[static_cast<std::size_t>(i)] = run_width_instance(cfg, i);
    });

    std::vector<int> pool_u, pool_c;
    for (const WidthRow& r : out.rows) {
        pool_u.push_back(r.unconstrained_width);
        pool_c.push_back(r.constrained_width);
    }
    out.pooled_unconstrained = width_stats(pool_u);
    out.pooled_constrained = width_stats(pool_c);

    const int span = cfg.c_max - cfg.c_min + 1;
    for (int c = cfg.c_min; c <= cfg.c_min + span - 1; ++c) {
        std::vector<int> u, k;
        for (const WidthRow& r : out.rows)
            if (r.c == c) {
                u.push_back(r.unconstrained_width);
                k.push_back(r.constrained_width);
            }
        if (u.empty()) continue;
        WidthRecord rec;
        rec.c = c;
        rec.instances = static_cast<int>(u.size());
        rec.unconstrained = width_stats(u);
        rec.constrained = width_stats(k);
        out.per_c.push_back(std::move(rec));
    }
    return out;
}

// ---- CSV emission ----

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

} // namespace detail

inline void write_quality_csv(std::ostream& os, const QualityConfig& cfg,
                              const QualityOutcome& out) {
    os << "experiment,seed,gen_method,n,c,p,bias,method,instance,map_size,exact_log2,"
          "approx_log2,solved,evaluations_used,evaluations_to_best,peaks_found\n";
    for (const QualityRow& r : out.rows) {
        os << "quality," << detail::fmt(cfg.seed) << ','
           << static_cast<int>(cfg.gen_method) << ',' << cfg.n << ',' << cfg.c << ','
           << detail::fmt(cfg.p) << ',' << detail::fmt(r.bias) << ','
           << method_token(r.method) << ',' << r.instance << ',' << r.map_size << ','
           << detail::fmt(r.exact_log2) << ',' << detail::fmt(r.approx_log2) << ','
           << (r.solved ? 1 : 0) << ',' << r.evaluations_used << ','
           << r.evaluations_to_best << ',' << r.peaks_found << '\n';
    }
}

inline void write_width_csv(std::ostream& os, const WidthConfig& cfg, const WidthOutcome& out) {
    os << "experiment,seed,gen_method,n,c,p,instance,map_size,unconstrained_width,"
          "constrained_width\n";
    for (const WidthRow& r : out.rows) {
        os << "widths," << detail::fmt(cfg.seed) << ',' << static_cast<int>(cfg.gen_method)
           << ',' << cfg.n << ',' << r.c << ',' << detail::fmt(cfg.p) << ',' << r.instance
           << ',' << r.map_size << ',' << r.unconstrained_width << ','
           << r.constrained_width << '\n';
    }
}

inline void write_evalstats_csv(std::ostream& os, const QualityConfig& cfg, double bias,
                                const std::vector<EvalStatsRecord>& recs) {
    os << "experiment,seed,gen_method,n,c,p,bias,method,instances,mean_evals_to_best,"
          "stdev_evals_to_best,max_evals_to_best\n";
    for (const EvalStatsRecord& r : recs) {
        os << "evalstats," << detail::fmt(cfg.seed) << ',' << static_cast<int>(cfg.gen_method)
           << ',' << cfg.n << ',' << cfg.c << ',' << detail::fmt(cfg.p) << ','
           << detail::fmt(bias) << ',' << r.method << ',' << r.instances << ','
           << detail::fmt(r.mean) << ',' << detail::fmt(r.stdev) << ',' << detail::fmt(r.max)
           << '\n';
    }
}

} // namespace mapsearch

#endif
