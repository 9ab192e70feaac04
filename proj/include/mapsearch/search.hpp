// search.hpp -- MAP by local search over the instantiations of S: hill
// climbing with random-walk restarts and taboo search, with four
// initialization schemes. All neighbor scoring goes through one
// Trace::differentiate pass per step, which is the unit of the evaluation
// budget; initializations cost 0 (rand), 1 (mpe, ml) or |S| (seq) such passes.
#ifndef MAPSEARCH_SEARCH_HPP
#define MAPSEARCH_SEARCH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bn.hpp"
#include "inference.hpp"
#include "rng.hpp"
#include "trace.hpp"

namespace mapsearch {

enum class InitScheme { kRandom, kMpe, kMl, kSeq };
enum class SearchMethod { kNone, kHill, kTaboo }; // kNone = report the bare initialization

struct SearchConfig {
    SearchMethod method = SearchMethod::kHill;
    InitScheme init = InitScheme::kRandom;
    int budget = 150;            // max network evaluations, counting the init's cost
    int restart_walk_length = 3; // random moves taken after a peak
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (budget < 1) throw std::invalid_argument("search budget must be >= 1");
        if (restart_walk_length < 1)
            throw std::invalid_argument("restart_walk_length must be >= 1");
    }
};

struct SearchResult {
    MapSolution best; // assignment over S only
    int evaluations_used = 0;
    int evaluations_to_best = 0; // includes initialization evaluations
    int peaks_found = 0;
    int first_peak_evaluations = -1; // -1 when no peak was reached in budget
    std::vector<std::pair<int, double>> visited_best_trace; // (evaluation index, log2 score)
};

// The eleven method rows of the experiment grid ("rand" alone is not one of
// them: an unsearched uniform guess is not worth a row).
struct MethodSpec {
    InitScheme init;
    SearchMethod method;
};

inline const std::array<MethodSpec, 11>& all_methods() {
    static const std::array<MethodSpec, 11> m = {{
        {InitScheme::kRandom, SearchMethod::kHill},
        {InitScheme::kRandom, SearchMethod::kTaboo},
        {InitScheme::kMl, SearchMethod::kNone},
        {InitScheme::kMl, SearchMethod::kHill},
        {InitScheme::kMl, SearchMethod::kTaboo},
        {InitScheme::kMpe, SearchMethod::kNone},
        {InitScheme::kMpe, SearchMethod::kHill},
        {InitScheme::kMpe, SearchMethod::kTaboo},
        {InitScheme::kSeq, SearchMethod::kNone},
        {InitScheme::kSeq, SearchMethod::kHill},
        {InitScheme::kSeq, SearchMethod::kTaboo},
    }};
    return m;
}

inline std::string method_token(const MethodSpec& spec) {
    std::string s;
    switch (spec.init) {
    case InitScheme::kRandom: s = "rand"; break;
    case InitScheme::kMpe: s = "mpe"; break;
    case InitScheme::kMl: s = "ml"; break;
    case InitScheme::kSeq: s = "seq"; break;
    }
    switch (spec.method) {
    case SearchMethod::kNone: break;
    case SearchMethod::kHill: s += "-hill"; break;
    case SearchMethod::kTaboo: s += "-taboo"; break;
    }
    return s;
}

inline std::optional<MethodSpec> parse_method(std::string_view token) {
    MethodSpec spec{InitScheme::kRandom, SearchMethod::kNone};
    std::string_view init = token;
    if (auto dash = token.find('-'); dash != std::string_view::npos) {
        init = token.substr(0, dash);
        const std::string_view tail = token.substr(dash + 1);
        if (tail == "hill")
            spec.method = SearchMethod::kHill;
        else if (tail == "taboo")
            spec.method = SearchMethod::kTaboo;
        else
            return std::nullopt;
    }
    if (init == "rand")
        spec.init = InitScheme::kRandom;
    else if (init == "mpe")
        spec.init = InitScheme::kMpe;
    else if (init == "ml")
        spec.init = InitScheme::kMl;
    else if (init == "seq")
        spec.init = InitScheme::kSeq;
    else
        return std::nullopt;
    return spec;
}

namespace detail {

struct StateKeyHash {
    std::size_t operator()(const std::vector<int>& key) const {
        // FNV-1a over the value words
        std::uint64_t h = 1469598103934665603ull;
        for (int v : key) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

class Searcher {
public:
    Searcher(const BayesianNetwork& net, const std::vector<VarId>& S, const Assignment& e,
             const Trace& trace, const EliminationOrder& order, const SearchConfig& cfg)
        : net_(net), e_(e), trace_(trace), order_(order), cfg_(cfg), rng_(cfg.rng_seed),
          ws_(trace.make_workspace()), state_(e) {
        cfg.validate();
        s_ = S;
        std::sort(s_.begin(), s_.end());
        for (VarId v : s_) {
            if (v < 0 || v >= net.size())
                throw std::invalid_argument("MAP variable id out of range");
            if (e.is_bound(v))
                throw std::invalid_argument("MAP variable " + net.variable(v).name +
                                            " is fixed by the evidence");
        }
        const int init_cost = cost_of_init();
        if (cfg.budget < init_cost)
            throw std::invalid_argument("budget " + std::to_string(cfg.budget) +
                                        " cannot cover the initialization (" +
                                        std::to_string(init_cost) + " evaluations)");
    }

    SearchResult run() {
        initialize();
        // Seed the tracker with the initialization's own score. This forward
        // pass is bookkeeping, not a counted evaluation: the init schemes
        // already paid their published evaluation price.
        const ScaledReal v0 = trace_.evaluate(state_, ws_);
        best_ = project(state_);
        best_value_ = v0;
        result_.evaluations_to_best = evals_;
        result_.visited_best_trace.emplace_back(evals_, v0.log2());

        if (cfg_.method != SearchMethod::kNone) {
            while (evals_ < cfg_.budget) step();
        }
        result_.evaluations_used = evals_;
        result_.best = MapSolution{std::move(best_), best_value_};
        return std::move(result_);
    }

private:
    const BayesianNetwork& net_;
    std::vector<VarId> s_;
    const Assignment& e_;
    const Trace& trace_;
    const EliminationOrder& order_;
    const SearchConfig& cfg_;
    Rng rng_;
    Trace::Workspace ws_;

    Assignment state_; // evidence plus current values over S
    Assignment best_;  // over S only
    ScaledReal best_value_{0.0};
    int evals_ = 0;
    SearchResult result_;
    std::unordered_set<std::vector<int>, StateKeyHash> visited_;

    int cost_of_init() const {
        switch (cfg_.init) {
        case InitScheme::kRandom: return 0;
        case InitScheme::kMpe:
        case InitScheme::kMl: return 1;
        case InitScheme::kSeq: return static_cast<int>(s_.size());
        }
        return 0;
    }

    Assignment project(const Assignment& full) const {
        Assignment p(full.size());
        for (VarId v : s_) p.bind(v, full.value(v));
        return p;
    }

    std::vector<int> key_of(const Assignment& a) const {
        std::vector<int> k;
        k.reserve(s_.size());
        for (VarId v : s_) k.push_back(a.value(v));
        return k;
    }

    // Would the current state, with swap_v moved to swap_x (swap_v = -1 for
    // no move), coincide with the incumbent best assignment?
    bool matches_best(VarId swap_v, int swap_x) const {
        for (VarId u : s_) {
            const int cu = u == swap_v ? swap_x : state_.value(u);
            if (best_.value(u) != cu) return false;
        }
        return true;
    }

    // Record a strict improvement. The same state can be re-scored along a
    // different arithmetic path (forward value vs derivative entries, or
    // derivative entries at two different bindings) and land an ulp above its
    // earlier score; such re-sightings of the incumbent must not advance
    // evaluations_to_best, so candidates matching the incumbent are ignored.
    void consider(VarId swap_v, int swap_x, ScaledReal score) {
        if (!(score > best_value_) || matches_best(swap_v, swap_x)) return;
        Assignment nb = project(state_);
        if (swap_v >= 0) nb.rebind(swap_v, swap_x);
        best_value_ = score;
        best_ = std::move(nb);
        result_.evaluations_to_best = evals_;
        result_.visited_best_trace.emplace_back(evals_, score.log2());
    }

    void initialize() {
        switch (cfg_.init) {
        case InitScheme::kRandom:
            for (VarId v : s_)
                state_.bind(v, static_cast<int>(
                                   rng_.uniform_int(static_cast<std::uint64_t>(net_.cardinality(v)))));
            break;
        case InitScheme::kMpe: {
            evals_ = 1;
            const auto sol = mpe(net_, e_, order_);
            if (!sol)
                throw std::runtime_error("MPE initialization: evidence has probability zero");
            for (VarId v : s_) state_.bind(v, sol->assignment.value(v));
            break;
        }
        case InitScheme::kMl: {
            evals_ = 1;
            trace_.differentiate(e_, ws_);
            if (trace_.value(ws_).is_zero())
                throw std::runtime_error("ML initialization: evidence has probability zero");
            for (VarId v : s_) {
                int best_x = 0;
                ScaledReal best_p = trace_.derivative(ws_, v, 0);
                for (int x = 1; x < net_.cardinality(v); ++x) {
                    const ScaledReal p = trace_.derivative(ws_, v, x);
                    if (p > best_p) {
                        best_p = p;
                        best_x = x;
                    }
                }
                state_.bind(v, best_x);
            }
            break;
        }
        case InitScheme::kSeq: {
            // Greedy: each pass scores every open (variable, value) pair given
            // the commitments so far and commits the single best one.
            std::vector<VarId> open = s_;
            while (!open.empty()) {
                ++evals_;
                trace_.differentiate(state_, ws_);
                VarId pick_v = -1;
                int pick_x = 0;
                ScaledReal pick_p(0.0);
                for (VarId v : open)
                    for (int x = 0; x < net_.cardinality(v); ++x) {
                        const ScaledReal p = trace_.derivative(ws_, v, x);
                        if (pick_v < 0 ? !p.is_zero() : p > pick_p) {
                            pick_p = p;
                            pick_v = v;
                            pick_x = x;
                        }
                    }
                if (pick_v < 0) {
                    // every open pair has probability zero; keep the loop's
                    // cost contract and commit something deterministic
                    pick_v = open.front();
                    pick_x = 0;
                }
                state_.bind(pick_v, pick_x);
                open.erase(std::find(open.begin(), open.end(), pick_v));
            }
            break;
        }
        }
    }

    void random_walk() {
        if (s_.empty()) return;
        for (int i = 0; i < cfg_.restart_walk_length; ++i) {
            const VarId v = s_[rng_.uniform_int(s_.size())];
            const int card = net_.cardinality(v);
            // a real move: pick among the other values
            int x = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(card - 1)));
            if (x >= state_.value(v)) ++x;
            state_.rebind(v, x);
        }
    }

    void step() {
        ++evals_;
        trace_.differentiate(state_, ws_);
        const ScaledReal base = trace_.value(ws_);
        if (cfg_.method == SearchMethod::kTaboo) visited_.insert(key_of(state_));
        consider(-1, 0, base);

        // One sweep over the neighborhood feeds three consumers: the global
        // best tracker, hill's best strict improvement, and taboo's best
        // unvisited neighbor. Scanning in (variable, value) order makes
        // hill's strict-greater updates resolve ties toward lower ids and
        // values; taboo breaks score ties uniformly at random instead, since
        // ties are the norm on the zero plateaus of near-deterministic
        // networks and a fixed preference would degenerate the walk into a
        // crawl around the lowest-index variables.
        VarId hill_v = -1;
        int hill_x = 0;
        ScaledReal hill_p(0.0);
        VarId taboo_v = -1;
        int taboo_x = 0;
        ScaledReal taboo_p(0.0);
        bool taboo_found = false;
        std::uint64_t taboo_ties = 0;
        std::vector<int> nkey;
        if (cfg_.method == SearchMethod::kTaboo) nkey = key_of(state_);

        for (std::size_t si = 0; si < s_.size(); ++si) {
            const VarId v = s_[si];
            const int cur = state_.value(v);
            for (int x = 0; x < net_.cardinality(v); ++x) {
                if (x == cur) continue;
                const ScaledReal p = trace_.derivative(ws_, v, x);
                consider(v, x, p);
                if (p > base && (hill_v < 0 || p > hill_p)) {
                    hill_p = p;
                    hill_v = v;
                    hill_x = x;
                }
                if (cfg_.method == SearchMethod::kTaboo) {
                    nkey[si] = x;
                    const bool fresh = visited_.find(nkey) == visited_.end();
                    nkey[si] = cur;
                    if (fresh) {
                        if (!taboo_found || p > taboo_p) {
                            taboo_p = p;
                            taboo_v = v;
                            taboo_x = x;
                            taboo_found = true;
                            taboo_ties = 1;
                        } else if (p == taboo_p && rng_.uniform_int(++taboo_ties) == 0) {
                            taboo_v = v;
                            taboo_x = x;
                        }
                    }
                }
            }
        }

        const bool at_peak = hill_v < 0; // no strict improvement anywhere
        if (at_peak) {
            ++result_.peaks_found;
            if (result_.first_peak_evaluations < 0) result_.first_peak_evaluations = evals_;
        }

        if (cfg_.method == SearchMethod::kHill) {
            if (at_peak)
                random_walk();
            else
                state_.rebind(hill_v, hill_x);
        } else {
            if (taboo_found)
                state_.rebind(taboo_v, taboo_x);
            else
                random_walk(); // entire neighborhood already visited
        }
    }
};

} // namespace detail

// Run one configured search. The order is used by the MPE initialization and
// must cover all variables; the trace must come from the same network.
inline SearchResult run_search(const BayesianNetwork& net, const std::vector<VarId>& S,
                               const Assignment& e, const Trace& trace,
                               const EliminationOrder& order, const SearchConfig& cfg) {
    return detail::Searcher(net, S, e, trace, order, cfg).run();
}

inline SearchResult run_method(const BayesianNetwork& net, const std::vector<VarId>& S,
                               const Assignment& e, const Trace& trace,
                               const EliminationOrder& order, const MethodSpec& spec,
                               std::uint64_t seed, int budget = 150) {
    SearchConfig cfg;
    cfg.method = spec.method;
    cfg.init = spec.init;
    cfg.budget = budget;
    cfg.rng_seed = seed;
    return run_search(net, S, e, trace, order, cfg);
}

} // namespace mapsearch

#endif
