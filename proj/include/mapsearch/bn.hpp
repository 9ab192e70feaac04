// bn.hpp -- Bayesian network model: variables, CPTs, assignments.
#ifndef MAPSEARCH_BN_HPP
#define MAPSEARCH_BN_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mapsearch {

using VarId = std::int32_t;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Variable {
    VarId id = 0;
    std::string name;
    int cardinality = 2;
};

// Conditional probability table of one variable.
//
// Layout: one row (a distribution over the child's values) per full parent
// configuration. Rows are ordered row-major over the parent values with
// parents sorted by id and the LAST parent varying fastest; within a row the
// child value is the index. table[row * card(child) + value].
struct Cpt {
    VarId child = 0;
    std::vector<VarId> parents; // strictly increasing ids
    std::vector<double> table;
};

// Partial or complete mapping from variable id to value index.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t n) : vals_(n, -1) {}

    std::size_t size() const { return vals_.size(); }
    bool is_bound(VarId v) const { return vals_[static_cast<std::size_t>(v)] >= 0; }
    int value(VarId v) const { return vals_[static_cast<std::size_t>(v)]; }

    void bind(VarId v, int x) {
        auto& slot = vals_[static_cast<std::size_t>(v)];
        if (slot >= 0 && slot != x)
            throw std::invalid_argument("variable already bound to a different value");
        slot = x;
    }
    void rebind(VarId v, int x) { vals_[static_cast<std::size_t>(v)] = x; }
    void unbind(VarId v) { vals_[static_cast<std::size_t>(v)] = -1; }

    std::size_t bound_count() const {
        std::size_t k = 0;
        for (int v : vals_)
            if (v >= 0) ++k;
        return k;
    }
    bool complete() const {
        return std::all_of(vals_.begin(), vals_.end(), [](int v) { return v >= 0; });
    }

    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.vals_ == b.vals_;
    }
    friend bool operator!=(const Assignment& a, const Assignment& b) { return !(a == b); }

private:
    std::vector<int> vals_;
};

class BayesianNetwork {
public:
    BayesianNetwork(std::vector<Variable> variables, std::vector<Cpt> cpts)
        : vars_(std::move(variables)) {
        validate_variables();
        index_cpts(std::move(cpts));
        validate_cpts();
        build_structure();
    }

    int size() const { return static_cast<int>(vars_.size()); }
    const std::vector<Variable>& variables() const { return vars_; }
    const Variable& variable(VarId v) const { return vars_[static_cast<std::size_t>(v)]; }
    int cardinality(VarId v) const { return vars_[static_cast<std::size_t>(v)].cardinality; }
    const Cpt& cpt(VarId v) const { return cpts_[static_cast<std::size_t>(v)]; }
    const std::vector<VarId>& topological_order() const { return topo_; }
    const std::vector<std::vector<VarId>>& children() const { return children_; }

    std::optional<VarId> find_variable(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<VarId> roots() const {
        std::vector<VarId> r;
        for (const auto& c : cpts_)
            if (c.parents.empty()) r.push_back(c.child);
        return r;
    }
    std::vector<VarId> leaves() const {
        std::vector<VarId> r;
        for (VarId v = 0; v < size(); ++v)
            if (children_[static_cast<std::size_t>(v)].empty()) r.push_back(v);
        return r;
    }

    // CPT row index for the parent values bound in `a` (all parents must be bound).
    std::size_t cpt_row(VarId child, const Assignment& a) const {
        const Cpt& c = cpt(child);
        std::size_t row = 0;
        for (VarId p : c.parents)
            row = row * static_cast<std::size_t>(cardinality(p)) +
                  static_cast<std::size_t>(a.value(p));
        return row;
    }

    double cpt_entry(VarId child, int value, const Assignment& a) const {
        const Cpt& c = cpt(child);
        return c.table[cpt_row(child, a) * static_cast<std::size_t>(cardinality(child)) +
                       static_cast<std::size_t>(value)];
    }

    static constexpr double kRowSumTolerance = 1e-9;

private:
    void validate_variables() {
        if (vars_.empty()) throw ValidationError("network has no variables");
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            const auto& v = vars_[i];
            if (v.id != static_cast<VarId>(i))
                throw ValidationError("variable ids must be dense 0..N-1 in order; got id " +
                                      std::to_string(v.id) + " at position " + std::to_string(i));
            if (v.name.empty())
                throw ValidationError("variable " + std::to_string(i) + " has an empty name");
            if (v.cardinality < 2)
                throw ValidationError("variable " + v.name + ": cardinality < 2");
            if (!by_name_.emplace(v.name, v.id).second)
                throw ValidationError("duplicate variable name " + v.name);
        }
    }

    void index_cpts(std::vector<Cpt> cpts) {
        if (cpts.size() != vars_.size())
            throw ValidationError("expected exactly one CPT per variable");
        cpts_.resize(vars_.size());
        std::vector<bool> seen(vars_.size(), false);
        for (auto& c : cpts) {
            if (c.child < 0 || c.child >= size())
                throw ValidationError("CPT child id out of range");
            if (seen[static_cast<std::size_t>(c.child)])
                throw ValidationError("duplicate CPT for variable " +
                                      vars_[static_cast<std::size_t>(c.child)].name);
            seen[static_cast<std::size_t>(c.child)] = true;
            cpts_[static_cast<std::size_t>(c.child)] = std::move(c);
        }
    }

    void validate_cpts() {
        for (const auto& c : cpts_) {
            const std::string& who = vars_[static_cast<std::size_t>(c.child)].name;
            std::size_t rows = 1;
            VarId prev = -1;
            for (VarId p : c.parents) {
                if (p < 0 || p >= size())
                    throw ValidationError("CPT of " + who + ": parent id out of range");
                if (p == c.child)
                    throw ValidationError("CPT of " + who + ": variable listed as its own parent");
                if (p <= prev)
                    throw ValidationError("CPT of " + who +
                                          ": parents must be distinct and listed in increasing id order");
                prev = p;
                rows *= static_cast<std::size_t>(cardinality(p));
            }
            const auto card = static_cast<std::size_t>(cardinality(c.child));
            if (c.table.size() != rows * card)
                throw ValidationError("CPT of " + who + ": table has " +
                                      std::to_string(c.table.size()) + " entries, expected " +
                                      std::to_string(rows * card));
            for (double p : c.table)
                if (!(p >= 0.0 && p <= 1.0))
                    throw ValidationError("CPT of " + who + ": probability outside [0, 1]");
            for (std::size_t r = 0; r < rows; ++r) {
                double sum = 0.0;
                for (std::size_t v = 0; v < card; ++v) sum += c.table[r * card + v];
                if (std::abs(sum - 1.0) > kRowSumTolerance)
                    throw ValidationError("CPT of " + who + ": row " + std::to_string(r) +
                                          " sums to " + std::to_string(sum) + ", not 1");
            }
        }
    }

    void build_structure() {
        const auto n = vars_.size();
        children_.assign(n, {});
        std::vector<int> indegree(n, 0);
        for (const auto& c : cpts_) {
            indegree[static_cast<std::size_t>(c.child)] = static_cast<int>(c.parents.size());
            for (VarId p : c.parents)
                children_[static_cast<std::size_t>(p)].push_back(c.child);
        }
        // Kahn's algorithm; lowest id first keeps the order deterministic.
        std::vector<VarId> ready;
        for (VarId v = 0; v < size(); ++v)
            if (indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
        std::make_heap(ready.begin(), ready.end(), std::greater<>{});
        topo_.reserve(n);
        while (!ready.empty()) {
            std::pop_heap(ready.begin(), ready.end(), std::greater<>{});
            VarId v = ready.back();
            ready.pop_back();
            topo_.push_back(v);
            for (VarId ch : children_[static_cast<std::size_t>(v)])
                if (--indegree[static_cast<std::size_t>(ch)] == 0) {
                    ready.push_back(ch);
                    std::push_heap(ready.begin(), ready.end(), std::greater<>{});
                }
        }
        if (topo_.size() != n) throw ValidationError("cycle detected in parent relation");
    }

    std::vector<Variable> vars_;
    std::vector<Cpt> cpts_;
    std::vector<std::vector<VarId>> children_;
    std::vector<VarId> topo_;
    std::unordered_map<std::string, VarId> by_name_;
};

// The assignment that agrees with s everywhere except X, which is set to x.
inline Assignment neighbor(const BayesianNetwork& net, const Assignment& s, VarId X, int x) {
    if (!s.is_bound(X)) throw std::invalid_argument("neighbor: variable is unbound in s");
    if (x < 0 || x >= net.cardinality(X))
        throw std::invalid_argument("neighbor: value index out of range");
    Assignment r = s;
    r.rebind(X, x);
    return r;
}

} // namespace mapsearch

#endif
