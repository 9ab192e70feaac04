// io.hpp -- on-disk network format (JSON): parsing and serialization.
//
// A network file is a UTF-8 JSON document:
//   {
//     "variables": [ {"name": "A", "cardinality": 2}, ... ],
//     "cpts":      [ {"child": "B", "parents": ["A"], "table": [0.9, 0.1, 0.2, 0.8]}, ... ]
//   }
// Variable order in the file defines ids. Parents are referenced by name and
// must appear in increasing id order; the flat table is row-major over parent
// configurations (last parent fastest) with the child value innermost.
// Unknown top-level keys (e.g. "meta" written by the generator CLI) are ignored.
#ifndef MAPSEARCH_IO_HPP
#define MAPSEARCH_IO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bn.hpp"

namespace mapsearch {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                         const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(std::string("missing key \"") + key + "\" in " + where);
    return *it;
}

} // namespace detail

inline BayesianNetwork network_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("top-level value must be an object");

    const auto& jvars = detail::require_key(doc, "variables", "network document");
    if (!jvars.is_array()) throw ParseError("\"variables\" must be an array");

    std::vector<Variable> vars;
    std::unordered_map<std::string, VarId> ids;
    vars.reserve(jvars.size());
    for (const auto& jv : jvars) {
        Variable v;
        v.id = static_cast<VarId>(vars.size());
        const auto& jname = detail::require_key(jv, "name", "variable entry");
        if (!jname.is_string()) throw ParseError("variable name must be a string");
        v.name = jname.get<std::string>();
        const auto& jcard = detail::require_key(jv, "cardinality", "variable entry");
        if (!jcard.is_number_integer())
            throw ParseError("cardinality of " + v.name + " must be an integer");
        v.cardinality = jcard.get<int>();
        ids.emplace(v.name, v.id);
        vars.push_back(std::move(v));
    }

    const auto& jcpts = detail::require_key(doc, "cpts", "network document");
    if (!jcpts.is_array()) throw ParseError("\"cpts\" must be an array");

    auto lookup = [&](const nlohmann::json& jname, const char* role) -> VarId {
        if (!jname.is_string())
            throw ParseError(std::string(role) + " must be a variable name string");
        auto it = ids.find(jname.get<std::string>());
        if (it == ids.end())
            throw ParseError(std::string("unknown variable \"") + jname.get<std::string>() +
                             "\" referenced as " + role);
        return it->second;
    };

    std::vector<Cpt> cpts;
    cpts.reserve(jcpts.size());
    for (const auto& jc : jcpts) {
        Cpt c;
        c.child = lookup(detail::require_key(jc, "child", "cpt entry"), "cpt child");
        const auto& jpar = detail::require_key(jc, "parents", "cpt entry");
        if (!jpar.is_array()) throw ParseError("cpt \"parents\" must be an array of names");
        for (const auto& jp : jpar) c.parents.push_back(lookup(jp, "cpt parent"));
        const auto& jtab = detail::require_key(jc, "table", "cpt entry");
        if (!jtab.is_array()) throw ParseError("cpt \"table\" must be a flat array of numbers");
        c.table.reserve(jtab.size());
        for (const auto& jt : jtab) {
            if (!jt.is_number()) throw ParseError("cpt table entries must be numbers");
            c.table.push_back(jt.get<double>());
        }
        cpts.push_back(std::move(c));
    }

    return BayesianNetwork(std::move(vars), std::move(cpts));
}

// Parse a whole document, mapping syntax failures to ParseError with a line
// number. Callers that care about side channels (e.g. a "meta" object next to
// the network) go through this and then network_from_json.
inline nlohmann::json parse_json_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("syntax error at line " +
                         std::to_string(detail::line_of_byte(text, e.byte)) + ": " + e.what());
    }
}

inline BayesianNetwork parse_network(const std::string& text) {
    return network_from_json(parse_json_document(text));
}

inline nlohmann::ordered_json network_to_json(const BayesianNetwork& net) {
    nlohmann::ordered_json doc;
    auto& jvars = doc["variables"] = nlohmann::ordered_json::array();
    for (const auto& v : net.variables())
        jvars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
    auto& jcpts = doc["cpts"] = nlohmann::ordered_json::array();
    for (VarId v = 0; v < net.size(); ++v) {
        const Cpt& c = net.cpt(v);
        nlohmann::ordered_json jc;
        jc["child"] = net.variable(c.child).name;
        auto& jpar = jc["parents"] = nlohmann::ordered_json::array();
        for (VarId p : c.parents) jpar.push_back(net.variable(p).name);
        jc["table"] = c.table;
        jcpts.push_back(std::move(jc));
    }
    return doc;
}

// Round-trip guarantee: parse_network(serialize_network(net)) reproduces net
// with bitwise-equal probabilities (doubles are emitted in shortest
// round-trip decimal form).
inline std::string serialize_network(const BayesianNetwork& net) {
    return network_to_json(net).dump(2) + "\n";
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline BayesianNetwork load_network(const std::string& path) {
    return parse_network(read_text_file(path));
}

} // namespace mapsearch

#endif
