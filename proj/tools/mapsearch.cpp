// Command-line front end: network generation, one-shot solving, and the
// width / solution-quality / evaluation-statistics experiments.
//
// Exit codes: 0 success, 1 configuration error, 2 input-file error.

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mapsearch/mapsearch.hpp>

namespace {

using namespace mapsearch;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> parse_bias_grid(const std::string& s) {
    std::vector<double> grid;
    for (const std::string& tok : split(s, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            grid.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad bias value: \"" + tok + "\"");
        }
    }
    return grid;
}

std::vector<MethodSpec> parse_method_list(const std::string& s) {
    std::vector<MethodSpec> methods;
    for (const std::string& tok : split(s, ',')) {
        if (tok.empty()) continue;
        const auto spec = parse_method(tok);
        if (!spec) throw std::invalid_argument("unknown method token: \"" + tok + "\"");
        methods.push_back(*spec);
    }
    if (methods.empty()) throw std::invalid_argument("empty method list");
    return methods;
}

// "A=1,B=0" against the network's variable names
Assignment parse_evidence_spec(const BayesianNetwork& net, const std::string& s) {
    Assignment e(static_cast<std::size_t>(net.size()));
    if (s.empty()) return e;
    for (const std::string& tok : split(s, ',')) {
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("evidence entry \"" + tok + "\" is not name=value");
        const std::string name = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        const auto v = net.find_variable(name);
        if (!v) throw std::invalid_argument("unknown evidence variable \"" + name + "\"");
        int x = -1;
        try {
            x = std::stoi(val);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad evidence value \"" + val + "\"");
        }
        if (x < 0 || x >= net.cardinality(*v))
            throw std::invalid_argument("evidence value " + val + " out of range for " + name);
        e.bind(*v, x);
    }
    return e;
}

std::vector<VarId> parse_map_spec(const BayesianNetwork& net, const std::string& s) {
    std::vector<VarId> vars;
    for (const std::string& name : split(s, ',')) {
        if (name.empty()) continue;
        const auto v = net.find_variable(name);
        if (!v) throw std::invalid_argument("unknown MAP variable \"" + name + "\"");
        vars.push_back(*v);
    }
    return vars;
}

void write_to(const std::string& path, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + path);
    body(out);
    if (!out) throw ParseError("write failed: " + path);
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// ---- gen ----

struct GenCli {
    int method = 2;
    int n = 50;
    int c = 8;
    double p = 0.05;
    double bias = 0.5;
    int map_cap = 25;
    std::uint64_t seed = 1;
    int instance = 0;
    std::string out;
};

int cmd_gen(const GenCli& cli) {
    GenConfig cfg;
    cfg.method = cli.method == 1 ? GenMethod::kConnectivity : GenMethod::kEdgeProb;
    cfg.n = cli.n;
    cfg.c = cli.c;
    cfg.p = cli.p;
    cfg.bias = cli.bias;
    cfg.max_map_vars = cli.map_cap;
    cfg.validate();

    // same stream layout as the experiment runners, so a CLI user can
    // regenerate any experiment instance from (master seed, index)
    const std::uint64_t base = mix_seed(cli.seed, static_cast<std::uint64_t>(cli.instance));
    Rng rng_struct(mix_seed(base, 1));
    const Dag dag = gen_structure(cfg, rng_struct);
    Rng rng_s(mix_seed(base, 2));
    // roots that are not leaves, exactly as the experiment runners pick them;
    // plain roots would let an isolated variable land in both S and the leaf
    // evidence, producing a file solve must reject
    const std::vector<VarId> S =
        detail::select_from(detail::internal_roots(dag), cfg.max_map_vars, rng_s);
    Rng rng_q(mix_seed(mix_seed(base, 3), 0));
    const BayesianNetwork net = quantify(dag, cfg.bias, rng_q);
    Rng rng_e(mix_seed(mix_seed(base, 4), 0));
    const Assignment e = sample_evidence(net, rng_e);

    nlohmann::ordered_json doc = network_to_json(net);
    nlohmann::ordered_json meta;
    meta["seed"] = cli.seed;
    meta["instance"] = cli.instance;
    meta["method"] = cli.method;
    meta["n"] = cli.n;
    if (cli.method == 1)
        meta["c"] = cli.c;
    else
        meta["p"] = cli.p;
    meta["bias"] = cli.bias;
    auto& jmap = meta["map_vars"] = nlohmann::ordered_json::array();
    for (VarId v : S) jmap.push_back(net.variable(v).name);
    auto& jev = meta["evidence"] = nlohmann::ordered_json::object();
    for (VarId v = 0; v < net.size(); ++v)
        if (e.is_bound(v)) jev[net.variable(v).name] = e.value(v);
    doc["meta"] = std::move(meta);

    write_to(cli.out, [&](std::ostream& os) { os << doc.dump(2) << "\n"; });
    return 0;
}

// ---- solve ----

struct SolveCli {
    std::string file;
    std::string map_spec;
    std::string evidence_spec;
    bool map_given = false;
    bool evidence_given = false;
    std::string method = "seq-taboo";
    int budget = 150;
    int width_cap = 22;
    std::uint64_t seed = 1;
};

void print_assignment(std::ostream& os, const BayesianNetwork& net, const Assignment& a,
                      const std::vector<VarId>& vars) {
    os << "assignment:";
    for (VarId v : vars) os << ' ' << net.variable(v).name << '=' << a.value(v);
    os << '\n';
}

int cmd_solve(const SolveCli& cli) {
    const std::string text = read_text_file(cli.file);
    const nlohmann::json doc = parse_json_document(text);
    const BayesianNetwork net = network_from_json(doc);

    // S and evidence: explicit flags win; otherwise the file's meta block;
    // otherwise all roots with no evidence.
    std::vector<VarId> S;
    Assignment e(static_cast<std::size_t>(net.size()));
    const bool has_meta = doc.contains("meta") && doc["meta"].is_object();
    if (cli.map_given) {
        S = parse_map_spec(net, cli.map_spec);
    } else if (has_meta && doc["meta"].contains("map_vars")) {
        for (const auto& jn : doc["meta"]["map_vars"]) {
            const auto v = net.find_variable(jn.get<std::string>());
            if (!v) throw ParseError("meta.map_vars names unknown variable " + jn.dump());
            S.push_back(*v);
        }
    } else {
        for (VarId v = 0; v < net.size(); ++v)
            if (net.cpt(v).parents.empty()) S.push_back(v);
    }
    if (cli.evidence_given) {
        e = parse_evidence_spec(net, cli.evidence_spec);
    } else if (has_meta && doc["meta"].contains("evidence")) {
        for (const auto& [name, jval] : doc["meta"]["evidence"].items()) {
            const auto v = net.find_variable(name);
            if (!v) throw ParseError("meta.evidence names unknown variable \"" + name + "\"");
            if (!jval.is_number_integer() || jval.get<int>() < 0 ||
                jval.get<int>() >= net.cardinality(*v))
                throw ParseError("meta.evidence value out of range for \"" + name + "\"");
            e.bind(*v, jval.get<int>());
        }
    }
    for (VarId v : S)
        if (e.is_bound(v))
            throw std::invalid_argument("MAP variable " + net.variable(v).name +
                                        " also appears in the evidence");

    const InteractionGraph mg = moral_graph(net);
    std::sort(S.begin(), S.end());

    if (cli.method == "exact") {
        const EliminationOrder order = min_fill_order(mg, S);
        const int w = order_width(mg, order);
        if (w > cli.width_cap)
            throw std::invalid_argument("constrained width " + std::to_string(w) +
                                        " exceeds --width-cap " + std::to_string(cli.width_cap));
        const auto sol = exact_map(net, S, e, order);
        if (!sol) throw std::invalid_argument("evidence has probability zero");
        std::cout << "method: exact\n";
        print_assignment(std::cout, net, sol->assignment, S);
        std::cout << "score: " << fmt_double(sol->probability()) << '\n'
                  << "log2_score: " << fmt_double(sol->log2_probability()) << '\n'
                  << "constrained_width: " << w << '\n';
        return 0;
    }

    const auto spec = parse_method(cli.method);
    if (!spec) throw std::invalid_argument("unknown method token: \"" + cli.method + "\"");
    const EliminationOrder order = min_fill_order(mg);
    const Trace trace(net, order);
    const SearchResult res = run_method(net, S, e, trace, order, *spec, cli.seed, cli.budget);
    std::cout << "method: " << method_token(*spec) << '\n';
    print_assignment(std::cout, net, res.best.assignment, S);
    std::cout << "score: " << fmt_double(res.best.probability()) << '\n'
              << "log2_score: " << fmt_double(res.best.log2_probability()) << '\n'
              << "evaluations_used: " << res.evaluations_used << '\n'
              << "evaluations_to_best: " << res.evaluations_to_best << '\n'
              << "peaks_found: " << res.peaks_found << '\n';
    return 0;
}

// ---- experiments ----

struct WidthCli {
    WidthConfig cfg;
    int method = 1;
    std::string out;
    bool full_scale = false;
};

int cmd_widths(WidthCli& cli, bool instances_given) {
    if (cli.full_scale && !instances_given) cli.cfg.instances = 1000;
    cli.cfg.gen_method = cli.method == 1 ? GenMethod::kConnectivity : GenMethod::kEdgeProb;
    const WidthOutcome out = run_width_experiment(cli.cfg);

    auto stats_line = [](const char* label, const WidthStats& s) {
        std::ostringstream os;
        os << label << ": min=" << s.min << " max=" << s.max << " avg=" << fmt_double(s.average)
           << " weighted=" << fmt_double(s.weighted_average);
        return os.str();
    };
    std::cerr << "widths: instances=" << out.requested << "\n"
              << "  " << stats_line("unconstrained", out.pooled_unconstrained) << "\n"
              << "  " << stats_line("constrained  ", out.pooled_constrained) << "\n";
    for (const WidthRecord& rec : out.per_c)
        std::cerr << "  c=" << std::setw(2) << rec.c << " (" << rec.instances << " nets)"
                  << " unconstrained weighted=" << fmt_double(rec.unconstrained.weighted_average)
                  << " constrained weighted=" << fmt_double(rec.constrained.weighted_average)
                  << "\n";

    write_to(cli.out, [&](std::ostream& os) { write_width_csv(os, cli.cfg, out); });
    return 0;
}

struct QualityCli {
    QualityConfig cfg;
    int method = 2;
    std::string bias_grid;
    std::string methods;
    std::string out;
    bool full_scale = false;
};

void apply_quality_cli(QualityCli& cli, bool instances_given, bool n_given, bool p_given) {
    if (cli.full_scale) {
        if (!instances_given) cli.cfg.instances = 1000;
        if (!n_given) cli.cfg.n = 100;
        if (!p_given) cli.cfg.p = 0.025;
    }
    cli.cfg.gen_method = cli.method == 1 ? GenMethod::kConnectivity : GenMethod::kEdgeProb;
    if (!cli.bias_grid.empty()) cli.cfg.bias_grid = parse_bias_grid(cli.bias_grid);
    if (!cli.methods.empty()) cli.cfg.methods = parse_method_list(cli.methods);
}

int cmd_quality(QualityCli& cli, bool instances_given, bool n_given, bool p_given) {
    apply_quality_cli(cli, instances_given, n_given, p_given);
    const QualityOutcome out = run_quality_experiment(cli.cfg);

    std::cerr << "quality: requested=" << out.requested << " skipped=" << out.skipped
              << " (width cap " << cli.cfg.width_cap << ")\n";
    std::cerr << "  solved fraction by method x bias:\n";
    for (const MethodSpec& spec : cli.cfg.methods) {
        std::cerr << "  " << std::setw(10) << std::left << method_token(spec) << std::right;
        for (double bias : cli.cfg.bias_grid) {
            for (const QualityRecord& rec : out.summaries) {
                if (rec.method != method_token(spec) || rec.bias != bias) continue;
                std::ostringstream cell;
                if (rec.instances == 0)
                    cell << "-";
                else
                    cell << std::fixed << std::setprecision(3)
                         << static_cast<double>(rec.solved) / rec.instances;
                std::cerr << ' ' << std::setw(6) << cell.str();
            }
        }
        std::cerr << '\n';
    }

    write_to(cli.out, [&](std::ostream& os) { write_quality_csv(os, cli.cfg, out); });
    return 0;
}

struct EvalStatsCli {
    QualityConfig cfg;
    int method = 2;
    double bias = 0.5;
    std::string methods;
    std::string out;
    bool full_scale = false;
};

int cmd_evalstats(EvalStatsCli& cli, bool instances_given, bool n_given, bool p_given) {
    if (cli.full_scale) {
        if (!instances_given) cli.cfg.instances = 1000;
        if (!n_given) cli.cfg.n = 100;
        if (!p_given) cli.cfg.p = 0.025;
    }
    cli.cfg.gen_method = cli.method == 1 ? GenMethod::kConnectivity : GenMethod::kEdgeProb;
    if (!cli.methods.empty()) cli.cfg.methods = parse_method_list(cli.methods);
    cli.cfg.bias_grid = {cli.bias};
    const QualityOutcome out = run_quality_experiment(cli.cfg);
    const std::vector<EvalStatsRecord> recs = eval_statistics(out.rows);

    std::cerr << "evalstats: requested=" << out.requested << " skipped=" << out.skipped
              << " bias=" << fmt_double(cli.bias) << "\n";
    for (const EvalStatsRecord& r : recs)
        std::cerr << "  " << std::setw(10) << std::left << r.method << std::right
                  << " mean=" << fmt_double(r.mean) << " stdev=" << fmt_double(r.stdev)
                  << " max=" << fmt_double(r.max) << " (" << r.instances << " runs)\n";

    write_to(cli.out, [&](std::ostream& os) { write_evalstats_csv(os, cli.cfg, cli.bias, recs); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAP workbench: random networks, exact and local-search MAP, experiment harness"};
    app.require_subcommand(1);

    GenCli gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate one network file (with meta block)");
    gen_cmd->add_option("--gen-method", gen.method, "structure generator: 1 connectivity, 2 edge-prob")
        ->check(CLI::IsMember({1, 2}));
    gen_cmd->add_option("-n,--variables", gen.n, "variable count");
    gen_cmd->add_option("-c,--connectivity", gen.c, "connectivity target (method 1)");
    gen_cmd->add_option("-p,--edge-prob", gen.p, "edge probability (method 2)");
    gen_cmd->add_option("--bias", gen.bias, "quantification bias in [0, 0.5]");
    gen_cmd->add_option("--map-cap", gen.map_cap, "max MAP variables");
    gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--instance", gen.instance, "instance index under the master seed");
    gen_cmd->add_option("--out", gen.out, "output file (default stdout)");

    SolveCli solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve MAP on a network file");
    solve_cmd->add_option("file", solve.file, "network JSON file")->required();
    auto* map_opt = solve_cmd->add_option("--map", solve.map_spec,
                                          "MAP variables, comma-separated names (default: file meta, else roots)");
    auto* ev_opt = solve_cmd->add_option("--evidence", solve.evidence_spec,
                                         "evidence as name=value,... (default: file meta, else none)");
    solve_cmd->add_option("--method", solve.method,
                          "exact | {rand,mpe,ml,seq}[-hill|-taboo] (default seq-taboo)");
    solve_cmd->add_option("--budget", solve.budget, "evaluation budget for search methods");
    solve_cmd->add_option("--width-cap", solve.width_cap, "refuse exact solving above this width");
    solve_cmd->add_option("--seed", solve.seed, "search seed");

    WidthCli widths;
    CLI::App* widths_cmd = app.add_subcommand("widths", "constrained vs unconstrained width experiment");
    auto* w_inst = widths_cmd->add_option("--instances", widths.cfg.instances, "total instances");
    widths_cmd->add_option("--gen-method", widths.method, "1 connectivity, 2 edge-prob")
        ->check(CLI::IsMember({1, 2}));
    widths_cmd->add_option("-n,--variables", widths.cfg.n, "variable count");
    widths_cmd->add_option("--c-min", widths.cfg.c_min, "lowest connectivity bucket");
    widths_cmd->add_option("--c-max", widths.cfg.c_max, "highest connectivity bucket");
    widths_cmd->add_option("-p,--edge-prob", widths.cfg.p, "edge probability (method 2)");
    widths_cmd->add_option("--map-cap", widths.cfg.max_map_vars, "max MAP variables");
    widths_cmd->add_option("--min-roots", widths.cfg.min_roots, "regenerate below this many roots");
    widths_cmd->add_option("--seed", widths.cfg.seed, "master seed");
    widths_cmd->add_option("--threads", widths.cfg.threads, "worker threads");
    widths_cmd->add_option("--out", widths.out, "CSV path (default stdout)");
    widths_cmd->add_flag("--full-scale", widths.full_scale, "paper-scale instance count (1000)");

    QualityCli quality;
    CLI::App* quality_cmd = app.add_subcommand("quality", "solution-quality experiment grid");
    auto* q_inst = quality_cmd->add_option("--instances", quality.cfg.instances, "instances per bias");
    quality_cmd->add_option("--gen-method", quality.method, "1 connectivity, 2 edge-prob")
        ->check(CLI::IsMember({1, 2}));
    auto* q_n = quality_cmd->add_option("-n,--variables", quality.cfg.n, "variable count");
    quality_cmd->add_option("-c,--connectivity", quality.cfg.c, "connectivity target (method 1)");
    auto* q_p = quality_cmd->add_option("-p,--edge-prob", quality.cfg.p, "edge probability (method 2)");
    quality_cmd->add_option("--bias-grid", quality.bias_grid, "comma-separated biases (default 0,.125,.25,.375,.5)");
    quality_cmd->add_option("--methods", quality.methods, "comma-separated method tokens (default all 11)");
    quality_cmd->add_option("--budget", quality.cfg.budget, "evaluation budget");
    quality_cmd->add_option("--width-cap", quality.cfg.width_cap, "skip instances above this constrained width");
    quality_cmd->add_option("--map-cap", quality.cfg.max_map_vars, "max MAP variables");
    quality_cmd->add_option("--seed", quality.cfg.seed, "master seed");
    quality_cmd->add_option("--threads", quality.cfg.threads, "worker threads");
    quality_cmd->add_option("--out", quality.out, "CSV path (default stdout)");
    quality_cmd->add_flag("--full-scale", quality.full_scale,
                          "paper-scale grid (1000 instances, N=100, p=.025)");

    EvalStatsCli evalstats;
    CLI::App* evalstats_cmd = app.add_subcommand("evalstats", "evaluations-to-best statistics");
    auto* e_inst = evalstats_cmd->add_option("--instances", evalstats.cfg.instances, "instance count");
    evalstats_cmd->add_option("--gen-method", evalstats.method, "1 connectivity, 2 edge-prob")
        ->check(CLI::IsMember({1, 2}));
    auto* e_n = evalstats_cmd->add_option("-n,--variables", evalstats.cfg.n, "variable count");
    evalstats_cmd->add_option("-c,--connectivity", evalstats.cfg.c, "connectivity target (method 1)");
    auto* e_p = evalstats_cmd->add_option("-p,--edge-prob", evalstats.cfg.p, "edge probability (method 2)");
    evalstats_cmd->add_option("--bias", evalstats.bias, "quantification bias (default 0.5)");
    evalstats_cmd->add_option("--methods", evalstats.methods, "comma-separated method tokens");
    evalstats_cmd->add_option("--budget", evalstats.cfg.budget, "evaluation budget");
    evalstats_cmd->add_option("--width-cap", evalstats.cfg.width_cap, "skip width cap");
    evalstats_cmd->add_option("--map-cap", evalstats.cfg.max_map_vars, "max MAP variables");
    evalstats_cmd->add_option("--seed", evalstats.cfg.seed, "master seed");
    evalstats_cmd->add_option("--threads", evalstats.cfg.threads, "worker threads");
    evalstats_cmd->add_option("--out", evalstats.out, "CSV path (default stdout)");
    evalstats_cmd->add_flag("--full-scale", evalstats.full_scale,
                            "paper-scale run (1000 instances, N=100, p=.025)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    solve.map_given = map_opt->count() > 0;
    solve.evidence_given = ev_opt->count() > 0;

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (solve_cmd->parsed()) return cmd_solve(solve);
        if (widths_cmd->parsed()) return cmd_widths(widths, w_inst->count() > 0);
        if (quality_cmd->parsed())
            return cmd_quality(quality, q_inst->count() > 0, q_n->count() > 0, q_p->count() > 0);
        if (evalstats_cmd->parsed())
            return cmd_evalstats(evalstats, e_inst->count() > 0, e_n->count() > 0,
                                 e_p->count() > 0);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: invalid network: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
