// nvm - command line front end for the noisy voter model toolkit.
// Talks to the core exclusively through the C API in nvm.h.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvm.h"

namespace {

using Json = nlohmann::json;

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& msg) { throw CliError{code, msg}; }

int exit_code_for(nvm_status st) {
    switch (st) {
        case NVM_OK:
            return 0;
        case NVM_ERR_PARAM:
            return 2;
        default:
            return 3;  // capacity / numeric / io
    }
}

void check(nvm_status st) {
    if (st != NVM_OK) fail(exit_code_for(st), nvm_last_error());
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    nvm_string_free(s);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(3, "cannot open for write: " + path);
    out << content;
}

// Graph handle with RAII.
struct Graph {
    nvm_graph* g = nullptr;
    ~Graph() { nvm_graph_free(g); }
};
struct TraceHandle {
    nvm_trace* t = nullptr;
    ~TraceHandle() { nvm_trace_free(t); }
};

// Assemble a family descriptor from --family plus the numeric flags, unless
// --family already carries parameters ("complete:5").
std::string resolve_family(const std::string& family, int64_t n, int64_t m, int64_t k, int64_t h,
                           int64_t graph_seed, const std::string& side) {
    if (family.find(':') != std::string::npos) return family;
    if (family == "complete" || family == "cycle" || family == "path") {
        if (n < 0) fail(2, "n: required for family " + family);
        return family + ":" + std::to_string(n);
    }
    if (family == "bipartite") {
        if (n < 0 || m < 0) fail(2, "n,m: required for family bipartite");
        return "bipartite:" + std::to_string(n) + "," + std::to_string(m);
    }
    if (family == "star") {
        if (m < 0) fail(2, "m: required for family star");
        return "star:" + std::to_string(m) + (side == "leaf" ? ":leaf" : "");
    }
    if (family == "tree") {
        if (k < 0 || h < 0) fail(2, "k,h: required for family tree");
        return "tree:" + std::to_string(k) + "," + std::to_string(h);
    }
    if (family == "lattice") {
        if (n < 0) fail(2, "n: lattice dimension required (use --n)");
        return "lattice:" + std::to_string(n);
    }
    if (family == "random") {
        if (n < 0) fail(2, "n: required for family random");
        return "random:" + std::to_string(n) + ":" + std::to_string(graph_seed);
    }
    fail(2, "family: unknown family '" + family + "'");
}

std::vector<double> parse_grid(const std::string& grid) {
    // "lo:hi:step"
    double lo, hi, step;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
        fail(2, "grid: expected lo:hi:step");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double e = lo + i * step;
        if (e > hi + 1e-12) break;
        out.push_back(e);
    }
    return out;
}

void emit_manifest(const std::string& out_path, const Json& config,
                   const std::vector<std::string>& outputs) {
    // The manifest doubles as a rerunnable config: resolved key/value pairs
    // at the top level plus the list of files the run produced.
    Json manifest = config;
    manifest["version"] = NVM_VERSION;
    manifest["outputs"] = outputs;
    write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

// Rows-to-file in the selected format; CSV numeric cells are produced by the
// caller with fmt() so files are byte-stable.
void write_rows(const std::string& path, const std::string& format,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    if (format == "csv") {
        std::string out;
        for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
        out += "\n";
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) {
                const bool quote = r[i].find_first_of(",\"\n") != std::string::npos;
                if (i) out += ",";
                if (quote) {
                    out += '"';
                    for (char c : r[i]) {
                        if (c == '"') out += '"';
                        out += c;
                    }
                    out += '"';
                } else {
                    out += r[i];
                }
            }
            out += "\n";
        }
        write_file(path, out);
    } else if (format == "jsonl") {
        std::string out;
        for (const auto& r : rows) {
            Json obj;
            for (size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
            out += obj.dump() + "\n";
        }
        write_file(path, out);
    } else {
        fail(2, "format: must be csv or jsonl");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nvm - noisy voter model simulator and exact-computation toolkit"};
    app.require_subcommand(0, 1);

    // Shared option storage.
    std::string family = "complete", side, spec_a, spec_b, trace_prefix = "trace";
    std::string out_path, format = "csv", grid = "0.05:0.95:0.05", config_path;
    int64_t n = -1, m = -1, k = -1, h = -1, graph_seed = 0;
    double eps = 0.5, significance = 0.01;
    int64_t t_budget = 1000000, replicas = 100000;
    uint64_t seed = 1;
    int d = 2, kappa = 0, windows = 0, clt_batches = 0, criterion = 0, threads = 0;
    bool do_variance = false;
    std::string triple, quad;

    app.add_option("--config", config_path, "JSON config file (flags override)");
    app.add_option("--threads", threads, "worker threads (THREADS env honored; results identical)");

    auto add_graph_flags = [&](CLI::App* cmd) {
        cmd->add_option("--family", family, "family name or descriptor (e.g. complete:5)");
        cmd->add_option("--n", n, "first size parameter / lattice dimension");
        cmd->add_option("--m", m, "second size parameter");
        cmd->add_option("--k", k, "tree arity");
        cmd->add_option("--height", h, "tree height");
        cmd->add_option("--graph-seed", graph_seed, "seed for family random");
        cmd->add_option("--side", side, "star root side: center (default) or leaf");
    };

    auto* gen = app.add_subcommand("gen", "build a graph and write its edge list");
    add_graph_flags(gen);
    gen->add_option("--out", out_path, "output path (default graph.edges)");

    auto* simulate = app.add_subcommand("simulate", "run the forward simulation at the root");
    add_graph_flags(simulate);
    simulate->add_option("--eps", eps, "noise probability in (0,1]");
    simulate->add_option("--t", t_budget, "number of steps");
    simulate->add_option("--seed", seed, "simulation seed");
    simulate->add_option("--out", out_path, "output prefix (default trace)");

    auto* stats = app.add_subcommand("stats", "statistics of a stored trace");
    stats->add_option("--trace", trace_prefix, "trace prefix (reads <prefix>.bits/.json)");
    stats->add_option("--d", d, "lag");
    stats->add_option("--kappa", kappa, "thinning step (adds the thinned statistic)");
    stats->add_option("--quad", quad, "d1,d2,d3 (adds the quadruple statistic)");
    stats->add_option("--windows", windows, "window width (adds window distribution)");
    stats->add_flag("--variance", do_variance, "add the variance growth profile");
    stats->add_option("--clt", clt_batches, "batch count (adds moment diagnostics)");
    stats->add_option("--triple", triple, "d1,d2 (adds the triple-identity residual)");
    stats->add_option("--out", out_path, "output path (default stats.csv)");
    stats->add_option("--format", format, "csv or jsonl");

    auto* oracle = app.add_subcommand("oracle", "exact or closed-form meeting probabilities");
    add_graph_flags(oracle);
    oracle->add_option("--eps", eps, "noise probability");
    oracle->add_option("--d", d, "lag");
    oracle->add_option("--replicas", replicas, "replicas (lattice / large graphs)");
    oracle->add_option("--seed", seed, "seed (lattice / large graphs)");
    oracle->add_option("--out", out_path, "output path (default oracle.csv)");
    oracle->add_option("--format", format, "csv or jsonl");

    auto* dist = app.add_subcommand("distinguish", "two-graph hypothesis test");
    dist->add_option("--a", spec_a, "first rooted graph descriptor");
    dist->add_option("--b", spec_b, "second rooted graph descriptor");
    dist->add_option("--eps", eps, "noise probability");
    dist->add_option("--d", d, "lag");
    dist->add_option("--t", t_budget, "trace budget per side");
    dist->add_option("--significance", significance, "two-sided significance level");
    dist->add_option("--seed", seed, "seed");
    dist->add_option("--out", out_path, "output path (default decision.csv)");
    dist->add_option("--format", format, "csv or jsonl");

    auto* sweep = app.add_subcommand("sweep", "exact epsilon sweep of two graphs");
    sweep->add_option("--a", spec_a, "first rooted graph descriptor");
    sweep->add_option("--b", spec_b, "second rooted graph descriptor");
    sweep->add_option("--d", d, "lag");
    sweep->add_option("--grid", grid, "epsilon grid lo:hi:step");
    sweep->add_option("--out", out_path, "output path (default sweep.csv)");
    sweep->add_option("--format", format, "csv or jsonl");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--criterion", criterion, "single criterion id (default: all)");
    verify->add_option("--out", out_path, "results CSV path (default acceptance_results.csv)");

    // Config file: values fill in options not set on the command line. The
    // file must be a single JSON object; unknown keys are rejected.
    auto apply_config = [&](CLI::App* cmd) -> Json {
        Json cfg;
        if (config_path.empty()) return cfg;
        std::ifstream in(config_path);
        if (!in) fail(2, "config: cannot read " + config_path);
        try {
            in >> cfg;
        } catch (const std::exception& e) {
            fail(2, std::string("config: parse error: ") + e.what());
        }
        if (!cfg.is_object()) fail(2, "config: must be a single JSON object");
        for (auto& [key, value] : cfg.items()) {
            if (key == "command" || key == "outputs" || key == "version") continue;
            auto* opt = cmd->get_option_no_throw("--" + key);
            if (!opt) opt = app.get_option_no_throw("--" + key);
            if (!opt) fail(2, "config: unknown field '" + key + "'");
            if (opt->count() > 0) continue;  // flags override config
            std::string text = value.is_string() ? value.get<std::string>() : value.dump();
            try {
                opt->add_result(text);
                opt->run_callback();
            } catch (const std::exception& e) {
                fail(2, "config: bad value for '" + key + "': " + e.what());
            }
        }
        return cfg;
    };

    // Allow `nvm --config manifest.json` with the command named inside.
    // The subcommand, when given explicitly, is always the first argument.
    std::vector<std::string> args(argv + 1, argv + argc);
    const bool has_subcommand = !args.empty() && !args[0].empty() && args[0][0] != '-';
    if (!has_subcommand) {
        for (size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--config") {
                std::ifstream in(args[i + 1]);
                Json cfg;
                if (in && (in >> cfg, cfg.is_object()) && cfg.contains("command"))
                    args.insert(args.begin(), cfg["command"].get<std::string>());
                break;
            }
        }
    }

    // Top-level options (--config, --threads) remain valid after a
    // subcommand name.
    for (auto* c : {gen, simulate, stats, oracle, dist, sweep, verify}) c->fallthrough();

    try {
        try {
            std::vector<const char*> cargs{argv[0]};
            for (const auto& a : args) cargs.push_back(a.c_str());
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return 0;  // --help
            fail(2, e.what());
        }

        CLI::App* cmd = nullptr;
        for (auto* c : {gen, simulate, stats, oracle, dist, sweep, verify})
            if (c->parsed()) cmd = c;
        if (!cmd) fail(2, "command: one of gen|simulate|stats|oracle|distinguish|sweep|verify");
        Json cfg = apply_config(cmd);
        if (threads > 0) nvm_set_threads(threads);

        // Resolved configuration for the manifest.
        Json manifest_cfg;
        manifest_cfg["command"] = cmd->get_name();
        for (const auto* opt : cmd->get_options()) {
            std::string name = opt->get_name();
            if (name.rfind("--", 0) == 0 && opt->count() + cfg.count(name.substr(2)) > 0)
                manifest_cfg[name.substr(2)] = opt->results().empty() ? "" : opt->results().back();
        }

        if (cmd == gen) {
            if (out_path.empty()) out_path = "graph.edges";
            Graph g;
            check(nvm_graph_build(
                resolve_family(family, n, m, k, h, graph_seed, side).c_str(), &g.g));
            if (nvm_graph_is_lattice(g.g)) fail(2, "gen: lattice graphs are implicit");
            char* text = nullptr;
            check(nvm_graph_to_edge_list(g.g, &text));
            write_file(out_path, take_string(text));
            emit_manifest(out_path, manifest_cfg, {out_path});
            std::printf("gen: %s vertices=%d edges=%lld root=%d -> %s\n", nvm_graph_family(g.g),
                        nvm_graph_vertex_count(g.g),
                        static_cast<long long>(nvm_graph_edge_count(g.g)), nvm_graph_root(g.g),
                        out_path.c_str());
        } else if (cmd == simulate) {
            if (out_path.empty()) out_path = "trace";
            Graph g;
            check(nvm_graph_build(
                resolve_family(family, n, m, k, h, graph_seed, side).c_str(), &g.g));
            TraceHandle tr;
            check(nvm_simulate(g.g, eps, t_budget, seed, &tr.t));
            const std::string bits = out_path + ".bits", sidecar = out_path + ".json";
            check(nvm_trace_write(tr.t, bits.c_str(), sidecar.c_str()));
            emit_manifest(out_path, manifest_cfg, {bits, sidecar});
            std::printf("simulate: %s eps=%s t=%lld seed=%llu burn_in=%lld -> %s\n",
                        nvm_graph_family(g.g), fmt(eps).c_str(),
                        static_cast<long long>(t_budget),
                        static_cast<unsigned long long>(seed),
                        static_cast<long long>(nvm_trace_burn_in(tr.t)), bits.c_str());
        } else if (cmd == stats) {
            if (out_path.empty()) out_path = "stats.csv";
            TraceHandle tr;
            check(nvm_trace_read((trace_prefix + ".bits").c_str(),
                                 (trace_prefix + ".json").c_str(), &tr.t));
            std::vector<std::vector<std::string>> rows;
            double value, se, bias;
            int64_t terms;
            check(nvm_repetition_stat(tr.t, 0, d, 0, 0, &value, &se, &terms));
            rows.push_back({"plain(" + std::to_string(d) + ")", fmt(value), fmt(se),
                            std::to_string(terms)});
            check(nvm_pd_hat(tr.t, d, &value, &se, &bias));
            rows.push_back({"pd_hat(" + std::to_string(d) + ")", fmt(value), fmt(se),
                            std::to_string(terms)});
            if (kappa > 0) {
                check(nvm_repetition_stat(tr.t, 1, d, kappa, 0, &value, &se, &terms));
                rows.push_back({"thinned(" + std::to_string(d) + "," + std::to_string(kappa) + ")",
                                fmt(value), fmt(se), std::to_string(terms)});
            }
            if (!quad.empty()) {
                int q1, q2, q3;
                if (std::sscanf(quad.c_str(), "%d,%d,%d", &q1, &q2, &q3) != 3)
                    fail(2, "quad: expected d1,d2,d3");
                check(nvm_repetition_stat(tr.t, 2, q1, q2, q3, &value, &se, &terms));
                rows.push_back({"quadruple(" + quad + ")", fmt(value), fmt(se),
                                std::to_string(terms)});
            }
            if (!triple.empty()) {
                int t1, t2;
                if (std::sscanf(triple.c_str(), "%d,%d", &t1, &t2) != 2)
                    fail(2, "triple: expected d1,d2");
                double residual, cse;
                check(nvm_triple_identity(tr.t, t1, t2, &residual, &cse));
                rows.push_back({"triple_residual(" + triple + ")", fmt(residual), fmt(cse), ""});
            }
            if (do_variance) {
                char* json = nullptr;
                check(nvm_variance_profile_json(tr.t, d, &json));
                Json v = Json::parse(take_string(json));
                rows.push_back({"variance_slope(" + std::to_string(d) + ")",
                                fmt(v["slope"].get<double>()), "",
                                v["classification"].get<std::string>()});
            }
            if (clt_batches > 0) {
                int32_t kap = kappa;
                if (kap == 0) {
                    check(nvm_pd_hat(tr.t, d, &value, &se, &bias));
                    check(nvm_choose_kappa(nvm_trace_epsilon(tr.t), d, value, &kap));
                }
                char* json = nullptr;
                check(nvm_clt_report_json(tr.t, d, kap, clt_batches, &json));
                Json v = Json::parse(take_string(json));
                rows.push_back({"clt_m3(kappa=" + std::to_string(kap) + ")",
                                fmt(v["m3"].get<double>()), "", ""});
                rows.push_back({"clt_m4(kappa=" + std::to_string(kap) + ")",
                                fmt(v["m4"].get<double>()), "", ""});
            }
            if (windows > 0) {
                char* json = nullptr;
                check(nvm_window_distribution_json(tr.t, windows, &json));
                Json v = Json::parse(take_string(json));
                for (auto& [key, freq] : v.items())
                    rows.push_back({"window(" + key + ")", fmt(freq.get<double>()), "", ""});
            }
            write_rows(out_path, format, {"stat", "value", "stderr", "extra"}, rows);
            emit_manifest(out_path, manifest_cfg, {out_path});
            std::printf("stats: %zu rows -> %s\n", rows.size(), out_path.c_str());
        } else if (cmd == oracle) {
            if (out_path.empty()) out_path = "oracle.csv";
            const std::string spec = resolve_family(family, n, m, k, h, graph_seed, side);
            double pd = 0.0, pd_stderr = 0.0;
            std::string source;
            if (spec.rfind("lattice:", 0) == 0) {
                if (d != 2) fail(2, "d: only the lag-2 lattice value is available");
                check(nvm_lattice_p2(static_cast<int32_t>(std::stol(spec.substr(8))), eps,
                                     replicas, seed, &pd, &pd_stderr));
                source = "monte_carlo";
            } else {
                char* json = nullptr;
                std::vector<double> one{eps};
                check(nvm_sweep_json(spec.c_str(), spec.c_str(), d, one.data(), 1, &json));
                Json sw = Json::parse(take_string(json));
                pd = sw["rows"][0]["value_first"].get<double>();
                source = sw["rows"][0]["source"].get<std::string>();
            }
            std::vector<std::vector<std::string>> rows;
            rows.push_back({spec, fmt(eps), "p" + std::to_string(d), fmt(pd),
                            pd_stderr > 0 ? fmt(pd_stderr) : "", source});
            if (spec.rfind("complete:", 0) == 0) {
                double p1, p2;
                check(nvm_closed_forms_complete(static_cast<int32_t>(std::stol(spec.substr(9))),
                                                eps, &p1, &p2));
                rows.push_back({spec, fmt(eps), "p1", fmt(p1), "", "closed_form"});
                rows.push_back({spec, fmt(eps), "p2", fmt(p2), "", "closed_form"});
            }
            write_rows(out_path, format,
                       {"graph", "epsilon", "quantity", "value", "stderr", "source"}, rows);
            emit_manifest(out_path, manifest_cfg, {out_path});
            std::printf("oracle: %s eps=%s p%d=%s (%s) -> %s\n", spec.c_str(), fmt(eps).c_str(),
                        d, fmt(pd).c_str(), source.c_str(), out_path.c_str());
        } else if (cmd == dist) {
            if (out_path.empty()) out_path = "decision.csv";
            if (spec_a.empty() || spec_b.empty()) fail(2, "a,b: both graph descriptors required");
            char* json = nullptr;
            check(nvm_compare_json(spec_a.c_str(), spec_b.c_str(), eps, d, t_budget, significance,
                                   seed, &json));
            Json dec = Json::parse(take_string(json));
            write_rows(out_path, format,
                       {"a", "b", "epsilon", "statistic", "verdict", "z_score", "significance",
                        "samples_used", "value_first", "value_second"},
                       {{spec_a, spec_b, fmt(eps), dec["statistic"].get<std::string>(),
                         dec["verdict"].get<std::string>(), fmt(dec["z_score"].get<double>()),
                         fmt(significance), std::to_string(dec["samples_used"].get<int64_t>()),
                         fmt(dec["value_first"].get<double>()),
                         fmt(dec["value_second"].get<double>())}});
            emit_manifest(out_path, manifest_cfg, {out_path});
            std::printf("distinguish: %s vs %s -> %s (z=%s, t=%lld) -> %s\n", spec_a.c_str(),
                        spec_b.c_str(), dec["verdict"].get<std::string>().c_str(),
                        fmt(dec["z_score"].get<double>()).c_str(),
                        static_cast<long long>(dec["samples_used"].get<int64_t>()),
                        out_path.c_str());
        } else if (cmd == sweep) {
            if (out_path.empty()) out_path = "sweep.csv";
            if (spec_a.empty() || spec_b.empty()) fail(2, "a,b: both graph descriptors required");
            auto grid_values = parse_grid(grid);
            char* json = nullptr;
            check(nvm_sweep_json(spec_a.c_str(), spec_b.c_str(), d, grid_values.data(),
                                 static_cast<int32_t>(grid_values.size()), &json));
            Json sw = Json::parse(take_string(json));
            std::vector<std::vector<std::string>> rows;
            int sign_changes = 0;
            for (const auto& r : sw["rows"]) {
                const bool flag = r["sign_change_next"].get<bool>();
                sign_changes += flag;
                rows.push_back({fmt(r["epsilon"].get<double>()),
                                fmt(r["value_first"].get<double>()),
                                fmt(r["value_second"].get<double>()),
                                fmt(r["difference"].get<double>()),
                                r["source"].get<std::string>(), flag ? "1" : "0"});
            }
            write_rows(out_path, format,
                       {"epsilon", "value_first", "value_second", "difference", "source",
                        "sign_change_next"},
                       rows);
            emit_manifest(out_path, manifest_cfg, {out_path});
            std::printf("sweep: %s vs %s d=%d, %zu points, %d sign change(s) -> %s\n",
                        spec_a.c_str(), spec_b.c_str(), d, rows.size(), sign_changes,
                        out_path.c_str());
        } else if (cmd == verify) {
            if (out_path.empty()) out_path = "acceptance_results.csv";
            int32_t failures = 0;
            check(nvm_verify(criterion, out_path.c_str(), &failures));
            emit_manifest(out_path, manifest_cfg, {out_path});
            const std::string outcome =
                failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed";
            std::printf("verify: %s, results -> %s\n", outcome.c_str(), out_path.c_str());
            return failures == 0 ? 0 : 1;
        }
        return 0;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
