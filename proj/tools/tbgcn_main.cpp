// tbgcn: generate synthetic networks, compute structural statistics, and
// train/evaluate trivial-bundle GCN models for link prediction and node
// classification.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbgcn/generators.hpp"
#include "tbgcn/graph.hpp"
#include "tbgcn/metrics.hpp"
#include "tbgcn/model.hpp"
#include "tbgcn/netstats.hpp"
#include "tbgcn/training.hpp"

using nlohmann::json;
using namespace tbgcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

json config_to_json(const ExperimentConfig& c) {
    return json{
        {"hidden_base", c.hidden_base},
        {"hidden_fiber", c.hidden_fiber},
        {"num_layers", c.num_layers},
        {"lr", c.lr},
        {"weight_decay", c.weight_decay},
        {"dropconnect_p", c.dropconnect_p},
        {"r", c.r},
        {"t", c.t},
        {"gamma", c.gamma},
        {"variant", c.variant == ModelVariant::tb ? "tb" : "baseline"},
        {"nc_decoder", c.nc_decoder == NcDecoder::sub   ? "sub"
                       : c.nc_decoder == NcDecoder::div ? "div"
                                                        : "mul"},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"split_seed", c.split_seed},
        {"model_seed", c.model_seed},
        {"frac_train", c.fractions.train},
        {"frac_val", c.fractions.val},
        {"frac_test", c.fractions.test},
        {"multi_view", c.multi_view},
        {"use_features", c.use_features},
    };
}

void config_from_json(const json& j, ExperimentConfig& c) {
    c.hidden_base = j.value("hidden_base", c.hidden_base);
    c.hidden_fiber = j.value("hidden_fiber", c.hidden_fiber);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.dropconnect_p = j.value("dropconnect_p", c.dropconnect_p);
    c.r = j.value("r", c.r);
    c.t = j.value("t", c.t);
    c.gamma = j.value("gamma", c.gamma);
    if (j.contains("variant")) {
        c.variant = j["variant"] == "tb" ? ModelVariant::tb : ModelVariant::euclidean_baseline;
    }
    if (j.contains("nc_decoder")) {
        const std::string d = j["nc_decoder"];
        c.nc_decoder = d == "div" ? NcDecoder::div : d == "mul" ? NcDecoder::mul : NcDecoder::sub;
    }
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.split_seed = j.value("split_seed", c.split_seed);
    c.model_seed = j.value("model_seed", c.model_seed);
    c.fractions.train = j.value("frac_train", c.fractions.train);
    c.fractions.val = j.value("frac_val", c.fractions.val);
    c.fractions.test = j.value("frac_test", c.fractions.test);
    c.multi_view = j.value("multi_view", c.multi_view);
    c.use_features = j.value("use_features", c.use_features);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write: " + path);
    out << j.dump(2) << '\n';
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::string family;
    std::string out;
    int nodes = 1000;
    int k = 4;
    double p = 0.1;
    int m = 7;
    std::string blocks = "500,500";
    double p_in = 0.2;
    double p_out = 0.01;
    double radius = -1.0;
    int branching = 10;
    std::string grid = "25,28";  // 700 grid cells, total edge count near 2.35k at n=1000
    std::uint64_t seed = 1234;
};

int run_generate(const GenerateArgs& a) {
    json spec{{"family", a.family}, {"seed", a.seed}};
    Graph g = [&]() -> Graph {
        if (a.family == "ws") {
            spec["n"] = a.nodes; spec["k"] = a.k; spec["p"] = a.p;
            return generators::gen_ws(a.nodes, a.k, a.p, a.seed);
        }
        if (a.family == "pa") {
            spec["n"] = a.nodes; spec["m"] = a.m;
            return generators::gen_pa(a.nodes, a.m, a.seed);
        }
        if (a.family == "sbm") {
            auto sizes = parse_int_list(a.blocks);
            spec["block_sizes"] = sizes; spec["p_in"] = a.p_in; spec["p_out"] = a.p_out;
            return generators::gen_sbm(sizes, a.p_in, a.p_out, a.seed);
        }
        if (a.family == "rgg") {
            const double r = a.radius > 0 ? a.radius : generators::kDefaultRggRadius;
            spec["n"] = a.nodes; spec["radius"] = r;
            return generators::gen_rgg(a.nodes, r, a.seed);
        }
        if (a.family == "tree") {
            spec["n"] = a.nodes; spec["branching"] = a.branching;
            spec.erase("seed");  // deterministic family
            return generators::gen_tree(a.nodes, a.branching);
        }
        if (a.family == "tree_lattice") {
            auto dims = parse_int_list(a.grid);
            if (dims.size() != 2) throw std::invalid_argument("--grid must be gx,gy");
            spec["n"] = a.nodes; spec["branching"] = a.branching; spec["grid"] = dims;
            return generators::gen_tree_lattice(a.nodes, a.branching, {dims[0], dims[1]}, a.seed);
        }
        if (a.family == "tree_rgg") {
            const double r = a.radius > 0 ? a.radius : generators::kDefaultTreeRggRadius;
            spec["n"] = a.nodes; spec["branching"] = a.branching; spec["radius"] = r;
            return generators::gen_tree_rgg(a.nodes, a.branching, r, a.seed);
        }
        throw std::invalid_argument("unknown family: " + a.family);
    }();

    write_edge_list(a.out, g);
    if (g.has_labels()) {
        std::ofstream lab(a.out + ".labels.csv");
        for (int i = 0; i < g.num_nodes(); ++i) lab << i << ',' << g.labels()[i] << '\n';
    }
    spec["num_nodes"] = g.num_nodes();
    spec["num_edges"] = g.num_edges();
    write_json(a.out + ".json", spec);
    std::cout << "wrote " << a.out << " (" << g.num_nodes() << " nodes, " << g.num_edges()
              << " edges)\n";
    return kExitOk;
}

// --- stats ------------------------------------------------------------------

int run_stats(const std::string& graph_path, const std::string& out_path,
              const std::string& nk_csv) {
    Graph g = load_graph(graph_path);
    json rep;
    auto assort = g.num_edges() > 0 ? netstats::assortativity(g) : std::nullopt;
    if (assort) {
        rep["assortativity"] = *assort;
    } else {
        rep["assortativity"] = "undefined";
    }
    json hist = json::object();
    for (auto [k, c] : netstats::degree_histogram(g)) hist[std::to_string(k)] = c;
    rep["degree_histogram"] = hist;
    json nk = json::object();
    const auto curve = netstats::nk_curve(g);
    for (auto [k, v] : curve) nk[std::to_string(k)] = v;
    rep["nk_curve"] = nk;
    if (out_path.empty()) {
        std::cout << rep.dump(2) << '\n';
    } else {
        write_json(out_path, rep);
    }
    if (!nk_csv.empty()) {
        std::ofstream out(nk_csv);
        if (!out) throw data_error("cannot write: " + nk_csv);
        out << "k,nk\n";
        for (auto [k, v] : curve) out << k << ',' << v << '\n';
    }
    return kExitOk;
}

// --- train / eval -----------------------------------------------------------

struct TrainArgs {
    std::string task = "lp";
    std::string graph_path, feature_path, label_path, config_path;
    std::string out = "report.json";
    std::string history_path, checkpoint_path;
    std::string model, nc_decoder, seeds;
    bool gamma_sweep = false;
    double lr = -1, gamma = -1, r = -1, t = -1, weight_decay = -1, dropconnect_p = -1;
    int max_epochs = -1, patience = -1, hidden_base = -1, hidden_fiber = -1, num_layers = -1;
    long long split_seed = -1, model_seed = -1;
};

ExperimentConfig assemble_config(const TrainArgs& a) {
    ExperimentConfig c;
    if (a.task == "nc") c.fractions = {0.70, 0.15, 0.15};
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw data_error("cannot open config: " + a.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw data_error("malformed config " + a.config_path + ": " + e.what());
        }
        config_from_json(j, c);
    }
    // flags override file values
    if (!a.model.empty())
        c.variant = a.model == "baseline" ? ModelVariant::euclidean_baseline : ModelVariant::tb;
    if (!a.nc_decoder.empty()) {
        c.nc_decoder = a.nc_decoder == "div"   ? NcDecoder::div
                       : a.nc_decoder == "mul" ? NcDecoder::mul
                                               : NcDecoder::sub;
    }
    if (a.lr > 0) c.lr = a.lr;
    if (a.gamma >= 0) c.gamma = a.gamma;
    if (a.r > 0) c.r = a.r;
    if (a.t > 0) c.t = a.t;
    if (a.weight_decay >= 0) c.weight_decay = a.weight_decay;
    if (a.dropconnect_p >= 0) c.dropconnect_p = a.dropconnect_p;
    if (a.max_epochs >= 0) c.max_epochs = a.max_epochs;
    if (a.patience >= 0) c.patience = a.patience;
    if (a.hidden_base > 0) c.hidden_base = a.hidden_base;
    if (a.hidden_fiber > 0) c.hidden_fiber = a.hidden_fiber;
    if (a.num_layers > 0) c.num_layers = a.num_layers;
    if (a.split_seed >= 0) c.split_seed = static_cast<std::uint64_t>(a.split_seed);
    if (a.model_seed >= 0) c.model_seed = static_cast<std::uint64_t>(a.model_seed);
    c.validate();
    return c;
}

json metrics_to_json(Task task, const EvalMetrics& m) {
    if (task == Task::lp) return json{{"auc", m.auc}, {"ap", m.ap}};
    return json{{"f1_micro", m.f1_micro}, {"f1_macro", m.f1_macro}};
}

int run_train(const TrainArgs& a) {
    if (a.task != "lp" && a.task != "nc") throw std::invalid_argument("--task must be lp or nc");
    const Task task = a.task == "lp" ? Task::lp : Task::nc;
    if (task == Task::nc && a.label_path.empty()) {
        throw data_error("nc task requires --labels");
    }
    Graph g = load_graph(a.graph_path, a.feature_path, a.label_path);
    ExperimentConfig base = assemble_config(a);

    std::vector<std::uint64_t> model_seeds{base.model_seed};
    if (!a.seeds.empty()) {
        model_seeds.clear();
        for (int s : parse_int_list(a.seeds)) model_seeds.push_back(static_cast<std::uint64_t>(s));
    }
    std::vector<double> gammas{base.gamma};
    if (a.gamma_sweep) gammas = {0.0, 0.25, 0.5, 0.75, 1.0};

    json runs = json::array();
    std::vector<double> primary;  // auc (lp) or f1_micro (nc) per run
    bool diverged = false;
    for (double gamma : gammas) {
        for (std::uint64_t seed : model_seeds) {
            ExperimentConfig cfg = base;
            cfg.gamma = gamma;
            cfg.model_seed = seed;
            SplitPlan plan = task == Task::lp ? split_lp(g, cfg.fractions, cfg.split_seed)
                                             : split_nc(g, cfg.fractions, cfg.split_seed);
            const auto t0 = std::chrono::steady_clock::now();
            TrainResult res = train(cfg, g, plan);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            diverged = diverged || res.diverged;
            EvalMetrics m = evaluate(cfg, g, plan, res.best_params);
            json run{{"model_seed", seed},
                     {"split_seed", cfg.split_seed},
                     {"gamma", gamma},
                     {"best_epoch", res.best_epoch},
                     {"epochs_run", res.history.size()},
                     {"diverged", res.diverged},
                     {"wall_time_s", wall},
                     {"metrics", metrics_to_json(task, m)}};
            runs.push_back(run);
            primary.push_back(task == Task::lp ? m.auc : m.f1_micro);
            if (!a.history_path.empty()) write_history_csv(a.history_path, res.history);
            if (!a.checkpoint_path.empty()) save_checkpoint(a.checkpoint_path, res.best_params);
        }
    }

    json rep{{"task", a.task}, {"config", config_to_json(base)}, {"runs", runs}};
    if (primary.size() > 1 && !a.gamma_sweep) {
        double mean = 0;
        for (double v : primary) mean += v;
        mean /= static_cast<double>(primary.size());
        double var = 0;
        for (double v : primary) var += (v - mean) * (v - mean);
        var /= static_cast<double>(primary.size());
        rep["aggregate"] = {{"mean", mean}, {"std", std::sqrt(var)}, {"n", primary.size()}};
    }
    write_json(a.out, rep);
    std::cout << "wrote " << a.out << '\n';
    return diverged ? kExitDivergence : kExitOk;
}

struct EvalArgs {
    std::string task = "lp";
    std::string graph_path, feature_path, label_path, config_path, checkpoint_path;
    std::string out;
};

int run_eval(const EvalArgs& a) {
    if (a.task != "lp" && a.task != "nc") throw std::invalid_argument("--task must be lp or nc");
    const Task task = a.task == "lp" ? Task::lp : Task::nc;
    Graph g = load_graph(a.graph_path, a.feature_path, a.label_path);
    TrainArgs ta;
    ta.task = a.task;
    ta.config_path = a.config_path;
    ExperimentConfig cfg = assemble_config(ta);
    ModelParams params = load_checkpoint(a.checkpoint_path);
    cfg.variant = params.variant;
    SplitPlan plan = task == Task::lp ? split_lp(g, cfg.fractions, cfg.split_seed)
                                      : split_nc(g, cfg.fractions, cfg.split_seed);
    EvalMetrics m = evaluate(cfg, g, plan, params);
    json rep{{"task", a.task},
             {"config", config_to_json(cfg)},
             {"checkpoint", a.checkpoint_path},
             {"metrics", metrics_to_json(task, m)}};
    if (a.out.empty()) {
        std::cout << rep.dump(2) << '\n';
    } else {
        write_json(a.out, rep);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trivial-bundle GCN toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cgen = app.add_subcommand("generate", "Generate a synthetic network");
    cgen->add_option("--family", gen.family,
                     "ws|pa|sbm|rgg|tree|tree_lattice|tree_rgg")->required();
    cgen->add_option("--out", gen.out, "output edge-list path")->required();
    cgen->add_option("--nodes", gen.nodes, "node count");
    cgen->add_option("--k", gen.k, "ws: even lattice degree");
    cgen->add_option("--p", gen.p, "ws: rewiring probability");
    cgen->add_option("--m", gen.m, "pa: edges per new node");
    cgen->add_option("--blocks", gen.blocks, "sbm: comma-separated block sizes");
    cgen->add_option("--p-in", gen.p_in, "sbm: intra-block probability");
    cgen->add_option("--p-out", gen.p_out, "sbm: inter-block probability");
    cgen->add_option("--radius", gen.radius, "rgg/tree_rgg: connection radius");
    cgen->add_option("--branching", gen.branching, "tree: children per node");
    cgen->add_option("--grid", gen.grid, "tree_lattice: gx,gy");
    cgen->add_option("--seed", gen.seed, "generator seed");

    std::string stats_graph, stats_out, stats_nk_csv;
    auto* cstats = app.add_subcommand("stats", "Structural statistics of a graph");
    cstats->add_option("--graph", stats_graph, "edge-list path")->required();
    cstats->add_option("--out", stats_out, "JSON output path (stdout if omitted)");
    cstats->add_option("--nk-csv", stats_nk_csv, "optional N(k) curve CSV path");

    TrainArgs tr;
    auto* ctrain = app.add_subcommand("train", "Train and evaluate a model");
    ctrain->add_option("--task", tr.task, "lp|nc");
    ctrain->add_option("--graph", tr.graph_path, "edge-list path")->required();
    ctrain->add_option("--features", tr.feature_path, "feature CSV");
    ctrain->add_option("--labels", tr.label_path, "label CSV");
    ctrain->add_option("--config", tr.config_path, "JSON config file");
    ctrain->add_option("--out", tr.out, "report JSON path");
    ctrain->add_option("--history", tr.history_path, "per-epoch history CSV");
    ctrain->add_option("--checkpoint", tr.checkpoint_path, "best-parameters checkpoint path");
    ctrain->add_option("--model", tr.model, "tb|baseline");
    ctrain->add_option("--nc-decoder", tr.nc_decoder, "sub|div|mul");
    ctrain->add_option("--seeds", tr.seeds, "comma-separated model seeds (fan-out)");
    ctrain->add_flag("--gamma-sweep", tr.gamma_sweep, "sweep gamma over {0,0.25,0.5,0.75,1}");
    ctrain->add_option("--lr", tr.lr);
    ctrain->add_option("--gamma", tr.gamma);
    ctrain->add_option("--r", tr.r);
    ctrain->add_option("--t", tr.t);
    ctrain->add_option("--weight-decay", tr.weight_decay);
    ctrain->add_option("--dropconnect-p", tr.dropconnect_p);
    ctrain->add_option("--max-epochs", tr.max_epochs);
    ctrain->add_option("--patience", tr.patience);
    ctrain->add_option("--hidden-base", tr.hidden_base);
    ctrain->add_option("--hidden-fiber", tr.hidden_fiber);
    ctrain->add_option("--num-layers", tr.num_layers);
    ctrain->add_option("--split-seed", tr.split_seed);
    ctrain->add_option("--model-seed", tr.model_seed);

    EvalArgs ev;
    auto* ceval = app.add_subcommand("eval", "Re-score a checkpoint on a split");
    ceval->add_option("--task", ev.task, "lp|nc");
    ceval->add_option("--graph", ev.graph_path, "edge-list path")->required();
    ceval->add_option("--features", ev.feature_path, "feature CSV");
    ceval->add_option("--labels", ev.label_path, "label CSV");
    ceval->add_option("--config", ev.config_path, "JSON config file");
    ceval->add_option("--checkpoint", ev.checkpoint_path, "checkpoint path")->required();
    ceval->add_option("--out", ev.out, "report JSON path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cgen->parsed()) return run_generate(gen);
        if (cstats->parsed()) return run_stats(stats_graph, stats_out, stats_nk_csv);
        if (ctrain->parsed()) return run_train(tr);
        if (ceval->parsed()) return run_eval(ev);
    } catch (const divergence_error& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
