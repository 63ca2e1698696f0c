#include "buffgraph/buffer.hpp"
#include "buffgraph/graph.hpp"
#include "buffgraph/heterophily.hpp"
#include "buffgraph/metrics.hpp"
#include "buffgraph/nn.hpp"
#include "buffgraph/spectral.hpp"
#include "buffgraph/synth.hpp"
#include "buffgraph/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace buffgraph;
using nlohmann::json;

namespace {

void emit_summary(const json& summary) {
    std::cout << summary.dump() << std::endl;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot open " + file.string() + " for writing");
    out << text;
}

std::filesystem::path ensure_out_dir(const std::string& out) {
    std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_gates_csv(const std::filesystem::path& file, const AugmentedGraph& aug) {
    std::ostringstream out;
    out << "u,v,gate\n";
    char buf[32];
    for (std::size_t e = 0; e < aug.edges.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%.17g", aug.gates[e]);
        out << aug.edges[e].u << ',' << aug.edges[e].v << ',' << buf << '\n';
    }
    write_text(file, out.str());
}

std::vector<double> read_gates_csv(const std::filesystem::path& file,
                                   std::span<const UndirectedEdge> edges) {
    std::ifstream in(file);
    if (!in) {
        throw DatasetError(DatasetErrorKind::kMissingFile, file.string(), 0,
                           "missing gates file");
    }
    std::vector<double> gates;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue; // header
        std::int32_t u = 0, v = 0;
        double g = 0.0;
        std::size_t p1 = line.find(',');
        std::size_t p2 = line.find(',', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos) {
            throw DatasetError(DatasetErrorKind::kParse, file.string(), line_no,
                               "expected u,v,gate");
        }
        auto parse = [&](std::size_t begin, std::size_t end, auto& out_value) {
            auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + end, out_value);
            if (ec != std::errc() || ptr != line.data() + end) {
                throw DatasetError(DatasetErrorKind::kParse, file.string(), line_no,
                                   "malformed field");
            }
        };
        parse(0, p1, u);
        parse(p1 + 1, p2, v);
        parse(p2 + 1, line.size(), g);
        std::size_t e = gates.size();
        if (e >= edges.size() || edges[e].u != u || edges[e].v != v) {
            throw DatasetError(DatasetErrorKind::kParse, file.string(), line_no,
                               "edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                   ") does not match the dataset's edge order");
        }
        gates.push_back(g);
    }
    if (gates.size() != edges.size()) {
        throw DatasetError(DatasetErrorKind::kRowCountMismatch, file.string(), 0,
                           std::to_string(gates.size()) + " gates for " +
                               std::to_string(edges.size()) + " edges");
    }
    return gates;
}

void write_edge_map(const std::filesystem::path& file, const AugmentedGraph& aug) {
    json edges = json::array();
    for (std::size_t e = 0; e < aug.edges.size(); ++e) {
        const auto& s = aug.slots[e];
        edges.push_back({{"u", aug.edges[e].u},
                         {"v", aug.edges[e].v},
                         {"buffer", aug.base.num_nodes + static_cast<std::int32_t>(e)},
                         {"residual_entries", {s.res_uv, s.res_vu}},
                         {"buffer_entries", {s.u_buf, s.buf_u, s.v_buf, s.buf_v}}});
    }
    json j;
    j["num_original_nodes"] = aug.base.num_nodes;
    j["num_buffer_nodes"] = aug.num_buffer_nodes();
    j["alpha"] = aug.alpha;
    j["edges"] = std::move(edges);
    write_text(file, j.dump(2) + "\n");
}

std::vector<std::optional<double>> label_class_scores(const Graph& graph) {
    return class_scores(graph, graph.labels, node_scores(graph, graph.labels));
}

LossMode parse_loss_mode(const std::string& name) {
    if (name == "plain") return LossMode::kPlain;
    if (name == "reweight") return LossMode::kReweight;
    if (name == "balanced") return LossMode::kBalanced;
    throw InvalidArgument("unknown loss mode \"" + name + "\" (plain|reweight|balanced)");
}

TrainMethod parse_method(const std::string& name) {
    if (name == "buffgraph") return TrainMethod::kBuffGraph;
    if (name == "vanilla") return TrainMethod::kVanilla;
    throw InvalidArgument("unknown method \"" + name + "\" (buffgraph|vanilla)");
}

SplitRatios parse_ratios(const std::vector<double>& values) {
    if (values.size() != 3) throw InvalidArgument("--ratios needs three values");
    return {values[0], values[1], values[2]};
}

std::span<const std::int32_t> mask_by_name(const Split& split, const std::string& name) {
    if (name == "train") return split.train;
    if (name == "val") return split.val;
    if (name == "test") return split.test;
    throw InvalidArgument("unknown mask \"" + name + "\" (train|val|test)");
}

std::string trim(std::string_view s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    std::size_t end = s.find_last_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    return std::string(s.substr(begin, end - begin + 1));
}

/// Flat key=value config: keys are the command's long flag names, '#' starts
/// a comment, and values given on the command line win over the file.
/// Unknown keys are rejected.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
        }
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (key.empty()) {
            throw InvalidArgument(path + ":" + std::to_string(line_no) + ": empty key");
        }
        if (key == "config") {
            throw InvalidArgument(path + ":" + std::to_string(line_no) +
                                  ": config files cannot nest");
        }
        CLI::Option* option = cmd->get_option_no_throw("--" + key);
        if (option == nullptr) {
            throw InvalidArgument(path + ":" + std::to_string(line_no) +
                                  ": unknown config key \"" + key + "\"");
        }
        if (option->count() > 0) continue; // command-line flag wins
        option->add_result(value);
        option->run_callback();
    }
}

/// Required-after-config check for options that may come from either source.
void require_value(const std::string& flag, const std::string& value) {
    if (value.empty()) throw InvalidArgument(flag + " is required (flag or config file)");
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string config_file;
    std::string out;
    std::vector<std::int32_t> sizes;
    std::int32_t classes = 0; // 0 = take from sizes
    SynthConfig config;
};

void add_synth(CLI::App& app, SynthArgs& args) {
    CLI::App* cmd = app.add_subcommand("synth", "Generate a planted-partition dataset directory");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--out", args.out, "Output dataset directory");
    cmd->add_option("--sizes", args.sizes, "Comma-separated class sizes")->delimiter(',');
    cmd->add_option("--classes", args.classes,
                    "Expected class count (checked against --sizes)")
        ->capture_default_str();
    cmd->add_option("--p-in", args.config.p_in, "Intra-class edge probability")
        ->capture_default_str();
    cmd->add_option("--p-out", args.config.p_out, "Inter-class edge probability")
        ->capture_default_str();
    cmd->add_option("--dim", args.config.feature_dim, "Feature dimension")->capture_default_str();
    cmd->add_option("--mean-scale", args.config.class_mean_scale,
                    "Class feature mean magnitude")
        ->capture_default_str();
    cmd->add_option("--noise", args.config.feature_noise, "Feature noise sigma")
        ->capture_default_str();
    cmd->add_option("--seed", args.config.seed, "Random seed")->capture_default_str();

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--out", args.out);
        if (args.sizes.empty()) throw InvalidArgument("--sizes is required (flag or config file)");
        args.config.class_sizes = args.sizes;
        if (args.classes != 0 &&
            args.classes != static_cast<std::int32_t>(args.sizes.size())) {
            throw InvalidArgument("--classes " + std::to_string(args.classes) +
                                  " does not match " + std::to_string(args.sizes.size()) +
                                  " entries in --sizes");
        }
        Graph graph = generate(args.config);
        auto dir = ensure_out_dir(args.out);
        save_graph(dir, graph);

        json echo;
        echo["class_sizes"] = args.config.class_sizes;
        echo["p_in"] = args.config.p_in;
        echo["p_out"] = args.config.p_out;
        echo["feature_dim"] = args.config.feature_dim;
        echo["class_mean_scale"] = args.config.class_mean_scale;
        echo["feature_noise"] = args.config.feature_noise;
        echo["seed"] = args.config.seed;
        write_text(dir / "config.json", echo.dump(2) + "\n");

        emit_summary({{"command", "synth"},
                      {"out", args.out},
                      {"nodes", graph.num_nodes},
                      {"edges", graph.num_edges()},
                      {"classes", graph.num_classes}});
    });
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

struct AugmentArgs {
    std::string config_file;
    std::string data;
    std::string out;
    std::string gates_file;
    double alpha = 0.5;
};

void add_augment(CLI::App& app, AugmentArgs& args) {
    CLI::App* cmd = app.add_subcommand(
        "augment", "Write the buffer-augmented graph, edge map, and gates");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--data", args.data, "Input dataset directory");
    cmd->add_option("--out", args.out, "Output directory");
    cmd->add_option("--alpha", args.alpha, "Mixup coefficient")->capture_default_str();
    cmd->add_option("--gates", args.gates_file,
                    "gates.csv to apply (default: all gates 0.5)");

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--data", args.data);
        require_value("--out", args.out);
        Graph graph = load_graph(args.data);
        AugmentedGraph aug = augment(graph, args.alpha);
        if (!args.gates_file.empty() && !aug.edges.empty()) {
            set_gates(aug, read_gates_csv(args.gates_file, aug.edges));
        }
        auto dir = ensure_out_dir(args.out);

        Graph as_graph;
        as_graph.num_nodes = aug.num_nodes();
        as_graph.num_classes = graph.num_classes;
        as_graph.row_offsets = aug.adjacency.offsets;
        as_graph.col_indices = aug.adjacency.indices;
        as_graph.features = aug.features;
        as_graph.labels = aug.labels;
        validate(as_graph);
        save_graph(dir, as_graph);
        write_edge_map(dir / "edge_map.json", aug);
        write_gates_csv(dir / "gates.csv", aug);

        emit_summary({{"command", "augment"},
                      {"out", args.out},
                      {"original_nodes", graph.num_nodes},
                      {"buffer_nodes", aug.num_buffer_nodes()},
                      {"nodes", as_graph.num_nodes},
                      {"edges", as_graph.num_edges()}});
    });
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config_file;
    std::string data;
    std::string out = "out";
    std::string loss_mode = "plain";
    std::string method = "buffgraph";
    std::vector<double> ratios = {0.6, 0.2, 0.2};
    double rho = 1.0;
    TrainConfig config;
};

void add_train(CLI::App& app, TrainArgs& args) {
    CLI::App* cmd = app.add_subcommand("train", "Two-stage gated training with evaluation");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--data", args.data, "Input dataset directory");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_option("--alpha", args.config.alpha, "Mixup coefficient")->capture_default_str();
    cmd->add_option("--lambda", args.config.lambda, "Heterophily loss weight")
        ->capture_default_str();
    cmd->add_option("--margin", args.config.margin, "Heterophily loss margin")
        ->capture_default_str();
    cmd->add_option("--rho", args.rho, "Train-mask imbalance ratio (1 = natural split)")
        ->capture_default_str();
    cmd->add_option("--loss-mode", args.loss_mode, "plain|reweight|balanced")
        ->capture_default_str();
    cmd->add_option("--method", args.method, "buffgraph|vanilla")->capture_default_str();
    cmd->add_option("--seed", args.config.seed, "Random seed")->capture_default_str();
    cmd->add_option("--lr", args.config.lr, "Learning rate")->capture_default_str();
    cmd->add_option("--hidden", args.config.hidden_dim, "Hidden width")->capture_default_str();
    cmd->add_option("--dropout", args.config.dropout, "Dropout rate")->capture_default_str();
    cmd->add_option("--max-epochs", args.config.max_epochs, "Training epoch cap")
        ->capture_default_str();
    cmd->add_option("--patience", args.config.patience, "Early-stopping patience")
        ->capture_default_str();
    cmd->add_option("--pretrain-epochs", args.config.pretrain_epochs,
                    "Vanilla pretraining epochs")
        ->capture_default_str();
    cmd->add_option("--ratios", args.ratios, "Train,val,test split ratios")
        ->delimiter(',')
        ->capture_default_str();

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--data", args.data);
        args.config.loss_mode = parse_loss_mode(args.loss_mode);
        args.config.method = parse_method(args.method);

        EdgeListReport load_report;
        Graph graph = load_graph(args.data, &load_report);
        if (load_report.self_loops_dropped > 0) {
            std::cerr << "warning: dropped " << load_report.self_loops_dropped
                      << " self-loop(s) from " << args.data << "\n";
        }
        Split split = split_random(graph, parse_ratios(args.ratios), args.config.seed);
        if (args.rho > 1.0) {
            split = make_imbalanced(split, graph, args.rho, args.config.seed);
        }

        if (args.config.method == TrainMethod::kBuffGraph && args.config.lambda > 0.0) {
            std::vector<char> in_train(static_cast<std::size_t>(graph.num_nodes), 0);
            for (std::int32_t v : split.train) in_train[static_cast<std::size_t>(v)] = 1;
            bool any = false;
            for (const auto& e : undirected_edges(graph)) {
                if (in_train[static_cast<std::size_t>(e.u)] &&
                    in_train[static_cast<std::size_t>(e.v)]) {
                    any = true;
                    break;
                }
            }
            if (!any) {
                std::cerr << "warning: no edge has both endpoints in the train mask; "
                             "the heterophily loss contributes nothing\n";
            }
        }

        FitResult result = fit(graph, split, args.config);

        auto dir = ensure_out_dir(args.out);
        save_masks(dir / "masks.json", split);
        write_train_log(dir / "train_log.csv", result.log);
        save_model(dir / "best_model.bin", result.model);
        write_gates_csv(dir / "gates.csv", result.aug);

        auto class_h = label_class_scores(graph);
        MetricsReport test_report = evaluate(result.model, result.aug, split.test, "test", &class_h);
        for (std::int32_t c : test_report.zero_support_classes) {
            std::cerr << "warning: class " << c
                      << " has no test-mask member; excluded from BAcc/macro-F1\n";
        }
        write_text(dir / "metrics.json", metrics_json(test_report) + "\n");
        write_text(dir / "class_report.csv", class_report_csv(class_report(test_report)));

        emit_summary({{"command", "train"},
                      {"out", args.out},
                      {"method", args.method},
                      {"seed", args.config.seed},
                      {"rho", args.rho},
                      {"epochs_run", result.log.records.size()},
                      {"best_epoch", result.log.best_epoch},
                      {"best_val_bacc", result.log.best_val_bacc},
                      {"test_acc", test_report.acc},
                      {"test_bacc", test_report.bacc},
                      {"test_macro_f1", test_report.macro_f1}});
    });
}

struct EvalArgs {
    std::string config_file;
    std::string data;
    std::string model;
    std::string masks;
    std::string gates_file;
    std::string mask = "test";
    std::string out = "out";
    double alpha = 0.5;
};

void add_eval(CLI::App& app, EvalArgs& args) {
    CLI::App* cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a stored split");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--data", args.data, "Input dataset directory");
    cmd->add_option("--model", args.model, "Model checkpoint (best_model.bin)");
    cmd->add_option("--masks", args.masks, "masks.json with train/val/test arrays");
    cmd->add_option("--gates", args.gates_file,
                    "gates.csv (default: all gates 0, vanilla message passing)");
    cmd->add_option("--mask", args.mask, "Mask to evaluate: train|val|test")
        ->capture_default_str();
    cmd->add_option("--alpha", args.alpha, "Mixup coefficient")->capture_default_str();
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--data", args.data);
        require_value("--model", args.model);
        require_value("--masks", args.masks);
        Graph graph = load_graph(args.data);
        Split split = load_masks(args.masks);
        ModelState model = load_model(args.model);
        AugmentedGraph aug = augment(graph, args.alpha);
        if (!aug.edges.empty()) {
            std::vector<double> gates(aug.edges.size(), 0.0);
            if (!args.gates_file.empty()) gates = read_gates_csv(args.gates_file, aug.edges);
            set_gates(aug, gates);
        }
        auto class_h = label_class_scores(graph);
        MetricsReport report =
            evaluate(model, aug, mask_by_name(split, args.mask), args.mask, &class_h);
        for (std::int32_t c : report.zero_support_classes) {
            std::cerr << "warning: class " << c << " has no " << args.mask
                      << "-mask member; excluded from BAcc/macro-F1\n";
        }
        auto dir = ensure_out_dir(args.out);
        write_text(dir / "metrics.json", metrics_json(report) + "\n");
        write_text(dir / "class_report.csv", class_report_csv(class_report(report)));

        emit_summary({{"command", "eval"},
                      {"out", args.out},
                      {"mask", args.mask},
                      {"acc", report.acc},
                      {"bacc", report.bacc},
                      {"macro_f1", report.macro_f1}});
    });
}

// ---------------------------------------------------------------------------
// spectral / report-heterophily / bench
// ---------------------------------------------------------------------------

struct SpectralArgs {
    std::string config_file;
    std::string data;
    std::string out = "out";
    std::string gates_file;
    double alpha = 0.5;
    double gate = 0.5;
};

void add_spectral(CLI::App& app, SpectralArgs& args) {
    CLI::App* cmd = app.add_subcommand(
        "spectral", "Laplacian spectra before/after buffer insertion");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--data", args.data, "Input dataset directory");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_option("--alpha", args.alpha, "Mixup coefficient")->capture_default_str();
    cmd->add_option("--gate", args.gate, "Uniform gate value")->capture_default_str();
    cmd->add_option("--gates", args.gates_file, "gates.csv (overrides --gate)");

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--data", args.data);
        Graph graph = load_graph(args.data);
        auto edges = undirected_edges(graph);
        std::vector<double> gates(edges.size(), args.gate);
        if (!args.gates_file.empty()) gates = read_gates_csv(args.gates_file, edges);
        SpectrumReport report = eigenvalue_shift(graph, args.alpha, gates);
        auto dir = ensure_out_dir(args.out);
        write_text(dir / "spectrum_report.json", spectrum_json(report) + "\n");

        double min_delta = 0.0, max_delta = 0.0;
        for (double d : report.delta) {
            min_delta = std::min(min_delta, d);
            max_delta = std::max(max_delta, d);
        }
        emit_summary({{"command", "spectral"},
                      {"out", args.out},
                      {"base_nodes", report.base_nodes},
                      {"augmented_nodes", report.augmented_nodes},
                      {"min_delta", min_delta},
                      {"max_delta", max_delta}});
    });
}

struct HeterophilyArgs {
    std::string config_file;
    std::string data;
    std::string out = "out";
};

void add_report_heterophily(CLI::App& app, HeterophilyArgs& args) {
    CLI::App* cmd = app.add_subcommand(
        "report-heterophily", "Class sizes and class heterophily scores as CSV");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--data", args.data, "Input dataset directory");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        require_value("--data", args.data);
        Graph graph = load_graph(args.data);
        auto class_h = label_class_scores(graph);
        std::vector<std::int64_t> sizes(static_cast<std::size_t>(graph.num_classes), 0);
        for (std::int32_t label : graph.labels) {
            if (label != kNoLabel) sizes[static_cast<std::size_t>(label)]++;
        }
        // Classes in descending size order, as in the class-wise analysis.
        std::vector<std::int32_t> order(static_cast<std::size_t>(graph.num_classes));
        for (std::int32_t c = 0; c < graph.num_classes; ++c) order[static_cast<std::size_t>(c)] = c;
        std::sort(order.begin(), order.end(), [&sizes](std::int32_t a, std::int32_t b) {
            if (sizes[static_cast<std::size_t>(a)] != sizes[static_cast<std::size_t>(b)]) {
                return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
            }
            return a < b;
        });
        std::ostringstream csv;
        csv << "class,size,heterophily\n";
        char buf[32];
        for (std::int32_t c : order) {
            csv << c << ',' << sizes[static_cast<std::size_t>(c)] << ',';
            if (class_h[static_cast<std::size_t>(c)].has_value()) {
                std::snprintf(buf, sizeof buf, "%.17g", *class_h[static_cast<std::size_t>(c)]);
                csv << buf;
            }
            csv << '\n';
        }
        auto dir = ensure_out_dir(args.out);
        write_text(dir / "class_heterophily.csv", csv.str());

        emit_summary({{"command", "report-heterophily"},
                      {"out", args.out},
                      {"classes", graph.num_classes},
                      {"nodes", graph.num_nodes}});
    });
}

struct BenchArgs {
    std::string config_file;
    std::string out = "out";
    BenchConfig config;
};

void add_bench(CLI::App& app, BenchArgs& args) {
    CLI::App* cmd = app.add_subcommand(
        "bench", "Per-size mean epoch wall time on synthetic graphs");
    cmd->add_option("--config", args.config_file,
                    "Config file with key=value lines (# comments); flags win");
    cmd->add_option("--sizes", args.config.sizes, "Ascending node counts")->delimiter(',');
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_option("--epochs", args.config.epochs, "Timed training epochs per size")
        ->capture_default_str();
    cmd->add_option("--hidden", args.config.hidden_dim, "Hidden width")->capture_default_str();
    cmd->add_option("--degree", args.config.avg_degree, "Expected average degree")
        ->capture_default_str();
    cmd->add_option("--dim", args.config.feature_dim, "Feature dimension")
        ->capture_default_str();
    cmd->add_option("--seed", args.config.seed, "Random seed")->capture_default_str();

    cmd->callback([&args, cmd] {
        apply_config_file(cmd, args.config_file);
        if (args.config.sizes.empty()) {
            throw InvalidArgument("--sizes is required (flag or config file)");
        }
        BenchResult result = run_bench(args.config);
        std::ostringstream csv;
        csv << "size,nodes,edges,train_ms,eval_ms\n";
        char buf[64];
        for (const auto& row : result.rows) {
            std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.3f,%.3f\n", row.size,
                          static_cast<long long>(row.nodes), static_cast<long long>(row.edges),
                          row.train_ms, row.eval_ms);
            csv << buf;
        }
        auto dir = ensure_out_dir(args.out);
        write_text(dir / "bench.csv", csv.str());

        json summary = {{"command", "bench"},
                        {"out", args.out},
                        {"sizes", args.config.sizes}};
        if (result.rows.size() >= 2) {
            summary["r_squared"] = result.train_time_fit.r_squared;
            summary["ms_per_node"] = result.train_time_fit.slope;
        }
        emit_summary(summary);
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"buffgraph: class-imbalanced node classification with buffer-node "
                 "message passing"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    AugmentArgs augment_args;
    TrainArgs train_args;
    EvalArgs eval_args;
    SpectralArgs spectral_args;
    HeterophilyArgs heterophily_args;
    BenchArgs bench_args;

    add_synth(app, synth_args);
    add_augment(app, augment_args);
    add_train(app, train_args);
    add_eval(app, eval_args);
    add_spectral(app, spectral_args);
    add_report_heterophily(app, heterophily_args);
    add_bench(app, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
