#include "buffgraph/graph.hpp"

#include "buffgraph/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace buffgraph {

namespace {

constexpr std::uint64_t kSplitStreamTag = 0x53504c49ull;      // per-class split shuffles
constexpr std::uint64_t kImbalanceStreamTag = 0x494d424cull;  // per-class downsampling

std::string read_to_string(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DatasetError(DatasetErrorKind::kMissingFile, file.string(), 0,
                           "missing or unreadable file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Invokes fn(line, line_number) for every non-empty line; line_number is 1-based.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) fn(line, line_no);
        pos = end + 1;
    }
}

std::int64_t parse_int_field(std::string_view field, const std::string& file,
                             std::size_t line) {
    std::int64_t value = 0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw DatasetError(DatasetErrorKind::kParse, file, line,
                           "expected an integer, got \"" + std::string(field) + "\"");
    }
    return value;
}

double parse_double_field(std::string_view field, const std::string& file,
                          std::size_t line) {
    double value = 0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw DatasetError(DatasetErrorKind::kParse, file, line,
                           "expected a number, got \"" + std::string(field) + "\"");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t end = line.find(sep, pos);
        if (end == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

std::vector<std::int64_t> class_counts(const Graph& graph,
                                       std::span<const std::int32_t> mask) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(graph.num_classes), 0);
    for (std::int32_t v : mask) {
        std::int32_t label = graph.labels[static_cast<std::size_t>(v)];
        if (label != kNoLabel) counts[static_cast<std::size_t>(label)]++;
    }
    return counts;
}

} // namespace

Graph build_graph(std::int32_t num_nodes,
                  std::span<const std::pair<std::int32_t, std::int32_t>> pairs,
                  Matrix features, std::vector<std::int32_t> labels,
                  std::int32_t num_classes, EdgeListReport* report) {
    std::vector<std::pair<std::int32_t, std::int32_t>> canonical;
    canonical.reserve(pairs.size());
    std::size_t self_loops = 0;
    for (auto [u, v] : pairs) {
        if (u == v) {
            ++self_loops;
            continue;
        }
        canonical.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canonical.begin(), canonical.end());
    std::size_t before = canonical.size();
    canonical.erase(std::unique(canonical.begin(), canonical.end()), canonical.end());
    if (report != nullptr) {
        report->self_loops_dropped = self_loops;
        report->duplicates_merged = before - canonical.size();
    }

    Graph g;
    g.num_nodes = num_nodes;
    g.num_classes = num_classes;
    g.features = std::move(features);
    g.labels = std::move(labels);

    std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(num_nodes));
    for (auto [u, v] : canonical) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    g.row_offsets.resize(static_cast<std::size_t>(num_nodes) + 1);
    g.col_indices.resize(static_cast<std::size_t>(2) * canonical.size());
    std::int64_t offset = 0;
    for (std::int32_t i = 0; i < num_nodes; ++i) {
        auto& row = adj[static_cast<std::size_t>(i)];
        std::sort(row.begin(), row.end());
        g.row_offsets[static_cast<std::size_t>(i)] = offset;
        for (std::int32_t j : row) g.col_indices[static_cast<std::size_t>(offset++)] = j;
    }
    g.row_offsets[static_cast<std::size_t>(num_nodes)] = offset;

    validate(g);
    return g;
}

void validate(const Graph& graph) {
    if (graph.num_nodes < 0) throw InvalidArgument("graph: negative node count");
    if (graph.row_offsets.size() != static_cast<std::size_t>(graph.num_nodes) + 1) {
        throw InvalidArgument("graph: row_offsets size mismatch");
    }
    if (graph.features.rows() != graph.num_nodes) {
        throw InvalidArgument("graph: features row count " +
                              std::to_string(graph.features.rows()) +
                              " != num_nodes " + std::to_string(graph.num_nodes));
    }
    if (graph.labels.size() != static_cast<std::size_t>(graph.num_nodes)) {
        throw InvalidArgument("graph: labels size mismatch");
    }
    for (std::int32_t v = 0; v < graph.num_nodes; ++v) {
        std::int32_t label = graph.labels[static_cast<std::size_t>(v)];
        if (label != kNoLabel && (label < 0 || label >= graph.num_classes)) {
            throw InvalidArgument("graph: label " + std::to_string(label) +
                                  " of node " + std::to_string(v) +
                                  " outside [0, " + std::to_string(graph.num_classes) + ")");
        }
        if (graph.row_offsets[static_cast<std::size_t>(v) + 1] <
            graph.row_offsets[static_cast<std::size_t>(v)]) {
            throw InvalidArgument("graph: row_offsets not monotone");
        }
        std::int32_t prev = -1;
        for (std::int64_t k = graph.row_offsets[v]; k < graph.row_offsets[v + 1]; ++k) {
            std::int32_t j = graph.col_indices[static_cast<std::size_t>(k)];
            if (j < 0 || j >= graph.num_nodes) {
                throw InvalidArgument("graph: column index out of range");
            }
            if (j == v) throw InvalidArgument("graph: self-loop at node " + std::to_string(v));
            if (j <= prev) throw InvalidArgument("graph: columns not strictly increasing in row " +
                                                 std::to_string(v));
            prev = j;
        }
    }
    // Symmetry: (u, v) present iff (v, u) present.
    for (std::int32_t u = 0; u < graph.num_nodes; ++u) {
        for (std::int32_t v : graph.neighbors(u)) {
            auto nb = graph.neighbors(v);
            if (!std::binary_search(nb.begin(), nb.end(), u)) {
                throw InvalidArgument("graph: edge (" + std::to_string(u) + ", " +
                                      std::to_string(v) + ") has no reverse entry");
            }
        }
    }
}

std::vector<UndirectedEdge> undirected_edges(const Graph& graph) {
    std::vector<UndirectedEdge> edges;
    edges.reserve(static_cast<std::size_t>(graph.num_edges()));
    for (std::int32_t u = 0; u < graph.num_nodes; ++u) {
        for (std::int32_t v : graph.neighbors(u)) {
            if (v > u) edges.push_back({u, v});
        }
    }
    return edges;
}

Graph load_graph(const std::filesystem::path& dir, EdgeListReport* report) {
    const std::string features_file = (dir / "features.csv").string();
    const std::string labels_file = (dir / "labels.csv").string();
    const std::string edges_file = (dir / "edges.tsv").string();

    // features.csv determines the node count.
    std::string features_text = read_to_string(dir / "features.csv");
    std::vector<double> feature_values;
    std::int64_t feature_dim = -1;
    std::int64_t num_rows = 0;
    for_each_line(features_text, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_fields(line, ',');
        if (feature_dim < 0) {
            feature_dim = static_cast<std::int64_t>(fields.size());
        } else if (static_cast<std::int64_t>(fields.size()) != feature_dim) {
            throw DatasetError(DatasetErrorKind::kRowCountMismatch, features_file, line_no,
                               "row has " + std::to_string(fields.size()) +
                                   " columns, expected " + std::to_string(feature_dim));
        }
        for (auto f : fields) feature_values.push_back(parse_double_field(f, features_file, line_no));
        ++num_rows;
    });
    if (num_rows == 0) {
        throw DatasetError(DatasetErrorKind::kRowCountMismatch, features_file, 0,
                           "no feature rows");
    }
    Matrix features(num_rows, feature_dim);
    std::copy(feature_values.begin(), feature_values.end(), features.data());
    const std::int32_t num_nodes = static_cast<std::int32_t>(num_rows);

    std::string labels_text = read_to_string(dir / "labels.csv");
    std::vector<std::int32_t> labels;
    labels.reserve(static_cast<std::size_t>(num_nodes));
    std::int32_t max_label = -1;
    for_each_line(labels_text, [&](std::string_view line, std::size_t line_no) {
        std::int64_t label = parse_int_field(line, labels_file, line_no);
        if (label < kNoLabel) {
            throw DatasetError(DatasetErrorKind::kLabelOutOfRange, labels_file, line_no,
                               "label " + std::to_string(label) + " below the unlabeled sentinel -1");
        }
        if (static_cast<std::int64_t>(labels.size()) >= num_nodes) {
            throw DatasetError(DatasetErrorKind::kRowCountMismatch, labels_file, line_no,
                               "more labels than feature rows (" + std::to_string(num_nodes) + ")");
        }
        labels.push_back(static_cast<std::int32_t>(label));
        max_label = std::max(max_label, static_cast<std::int32_t>(label));
    });
    if (static_cast<std::int32_t>(labels.size()) != num_nodes) {
        throw DatasetError(DatasetErrorKind::kRowCountMismatch, labels_file, 0,
                           std::to_string(labels.size()) + " labels for " +
                               std::to_string(num_nodes) + " feature rows");
    }

    std::string edges_text = read_to_string(dir / "edges.tsv");
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for_each_line(edges_text, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_fields(line, '\t');
        if (fields.size() != 2) {
            throw DatasetError(DatasetErrorKind::kParse, edges_file, line_no,
                               "expected two tab-separated node ids");
        }
        std::int64_t u = parse_int_field(fields[0], edges_file, line_no);
        std::int64_t v = parse_int_field(fields[1], edges_file, line_no);
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
            throw DatasetError(DatasetErrorKind::kInvalidNodeId, edges_file, line_no,
                               "node id outside [0, " + std::to_string(num_nodes) + ")");
        }
        pairs.emplace_back(static_cast<std::int32_t>(u), static_cast<std::int32_t>(v));
    });

    return build_graph(num_nodes, pairs, std::move(features), std::move(labels),
                       max_label + 1, report);
}

void save_graph(const std::filesystem::path& dir, const Graph& graph) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        for (const auto& e : undirected_edges(graph)) {
            out << e.u << '\t' << e.v << '\n';
        }
    }
    {
        std::ofstream out(dir / "features.csv");
        char buf[32];
        for (std::int32_t i = 0; i < graph.num_nodes; ++i) {
            for (std::int32_t j = 0; j < graph.feature_dim(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", graph.features(i, j));
                if (j > 0) out << ',';
                out << buf;
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(dir / "labels.csv");
        for (std::int32_t label : graph.labels) out << label << '\n';
    }
}

void save_masks(const std::filesystem::path& file, const Split& split) {
    nlohmann::json j;
    j["train"] = split.train;
    j["val"] = split.val;
    j["test"] = split.test;
    std::ofstream out(file);
    out << j.dump(2) << '\n';
}

Split load_masks(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DatasetError(DatasetErrorKind::kMissingFile, file.string(), 0,
                           "missing or unreadable file");
    }
    nlohmann::json j = nlohmann::json::parse(in);
    Split split;
    split.train = j.at("train").get<std::vector<std::int32_t>>();
    split.val = j.at("val").get<std::vector<std::int32_t>>();
    split.test = j.at("test").get<std::vector<std::int32_t>>();
    return split;
}

double imbalance_ratio(const Graph& graph, std::span<const std::int32_t> mask) {
    auto counts = class_counts(graph, mask);
    std::int64_t max_count = 0;
    std::int64_t min_count = 0;
    for (std::int32_t c = 0; c < graph.num_classes; ++c) {
        std::int64_t n = counts[static_cast<std::size_t>(c)];
        if (n == 0) {
            throw InvalidArgument("imbalance_ratio: class " + std::to_string(c) +
                                  " absent from mask");
        }
        max_count = std::max(max_count, n);
        min_count = (min_count == 0) ? n : std::min(min_count, n);
    }
    return static_cast<double>(max_count) / static_cast<double>(min_count);
}

Split split_random(const Graph& graph, SplitRatios ratios, std::uint64_t seed) {
    double sum = ratios.train + ratios.val + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("split_random: ratios sum to " + std::to_string(sum));
    }
    if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
        throw InvalidArgument("split_random: all ratios must be positive");
    }

    std::vector<std::vector<std::int32_t>> by_class(static_cast<std::size_t>(graph.num_classes));
    for (std::int32_t v = 0; v < graph.num_nodes; ++v) {
        std::int32_t label = graph.labels[static_cast<std::size_t>(v)];
        if (label != kNoLabel) by_class[static_cast<std::size_t>(label)].push_back(v);
    }

    Split split;
    for (std::int32_t c = 0; c < graph.num_classes; ++c) {
        auto& nodes = by_class[static_cast<std::size_t>(c)];
        auto n = static_cast<std::int64_t>(nodes.size());
        if (n < 3) {
            throw InvalidArgument("split_random: class " + std::to_string(c) + " has " +
                                  std::to_string(n) + " nodes; need at least 3");
        }
        // val/test get at least one node each so every class populates all
        // three sets; the remainder goes to train.
        std::int64_t n_val = std::max<std::int64_t>(1, static_cast<std::int64_t>(ratios.val * static_cast<double>(n)));
        std::int64_t n_test = std::max<std::int64_t>(1, static_cast<std::int64_t>(ratios.test * static_cast<double>(n)));
        Rng rng = Rng::stream(seed, kSplitStreamTag, static_cast<std::uint64_t>(c));
        rng.shuffle(nodes);
        for (std::int64_t i = 0; i < n; ++i) {
            std::int32_t v = nodes[static_cast<std::size_t>(i)];
            if (i < n - n_val - n_test) split.train.push_back(v);
            else if (i < n - n_test) split.val.push_back(v);
            else split.test.push_back(v);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Split make_imbalanced(const Split& split, const Graph& graph, double rho,
                      std::uint64_t seed, ImbalanceReport* report) {
    if (rho < 1.0) {
        throw InvalidArgument("make_imbalanced: rho must be >= 1, got " + std::to_string(rho));
    }
    auto counts = class_counts(graph, split.train);
    std::int64_t m_max = 0;
    for (std::int64_t n : counts) m_max = std::max(m_max, n);

    std::int64_t target = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(m_max) / rho));
    bool clamped = false;
    if (target < 1) {
        target = 1;
        clamped = true;
    }

    const std::int32_t first_minority = (graph.num_classes + 1) / 2; // ceil(C/2)

    std::vector<std::vector<std::int32_t>> by_class(static_cast<std::size_t>(graph.num_classes));
    for (std::int32_t v : split.train) {
        std::int32_t label = graph.labels[static_cast<std::size_t>(v)];
        if (label != kNoLabel) by_class[static_cast<std::size_t>(label)].push_back(v);
    }

    Split out;
    out.val = split.val;
    out.test = split.test;
    for (std::int32_t c = 0; c < graph.num_classes; ++c) {
        auto& nodes = by_class[static_cast<std::size_t>(c)];
        if (c >= first_minority && static_cast<std::int64_t>(nodes.size()) > target) {
            Rng rng = Rng::stream(seed, kImbalanceStreamTag, static_cast<std::uint64_t>(c));
            rng.shuffle(nodes);
            nodes.resize(static_cast<std::size_t>(target));
        }
        out.train.insert(out.train.end(), nodes.begin(), nodes.end());
    }
    std::sort(out.train.begin(), out.train.end());
    if (report != nullptr) report->target_clamped = clamped;
    return out;
}

} // namespace buffgraph
