#include "moenas/genome.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "moenas/error.hpp"

namespace moenas {

namespace {

constexpr std::array<std::string_view, 3> kOpNames{"CONV2D", "CONV3D", "P3D"};

// First actual value of each gene's range; ops use their enum value.
constexpr std::array<int, kGeneCount> kGeneOffset{0, 0, 0, 0, 0, 0, 0, 2, 3, 1};

int parse_int(std::string_view field, std::string_view text) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidGenome("field " + std::string(field) + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t conv_params(Op op, std::int64_t in, std::int64_t out) {
    switch (op) {
    case Op::Conv2D:
        return 9 * in * out + out;
    case Op::Conv3D:
        return 27 * in * out + out;
    case Op::P3D:
        return (9 * in * out + out) + (3 * out * out + out);
    }
    return 0;
}

std::int64_t cell_params(const std::array<NodeSpec, kNodesPerCell>& nodes, std::int64_t in, std::int64_t filters) {
    std::int64_t total = 0;
    for (const auto& node : nodes) {
        const std::int64_t node_in = node.source == 0 ? in : filters;
        total += conv_params(node.op, node_in, filters) + 2 * filters;
    }
    return total;
}

} // namespace

std::string_view op_name(Op op) noexcept {
    return kOpNames[static_cast<std::size_t>(op)];
}

Op parse_op(std::string_view name) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i) {
        if (kOpNames[i] == name) {
            return static_cast<Op>(i);
        }
    }
    throw InvalidGenome("unknown operation '" + std::string(name) + "'");
}

int gene_index(const Genome& g, std::size_t gene) {
    switch (gene) {
    case 0: return g.i2;
    case 1: return g.i3;
    case 2: return g.i4;
    case 3:
    case 4:
    case 5:
    case 6: return static_cast<int>(g.ops[gene - 3]);
    case 7: return g.n_c - kGeneOffset[7];
    case 8: return g.n_f - kGeneOffset[8];
    case 9: return g.lr_level - kGeneOffset[9];
    default: throw RangeError("gene index out of range: " + std::to_string(gene));
    }
}

void set_gene_index(Genome& g, std::size_t gene, int index) {
    if (gene >= kGeneCount) {
        throw RangeError("gene index out of range: " + std::to_string(gene));
    }
    if (index < 0 || index >= kGeneCardinality[gene]) {
        throw RangeError("value index " + std::to_string(index) + " out of range for " + std::string(kGeneNames[gene]));
    }
    const int value = index + kGeneOffset[gene];
    switch (gene) {
    case 0: g.i2 = value; break;
    case 1: g.i3 = value; break;
    case 2: g.i4 = value; break;
    case 7: g.n_c = value; break;
    case 8: g.n_f = value; break;
    case 9: g.lr_level = value; break;
    default: g.ops[gene - 3] = static_cast<Op>(value); break;
    }
}

int gene_value(std::size_t gene, int index) {
    return index + kGeneOffset.at(gene);
}

int gene_value_index(std::size_t gene, int value) {
    return value - kGeneOffset.at(gene);
}

std::optional<std::size_t> gene_by_name(std::string_view name) {
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        if (kGeneNames[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

bool validate(const Genome& g) noexcept {
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        int idx = 0;
        switch (i) {
        case 0: idx = g.i2; break;
        case 1: idx = g.i3; break;
        case 2: idx = g.i4; break;
        case 7: idx = g.n_c - kGeneOffset[7]; break;
        case 8: idx = g.n_f - kGeneOffset[8]; break;
        case 9: idx = g.lr_level - kGeneOffset[9]; break;
        default: idx = static_cast<int>(g.ops[i - 3]); break;
        }
        if (idx < 0 || idx >= kGeneCardinality[i]) {
            return false;
        }
    }
    return true;
}

void require_valid(const Genome& g) {
    if (validate(g)) {
        return;
    }
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        const int idx = gene_index(g, i);
        if (idx < 0 || idx >= kGeneCardinality[i]) {
            throw InvalidGenome("invalid genome: field " + std::string(kGeneNames[i]) + " out of range");
        }
    }
    throw InvalidGenome("invalid genome");
}

std::string to_string(const Genome& g) {
    std::string out;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        if (i > 0) {
            out += ',';
        }
        out += kGeneNames[i];
        out += '=';
        if (i >= 3 && i <= 6) {
            out += op_name(g.ops[i - 3]);
        } else {
            out += std::to_string(gene_value(i, gene_index(g, i)));
        }
    }
    return out;
}

Genome parse_genome(std::string_view text) {
    Genome g;
    std::array<bool, kGeneCount> seen{};
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view item = text.substr(pos, end - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidGenome("malformed genome item '" + std::string(item) + "'");
        }
        const auto key = item.substr(0, eq);
        const auto val = item.substr(eq + 1);
        const auto gene = gene_by_name(key);
        if (!gene) {
            throw InvalidGenome("unknown genome field '" + std::string(key) + "'");
        }
        if (seen[*gene]) {
            throw InvalidGenome("duplicate genome field '" + std::string(key) + "'");
        }
        seen[*gene] = true;
        if (*gene >= 3 && *gene <= 6) {
            g.ops[*gene - 3] = parse_op(val);
        } else {
            const int v = parse_int(key, val);
            const int idx = gene_value_index(*gene, v);
            if (idx < 0 || idx >= kGeneCardinality[*gene]) {
                throw InvalidGenome("field " + std::string(key) + " out of range: " + std::string(val));
            }
            set_gene_index(g, *gene, idx);
        }
        pos = end + 1;
    }
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        if (!seen[i]) {
            throw InvalidGenome("missing genome field '" + std::string(kGeneNames[i]) + "'");
        }
    }
    require_valid(g);
    return g;
}

void to_json(Json& j, const Genome& g) {
    j = Json::object();
    j["i2"] = g.i2;
    j["i3"] = g.i3;
    j["i4"] = g.i4;
    for (std::size_t b = 0; b < kNodesPerCell; ++b) {
        j[std::string(kGeneNames[3 + b])] = std::string(op_name(g.ops[b]));
    }
    j["n_c"] = g.n_c;
    j["n_f"] = g.n_f;
    j["lr_level"] = g.lr_level;
}

void from_json(const Json& j, Genome& g) {
    if (!j.is_object()) {
        throw InvalidGenome("genome must be a JSON object");
    }
    Genome out;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        const std::string key(kGeneNames[i]);
        const auto it = j.find(key);
        if (it == j.end()) {
            throw InvalidGenome("missing genome field '" + key + "'");
        }
        if (i >= 3 && i <= 6) {
            if (!it->is_string()) {
                throw InvalidGenome("field " + key + " must be a string");
            }
            out.ops[i - 3] = parse_op(it->get<std::string>());
        } else {
            if (!it->is_number_integer()) {
                throw InvalidGenome("field " + key + " must be an integer");
            }
            const int idx = gene_value_index(i, it->get<int>());
            if (idx < 0 || idx >= kGeneCardinality[i]) {
                throw InvalidGenome("field " + key + " out of range");
            }
            set_gene_index(out, i, idx);
        }
    }
    g = out;
}

std::size_t GenomeHash::operator()(const Genome& g) const noexcept {
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        h = h * 16 + static_cast<std::uint64_t>(gene_index(g, i) & 0xF);
    }
    return static_cast<std::size_t>(h * 0x9e3779b97f4a7c15ULL);
}

std::uint64_t canonical_rank(const Genome& g) {
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        rank = rank * static_cast<std::uint64_t>(kGeneCardinality[i]) + static_cast<std::uint64_t>(gene_index(g, i));
    }
    return rank;
}

Genome genome_from_rank(std::uint64_t rank) {
    if (rank >= kSpaceSize) {
        throw RangeError("genome rank out of range");
    }
    Genome g;
    for (std::size_t i = kGeneCount; i-- > 0;) {
        const auto k = static_cast<std::uint64_t>(kGeneCardinality[i]);
        set_gene_index(g, i, static_cast<int>(rank % k));
        rank /= k;
    }
    return g;
}

ArchitectureDescriptor decode(const Genome& g, int num_classes) {
    require_valid(g);
    ArchitectureDescriptor d;
    d.num_cells = 2 * g.n_c + 1;
    const int base = 1 << g.n_f;
    d.cell_filters.reserve(static_cast<std::size_t>(d.num_cells));
    for (int i = 0; i <= g.n_c; ++i) {
        d.cell_filters.push_back(base << i);
    }
    for (int i = g.n_c - 1; i >= 0; --i) {
        d.cell_filters.push_back(base << i);
    }
    d.node_graph[0] = {0, g.ops[0]};
    d.node_graph[1] = {g.i2, g.ops[1]};
    d.node_graph[2] = {g.i3, g.ops[2]};
    d.node_graph[3] = {g.i4, g.ops[3]};
    d.param_count = count_params(d, num_classes);
    return d;
}

std::int64_t count_params(const ArchitectureDescriptor& d, int num_classes) {
    if (d.num_cells < 5 || d.num_cells % 2 == 0 || d.cell_filters.size() != static_cast<std::size_t>(d.num_cells)) {
        throw InvalidGenome("malformed architecture descriptor");
    }
    if (num_classes < 1) {
        throw RangeError("num_classes must be positive");
    }
    const int depth = d.encoder_depth();
    std::int64_t total = 0;
    std::int64_t in = kInputChannels;
    // Encoder cells and bottleneck: input comes from the previous cell via max-pooling.
    for (int i = 0; i <= depth; ++i) {
        const std::int64_t f = d.cell_filters[static_cast<std::size_t>(i)];
        total += cell_params(d.node_graph, in, f);
        in = f;
    }
    // Decoder: transpose conv halves channels, skip summation keeps them.
    for (int i = depth + 1; i < d.num_cells; ++i) {
        const std::int64_t f = d.cell_filters[static_cast<std::size_t>(i)];
        total += 8 * in * f + f;
        total += cell_params(d.node_graph, f, f);
        in = f;
    }
    total += in * num_classes + num_classes;
    return total;
}

int longest_path(const ArchitectureDescriptor& d) {
    std::array<int, kNodesPerCell + 1> depth{};
    int best = 0;
    for (int b = 1; b <= kNodesPerCell; ++b) {
        const int src = d.node_graph[static_cast<std::size_t>(b - 1)].source;
        depth[static_cast<std::size_t>(b)] = (src == 0 ? 0 : depth[static_cast<std::size_t>(src)]) + 1;
        best = std::max(best, depth[static_cast<std::size_t>(b)]);
    }
    return best;
}

Restriction& Restriction::allow(std::string_view field, std::vector<int> values) {
    const auto gene = gene_by_name(field);
    if (!gene) {
        throw Error("unknown restriction field '" + std::string(field) + "'");
    }
    values_[*gene] = std::move(values);
    return *this;
}

Restriction& Restriction::allow_ops(std::string_view field, std::vector<Op> ops) {
    std::vector<int> values;
    values.reserve(ops.size());
    for (Op op : ops) {
        values.push_back(static_cast<int>(op));
    }
    return allow(field, std::move(values));
}

std::array<std::vector<int>, kGeneCount> Restriction::index_sets() const {
    std::array<std::vector<int>, kGeneCount> sets;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        if (!values_[i]) {
            sets[i].resize(static_cast<std::size_t>(kGeneCardinality[i]));
            std::iota(sets[i].begin(), sets[i].end(), 0);
            continue;
        }
        if (values_[i]->empty()) {
            throw Error("empty-restriction: field " + std::string(kGeneNames[i]) + " has no allowed values");
        }
        for (int v : *values_[i]) {
            const int idx = gene_value_index(i, v);
            if (idx < 0 || idx >= kGeneCardinality[i]) {
                throw Error("restriction value out of range for field " + std::string(kGeneNames[i]));
            }
            sets[i].push_back(idx);
        }
        std::sort(sets[i].begin(), sets[i].end());
        sets[i].erase(std::unique(sets[i].begin(), sets[i].end()), sets[i].end());
    }
    return sets;
}

std::uint64_t Restriction::size() const {
    std::uint64_t n = 1;
    for (const auto& s : index_sets()) {
        n *= s.size();
    }
    return n;
}

void for_each_genome(const Restriction& r, const std::function<void(const Genome&)>& fn) {
    const auto sets = r.index_sets();
    std::array<std::size_t, kGeneCount> pos{};
    Genome g;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        set_gene_index(g, i, sets[i][0]);
    }
    while (true) {
        fn(g);
        // Odometer increment, last gene fastest.
        std::size_t i = kGeneCount;
        while (i-- > 0) {
            if (++pos[i] < sets[i].size()) {
                set_gene_index(g, i, sets[i][pos[i]]);
                break;
            }
            pos[i] = 0;
            set_gene_index(g, i, sets[i][0]);
        }
        if (i == static_cast<std::size_t>(-1)) {
            return;
        }
    }
}

std::vector<Genome> enumerate_space(const Restriction& r) {
    std::vector<Genome> out;
    out.reserve(static_cast<std::size_t>(r.size()));
    for_each_genome(r, [&](const Genome& g) { out.push_back(g); });
    return out;
}

} // namespace moenas
