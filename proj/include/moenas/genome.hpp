#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moenas/json.hpp"

namespace moenas {

// Convolution applied inside a cell node.
//   Conv2D: 3x3x1 kernel
//   Conv3D: 3x3x3 kernel
//   P3D:    3x3x1 followed by 1x1x3, intermediate width = output width
enum class Op : std::uint8_t { Conv2D = 0, Conv3D = 1, P3D = 2 };

inline constexpr std::array<Op, 3> kAllOps{Op::Conv2D, Op::Conv3D, Op::P3D};

std::string_view op_name(Op op) noexcept;
Op parse_op(std::string_view name);

inline constexpr int kNodesPerCell = 4;
inline constexpr int kInputChannels = 1;
inline constexpr int kDefaultNumClasses = 4;
inline constexpr double kLearningRateUnit = 1e-6;

// The ten categorical decision variables, in canonical order:
//   i2 i3 i4 o1 o2 o3 o4 n_c n_f lr_level
// i_b selects node b's input: 0 = cell input, k = output of node k (k < b).
// Node 1 always reads the cell input.
struct Genome {
    int i2 = 0;
    int i3 = 0;
    int i4 = 0;
    std::array<Op, kNodesPerCell> ops{Op::Conv3D, Op::Conv3D, Op::Conv3D, Op::Conv3D};
    int n_c = 2;
    int n_f = 3;
    int lr_level = 1;

    [[nodiscard]] double learning_rate() const noexcept { return lr_level * kLearningRateUnit; }

    auto operator<=>(const Genome&) const = default;
};

inline constexpr std::size_t kGeneCount = 10;
inline constexpr std::array<std::string_view, kGeneCount> kGeneNames{
    "i2", "i3", "i4", "o1", "o2", "o3", "o4", "n_c", "n_f", "lr_level"};
inline constexpr std::array<int, kGeneCount> kGeneCardinality{2, 3, 4, 3, 3, 3, 3, 3, 3, 9};

// Product of the gene cardinalities: 2*3*4*3^4*3*3*9 = 157,464.
inline constexpr std::uint64_t kSpaceSize = [] {
    std::uint64_t n = 1;
    for (int c : kGeneCardinality) {
        n *= static_cast<std::uint64_t>(c);
    }
    return n;
}();

// Genes are addressed by a value index j in [0, kGeneCardinality[i]).
int gene_index(const Genome& g, std::size_t gene);
void set_gene_index(Genome& g, std::size_t gene, int index);
// Actual value for a value index (e.g. n_c index 0 -> 2). Ops map to their enum value.
int gene_value(std::size_t gene, int index);
int gene_value_index(std::size_t gene, int value);
std::optional<std::size_t> gene_by_name(std::string_view name);

bool validate(const Genome& g) noexcept;
// Throws InvalidGenome naming the first bad field.
void require_valid(const Genome& g);

// Canonical ordered key-value text, e.g.
//   i2=0,i3=1,i4=2,o1=CONV3D,o2=P3D,o3=CONV2D,o4=CONV3D,n_c=3,n_f=4,lr_level=5
std::string to_string(const Genome& g);
Genome parse_genome(std::string_view text);

void to_json(Json& j, const Genome& g);
void from_json(const Json& j, Genome& g);

struct GenomeHash {
    std::size_t operator()(const Genome& g) const noexcept;
};

// Mixed-radix rank in canonical enumeration order; lr_level varies fastest.
std::uint64_t canonical_rank(const Genome& g);
Genome genome_from_rank(std::uint64_t rank);

struct NodeSpec {
    int source = 0; // 0 = cell input, k = node k output
    Op op = Op::Conv3D;

    auto operator<=>(const NodeSpec&) const = default;
};

struct ArchitectureDescriptor {
    int num_cells = 0;
    std::vector<int> cell_filters;
    std::array<NodeSpec, kNodesPerCell> node_graph{};
    std::int64_t param_count = 0;

    [[nodiscard]] int encoder_depth() const noexcept { return (num_cells - 1) / 2; }
    [[nodiscard]] int base_filters() const noexcept { return cell_filters.front(); }
};

ArchitectureDescriptor decode(const Genome& g, int num_classes = kDefaultNumClasses);

// Exact learnable-parameter count of the encoder-decoder network:
// per node ReLU + conv (weights + bias) + instance norm (2 per channel),
// 2x2x2 stride-2 transpose convs between decoder cells, parameter-free
// pooling and skip summations, and a final 1x1x1 conv to num_classes.
std::int64_t count_params(const ArchitectureDescriptor& d, int num_classes);

// Longest chain of nodes inside a cell (1..4).
int longest_path(const ArchitectureDescriptor& d);

// Optional per-field value subsets (actual values, not indices).
class Restriction {
public:
    Restriction() = default;

    Restriction& allow(std::string_view field, std::vector<int> values);
    Restriction& allow_ops(std::string_view field, std::vector<Op> ops);

    // Sorted value indices permitted for each gene. Throws Error("empty-restriction ...").
    [[nodiscard]] std::array<std::vector<int>, kGeneCount> index_sets() const;
    [[nodiscard]] std::uint64_t size() const;

private:
    std::array<std::optional<std::vector<int>>, kGeneCount> values_;
};

// Visits every genome of the (restricted) space once, in canonical order.
void for_each_genome(const Restriction& r, const std::function<void(const Genome&)>& fn);
std::vector<Genome> enumerate_space(const Restriction& r = {});

} // namespace moenas
