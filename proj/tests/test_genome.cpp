#include <doctest.h>

#include <set>

#include "moenas/error.hpp"
#include "moenas/genome.hpp"
#include "moenas/rng.hpp"
#include "support/oracles.hpp"

using namespace moenas;

namespace {

Genome random_genome(Rng& rng) {
    Genome g;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        set_gene_index(g, i, static_cast<int>(rng.uniform_index(static_cast<std::size_t>(kGeneCardinality[i]))));
    }
    return g;
}

Genome smallest_conv2d() {
    Genome g;
    g.ops = {Op::Conv2D, Op::Conv2D, Op::Conv2D, Op::Conv2D};
    g.n_c = 2;
    g.n_f = 3;
    return g;
}

} // namespace

TEST_CASE("validate accepts the lower-bound genome and rejects out-of-range fields") {
    Genome g;
    CHECK(validate(g));
    Genome bad = g;
    bad.n_c = 5;
    CHECK_FALSE(validate(bad));
    bad = g;
    bad.i3 = 2;
    CHECK(validate(bad));
    bad.i3 = 3;
    CHECK_FALSE(validate(bad));
    bad = g;
    bad.lr_level = 0;
    CHECK_FALSE(validate(bad));
    bad = g;
    bad.i4 = 4;
    CHECK_THROWS_AS(require_valid(bad), InvalidGenome);
}

TEST_CASE("decode follows the doubling and halving schedule") {
    Genome g;
    g.n_c = 2;
    g.n_f = 3;
    const auto d = decode(g);
    CHECK(d.num_cells == 5);
    CHECK(d.base_filters() == 8);
    CHECK(d.cell_filters == std::vector<int>{8, 16, 32, 16, 8});
    g.n_c = 4;
    g.n_f = 5;
    const auto d4 = decode(g);
    CHECK(d4.num_cells == 9);
    CHECK(d4.cell_filters == std::vector<int>{32, 64, 128, 256, 512, 256, 128, 64, 32});
    Genome bad;
    bad.n_f = 7;
    CHECK_THROWS_AS(decode(bad), InvalidGenome);
}

TEST_CASE("node 1 always reads the cell input and i_b resolves to its source") {
    Genome g;
    g.i2 = 1;
    g.i3 = 2;
    g.i4 = 0;
    g.ops = {Op::P3D, Op::Conv2D, Op::Conv3D, Op::P3D};
    const auto d = decode(g);
    CHECK(d.node_graph[0].source == 0);
    CHECK(d.node_graph[1].source == 1);
    CHECK(d.node_graph[2].source == 2);
    CHECK(d.node_graph[3].source == 0);
    CHECK(d.node_graph[0].op == Op::P3D);
    CHECK(d.node_graph[2].op == Op::Conv3D);
    CHECK(longest_path(d) == 3);
}

TEST_CASE("count_params of the smallest genome matches the layer-graph oracle") {
    const auto g = smallest_conv2d();
    const auto expected = oracle::param_count(g, 4);
    CHECK(count_params(decode(g), 4) == expected);
    CHECK(decode(g).param_count == expected);
    auto g3 = g;
    g3.ops = {Op::Conv3D, Op::Conv3D, Op::Conv3D, Op::Conv3D};
    CHECK(count_params(decode(g3), 4) > expected);
}

TEST_CASE("count_params equals the layer-graph oracle on random genomes") {
    Rng rng(12345);
    for (int k = 0; k < 300; ++k) {
        const auto g = random_genome(rng);
        for (int c : {2, 4, 7}) {
            REQUIRE(count_params(decode(g, c), c) == oracle::param_count(g, c));
        }
    }
}

TEST_CASE("param_count properties") {
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        const auto g = random_genome(rng);
        const auto pc = decode(g).param_count;
        CHECK(pc > 0);
        auto lr = g;
        lr.lr_level = g.lr_level % 9 + 1;
        CHECK(decode(lr).param_count == pc);
        if (g.n_f < 5) {
            auto wider = g;
            ++wider.n_f;
            CHECK(decode(wider).param_count > pc);
        }
        if (g.n_c < 4) {
            auto deeper = g;
            ++deeper.n_c;
            CHECK(decode(deeper).param_count > pc);
        }
        for (std::size_t b = 0; b < 4; ++b) {
            auto other = g;
            other.ops[b] = g.ops[b] == Op::Conv2D ? Op::Conv3D : Op::Conv2D;
            CHECK(decode(other).param_count != pc);
        }
    }
}

TEST_CASE("the parameter range spans the plausibility band around 7.1e6") {
    std::int64_t lo = INT64_MAX;
    std::int64_t hi = 0;
    std::int64_t in_band = 0;
    Restriction r;
    r.allow("lr_level", {1});
    for_each_genome(r, [&](const Genome& g) {
        const auto pc = decode(g).param_count;
        lo = std::min(lo, pc);
        hi = std::max(hi, pc);
        in_band += pc >= 1'000'000 && pc <= 50'000'000 ? 1 : 0;
    });
    MESSAGE("parameter range [" << lo << ", " << hi << "], " << in_band << " structures in [1e6, 5e7]");
    CHECK(lo < 7'100'000);
    CHECK(hi > 7'100'000);
    CHECK(in_band > 0);
}

TEST_CASE("text and JSON serialization round-trip") {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const auto g = random_genome(rng);
        CHECK(parse_genome(to_string(g)) == g);
        CHECK(Json(g).get<Genome>() == g);
    }
    Genome g;
    g.i2 = 1;
    g.i3 = 2;
    g.i4 = 3;
    g.ops = {Op::Conv3D, Op::P3D, Op::Conv2D, Op::Conv3D};
    g.n_c = 3;
    g.n_f = 4;
    g.lr_level = 5;
    CHECK(to_string(g) == "i2=1,i3=2,i4=3,o1=CONV3D,o2=P3D,o3=CONV2D,o4=CONV3D,n_c=3,n_f=4,lr_level=5");
    CHECK(Json(g).dump() ==
          R"({"i2":1,"i3":2,"i4":3,"o1":"CONV3D","o2":"P3D","o3":"CONV2D","o4":"CONV3D","n_c":3,"n_f":4,"lr_level":5})");
    CHECK_THROWS_AS(parse_genome("i2=0"), InvalidGenome);
    CHECK_THROWS_AS(parse_genome("i2=0,i3=0,i4=0,o1=CONV9D,o2=P3D,o3=CONV2D,o4=CONV3D,n_c=3,n_f=4,lr_level=5"),
                    InvalidGenome);
    CHECK_THROWS_AS(parse_genome("i2=0,i3=0,i4=0,o1=P3D,o2=P3D,o3=CONV2D,o4=CONV3D,n_c=3,n_f=4,lr_level=10"),
                    InvalidGenome);
}

TEST_CASE("enumeration covers the space once in canonical order") {
    CHECK(kSpaceSize == 2ull * 3 * 4 * 81 * 3 * 3 * 9);
    CHECK(kSpaceSize == 157464);
    std::uint64_t n = 0;
    bool ordered = true;
    Genome prev;
    for_each_genome({}, [&](const Genome& g) {
        ordered = ordered && canonical_rank(g) == n && genome_from_rank(n) == g && (n == 0 || prev < g);
        prev = g;
        ++n;
    });
    CHECK(n == kSpaceSize);
    CHECK(ordered);
}

TEST_CASE("restricted enumeration") {
    Restriction r;
    r.allow("n_c", {2}).allow("lr_level", {1});
    CHECK(r.size() == 5832);
    const auto a = enumerate_space(r);
    const auto b = enumerate_space(r);
    CHECK(a.size() == 5832);
    CHECK(a == b);
    std::set<Genome> unique(a.begin(), a.end());
    CHECK(unique.size() == a.size());
    for (const auto& g : a) {
        REQUIRE(g.n_c == 2);
        REQUIRE(g.lr_level == 1);
    }
    Restriction ops;
    ops.allow_ops("o1", {Op::P3D});
    CHECK(ops.size() == kSpaceSize / 3);
    Restriction empty;
    empty.allow("n_f", {});
    CHECK_THROWS_WITH_AS(static_cast<void>(empty.size()), doctest::Contains("empty-restriction"), Error);
}
