#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <vector>

#include "lshattn/attention.hpp"
#include "lshattn/errors.hpp"
#include "lshattn/instrument.hpp"
#include "lshattn/rng.hpp"
#include "lshattn/simhash.hpp"

using namespace lshattn;

namespace {

AttentionInputs small_inputs(int batch, int heads, int seq, int dim,
                             std::uint64_t seed) {
    AttentionInputs in;
    in.q = Tensor4(batch, heads, seq, dim);
    in.k = Tensor4(batch, heads, seq, dim);
    in.v = Tensor4(batch, heads, seq, dim);
    Rng rng(seed);
    fill_normal(rng, in.q.data);
    fill_normal(rng, in.k.data);
    fill_normal(rng, in.v.data);
    return in;
}

}  // namespace

TEST_CASE("baseline_dot_count is batch*heads*seq^2") {
    CHECK(baseline_dot_count(1, 2, 10) == 200);
    CHECK(baseline_dot_count(1, 1, 1) == 1);
    CHECK(baseline_dot_count(2, 4, 16) == 2048);
}

TEST_CASE("baseline_flops charges 2*head_dim per dot") {
    CHECK(baseline_flops(1, 2, 10, 64) == 25600);
    CHECK(baseline_flops(1, 1, 1, 1) == 2);
    CHECK(baseline_flops(2, 4, 16, 25) == 102400);
    // Quadratic in seq_len.
    CHECK(baseline_flops(1, 1, 20, 8) == 4 * baseline_flops(1, 1, 10, 8));
}

TEST_CASE("lsh_flops_model minimal case") {
    LshConfig cfg;
    cfg.bands = 1;
    cfg.num_hash_fns = 1;
    cfg.dim = 1;
    cfg.table_size = 2;
    // One (batch, head), seq 1: hashing touches 2 stacked rows at 2 FLOPs
    // each, plus one collided pair at 2 FLOPs.
    CHECK(lsh_flops_model(cfg, 1, 1, 1, 1) == 2 * 1 * 1 * 2 * 1 + 2);
}

TEST_CASE("lsh_flops_model is exactly linear in bands and hash fns") {
    LshConfig cfg;
    cfg.dim = 64;
    cfg.table_size = 64;
    const std::int64_t pairs = 37;

    std::vector<std::int64_t> by_n;
    for (int n = 1; n <= 4; ++n) {
        cfg.num_hash_fns = n;
        cfg.bands = 2;
        by_n.push_back(lsh_flops_model(cfg, 1, 2, 10, pairs));
    }
    for (std::size_t i = 2; i < by_n.size(); ++i) {
        CHECK(by_n[i] - 2 * by_n[i - 1] + by_n[i - 2] == 0);
    }

    std::vector<std::int64_t> by_r;
    for (int r = 1; r <= 4; ++r) {
        cfg.num_hash_fns = 1;
        cfg.bands = r;
        by_r.push_back(lsh_flops_model(cfg, 1, 2, 10, pairs));
    }
    for (std::size_t i = 2; i < by_r.size(); ++i) {
        CHECK(by_r[i] - 2 * by_r[i - 1] + by_r[i - 2] == 0);
    }
}

TEST_CASE("lsh_flops_model ignores table_size") {
    LshConfig cfg;
    cfg.bands = 3;
    cfg.num_hash_fns = 2;
    cfg.dim = 32;
    cfg.table_size = 16;
    const std::int64_t a = lsh_flops_model(cfg, 2, 2, 8, 100);
    cfg.table_size = 64;
    const std::int64_t b = lsh_flops_model(cfg, 2, 2, 8, 100);
    cfg.table_size = 256;
    const std::int64_t c = lsh_flops_model(cfg, 2, 2, 8, 100);
    CHECK(a == b);
    CHECK(b == c);
}

TEST_CASE("count_lsh_dot_products sums mask populations") {
    std::vector<QkCollisionMask> masks(2);
    masks[0].rows = 3;
    masks[0].cols = 3;
    masks[0].entries.assign(9, 0);
    masks[1] = masks[0];
    CHECK(count_lsh_dot_products(masks) == 0);

    masks[0].entries.assign(9, 1);
    masks[1].entries[4] = 1;
    CHECK(count_lsh_dot_products(masks) == 10);

    CHECK(count_lsh_dot_products({}) == 0);
}

TEST_CASE("time_attention returns sane stats") {
    const auto in = small_inputs(1, 1, 4, 4, 3);
    const auto full = time_attention(in, ScoreMode::full, std::nullopt, 3, 0);
    CHECK(full.runs == 3);
    CHECK(full.mean_s >= 0.0);
    CHECK(full.std_s >= 0.0);

    LshConfig cfg;
    cfg.dim = 4;
    const auto fam = build_hash_family(cfg);
    const auto lsh = time_attention(in, ScoreMode::lsh, fam, 2, 1);
    CHECK(lsh.runs == 2);
    CHECK(lsh.mean_s >= 0.0);
}

TEST_CASE("time_attention rejects bad arguments") {
    const auto in = small_inputs(1, 1, 2, 4, 9);
    CHECK_THROWS_AS((void)time_attention(in, ScoreMode::full, std::nullopt, 0, 0),
                    ConfigError);
    CHECK_THROWS_AS((void)time_attention(in, ScoreMode::full, std::nullopt, 1, -1),
                    ConfigError);
    CHECK_THROWS_AS((void)time_attention(in, ScoreMode::lsh, std::nullopt, 1, 0),
                    ConfigError);
}

TEST_CASE("OpCounters accumulate") {
    OpCounters a{10, 100, 0.5};
    OpCounters b{1, 2, 0.25};
    a += b;
    CHECK(a.dot_products == 11);
    CHECK(a.flops == 102);
    CHECK(a.wall_time_seconds == 0.75);
}
