#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lshattn/attention.hpp"
#include "lshattn/simhash.hpp"

namespace lshattn {

// Work counters for one attention pass (or an accumulation of passes).
// wall_time_seconds is filled only by benchmark runs.
struct OpCounters {
    std::int64_t dot_products = 0;
    std::int64_t flops = 0;
    double wall_time_seconds = 0.0;

    OpCounters& operator+=(const OpCounters& o) {
        dot_products += o.dot_products;
        flops += o.flops;
        wall_time_seconds += o.wall_time_seconds;
        return *this;
    }
};

// Dense attention computes one query-key dot product per (batch, head, i, j).
std::int64_t baseline_dot_count(int batch, int heads, int seq_len);

// Dense score FLOPs: each length-d dot product costs 2d.
std::int64_t baseline_flops(int batch, int heads, int seq_len, int head_dim);

// LSH score FLOPs: hashing projects the 2*seq_len stacked rows of every
// (batch, head) onto num_hash_fns * bands hyperplanes (2*dim FLOPs each),
// then each collided pair costs one 2*dim dot product. Integer bucket
// bookkeeping is not counted, which keeps the model independent of
// table_size and exactly linear in bands and num_hash_fns.
std::int64_t lsh_flops_model(const LshConfig& config, int batch, int heads,
                             int seq_len, std::int64_t collided_pairs);

// Total mask-true entries across all (batch, head) masks: the dot products
// the sparse kernel actually evaluates.
std::int64_t count_lsh_dot_products(const std::vector<QkCollisionMask>& masks);

struct TimingStats {
    int runs = 0;
    double mean_s = 0.0;
    double std_s = 0.0;  // population standard deviation
};

// Wall-clock timing of score computation plus attention_output, mean over
// `runs` measured repetitions after `warmup` unmeasured ones, sequential on
// one thread. lsh mode reuses the given family for every repetition; full
// mode ignores it. Throws ConfigError when runs < 1 or lsh mode lacks a
// family.
TimingStats time_attention(const AttentionInputs& inputs, ScoreMode mode,
                           const std::optional<HashFamily>& family, int runs,
                           int warmup = 10);

// One row of a parameter sweep report.
struct SweepRecord {
    int bands = 0;
    int table_size = 0;
    int num_hash_fns = 0;
    int batch = 0;
    int heads = 0;
    int seq_len = 0;
    int head_dim = 0;
    std::uint64_t seed = 0;
    std::string mode;
    double kflops = 0.0;
    double dot_products = 0.0;  // mean when averaged over samples
    int runs = 0;
    double mean_time_s = 0.0;
};

}  // namespace lshattn
