#include "lshattn/instrument.hpp"

#include <chrono>
#include <cmath>

#include "lshattn/errors.hpp"

namespace lshattn {

std::int64_t baseline_dot_count(int batch, int heads, int seq_len) {
    return static_cast<std::int64_t>(batch) * heads * seq_len * seq_len;
}

std::int64_t baseline_flops(int batch, int heads, int seq_len, int head_dim) {
    return baseline_dot_count(batch, heads, seq_len) * 2 * head_dim;
}

std::int64_t lsh_flops_model(const LshConfig& config, int batch, int heads,
                             int seq_len, std::int64_t collided_pairs) {
    const std::int64_t hashing = static_cast<std::int64_t>(batch) * heads *
                                 (2ll * seq_len) * config.num_hash_fns *
                                 config.bands * (2ll * config.dim);
    return hashing + collided_pairs * 2ll * config.dim;
}

std::int64_t count_lsh_dot_products(const std::vector<QkCollisionMask>& masks) {
    std::int64_t total = 0;
    for (const auto& mask : masks) total += mask.popcount();
    return total;
}

TimingStats time_attention(const AttentionInputs& inputs, ScoreMode mode,
                           const std::optional<HashFamily>& family, int runs,
                           int warmup) {
    if (runs < 1) throw ConfigError("timing needs runs >= 1");
    if (warmup < 0) throw ConfigError("warmup must be >= 0");
    if (mode == ScoreMode::lsh && !family.has_value()) {
        throw ConfigError("lsh timing needs a hash family");
    }

    double sink = 0.0;
    auto one_pass = [&] {
        ScoreMatrix scores = mode == ScoreMode::full ? full_scores(inputs)
                                                     : lsh_scores(inputs, *family);
        Tensor4 out = attention_output(scores, inputs.v);
        sink += out.data.back();
    };

    for (int i = 0; i < warmup; ++i) one_pass();

    using clock = std::chrono::steady_clock;
    std::vector<double> seconds(runs);
    for (int i = 0; i < runs; ++i) {
        const auto start = clock::now();
        one_pass();
        seconds[i] = std::chrono::duration<double>(clock::now() - start).count();
    }
    // Consuming the outputs keeps the passes observable to the optimizer.
    if (!std::isfinite(sink)) throw NumericError("non-finite benchmark output");

    TimingStats stats;
    stats.runs = runs;
    double sum = 0.0;
    for (double s : seconds) sum += s;
    stats.mean_s = sum / runs;
    double var = 0.0;
    for (double s : seconds) var += (s - stats.mean_s) * (s - stats.mean_s);
    stats.std_s = std::sqrt(var / runs);
    return stats;
}

}  // namespace lshattn
