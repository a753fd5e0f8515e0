#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lshattn/attention.hpp"
#include "lshattn/instrument.hpp"
#include "lshattn/simhash.hpp"
#include "lshattn/tensor.hpp"

namespace lshattn {

// Small post-layer-norm transformer encoder. Defaults give the two-layer,
// two-head, 128-wide shape used by the demo.
struct EncoderConfig {
    int hidden_size = 128;
    int num_layers = 2;
    int num_heads = 2;
    int intermediate_size = 512;
    int vocab_size = 1024;
    int max_seq_len = 128;
    ScoreMode attention_mode = ScoreMode::full;
    std::optional<LshConfig> lsh;  // required in lsh mode, dim == head_dim
    double layer_norm_eps = 1e-12;
    std::uint64_t seed = 0;

    int head_dim() const { return hidden_size / num_heads; }
};

// Throws ConfigError on nonpositive sizes, hidden_size not divisible by
// num_heads, or lsh mode without a matching-dim LshConfig.
void validate(const EncoderConfig& config);

// Dense layers store weights as in_dim x out_dim matrices: y = x W + b.
struct LayerWeights {
    Mat wq, wk, wv, wo;
    std::vector<double> bq, bk, bv, bo;
    Mat w1, w2;
    std::vector<double> b1, b2;
    std::vector<double> ln1_gamma, ln1_beta;
    std::vector<double> ln2_gamma, ln2_beta;
};

struct EncoderState {
    EncoderConfig config;
    Mat token_embeddings;     // vocab_size x hidden_size
    Mat position_embeddings;  // max_seq_len x hidden_size
    std::vector<LayerWeights> layers;
};

// Weights drawn normal(0, 0.02) from config.seed; biases zero, layer norm
// scales one. Deterministic for a fixed config.
EncoderState init_encoder(const EncoderConfig& config);

struct ForwardResult {
    Mat hidden;  // seq_len x hidden_size
    OpCounters counters;
};

// Embed tokens (token + learned position), then per layer: multi-head
// attention, residual add, layer norm, GELU feed-forward, residual add,
// layer norm. `mode_override` switches the score kernel for this call only.
// In lsh mode one hash family, built from config.lsh, is shared by every
// layer of the call. Counters accumulate score-kernel work across layers.
// Throws InputError on out-of-range token ids or sequences longer than
// max_seq_len.
ForwardResult encoder_forward(const EncoderState& state, const std::vector<int>& tokens,
                              std::optional<ScoreMode> mode_override = std::nullopt);

// Row-wise layer norm with learned scale and shift.
void layer_norm_rows(Mat& x, const std::vector<double>& gamma,
                     const std::vector<double>& beta, double eps);

// Exact GELU: x/2 * (1 + erf(x / sqrt(2))).
double gelu(double x);

}  // namespace lshattn
