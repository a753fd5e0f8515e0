#include "lshattn/encoder.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lshattn/errors.hpp"
#include "lshattn/rng.hpp"

namespace lshattn {

void validate(const EncoderConfig& config) {
    if (config.hidden_size < 1 || config.num_layers < 1 || config.num_heads < 1 ||
        config.intermediate_size < 1 || config.vocab_size < 1 ||
        config.max_seq_len < 1) {
        throw ConfigError("encoder sizes must be positive");
    }
    if (config.hidden_size % config.num_heads != 0) {
        throw ConfigError("hidden_size " + std::to_string(config.hidden_size) +
                          " not divisible by num_heads " +
                          std::to_string(config.num_heads));
    }
    if (!(config.layer_norm_eps > 0.0)) {
        throw ConfigError("layer_norm_eps must be positive");
    }
    if (config.attention_mode == ScoreMode::lsh) {
        if (!config.lsh.has_value()) {
            throw ConfigError("lsh mode needs an LshConfig");
        }
        if (config.lsh->dim != config.head_dim()) {
            throw ConfigError("lsh dim must equal head_dim");
        }
    }
    if (config.lsh.has_value()) validate(*config.lsh);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

namespace {

constexpr double kInitStd = 0.02;

Mat random_mat(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    for (auto& v : m.data) v = rng.normal() * kInitStd;
    return m;
}

// y = x W + b, W stored in_dim x out_dim.
Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b) {
    Mat y(x.rows, w.cols);
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        for (int c = 0; c < w.cols; ++c) yi[c] = b[c];
        for (int k = 0; k < x.cols; ++k) {
            const double xv = xi[k];
            const double* wk = w.row(k);
            for (int c = 0; c < w.cols; ++c) yi[c] += xv * wk[c];
        }
    }
    return y;
}

// seq x hidden -> 1 x heads x seq x head_dim, head h taking columns
// [h*head_dim, (h+1)*head_dim).
Tensor4 split_heads(const Mat& x, int heads, int head_dim) {
    Tensor4 t(1, heads, x.rows, head_dim);
    for (int h = 0; h < heads; ++h) {
        for (int s = 0; s < x.rows; ++s) {
            const double* src = x.row(s) + h * head_dim;
            double* dst = t.row(0, h, s);
            for (int d = 0; d < head_dim; ++d) dst[d] = src[d];
        }
    }
    return t;
}

Mat merge_heads(const Tensor4& t) {
    Mat x(t.seq, t.heads * t.dim);
    for (int h = 0; h < t.heads; ++h) {
        for (int s = 0; s < t.seq; ++s) {
            const double* src = t.row(0, h, s);
            double* dst = x.row(s) + h * t.dim;
            for (int d = 0; d < t.dim; ++d) dst[d] = src[d];
        }
    }
    return x;
}

}  // namespace

void layer_norm_rows(Mat& x, const std::vector<double>& gamma,
                     const std::vector<double>& beta, double eps) {
    for (int i = 0; i < x.rows; ++i) {
        double* row = x.row(i);
        double mean = 0.0;
        for (int c = 0; c < x.cols; ++c) mean += row[c];
        mean /= x.cols;
        double var = 0.0;
        for (int c = 0; c < x.cols; ++c) var += (row[c] - mean) * (row[c] - mean);
        var /= x.cols;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (int c = 0; c < x.cols; ++c) {
            row[c] = (row[c] - mean) * inv * gamma[c] + beta[c];
        }
    }
}

EncoderState init_encoder(const EncoderConfig& config) {
    validate(config);
    EncoderState state;
    state.config = config;

    Rng rng(derive_seed(config.seed, 0));
    const int hidden = config.hidden_size;
    state.token_embeddings = random_mat(rng, config.vocab_size, hidden);
    state.position_embeddings = random_mat(rng, config.max_seq_len, hidden);

    state.layers.resize(config.num_layers);
    for (auto& layer : state.layers) {
        layer.wq = random_mat(rng, hidden, hidden);
        layer.wk = random_mat(rng, hidden, hidden);
        layer.wv = random_mat(rng, hidden, hidden);
        layer.wo = random_mat(rng, hidden, hidden);
        layer.bq.assign(hidden, 0.0);
        layer.bk.assign(hidden, 0.0);
        layer.bv.assign(hidden, 0.0);
        layer.bo.assign(hidden, 0.0);
        layer.w1 = random_mat(rng, hidden, config.intermediate_size);
        layer.b1.assign(config.intermediate_size, 0.0);
        layer.w2 = random_mat(rng, config.intermediate_size, hidden);
        layer.b2.assign(hidden, 0.0);
        layer.ln1_gamma.assign(hidden, 1.0);
        layer.ln1_beta.assign(hidden, 0.0);
        layer.ln2_gamma.assign(hidden, 1.0);
        layer.ln2_beta.assign(hidden, 0.0);
    }
    return state;
}

ForwardResult encoder_forward(const EncoderState& state, const std::vector<int>& tokens,
                              std::optional<ScoreMode> mode_override) {
    const EncoderConfig& config = state.config;
    const int seq = static_cast<int>(tokens.size());
    if (seq > config.max_seq_len) {
        throw InputError("sequence length " + std::to_string(seq) +
                         " exceeds max_seq_len " + std::to_string(config.max_seq_len));
    }
    for (int tok : tokens) {
        if (tok < 0 || tok >= config.vocab_size) {
            throw InputError("token id " + std::to_string(tok) + " out of range");
        }
    }

    const ScoreMode mode = mode_override.value_or(config.attention_mode);
    std::optional<HashFamily> family;
    if (mode == ScoreMode::lsh) {
        if (!config.lsh.has_value() || config.lsh->dim != config.head_dim()) {
            throw ConfigError("lsh mode needs an LshConfig with dim == head_dim");
        }
        family = build_hash_family(*config.lsh);
    }

    ForwardResult result;
    const int hidden = config.hidden_size;
    const int heads = config.num_heads;
    const int head_dim = config.head_dim();

    Mat x(seq, hidden);
    for (int s = 0; s < seq; ++s) {
        const double* tok_row = state.token_embeddings.row(tokens[s]);
        const double* pos_row = state.position_embeddings.row(s);
        double* dst = x.row(s);
        for (int c = 0; c < hidden; ++c) dst[c] = tok_row[c] + pos_row[c];
    }
    if (seq == 0) {
        result.hidden = std::move(x);
        return result;
    }

    for (const auto& layer : state.layers) {
        AttentionInputs attn;
        attn.q = split_heads(linear(x, layer.wq, layer.bq), heads, head_dim);
        attn.k = split_heads(linear(x, layer.wk, layer.bk), heads, head_dim);
        attn.v = split_heads(linear(x, layer.wv, layer.bv), heads, head_dim);

        ScoreMatrix scores;
        if (mode == ScoreMode::full) {
            scores = full_scores(attn);
            result.counters.dot_products += baseline_dot_count(1, heads, seq);
            result.counters.flops += baseline_flops(1, heads, seq, head_dim);
        } else {
            scores = lsh_scores(attn, *family);
            const std::int64_t collided = count_lsh_dot_products(scores.masks);
            result.counters.dot_products += collided;
            result.counters.flops +=
                lsh_flops_model(family->config, 1, heads, seq, collided);
        }

        const Mat context = merge_heads(attention_output(scores, attn.v));
        const Mat attn_out = linear(context, layer.wo, layer.bo);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += attn_out.data[i];
        layer_norm_rows(x, layer.ln1_gamma, layer.ln1_beta, config.layer_norm_eps);

        Mat inter = linear(x, layer.w1, layer.b1);
        for (auto& v : inter.data) v = gelu(v);
        const Mat ff_out = linear(inter, layer.w2, layer.b2);
        for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += ff_out.data[i];
        layer_norm_rows(x, layer.ln2_gamma, layer.ln2_beta, config.layer_norm_eps);
    }

    result.hidden = std::move(x);
    return result;
}

}  // namespace lshattn
