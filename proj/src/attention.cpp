#include "lshattn/attention.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "lshattn/errors.hpp"

namespace lshattn {

void validate(const AttentionInputs& inputs) {
    if (!inputs.q.same_shape(inputs.k) || !inputs.q.same_shape(inputs.v)) {
        throw ShapeError("attention inputs must share one shape");
    }
    if (inputs.q.batch < 1 || inputs.q.heads < 1 || inputs.q.seq < 1 ||
        inputs.q.dim < 1) {
        throw ShapeError("attention inputs must be nonempty");
    }
    if (!all_finite(inputs.q.data) || !all_finite(inputs.k.data) ||
        !all_finite(inputs.v.data)) {
        throw NumericError("attention inputs contain non-finite values");
    }
}

ScoreMatrix full_scores(const AttentionInputs& inputs) {
    validate(inputs);
    const int B = inputs.q.batch, H = inputs.q.heads;
    const int L = inputs.q.seq, D = inputs.q.dim;

    ScoreMatrix result;
    result.mode = ScoreMode::full;
    result.batch = B;
    result.heads = H;
    result.seq = L;
    result.scores.reserve(static_cast<std::size_t>(B) * H);
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            Mat s(L, L);
            for (int i = 0; i < L; ++i) {
                const double* qi = inputs.q.row(b, h, i);
                for (int j = 0; j < L; ++j) {
                    s.at(i, j) = dot(qi, inputs.k.row(b, h, j), D);
                }
            }
            result.scores.push_back(std::move(s));
        }
    }
    return result;
}

ScoreMatrix scores_from_masks(const AttentionInputs& inputs,
                              const std::vector<QkCollisionMask>& masks) {
    validate(inputs);
    const int B = inputs.q.batch, H = inputs.q.heads;
    const int L = inputs.q.seq, D = inputs.q.dim;
    if (masks.size() != static_cast<std::size_t>(B) * H) {
        throw ShapeError("need one collision mask per (batch, head)");
    }
    for (const auto& mask : masks) {
        if (mask.rows != L || mask.cols != L) {
            throw ShapeError("collision mask shape must be seq x seq");
        }
    }

    ScoreMatrix result;
    result.mode = ScoreMode::lsh;
    result.batch = B;
    result.heads = H;
    result.seq = L;
    result.scores.reserve(masks.size());
    result.masks = masks;
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            const auto& mask = masks[static_cast<std::size_t>(b) * H + h];
            Mat s(L, L);
            for (int i = 0; i < L; ++i) {
                for (int j = 0; j < L; ++j) {
                    if (!mask.at(i, j)) continue;
                    const double value = dot(inputs.q.row(b, h, i),
                                             inputs.k.row(b, h, j), D);
                    s.at(i, j) = value;
                    s.at(j, i) = value;
                }
            }
            result.scores.push_back(std::move(s));
        }
    }
    return result;
}

ScoreMatrix lsh_scores(const AttentionInputs& inputs, const HashFamily& family) {
    validate(inputs);
    const int B = inputs.q.batch, H = inputs.q.heads;
    const int L = inputs.q.seq, D = inputs.q.dim;
    if (family.config.dim != D) {
        throw ConfigError("hash family dim " + std::to_string(family.config.dim) +
                          " != head_dim " + std::to_string(D));
    }

    std::vector<QkCollisionMask> masks;
    masks.reserve(static_cast<std::size_t>(B) * H);
    Mat q_slice(L, D);
    Mat k_slice(L, D);
    const std::size_t slice_bytes = static_cast<std::size_t>(L) * D * sizeof(double);
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            std::memcpy(q_slice.data.data(), inputs.q.row(b, h, 0), slice_bytes);
            std::memcpy(k_slice.data.data(), inputs.k.row(b, h, 0), slice_bytes);
            masks.push_back(qk_collision_mask(q_slice, k_slice, family));
        }
    }
    return scores_from_masks(inputs, masks);
}

Tensor4 attention_output(const ScoreMatrix& scores, const Tensor4& v) {
    const int B = v.batch, H = v.heads, L = v.seq, D = v.dim;
    if (scores.batch != B || scores.heads != H || scores.seq != L) {
        throw ShapeError("scores and values disagree on batch/heads/seq");
    }
    for (const auto& s : scores.scores) {
        if (!all_finite(s.data)) throw NumericError("non-finite attention scores");
    }

    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(D));
    Tensor4 out(B, H, L, D);
    std::vector<double> weights(L);
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            const Mat& s = scores.slice(b, h);
            for (int i = 0; i < L; ++i) {
                double row_max = s.at(i, 0) * inv_scale;
                for (int j = 1; j < L; ++j) {
                    row_max = std::max(row_max, s.at(i, j) * inv_scale);
                }
                double denom = 0.0;
                for (int j = 0; j < L; ++j) {
                    weights[j] = std::exp(s.at(i, j) * inv_scale - row_max);
                    denom += weights[j];
                }
                double* out_row = out.row(b, h, i);
                for (int j = 0; j < L; ++j) {
                    const double w = weights[j] / denom;
                    const double* v_row = v.row(b, h, j);
                    for (int d = 0; d < D; ++d) out_row[d] += w * v_row[d];
                }
            }
        }
    }
    return out;
}

ScoreGradients lsh_scores_grad(const AttentionInputs& inputs,
                               const std::vector<QkCollisionMask>& masks,
                               const std::vector<Mat>& upstream) {
    validate(inputs);
    const int B = inputs.q.batch, H = inputs.q.heads;
    const int L = inputs.q.seq, D = inputs.q.dim;
    if (masks.size() != static_cast<std::size_t>(B) * H ||
        upstream.size() != masks.size()) {
        throw ShapeError("need one mask and one upstream slice per (batch, head)");
    }
    for (std::size_t s = 0; s < masks.size(); ++s) {
        if (masks[s].rows != L || masks[s].cols != L) {
            throw ShapeError("collision mask shape must be seq x seq");
        }
        if (upstream[s].rows != L || upstream[s].cols != L) {
            throw ShapeError("upstream shape must be seq x seq");
        }
    }

    ScoreGradients grads{Tensor4(B, H, L, D), Tensor4(B, H, L, D)};
    // Cell (x, y) is owned by the last mask entry that wrote it; only the
    // owner's <q_i, k_j> feeds that cell, so only (i, j) gets gradient.
    std::vector<int> owner_q(static_cast<std::size_t>(L) * L);
    std::vector<int> owner_k(static_cast<std::size_t>(L) * L);
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < H; ++h) {
            const std::size_t slice = static_cast<std::size_t>(b) * H + h;
            const auto& mask = masks[slice];
            const auto& up = upstream[slice];
            std::fill(owner_q.begin(), owner_q.end(), -1);
            std::fill(owner_k.begin(), owner_k.end(), -1);
            for (int i = 0; i < L; ++i) {
                for (int j = 0; j < L; ++j) {
                    if (!mask.at(i, j)) continue;
                    owner_q[static_cast<std::size_t>(i) * L + j] = i;
                    owner_k[static_cast<std::size_t>(i) * L + j] = j;
                    owner_q[static_cast<std::size_t>(j) * L + i] = i;
                    owner_k[static_cast<std::size_t>(j) * L + i] = j;
                }
            }
            for (int x = 0; x < L; ++x) {
                for (int y = 0; y < L; ++y) {
                    const int i = owner_q[static_cast<std::size_t>(x) * L + y];
                    if (i < 0) continue;
                    const int j = owner_k[static_cast<std::size_t>(x) * L + y];
                    const double g = up.at(x, y);
                    double* dq_row = grads.dq.row(b, h, i);
                    double* dk_row = grads.dk.row(b, h, j);
                    const double* q_row = inputs.q.row(b, h, i);
                    const double* k_row = inputs.k.row(b, h, j);
                    for (int d = 0; d < D; ++d) {
                        dq_row[d] += g * k_row[d];
                        dk_row[d] += g * q_row[d];
                    }
                }
            }
        }
    }
    return grads;
}

}  // namespace lshattn
