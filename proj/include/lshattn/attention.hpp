#pragma once

#include <vector>

#include "lshattn/simhash.hpp"
#include "lshattn/tensor.hpp"

namespace lshattn {

enum class ScoreMode { full, lsh };

// One multi-head attention problem: Q, K, V of shape
// batch x heads x seq x head_dim.
struct AttentionInputs {
    Tensor4 q;
    Tensor4 k;
    Tensor4 v;
};

// Throws ShapeError unless q, k, v share one nonempty shape; throws
// NumericError on non-finite entries.
void validate(const AttentionInputs& inputs);

// Raw scores for every (batch, head): seq x seq matrices. In lsh mode the
// per-slice collision mask that produced the scores is kept alongside.
struct ScoreMatrix {
    ScoreMode mode = ScoreMode::full;
    int batch = 0;
    int heads = 0;
    int seq = 0;
    std::vector<Mat> scores;             // batch*heads slices, row-major
    std::vector<QkCollisionMask> masks;  // empty in full mode

    const Mat& slice(int b, int h) const {
        return scores[static_cast<std::size_t>(b) * heads + h];
    }
    const QkCollisionMask& mask(int b, int h) const {
        return masks[static_cast<std::size_t>(b) * heads + h];
    }
};

// Dense scores S = Q K^T per (batch, head). No scaling applied here.
ScoreMatrix full_scores(const AttentionInputs& inputs);

// Score reconstruction from per-slice collision masks: for each mask-true
// (i, j) visited in row-major order, write <q_i, k_j> to both (i, j) and
// (j, i); later writes win. Entries never written stay exactly 0.
ScoreMatrix scores_from_masks(const AttentionInputs& inputs,
                              const std::vector<QkCollisionMask>& masks);

// Sparse scores: one shared family hashes the stacked [Q; K] rows of every
// (batch, head); the query-key quadrant of the collision matrix becomes the
// mask and scores are reconstructed as in scores_from_masks. Throws
// ConfigError when family.config.dim != head_dim.
ScoreMatrix lsh_scores(const AttentionInputs& inputs, const HashFamily& family);

// softmax(S / sqrt(head_dim)) V per (batch, head). Unwritten zero scores
// take part in the softmax like any other value; no masking to -inf.
// Throws NumericError on non-finite scores.
Tensor4 attention_output(const ScoreMatrix& scores, const Tensor4& v);

// Gradients of L = sum_{b,h,i,j} upstream[b,h,i,j] * S[b,h,i,j] with
// respect to Q and K, holding the collision masks fixed.
struct ScoreGradients {
    Tensor4 dq;
    Tensor4 dk;
};

// Differentiates the same last-write-wins reconstruction scores_from_masks
// performs, so only the final owner of each score cell receives gradient.
// `upstream` has one seq x seq slice per (batch, head), like the scores.
ScoreGradients lsh_scores_grad(const AttentionInputs& inputs,
                               const std::vector<QkCollisionMask>& masks,
                               const std::vector<Mat>& upstream);

}  // namespace lshattn
