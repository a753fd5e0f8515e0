#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "lshattn/tensor.hpp"

namespace lshattn {

// SimHash LSH scheme parameters: `bands` random hyperplanes per hash
// function, `table_size` buckets, `num_hash_fns` independent functions over
// `dim`-dimensional inputs.
struct LshConfig {
    int bands = 2;
    int table_size = 64;
    int num_hash_fns = 1;
    int dim = 64;
    std::uint64_t seed = 0;
};

// Throws ConfigError unless bands >= 1, table_size >= 2, num_hash_fns >= 1,
// dim >= 1.
void validate(const LshConfig& config);

// Random projection bank plus per-band bucket coefficients.
//   projections: num_hash_fns x bands x dim standard-normal entries
//   coeffs:      num_hash_fns x bands integers in [1, table_size]
// Built deterministically from (config, config.seed).
struct HashFamily {
    LshConfig config;
    std::vector<double> projections;
    std::vector<int> coeffs;

    const double* projection(int fn, int band) const {
        return projections.data() +
               (static_cast<std::size_t>(fn) * config.bands + band) * config.dim;
    }
    int coeff(int fn, int band) const {
        return coeffs[static_cast<std::size_t>(fn) * config.bands + band];
    }
};

HashFamily build_hash_family(const LshConfig& config);

// Per-band signs of the projections of one vector; entries are -1 or +1,
// with a zero inner product mapping to +1.
using SignSignature = std::vector<int>;

SignSignature sign_signature(std::span<const double> x, const HashFamily& family,
                             int fn_index);

// Bucket id in [0, table_size): sum of the coefficients at positive
// signature positions, mod table_size.
int uniform_hash(const SignSignature& signs, const HashFamily& family, int fn_index);

// Bucket assignment of every input vector under every hash function.
struct BucketTable {
    int num_hash_fns = 0;
    int num_vectors = 0;
    int table_size = 0;
    std::vector<int> assignments;  // num_hash_fns x num_vectors
    // Per hash function: bucket id -> indices of the vectors hashed there.
    std::vector<std::unordered_map<int, std::vector<int>>> buckets;

    int assignment(int fn, int v) const {
        return assignments[static_cast<std::size_t>(fn) * num_vectors + v];
    }
};

BucketTable hash_all(const Mat& vectors, const HashFamily& family);

// Boolean pairwise collision structure: entry (i, j) is true iff some hash
// function put vectors i and j in the same bucket. Symmetric, diagonal true.
struct CollisionMatrix {
    int n_vectors = 0;
    std::vector<std::uint8_t> entries;  // n_vectors x n_vectors

    bool at(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * n_vectors + j] != 0;
    }
};

CollisionMatrix collision_matrix(const Mat& vectors, const HashFamily& family);

// Query-key collision mask: the top-right quadrant of the collision matrix
// over the stacked [Q; K] input, i.e. entry (i, j) marks a collision between
// query row i and key row j.
struct QkCollisionMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> entries;

    bool at(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * cols + j] != 0;
    }
    std::int64_t popcount() const {
        std::int64_t n = 0;
        for (auto e : entries) n += (e != 0);
        return n;
    }
};

QkCollisionMask qk_collision_mask(const Mat& q, const Mat& k, const HashFamily& family);

// Probability that two vectors at angle theta land on the same side of one
// random hyperplane: 1 - theta/pi. Throws DomainError outside [0, pi].
double single_band_agreement(double theta);

// Probability of at least one bucket collision across all hash functions
// for a pair at angle theta: 1 - (1 - [(1 - theta/pi)^bands + 1/m])^n with
// the inner bracket clamped to <= 1 (the additive term overshoots near
// theta = 0). Throws DomainError outside [0, pi].
double analytic_collision_probability(double theta, const LshConfig& config);

// Empirical collision rate over `trials` pairs at exact angle theta. Each
// trial draws a fresh family and a fresh pair from substreams of (seed,
// trial index), so the result is independent of evaluation order.
double monte_carlo_collision_rate(double theta, const LshConfig& config,
                                  std::int64_t trials, std::uint64_t seed);

}  // namespace lshattn
