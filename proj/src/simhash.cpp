#include "lshattn/simhash.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lshattn/errors.hpp"
#include "lshattn/rng.hpp"

namespace lshattn {

namespace {

constexpr double kPi = std::numbers::pi;

// Substream tags for build_hash_family.
constexpr std::uint64_t kProjectionStream = 1;
constexpr std::uint64_t kCoeffStream = 2;

void check_angle(double theta) {
    if (!(theta >= 0.0 && theta <= kPi)) {
        throw DomainError("theta must lie in [0, pi], got " + std::to_string(theta));
    }
}

}  // namespace

void validate(const LshConfig& config) {
    if (config.bands < 1) throw ConfigError("bands must be >= 1");
    if (config.table_size < 2) throw ConfigError("table_size must be >= 2");
    if (config.num_hash_fns < 1) throw ConfigError("num_hash_fns must be >= 1");
    if (config.dim < 1) throw ConfigError("dim must be >= 1");
}

HashFamily build_hash_family(const LshConfig& config) {
    validate(config);
    HashFamily family;
    family.config = config;

    const std::size_t n_proj = static_cast<std::size_t>(config.num_hash_fns) *
                               config.bands * config.dim;
    family.projections.resize(n_proj);
    Rng proj_rng(derive_seed(config.seed, kProjectionStream));
    fill_normal(proj_rng, family.projections);

    const std::size_t n_coeff =
        static_cast<std::size_t>(config.num_hash_fns) * config.bands;
    family.coeffs.resize(n_coeff);
    Rng coeff_rng(derive_seed(config.seed, kCoeffStream));
    for (auto& c : family.coeffs) {
        c = 1 + static_cast<int>(coeff_rng.bounded(
                    static_cast<std::uint64_t>(config.table_size)));
    }
    return family;
}

SignSignature sign_signature(std::span<const double> x, const HashFamily& family,
                             int fn_index) {
    const auto& cfg = family.config;
    if (static_cast<int>(x.size()) != cfg.dim) {
        throw ShapeError("sign_signature: vector length " + std::to_string(x.size()) +
                         " != dim " + std::to_string(cfg.dim));
    }
    if (fn_index < 0 || fn_index >= cfg.num_hash_fns) {
        throw InputError("sign_signature: fn_index out of range");
    }
    SignSignature signs(cfg.bands);
    for (int band = 0; band < cfg.bands; ++band) {
        const double ip = dot(family.projection(fn_index, band), x.data(), cfg.dim);
        signs[band] = ip >= 0.0 ? 1 : -1;  // sign(0) := +1
    }
    return signs;
}

int uniform_hash(const SignSignature& signs, const HashFamily& family, int fn_index) {
    const auto& cfg = family.config;
    if (static_cast<int>(signs.size()) != cfg.bands) {
        throw ShapeError("uniform_hash: signature length != bands");
    }
    if (fn_index < 0 || fn_index >= cfg.num_hash_fns) {
        throw InputError("uniform_hash: fn_index out of range");
    }
    std::int64_t sum = 0;
    for (int band = 0; band < cfg.bands; ++band) {
        if (signs[band] > 0) sum += family.coeff(fn_index, band);
    }
    return static_cast<int>(sum % cfg.table_size);
}

BucketTable hash_all(const Mat& vectors, const HashFamily& family) {
    const auto& cfg = family.config;
    if (vectors.cols != cfg.dim) {
        throw ShapeError("hash_all: vector width " + std::to_string(vectors.cols) +
                         " != dim " + std::to_string(cfg.dim));
    }
    BucketTable table;
    table.num_hash_fns = cfg.num_hash_fns;
    table.num_vectors = vectors.rows;
    table.table_size = cfg.table_size;
    table.assignments.resize(static_cast<std::size_t>(cfg.num_hash_fns) * vectors.rows);
    table.buckets.resize(cfg.num_hash_fns);
    for (int fn = 0; fn < cfg.num_hash_fns; ++fn) {
        for (int v = 0; v < vectors.rows; ++v) {
            const auto signs =
                sign_signature({vectors.row(v), static_cast<std::size_t>(cfg.dim)},
                               family, fn);
            const int bucket = uniform_hash(signs, family, fn);
            table.assignments[static_cast<std::size_t>(fn) * vectors.rows + v] = bucket;
            table.buckets[fn][bucket].push_back(v);
        }
    }
    return table;
}

CollisionMatrix collision_matrix(const Mat& vectors, const HashFamily& family) {
    const BucketTable table = hash_all(vectors, family);
    const int n = vectors.rows;
    CollisionMatrix m;
    m.n_vectors = n;
    m.entries.assign(static_cast<std::size_t>(n) * n, 0);
    for (const auto& fn_buckets : table.buckets) {
        for (const auto& [bucket, members] : fn_buckets) {
            for (int a : members) {
                for (int b : members) {
                    m.entries[static_cast<std::size_t>(a) * n + b] = 1;
                }
            }
        }
    }
    return m;
}

QkCollisionMask qk_collision_mask(const Mat& q, const Mat& k, const HashFamily& family) {
    if (q.cols != k.cols) {
        throw ShapeError("qk_collision_mask: Q and K widths differ");
    }
    if (q.rows != k.rows) {
        throw ShapeError("qk_collision_mask: Q and K row counts differ");
    }
    const int L = q.rows;
    Mat stacked(2 * L, q.cols);
    std::copy(q.data.begin(), q.data.end(), stacked.data.begin());
    std::copy(k.data.begin(), k.data.end(),
              stacked.data.begin() + static_cast<std::size_t>(L) * q.cols);

    const CollisionMatrix m = collision_matrix(stacked, family);
    QkCollisionMask mask;
    mask.rows = L;
    mask.cols = L;
    mask.entries.resize(static_cast<std::size_t>(L) * L);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            mask.entries[static_cast<std::size_t>(i) * L + j] = m.at(i, L + j) ? 1 : 0;
        }
    }
    return mask;
}

double single_band_agreement(double theta) {
    check_angle(theta);
    return 1.0 - theta / kPi;
}

double analytic_collision_probability(double theta, const LshConfig& config) {
    validate(config);
    check_angle(theta);
    const double q = std::pow(single_band_agreement(theta), config.bands);
    const double inner =
        std::min(1.0, q + 1.0 / static_cast<double>(config.table_size));
    const double p = 1.0 - std::pow(1.0 - inner, config.num_hash_fns);
    return std::min(1.0, std::max(0.0, p));
}

namespace {

// Unit vector in place; redraws the Gaussian fill while degenerate.
void random_unit(Rng& rng, std::vector<double>& v) {
    for (;;) {
        fill_normal(rng, v);
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 > 1e-24) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : v) x *= inv;
            return;
        }
    }
}

}  // namespace

double monte_carlo_collision_rate(double theta, const LshConfig& config,
                                  std::int64_t trials, std::uint64_t seed) {
    validate(config);
    check_angle(theta);
    if (trials < 1) throw ConfigError("trials must be >= 1");
    const bool interior = theta > 0.0 && theta < kPi;
    if (interior && config.dim < 2) {
        throw ConfigError("exact interior angles need dim >= 2");
    }

    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    std::vector<double> a(config.dim);
    std::vector<double> b(config.dim);
    std::vector<double> w(config.dim);

    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        LshConfig fam_config = config;
        fam_config.seed = derive_seed(trial_seed, 1);
        const HashFamily family = build_hash_family(fam_config);

        Rng vec_rng(derive_seed(trial_seed, 2));
        random_unit(vec_rng, a);
        if (!interior) {
            // theta = 0 or pi: the rotated vector is exactly +-a.
            const double s = theta == 0.0 ? 1.0 : -1.0;
            for (int i = 0; i < config.dim; ++i) b[i] = s * a[i];
        } else {
            // Orthogonalize a fresh direction against a; redraw if the
            // residual is numerically degenerate.
            for (;;) {
                random_unit(vec_rng, w);
                double proj = 0.0;
                for (int i = 0; i < config.dim; ++i) proj += w[i] * a[i];
                double norm2 = 0.0;
                for (int i = 0; i < config.dim; ++i) {
                    w[i] -= proj * a[i];
                    norm2 += w[i] * w[i];
                }
                if (norm2 > 1e-24) {
                    const double inv = 1.0 / std::sqrt(norm2);
                    for (double& x : w) x *= inv;
                    break;
                }
            }
            for (int i = 0; i < config.dim; ++i) b[i] = cos_t * a[i] + sin_t * w[i];
        }

        bool collided = false;
        for (int fn = 0; fn < config.num_hash_fns && !collided; ++fn) {
            const int bucket_a = uniform_hash(sign_signature(a, family, fn), family, fn);
            const int bucket_b = uniform_hash(sign_signature(b, family, fn), family, fn);
            collided = bucket_a == bucket_b;
        }
        hits += collided;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace lshattn
