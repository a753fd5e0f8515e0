#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lshattn::cli {

// Flags shared by every subcommand. `output` empty means stdout; `format`
// is "csv" or "json"; `config_path` names a flat JSON object whose
// kebab-case keys mirror the flag names (explicit flags win).
struct CommonOptions {
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "csv";
    std::string config_path;
};

// Two-mode kernel benchmark on seeded Gaussian inputs: kflops, dot products
// (mean over `samples` hashings), and timing over `runs` repetitions.
struct BenchOptions {
    CommonOptions common;
    int batch = 1;
    int heads = 2;
    int seq_len = 10;
    int head_dim = 64;
    int bands = 2;
    int table_size = 64;
    int num_hash_fns = 1;
    int samples = 100;
    int runs = 1000;  // 0 skips timing and leaves time fields empty
};

// Model-KFLOPs grid over comma-separated bands/hash-fn/table-size lists.
// collided_pairs >= 0 pins the score-term input; otherwise collisions are
// measured per grid point (mean over `samples` hashings).
struct SweepOptions {
    CommonOptions common;
    std::string bands_list = "2";
    std::string hashfns_list = "1";
    std::string tablesize_list = "64";
    int batch = 1;
    int heads = 2;
    int seq_len = 10;
    int head_dim = 64;
    std::int64_t collided_pairs = -1;
    int samples = 1;
    int runs = 0;
};

// Analytic vs Monte Carlo collision probability on a comma-separated theta
// list (radians in [0, pi]).
struct CollideProbOptions {
    CommonOptions common;
    std::string theta_list =
        "0.7853981633974483,1.5707963267948966,2.356194490192345,"
        "3.141592653589793";
    int bands = 2;
    int table_size = 64;
    int num_hash_fns = 1;
    int dim = 16;
    std::int64_t trials = 100000;
};

// One encoder forward per score mode on the same random token sequence;
// JSON summary with shapes, per-mode counters, and the output gap.
struct DemoForwardOptions {
    CommonOptions common;
    int seq_len = 10;
    int hidden_size = 128;
    int num_layers = 2;
    int num_heads = 2;
    int intermediate_size = 512;
    int vocab_size = 1024;
    int max_seq_len = 128;
    int bands = 2;
    int table_size = 64;
    int num_hash_fns = 1;
};

// Subcommand bodies; `out` receives the report (already redirected when
// --output is set), `err` the diagnostics. Return a process exit code.
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_collide_prob(const CollideProbOptions& options, std::ostream& out,
                     std::ostream& err);
int cmd_demo_forward(const DemoForwardOptions& options, std::ostream& out,
                     std::ostream& err);

// Full argument-vector entry point (no program name in `args`). Parses
// flags, applies --config then flag overrides, opens --output, dispatches.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lshattn::cli
