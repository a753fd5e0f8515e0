#include "lshattn/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lshattn/attention.hpp"
#include "lshattn/encoder.hpp"
#include "lshattn/errors.hpp"
#include "lshattn/instrument.hpp"
#include "lshattn/rng.hpp"
#include "lshattn/simhash.hpp"

namespace lshattn::cli {
namespace {

using nlohmann::ordered_json;

// Substreams of the master seed, so inputs, hash families, and token draws
// never share a generator. Per-sample family seeds are substreams of the
// family stream; index `samples` is reserved for the timing family.
constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kFamilyStream = 2;
constexpr std::uint64_t kEncoderLshStream = 3;
constexpr std::uint64_t kTokenStream = 4;

// Bad flag or config values; reported as usage errors with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int guard(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string sci(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", value);
    return buf;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
}

long long parse_integer(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw UsageError(what + ": not an integer: '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) {
        throw UsageError(what + ": not an integer: '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw UsageError(what + ": not a number: '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) {
        throw UsageError(what + ": not a number: '" + text + "'");
    }
    return value;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> values;
    for (const auto& item : split_csv(text)) {
        const long long v = parse_integer(item, what);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            throw UsageError(what + ": value out of range: " + item);
        }
        values.push_back(static_cast<int>(v));
    }
    if (values.empty()) throw UsageError(what + ": list is empty");
    return values;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& item : split_csv(text)) values.push_back(parse_real(item, what));
    if (values.empty()) throw UsageError(what + ": list is empty");
    return values;
}

void check_format(const std::string& format) {
    if (format != "csv" && format != "json") {
        throw UsageError("format must be csv or json, got '" + format + "'");
    }
}

AttentionInputs gaussian_inputs(int batch, int heads, int seq_len, int head_dim,
                                std::uint64_t seed) {
    AttentionInputs inputs;
    inputs.q = Tensor4(batch, heads, seq_len, head_dim);
    inputs.k = Tensor4(batch, heads, seq_len, head_dim);
    inputs.v = Tensor4(batch, heads, seq_len, head_dim);
    Rng rng(derive_seed(seed, kInputStream));
    fill_normal(rng, inputs.q.data);
    fill_normal(rng, inputs.k.data);
    fill_normal(rng, inputs.v.data);
    return inputs;
}

void check_dims(int batch, int heads, int seq_len, int head_dim) {
    if (batch < 1 || heads < 1 || seq_len < 1 || head_dim < 1) {
        throw UsageError("batch, heads, seq-len, and head-dim must be positive");
    }
}

}  // namespace

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() -> int {
        check_format(options.common.format);
        check_dims(options.batch, options.heads, options.seq_len, options.head_dim);
        if (options.samples < 1) throw UsageError("samples must be >= 1");
        if (options.runs < 0) throw UsageError("runs must be >= 0");
        LshConfig config{options.bands, options.table_size, options.num_hash_fns,
                         options.head_dim, 0};
        validate(config);

        const auto inputs = gaussian_inputs(options.batch, options.heads,
                                            options.seq_len, options.head_dim,
                                            options.common.seed);

        const std::int64_t full_dots =
            baseline_dot_count(options.batch, options.heads, options.seq_len);
        const std::int64_t full_flops = baseline_flops(
            options.batch, options.heads, options.seq_len, options.head_dim);

        // Fresh family per sample over one fixed input, so the dot-product
        // column is a mean over the hashing randomness alone.
        const std::uint64_t family_stream =
            derive_seed(options.common.seed, kFamilyStream);
        double lsh_dots_mean = 0.0;
        double lsh_flops_mean = 0.0;
        for (int s = 0; s < options.samples; ++s) {
            LshConfig sample_config = config;
            sample_config.seed = derive_seed(family_stream, static_cast<std::uint64_t>(s));
            const ScoreMatrix scores =
                lsh_scores(inputs, build_hash_family(sample_config));
            const std::int64_t collided = count_lsh_dot_products(scores.masks);
            lsh_dots_mean += static_cast<double>(collided);
            lsh_flops_mean += static_cast<double>(lsh_flops_model(
                sample_config, options.batch, options.heads, options.seq_len, collided));
        }
        lsh_dots_mean /= options.samples;
        lsh_flops_mean /= options.samples;

        TimingStats full_timing;
        TimingStats lsh_timing;
        if (options.runs > 0) {
            full_timing =
                time_attention(inputs, ScoreMode::full, std::nullopt, options.runs);
            LshConfig timing_config = config;
            timing_config.seed =
                derive_seed(family_stream, static_cast<std::uint64_t>(options.samples));
            lsh_timing = time_attention(inputs, ScoreMode::lsh,
                                        build_hash_family(timing_config), options.runs);
        }

        if (options.common.format == "csv") {
            out << "mode,kflops,dot_products,samples,runs,mean_time_s,std_time_s\n";
            out << "full," << fixed(static_cast<double>(full_flops) / 1000.0, 2) << ','
                << fixed(static_cast<double>(full_dots), 2) << ',' << options.samples
                << ',' << options.runs << ',';
            if (options.runs > 0) {
                out << sci(full_timing.mean_s) << ',' << sci(full_timing.std_s);
            } else {
                out << ',';
            }
            out << "\nlsh," << fixed(lsh_flops_mean / 1000.0, 2) << ','
                << fixed(lsh_dots_mean, 2) << ',' << options.samples << ','
                << options.runs << ',';
            if (options.runs > 0) {
                out << sci(lsh_timing.mean_s) << ',' << sci(lsh_timing.std_s);
            } else {
                out << ',';
            }
            out << '\n';
        } else {
            ordered_json report;
            ordered_json full_row;
            full_row["kflops"] = static_cast<double>(full_flops) / 1000.0;
            full_row["dot-products"] = static_cast<double>(full_dots);
            full_row["samples"] = options.samples;
            full_row["runs"] = options.runs;
            if (options.runs > 0) {
                full_row["mean-time-s"] = full_timing.mean_s;
                full_row["std-time-s"] = full_timing.std_s;
            }
            ordered_json lsh_row;
            lsh_row["kflops"] = lsh_flops_mean / 1000.0;
            lsh_row["dot-products"] = lsh_dots_mean;
            lsh_row["samples"] = options.samples;
            lsh_row["runs"] = options.runs;
            if (options.runs > 0) {
                lsh_row["mean-time-s"] = lsh_timing.mean_s;
                lsh_row["std-time-s"] = lsh_timing.std_s;
            }
            report["full"] = std::move(full_row);
            report["lsh"] = std::move(lsh_row);
            out << report.dump(2) << '\n';
        }
        return 0;
    });
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() -> int {
        check_format(options.common.format);
        check_dims(options.batch, options.heads, options.seq_len, options.head_dim);
        if (options.samples < 1) throw UsageError("samples must be >= 1");
        if (options.runs < 0) throw UsageError("runs must be >= 0");
        auto hashfns = parse_int_list(options.hashfns_list, "--hashfns-list");
        auto bands = parse_int_list(options.bands_list, "--bands-list");
        auto tablesizes = parse_int_list(options.tablesize_list, "--tablesize-list");
        std::sort(hashfns.begin(), hashfns.end());
        std::sort(bands.begin(), bands.end());
        std::sort(tablesizes.begin(), tablesizes.end());
        const std::int64_t pair_budget =
            baseline_dot_count(options.batch, options.heads, options.seq_len);
        if (options.collided_pairs > pair_budget) {
            throw UsageError("collided-pairs exceeds batch*heads*seq_len^2");
        }
        for (int n : hashfns) {
            for (int r : bands) {
                for (int m : tablesizes) {
                    validate(LshConfig{r, m, n, options.head_dim, 0});
                }
            }
        }

        std::optional<AttentionInputs> inputs;
        if (options.collided_pairs < 0 || options.runs > 0) {
            inputs = gaussian_inputs(options.batch, options.heads, options.seq_len,
                                     options.head_dim, options.common.seed);
        }

        std::vector<SweepRecord> records;
        const std::uint64_t family_stream =
            derive_seed(options.common.seed, kFamilyStream);
        std::uint64_t point_index = 0;
        for (int n : hashfns) {
            for (int r : bands) {
                for (int m : tablesizes) {
                    LshConfig config{r, m, n, options.head_dim, 0};
                    const std::uint64_t point_stream =
                        derive_seed(family_stream, point_index++);

                    double dots_mean = 0.0;
                    double flops_mean = 0.0;
                    if (options.collided_pairs >= 0) {
                        dots_mean = static_cast<double>(options.collided_pairs);
                        flops_mean = static_cast<double>(lsh_flops_model(
                            config, options.batch, options.heads, options.seq_len,
                            options.collided_pairs));
                    } else {
                        for (int s = 0; s < options.samples; ++s) {
                            LshConfig sample_config = config;
                            sample_config.seed =
                                derive_seed(point_stream, static_cast<std::uint64_t>(s));
                            const ScoreMatrix scores =
                                lsh_scores(*inputs, build_hash_family(sample_config));
                            const std::int64_t collided =
                                count_lsh_dot_products(scores.masks);
                            dots_mean += static_cast<double>(collided);
                            flops_mean += static_cast<double>(
                                lsh_flops_model(sample_config, options.batch,
                                                options.heads, options.seq_len, collided));
                        }
                        dots_mean /= options.samples;
                        flops_mean /= options.samples;
                    }

                    TimingStats timing;
                    if (options.runs > 0) {
                        LshConfig timing_config = config;
                        timing_config.seed = derive_seed(
                            point_stream, static_cast<std::uint64_t>(options.samples));
                        timing = time_attention(*inputs, ScoreMode::lsh,
                                                build_hash_family(timing_config),
                                                options.runs);
                    }

                    SweepRecord record;
                    record.bands = r;
                    record.table_size = m;
                    record.num_hash_fns = n;
                    record.batch = options.batch;
                    record.heads = options.heads;
                    record.seq_len = options.seq_len;
                    record.head_dim = options.head_dim;
                    record.seed = options.common.seed;
                    record.mode = "lsh";
                    record.kflops = flops_mean / 1000.0;
                    record.dot_products = dots_mean;
                    record.runs = options.runs;
                    record.mean_time_s = timing.mean_s;
                    records.push_back(std::move(record));
                }
            }
        }

        if (options.common.format == "csv") {
            out << "bands,table_size,num_hash_fns,batch,heads,seq_len,head_dim,seed,"
                   "mode,kflops,dot_products,runs,mean_time_s\n";
            for (const auto& rec : records) {
                out << rec.bands << ',' << rec.table_size << ',' << rec.num_hash_fns
                    << ',' << rec.batch << ',' << rec.heads << ',' << rec.seq_len << ','
                    << rec.head_dim << ',' << rec.seed << ',' << rec.mode << ','
                    << fixed(rec.kflops, 3) << ',' << fixed(rec.dot_products, 2) << ','
                    << rec.runs << ',';
                if (rec.runs > 0) out << sci(rec.mean_time_s);
                out << '\n';
            }
        } else {
            ordered_json report = ordered_json::array();
            for (const auto& rec : records) {
                ordered_json row;
                row["bands"] = rec.bands;
                row["table-size"] = rec.table_size;
                row["num-hash-fns"] = rec.num_hash_fns;
                row["batch"] = rec.batch;
                row["heads"] = rec.heads;
                row["seq-len"] = rec.seq_len;
                row["head-dim"] = rec.head_dim;
                row["seed"] = rec.seed;
                row["mode"] = rec.mode;
                row["kflops"] = rec.kflops;
                row["dot-products"] = rec.dot_products;
                row["runs"] = rec.runs;
                if (rec.runs > 0) row["mean-time-s"] = rec.mean_time_s;
                report.push_back(std::move(row));
            }
            out << report.dump(2) << '\n';
        }
        return 0;
    });
}

int cmd_collide_prob(const CollideProbOptions& options, std::ostream& out,
                     std::ostream& err) {
    return guard(err, [&]() -> int {
        check_format(options.common.format);
        const auto thetas = parse_real_list(options.theta_list, "--theta-list");
        if (options.trials < 1) throw UsageError("trials must be >= 1");
        const LshConfig config{options.bands, options.table_size, options.num_hash_fns,
                               options.dim, 0};
        validate(config);
        for (double theta : thetas) {
            if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
                throw UsageError("theta must lie in [0, pi], got " +
                                 std::to_string(theta));
            }
            if (theta > 0.0 && theta < std::numbers::pi && options.dim < 2) {
                throw UsageError("interior angles need dim >= 2");
            }
        }

        struct Row {
            double theta, analytic, empirical, std_error, abs_gap;
        };
        std::vector<Row> rows;
        rows.reserve(thetas.size());
        for (double theta : thetas) {
            const double analytic = analytic_collision_probability(theta, config);
            const double empirical = monte_carlo_collision_rate(
                theta, config, options.trials, options.common.seed);
            const double se = std::sqrt(empirical * (1.0 - empirical) /
                                        static_cast<double>(options.trials));
            rows.push_back({theta, analytic, empirical, se, std::abs(empirical - analytic)});
        }

        if (options.common.format == "csv") {
            out << "theta,analytic,empirical,std_error,abs_gap\n";
            for (const auto& row : rows) {
                out << fixed(row.theta, 6) << ',' << fixed(row.analytic, 6) << ','
                    << fixed(row.empirical, 6) << ',' << fixed(row.std_error, 6) << ','
                    << fixed(row.abs_gap, 6) << '\n';
            }
        } else {
            ordered_json report = ordered_json::array();
            for (const auto& row : rows) {
                ordered_json r;
                r["theta"] = row.theta;
                r["analytic"] = row.analytic;
                r["empirical"] = row.empirical;
                r["std-error"] = row.std_error;
                r["abs-gap"] = row.abs_gap;
                report.push_back(std::move(r));
            }
            out << report.dump(2) << '\n';
        }
        return 0;
    });
}

int cmd_demo_forward(const DemoForwardOptions& options, std::ostream& out,
                     std::ostream& err) {
    return guard(err, [&]() -> int {
        if (options.common.format != "json") {
            throw UsageError("demo-forward emits json only");
        }
        if (options.seq_len < 1) throw UsageError("seq-len must be >= 1");

        EncoderConfig config;
        config.hidden_size = options.hidden_size;
        config.num_layers = options.num_layers;
        config.num_heads = options.num_heads;
        config.intermediate_size = options.intermediate_size;
        config.vocab_size = options.vocab_size;
        config.max_seq_len = options.max_seq_len;
        config.seed = options.common.seed;
        config.attention_mode = ScoreMode::full;
        if (options.hidden_size < 1 || options.num_heads < 1 ||
            options.hidden_size % options.num_heads != 0) {
            throw UsageError("hidden-size must be a positive multiple of num-heads");
        }
        config.lsh = LshConfig{options.bands, options.table_size, options.num_hash_fns,
                               config.head_dim(),
                               derive_seed(options.common.seed, kEncoderLshStream)};
        validate(config);
        if (options.seq_len > config.max_seq_len) {
            throw UsageError("seq-len exceeds max-seq-len");
        }

        std::vector<int> tokens(options.seq_len);
        Rng token_rng(derive_seed(options.common.seed, kTokenStream));
        for (auto& tok : tokens) {
            tok = static_cast<int>(
                token_rng.bounded(static_cast<std::uint64_t>(config.vocab_size)));
        }

        const EncoderState state = init_encoder(config);
        const ForwardResult full = encoder_forward(state, tokens, ScoreMode::full);
        const ForwardResult lsh = encoder_forward(state, tokens, ScoreMode::lsh);

        double diff2 = 0.0;
        double full_norm2 = 0.0;
        double lsh_norm2 = 0.0;
        for (std::size_t i = 0; i < full.hidden.data.size(); ++i) {
            const double d = full.hidden.data[i] - lsh.hidden.data[i];
            diff2 += d * d;
            full_norm2 += full.hidden.data[i] * full.hidden.data[i];
            lsh_norm2 += lsh.hidden.data[i] * lsh.hidden.data[i];
        }

        ordered_json report;
        report["shape"] = {full.hidden.rows, full.hidden.cols};
        report["tokens"] = tokens;
        ordered_json full_row;
        full_row["dot-products"] = full.counters.dot_products;
        full_row["flops"] = full.counters.flops;
        full_row["output-norm"] = std::sqrt(full_norm2);
        ordered_json lsh_row;
        lsh_row["dot-products"] = lsh.counters.dot_products;
        lsh_row["flops"] = lsh.counters.flops;
        lsh_row["output-norm"] = std::sqrt(lsh_norm2);
        report["full"] = std::move(full_row);
        report["lsh"] = std::move(lsh_row);
        report["output-diff-norm"] = std::sqrt(diff2);
        report["finite"] = all_finite(full.hidden.data) && all_finite(lsh.hidden.data);
        out << report.dump(2) << '\n';
        return 0;
    });
}

namespace {

using Setter = std::function<void(const ordered_json&)>;
using KeyTable = std::map<std::string, Setter>;

template <typename T>
Setter number_key(T& field) {
    return [&field](const ordered_json& value) {
        if (!value.is_number()) throw UsageError("expected a number");
        field = value.get<T>();
    };
}

Setter string_key(std::string& field) {
    return [&field](const ordered_json& value) {
        if (!value.is_string()) throw UsageError("expected a string");
        field = value.get<std::string>();
    };
}

// List-valued keys mirror the comma-separated flags; a JSON array of
// numbers is accepted as the natural spelling.
Setter list_key(std::string& field) {
    return [&field](const ordered_json& value) {
        if (value.is_string()) {
            field = value.get<std::string>();
            return;
        }
        if (value.is_array()) {
            std::string joined;
            for (const auto& item : value) {
                if (!item.is_number()) throw UsageError("expected numbers");
                if (!joined.empty()) joined += ',';
                joined += item.dump();
            }
            field = joined;
            return;
        }
        throw UsageError("expected a string or an array of numbers");
    };
}

void add_common_keys(KeyTable& table, CommonOptions& common) {
    table["seed"] = number_key(common.seed);
    table["output"] = string_key(common.output);
    table["format"] = string_key(common.format);
}

KeyTable config_keys(BenchOptions& o) {
    KeyTable table;
    add_common_keys(table, o.common);
    table["batch"] = number_key(o.batch);
    table["heads"] = number_key(o.heads);
    table["seq-len"] = number_key(o.seq_len);
    table["head-dim"] = number_key(o.head_dim);
    table["bands"] = number_key(o.bands);
    table["table-size"] = number_key(o.table_size);
    table["num-hash-fns"] = number_key(o.num_hash_fns);
    table["samples"] = number_key(o.samples);
    table["runs"] = number_key(o.runs);
    return table;
}

KeyTable config_keys(SweepOptions& o) {
    KeyTable table;
    add_common_keys(table, o.common);
    table["bands-list"] = list_key(o.bands_list);
    table["hashfns-list"] = list_key(o.hashfns_list);
    table["tablesize-list"] = list_key(o.tablesize_list);
    table["batch"] = number_key(o.batch);
    table["heads"] = number_key(o.heads);
    table["seq-len"] = number_key(o.seq_len);
    table["head-dim"] = number_key(o.head_dim);
    table["collided-pairs"] = number_key(o.collided_pairs);
    table["samples"] = number_key(o.samples);
    table["runs"] = number_key(o.runs);
    return table;
}

KeyTable config_keys(CollideProbOptions& o) {
    KeyTable table;
    add_common_keys(table, o.common);
    table["theta-list"] = list_key(o.theta_list);
    table["bands"] = number_key(o.bands);
    table["table-size"] = number_key(o.table_size);
    table["num-hash-fns"] = number_key(o.num_hash_fns);
    table["dim"] = number_key(o.dim);
    table["trials"] = number_key(o.trials);
    return table;
}

KeyTable config_keys(DemoForwardOptions& o) {
    KeyTable table;
    add_common_keys(table, o.common);
    table["seq-len"] = number_key(o.seq_len);
    table["hidden-size"] = number_key(o.hidden_size);
    table["num-layers"] = number_key(o.num_layers);
    table["num-heads"] = number_key(o.num_heads);
    table["intermediate-size"] = number_key(o.intermediate_size);
    table["vocab-size"] = number_key(o.vocab_size);
    table["max-seq-len"] = number_key(o.max_seq_len);
    table["bands"] = number_key(o.bands);
    table["table-size"] = number_key(o.table_size);
    table["num-hash-fns"] = number_key(o.num_hash_fns);
    return table;
}

void apply_config_file(const std::string& path, KeyTable& table) {
    std::ifstream file(path);
    if (!file) throw UsageError("cannot read config file: " + path);
    ordered_json config;
    try {
        file >> config;
    } catch (const ordered_json::parse_error& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    if (!config.is_object()) {
        throw UsageError("config file must hold a flat JSON object");
    }
    for (const auto& [key, value] : config.items()) {
        if (key == "config") {
            throw UsageError("config files cannot nest 'config'");
        }
        const auto entry = table.find(key);
        if (entry == table.end()) {
            throw UsageError("unknown config key: " + key);
        }
        try {
            entry->second(value);
        } catch (const UsageError& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        } catch (const ordered_json::exception&) {
            throw UsageError("config key '" + key + "': bad value");
        }
    }
}

// The config file must be applied before CLI11 parses, so explicit flags
// override file values; the subcommand name and --config are scanned by
// hand. All flags are subcommand-level, so the subcommand is args[0].
std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a value");
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) {
            return args[i].substr(std::string("--config=").size());
        }
    }
    return std::nullopt;
}

void add_common_flags(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--seed", common.seed, "Master seed for all randomness");
    cmd->add_option("--output", common.output, "Write the report to this file");
    cmd->add_option("--format", common.format, "Report format: csv or json");
    cmd->add_option("--config", common.config_path,
                    "JSON file of flag defaults (kebab-case keys)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SimHash-bucketed sparse attention: benchmarks and validators"};
    app.require_subcommand(1);

    BenchOptions bench_options;
    SweepOptions sweep_options;
    CollideProbOptions collide_options;
    DemoForwardOptions demo_options;
    demo_options.common.format = "json";

    auto* bench = app.add_subcommand(
        "bench", "Compare full and hashed attention kernels on Gaussian inputs");
    add_common_flags(bench, bench_options.common);
    bench->add_option("--batch", bench_options.batch, "Batch size");
    bench->add_option("--heads", bench_options.heads, "Attention heads");
    bench->add_option("--seq-len", bench_options.seq_len, "Sequence length");
    bench->add_option("--head-dim", bench_options.head_dim, "Per-head vector width");
    bench->add_option("--bands", bench_options.bands, "Hyperplanes per hash function");
    bench->add_option("--table-size", bench_options.table_size, "Bucket count");
    bench->add_option("--num-hash-fns", bench_options.num_hash_fns,
                      "Independent hash functions");
    bench->add_option("--samples", bench_options.samples,
                      "Hashings averaged for the dot-product column");
    bench->add_option("--runs", bench_options.runs,
                      "Timed repetitions per mode (0 skips timing)");

    auto* sweep = app.add_subcommand(
        "sweep", "Model-KFLOPs grid over hash-scheme parameters");
    add_common_flags(sweep, sweep_options.common);
    sweep->add_option("--bands-list", sweep_options.bands_list,
                      "Comma-separated band counts");
    sweep->add_option("--hashfns-list", sweep_options.hashfns_list,
                      "Comma-separated hash-function counts");
    sweep->add_option("--tablesize-list", sweep_options.tablesize_list,
                      "Comma-separated bucket counts");
    sweep->add_option("--batch", sweep_options.batch, "Batch size");
    sweep->add_option("--heads", sweep_options.heads, "Attention heads");
    sweep->add_option("--seq-len", sweep_options.seq_len, "Sequence length");
    sweep->add_option("--head-dim", sweep_options.head_dim, "Per-head vector width");
    sweep->add_option("--collided-pairs", sweep_options.collided_pairs,
                      "Pin the collided-pair count instead of measuring it");
    sweep->add_option("--samples", sweep_options.samples,
                      "Hashings averaged per grid point when measuring");
    sweep->add_option("--runs", sweep_options.runs,
                      "Timed repetitions per grid point (0 skips timing)");

    auto* collide = app.add_subcommand(
        "collide-prob", "Analytic vs Monte Carlo hash collision probability");
    add_common_flags(collide, collide_options.common);
    collide->add_option("--theta-list", collide_options.theta_list,
                        "Comma-separated angles in radians, within [0, pi]");
    collide->add_option("--bands", collide_options.bands,
                        "Hyperplanes per hash function");
    collide->add_option("--table-size", collide_options.table_size, "Bucket count");
    collide->add_option("--num-hash-fns", collide_options.num_hash_fns,
                        "Independent hash functions");
    collide->add_option("--dim", collide_options.dim, "Vector dimension");
    collide->add_option("--trials", collide_options.trials, "Monte Carlo trials");

    auto* demo = app.add_subcommand(
        "demo-forward", "Run the small encoder once per attention mode");
    add_common_flags(demo, demo_options.common);
    demo->add_option("--seq-len", demo_options.seq_len, "Random token count");
    demo->add_option("--hidden-size", demo_options.hidden_size, "Model width");
    demo->add_option("--num-layers", demo_options.num_layers, "Encoder layers");
    demo->add_option("--num-heads", demo_options.num_heads, "Attention heads");
    demo->add_option("--intermediate-size", demo_options.intermediate_size,
                     "Feed-forward width");
    demo->add_option("--vocab-size", demo_options.vocab_size, "Token id range");
    demo->add_option("--max-seq-len", demo_options.max_seq_len,
                     "Positional embedding count");
    demo->add_option("--bands", demo_options.bands, "Hyperplanes per hash function");
    demo->add_option("--table-size", demo_options.table_size, "Bucket count");
    demo->add_option("--num-hash-fns", demo_options.num_hash_fns,
                     "Independent hash functions");

    try {
        const auto config_path = find_config_path(args);
        if (config_path.has_value()) {
            const std::string sub = args.empty() ? "" : args.front();
            KeyTable table;
            if (sub == "bench") {
                table = config_keys(bench_options);
            } else if (sub == "sweep") {
                table = config_keys(sweep_options);
            } else if (sub == "collide-prob") {
                table = config_keys(collide_options);
            } else if (sub == "demo-forward") {
                table = config_keys(demo_options);
            } else {
                throw UsageError("--config requires a leading subcommand");
            }
            apply_config_file(*config_path, table);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    const CommonOptions* common = nullptr;
    std::function<int(std::ostream&)> body;
    if (bench->parsed()) {
        common = &bench_options.common;
        body = [&](std::ostream& report) { return cmd_bench(bench_options, report, err); };
    } else if (sweep->parsed()) {
        common = &sweep_options.common;
        body = [&](std::ostream& report) { return cmd_sweep(sweep_options, report, err); };
    } else if (collide->parsed()) {
        common = &collide_options.common;
        body = [&](std::ostream& report) {
            return cmd_collide_prob(collide_options, report, err);
        };
    } else {
        common = &demo_options.common;
        body = [&](std::ostream& report) {
            return cmd_demo_forward(demo_options, report, err);
        };
    }

    if (!common->output.empty()) {
        std::ofstream file(common->output);
        if (!file) {
            err << "error: cannot open output file: " << common->output << '\n';
            return 1;
        }
        return body(file);
    }
    return body(out);
}

}  // namespace lshattn::cli
