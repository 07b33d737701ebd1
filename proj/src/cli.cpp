#include "lait/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lait/cost.hpp"
#include "lait/fsio.hpp"
#include "lait/jsonl.hpp"
#include "lait/task.hpp"
#include "lait/train.hpp"
#include "lait/verify.hpp"

using nlohmann::json;

namespace lait {

namespace {

// ---- shared flag plumbing --------------------------------------------------

struct ModelFlags {
    uint32_t layers = 12;
    uint32_t parallel = 0;
    uint32_t d_model = 64;
    uint32_t heads = 4;
    uint32_t d_ff = 256;
    uint32_t vocab = 4096;
    std::string pos = "relative-bucket";
    uint32_t rel_buckets = 32;
    uint32_t rel_max_distance = 128;
    std::string precision = "f32";
    uint64_t seed = 7;
    std::string config_path;

    ModelConfig to_config() const {
        ModelConfig cfg;
        cfg.layers = layers;
        cfg.parallel = parallel;
        cfg.d_model = d_model;
        cfg.n_heads = heads;
        if (heads == 0 || d_model % heads != 0)
            throw ConfigError("--d-model must be divisible by --heads");
        cfg.d_head = d_model / heads;
        cfg.d_ff = d_ff;
        cfg.vocab_size = vocab;
        cfg.pos_scheme = pos_scheme_from_string(pos);
        cfg.rel_buckets = rel_buckets;
        cfg.rel_max_distance = rel_max_distance;
        cfg.validate();
        return cfg;
    }
};

// JSON config file mirroring the long flag names; command-line flags win.
json load_config_json(const std::vector<std::string>& args) {
    for (size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") {
            json j = json::parse(read_file_text(args[i + 1]));
            if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
            return j;
        }
    return json::object();
}

template <typename T>
void seed_default(const json& cfg, const char* key, T& value) {
    if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

void add_model_flags(CLI::App* cmd, ModelFlags& mf, const json& cfg) {
    seed_default(cfg, "layers", mf.layers);
    seed_default(cfg, "p", mf.parallel);
    seed_default(cfg, "d-model", mf.d_model);
    seed_default(cfg, "heads", mf.heads);
    seed_default(cfg, "d-ff", mf.d_ff);
    seed_default(cfg, "vocab", mf.vocab);
    seed_default(cfg, "pos", mf.pos);
    seed_default(cfg, "precision", mf.precision);
    seed_default(cfg, "seed", mf.seed);
    cmd->add_option("--layers", mf.layers, "encoder layers L");
    cmd->add_option("--p", mf.parallel, "parallel layers P, 0 <= P <= L");
    cmd->add_option("--d-model", mf.d_model, "embedding width");
    cmd->add_option("--heads", mf.heads, "attention heads (d_head = d_model / heads)");
    cmd->add_option("--d-ff", mf.d_ff, "feed-forward width");
    cmd->add_option("--vocab", mf.vocab, "vocabulary size");
    cmd->add_option("--pos", mf.pos, "position scheme")
        ->check(CLI::IsMember({"none", "sinusoidal-local", "relative-bucket"}));
    seed_default(cfg, "rel-buckets", mf.rel_buckets);
    seed_default(cfg, "rel-max-distance", mf.rel_max_distance);
    cmd->add_option("--rel-buckets", mf.rel_buckets, "relative-bias buckets");
    cmd->add_option("--rel-max-distance", mf.rel_max_distance, "relative-bias clip distance");
    cmd->add_option("--precision", mf.precision, "working precision")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("--seed", mf.seed, "deterministic seed");
    cmd->add_option("--config", mf.config_path, "JSON config file mirroring these flags");
}

uint64_t flags_digest(const json& resolved) {
    return fnv1a64(resolved.dump());
}

void write_manifest(const std::string& artifact_path, const std::string& command,
                    const json& resolved_flags, uint64_t seed) {
    json manifest;
    manifest["command"] = command;
    manifest["flags"] = resolved_flags;
    manifest["config_digest"] = digest_hex(flags_digest(resolved_flags));
    manifest["seed"] = seed;
    manifest["version"] = kToolVersion;
    atomic_write_text(artifact_path + ".manifest.json", manifest.dump(2) + "\n");
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    atomic_write_text(path, text);
}

struct Timing {
    double median_ms = 0;
    double std_ms = 0;
    std::vector<double> reps_ms;
};

Timing summarize(std::vector<double> reps) {
    Timing t;
    t.reps_ms = reps;
    std::sort(reps.begin(), reps.end());
    const size_t n = reps.size();
    t.median_ms = n % 2 ? reps[n / 2] : 0.5 * (reps[n / 2 - 1] + reps[n / 2]);
    double mean = 0;
    for (double v : reps) mean += v;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double v : reps) var += (v - mean) * (v - mean);
    t.std_ms = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    return t;
}

json timing_json(const Timing& t) {
    return json{{"median_ms", t.median_ms}, {"std_ms", t.std_ms}, {"reps_ms", t.reps_ms}};
}

// Encodes every example once, optionally through a cache, over N workers
// pulling from a shared queue. Returns measured attention ops.
struct WorkloadRun {
    uint64_t ops = 0;
    uint64_t hits = 0;
    uint64_t misses = 0;
    double wall_ms = 0;
};

WorkloadRun run_workload(const std::vector<SegmentedExample>& examples,
                         const ModelWeights<float>& weights, const ModelConfig& cfg,
                         RepCache<float>* cache, unsigned workers) {
    WorkloadRun result;
    std::atomic<size_t> next{0};
    std::atomic<uint64_t> ops{0}, hits{0}, misses{0};
    const auto started = std::chrono::steady_clock::now();
    auto worker = [&] {
        uint64_t local_ops = 0;
        EncodeStats stats;
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= examples.size()) break;
            lait_encode(examples[i], weights, cfg, cache, &local_ops, &stats);
        }
        ops += local_ops;
        hits += stats.cache_hits;
        misses += stats.cache_misses;
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    const auto finished = std::chrono::steady_clock::now();
    result.wall_ms = std::chrono::duration<double, std::milli>(finished - started).count();
    result.ops = ops.load();
    result.hits = hits.load();
    result.misses = misses.load();
    return result;
}

// ---- subcommand payloads ---------------------------------------------------

int cmd_verify(uint64_t seed) {
    auto results = run_verification(seed);
    for (const auto& r : results)
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name
                  << (r.detail.empty() ? "" : " — " + r.detail) << "\n";
    return all_passed(results) ? 0 : 1;
}

int cmd_cost(const ModelFlags& mf, const std::string& lengths_path, bool sweep,
             const std::string& output, const json& flags) {
    json resolved = flags;
    resolved["lengths"] = lengths_path;
    resolved["sweep-p"] = sweep;
    const auto records = read_length_records_jsonl(lengths_path);
    ModelConfig cfg = mf.to_config();
    const bool have_digests = std::all_of(records.begin(), records.end(), [](const auto& r) {
        return !r.segment_digests.empty();
    });

    std::ostringstream csv;
    csv << "P,ops_total,flops,ratio_full,ratio_cached\n";
    const uint32_t p_lo = sweep ? 0 : mf.parallel;
    const uint32_t p_hi = sweep ? mf.layers : mf.parallel;
    for (uint32_t p = p_lo; p <= p_hi; ++p) {
        DatasetCost full = dataset_ops(records, mf.layers, p);
        csv << p << "," << full.ops_total << "," << ops_to_flops(full.ops_total, cfg) << ","
            << full.ratio << ",";
        if (have_digests) csv << cached_dataset_ops(records, mf.layers, p).ratio;
        csv << "\n";
    }
    write_output(output, csv.str());
    if (output != "-") write_manifest(output, "cost", resolved, mf.seed);
    return 0;
}

std::vector<std::vector<uint32_t>> synth_segments(size_t count, size_t len, uint32_t vocab,
                                                  Rng& rng) {
    std::vector<std::vector<uint32_t>> out(count);
    for (auto& seg : out) {
        seg.resize(len);
        for (auto& t : seg)
            t = kReservedIds + static_cast<uint32_t>(rng.below(vocab - kReservedIds));
    }
    return out;
}

int cmd_bench_cartesian(const ModelFlags& mf, const std::string& left_spec,
                        const std::string& right_spec, bool use_cache, uint64_t budget,
                        const std::string& cache_dir, bool paranoid, unsigned reps,
                        unsigned workers, const std::string& output, const json& flags) {
    json resolved = flags;
    resolved["left"] = left_spec;
    resolved["right"] = right_spec;
    resolved["cache"] = use_cache;
    resolved["cache-budget-bytes"] = budget;
    resolved["cache-dir"] = cache_dir;
    resolved["cache-paranoid"] = paranoid;
    resolved["reps"] = reps;
    resolved["workers"] = workers;
    auto parse_axis = [](const std::string& s) {
        const size_t x = s.find('x');
        if (x == std::string::npos || x == 0 || x + 1 == s.size())
            throw ConfigError("expected COUNTxLENGTH, got: " + s);
        return std::pair<size_t, size_t>{std::stoull(s.substr(0, x)),
                                         std::stoull(s.substr(x + 1))};
    };
    const auto [n_left, len_left] = parse_axis(left_spec);
    const auto [n_right, len_right] = parse_axis(right_spec);
    ModelConfig cfg = mf.to_config();

    Rng rng(mf.seed);
    const auto left = synth_segments(n_left, len_left, cfg.vocab_size, rng);
    const auto right = synth_segments(n_right, len_right, cfg.vocab_size, rng);

    std::vector<SegmentedExample> examples;
    std::vector<LengthRecord> records;
    examples.reserve(n_left * n_right);
    for (size_t i = 0; i < n_left; ++i)
        for (size_t j = 0; j < n_right; ++j) {
            SegmentedExample ex;
            ex.task_id = "raw";
            ex.segments = {left[i], right[j]};
            examples.push_back(std::move(ex));
            records.push_back(LengthRecord{{len_left, len_right},
                                           1,
                                           {token_digest(left[i]), token_digest(right[j])}});
        }

    ModelWeights<float> weights = init_weights<float>(cfg, mf.seed);
    const DatasetCost analytic_full = dataset_ops(records, cfg.layers, cfg.parallel);
    const DatasetCost analytic_cached = cached_dataset_ops(records, cfg.layers, cfg.parallel);

    std::vector<double> uncached_ms, cached_ms;
    WorkloadRun uncached{}, cached{};
    for (unsigned r = 0; r < reps; ++r) {
        uncached = run_workload(examples, weights, cfg, nullptr, workers);
        uncached_ms.push_back(uncached.wall_ms);
        if (use_cache) {
            RepCache<float> cache(budget, cache_dir, paranoid);  // cold cache per repetition
            cached = run_workload(examples, weights, cfg, &cache, workers);
            cached_ms.push_back(cached.wall_ms);
        }
    }

    json report;
    report["workload"] = {{"left", left_spec},
                          {"right", right_spec},
                          {"examples", examples.size()},
                          {"layers", cfg.layers},
                          {"p", cfg.parallel}};
    report["analytic"] = {{"uncached_ops", analytic_full.ops_total},
                          {"cached_ops", analytic_cached.ops_total},
                          {"baseline_ops", analytic_full.baseline_ops},
                          {"ratio_vs_p0", analytic_full.ratio},
                          {"cached_over_uncached",
                           static_cast<double>(analytic_cached.ops_total) /
                               static_cast<double>(analytic_full.ops_total)}};
    report["measured"]["uncached"] = {{"ops", uncached.ops}};
    report["measured"]["uncached"]["timing"] = timing_json(summarize(uncached_ms));
    if (use_cache) {
        report["measured"]["cached"] = {{"ops", cached.ops},
                                        {"hits", cached.hits},
                                        {"misses", cached.misses}};
        report["measured"]["cached"]["timing"] = timing_json(summarize(cached_ms));
        report["measured"]["cached_over_uncached_ops"] =
            static_cast<double>(cached.ops) / static_cast<double>(uncached.ops);
        report["measured"]["speedup_median"] =
            summarize(uncached_ms).median_ms / summarize(cached_ms).median_ms;
    }
    write_output(output, report.dump(2) + "\n");
    if (output != "-") write_manifest(output, "bench cartesian", resolved, mf.seed);
    return 0;
}

int cmd_bench_replay(const ModelFlags& mf, const std::string& input, uint64_t budget,
                     const std::string& cache_dir, bool paranoid, unsigned reps, unsigned workers,
                     const std::string& output, const json& flags) {
    json resolved = flags;
    resolved["input"] = input;
    resolved["cache-budget-bytes"] = budget;
    resolved["cache-dir"] = cache_dir;
    resolved["cache-paranoid"] = paranoid;
    resolved["reps"] = reps;
    resolved["workers"] = workers;
    ModelConfig cfg = mf.to_config();
    const auto examples = read_examples_jsonl(input, cfg);
    ModelWeights<float> weights = init_weights<float>(cfg, mf.seed);

    std::vector<double> uncached_ms, cached_ms;
    WorkloadRun uncached{}, cached{};
    for (unsigned r = 0; r < reps; ++r) {
        uncached = run_workload(examples, weights, cfg, nullptr, workers);
        uncached_ms.push_back(uncached.wall_ms);
        RepCache<float> cache(budget, cache_dir, paranoid);
        cached = run_workload(examples, weights, cfg, &cache, workers);
        cached_ms.push_back(cached.wall_ms);
    }

    json report;
    report["workload"] = {{"input", input}, {"examples", examples.size()},
                          {"layers", cfg.layers}, {"p", cfg.parallel},
                          {"cache_budget_bytes", budget}};
    report["measured"]["uncached"] = {{"ops", uncached.ops}};
    report["measured"]["uncached"]["timing"] = timing_json(summarize(uncached_ms));
    report["measured"]["cached"] = {
        {"ops", cached.ops},
        {"hits", cached.hits},
        {"misses", cached.misses},
        {"hit_rate", cached.hits + cached.misses
                         ? static_cast<double>(cached.hits) /
                               static_cast<double>(cached.hits + cached.misses)
                         : 0.0}};
    report["measured"]["cached"]["timing"] = timing_json(summarize(cached_ms));
    report["measured"]["cached_over_uncached_ops"] =
        uncached.ops ? static_cast<double>(cached.ops) / static_cast<double>(uncached.ops) : 1.0;
    write_output(output, report.dump(2) + "\n");
    if (output != "-") write_manifest(output, "bench replay", resolved, mf.seed);
    return 0;
}

int cmd_train(const ModelFlags& mf, const std::string& task, uint32_t seq_len, uint32_t n_train,
              uint32_t n_eval, uint64_t steps, double lr, uint32_t batch, uint64_t eval_every,
              const std::string& output, const std::string& save_weights, const json& flags) {
    json resolved = flags;
    resolved["task"] = task;
    resolved["seq-len"] = seq_len;
    resolved["n-train"] = n_train;
    resolved["n-eval"] = n_eval;
    resolved["steps"] = steps;
    resolved["lr"] = lr;
    resolved["batch"] = batch;
    resolved["eval-every"] = eval_every;
    ModelConfig cfg = mf.to_config();
    SyntheticTaskSpec spec;
    spec.kind = task == "shared_token" ? SyntheticTaskSpec::Kind::shared_token
                                       : SyntheticTaskSpec::Kind::copy_vs_shuffle;
    spec.seq_len = seq_len;
    spec.vocab = cfg.vocab_size;
    spec.n_train = n_train;
    spec.n_eval = n_eval;
    spec.seed = mf.seed;

    TrainOptions opt;
    opt.steps = steps;
    opt.lr = lr;
    opt.batch_size = batch;
    opt.eval_every = eval_every;
    opt.seed = mf.seed;

    if (mf.precision == "f64")
        std::cerr << "note: training in f64; this is meant for verification, not speed\n";

    TrainMetrics metrics;
    if (mf.precision == "f64") {
        ModelWeights<double> trained;
        metrics = train<double>(spec, cfg, opt, save_weights.empty() ? nullptr : &trained);
        if (!save_weights.empty()) atomic_write_bytes(save_weights, serialize_weights(trained));
    } else {
        ModelWeights<float> trained;
        metrics = train<float>(spec, cfg, opt, save_weights.empty() ? nullptr : &trained);
        if (!save_weights.empty()) atomic_write_bytes(save_weights, serialize_weights(trained));
    }

    std::ostringstream csv;
    csv << "step,loss,eval_accuracy\n";
    for (const auto& p : metrics.curve)
        csv << p.step << "," << p.loss << "," << p.eval_accuracy << "\n";
    write_output(output, csv.str());
    if (output != "-") write_manifest(output, "train", resolved, mf.seed);
    if (!save_weights.empty()) write_manifest(save_weights, "train --save-weights", resolved, mf.seed);
    std::cout << "final eval accuracy " << metrics.final_accuracy << ", best "
              << metrics.best_accuracy << "\n";
    return 0;
}

template <typename T>
int encode_with_precision(const ModelFlags& mf, const ModelConfig& cfg,
                          const std::vector<SegmentedExample>& examples,
                          ModelWeights<T> weights, RepCache<T>* cache, const std::string& output,
                          const json& resolved) {
    std::ostringstream out;
    uint64_t total_ops = 0;
    for (size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        uint64_t ops = 0;
        EncodeStats stats;
        Matrix<T> reps = lait_encode(ex, weights, cfg, cache, &ops, &stats);
        total_ops += ops;

        json line;
        line["index"] = i;
        line["task"] = ex.task_id;
        json lens = json::array();
        for (size_t l : segment_lengths(ex)) lens.push_back(l);
        line["lengths"] = lens;
        line["m"] = ex.total_tokens();
        line["ops"] = ops;
        if (cache) {
            line["cache_hits"] = stats.cache_hits;
            line["cache_misses"] = stats.cache_misses;
        }
        if (ex.label) line["label"] = *ex.label;
        if (weights.head.n_labels()) {
            auto [pred, scores] = classify(reps, weights.head);
            const auto& tasks = builtin_tasks();
            auto it = tasks.find(ex.task_id);
            if (it != tasks.end() && it->second.labels.size() == weights.head.n_labels())
                line["pred"] = it->second.labels[pred];
            else
                line["pred_index"] = pred;
            json sc = json::array();
            for (T s : scores) sc.push_back(static_cast<double>(s));
            line["scores"] = sc;
        }
        out << line.dump() << "\n";
    }
    write_output(output, out.str());
    if (output != "-") write_manifest(output, "encode", resolved, mf.seed);
    std::cerr << "encoded " << examples.size() << " examples, " << total_ops
              << " attention ops\n";
    return 0;
}

int cmd_encode(const ModelFlags& mf, const std::string& input, const std::string& weights_path,
               const std::string& cache_dir, uint64_t budget, bool paranoid,
               const std::string& output, const json& flags) {
    json resolved = flags;
    resolved["input"] = input;
    resolved["weights"] = weights_path;
    resolved["cache-dir"] = cache_dir;
    resolved["cache-budget-bytes"] = budget;
    resolved["cache-paranoid"] = paranoid;
    ModelConfig cfg = mf.to_config();
    const auto examples = read_examples_jsonl(input, cfg);

    if (mf.precision == "f64") {
        if (!cache_dir.empty())
            throw ConfigError("--cache-dir stores 32-bit entries; use --precision f32");
        ModelWeights<double> weights =
            weights_path.empty() ? init_weights<double>(cfg, mf.seed)
                                 : parse_weights<double>(read_file_bytes(weights_path));
        if (!weights_path.empty() && !weights.config.weights_compatible(cfg))
            throw ConfigError("weights file does not match the requested architecture");
        return encode_with_precision<double>(mf, cfg, examples, std::move(weights), nullptr,
                                             output, resolved);
    }
    ModelWeights<float> weights = weights_path.empty()
                                      ? init_weights<float>(cfg, mf.seed)
                                      : parse_weights<float>(read_file_bytes(weights_path));
    if (!weights_path.empty() && !weights.config.weights_compatible(cfg))
        throw ConfigError("weights file does not match the requested architecture");
    if (!cache_dir.empty() || budget > 0) {
        RepCache<float> cache(budget ? budget : (256u << 20), cache_dir, paranoid);
        return encode_with_precision<float>(mf, cfg, examples, std::move(weights), &cache,
                                            output, resolved);
    }
    return encode_with_precision<float>(mf, cfg, examples, std::move(weights), nullptr, output,
                                        resolved);
}

int cmd_stats(const ModelFlags& mf, const std::string& input, const std::string& output,
              const std::string& emit_lengths, const json& flags) {
    json resolved = flags;
    resolved["input"] = input;
    resolved["emit-lengths"] = emit_lengths;
    ModelConfig cfg = mf.to_config();
    const auto examples = read_examples_jsonl(input, cfg);

    struct SlotStat {
        uint64_t count = 0;
        uint64_t tokens = 0;
    };
    std::map<std::pair<std::string, size_t>, SlotStat> stats;
    for (const auto& ex : examples)
        for (size_t s = 0; s < ex.segments.size(); ++s) {
            auto& st = stats[{ex.task_id, s}];
            st.count++;
            st.tokens += ex.segments[s].size();
        }

    std::ostringstream csv;
    csv << "task,slot,count,avg_tokens\n";
    for (const auto& [key, st] : stats)
        csv << key.first << "," << key.second << "," << st.count << ","
            << static_cast<double>(st.tokens) / static_cast<double>(st.count) << "\n";
    write_output(output, csv.str());
    if (output != "-") write_manifest(output, "stats", resolved, mf.seed);

    if (!emit_lengths.empty()) {
        std::ostringstream jsonl;
        for (const auto& ex : examples) {
            json rec;
            json lens = json::array(), digs = json::array();
            for (const auto& seg : ex.segments) {
                lens.push_back(seg.size());
                digs.push_back(digest_hex(token_digest(seg)));
            }
            rec["lengths"] = lens;
            rec["mult"] = 1;
            rec["digests"] = digs;
            jsonl << rec.dump() << "\n";
        }
        atomic_write_text(emit_lengths, jsonl.str());
        write_manifest(emit_lengths, "stats --emit-lengths", resolved, mf.seed);
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    try {
        const json cfgjson = load_config_json(args);

        CLI::App app{"LAIT encoder: layer-adjustable interactions with segment caching"};
        app.require_subcommand(1);

        ModelFlags mf;

        // verify
        auto* verify = app.add_subcommand("verify", "run the structural invariant suite");
        uint64_t verify_seed = 7;
        verify->add_option("--seed", verify_seed, "suite seed");

        // cost
        auto* cost = app.add_subcommand("cost", "analytic attention-op / FLOP accounting");
        std::string lengths_path, cost_output = "-";
        bool sweep = false;
        add_model_flags(cost, mf, cfgjson);
        cost->add_option("--lengths", lengths_path, "length records JSONL")->required();
        cost->add_flag("--sweep-p", sweep, "emit one CSV row per P in [0, L]");
        cost->add_option("--output", cost_output, "CSV path, or - for stdout");

        // bench
        auto* bench = app.add_subcommand("bench", "workload benchmarks");
        bench->require_subcommand(1);
        auto* cartesian = bench->add_subcommand("cartesian", "left x right segment pairings");
        std::string left_spec = "17x16", right_spec = "100x31";
        bool use_cache = false, cache_paranoid = false;
        uint64_t budget = 256u << 20;
        std::string cache_dir;
        unsigned reps = 5, workers = 1;
        std::string bench_output = "-";
        add_model_flags(cartesian, mf, cfgjson);
        cartesian->add_option("--left", left_spec, "COUNTxLENGTH for the left segment set");
        cartesian->add_option("--right", right_spec, "COUNTxLENGTH for the right segment set");
        cartesian->add_flag("--cache", use_cache, "also run with a representation cache");
        cartesian->add_option("--cache-budget-bytes", budget, "cache byte budget");
        cartesian->add_option("--cache-dir", cache_dir, "persist cache entries here");
        cartesian->add_flag("--cache-paranoid", cache_paranoid,
                            "verify token ids on cache hits instead of trusting digests");
        cartesian->add_option("--reps", reps, "timing repetitions")->check(CLI::Range(1u, 100u));
        cartesian->add_option("--workers", workers, "concurrent encode workers");
        cartesian->add_option("--output", bench_output, "report JSON path, or -");

        auto* replay = bench->add_subcommand("replay", "sequential corpus replay with a cache");
        std::string replay_input, replay_output = "-";
        add_model_flags(replay, mf, cfgjson);
        replay->add_option("--input", replay_input, "examples JSONL")->required();
        replay->add_option("--cache-budget-bytes", budget, "cache byte budget");
        replay->add_option("--cache-dir", cache_dir, "persist cache entries here");
        replay->add_flag("--cache-paranoid", cache_paranoid,
                         "verify token ids on cache hits instead of trusting digests");
        replay->add_option("--reps", reps, "timing repetitions")->check(CLI::Range(1u, 100u));
        replay->add_option("--workers", workers, "concurrent encode workers");
        replay->add_option("--output", replay_output, "report JSON path, or -");

        // train
        auto* train_cmd = app.add_subcommand("train", "synthetic-task training run");
        std::string task = "copy_vs_shuffle", train_output = "-", save_weights;
        uint32_t seq_len = 8, n_train = 4096, n_eval = 1024, batch = 32;
        uint64_t steps = 3000, eval_every = 250;
        double lr = 1e-3;
        add_model_flags(train_cmd, mf, cfgjson);
        train_cmd->add_option("--task", task, "synthetic task")
            ->check(CLI::IsMember({"copy_vs_shuffle", "shared_token"}));
        train_cmd->add_option("--seq-len", seq_len, "tokens per segment");
        train_cmd->add_option("--n-train", n_train, "training examples");
        train_cmd->add_option("--n-eval", n_eval, "eval examples");
        train_cmd->add_option("--steps", steps, "optimizer steps");
        train_cmd->add_option("--lr", lr, "Adam learning rate");
        train_cmd->add_option("--batch", batch, "minibatch size");
        train_cmd->add_option("--eval-every", eval_every, "steps between eval checkpoints");
        train_cmd->add_option("--output", train_output, "metrics CSV path, or -");
        train_cmd->add_option("--save-weights", save_weights, "write trained weights here");

        // encode
        auto* encode = app.add_subcommand("encode", "encode a JSONL corpus");
        std::string encode_input, weights_path, encode_output = "-";
        uint64_t encode_budget = 0;
        std::string encode_cache_dir;
        bool encode_paranoid = false;
        add_model_flags(encode, mf, cfgjson);
        encode->add_option("--input", encode_input, "examples JSONL")->required();
        encode->add_option("--weights", weights_path, "weights file (default: seeded init)");
        encode->add_option("--cache-dir", encode_cache_dir, "persist cache entries here");
        encode->add_option("--cache-budget-bytes", encode_budget, "enable cache with this budget");
        encode->add_flag("--cache-paranoid", encode_paranoid,
                         "verify token ids on cache hits instead of trusting digests");
        encode->add_option("--output", encode_output, "output JSONL path, or -");

        // stats
        auto* stats = app.add_subcommand("stats", "per-task segment length statistics");
        std::string stats_input, stats_output = "-", emit_lengths;
        add_model_flags(stats, mf, cfgjson);
        stats->add_option("--input", stats_input, "examples JSONL")->required();
        stats->add_option("--output", stats_output, "CSV path, or -");
        stats->add_option("--emit-lengths", emit_lengths,
                          "also write cost-model length records here");

        std::vector<std::string> argv(args);
        std::reverse(argv.begin(), argv.end());  // CLI11 parses reversed
        try {
            app.parse(argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        json resolved;
        resolved["layers"] = mf.layers;
        resolved["p"] = mf.parallel;
        resolved["d-model"] = mf.d_model;
        resolved["heads"] = mf.heads;
        resolved["d-ff"] = mf.d_ff;
        resolved["vocab"] = mf.vocab;
        resolved["pos"] = mf.pos;
        resolved["rel-buckets"] = mf.rel_buckets;
        resolved["rel-max-distance"] = mf.rel_max_distance;
        resolved["precision"] = mf.precision;
        resolved["seed"] = mf.seed;

        if (verify->parsed()) return cmd_verify(verify_seed);
        if (cost->parsed()) return cmd_cost(mf, lengths_path, sweep, cost_output, resolved);
        if (cartesian->parsed())
            return cmd_bench_cartesian(mf, left_spec, right_spec, use_cache, budget, cache_dir,
                                       cache_paranoid, reps, workers, bench_output, resolved);
        if (replay->parsed())
            return cmd_bench_replay(mf, replay_input, budget, cache_dir, cache_paranoid, reps,
                                    workers, replay_output, resolved);
        if (train_cmd->parsed())
            return cmd_train(mf, task, seq_len, n_train, n_eval, steps, lr, batch, eval_every,
                             train_output, save_weights, resolved);
        if (encode->parsed())
            return cmd_encode(mf, encode_input, weights_path, encode_cache_dir, encode_budget,
                              encode_paranoid, encode_output, resolved);
        if (stats->parsed()) return cmd_stats(mf, stats_input, stats_output, emit_lengths, resolved);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lait
