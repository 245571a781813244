#include "pedgnn/clipio.hpp"
#include "pedgnn/config.hpp"
#include "pedgnn/eval.hpp"
#include "pedgnn/model.hpp"
#include "pedgnn/synthgen.hpp"
#include "pedgnn/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pedgnn;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;
constexpr int kExitRunError = 1;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = "out";
};

KvConfig load_config(const CommonArgs& args) {
    KvConfig cfg;
    if (!args.config_path.empty()) cfg = KvConfig::from_file(args.config_path);
    for (const auto& o : args.overrides) cfg.apply_override(o);
    if (args.seed_set) cfg.apply_override("seed=" + std::to_string(args.seed));
    return cfg;
}

void echo_config(const KvConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/effective_config.txt");
    out << cfg.echo();
}

PedGnnConfig model_config_from(const KvConfig& cfg) {
    PedGnnConfig mc;
    mc.n_frames = static_cast<int>(cfg.get_int("model.n_frames", mc.n_frames));
    mc.hidden_channels =
        static_cast<int>(cfg.get_int("model.hidden_channels", mc.hidden_channels));
    mc.cheb_order = static_cast<int>(cfg.get_int("model.cheb_order", mc.cheb_order));
    const auto dims = cfg.get_int_list("model.fc_dims", {32, 16, 2});
    if (dims.size() != 3 || dims[2] != 2) {
        throw std::runtime_error("model.fc_dims must be three values ending in 2");
    }
    mc.fc_dims = {dims[0], dims[1], dims[2]};
    mc.dropout_rate = cfg.get_double("model.dropout_rate", mc.dropout_rate);
    return mc;
}

GeneratorConfig generator_config_from(const KvConfig& cfg) {
    GeneratorConfig gc;
    gc.clip_count = static_cast<int>(cfg.get_int("data.clip_count", gc.clip_count));
    gc.clip_duration_s = cfg.get_double("data.clip_duration_s", gc.clip_duration_s);
    gc.fps = cfg.get_double("data.fps", gc.fps);
    gc.width = static_cast<int>(cfg.get_int("data.width", gc.width));
    gc.height = static_cast<int>(cfg.get_int("data.height", gc.height));
    gc.speed_min = cfg.get_double("data.speed_min", gc.speed_min);
    gc.speed_max = cfg.get_double("data.speed_max", gc.speed_max);
    gc.body_scale_min = cfg.get_double("data.body_scale_min", gc.body_scale_min);
    gc.body_scale_max = cfg.get_double("data.body_scale_max", gc.body_scale_max);
    gc.noise.jitter_sigma_px =
        cfg.get_double("data.noise.jitter_sigma_px", gc.noise.jitter_sigma_px);
    gc.noise.dropout_prob =
        cfg.get_double("data.noise.dropout_prob", gc.noise.dropout_prob);
    gc.retry_limit = static_cast<int>(cfg.get_int("data.retry_limit", gc.retry_limit));
    gc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    if (cfg.has("data.scenario_mix")) {
        gc.scenario_mix.clear();
        for (const auto& name : cfg.get_list("data.scenario_mix")) {
            gc.scenario_mix.push_back(scenario_kind_from_name(name));
        }
    }
    return gc;
}

std::vector<std::pair<std::string, std::vector<ClipRecord>>> load_train_datasets(
    const KvConfig& cfg) {
    const auto paths = cfg.get_list("data.train");
    if (paths.empty()) throw std::runtime_error("data.train must list >= 1 clip stream");
    std::vector<std::pair<std::string, std::vector<ClipRecord>>> datasets;
    for (const auto& p : paths) {
        datasets.emplace_back(fs::path(p).stem().string(), read_clip_stream_file(p));
    }
    return datasets;
}

int cmd_generate(const CommonArgs& args) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed", "data.clip_count", "data.clip_duration_s",
                            "data.fps", "data.width", "data.height", "data.speed_min",
                            "data.speed_max", "data.body_scale_min",
                            "data.body_scale_max", "data.noise.jitter_sigma_px",
                            "data.noise.dropout_prob", "data.retry_limit",
                            "data.scenario_mix"});
    const GeneratorConfig gc = generator_config_from(cfg);
    echo_config(cfg, args.out_dir);
    const GeneratedDataset dataset = generate_dataset(gc);
    write_dataset(args.out_dir, dataset);
    std::cout << "generated " << dataset.clips.size() << " clips ("
              << dataset.train_ids.size() << " train / " << dataset.val_ids.size()
              << " val / " << dataset.test_ids.size() << " test) into "
              << args.out_dir << "\n";
    return 0;
}

int cmd_import17(const CommonArgs& args, const std::string& input,
                 const std::string& output) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed"});
    const auto clips = import_clip_stream_17_file(input);
    fs::create_directories(fs::path(output).parent_path().empty()
                               ? "."
                               : fs::path(output).parent_path().string());
    write_clip_stream_file(output, clips);
    std::cout << "imported " << clips.size() << " clips to " << output << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed", "data.train", "data.val", "model.n_frames",
                            "model.hidden_channels", "model.cheb_order",
                            "model.fc_dims", "model.dropout_rate", "train.lr",
                            "train.max_epochs", "train.batch_size"});
    const PedGnnConfig mc = model_config_from(cfg);
    const auto datasets = load_train_datasets(cfg);
    const auto val = read_clip_stream_file(cfg.get_string("data.val", ""));
    TrainOptions options;
    options.max_epochs = static_cast<int>(cfg.get_int("train.max_epochs", 100));
    options.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 500));
    options.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    echo_config(cfg, args.out_dir);
    const TrainResult result =
        train_one(mc, cfg.get_double("train.lr", 0.001), datasets, val, options);
    if (result.failed && result.best_epoch < 0) {
        std::cerr << "training failed: " << result.error << "\n";
        return kExitRunError;
    }
    save_checkpoint(args.out_dir + "/best.ckpt.json", result.best_params);
    std::ofstream out(args.out_dir + "/train_result.txt");
    out << "best_val_f1 " << result.best_f1 << "\nbest_epoch " << result.best_epoch
        << "\n";
    std::cout << "best val F1 " << result.best_f1 << " at epoch "
              << result.best_epoch << "; checkpoint written to " << args.out_dir
              << "/best.ckpt.json\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed", "data.train", "data.val", "model.hidden_channels",
                            "model.cheb_order", "model.fc_dims", "model.dropout_rate",
                            "sweep.n_frames_grid", "sweep.lr_grid",
                            "train.max_epochs", "train.batch_size"});
    const PedGnnConfig mc = model_config_from(cfg);
    const auto datasets = load_train_datasets(cfg);
    const auto val = read_clip_stream_file(cfg.get_string("data.val", ""));
    SweepPlan plan;
    plan.n_frames_grid = cfg.get_int_list("sweep.n_frames_grid", {8, 16});
    plan.lr_grid = cfg.get_double_list("sweep.lr_grid", {0.001, 0.0005});
    plan.max_epochs = static_cast<int>(cfg.get_int("train.max_epochs", 100));
    plan.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 500));
    plan.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    echo_config(cfg, args.out_dir);
    const SweepResult result = sweep(mc, plan, datasets, val);
    save_checkpoint(args.out_dir + "/best.ckpt.json", result.best_params);
    const std::string table = format_sweep_table(result);
    std::ofstream(args.out_dir + "/sweep.txt") << table;
    std::cout << table;
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint,
             const std::string& test_path, const std::string& train_name,
             const std::string& test_name) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed"});
    const PedGnnParams params = load_checkpoint(checkpoint);
    const auto clips = read_clip_stream_file(test_path);
    const SpectralBasis basis =
        build_spectral_basis(build_topology(), params.config.cheb_order);
    const auto events = stream_predict(clips, params, basis);
    if (events.empty()) {
        std::cerr << "no prediction events (tracks shorter than N_F?)\n";
        return kExitRunError;
    }
    fs::create_directories(args.out_dir);
    {
        std::ofstream out(args.out_dir + "/events.jsonl");
        for (const auto& e : events) out << event_log_line(e) << '\n';
    }
    ReportRow row;
    row.train = train_name.empty() ? "checkpoint" : train_name;
    row.test = test_name.empty() ? fs::path(test_path).stem().string() : test_name;
    row.n_frames = params.config.n_frames;
    row.metrics = compute_metrics(events);
    const std::string report = format_report({row});
    std::ofstream(args.out_dir + "/report.txt") << report;
    std::ofstream(args.out_dir + "/report.csv") << format_report_csv({row});
    std::cout << report;
    return 0;
}

int cmd_infer(const CommonArgs& args, const std::string& checkpoint,
              const std::string& input) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed"});
    const PedGnnParams params = load_checkpoint(checkpoint);
    const SpectralBasis basis =
        build_spectral_basis(build_topology(), params.config.cheb_order);
    std::vector<ClipRecord> clips;
    if (input == "-") {
        clips = read_clip_stream(std::cin);
    } else {
        clips = read_clip_stream_file(input);
    }
    for (const auto& clip : clips) {
        for (const auto& e : stream_predict(clip, params, basis)) {
            std::cout << event_log_line(e) << '\n';
        }
    }
    return 0;
}

int cmd_bench(const CommonArgs& args, const std::string& checkpoint, int n_frames,
              int repetitions) {
    const KvConfig cfg = load_config(args);
    cfg.require_known_keys({"seed"});
    if (repetitions <= 0) {
        std::cerr << "repetitions must be > 0\n";
        return kExitConfigError;
    }
    PedGnnParams params = [&] {
        if (!checkpoint.empty()) return load_checkpoint(checkpoint);
        PedGnnConfig mc;
        mc.n_frames = n_frames > 0 ? n_frames : 32;
        PedGnnParams p = make_params(mc);
        Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed", 0)));
        init_params(p, rng);
        return p;
    }();
    if (n_frames > 0) params.config.n_frames = n_frames;

    const SpectralBasis basis =
        build_spectral_basis(build_topology(), params.config.cheb_order);
    Rng rng(1);
    SkeletonWindow window;
    window.frames.resize(static_cast<std::size_t>(params.config.n_frames));
    for (auto& frame : window.frames) {
        for (auto& j : frame.joints) {
            j.x = rng.uniform(0.0, 1.0);
            j.y = rng.uniform(0.0, 1.0);
            j.c = 1.0;
        }
    }

    // warm-up
    for (int i = 0; i < 50; ++i) forward(window, params, basis);
    std::vector<double> times_ms;
    times_ms.reserve(static_cast<std::size_t>(repetitions));
    volatile double sink = 0.0;
    for (int i = 0; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Prediction p = forward(window, params, basis);
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + p.p_cross;
        times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times_ms.begin(), times_ms.end());
    const double median = times_ms[times_ms.size() / 2];
    const double p99 = times_ms[static_cast<std::size_t>(
        std::min<double>(static_cast<double>(times_ms.size()) - 1.0,
                         0.99 * static_cast<double>(times_ms.size())))];
    const ParamCount count = count_params(params);

    std::ostringstream report;
    report << "n_frames " << params.config.n_frames << "\nrepetitions " << repetitions
           << "\nmedian_ms " << median << "\np99_ms " << p99 << "\nparam_count "
           << count.count << "\nparam_bytes_f32 " << count.bytes_at_f32 << "\n";
    fs::create_directories(args.out_dir);
    std::ofstream(args.out_dir + "/bench.txt") << report.str();
    std::cout << report.str();
    return 0;
}

int cmd_inspect(const std::string& path) {
    const std::string name = fs::path(path).filename().string();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return kExitIoError;
    }
    std::string first_line;
    std::getline(in, first_line);
    if (first_line.find("pedgnn-checkpoint") != std::string::npos) {
        const PedGnnParams params = load_checkpoint(path);
        const ParamCount count = count_params(params);
        std::cout << "checkpoint " << name << "\nN_F " << params.config.n_frames
                  << "\nH " << params.config.hidden_channels << "\nK "
                  << params.config.cheb_order << "\nfc_dims "
                  << params.config.fc_dims[0] << "," << params.config.fc_dims[1]
                  << "," << params.config.fc_dims[2] << "\nparams " << count.count
                  << "\nbytes_f32 " << count.bytes_at_f32 << "\n";
        return 0;
    }
    const auto clips = read_clip_stream_file(path);
    long long frames = 0, labeled = 0, crossing = 0;
    for (const auto& c : clips) {
        frames += static_cast<long long>(c.frames.size());
        for (const auto& f : c.frames) {
            for (const auto& p : f.pedestrians) {
                if (p.label) {
                    ++labeled;
                    if (*p.label == Label::Cross) ++crossing;
                }
            }
        }
    }
    std::cout << "clip stream " << name << "\nclips " << clips.size() << "\nframes "
              << frames << "\nlabeled_pedestrian_frames " << labeled << "\ncrossing "
              << crossing << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pedestrian crossing intention pipeline: synthetic data "
                 "generation, GConvGRU training, evaluation, and streaming "
                 "inference"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string input, output, checkpoint, test_path, train_name, test_name;
    int n_frames = 0;
    int repetitions = 1000;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "key = value config file");
        sub->add_option("--set", args.overrides,
                        "override config entries (key=value), wins over the file");
        sub->add_option("--seed", args.seed, "rng seed (overrides config)")
            ->each([&](const std::string&) { args.seed_set = true; });
        sub->add_option("--out", args.out_dir, "output directory");
    };

    auto* generate = app.add_subcommand("generate", "generate a labeled synthetic dataset");
    add_common(generate);

    auto* import17 = app.add_subcommand("import17", "map 17-keypoint clip records to 19 joints");
    add_common(import17);
    import17->add_option("input", input, "17-keypoint clip stream")->required();
    import17->add_option("output", output, "19-joint clip stream")->required();

    auto* train = app.add_subcommand("train", "train one (N_F, lr) point");
    add_common(train);

    auto* sweepc = app.add_subcommand("sweep", "hyperparameter sweep over (N_F, lr)");
    add_common(sweepc);

    auto* evalc = app.add_subcommand("eval", "metrics report from a checkpoint and test split");
    add_common(evalc);
    evalc->add_option("checkpoint", checkpoint, "model checkpoint")->required();
    evalc->add_option("test", test_path, "test clip stream")->required();
    evalc->add_option("--train-name", train_name, "Train column value");
    evalc->add_option("--test-name", test_name, "Test column value");

    auto* inferc = app.add_subcommand("infer", "streaming predictions, one JSON object per line");
    add_common(inferc);
    inferc->add_option("checkpoint", checkpoint, "model checkpoint")->required();
    inferc->add_option("input", input, "clip stream file, or - for stdin")->required();

    auto* benchc = app.add_subcommand("bench", "single-window latency and footprint");
    add_common(benchc);
    benchc->add_option("--checkpoint", checkpoint, "model checkpoint (default: fresh default config)");
    benchc->add_option("--n-frames", n_frames, "window length override");
    benchc->add_option("--repetitions", repetitions, "timed repetitions (default 1000)");

    auto* inspectc = app.add_subcommand("inspect", "summarize a checkpoint or clip stream");
    inspectc->add_option("path", input, "file to inspect")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(args);
        if (import17->parsed()) return cmd_import17(args, input, output);
        if (train->parsed()) return cmd_train(args);
        if (sweepc->parsed()) return cmd_sweep(args);
        if (evalc->parsed())
            return cmd_eval(args, checkpoint, test_path, train_name, test_name);
        if (inferc->parsed()) return cmd_infer(args, checkpoint, input);
        if (benchc->parsed()) return cmd_bench(args, checkpoint, n_frames, repetitions);
        if (inspectc->parsed()) return cmd_inspect(input);
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        if (what.find("unknown configuration key") != std::string::npos ||
            what.find("config") != std::string::npos) {
            return kExitConfigError;
        }
        if (what.find("cannot open") != std::string::npos ||
            what.find("cannot write") != std::string::npos) {
            return kExitIoError;
        }
        return kExitRunError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunError;
    }
    return 0;
}
