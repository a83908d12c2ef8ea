#include "tsr/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "tsr/checkpoint.hpp"
#include "tsr/dataset.hpp"
#include "tsr/metrics.hpp"
#include "tsr/parallel.hpp"
#include "tsr/trainer.hpp"

#ifndef TSR_VERSION_STRING
#define TSR_VERSION_STRING "0.1.0-unknown"
#endif

namespace tsr {

namespace fs = std::filesystem;

std::string version_string() { return TSR_VERSION_STRING; }

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    nlohmann::ordered_json j;
    j["learning_rate"] = t.learning_rate;
    j["batch_size"] = t.batch_size;
    j["max_epochs"] = t.max_epochs;
    j["early_stop_patience"] = t.early_stop_patience;
    j["lr_factor"] = t.lr_factor;
    j["lr_patience"] = t.lr_patience;
    j["min_lr"] = t.min_lr;
    j["seed"] = t.seed;
    j["val_fraction"] = t.val_fraction;
    j["test_fraction"] = cfg.test_fraction;
    j["data_root"] = cfg.data_root.string();
    j["out_dir"] = cfg.out_dir.string();
    j["checkpoint"] = cfg.checkpoint.string();
    return j;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream&, std::ostream& err) {
    return guarded(err, [&] {
        const std::size_t lanes = resolve_lanes(cfg.threads);
        const auto entries = scan_dataset(cfg.data_root);
        const std::uint64_t fingerprint = dataset_fingerprint(cfg.data_root, entries);
        err << "loading " << entries.size() << " images from " << cfg.data_root.string() << '\n';
        DatasetSplit split = stratified_split(load_examples(entries, lanes), cfg.test_fraction,
                                              cfg.train.val_fraction, cfg.train.seed);
        split.class_names = load_class_names(cfg.data_root);
        err << "split: " << split.train.size() << " train, " << split.validation.size()
            << " validation, " << split.test.size() << " test\n";

        ensure_dir(cfg.out_dir);
        if (cfg.checkpoint.has_parent_path()) ensure_dir(cfg.checkpoint.parent_path());

        FitOptions options;
        options.lanes = lanes;
        const auto started = std::chrono::steady_clock::now();
        options.on_epoch = [&](const CurvePoint& p) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            err << "epoch " << p.epoch << " train_loss=" << format6(p.train_loss)
                << " train_acc=" << format6(p.train_acc) << " val_loss=" << format6(p.val_loss)
                << " val_acc=" << format6(p.val_acc) << " lr=" << format6(p.lr) << " ("
                << static_cast<long>(secs) << "s)\n";
        };
        const FitResult result = fit(split, cfg.train, options);

        save_checkpoint(cfg.checkpoint, result.best_checkpoint);
        write_curves_csv(cfg.out_dir / "curves.csv", result.curves);

        nlohmann::ordered_json manifest;
        manifest["version"] = version_string();
        manifest["seed"] = cfg.train.seed;
        manifest["config"] = config_echo(cfg);
        manifest["parameter_count"] = parameter_count(options.spec);
        manifest["dataset"] = {{"root", cfg.data_root.string()},
                               {"fingerprint", hex64(fingerprint)},
                               {"images", entries.size()},
                               {"train", split.train.size()},
                               {"validation", split.validation.size()},
                               {"test", split.test.size()}};
        manifest["epochs_run"] = result.curves.size();
        manifest["best_epoch"] = result.best_epoch;
        manifest["stopped_early"] = result.stopped_early;
        std::ofstream(cfg.out_dir / "run_manifest.json") << manifest.dump(2) << '\n';

        err << "best epoch " << result.best_epoch << ", checkpoint " << cfg.checkpoint.string()
            << '\n';
        return 0;
    });
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
        const std::size_t lanes = resolve_lanes(cfg.threads);
        const auto entries = scan_dataset(cfg.data_root);
        const DatasetSplit split = stratified_split(load_examples(entries, lanes), cfg.test_fraction,
                                                    cfg.train.val_fraction, ckpt.seed);
        if (split.test.empty()) throw std::runtime_error("test split is empty");

        const Evaluation ev = evaluate(ckpt.spec, ckpt.params, split.test, lanes);
        std::vector<int> truths(split.test.size());
        for (std::size_t i = 0; i < truths.size(); ++i) truths[i] = split.test[i].label;
        const ConfusionMatrix cm = confusion_matrix(ev.predictions, truths, ckpt.spec.num_classes());
        const ClassificationReport report = classification_report(cm);

        std::vector<CurvePoint> curves;
        if (fs::exists(cfg.out_dir / "curves.csv")) curves = read_curves_csv(cfg.out_dir / "curves.csv");
        render_reports(cm, report, curves, cfg.out_dir);

        err << "evaluated " << split.test.size() << " test images; artifacts in "
            << cfg.out_dir.string() << '\n';
        out << "test_accuracy=" << format6(report.accuracy) << '\n';
        return 0;
    });
}

int cmd_predict(const RunConfig& cfg, const std::vector<fs::path>& images, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&] {
        if (images.empty()) throw std::runtime_error("predict needs at least one image path");
        const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
        const std::size_t n_classes = ckpt.spec.num_classes();
        std::vector<std::string> names(n_classes);
        if (cfg.data_root.empty()) {
            for (std::size_t c = 0; c < n_classes; ++c) names[c] = "class_" + std::to_string(c);
        } else {
            names = load_class_names(cfg.data_root, n_classes);
        }
        std::size_t failures = 0;
        for (const auto& path : images) {
            try {
                const LabeledExample ex = load_example({path, 0});
                const auto result = network_forward(ckpt.spec, ckpt.params, ex.image, Mode::eval);
                const std::size_t cls = argmax(result.probs.data());
                out << path.string() << ',' << cls << ',' << names[cls] << ','
                    << format6(result.probs[cls]) << '\n';
            } catch (const std::exception& e) {
                ++failures;
                err << "error: " << path.string() << ": " << e.what() << '\n';
            }
        }
        return failures == 0 ? 0 : 1;
    });
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!fs::is_directory(cfg.out_dir)) {
            throw std::runtime_error("report directory " + cfg.out_dir.string() + " does not exist");
        }
        for (const auto& path : render_svgs_from_csv(cfg.out_dir)) out << path.string() << '\n';
        return 0;
    });
}

}  // namespace tsr
