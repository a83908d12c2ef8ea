// Command-line front end: tsr {train,eval,predict,report}.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsr/commands.hpp"
#include "tsr/config.hpp"

namespace {

struct Flags {
    std::string config;
    std::string data_root;
    std::string out_dir;
    std::string checkpoint;
    std::string seed;
    std::string batch_size;
    std::string epochs;
    std::string lr;
    std::vector<std::string> images;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value config file");
    cmd->add_option("--data-root", f.data_root, "dataset root (<root>/<class_id>/<image>)");
    cmd->add_option("--out-dir", f.out_dir, "directory for curves, metrics and charts");
    cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    cmd->add_option("--epochs", f.epochs, "maximum number of epochs");
    cmd->add_option("--lr", f.lr, "initial learning rate");
}

std::map<std::string, std::string> overrides(const Flags& f) {
    std::map<std::string, std::string> o;
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) o[key] = v;
    };
    put("data_root", f.data_root);
    put("out_dir", f.out_dir);
    put("checkpoint", f.checkpoint);
    put("seed", f.seed);
    put("batch_size", f.batch_size);
    put("max_epochs", f.epochs);
    put("learning_rate", f.lr);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic-sign CNN: train, evaluate, predict and report"};
    app.set_version_flag("--version", tsr::version_string());
    app.require_subcommand(1);

    Flags flags;
    auto* train = app.add_subcommand("train", "train a model on a dataset directory");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the held-out test split");
    auto* predict = app.add_subcommand("predict", "classify individual images");
    auto* report = app.add_subcommand("report", "re-render SVG charts from existing CSVs");
    for (auto* cmd : {train, eval, predict, report}) add_common(cmd, flags);
    predict->add_option("images", flags.images, "image files (.ppm or .png)");

    CLI11_PARSE(app, argc, argv);

    tsr::Command command = tsr::Command::train;
    if (eval->parsed()) command = tsr::Command::eval;
    if (predict->parsed()) command = tsr::Command::predict;
    if (report->parsed()) command = tsr::Command::report;

    tsr::RunConfig cfg;
    try {
        std::optional<std::filesystem::path> file;
        if (!flags.config.empty()) file = flags.config;
        cfg = tsr::parse_config(file, overrides(flags), command);
    } catch (const tsr::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    switch (command) {
        case tsr::Command::train: return tsr::cmd_train(cfg, std::cout, std::cerr);
        case tsr::Command::eval: return tsr::cmd_eval(cfg, std::cout, std::cerr);
        case tsr::Command::predict: {
            std::vector<std::filesystem::path> paths(flags.images.begin(), flags.images.end());
            return tsr::cmd_predict(cfg, paths, std::cout, std::cerr);
        }
        case tsr::Command::report: return tsr::cmd_report(cfg, std::cout, std::cerr);
    }
    return 1;
}
