// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance [--only N[,N...]] [--scratch DIR]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../support/checks.hpp"
#include "tsr/checkpoint.hpp"
#include "tsr/commands.hpp"
#include "tsr/config.hpp"
#include "tsr/fixture.hpp"
#include "tsr/metrics.hpp"
#include "tsr/network.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string bytes_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome gradients() {
    double layer_worst = 0.0;
    std::string worst_name;
    for (const auto& [name, err] : tsr::checks::layer_gradient_errors(2024)) {
        if (err >= layer_worst) {
            layer_worst = err;
            worst_name = name;
        }
    }
    const double net = tsr::checks::network_gradient_error(2024);
    return {layer_worst <= 1e-6 && net <= 1e-5,
            "per-layer max rel err " + sci(layer_worst) + " (" + worst_name +
                ", limit 1e-6); whole network " + sci(net) + " (limit 1e-5)"};
}

Outcome oracles() {
    bool pass = true;
    std::string detail;
    for (const auto& t : tsr::checks::oracle_equivalence(1000, 2024)) {
        pass = pass && t.instances >= 1000 && t.integer_mismatches == 0 && t.real_mismatches == 0;
        detail += (detail.empty() ? "" : "; ") + t.op + " " + std::to_string(t.instances) +
                  " integer + " + std::to_string(t.instances) + " real instances, " +
                  std::to_string(t.integer_mismatches + t.real_mismatches) + " inexact";
    }
    return {pass, detail};
}

Outcome shapes() {
    const tsr::NetworkSpec spec = tsr::canonical_network();
    const std::vector<tsr::Shape> expected = {{26, 26, 32}, {22, 22, 32}, {11, 11, 32},
                                              {9, 9, 64},   {7, 7, 64},   {3, 3, 64}};
    std::vector<tsr::Shape> seen;
    tsr::Shape s = spec.input_shape;
    std::size_t flat = 0;
    for (const auto& layer : spec.layers) {
        if (const auto* c = std::get_if<tsr::ConvDesc>(&layer)) {
            s = tsr::shape_after(s, c->kernel, 1, 0, c->filters);
            seen.push_back(s);
        } else if (const auto* p = std::get_if<tsr::MaxPoolDesc>(&layer)) {
            s = tsr::shape_after(s, p->window, p->stride, p->padding, s[2]);
            seen.push_back(s);
        } else if (std::holds_alternative<tsr::FlattenDesc>(layer)) {
            flat = s.element_count();
        }
    }
    const std::size_t params = tsr::parameter_count(spec);
    std::string chain;
    for (const auto& x : seen) chain += x.to_string() + "->";
    chain += std::to_string(flat);
    return {seen == expected && flat == 576 && params == 242251,
            chain + ", " + std::to_string(params) + " parameters (expected 242251)"};
}

Outcome dropout_response() {
    const auto r = tsr::checks::dropout_monte_carlo(20, 1000000, 2024);
    return {r.worst_z_mean <= 3.0 && r.worst_z_variance <= 3.0 && r.worst_z_response <= 3.0,
            std::to_string(r.instances) + " random instances x 1e6 samples; worst |z| mean " +
                sci(r.worst_z_mean) + ", variance " + sci(r.worst_z_variance) + ", E_R " +
                sci(r.worst_z_response) + " (limit 3)"};
}

Outcome optimizer() {
    const auto r = tsr::checks::adam_comparison();
    return {r.max_trajectory_diff <= 1e-12 && r.max_first_step_dev <= 1e-6,
            "100-step trajectory max diff " + sci(r.max_trajectory_diff) +
                " (limit 1e-12); first-step | |dtheta| - lr | " + sci(r.max_first_step_dev) +
                " (limit 1e-6)"};
}

Outcome metrics(const fs::path& scratch) {
    const auto r = tsr::checks::metrics_identities(10000, 2024, scratch / "metrics");
    return {r.trace_is_accuracy && r.recall_is_per_class && r.csv_round_trip,
            std::string("10000 pairs; trace/total == accuracy: ") +
                (r.trace_is_accuracy ? "yes" : "no") +
                "; recall == per-class accuracy: " + (r.recall_is_per_class ? "yes" : "no") +
                "; CSV round trip: " + (r.csv_round_trip ? "yes" : "failed for " + r.detail)};
}

struct TrainRun {
    int exit_code = 1;
    double seconds = 0.0;
    std::string log;
};

TrainRun train(const fs::path& data, const fs::path& out, std::size_t threads) {
    std::map<std::string, std::string> flags = {
        {"data_root", data.string()}, {"out_dir", out.string()}, {"max_epochs", "300"}};
    tsr::RunConfig cfg = tsr::parse_config(std::nullopt, flags, tsr::Command::train);
    cfg.threads = threads;
    std::ostringstream sink, log;
    const auto t0 = Clock::now();
    TrainRun run;
    run.exit_code = tsr::cmd_train(cfg, sink, log);
    run.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    run.log = log.str();
    return run;
}

// Criteria 6 and 10 share the two training runs.
std::pair<Outcome, Outcome> overfit_and_determinism(const fs::path& scratch) {
    const fs::path data = scratch / "toy";
    fs::remove_all(data);
    tsr::write_toy_fixture(data, 5, 20, 7);
    const TrainRun a = train(data, scratch / "run_a", 1);
    const TrainRun b = train(data, scratch / "run_b", 3);
    if (a.exit_code != 0 || b.exit_code != 0) {
        const Outcome fail{false, "train exited non-zero: " + a.log + b.log};
        return {fail, fail};
    }

    const auto curves = tsr::read_curves_csv(scratch / "run_a" / "curves.csv");
    std::size_t reached = 0;
    double best_train = 0.0;
    for (const auto& p : curves) {
        best_train = std::max(best_train, p.train_acc);
        if (reached == 0 && p.train_acc >= 0.99) reached = p.epoch;
    }
    Outcome overfit{reached > 0 && reached <= 300 && a.seconds < 300.0,
                    "100 images, 5 classes: train accuracy " + tsr::format6(best_train) +
                        (reached ? ", >= 0.99 first at epoch " + std::to_string(reached)
                                 : ", never reached 0.99") +
                        " of " + std::to_string(curves.size()) + " run; " + sci(a.seconds) +
                        "s per run (limit 300s)"};

    const bool same_ckpt =
        bytes_of(scratch / "run_a" / "model.tsrn") == bytes_of(scratch / "run_b" / "model.tsrn");
    const bool same_curves =
        bytes_of(scratch / "run_a" / "curves.csv") == bytes_of(scratch / "run_b" / "curves.csv");
    const tsr::Checkpoint loaded = tsr::load_checkpoint(scratch / "run_a" / "model.tsrn");
    tsr::save_checkpoint(scratch / "resaved.tsrn", loaded);
    const bool bit_exact =
        tsr::load_checkpoint(scratch / "resaved.tsrn") == loaded &&
        bytes_of(scratch / "resaved.tsrn") == bytes_of(scratch / "run_a" / "model.tsrn");
    overfit.pass = overfit.pass && same_ckpt && same_curves;
    Outcome determinism{same_ckpt && same_curves && bit_exact,
                        std::string("runs on 1 and 3 lanes: checkpoints ") +
                            (same_ckpt ? "identical" : "DIFFER") + ", curves.csv " +
                            (same_curves ? "identical" : "DIFFER") + "; save->load->save " +
                            (bit_exact ? "bit-exact" : "NOT bit-exact")};
    return {overfit, determinism};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    std::string scratch_arg = (fs::temp_directory_path() / "tsr_acceptance").string();
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--scratch", scratch_arg, "scratch directory");
    CLI11_PARSE(app, argc, argv);
    const fs::path scratch = scratch_arg;
    fs::create_directories(scratch);

    const std::set<int> wanted(only.begin(), only.end());
    auto enabled = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };
    int failures = 0;
    auto report = [&](int n, const char* title, double limit_s, const std::function<Outcome()>& run) {
        if (!enabled(n)) return;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (limit_s > 0 && secs > limit_s) {
            o.pass = false;
            o.detail += "; runtime " + sci(secs) + "s exceeds " + sci(limit_s) + "s";
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << n << " (" << title << "): "
                  << o.detail << " [" << sci(secs) << "s]" << std::endl;
    };

    report(1, "gradient correctness", 60, gradients);
    report(2, "oracle equivalence", 60, oracles);
    report(3, "shape calculus", 0, shapes);
    report(4, "expected dropout response", 60, dropout_response);
    report(5, "optimizer", 0, optimizer);
    if (enabled(6) || enabled(10)) {
        const auto t0 = Clock::now();
        std::pair<Outcome, Outcome> runs;
        try {
            runs = overfit_and_determinism(scratch);
        } catch (const std::exception& e) {
            runs.first = runs.second = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        report(6, "overfit smoke", 0, [&] { return runs.first; });
        report(10, "determinism and persistence", 0, [&] { return runs.second; });
        std::cout << "      (criteria 6 and 10 share two training runs, " << sci(secs) << "s total)"
                  << std::endl;
    }
    report(9, "metrics identities", 60, [&] { return metrics(scratch); });
    std::cout << "      criteria 7 and 8 need the GTSRB images; see acceptance_gtsrb" << std::endl;
    return failures == 0 ? 0 : 1;
}
