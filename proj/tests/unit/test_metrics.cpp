#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "../support/checks.hpp"
#include "toy.hpp"
#include "tsr/metrics.hpp"
#include "tsr/rng.hpp"

using namespace tsr;
namespace fs = std::filesystem;

namespace {

fs::path dir_for(const std::string& name) {
    const fs::path p = toy::scratch() / "metrics" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("accuracy examples") {
    const std::vector<int> t{1, 2, 3, 4};
    CHECK(accuracy(t, t) == 1.0);
    CHECK(accuracy(std::vector<int>{0, 0, 0, 0}, t) == 0.0);
    CHECK(accuracy(std::vector<int>{1, 2, 3, 0}, t) == 0.75);
    CHECK_THROWS_AS(accuracy(std::vector<int>{1}, t), MetricsError);
    CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), MetricsError);
}

TEST_CASE("confusion_matrix examples") {
    const std::vector<int> truths{0, 0, 1}, preds{0, 1, 1};
    const ConfusionMatrix cm = confusion_matrix(preds, truths);
    CHECK(cm.n_classes() == 43);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.total() == 3);
    CHECK(cm.trace() == 2);
    CHECK(cm.row_sum(0) == 2);
    CHECK(cm.col_sum(1) == 2);

    const std::vector<int> perfect{5, 9, 42, 9};
    const ConfusionMatrix d = confusion_matrix(perfect, perfect);
    CHECK(d.trace() == d.total());
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{43}, std::vector<int>{0}), MetricsError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{0}, std::vector<int>{-1}), MetricsError);
    CHECK_THROWS_AS(confusion_matrix(std::vector<int>{0, 1}, std::vector<int>{0}), MetricsError);
}

TEST_CASE("classification_report examples") {
    SUBCASE("diagonal matrix") {
        const std::vector<int> v{0, 1, 2, 2};
        const auto r = classification_report(confusion_matrix(v, v, 3));
        for (const auto& c : r.classes) {
            CHECK(c.precision == 1.0);
            CHECK(c.recall == 1.0);
            CHECK(c.f1 == 1.0);
        }
        CHECK(r.macro.f1 == 1.0);
        CHECK(r.zero_division_classes.empty());
    }
    SUBCASE("TP=2, FP=1, FN=1") {
        // class 0: two hits, one false alarm from class 1, one miss to class 2
        const std::vector<int> truths{0, 0, 1, 0}, preds{0, 0, 0, 2};
        const auto r = classification_report(confusion_matrix(preds, truths, 3));
        CHECK(r.classes[0].precision == doctest::Approx(2.0 / 3).epsilon(1e-15));
        CHECK(r.classes[0].recall == doctest::Approx(2.0 / 3).epsilon(1e-15));
        CHECK(r.classes[0].f1 == doctest::Approx(2.0 / 3).epsilon(1e-15));
        CHECK(r.classes[0].support == 3);
    }
    SUBCASE("zero support gives 0, not NaN") {
        const std::vector<int> v{0, 0};
        const auto r = classification_report(confusion_matrix(v, v, 43));
        CHECK(r.classes[5].recall == 0.0);
        CHECK(r.classes[5].precision == 0.0);
        CHECK(r.classes[5].f1 == 0.0);
        CHECK(r.zero_division_classes.size() == 42);
        CHECK(r.macro.f1 == doctest::Approx(1.0 / 43));
        CHECK(r.weighted.f1 == 1.0);
    }
}

TEST_CASE("per_class_accuracy examples") {
    const std::vector<int> truths{0, 0, 0, 0, 1}, preds{0, 0, 0, 1, 1};
    const auto acc = per_class_accuracy(confusion_matrix(preds, truths, 3));
    CHECK(acc == std::vector<double>{0.75, 1.0, 0.0});
}

TEST_CASE("report invariants on random inputs") {
    CounterRng rng(31);
    std::vector<int> p(2000), t(2000);
    for (std::size_t i = 0; i < p.size(); ++i) {
        t[i] = static_cast<int>(rng.below(43));
        p[i] = rng.uniform() < 0.7 ? t[i] : static_cast<int>(rng.below(43));
    }
    const auto cm = confusion_matrix(p, t);
    const auto r = classification_report(cm);
    std::uint64_t support = 0;
    for (const auto& c : r.classes) {
        support += c.support;
        for (const double v : {c.precision, c.recall, c.f1}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(support == 2000);
    CHECK(r.macro.f1 >= 0.0);
    CHECK(r.macro.f1 <= 1.0);
    CHECK(static_cast<double>(cm.trace()) / static_cast<double>(cm.total()) == accuracy(p, t));
}

TEST_CASE("metrics identities hold on random pairs") {
    const auto r = checks::metrics_identities(2000, 5, dir_for("identities"));
    CHECK(r.trace_is_accuracy);
    CHECK(r.recall_is_per_class);
    CHECK(r.csv_round_trip);
}

TEST_CASE("render_reports layout") {
    const fs::path dir = dir_for("render");
    const std::vector<int> truths{0, 1, 2, 3}, preds{0, 1, 2, 4};
    const auto cm = confusion_matrix(preds, truths);
    const auto report = classification_report(cm);
    render_reports(cm, report, {}, dir);
    for (const char* name : {"confusion_matrix", "classification_report", "per_class_accuracy", "curves"}) {
        CHECK(fs::exists(dir / (std::string(name) + ".csv")));
        const std::string svg = slurp(dir / (std::string(name) + ".svg"));
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("href") == std::string::npos);
    }

    const auto cm_lines = lines_of(dir / "confusion_matrix.csv");
    CHECK(cm_lines.size() == 44);
    for (const auto& l : cm_lines) CHECK(std::count(l.begin(), l.end(), ',') == 43);
    CHECK(lines_of(dir / "curves.csv") ==
          std::vector<std::string>{"epoch,train_loss,train_acc,val_loss,val_acc,lr"});
    CHECK(read_curves_csv(dir / "curves.csv").empty());
    const auto rep = lines_of(dir / "classification_report.csv");
    CHECK(rep.size() == 1 + 43 + 4);
    CHECK(rep[44] == "accuracy,,,0.750000,4");

    const std::string before = slurp(dir / "confusion_matrix.svg") + slurp(dir / "classification_report.csv");
    render_reports(cm, report, {}, dir);
    CHECK(slurp(dir / "confusion_matrix.svg") + slurp(dir / "classification_report.csv") == before);
}

TEST_CASE("CSV readers recover what the writers wrote") {
    const fs::path dir = dir_for("roundtrip");
    const std::vector<CurvePoint> curves{{1, 3.5, 0.25, 3.25, 0.2, 0.001}, {2, 1.125, 0.5, 1.5, 0.4, 0.0005}};
    write_curves_csv(dir / "curves.csv", curves);
    CHECK(read_curves_csv(dir / "curves.csv") == curves);

    CounterRng rng(8);
    std::vector<int> p(300), t(300);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<int>(rng.below(43));
        t[i] = static_cast<int>(rng.below(43));
    }
    const auto cm = confusion_matrix(p, t);
    write_confusion_csv(dir / "cm.csv", cm);
    CHECK(read_confusion_csv(dir / "cm.csv") == cm);
    const auto r = classification_report(cm);
    write_report_csv(dir / "r.csv", r);
    const auto back = read_report_csv(dir / "r.csv");
    CHECK(back.total == r.total);
    CHECK(back.zero_division_classes == r.zero_division_classes);
    REQUIRE(back.classes.size() == 43);
    CHECK(back.classes[7].support == r.classes[7].support);
    CHECK(back.classes[7].f1 == std::strtod(format6(r.classes[7].f1).c_str(), nullptr));
}

TEST_CASE("malformed CSV rows are named") {
    const fs::path dir = dir_for("malformed");
    std::ofstream(dir / "curves.csv") << "epoch,train_loss,train_acc,val_loss,val_acc,lr\n"
                                         "1,0.5,0.5,0.5,0.5,0.001\n"
                                         "2,0.4,oops,0.4,0.6,0.001\n";
    try {
        read_curves_csv(dir / "curves.csv");
        FAIL("expected an error");
    } catch (const MetricsError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(render_svgs_from_csv(dir), MetricsError);
    CHECK_THROWS_AS(render_svgs_from_csv(dir_for("nothing")), MetricsError);
}

TEST_CASE("format6") {
    CHECK(format6(0.5) == "0.500000");
    CHECK(format6(1.0 / 43) == "0.023256");
    CHECK(format6(2.0 / 3) == "0.666667");
}
