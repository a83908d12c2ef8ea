#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsr {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fraction of positions where predictions and truths agree.
double accuracy(std::span<const int> predictions, std::span<const int> truths);

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t n_classes = 43);

    std::size_t n_classes() const noexcept { return n_; }
    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * n_ + predicted]; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const {
        return counts_[truth * n_ + predicted];
    }
    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t predicted) const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths,
                                 std::size_t n_classes = 43);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

struct Averages {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-class precision/recall/F1/support. Any 0/0 is reported as 0 and the
/// class is listed in `zero_division_classes`.
struct ClassificationReport {
    std::vector<ClassMetrics> classes;
    double accuracy = 0.0;
    std::uint64_t total = 0;
    Averages macro;
    Averages weighted;
    std::vector<std::size_t> zero_division_classes;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

/// diag / row sum per class; 0 for classes without support.
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

struct CurvePoint {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Fixed-point formatting used by every CSV and stdout contract.
std::string format6(double value);

// CSV writers and readers. Floats are written with 6 decimals.
void write_curves_csv(const std::filesystem::path& path, std::span<const CurvePoint> curves);
std::vector<CurvePoint> read_curves_csv(const std::filesystem::path& path);

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

void write_report_csv(const std::filesystem::path& path, const ClassificationReport& report);
ClassificationReport read_report_csv(const std::filesystem::path& path);

void write_per_class_csv(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_per_class_csv(const std::filesystem::path& path);

// Self-contained SVG 1.1 charts.
std::string curves_svg(std::span<const CurvePoint> curves);
std::string confusion_svg(const ConfusionMatrix& cm);
std::string per_class_svg(std::span<const double> values);
std::string report_svg(const ClassificationReport& report);

/// Writes confusion_matrix.csv, classification_report.csv,
/// per_class_accuracy.csv, curves.csv and one SVG per CSV into `out_dir`.
void render_reports(const ConfusionMatrix& cm, const ClassificationReport& report,
                    std::span<const CurvePoint> curves, const std::filesystem::path& out_dir);

/// Regenerates SVGs from whichever report CSVs exist in `dir`; returns the
/// files written. Throws MetricsError if none exist or one is malformed.
std::vector<std::filesystem::path> render_svgs_from_csv(const std::filesystem::path& dir);

}  // namespace tsr
