#include "tsr/metrics.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tsr {

namespace fs = std::filesystem;

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.size() != truths.size()) {
        throw MetricsError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                           std::to_string(truths.size()) + " truths");
    }
    if (predictions.empty()) throw MetricsError("accuracy of an empty evaluation");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truths[i];
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes)
    : n_(n_classes), counts_(n_classes * n_classes, 0) {
    if (n_classes == 0) throw MetricsError("confusion matrix needs at least one class");
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
    return s;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < n_; ++t) s += at(t, predicted);
    return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> truths,
                                 std::size_t n_classes) {
    if (predictions.size() != truths.size()) {
        throw MetricsError("confusion matrix: " + std::to_string(predictions.size()) +
                           " predictions vs " + std::to_string(truths.size()) + " truths");
    }
    ConfusionMatrix cm(n_classes);
    const auto n = static_cast<int>(n_classes);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int t = truths[i];
        const int p = predictions[i];
        if (t < 0 || t >= n || p < 0 || p >= n) {
            throw MetricsError("class id out of range at position " + std::to_string(i) + " (truth " +
                               std::to_string(t) + ", prediction " + std::to_string(p) + ")");
        }
        ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
    }
    return cm;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
    const std::size_t n = cm.n_classes();
    ClassificationReport report;
    report.classes.resize(n);
    report.total = cm.total();
    report.accuracy = report.total == 0 ? 0.0
                                        : static_cast<double>(cm.trace()) /
                                              static_cast<double>(report.total);
    for (std::size_t c = 0; c < n; ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const std::uint64_t predicted = cm.col_sum(c);
        const std::uint64_t actual = cm.row_sum(c);
        ClassMetrics& m = report.classes[c];
        bool undefined = false;
        if (predicted == 0) {
            undefined = true;
        } else {
            m.precision = tp / static_cast<double>(predicted);
        }
        if (actual == 0) {
            undefined = true;
        } else {
            m.recall = tp / static_cast<double>(actual);
        }
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        }
        m.support = actual;
        if (undefined) report.zero_division_classes.push_back(c);

        report.macro.precision += m.precision;
        report.macro.recall += m.recall;
        report.macro.f1 += m.f1;
        const auto w = static_cast<double>(actual);
        report.weighted.precision += w * m.precision;
        report.weighted.recall += w * m.recall;
        report.weighted.f1 += w * m.f1;
    }
    const auto classes = static_cast<double>(n);
    report.macro.precision /= classes;
    report.macro.recall /= classes;
    report.macro.f1 /= classes;
    if (report.total > 0) {
        const auto total = static_cast<double>(report.total);
        report.weighted.precision /= total;
        report.weighted.recall /= total;
        report.weighted.f1 /= total;
    }
    return report;
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
    std::vector<double> out(cm.n_classes(), 0.0);
    for (std::size_t c = 0; c < cm.n_classes(); ++c) {
        const std::uint64_t support = cm.row_sum(c);
        if (support > 0) {
            out[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(support);
        }
    }
    return out;
}

std::string format6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MetricsError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw MetricsError("write failed for " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_for_write(path);
    out << text;
    finish(out, path);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

// Line-oriented CSV reader that reports "<file>:<line>" on every error.
class CsvReader {
public:
    explicit CsvReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw MetricsError("cannot read " + path.string());
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_fields(line);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw MetricsError(path_.string() + ": row " + std::to_string(line_) + ": " + what);
    }

    double number(const std::string& s) const {
        if (s.empty()) fail("empty numeric field");
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
            fail("bad number '" + s + "'");
        }
        return v;
    }

    std::uint64_t integer(const std::string& s) const {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            fail("bad integer '" + s + "'");
        }
        return std::stoull(s);
    }

    void expect_fields(const std::vector<std::string>& fields, std::size_t n) const {
        if (fields.size() != n) {
            fail("expected " + std::to_string(n) + " fields, found " + std::to_string(fields.size()));
        }
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::size_t line_ = 0;
};

constexpr const char* kCurvesHeader = "epoch,train_loss,train_acc,val_loss,val_acc,lr";
constexpr const char* kReportHeader = "class,precision,recall,f1,support";
constexpr const char* kPerClassHeader = "class,accuracy";

std::string join_header(const std::vector<std::string>& fields) {
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) s += (i ? "," : "") + fields[i];
    return s;
}

}  // namespace

void write_curves_csv(const fs::path& path, std::span<const CurvePoint> curves) {
    std::ostringstream os;
    os << kCurvesHeader << '\n';
    for (const auto& p : curves) {
        os << p.epoch << ',' << format6(p.train_loss) << ',' << format6(p.train_acc) << ','
           << format6(p.val_loss) << ',' << format6(p.val_acc) << ',' << format6(p.lr) << '\n';
    }
    write_text(path, os.str());
}

std::vector<CurvePoint> read_curves_csv(const fs::path& path) {
    CsvReader csv(path);
    std::vector<std::string> f;
    if (!csv.next(f) || join_header(f) != kCurvesHeader) csv.fail("missing curves header");
    std::vector<CurvePoint> curves;
    while (csv.next(f)) {
        csv.expect_fields(f, 6);
        curves.push_back({static_cast<std::size_t>(csv.integer(f[0])), csv.number(f[1]),
                          csv.number(f[2]), csv.number(f[3]), csv.number(f[4]), csv.number(f[5])});
    }
    return curves;
}

void write_confusion_csv(const fs::path& path, const ConfusionMatrix& cm) {
    std::ostringstream os;
    os << "true\\pred";
    for (std::size_t p = 0; p < cm.n_classes(); ++p) os << ',' << p;
    os << '\n';
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
        os << t;
        for (std::size_t p = 0; p < cm.n_classes(); ++p) os << ',' << cm.at(t, p);
        os << '\n';
    }
    write_text(path, os.str());
}

ConfusionMatrix read_confusion_csv(const fs::path& path) {
    CsvReader csv(path);
    std::vector<std::string> f;
    if (!csv.next(f) || f.size() < 2) csv.fail("missing confusion matrix header");
    const std::size_t n = f.size() - 1;
    for (std::size_t p = 0; p < n; ++p) {
        if (csv.integer(f[p + 1]) != p) csv.fail("unexpected column id '" + f[p + 1] + "'");
    }
    ConfusionMatrix cm(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (!csv.next(f)) csv.fail("missing row for class " + std::to_string(t));
        csv.expect_fields(f, n + 1);
        if (csv.integer(f[0]) != t) csv.fail("unexpected row id '" + f[0] + "'");
        for (std::size_t p = 0; p < n; ++p) cm.at(t, p) = csv.integer(f[p + 1]);
    }
    if (csv.next(f)) csv.fail("trailing row");
    return cm;
}

void write_report_csv(const fs::path& path, const ClassificationReport& r) {
    std::ostringstream os;
    os << kReportHeader << '\n';
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
        const auto& m = r.classes[c];
        os << c << ',' << format6(m.precision) << ',' << format6(m.recall) << ','
           << format6(m.f1) << ',' << m.support << '\n';
    }
    os << "accuracy,,," << format6(r.accuracy) << ',' << r.total << '\n';
    os << "macro_avg," << format6(r.macro.precision) << ',' << format6(r.macro.recall) << ','
       << format6(r.macro.f1) << ',' << r.total << '\n';
    os << "weighted_avg," << format6(r.weighted.precision) << ',' << format6(r.weighted.recall)
       << ',' << format6(r.weighted.f1) << ',' << r.total << '\n';
    os << "zero_division,";
    for (std::size_t i = 0; i < r.zero_division_classes.size(); ++i) {
        os << (i ? " " : "") << r.zero_division_classes[i];
    }
    os << ",,," << r.zero_division_classes.size() << '\n';
    write_text(path, os.str());
}

ClassificationReport read_report_csv(const fs::path& path) {
    CsvReader csv(path);
    std::vector<std::string> f;
    if (!csv.next(f) || join_header(f) != kReportHeader) csv.fail("missing report header");
    ClassificationReport r;
    bool seen_accuracy = false;
    while (csv.next(f)) {
        csv.expect_fields(f, 5);
        if (f[0] == "accuracy") {
            r.accuracy = csv.number(f[3]);
            r.total = csv.integer(f[4]);
            seen_accuracy = true;
        } else if (f[0] == "macro_avg" || f[0] == "weighted_avg") {
            Averages& a = f[0] == "macro_avg" ? r.macro : r.weighted;
            a = {csv.number(f[1]), csv.number(f[2]), csv.number(f[3])};
        } else if (f[0] == "zero_division") {
            std::istringstream ids(f[1]);
            std::string id;
            while (ids >> id) r.zero_division_classes.push_back(csv.integer(id));
            if (csv.integer(f[4]) != r.zero_division_classes.size()) {
                csv.fail("zero_division count does not match its class list");
            }
        } else {
            if (csv.integer(f[0]) != r.classes.size()) csv.fail("unexpected class id '" + f[0] + "'");
            r.classes.push_back(
                {csv.number(f[1]), csv.number(f[2]), csv.number(f[3]), csv.integer(f[4])});
        }
    }
    if (!seen_accuracy) csv.fail("missing accuracy footer");
    return r;
}

void write_per_class_csv(const fs::path& path, std::span<const double> values) {
    std::ostringstream os;
    os << kPerClassHeader << '\n';
    for (std::size_t c = 0; c < values.size(); ++c) os << c << ',' << format6(values[c]) << '\n';
    write_text(path, os.str());
}

std::vector<double> read_per_class_csv(const fs::path& path) {
    CsvReader csv(path);
    std::vector<std::string> f;
    if (!csv.next(f) || join_header(f) != kPerClassHeader) csv.fail("missing per-class header");
    std::vector<double> values;
    while (csv.next(f)) {
        csv.expect_fields(f, 2);
        if (csv.integer(f[0]) != values.size()) csv.fail("unexpected class id '" + f[0] + "'");
        values.push_back(csv.number(f[1]));
    }
    return values;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

class Svg {
public:
    Svg(double width, double height) {
        os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width)
            << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << ' '
            << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
            << "\" fill=\"white\"/>\n";
    }
    void text(double x, double y, const std::string& s, const char* anchor = "start",
              int size = 11) {
        os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
            << "\" font-size=\"" << size << "\">" << s << "</text>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill) {
        os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
            << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#444") {
        os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
            << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        if (pts.empty()) return;
        os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os_ << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
        }
        os_ << "\"/>\n";
    }
    std::string str() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    std::ostringstream os_;
};

struct Panel {
    double x, y, w, h;
    double lo, hi;
    std::size_t n;

    double px(std::size_t i) const {
        return n <= 1 ? x + w / 2 : x + w * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    double py(double v) const {
        const double span = hi > lo ? hi - lo : 1.0;
        return y + h - h * (std::clamp(v, lo, hi) - lo) / span;
    }
};

void draw_axes(Svg& svg, const Panel& p, const std::string& title) {
    svg.text(p.x + p.w / 2, p.y - 8, title, "middle", 12);
    svg.line(p.x, p.y + p.h, p.x + p.w, p.y + p.h);
    svg.line(p.x, p.y, p.x, p.y + p.h);
    svg.text(p.x - 4, p.y + 4, num(p.hi), "end", 9);
    svg.text(p.x - 4, p.y + p.h, num(p.lo), "end", 9);
}

std::string bar_chart(std::span<const double> values, const std::string& title) {
    const double bar = 14.0;
    const double left = 50, top = 30, plot_h = 220;
    const double width = left + bar * static_cast<double>(values.size()) + 20;
    Svg svg(std::max(width, 200.0), top + plot_h + 40);
    Panel p{left, top, bar * static_cast<double>(values.size()), plot_h, 0.0, 1.0, values.size()};
    draw_axes(svg, p, title);
    for (std::size_t c = 0; c < values.size(); ++c) {
        const double v = std::clamp(values[c], 0.0, 1.0);
        const double x = left + bar * static_cast<double>(c);
        svg.rect(x + 1, p.py(v), bar - 2, top + plot_h - p.py(v), "#3b73b9");
        if (c % 5 == 0) svg.text(x + bar / 2, top + plot_h + 14, std::to_string(c), "middle", 9);
    }
    svg.text(left + p.w / 2, top + plot_h + 32, "class", "middle");
    return svg.str();
}

}  // namespace

std::string curves_svg(std::span<const CurvePoint> curves) {
    const double width = 640, height = 300;
    Svg svg(width, height);
    double loss_hi = 0.0;
    for (const auto& c : curves) loss_hi = std::max({loss_hi, c.train_loss, c.val_loss});
    if (loss_hi <= 0.0) loss_hi = 1.0;
    const Panel acc{50, 40, 240, 200, 0.0, 1.0, curves.size()};
    const Panel loss{370, 40, 240, 200, 0.0, loss_hi, curves.size()};
    draw_axes(svg, acc, "accuracy");
    draw_axes(svg, loss, "loss");

    std::vector<std::pair<double, double>> ta, va, tl, vl;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        ta.emplace_back(acc.px(i), acc.py(curves[i].train_acc));
        va.emplace_back(acc.px(i), acc.py(curves[i].val_acc));
        tl.emplace_back(loss.px(i), loss.py(curves[i].train_loss));
        vl.emplace_back(loss.px(i), loss.py(curves[i].val_loss));
    }
    svg.polyline(ta, "#1f77b4");
    svg.polyline(va, "#ff7f0e");
    svg.polyline(tl, "#1f77b4");
    svg.polyline(vl, "#ff7f0e");
    svg.text(50, 270, "train", "start");
    svg.rect(85, 262, 12, 3, "#1f77b4");
    svg.text(110, 270, "validation", "start");
    svg.rect(170, 262, 12, 3, "#ff7f0e");
    svg.text(width / 2, 290, std::to_string(curves.size()) + " epochs", "middle");
    return svg.str();
}

std::string confusion_svg(const ConfusionMatrix& cm) {
    const std::size_t n = cm.n_classes();
    const double cell = 12.0, left = 40, top = 40;
    const double side = cell * static_cast<double>(n);
    Svg svg(left + side + 20, top + side + 30);
    svg.text(left + side / 2, 20, "confusion matrix (rows: true, columns: predicted)", "middle", 12);
    for (std::size_t t = 0; t < n; ++t) {
        const std::uint64_t row = cm.row_sum(t);
        for (std::size_t p = 0; p < n; ++p) {
            const double frac =
                row == 0 ? 0.0 : static_cast<double>(cm.at(t, p)) / static_cast<double>(row);
            const int shade = 255 - static_cast<int>(std::lround(frac * 215.0));
            char fill[16];
            std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
            svg.rect(left + cell * static_cast<double>(p), top + cell * static_cast<double>(t), cell,
                     cell, fill);
        }
        if (t % 5 == 0) {
            svg.text(left - 4, top + cell * static_cast<double>(t) + cell - 2, std::to_string(t),
                     "end", 9);
            svg.text(left + cell * static_cast<double>(t) + cell / 2, top + side + 12,
                     std::to_string(t), "middle", 9);
        }
    }
    return svg.str();
}

std::string per_class_svg(std::span<const double> values) {
    return bar_chart(values, "class-wise accuracy");
}

std::string report_svg(const ClassificationReport& report) {
    std::vector<double> f1(report.classes.size());
    for (std::size_t c = 0; c < f1.size(); ++c) f1[c] = report.classes[c].f1;
    return bar_chart(f1, "per-class F1 (accuracy " + format6(report.accuracy) + ")");
}

void render_reports(const ConfusionMatrix& cm, const ClassificationReport& report,
                    std::span<const CurvePoint> curves, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw MetricsError("cannot create " + out_dir.string() + ": " + ec.message());
    const auto accuracy_per_class = per_class_accuracy(cm);
    write_confusion_csv(out_dir / "confusion_matrix.csv", cm);
    write_report_csv(out_dir / "classification_report.csv", report);
    write_per_class_csv(out_dir / "per_class_accuracy.csv", accuracy_per_class);
    write_curves_csv(out_dir / "curves.csv", curves);
    write_text(out_dir / "confusion_matrix.svg", confusion_svg(cm));
    write_text(out_dir / "classification_report.svg", report_svg(report));
    write_text(out_dir / "per_class_accuracy.svg", per_class_svg(accuracy_per_class));
    write_text(out_dir / "curves.svg", curves_svg(curves));
}

std::vector<fs::path> render_svgs_from_csv(const fs::path& dir) {
    std::vector<fs::path> written;
    auto emit = [&](const char* name, const std::string& svg) {
        const fs::path out = dir / name;
        write_text(out, svg);
        written.push_back(out);
    };
    if (fs::exists(dir / "curves.csv")) {
        emit("curves.svg", curves_svg(read_curves_csv(dir / "curves.csv")));
    }
    if (fs::exists(dir / "confusion_matrix.csv")) {
        emit("confusion_matrix.svg", confusion_svg(read_confusion_csv(dir / "confusion_matrix.csv")));
    }
    if (fs::exists(dir / "classification_report.csv")) {
        emit("classification_report.svg",
             report_svg(read_report_csv(dir / "classification_report.csv")));
    }
    if (fs::exists(dir / "per_class_accuracy.csv")) {
        emit("per_class_accuracy.svg", per_class_svg(read_per_class_csv(dir / "per_class_accuracy.csv")));
    }
    if (written.empty()) {
        throw MetricsError("no report inputs (curves.csv, confusion_matrix.csv, "
                           "classification_report.csv, per_class_accuracy.csv) in " + dir.string());
    }
    return written;
}

}  // namespace tsr
