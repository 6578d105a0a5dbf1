#include "fedscreen/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "fedscreen/error.hpp"
#include "fedscreen/fileio.hpp"

namespace fedscreen::metrics {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pct_or_na(const std::optional<double>& v) { return v ? fixed(*v, 2) : "n/a"; }

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) {
        throw Error(ErrorCode::length_mismatch, "confusion: predictions and labels differ in length");
    }
    if (preds.empty()) throw Error(ErrorCode::empty_input, "confusion: no rows");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == 1;
        const bool y = labels[i] == 1;
        if (p && y) ++cm.tp;
        else if (p && !y) ++cm.fp;
        else if (!p && !y) ++cm.tn;
        else ++cm.fn;
    }
    return cm;
}

std::string to_string(SplitTag t) { return t == SplitTag::train ? "train" : "validation"; }

SplitTag parse_split_tag(const std::string& s) {
    if (s == "train") return SplitTag::train;
    if (s == "validation") return SplitTag::validation;
    throw Error(ErrorCode::invalid_config, "split tag must be train or validation");
}

EvalReport report(const ConfusionMatrix& cm, SplitTag tag) {
    EvalReport r;
    r.confusion = cm;
    r.n = cm.total();
    r.split_tag = tag;
    if (r.n == 0) throw Error(ErrorCode::empty_input, "report: empty confusion matrix");
    r.accuracy_pct = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(r.n);
    r.miss_rate_pct = 100.0 - r.accuracy_pct;
    if (cm.tp + cm.fn > 0) r.sensitivity_pct = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tn + cm.fp > 0) r.specificity_pct = 100.0 * static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    return r;
}

void RoundLog::append(const RoundEntry& e) {
    const std::size_t expected_min = entries_.empty() ? 1 : entries_.back().round_index + 1;
    if (e.round_index < expected_min) {
        throw Error(ErrorCode::invalid_input, "round indices must start at 1 and strictly increase");
    }
    entries_.push_back(e);
}

std::string curves_csv(const RoundLog& log) {
    if (log.empty()) throw Error(ErrorCode::empty_input, "curves: empty round log");
    std::string out = "round,train_acc,val_acc\n";
    for (const auto& e : log.entries()) {
        out += std::to_string(e.round_index) + ',' + fixed(e.train_accuracy, 6) + ',' + fixed(e.val_accuracy, 6) + '\n';
    }
    return out;
}

void emit_curves(const RoundLog& log, const std::filesystem::path& path) {
    const std::string csv = curves_csv(log);
    io::write_file(path, csv);
}

ReportFormat parse_report_format(const std::string& s) {
    if (s == "text") return ReportFormat::text;
    if (s == "csv") return ReportFormat::csv;
    throw Error(ErrorCode::invalid_config, "report format must be text or csv");
}

std::string render(const ReportTable& table, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "approach,split,n,tp,fp,tn,fn,accuracy_pct,miss_rate_pct,sensitivity_pct,specificity_pct\n";
        for (const auto& row : table.rows) {
            const auto& r = row.eval;
            out << csv_field(row.approach) << ',' << to_string(r.split_tag) << ',' << r.n << ',' << r.confusion.tp
                << ',' << r.confusion.fp << ',' << r.confusion.tn << ',' << r.confusion.fn << ','
                << fixed(r.accuracy_pct, 6) << ',' << fixed(r.miss_rate_pct, 6) << ','
                << (r.sensitivity_pct ? fixed(*r.sensitivity_pct, 6) : "") << ','
                << (r.specificity_pct ? fixed(*r.specificity_pct, 6) : "") << '\n';
        }
        return out.str();
    }

    std::size_t width = 8;
    for (const auto& row : table.rows) width = std::max(width, row.approach.size());
    width += 2;
    if (!table.title.empty()) out << table.title << "\n\n";
    out << pad("Approach", width) << pad("Split", 12) << pad("Accuracy", 10) << "Miss rate\n";
    out << std::string(width + 12 + 10 + 9, '-') << '\n';
    for (const auto& row : table.rows) {
        out << pad(row.approach, width) << pad(to_string(row.eval.split_tag), 12)
            << pad(fixed(row.eval.accuracy_pct, 2) + "%", 10) << fixed(row.eval.miss_rate_pct, 2) << "%\n";
    }
    for (const auto& row : table.rows) {
        const auto& r = row.eval;
        const auto& cm = r.confusion;
        out << '\n' << row.approach << " (" << to_string(r.split_tag) << ", n=" << r.n << ")\n";
        out << "                      predicted carrier  predicted non-carrier\n";
        out << "  actual carrier      " << pad(std::to_string(cm.tp), 19) << cm.fn << '\n';
        out << "  actual non-carrier  " << pad(std::to_string(cm.fp), 19) << cm.tn << '\n';
        out << "  misclassified: " << cm.fp << " non-carrier, " << cm.fn << " carrier\n";
        out << "  sensitivity: " << pct_or_na(r.sensitivity_pct) << (r.sensitivity_pct ? "%" : "")
            << "  specificity: " << pct_or_na(r.specificity_pct) << (r.specificity_pct ? "%" : "") << '\n';
    }
    out << "\nNotes:\n  [1] Miss rate is 100 - accuracy (the share of misclassified rows).\n";
    for (std::size_t i = 0; i < table.notes.size(); ++i) out << "  [" << i + 2 << "] " << table.notes[i] << '\n';
    return out.str();
}

}  // namespace fedscreen::metrics
