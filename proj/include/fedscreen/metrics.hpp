#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedscreen::metrics {

// Positive class is carrier (label 1).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels);

enum class SplitTag { train, validation };
std::string to_string(SplitTag t);
SplitTag parse_split_tag(const std::string& s);

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy_pct = 0.0;
    // Defined as 100 - accuracy_pct: the share of misclassified rows.
    double miss_rate_pct = 0.0;
    std::optional<double> sensitivity_pct;  // absent when there are no carriers
    std::optional<double> specificity_pct;  // absent when there are no non-carriers
    std::size_t n = 0;
    SplitTag split_tag = SplitTag::validation;

    bool operator==(const EvalReport&) const = default;
};

EvalReport report(const ConfusionMatrix& cm, SplitTag tag);

struct RoundEntry {
    std::size_t round_index = 0;
    double train_accuracy = 0.0;  // percent
    double val_accuracy = 0.0;    // percent

    bool operator==(const RoundEntry&) const = default;
};

// Per-round accuracy series; round indices start at 1 and strictly increase.
class RoundLog {
public:
    void append(const RoundEntry& e);
    const std::vector<RoundEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    bool operator==(const RoundLog&) const = default;

private:
    std::vector<RoundEntry> entries_;
};

// CSV "round,train_acc,val_acc" with six decimals.
std::string curves_csv(const RoundLog& log);
void emit_curves(const RoundLog& log, const std::filesystem::path& path);

// One row of the summary table: an approach and its evaluation.
struct ReportRow {
    std::string approach;
    EvalReport eval;

    bool operator==(const ReportRow&) const = default;
};

struct ReportTable {
    std::string title;
    std::vector<ReportRow> rows;
    std::vector<std::string> notes;

    bool operator==(const ReportTable&) const = default;
};

enum class ReportFormat { text, csv };
ReportFormat parse_report_format(const std::string& s);

// Text: approach / accuracy / miss-rate table, a 2x2 matrix per row and the
// notes as footnotes. CSV: one line per row with every count and rate.
std::string render(const ReportTable& table, ReportFormat format);

}  // namespace fedscreen::metrics
