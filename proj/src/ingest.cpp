#include "fedscreen/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "fedscreen/error.hpp"
#include "fedscreen/rng.hpp"
#include "text.hpp"

namespace fedscreen::ingest {

namespace {

constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);

std::optional<Gender> parse_gender(std::string_view cell) {
    const std::string s = text::lower(text::trim(cell));
    if (s == "male" || s == "m" || s == "1") return Gender::male;
    if (s == "female" || s == "f" || s == "0") return Gender::female;
    return std::nullopt;
}

std::optional<Label> parse_label(std::string_view cell) {
    const auto v = text::parse_int(cell);
    if (v && *v == 0) return Label::non_carrier;
    if (v && *v == 1) return Label::carrier;
    return std::nullopt;
}

std::optional<double> parse_measure(std::string_view cell) {
    const auto v = text::parse_double(cell);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return v;
}

std::string describe_split(const char* side, const SplitSpec& spec) {
    return std::string("split(") + side + ",seed=" + std::to_string(spec.seed) +
           ",fraction=" + text::format_double(spec.train_fraction) + ")";
}

Dataset with_records(const Dataset& like, std::vector<BinnedRecord> records, const std::string& tag) {
    Dataset d;
    d.schema = like.schema;
    d.records = std::move(records);
    d.provenance = like.provenance.empty() ? tag : like.provenance + ";" + tag;
    return d;
}

}  // namespace

MissingMode parse_missing_mode(const std::string& s) {
    const std::string m = text::lower(s);
    if (m == "drop") return MissingMode::drop;
    if (m == "neighbor-average" || m == "neighbor_average") return MissingMode::neighbor_average;
    throw Error(ErrorCode::invalid_config, "unknown missing-value mode '" + s + "'");
}

std::string to_string(MissingMode m) { return m == MissingMode::drop ? "drop" : "neighbor-average"; }

RawTable read_raw_csv(std::istream& in, const FeatureSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::header_mismatch, "raw CSV has no header row");
    const auto header = text::parse_csv_line(text::strip_cr(line));

    std::size_t age_col = kNoColumn, gender_col = kNoColumn, class_col = kNoColumn;
    std::array<std::size_t, kCbcCount> cbc_col;
    cbc_col.fill(kNoColumn);

    RawTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string_view name = text::trim(header[c]);
        if (text::iequals(name, "age")) {
            age_col = c;
        } else if (text::iequals(name, "gender")) {
            gender_col = c;
        } else if (text::iequals(name, schema.class_name())) {
            class_col = c;
        } else if (const std::size_t f = schema.index_of(name); f < kCbcCount) {
            cbc_col[f] = c;
        } else {
            table.report.columns_dropped.emplace_back(name);
        }
    }

    std::string missing;
    auto require = [&missing](std::size_t col, std::string_view name) {
        if (col == kNoColumn) missing += (missing.empty() ? "" : ", ") + std::string(name);
    };
    require(age_col, "age");
    require(gender_col, "gender");
    for (std::size_t f = 0; f < kCbcCount; ++f) require(cbc_col[f], schema[f].name);
    require(class_col, schema.class_name());
    if (!missing.empty()) throw Error(ErrorCode::header_mismatch, "raw CSV lacks required columns: " + missing);

    while (std::getline(in, line)) {
        line = text::strip_cr(line);
        if (text::trim(line).empty()) continue;
        const auto cells = text::parse_csv_line(line);
        auto cell = [&cells](std::size_t c) -> std::string_view {
            return c < cells.size() ? std::string_view(cells[c]) : std::string_view();
        };
        RawRecord r;
        r.age_years = parse_measure(cell(age_col));
        if (r.age_years && *r.age_years < 0.0) r.age_years.reset();
        r.gender = parse_gender(cell(gender_col));
        for (std::size_t f = 0; f < kCbcCount; ++f) r.cbc[f] = parse_measure(cell(cbc_col[f]));
        r.label = parse_label(cell(class_col));
        table.records.push_back(r);
    }
    if (table.records.empty()) throw Error(ErrorCode::empty_dataset, "raw CSV has no data rows");
    table.report.rows_read = table.records.size();
    table.report.rows_kept = table.records.size();
    return table;
}

RawTable load_raw_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
    return read_raw_csv(in, schema);
}

void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records, const FeatureSchema& schema) {
    out << "age,gender";
    for (const FeatureDef& f : schema.features()) out << ',' << f.name;
    out << ',' << schema.class_name() << '\n';
    for (const RawRecord& r : records) {
        if (r.age_years) out << text::format_double(*r.age_years);
        out << ',';
        if (r.gender) out << (*r.gender == Gender::male ? "male" : "female");
        for (const auto& v : r.cbc) {
            out << ',';
            if (v) out << text::format_double(*v);
        }
        out << ',';
        if (r.label) out << static_cast<int>(*r.label);
        out << '\n';
    }
}

RawTable clean(const RawTable& table, MissingMode mode) {
    if (table.records.empty()) throw Error(ErrorCode::empty_dataset, "clean: no records");
    RawTable out;
    out.report = table.report;
    out.report.rows_read = table.records.size();

    for (const RawRecord& r : table.records) {
        const bool keep = mode == MissingMode::drop ? r.complete() : (r.age_years && r.gender && r.label);
        if (keep) out.records.push_back(r);
    }

    if (mode == MissingMode::neighbor_average) {
        auto& recs = out.records;
        for (std::size_t f = 0; f < kCbcCount; ++f) {
            // Imputed cells must not feed later imputations, so read from a snapshot.
            std::vector<std::optional<double>> column(recs.size());
            for (std::size_t i = 0; i < recs.size(); ++i) column[i] = recs[i].cbc[f];
            for (std::size_t i = 0; i < recs.size(); ++i) {
                if (column[i]) continue;
                std::optional<double> before, after;
                for (std::size_t j = i; j-- > 0;) {
                    if (column[j]) { before = column[j]; break; }
                }
                for (std::size_t j = i + 1; j < recs.size(); ++j) {
                    if (column[j]) { after = column[j]; break; }
                }
                if (before && after) {
                    recs[i].cbc[f] = (*before + *after) / 2.0;
                } else if (before || after) {
                    recs[i].cbc[f] = before ? *before : *after;
                } else {
                    continue;  // whole column empty; row dropped below
                }
                ++out.report.cells_imputed;
            }
        }
        std::erase_if(recs, [](const RawRecord& r) { return !r.complete(); });
    }

    out.report.rows_kept = out.records.size();
    out.report.rows_dropped_missing = out.report.rows_read - out.report.rows_kept;
    if (out.records.empty()) throw Error(ErrorCode::all_rows_dropped, "no record survived cleaning");
    return out;
}

std::pair<Dataset, Dataset> train_val_split(const Dataset& data, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw Error(ErrorCode::invalid_config, "train fraction must lie in (0, 1)");
    }
    const std::size_t n = data.size();
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        throw Error(ErrorCode::degenerate_split, "split of " + std::to_string(n) + " rows leaves an empty side");
    }
    const auto perm = seeded_permutation(n, spec.seed);
    std::vector<BinnedRecord> train, val;
    train.reserve(n_train);
    val.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? train : val).push_back(data.records[perm[i]]);
    }
    return {with_records(data, std::move(train), describe_split("train", spec)),
            with_records(data, std::move(val), describe_split("validation", spec))};
}

std::vector<Dataset> partition_clients(const Dataset& train, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw Error(ErrorCode::invalid_config, "client count must be positive");
    const std::size_t n = train.size();
    if (n < k) {
        throw Error(ErrorCode::too_few_records,
                    std::to_string(n) + " records cannot fill " + std::to_string(k) + " client shards");
    }
    const auto perm = seeded_permutation(n, seed);
    std::vector<Dataset> shards;
    shards.reserve(k);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t size = n / k + (c < n % k ? 1 : 0);
        std::vector<BinnedRecord> recs;
        recs.reserve(size);
        for (std::size_t i = 0; i < size; ++i) recs.push_back(train.records[perm[pos++]]);
        shards.push_back(with_records(
            train, std::move(recs),
            "shard(" + std::to_string(c) + "/" + std::to_string(k) + ",seed=" + std::to_string(seed) + ")"));
    }
    return shards;
}

void write_binned_csv(std::ostream& out, const Dataset& data) {
    out << "rbc,hb,hct,mcv,mch,mchc,rdw,plt,wbc,gender,age,class\n";
    for (const BinnedRecord& r : data.records) {
        for (std::size_t f = 0; f < kCbcCount; ++f) out << static_cast<int>(r.bins[f]) << ',';
        out << static_cast<int>(r.gender_bin) << ',' << static_cast<int>(r.age_bin) << ','
            << static_cast<int>(r.label) << '\n';
    }
}

Dataset read_binned_csv(std::istream& in) {
    static constexpr std::string_view kHeader[] = {"rbc", "hb",   "hct", "mcv",    "mch", "mchc",
                                                   "rdw", "plt",  "wbc", "gender", "age", "class"};
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::header_mismatch, "binned CSV has no header row");
    line = text::strip_cr(line);
    const auto header = text::split(line, ',');
    bool ok = header.size() == std::size(kHeader);
    for (std::size_t i = 0; ok && i < header.size(); ++i) ok = text::iequals(text::trim(header[i]), kHeader[i]);
    if (!ok) {
        throw Error(ErrorCode::header_mismatch,
                    "binned CSV header must be rbc,hb,hct,mcv,mch,mchc,rdw,plt,wbc,gender,age,class");
    }
    Dataset d;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = text::strip_cr(line);
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(line, ',');
        int v[12];
        bool good = cells.size() == 12;
        for (std::size_t i = 0; good && i < 12; ++i) {
            const auto parsed = text::parse_int(cells[i]);
            good = parsed.has_value() && *parsed >= 0 && *parsed <= (i < kCbcCount ? 5 : 1);
            if (good) v[i] = static_cast<int>(*parsed);
        }
        if (!good) {
            throw Error(ErrorCode::invalid_input, "binned CSV line " + std::to_string(line_no) + " is malformed");
        }
        BinnedRecord r;
        for (std::size_t f = 0; f < kCbcCount; ++f) r.bins[f] = static_cast<std::uint8_t>(v[f]);
        r.gender_bin = static_cast<std::uint8_t>(v[9]);
        r.age_bin = static_cast<std::uint8_t>(v[10]);
        r.label = static_cast<std::uint8_t>(v[11]);
        d.records.push_back(r);
    }
    if (d.records.empty()) throw Error(ErrorCode::empty_dataset, "binned CSV has no data rows");
    return d;
}

void save_binned_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    write_binned_csv(out, data);
    if (!out) throw Error(ErrorCode::io_failure, "write failed: " + path.string());
}

Dataset load_binned_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
    Dataset d = read_binned_csv(in);
    d.provenance = path.filename().string();
    return d;
}

}  // namespace fedscreen::ingest
