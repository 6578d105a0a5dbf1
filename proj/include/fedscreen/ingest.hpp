#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fedscreen/dataset.hpp"
#include "fedscreen/schema.hpp"

namespace fedscreen::ingest {

struct CleaningReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_missing = 0;
    std::vector<std::string> columns_dropped;
    std::size_t rows_kept = 0;
    std::size_t cells_imputed = 0;

    bool operator==(const CleaningReport&) const = default;
};

struct RawTable {
    std::vector<RawRecord> records;
    CleaningReport report;
};

enum class MissingMode { drop, neighbor_average };

MissingMode parse_missing_mode(const std::string& s);
std::string to_string(MissingMode m);

// Raw CSV: header names the schema analytes plus age, gender and class (any
// order, case-insensitive). Other columns are ignored and listed in the
// report. Unparseable cells become missing values.
RawTable load_raw_csv(const std::filesystem::path& path, const FeatureSchema& schema);
RawTable read_raw_csv(std::istream& in, const FeatureSchema& schema);

// Writes age,gender,<analytes>,class with missing cells left empty.
void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records, const FeatureSchema& schema);

// drop: any record with a missing field is removed.
// neighbor_average: records without age, gender or label are removed, then a
// missing analyte is replaced by the mean of the nearest earlier and later
// observed values in that column (or the single one that exists).
RawTable clean(const RawTable& table, MissingMode mode);

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    std::size_t client_count = 3;
};

// Seeded shuffle, then the first floor(train_fraction * n) rows train.
std::pair<Dataset, Dataset> train_val_split(const Dataset& data, const SplitSpec& spec);

// Seeded shuffle, then contiguous shards; the first n mod k shards get one
// extra row.
std::vector<Dataset> partition_clients(const Dataset& train, std::size_t k, std::uint64_t seed);

// Binned CSV: rbc,hb,hct,mcv,mch,mchc,rdw,plt,wbc,gender,age,class.
void write_binned_csv(std::ostream& out, const Dataset& data);
Dataset read_binned_csv(std::istream& in);
void save_binned_csv(const std::filesystem::path& path, const Dataset& data);
Dataset load_binned_csv(const std::filesystem::path& path);

}  // namespace fedscreen::ingest
