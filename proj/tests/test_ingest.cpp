#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fedscreen/error.hpp"
#include "fedscreen/ingest.hpp"
#include "fedscreen/synthgen.hpp"
#include "support.hpp"

using namespace fedscreen;
using namespace fedscreen::ingest;

namespace {

const char* kHeader = "age,gender,RBC,HB,HCT,MCV,MCH,MCHC,RDW,PLT,WBC,class";

RawTable parse(const std::string& csv) {
    std::istringstream in(csv);
    return read_raw_csv(in, default_schema());
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::invalid_input;
}

std::vector<BinnedRecord> sorted(std::vector<BinnedRecord> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("extra columns are dropped and listed") {
    const auto t = parse("name,age,gender,RBC,HB,HCT,MCV,MCH,MCHC,RDW,PLT,WBC,class,address\n"
                         "Ann,30,female,4.5,13,40,90,30,34,13,250,7,0,Main St\n");
    CHECK(t.report.columns_dropped == std::vector<std::string>{"name", "address"});
    REQUIRE(t.records.size() == 1);
    CHECK(*t.records[0].age_years == 30);
    CHECK(*t.records[0].gender == Gender::female);
    CHECK(*t.records[0].cbc[1] == 13);
    CHECK(*t.records[0].label == Label::non_carrier);
}

TEST_CASE("header and content errors") {
    CHECK(code_of([] { parse(std::string(kHeader) + "\n"); }) == ErrorCode::empty_dataset);
    CHECK(code_of([] { parse("age,gender,RBC,class\n1,m,4,0\n"); }) == ErrorCode::header_mismatch);
    CHECK(code_of([] { parse(""); }) == ErrorCode::header_mismatch);
    CHECK(code_of([] { load_raw_csv("/nonexistent/raw.csv", default_schema()); }) == ErrorCode::file_not_found);
}

TEST_CASE("malformed cells are missing; gender and class spellings") {
    const auto t = parse(std::string(kHeader) +
                         "\n30,M,4.5,abc,40,90,30,34,13,250,7,1"
                         "\n30,F,4.5,13,40,90,30,34,13,250,7,0"
                         "\n30,Male,4.5,13,40,90,30,34,13,250,7,0"
                         "\n30,1,4.5,13,40,90,30,34,13,250,7,0"
                         "\n30,0,4.5,13,40,90,30,34,13,250,7,0"
                         "\n30,other,4.5,13,40,90,30,34,13,250,7,2"
                         "\n-3,female,4.5,13,40,90,30,34,13,250,7,1\n");
    REQUIRE(t.records.size() == 7);
    CHECK(!t.records[0].cbc[1]);
    CHECK(*t.records[0].gender == Gender::male);
    CHECK(*t.records[1].gender == Gender::female);
    CHECK(*t.records[2].gender == Gender::male);
    CHECK(*t.records[3].gender == Gender::male);
    CHECK(*t.records[4].gender == Gender::female);
    CHECK(!t.records[5].gender);
    CHECK(!t.records[5].label);
    CHECK(!t.records[6].age_years);
}

TEST_CASE("raw CSV write/read round trip") {
    synth::GenConfig cfg;
    cfg.n_total = 200;
    cfg.n_carrier = 80;
    const auto rows = synth::generate(cfg);
    std::stringstream ss;
    write_raw_csv(ss, rows, default_schema());
    const auto back = read_raw_csv(ss, default_schema());
    CHECK(back.records == rows);
}

TEST_CASE("clean: drop mode") {
    const auto t = parse(std::string(kHeader) +
                         "\n30,m,4.5,14,47,85,30,34,13,250,7,1"
                         "\n31,m,4.5,14,47,,30,34,13,250,7,0"
                         "\n32,m,4.5,14,47,95,30,34,13,250,7,0\n");
    const auto c = clean(t, MissingMode::drop);
    CHECK(c.records.size() == 2);
    CHECK(c.report.rows_dropped_missing == 1);
    CHECK(c.report.rows_kept == c.report.rows_read - c.report.rows_dropped_missing);
    for (const auto& r : c.records) CHECK(r.complete());
}

TEST_CASE("clean: neighbor average") {
    const auto t = parse(std::string(kHeader) +
                         "\n30,m,4.5,14,47,80,30,34,13,250,7,1"
                         "\n31,m,4.5,14,47,,30,34,13,250,7,0"
                         "\n32,m,4.5,14,47,100,30,34,13,250,7,0"
                         "\n33,m,4.5,14,47,,30,34,13,250,7,"
                         "\n34,m,4.5,14,47,,30,34,13,250,7,1\n");
    const auto c = clean(t, MissingMode::neighbor_average);
    REQUIRE(c.records.size() == 4);  // row without a label is still dropped
    CHECK(*c.records[1].cbc[3] == 90.0);
    CHECK(*c.records[3].cbc[3] == 100.0);  // only a preceding neighbor exists
    CHECK(c.report.cells_imputed == 2);
    CHECK(c.report.rows_dropped_missing == 1);
}

TEST_CASE("clean is the identity without missing values") {
    synth::GenConfig cfg;
    cfg.n_total = 100;
    cfg.n_carrier = 30;
    RawTable t;
    t.records = synth::generate(cfg);
    CHECK(clean(t, MissingMode::drop).records == t.records);
    CHECK(clean(t, MissingMode::neighbor_average).records == t.records);
}

TEST_CASE("clean errors when nothing survives") {
    const auto t = parse(std::string(kHeader) + "\n30,m,4.5,14,47,,30,34,13,250,7,1\n");
    CHECK(code_of([&] { clean(t, MissingMode::drop); }) == ErrorCode::all_rows_dropped);
    CHECK(parse_missing_mode("neighbor-average") == MissingMode::neighbor_average);
    CHECK(parse_missing_mode("drop") == MissingMode::drop);
    CHECK_THROWS_AS(parse_missing_mode("mean"), Error);
}

TEST_CASE("train/validation split") {
    const auto data = testing::random_dataset(1, 5066);
    const auto [train, val] = train_val_split(data, SplitSpec{0.7, 42, 3});
    CHECK(train.size() == 3546);
    CHECK(val.size() == 1520);
    std::vector<BinnedRecord> all = train.records;
    all.insert(all.end(), val.records.begin(), val.records.end());
    CHECK(sorted(all) == sorted(data.records));
    CHECK(train.provenance.find("seed=42") != std::string::npos);

    const auto ten = testing::random_dataset(2, 10);
    CHECK(train_val_split(ten, SplitSpec{0.7, 7, 3}) == train_val_split(ten, SplitSpec{0.7, 7, 3}));
    CHECK(train_val_split(ten, SplitSpec{0.7, 7, 3}).first.size() == 7);

    const auto two = testing::random_dataset(3, 2);
    const auto [t2, v2] = train_val_split(two, SplitSpec{0.7, 1, 1});
    CHECK(t2.size() == 1);
    CHECK(v2.size() == 1);

    const auto one = testing::random_dataset(3, 1);
    CHECK(code_of([&] { train_val_split(one, SplitSpec{0.7, 1, 1}); }) == ErrorCode::degenerate_split);
}

TEST_CASE("client partition sizes and multiset") {
    const auto data = testing::random_dataset(4, 5066);
    const auto shards = partition_clients(data, 3, 11);
    REQUIRE(shards.size() == 3);
    CHECK(shards[0].size() == 1689);
    CHECK(shards[1].size() == 1689);
    CHECK(shards[2].size() == 1688);
    std::vector<BinnedRecord> all;
    for (const auto& s : shards) all.insert(all.end(), s.records.begin(), s.records.end());
    CHECK(sorted(all) == sorted(data.records));
    CHECK(partition_clients(data, 3, 11) == shards);

    const auto six = testing::random_dataset(5, 6);
    for (const auto& s : partition_clients(six, 3, 0)) CHECK(s.size() == 2);
    const auto single = partition_clients(six, 1, 0);
    CHECK(sorted(single[0].records) == sorted(six.records));
    CHECK(code_of([&] { partition_clients(six, 7, 0); }) == ErrorCode::too_few_records);
}

TEST_CASE("split then partition preserves the multiset") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = testing::random_dataset(seed, 50 + seed * 7);
        const auto [train, val] = train_val_split(data, SplitSpec{0.7, seed, 3});
        const auto shards = partition_clients(train, 3, seed + 1);
        std::vector<BinnedRecord> all = val.records;
        for (const auto& s : shards) all.insert(all.end(), s.records.begin(), s.records.end());
        CHECK(sorted(all) == sorted(data.records));
    }
}

TEST_CASE("binned CSV round trip and validation") {
    const auto data = testing::random_dataset(8, 300);
    std::stringstream ss;
    write_binned_csv(ss, data);
    CHECK(read_binned_csv(ss).records == data.records);

    std::istringstream bad("rbc,hb,hct,mcv,mch,mchc,rdw,plt,wbc,gender,age,class\n1,2,3,4,5,6,1,1,1,1,1,1\n");
    CHECK(code_of([&] { read_binned_csv(bad); }) == ErrorCode::invalid_input);
    std::istringstream hdr("a,b\n1,2\n");
    CHECK(code_of([&] { read_binned_csv(hdr); }) == ErrorCode::header_mismatch);

    testing::TempDir dir("binned");
    save_binned_csv(dir / "d.csv", data);
    CHECK(load_binned_csv(dir / "d.csv").records == data.records);
}
