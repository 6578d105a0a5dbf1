#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedscreen/error.hpp"
#include "fedscreen/federation/aggregate.hpp"
#include "fedscreen/federation/message.hpp"
#include "fedscreen/federation/simulation.hpp"
#include "fedscreen/federation/transport.hpp"
#include "fedscreen/fileio.hpp"
#include "fedscreen/ingest.hpp"
#include "fedscreen/learners/model_io.hpp"
#include "fedscreen/metrics.hpp"
#include "fedscreen/preprocess.hpp"
#include "fedscreen/rng.hpp"
#include "fedscreen/synthgen.hpp"
#include "text.hpp"

namespace fedscreen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string version_text() {
    return std::string("fedscreen ") + kToolVersion + " (protocol version " + std::to_string(fed::kProtocolVersion) +
           ", model file version " + std::to_string(io::kModelFileVersion) + ")";
}

std::string num(double v) { return text::format_double(v); }

std::string pct2(double v) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << v;
    return o.str();
}

json optional_pct(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json eval_to_json(const metrics::EvalReport& r) {
    return {{"split", metrics::to_string(r.split_tag)},
            {"n", r.n},
            {"tp", r.confusion.tp},
            {"fp", r.confusion.fp},
            {"tn", r.confusion.tn},
            {"fn", r.confusion.fn},
            {"accuracy_pct", r.accuracy_pct},
            {"miss_rate_pct", r.miss_rate_pct},
            {"sensitivity_pct", optional_pct(r.sensitivity_pct)},
            {"specificity_pct", optional_pct(r.specificity_pct)}};
}

// Rates are recomputed from the counts.
metrics::EvalReport eval_from_json(const json& j) {
    metrics::ConfusionMatrix cm;
    cm.tp = j.at("tp").get<std::size_t>();
    cm.fp = j.at("fp").get<std::size_t>();
    cm.tn = j.at("tn").get<std::size_t>();
    cm.fn = j.at("fn").get<std::size_t>();
    return metrics::report(cm, metrics::parse_split_tag(j.at("split").get<std::string>()));
}

json table_to_json(const metrics::ReportTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back({{"approach", r.approach}, {"eval", eval_to_json(r.eval)}});
    return {{"title", t.title}, {"rows", rows}, {"notes", t.notes}};
}

metrics::ReportTable table_from_json(const json& j) {
    metrics::ReportTable t;
    t.title = j.at("title").get<std::string>();
    for (const auto& r : j.at("rows")) t.rows.push_back({r.at("approach").get<std::string>(), eval_from_json(r.at("eval"))});
    t.notes = j.at("notes").get<std::vector<std::string>>();
    return t;
}

json read_json_file(const fs::path& p) {
    try {
        return json::parse(io::read_file(p));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_payload, p.string() + ": " + e.what());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot create directory " + dir.string() + ": " + ec.message());
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_payload, e.what()).with_stage(stage);
    }
}

FeatureSchema schema_or_default(const std::string& path) {
    return path.empty() ? default_schema() : load_schema(path);
}

std::vector<learn::ModelKind> parse_kinds(const std::string& s) {
    std::vector<learn::ModelKind> kinds;
    for (auto part : text::split(s, ',')) {
        const auto t = text::trim(part);
        if (!t.empty()) kinds.push_back(learn::parse_model_kind(std::string(t)));
    }
    if (kinds.empty()) throw Error(ErrorCode::invalid_config, "no model kinds given");
    return kinds;
}

std::string kinds_text(const std::vector<learn::ModelKind>& kinds) {
    std::string s;
    for (std::size_t i = 0; i < kinds.size(); ++i) s += (i ? "," : "") + learn::to_string(kinds[i]);
    return s;
}

// Learner flags shared by train-local and run.
struct LearnerFlags {
    std::size_t max_depth = 8;
    std::size_t min_leaf = 5;
    double nb_alpha = 1.0;
    double svm_c = 1.0;
    std::size_t svm_epochs = 50;
    double svm_tolerance = 1e-10;
    double gamma = 0.0;
    std::string svm_encoding = "ordinal";

    void add(CLI::App* app) {
        app->add_option("--max-depth", max_depth, "Decision tree depth limit")->capture_default_str();
        app->add_option("--min-leaf", min_leaf, "Decision tree minimum rows per leaf")->capture_default_str();
        app->add_option("--nb-alpha", nb_alpha, "Naive Bayes Laplace smoothing")->capture_default_str();
        app->add_option("--svm-c", svm_c, "SVM soft-margin constant C")->capture_default_str();
        app->add_option("--svm-epochs", svm_epochs, "SVM coordinate-ascent epoch cap")->capture_default_str();
        app->add_option("--svm-tolerance", svm_tolerance, "SVM early-stop tolerance")->capture_default_str();
        app->add_option("--gamma", gamma, "Kernel gamma carried with SVM models")->capture_default_str();
        app->add_option("--svm-encoding", svm_encoding, "SVM input encoding: ordinal or one-hot")
            ->capture_default_str();
    }

    learn::LearnerHyper hyper() const {
        learn::LearnerHyper h;
        h.dt.max_depth = max_depth;
        h.dt.min_leaf = min_leaf;
        h.nb_alpha = nb_alpha;
        h.svm.C = svm_c;
        h.svm.epochs = svm_epochs;
        h.svm.tolerance = svm_tolerance;
        h.svm.gamma = gamma;
        h.svm.encoding = learn::parse_svm_encoding(svm_encoding);
        return h;
    }

    void write(std::ostream& o) const {
        o << "max-depth=" << max_depth << "\nmin-leaf=" << min_leaf << "\nnb-alpha=" << num(nb_alpha)
          << "\nsvm-c=" << num(svm_c) << "\nsvm-epochs=" << svm_epochs << "\nsvm-tolerance=" << num(svm_tolerance)
          << "\ngamma=" << num(gamma) << "\nsvm-encoding=" << svm_encoding << '\n';
    }
};

struct GenFlags {
    std::size_t rows = 5066;
    std::size_t carriers = 2015;
    double male_fraction = 0.53;
    double adult_fraction = 0.54;
    double signal = 0.9;

    void add(CLI::App* app) {
        app->add_option("--rows", rows, "Synthetic rows")->capture_default_str();
        app->add_option("--carriers", carriers, "Synthetic carrier rows")->capture_default_str();
        app->add_option("--male-fraction", male_fraction, "Share of male patients")->capture_default_str();
        app->add_option("--adult-fraction", adult_fraction, "Share of adults (18 and over)")->capture_default_str();
        app->add_option("--signal", signal, "Carrier signal strength in [0, 1]")->capture_default_str();
    }

    synth::GenConfig config(std::uint64_t seed) const {
        synth::GenConfig g;
        g.n_total = rows;
        g.n_carrier = carriers;
        g.male_fraction = male_fraction;
        g.adult_fraction = adult_fraction;
        g.signal_strength = signal;
        g.seed = seed;
        return g;
    }

    void write(std::ostream& o) const {
        o << "rows=" << rows << "\ncarriers=" << carriers << "\nmale-fraction=" << num(male_fraction)
          << "\nadult-fraction=" << num(adult_fraction) << "\nsignal=" << num(signal) << '\n';
    }
};

struct RunFlags {
    std::string input;
    std::string schema;
    GenFlags gen;
    std::string missing = "drop";
    double train_fraction = 0.7;
    std::size_t clients = 3;
    std::string kinds;
    std::string mode = "paper13";
    std::size_t rounds = 10;
    LearnerFlags learner;
    double prox_mu = 0.1;
    std::string transport = "inproc";
    std::uint16_t port = fed::kDefaultPort;
    std::uint64_t seed = 42;
    std::string out = "out";
    std::string format = "text";
};

std::string render_cleaning(const ingest::CleaningReport& r) {
    std::ostringstream o;
    o << "rows read: " << r.rows_read << "\nrows dropped (missing values): " << r.rows_dropped_missing
      << "\ncells imputed: " << r.cells_imputed << "\nrows kept: " << r.rows_kept << "\ncolumns dropped:";
    if (r.columns_dropped.empty()) o << " none";
    for (const auto& c : r.columns_dropped) o << ' ' << c;
    o << '\n';
    return o.str();
}

void write_text(const fs::path& p, const std::string& s) { io::write_file(p, s); }

// ---- subcommands ----

int cmd_gen(const GenFlags& g, std::uint64_t seed, const std::string& schema_path, const fs::path& out,
            const std::string& output, std::ostream& os) {
    const fs::path target = output.empty() ? out / "raw.csv" : fs::path(output);
    const auto schema = staged("config", [&] { return schema_or_default(schema_path); });
    const auto rows = staged("gen", [&] { return synth::generate(g.config(seed), schema); });
    staged("write", [&] {
        if (target.has_parent_path()) ensure_dir(target.parent_path());
        std::ostringstream csv;
        ingest::write_raw_csv(csv, rows, schema);
        write_text(target, csv.str());
    });
    os << "wrote " << rows.size() << " rows (" << g.carriers << " carriers) to " << target.string() << '\n';
    return 0;
}

int cmd_preprocess(const std::string& input, const std::string& schema_path, const std::string& missing,
                   const fs::path& out, const std::string& output, std::ostream& os) {
    const fs::path target = output.empty() ? out / "binned.csv" : fs::path(output);
    const auto schema = staged("config", [&] { return schema_or_default(schema_path); });
    const auto mode = staged("config", [&] { return ingest::parse_missing_mode(missing); });
    const auto raw = staged("ingest", [&] { return ingest::load_raw_csv(input, schema); });
    const auto cleaned = staged("clean", [&] { return ingest::clean(raw, mode); });
    auto data = staged("preprocess", [&] { return preprocess::normalize_dataset(cleaned.records, schema); });
    staged("write", [&] {
        const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
        ensure_dir(dir);
        ingest::save_binned_csv(target, data);
        write_text(dir / "cleaning.txt", render_cleaning(cleaned.report));
    });
    os << render_cleaning(cleaned.report) << "wrote " << data.size() << " binned rows to " << target.string()
       << '\n';
    return 0;
}

int cmd_split(const std::string& input, double fraction, std::size_t clients, std::uint64_t seed, const fs::path& out,
              std::ostream& os) {
    const auto data = staged("ingest", [&] { return ingest::load_binned_csv(input); });
    auto [train, val] = staged("split", [&] {
        return ingest::train_val_split(data, ingest::SplitSpec{fraction, seed, clients});
    });
    const auto shards = staged("split", [&] { return ingest::partition_clients(train, clients, derive_seed(seed, 1)); });
    staged("write", [&] {
        ensure_dir(out);
        ingest::save_binned_csv(out / "train.csv", train);
        ingest::save_binned_csv(out / "val.csv", val);
        for (std::size_t i = 0; i < shards.size(); ++i) {
            ingest::save_binned_csv(out / ("shard_" + std::to_string(i + 1) + ".csv"), shards[i]);
        }
    });
    os << "train " << train.size() << ", validation " << val.size() << ", shards";
    for (const auto& s : shards) os << ' ' << s.size();
    os << '\n';
    return 0;
}

int cmd_train_local(const std::string& input, const std::string& kind_s, std::uint32_t id, std::uint64_t seed,
                    const LearnerFlags& lf, const fs::path& out, std::ostream& os) {
    const auto kind = staged("config", [&] { return learn::parse_model_kind(kind_s); });
    auto hyper = staged("config", [&] { return lf.hyper(); });
    hyper.svm.seed = derive_seed(seed, 100 + id);
    const auto shard = staged("ingest", [&] { return ingest::load_binned_csv(input); });
    const auto model = staged("train", [&] { return fed::client_train(id, shard, kind, hyper); });
    const fs::path path = out / ("client_" + std::to_string(id) + "_" + kind_s + ".json");
    staged("write", [&] {
        ensure_dir(out);
        io::save_model(path, model);
    });
    os << "client " << id << " (" << kind_s << "): train accuracy " << pct2(100.0 * model.meta.train_accuracy)
       << "% on " << model.meta.train_size << " rows; wrote " << path.string() << '\n';
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& input, const std::string& split, std::string name,
             const std::string& format, const fs::path& out, std::ostream& os) {
    const auto tag = staged("config", [&] { return metrics::parse_split_tag(split); });
    const auto fmt = staged("config", [&] { return metrics::parse_report_format(format); });
    const auto data = staged("ingest", [&] { return ingest::load_binned_csv(input); });
    const auto eval = staged("evaluate", [&] {
        const json j = read_json_file(model_path);
        if (j.is_object() && j.value("type", "") == "global") {
            if (name.empty()) name = "Global model";
            return fed::evaluate_global(fed::global_model_from_json(j), data, tag);
        }
        const auto local = io::local_model_from_json(j);
        if (name.empty()) {
            name = "Local client " + std::to_string(local.meta.client_id) + " (" + learn::to_string(local.kind()) + ")";
        }
        std::vector<int> preds, labels;
        for (const auto& r : data.records) {
            preds.push_back(local.predict(learn::to_input(r)));
            labels.push_back(r.label);
        }
        return metrics::report(metrics::confusion(preds, labels), tag);
    });
    metrics::ReportTable table;
    table.rows.push_back({name, eval});
    const std::string rendered = metrics::render(table, fmt);
    staged("write", [&] {
        ensure_dir(out);
        write_text(out / "eval.json", json{{"approach", name}, {"eval", eval_to_json(eval)}}.dump(1) + "\n");
    });
    os << rendered;
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& title, const std::string& format,
               const fs::path& out, std::ostream& os) {
    const auto fmt = staged("config", [&] { return metrics::parse_report_format(format); });
    metrics::ReportTable table = staged("report", [&] {
        metrics::ReportTable t;
        for (const auto& in : inputs) {
            const json j = read_json_file(in);
            if (j.contains("table")) {
                auto part = table_from_json(j.at("table"));
                if (t.title.empty()) t.title = part.title;
                t.rows.insert(t.rows.end(), part.rows.begin(), part.rows.end());
                t.notes.insert(t.notes.end(), part.notes.begin(), part.notes.end());
            } else if (j.contains("eval")) {
                t.rows.push_back({j.at("approach").get<std::string>(), eval_from_json(j.at("eval"))});
            } else {
                throw Error(ErrorCode::malformed_payload, in + ": neither a run summary nor an evaluation");
            }
        }
        if (!title.empty()) t.title = title;
        return t;
    });
    const std::string rendered = metrics::render(table, fmt);
    staged("write", [&] {
        ensure_dir(out);
        write_text(out / (fmt == metrics::ReportFormat::csv ? "report.csv" : "report.txt"), rendered);
    });
    os << rendered;
    return 0;
}

void write_run_config(std::ostream& o, const RunFlags& f, const std::string& kinds) {
    o << "# fedscreen run configuration\n";
    if (!f.input.empty()) o << "input=" << f.input << '\n';
    if (!f.schema.empty()) o << "schema=" << f.schema << '\n';
    f.gen.write(o);
    o << "missing=" << f.missing << "\ntrain-fraction=" << num(f.train_fraction) << "\nclients=" << f.clients
      << "\nkinds=" << kinds << "\nmode=" << f.mode << "\nrounds=" << f.rounds << '\n';
    f.learner.write(o);
    o << "prox-mu=" << num(f.prox_mu) << "\ntransport=" << f.transport << "\nport=" << f.port << "\nseed=" << f.seed
      << '\n';
}

metrics::ReportTable run_table(const fed::SimulationConfig& cfg, const fed::SimulationResult& r) {
    metrics::ReportTable t;
    t.title = "Carrier screening, " + fed::to_string(cfg.mode) + " aggregation, " + std::to_string(cfg.clients) +
              " clients, seed " + std::to_string(cfg.seed);
    for (const auto& l : r.local_summaries) {
        t.rows.push_back({"Local client " + std::to_string(l.client_id) + " (" + learn::to_string(l.kind) + ")",
                          l.validation});
    }
    t.rows.push_back({"Global model", r.training});
    t.rows.push_back({"Global model", r.validation});
    if (r.aggregation) {
        for (const auto& n : r.aggregation->notes) t.notes.push_back(n);
    }
    if (cfg.mode == fed::AggregationMode::fedavg) {
        t.notes.push_back("local rows show each client's final (w, b) update; training rows never left the clients");
    } else {
        t.notes.push_back("client training shards were sent to the coordinator to build the global dataset");
    }
    t.notes.push_back("local rows are evaluated on the shared validation split");
    return t;
}

json run_metrics(const fed::SimulationConfig& cfg, const fed::SimulationResult& r, const metrics::ReportTable& t) {
    json locals = json::array();
    for (const auto& l : r.local_summaries) {
        locals.push_back({{"client_id", l.client_id},
                          {"kind", learn::to_string(l.kind)},
                          {"train_size", l.train_size},
                          {"train_accuracy_pct", l.train_accuracy_pct},
                          {"validation", eval_to_json(l.validation)}});
    }
    json rounds = json::array();
    for (const auto& e : r.log.entries()) {
        rounds.push_back({{"round", e.round_index}, {"train_acc", e.train_accuracy}, {"val_acc", e.val_accuracy}});
    }
    json messages = json::object();
    for (std::size_t i = 0; i < fed::kMessageTypeCount; ++i) {
        messages[std::string(fed::message_type_name(i))] = r.messages_sent[i];
    }
    json j = {{"mode", fed::to_string(cfg.mode)},
              {"seed", cfg.seed},
              {"train_size", r.train_size},
              {"val_size", r.val_size},
              {"shard_sizes", r.shard_sizes},
              {"cleaning",
               {{"rows_read", r.cleaning.rows_read},
                {"rows_dropped_missing", r.cleaning.rows_dropped_missing},
                {"cells_imputed", r.cleaning.cells_imputed},
                {"rows_kept", r.cleaning.rows_kept},
                {"columns_dropped", r.cleaning.columns_dropped}}},
              {"training", eval_to_json(r.training)},
              {"validation", eval_to_json(r.validation)},
              {"locals", locals},
              {"rounds", rounds},
              {"messages_sent", messages},
              {"table", table_to_json(t)}};
    if (r.aggregation) {
        const auto& a = *r.aggregation;
        json agg = {{"svm_locals", a.svm_locals},
                    {"dt_locals", a.dt_locals},
                    {"nb_locals", a.nb_locals},
                    {"concatenated_support_vectors", a.concatenated_support_vectors},
                    {"global_dataset_size", a.global_dataset_size},
                    {"kernel", a.kernel},
                    {"gamma", a.gamma},
                    {"svm_donor", a.svm_donor ? json(*a.svm_donor) : json(nullptr)},
                    {"dt_donor", a.dt_donor ? json(*a.dt_donor) : json(nullptr)},
                    {"dt_settings", a.dt_settings ? io::to_json(*a.dt_settings) : json(nullptr)},
                    {"retrain_epochs", a.retrain_epochs},
                    {"notes", a.notes}};
        j["aggregation"] = agg;
    }
    if (r.global.mean_feature_importances) j["mean_feature_importances"] = *r.global.mean_feature_importances;
    return j;
}

int cmd_run(const RunFlags& f, bool kinds_given, std::ostream& os) {
    fed::SimulationConfig cfg = staged("config", [&] {
        fed::SimulationConfig c;
        if (!f.input.empty()) c.input = f.input;
        c.schema = schema_or_default(f.schema);
        c.gen = f.gen.config(f.seed);
        c.missing = ingest::parse_missing_mode(f.missing);
        c.train_fraction = f.train_fraction;
        c.clients = f.clients;
        c.mode = fed::parse_aggregation_mode(f.mode);
        if (kinds_given) {
            c.kinds = parse_kinds(f.kinds);
        } else if (c.mode == fed::AggregationMode::fedavg) {
            c.kinds = {learn::ModelKind::svm};
        }
        c.rounds = f.rounds;
        c.hyper = f.learner.hyper();
        c.prox_mu = f.prox_mu;
        c.transport = fed::parse_transport(f.transport);
        c.port = f.port;
        c.seed = f.seed;
        (void)metrics::parse_report_format(f.format);
        return c;
    });
    const auto result = fed::run_simulation(cfg);

    const fs::path out = f.out;
    const auto table = run_table(cfg, result);
    staged("write", [&] {
        ensure_dir(out);
        ensure_dir(out / "locals");
        fed::save_global(out / "global_model.json", result.global);
        for (const auto& l : result.locals) {
            io::save_model(out / "locals" /
                               ("client_" + std::to_string(l.meta.client_id) + "_" + learn::to_string(l.kind()) + ".json"),
                           l);
        }
        write_text(out / "report.txt", metrics::render(table, metrics::ReportFormat::text));
        write_text(out / "report.csv", metrics::render(table, metrics::ReportFormat::csv));
        write_text(out / "metrics.json", run_metrics(cfg, result, table).dump(1) + "\n");
        metrics::emit_curves(result.log, out / "curves.csv");
        std::ostringstream conf;
        write_run_config(conf, f, kinds_text(cfg.kinds));
        write_text(out / "run_config.txt", conf.str());
    });

    os << metrics::render(table, metrics::parse_report_format(f.format));
    return 0;
}

// Splices a `run --config FILE` into the argument list: each key=value line
// becomes --key value unless the command line already sets that key.
std::vector<std::string> with_run_config(std::vector<std::string> args) {
    std::string path;
    std::vector<std::string> rest;
    std::vector<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
            path = args[++i];
            continue;
        }
        if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
            continue;
        }
        if (a.rfind("--", 0) == 0) given.push_back(a.substr(2, a.find('=') - 2));
        rest.push_back(a);
    }
    if (path.empty()) return rest;

    const std::string body = staged("config", [&] { return io::read_file(path); });
    std::istringstream in(body);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = text::strip_cr(line);
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw CLI::ConversionError(path + " line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key(text::trim(t.substr(0, eq)));
        const std::string value(text::trim(t.substr(eq + 1)));
        if (std::find(given.begin(), given.end(), key) != given.end()) continue;
        rest.push_back("--" + key);
        rest.push_back(value);
    }
    return rest;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Federated carrier-screening simulator over binned CBC records", "fedscreen"};
    app.set_version_flag("--version", version_text());
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic raw CBC dataset");
    GenFlags gen_flags;
    std::uint64_t gen_seed = 42;
    std::string gen_schema, gen_out = "out";
    gen_flags.add(gen);
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--schema", gen_schema, "Reference-range file (default: built-in ranges)");
    std::string gen_output;
    gen->add_option("--out", gen_out, "Output directory; writes raw.csv")->capture_default_str();
    gen->add_option("--output", gen_output, "Output file, instead of <out>/raw.csv");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "Clean a raw CSV and bin it");
    std::string pre_input, pre_schema, pre_missing = "drop", pre_out = "out";
    pre->add_option("--input", pre_input, "Raw patient CSV")->required();
    pre->add_option("--schema", pre_schema, "Reference-range file (default: built-in ranges)");
    pre->add_option("--missing", pre_missing, "Missing-value rule: drop or neighbor-average")->capture_default_str();
    std::string pre_output;
    pre->add_option("--out", pre_out, "Output directory; writes binned.csv and cleaning.txt")->capture_default_str();
    pre->add_option("--output", pre_output, "Output file, instead of <out>/binned.csv");

    // split
    auto* spl = app.add_subcommand("split", "Split binned rows into train/validation and client shards");
    std::string spl_input, spl_out = "out";
    double spl_fraction = 0.7;
    std::size_t spl_clients = 3;
    std::uint64_t spl_seed = 42;
    spl->add_option("--input", spl_input, "Binned CSV")->required();
    spl->add_option("--train-fraction", spl_fraction, "Training share")->capture_default_str();
    spl->add_option("--clients", spl_clients, "Number of client shards")->capture_default_str();
    spl->add_option("--seed", spl_seed, "Random seed")->capture_default_str();
    spl->add_option("--out", spl_out, "Output directory; writes train.csv, val.csv, shard_<i>.csv")
        ->capture_default_str();

    // train-local
    auto* trn = app.add_subcommand("train-local", "Train one client's local model on a binned shard");
    std::string trn_input, trn_kind = "svm", trn_out = "out";
    std::uint32_t trn_id = 1;
    std::uint64_t trn_seed = 42;
    LearnerFlags trn_flags;
    trn->add_option("--input", trn_input, "Binned shard CSV")->required();
    trn->add_option("--kind", trn_kind, "Model kind: dt, nb or svm")->capture_default_str();
    trn->add_option("--client-id", trn_id, "Client id (1-based)")->capture_default_str();
    trn->add_option("--seed", trn_seed, "Run seed")->capture_default_str();
    trn_flags.add(trn);
    trn->add_option("--out", trn_out, "Output directory; writes client_<id>_<kind>.json")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Run the full federated pipeline");
    RunFlags rf;
    std::string run_config_path;  // consumed by with_run_config before parsing
    run->add_option("--config", run_config_path, "Flat key=value file; flags given on the command line override it");
    run->add_option("--input", rf.input, "Raw patient CSV (default: synthetic data)");
    run->add_option("--schema", rf.schema, "Reference-range file (default: built-in ranges)");
    rf.gen.add(run);
    run->add_option("--missing", rf.missing, "Missing-value rule: drop or neighbor-average")->capture_default_str();
    run->add_option("--train-fraction", rf.train_fraction, "Training share")->capture_default_str();
    run->add_option("--clients", rf.clients, "Number of clients")->capture_default_str();
    auto* kinds_opt = run->add_option("--kinds", rf.kinds,
                                      "Comma-separated kinds assigned round-robin (default dt,nb,svm; svm for fedavg)");
    run->add_option("--mode", rf.mode, "Aggregation: paper13 or fedavg")->capture_default_str();
    run->add_option("--rounds", rf.rounds, "FedAvg rounds")->capture_default_str();
    rf.learner.add(run);
    run->add_option("--prox-mu", rf.prox_mu, "FedAvg proximal weight")->capture_default_str();
    run->add_option("--transport", rf.transport, "inproc or tcp")->capture_default_str();
    run->add_option("--port", rf.port, "TCP port (0 picks a free one)")->capture_default_str();
    run->add_option("--seed", rf.seed, "Run seed")->capture_default_str();
    run->add_option("--out,--report", rf.out, "Output directory")->capture_default_str();
    run->add_option("--format", rf.format, "Console report format: text or csv")->capture_default_str();

    // eval
    auto* evl = app.add_subcommand("eval", "Evaluate a global or local model file on a binned CSV");
    std::string evl_model, evl_input, evl_split = "validation", evl_name, evl_format = "text", evl_out = "out";
    evl->add_option("--model", evl_model, "Model JSON (global or local)")->required();
    evl->add_option("--input", evl_input, "Binned CSV")->required();
    evl->add_option("--split", evl_split, "Split tag: train or validation")->capture_default_str();
    evl->add_option("--name", evl_name, "Approach name in the report");
    evl->add_option("--format", evl_format, "text or csv")->capture_default_str();
    evl->add_option("--out", evl_out, "Output directory; writes eval.json")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "Render metrics.json or eval.json files as a report table");
    std::vector<std::string> rep_inputs;
    std::string rep_title, rep_format = "text", rep_out = "out";
    rep->add_option("--input", rep_inputs, "metrics.json or eval.json files")->required();
    rep->add_option("--title", rep_title, "Table title");
    rep->add_option("--format", rep_format, "text or csv")->capture_default_str();
    rep->add_option("--out", rep_out, "Output directory; writes report.txt or report.csv")->capture_default_str();

    if (argc > 1 && argv[1][0] != '-') {
        bool known = false;
        for (const auto* sub : app.get_subcommands([](CLI::App*) { return true; })) known |= sub->get_name() == argv[1];
        if (!known) {
            err << "usage error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
            return 1;
        }
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        if (!args.empty() && args.front() == "run") args = with_run_config(std::move(args));
        // CLI11 consumes the vector from the back
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const Error& e) {
        err << "error [" << e.stage() << "]: " << to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*gen) return cmd_gen(gen_flags, gen_seed, gen_schema, gen_out, gen_output, out);
        if (*pre) return cmd_preprocess(pre_input, pre_schema, pre_missing, pre_out, pre_output, out);
        if (*spl) return cmd_split(spl_input, spl_fraction, spl_clients, spl_seed, spl_out, out);
        if (*trn) return cmd_train_local(trn_input, trn_kind, trn_id, trn_seed, trn_flags, trn_out, out);
        if (*run) return cmd_run(rf, kinds_opt->count() > 0, out);
        if (*evl) return cmd_eval(evl_model, evl_input, evl_split, evl_name, evl_format, evl_out, out);
        if (*rep) return cmd_report(rep_inputs, rep_title, rep_format, rep_out, out);
    } catch (const Error& e) {
        err << "error";
        if (!e.stage().empty()) err << " [" << e.stage() << "]";
        err << ": " << to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace fedscreen::cli
